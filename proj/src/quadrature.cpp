#include "saddlefit/quadrature.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace saddlefit {

namespace {

struct Callback {
  const std::function<double(double)>* f;
  std::exception_ptr error;
};

double trampoline(double x, void* params) {
  auto* cb = static_cast<Callback*>(params);
  if (cb->error) return 0.0;
  try {
    return (*cb->f)(x);
  } catch (...) {
    cb->error = std::current_exception();
    return 0.0;
  }
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double epsabs, double epsrel, std::size_t limit) {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });

  if (lo == hi) return {0.0, 0.0};
  double sign = 1.0;
  if (lo > hi) {
    std::swap(lo, hi);
    sign = -1.0;
  }

  std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(limit));
  Callback cb{&f, nullptr};
  gsl_function gf{&trampoline, &cb};
  double value = 0.0;
  double err = 0.0;
  int status;
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) {
    status = gsl_integration_qagi(&gf, epsabs, epsrel, limit, ws.get(), &value, &err);
  } else if (hi_inf) {
    status = gsl_integration_qagiu(&gf, lo, epsabs, epsrel, limit, ws.get(), &value, &err);
  } else if (lo_inf) {
    status = gsl_integration_qagil(&gf, hi, epsabs, epsrel, limit, ws.get(), &value, &err);
  } else {
    status = gsl_integration_qags(&gf, lo, hi, epsabs, epsrel, limit, ws.get(), &value, &err);
  }
  if (cb.error) std::rethrow_exception(cb.error);
  if (status != GSL_SUCCESS) {
    throw QuadratureError(std::string("adaptive quadrature failed: ") + gsl_strerror(status) +
                          " (estimate " + std::to_string(value) + ", error " +
                          std::to_string(err) + ")");
  }
  return {sign * value, err};
}

}  // namespace saddlefit
