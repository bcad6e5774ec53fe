#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

namespace saddlefit {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureResult {
  double value;
  double abs_error;
};

/// Adaptive Gauss-Kronrod quadrature (QAGS; QAGI/QAGIU/QAGIL for infinite
/// limits). Throws QuadratureError when the requested accuracy is not met.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double epsabs, double epsrel, std::size_t limit = 2000);

}  // namespace saddlefit
