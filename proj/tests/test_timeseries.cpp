#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "saddlefit/models.hpp"
#include "saddlefit/timeseries.hpp"

using namespace saddlefit;

TEST(Csv, RoundTripIsExact) {
  const auto inst = build("heston", std::vector<double>{0.118, 9.863, 0.034, -0.855, 0.25});
  const auto ts = simulate_series(inst, std::vector<double>{100.0, 0.034}, 1.0 / 252, 30, 5, 1);
  std::stringstream ss;
  write_timeseries_csv(ss, ts);
  EXPECT_EQ(ss.str().substr(0, 8), "t,x1,x2\n");
  const auto back = read_timeseries_csv(ss);
  EXPECT_EQ(back.dim, 2u);
  EXPECT_EQ(back.times, ts.times);
  EXPECT_EQ(back.values, ts.values);
}

TEST(Csv, ToleratesBlankLinesAndSpaces) {
  std::istringstream in("\nt, x1\n0, 1.5\n\n1 ,2e-3\r\n");
  const auto ts = read_timeseries_csv(in);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_DOUBLE_EQ(ts.values[1], 2e-3);
}

TEST(Csv, ErrorsReportLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_timeseries_csv(in);
    } catch (const CsvError& e) {
      return e.line();
    }
    return 999;
  };
  EXPECT_EQ(line_of("t,x1\n0,1\n1,abc\n"), 3u);
  EXPECT_EQ(line_of("t,x1\n0,1\n1,2,3\n"), 3u);
  EXPECT_EQ(line_of("t,x1\n0,1\n0,2\n"), 3u);
  EXPECT_EQ(line_of("time,x1\n0,1\n"), 1u);
  EXPECT_EQ(line_of("t,x1\n0,nan\n"), 2u);
  EXPECT_EQ(line_of(""), 0u);
  std::istringstream in("t,x1\n0,1\n1,abc\n");
  try {
    read_timeseries_csv(in);
  } catch (const CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Csv, TableReadWrite) {
  CsvTable t{{"a", "b"}, {{"1", "nan"}, {"2.5", "-inf"}}};
  std::stringstream ss;
  write_csv_table(ss, t);
  const auto back = read_csv_table(ss);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_TRUE(std::isnan(back.number(0, 1)));
  EXPECT_EQ(back.number(1, 1), -INFINITY);
  EXPECT_DOUBLE_EQ(back.number(1, 0), 2.5);
  EXPECT_THROW(back.column("c"), std::out_of_range);
}

TEST(Csv, ShortestRoundTripNumbers) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 58.0}) {
    EXPECT_EQ(std::stod(csv_number(v)), v);
  }
  EXPECT_EQ(csv_number(58.0), "58");
}

TEST(TimeSeriesType, Validation) {
  TimeSeries ts;
  ts.dim = 1;
  ts.push_back(0.0, std::vector<double>{1.0});
  ts.push_back(1.0, std::vector<double>{1.0});
  EXPECT_NO_THROW(ts.validate());
  ts.times[1] = 0.0;
  EXPECT_THROW(ts.validate(), std::invalid_argument);
  EXPECT_THROW(ts.push_back(2.0, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}
