#include "satsense/stats.hpp"

#include <cmath>

#include "satsense/error.hpp"

namespace satsense {

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty sequence");
  double sum = 0.0;
  for (double v : x) sum += v;
  return sum / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  const double mu = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double mean_squared_error(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("mse: length mismatch");
  if (x.empty()) throw InvalidArgument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 2) throw InvalidArgument("pearson: need at least two samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson: zero-variance sequence");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace satsense
