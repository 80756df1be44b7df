#pragma once

// Independent reference computations used by the tests. Deliberately naive.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using C = std::complex<double>;

// |X[k]|^2 by direct summation, k = 0..n-1.
inline std::vector<double> periodogram(const std::vector<C>& x) {
  const std::size_t n = x.size();
  std::vector<double> p(n);
  // Twiddles by table so the inner loop is a lookup.
  std::vector<C> w(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    w[m] = C(std::cos(a), std::sin(a));
  }
  for (std::size_t k = 0; k < n; ++k) {
    C acc = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * w[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    p[k] = std::norm(acc);
  }
  return p;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double mse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double elu(double x) { return x > 0.0 ? x : std::exp(x) - 1.0; }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace oracle
