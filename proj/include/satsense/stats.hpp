#pragma once

#include <span>

namespace satsense {

double mean(std::span<const double> x);

// Population standard deviation (divides by n).
double stddev(std::span<const double> x);

double mean_squared_error(std::span<const double> x, std::span<const double> y);

/// Pearson correlation coefficient. Throws UndefinedCorrelation when either
/// sequence has zero variance, InvalidArgument on length mismatch or empty input.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace satsense
