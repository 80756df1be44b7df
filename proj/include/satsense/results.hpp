#pragma once

// Append-only table of (model, snr, loss_rate, num_signals, metric, value, seed)
// rows, written as CSV. Conditions that do not apply to a row are left empty.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace satsense {

struct ResultRow {
  std::string model;
  std::optional<double> snr_db;
  std::optional<double> loss_rate;
  std::string num_signals;  // a count, "all", or empty
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
};

class ResultsTable {
 public:
  void append(ResultRow row);
  void extend(const ResultsTable& other);
  const std::vector<ResultRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  /// First matching row's value, if any.
  std::optional<double> find(const std::string& model, const std::string& metric, std::optional<double> snr_db,
                             std::optional<double> loss_rate, const std::string& num_signals = "all") const;

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
  static ResultsTable read_csv(const std::filesystem::path& path);

 private:
  std::vector<ResultRow> rows_;
};

/// Shortest round-trip decimal form used for every number in the CSV.
std::string format_number(double v);

}  // namespace satsense
