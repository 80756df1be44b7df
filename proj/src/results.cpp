#include "satsense/results.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "satsense/error.hpp"

namespace satsense {

namespace {

constexpr const char* kHeader = "model,snr_db,loss_rate,num_signals,metric,value,seed";

bool same(std::optional<double> a, std::optional<double> b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) < 1e-12;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ResultsTable::append(ResultRow row) {
  if (row.model.empty() || row.metric.empty()) throw InvalidArgument("result rows need a model and a metric");
  if (row.model.find(',') != std::string::npos || row.metric.find(',') != std::string::npos ||
      row.num_signals.find(',') != std::string::npos) {
    throw InvalidArgument("result fields may not contain commas");
  }
  rows_.push_back(std::move(row));
}

void ResultsTable::extend(const ResultsTable& other) {
  for (const ResultRow& r : other.rows_) rows_.push_back(r);
}

std::optional<double> ResultsTable::find(const std::string& model, const std::string& metric,
                                         std::optional<double> snr_db, std::optional<double> loss_rate,
                                         const std::string& num_signals) const {
  for (const ResultRow& r : rows_) {
    if (r.model == model && r.metric == metric && r.num_signals == num_signals && same(r.snr_db, snr_db) &&
        same(r.loss_rate, loss_rate)) {
      return r.value;
    }
  }
  return std::nullopt;
}

std::string ResultsTable::to_csv() const {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const ResultRow& r : rows_) {
    out << r.model << ',' << (r.snr_db ? format_number(*r.snr_db) : "") << ','
        << (r.loss_rate ? format_number(*r.loss_rate) : "") << ',' << r.num_signals << ',' << r.metric << ','
        << format_number(r.value) << ',' << r.seed << '\n';
  }
  return out.str();
}

void ResultsTable::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << to_csv();
}

ResultsTable ResultsTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results table: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ConfigError("not a results table: " + path.string());
  ResultsTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 6) f.emplace_back();
    if (f.size() != 7) throw ConfigError("malformed results row: " + line);
    t.append(ResultRow{f[0], parse_optional(f[1]), parse_optional(f[2]), f[3], f[4], std::stod(f[5]),
                       std::stoull(f[6])});
  }
  return t;
}

}  // namespace satsense
