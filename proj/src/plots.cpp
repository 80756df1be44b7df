#include "satsense/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "satsense/error.hpp"

namespace satsense {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 190, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  return s.str();
}

std::string empty_figure(const std::string& title) {
  return header(title) + "<text x=\"" + px(kWidth / 2) + "\" y=\"" + px(kHeight / 2) +
         "\" text-anchor=\"middle\" fill=\"#888\">no rows for this figure in the table</text>\n</svg>\n";
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) return empty_figure(title);
  if (x1 == x0) {
    x0 -= 1;
    x1 += 1;
  }
  const double pad = y1 > y0 ? 0.05 * (y1 - y0) : 0.5;
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream s;
  s << header(title);
  s << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    s << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(kTop + ph + 18) << "\" text-anchor=\"middle\">" << num(xv)
      << "</text>\n";
    s << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n";
    s << "<line x1=\"" << px(kLeft) << "\" x2=\"" << px(kLeft + pw) << "\" y1=\"" << px(sy(yv)) << "\" y2=\""
      << px(sy(yv)) << "\" stroke=\"#eee\"/>\n";
  }
  s << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kHeight - 15) << "\" text-anchor=\"middle\">"
    << escape(x_label) << "</text>\n";
  s << "<text transform=\"translate(18," << px(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[i].points) s << px(sx(x)) << ',' << px(sy(y)) << ' ';
    s << "\"/>\n";
    for (const auto& [x, y] : series[i].points) {
      s << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(i);
    s << "<line x1=\"" << px(kLeft + pw + 12) << "\" x2=\"" << px(kLeft + pw + 32) << "\" y1=\"" << px(ly - 4)
      << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << px(kLeft + pw + 38) << "\" y=\"" << px(ly) << "\">" << escape(series[i].name)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

namespace {

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

// Metric vs SNR, one series per (model, loss rate); "all" signal rows only.
std::vector<Series> by_model_and_loss(const ResultsTable& t, const std::string& metric,
                                      const std::vector<std::string>& models) {
  std::map<std::pair<std::string, double>, Series> m;
  for (const ResultRow& r : t.rows()) {
    if (r.metric != metric || r.num_signals != "all" || !r.snr_db || !r.loss_rate) continue;
    if (std::find(models.begin(), models.end(), r.model) == models.end()) continue;
    Series& s = m[{r.model, *r.loss_rate}];
    s.name = r.model + " loss " + num(100.0 * *r.loss_rate) + "%";
    s.points.emplace_back(*r.snr_db, r.value);
  }
  std::vector<Series> out;
  for (auto& [key, s] : m) {
    std::sort(s.points.begin(), s.points.end());
    out.push_back(std::move(s));
  }
  return out;
}

// Accuracy vs SNR averaged over loss rates, one series per tagged model.
std::vector<Series> tagged_accuracy(const ResultsTable& t, const std::string& prefix) {
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (const ResultRow& r : t.rows()) {
    if (r.metric != "accuracy" || r.num_signals != "all" || !r.snr_db || !starts_with(r.model, prefix)) continue;
    auto& cell = acc[r.model][*r.snr_db];
    cell.first += r.value;
    cell.second += 1;
  }
  std::vector<Series> out;
  for (const auto& [model, cells] : acc) {
    Series s{model, {}};
    for (const auto& [snr, sum] : cells) s.points.emplace_back(snr, sum.first / sum.second);
    out.push_back(std::move(s));
  }
  return out;
}

std::string heatmap_svg(const ResultsTable& t) {
  std::map<std::pair<int, int>, double> cells;
  int n = 0;
  for (const ResultRow& r : t.rows()) {
    int i = 0, j = 0;
    if (r.model != "doppler" || std::sscanf(r.metric.c_str(), "pearson[%d-%d]", &i, &j) != 2) continue;
    cells[{i, j}] = r.value;
    n = std::max(n, std::max(i, j) + 1);
  }
  const std::string title = "Pearson coefficient between Doppler-shifted streams";
  if (n == 0) return empty_figure(title);
  const double size = std::min(kWidth - 160, kHeight - 90) / n;
  std::ostringstream s;
  s << header(title);
  for (const auto& [ij, v] : cells) {
    // |v| = 0 -> white, 1 -> dark blue.
    const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::min(1.0, std::abs(v)))));
    char color[16];
    std::snprintf(color, sizeof color, "#%02x%02xff", shade, shade);
    const double x = 80 + ij.second * size, y = 45 + ij.first * size;
    s << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(size) << "\" height=\"" << px(size)
      << "\" fill=\"" << color << "\" stroke=\"#ccc\"/>\n";
    s << "<text x=\"" << px(x + size / 2) << "\" y=\"" << px(y + size / 2 + 4)
      << "\" text-anchor=\"middle\" font-size=\"9\">" << num(v) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string bars_svg(const ResultsTable& t, const std::string& metric, const std::string& title) {
  std::vector<std::pair<std::string, double>> bars;
  for (const ResultRow& r : t.rows()) {
    if (r.metric == metric) bars.emplace_back(r.model, r.value);
  }
  if (bars.empty()) return empty_figure(title);
  double top = 0.0;
  for (const auto& b : bars) top = std::max(top, b.second);
  if (top <= 0.0) top = 1.0;
  const double pw = kWidth - kLeft - 40, ph = kHeight - kTop - kBottom;
  const double w = pw / static_cast<double>(bars.size());
  std::ostringstream s;
  s << header(title);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double h = bars[i].second / top * ph;
    const double x = kLeft + w * static_cast<double>(i) + 0.15 * w;
    s << "<rect x=\"" << px(x) << "\" y=\"" << px(kTop + ph - h) << "\" width=\"" << px(0.7 * w)
      << "\" height=\"" << px(h) << "\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n";
    s << "<text x=\"" << px(x + 0.35 * w) << "\" y=\"" << px(kTop + ph - h - 4) << "\" text-anchor=\"middle\">"
      << num(bars[i].second) << "</text>\n";
    s << "<text x=\"" << px(x + 0.35 * w) << "\" y=\"" << px(kTop + ph + 18) << "\" text-anchor=\"middle\">"
      << escape(bars[i].first) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << text;
}

}  // namespace

std::vector<std::string> figure_names() {
  return {"doppler_pearson.svg",   "recovery_mse.svg",       "recovery_pearson.svg",
          "accuracy_glss_dcs.svg", "ablation_heads.svg",     "ablation_embedding.svg",
          "ablation_satellites.svg", "ablation_cosets.svg",  "ablation_sampling.svg",
          "flops.svg"};
}

std::vector<std::filesystem::path> emit_plots(const ResultsTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::string> names = figure_names();
  const std::vector<std::string> svgs = {
      heatmap_svg(table),
      line_chart_svg("Recovery MSE", "SNR (dB)", "MSE", by_model_and_loss(table, "mse", {"cae", "ae"})),
      line_chart_svg("Recovery correlation", "SNR (dB)", "Pearson", by_model_and_loss(table, "pearson", {"cae", "ae"})),
      line_chart_svg("Sensing accuracy", "SNR (dB)", "accuracy",
                     by_model_and_loss(table, "accuracy", {"glss", "dcs"})),
      line_chart_svg("Attention heads", "SNR (dB)", "accuracy", tagged_accuracy(table, "glss[heads=")),
      line_chart_svg("Embedding dimension", "SNR (dB)", "accuracy", tagged_accuracy(table, "glss[M=")),
      line_chart_svg("Collaborating satellites", "SNR (dB)", "accuracy", tagged_accuracy(table, "glss[K=")),
      line_chart_svg("Number of cosets", "SNR (dB)", "accuracy", tagged_accuracy(table, "glss[P=")),
      line_chart_svg("Sampling mode", "SNR (dB)", "accuracy", tagged_accuracy(table, "glss[mode=")),
      bars_svg(table, "mflops", "GLSS forward MFLOPs"),
  };
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < names.size(); ++i) {
    write_text(dir / names[i], svgs[i]);
    written.push_back(dir / names[i]);
  }
  table.write_csv(dir / "results.csv");
  written.push_back(dir / "results.csv");
  return written;
}

}  // namespace satsense
