#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "colu/experiments.hpp"

namespace colu::exp {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 50.0;
constexpr std::size_t kSamples = 601;

struct Series {
  std::string label;
  std::string color;
  bool dashed;
  std::vector<double> xs;
  std::vector<double> ys;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

Series sample(const std::string& label, const std::string& color, bool dashed, double lo, double hi,
              const std::function<double(double)>& f) {
  Series s{label, color, dashed, {}, {}};
  for (std::size_t i = 0; i < kSamples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kSamples - 1);
    s.xs.push_back(x);
    s.ys.push_back(f(x));
  }
  return s;
}

std::string render(const std::string& title, const std::vector<Series>& series) {
  double x_lo = series.front().xs.front(), x_hi = series.front().xs.back();
  double y_lo = 0.0, y_hi = 0.0;
  for (const auto& s : series) {
    y_lo = std::min(y_lo, *std::min_element(s.ys.begin(), s.ys.end()));
    y_hi = std::max(y_hi, *std::max_element(s.ys.begin(), s.ys.end()));
  }
  const double pad = 0.05 * (y_hi - y_lo + 1e-12);
  y_lo -= pad;
  y_hi += pad;
  const auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  const auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
  // Axes through the origin when visible, otherwise along the frame.
  const double ax_y = py(std::clamp(0.0, y_lo, y_hi));
  const double ax_x = px(std::clamp(0.0, x_lo, x_hi));
  svg << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(ax_y) << "\" x2=\"" << num(kWidth - kMargin) << "\" y2=\""
      << num(ax_y) << "\" stroke=\"#888\"/>\n"
      << "<line x1=\"" << num(ax_x) << "\" y1=\"" << num(kMargin) << "\" x2=\"" << num(ax_x) << "\" y2=\""
      << num(kHeight - kMargin) << "\" stroke=\"#888\"/>\n";
  for (int t = static_cast<int>(std::ceil(x_lo)); t <= static_cast<int>(std::floor(x_hi)); ++t) {
    svg << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kHeight - kMargin + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << t << "</text>\n";
  }
  svg << "<text x=\"" << num(kMargin - 6) << "\" y=\"" << num(py(y_hi) + 10)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(y_hi) << "</text>\n"
      << "<text x=\"" << num(kMargin - 6) << "\" y=\"" << num(py(y_lo))
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(y_lo) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " data-label=\"" << s.label << "\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (i) svg << ' ';
      svg << num(px(s.xs[i])) << ',' << num(py(s.ys[i]));
    }
    svg << "\"/>\n";
    const double ly = kMargin + 16.0 * static_cast<double>(k);
    svg << "<line x1=\"" << num(kMargin + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kMargin + 34) << "\" y2=\""
        << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
        << "<text x=\"" << num(kMargin + 40) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit_activation_plots(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw std::runtime_error("cannot create directory " + dir.string());

  std::vector<std::filesystem::path> written;
  for (act::Tag tag : act::kAllTags) {
    const act::ActivationKind kind(tag);
    const std::string name(act::tag_name(tag));
    std::vector<Series> series;
    series.push_back(sample("f(x)", "#1f77b4", false, -6.0, 6.0, [kind](double x) { return act::eval(kind, x); }));
    series.push_back(
        sample("f'(x)", "#d62728", true, -6.0, 6.0, [kind](double x) { return act::derivative(kind, x); }));
    const auto path = dir / (name + ".svg");
    write_text(path, render(name, series));
    written.push_back(path);
  }

  std::vector<Series> overlay;
  const std::pair<act::Tag, const char*> bump[] = {
      {act::Tag::CoLU, "#1f77b4"}, {act::Tag::Mish, "#2ca02c"}, {act::Tag::Swish, "#ff7f0e"}};
  for (const auto& [tag, color] : bump) {
    const act::ActivationKind kind(tag);
    overlay.push_back(sample(std::string(act::tag_name(tag)), color, false, -6.0, 6.0,
                             [kind](double x) { return act::eval(kind, x); }));
  }
  const auto path = dir / "bump_overlay.svg";
  write_text(path, render("colu / mish / swish", overlay));
  written.push_back(path);
  return written;
}

}  // namespace colu::exp
