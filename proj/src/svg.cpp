#include "hierglm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hierglm::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 320.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 40.0;
const char* const kChainColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Maps data coordinates onto the plot area.
struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

std::pair<double, double> padded_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1e-9, std::abs(lo) * 0.05 + 0.5);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void open(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << escape(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">"
      << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom << "\"/>"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom << "\"/></g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"10\">";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << bottom + 14 << "\" text-anchor=\"middle\">" << label(xv)
        << "</text>";
    out << "<text x=\"" << left - 4 << "\" y=\"" << num(f.py(yv) + 3) << "\" text-anchor=\"end\">" << label(yv)
        << "</text>";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << kHeight - 6 << "\" text-anchor=\"middle\">"
      << escape(xlabel) << "</text>";
  out << "<text x=\"12\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 12 "
      << (top + bottom) / 2 << ")\">" << escape(ylabel) << "</text></g>\n";
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* color, double width) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace

std::string trace_plot(const ChainDraws& draws, std::size_t param) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t c = 0; c < draws.chains; ++c) {
    for (std::size_t d = 0; d < draws.draws; ++d) {
      lo = std::min(lo, draws.at(c, d, param));
      hi = std::max(hi, draws.at(c, d, param));
    }
  }
  const auto [y0, y1] = padded_range(lo, hi);
  const Frame f{0.0, static_cast<double>(std::max<std::size_t>(draws.draws, 2) - 1), y0, y1};
  std::ostringstream out;
  open(out, "Trace: " + draws.param_names[param]);
  axes(out, f, "draw", draws.param_names[param]);
  for (std::size_t c = 0; c < draws.chains; ++c) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(draws.draws);
    for (std::size_t d = 0; d < draws.draws; ++d) {
      pts.emplace_back(f.px(static_cast<double>(d)), f.py(draws.at(c, d, param)));
    }
    out << polyline(pts, kChainColors[c % std::size(kChainColors)], 0.6);
  }
  out << "</svg>\n";
  return out.str();
}

std::string density_plot(const ChainDraws& draws, std::size_t param, Interval hdi) {
  const auto v = draws.parameter_draws(param);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / std::max(1.0, n - 1.0));
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  // Silverman's rule of thumb.
  const double bw = sd > 0.0 ? 1.06 * sd * std::pow(n, -0.2) : 1e-3;
  const auto [x0, x1] = padded_range(*mn - 2.0 * bw, *mx + 2.0 * bw);

  constexpr int kGrid = 200;
  std::vector<double> xs(kGrid), ys(kGrid, 0.0);
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < kGrid; ++g) {
    xs[g] = x0 + (x1 - x0) * g / (kGrid - 1);
    double s = 0.0;
    for (double x : v) {
      const double u = (xs[g] - x) / bw;
      s += std::exp(-0.5 * u * u);
    }
    ys[g] = s * norm;
  }
  const double ymax = *std::max_element(ys.begin(), ys.end());
  const Frame f{x0, x1, 0.0, ymax > 0.0 ? ymax * 1.05 : 1.0};

  std::ostringstream out;
  open(out, "Posterior: " + draws.param_names[param]);
  axes(out, f, draws.param_names[param], "density");
  // HDI region under the curve.
  std::vector<std::pair<double, double>> shade;
  shade.emplace_back(f.px(std::max(hdi.low, x0)), f.py(0.0));
  for (int g = 0; g < kGrid; ++g) {
    if (xs[g] >= hdi.low && xs[g] <= hdi.high) shade.emplace_back(f.px(xs[g]), f.py(ys[g]));
  }
  shade.emplace_back(f.px(std::min(hdi.high, x1)), f.py(0.0));
  out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < shade.size(); ++i) out << (i ? " " : "") << num(shade[i].first) << ',' << num(shade[i].second);
  out << "\"/>\n";
  std::vector<std::pair<double, double>> curve;
  for (int g = 0; g < kGrid; ++g) curve.emplace_back(f.px(xs[g]), f.py(ys[g]));
  out << polyline(curve, "#08519c", 1.5);
  out << "<text x=\"" << kWidth - kRight << "\" y=\"" << kTop + 12
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">HDI [" << label(hdi.low) << ", "
      << label(hdi.high) << "]</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string waic_forest(std::span<const ComparisonRow> rows) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : rows) {
    lo = std::min(lo, r.elpd_waic - 2.0 * r.se);
    hi = std::max(hi, r.elpd_waic + 2.0 * r.se);
  }
  const auto [x0, x1] = padded_range(lo, hi);
  const double k = static_cast<double>(rows.size());
  const Frame f{x0, x1, 0.0, k + 1.0};
  std::ostringstream out;
  open(out, "WAIC comparison (elpd +- SE)");
  axes(out, f, "elpd_waic", "");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = f.py(k - static_cast<double>(i));
    out << "<line x1=\"" << num(f.px(r.elpd_waic - r.se)) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(f.px(r.elpd_waic + r.se)) << "\" y2=\"" << num(y) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out << "<circle cx=\"" << num(f.px(r.elpd_waic)) << "\" cy=\"" << num(y) << "\" r=\"4\" fill=\""
        << (i == 0 ? "#d62728" : "#1f77b4") << "\"/>\n";
    out << "<text x=\"" << num(f.px(r.elpd_waic)) << "\" y=\"" << num(y - 8)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << r.rank << ". "
        << escape(r.model) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string ppc_histogram(std::span<const double> replicate_rates, double observed_rate, Interval hdi,
                          const std::string& title) {
  double lo = observed_rate, hi = observed_rate;
  for (double r : replicate_rates) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const auto [x0, x1] = padded_range(lo, hi);
  constexpr int kBins = 30;
  std::vector<int> counts(kBins, 0);
  for (double r : replicate_rates) {
    int b = static_cast<int>((r - x0) / (x1 - x0) * kBins);
    counts[std::clamp(b, 0, kBins - 1)]++;
  }
  const int cmax = std::max(1, *std::max_element(counts.begin(), counts.end()));
  const Frame f{x0, x1, 0.0, cmax * 1.1};
  std::ostringstream out;
  open(out, title);
  axes(out, f, "replicate cancellation rate", "count");
  out << "<g fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\">";
  for (int b = 0; b < kBins; ++b) {
    const double a = x0 + (x1 - x0) * b / kBins, e = x0 + (x1 - x0) * (b + 1) / kBins;
    out << "<rect x=\"" << num(f.px(a)) << "\" y=\"" << num(f.py(counts[b])) << "\" width=\""
        << num(f.px(e) - f.px(a)) << "\" height=\"" << num(f.py(0.0) - f.py(counts[b])) << "\"/>";
  }
  out << "</g>\n";
  if (std::isfinite(hdi.low) && std::isfinite(hdi.high)) {
    out << "<line x1=\"" << num(f.px(hdi.low)) << "\" y1=\"" << num(f.py(0.0) - 4) << "\" x2=\""
        << num(f.px(hdi.high)) << "\" y2=\"" << num(f.py(0.0) - 4)
        << "\" stroke=\"#08519c\" stroke-width=\"3\"/>\n";
  }
  out << "<line x1=\"" << num(f.px(observed_rate)) << "\" y1=\"" << kTop << "\" x2=\"" << num(f.px(observed_rate))
      << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  out << "<text x=\"" << num(f.px(observed_rate) + 4) << "\" y=\"" << kTop + 12
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">observed " << label(observed_rate)
      << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace hierglm::svg
