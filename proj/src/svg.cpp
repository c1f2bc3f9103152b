#include "collapse/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace collapse::svg {

namespace {

constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 12.0;
constexpr double kMarginTop = 26.0;
constexpr double kMarginBottom = 38.0;
constexpr double kTitleHeight = 30.0;
constexpr std::size_t kMaxPolylinePoints = 600;

std::string fixed(double v) {
  char buf[48];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return ec == std::errc{} ? std::string(buf, end) : "0";
}

std::string tick_label(double v) {
  char buf[48];
  const double a = std::abs(v);
  const auto fmt = (a != 0.0 && (a < 1e-3 || a >= 1e5)) ? std::chars_format::scientific : std::chars_format::general;
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, fmt, 3);
  return ec == std::errc{} ? std::string(buf, end) : "?";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
};

void pad(Range& r) {
  if (!r.valid()) {
    r.lo = 0.0;
    r.hi = 1.0;
  } else if (r.hi - r.lo < 1e-300) {
    const double d = std::max(std::abs(r.lo) * 0.05, 0.5);
    r.lo -= d;
    r.hi += d;
  }
}

std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

class PanelFrame {
public:
  PanelFrame(const Panel& p, double x0, double y0, double w, double h) : panel_(p), x0_(x0), y0_(y0), w_(w), h_(h) {
    for (const auto& s : p.series) {
      for (double v : s.x) {
        if (std::isfinite(v)) xr_.add(v);
      }
      for (double v : s.y) {
        if (std::isfinite(v) && (!p.log_y || v > 0.0)) yr_.add(p.log_y ? std::log10(v) : v);
      }
    }
    pad(xr_);
    pad(yr_);
  }

  double px(double x) const { return x0_ + kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * plot_w(); }
  double py(double y) const {
    const double v = panel_.log_y ? std::log10(y) : y;
    return y0_ + kMarginTop + (1.0 - (v - yr_.lo) / (yr_.hi - yr_.lo)) * plot_h();
  }
  bool drawable(double x, double y) const {
    return std::isfinite(x) && std::isfinite(y) && (!panel_.log_y || y > 0.0);
  }

  void draw(std::ostringstream& out) const {
    const double left = x0_ + kMarginLeft;
    const double top = y0_ + kMarginTop;
    out << "<g>\n";
    out << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(plot_w())
        << "\" height=\"" << fixed(plot_h()) << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"0.8\"/>\n";
    out << "<text x=\"" << fixed(left + plot_w() / 2) << "\" y=\"" << fixed(y0_ + 16) << "\" text-anchor=\"middle\" font-size=\"12\">"
        << escape(panel_.title) << "</text>\n";
    for (double t : nice_ticks(xr_.lo, xr_.hi)) {
      const double x = px(t);
      out << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(top + plot_h()) << "\" x2=\"" << fixed(x) << "\" y2=\""
          << fixed(top + plot_h() + 4) << "\" stroke=\"#888\"/>\n";
      out << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(top + plot_h() + 15) << "\" text-anchor=\"middle\" font-size=\"9\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(yr_.lo, yr_.hi)) {
      const double value = panel_.log_y ? std::pow(10.0, t) : t;
      const double y = py(value);
      out << "<line x1=\"" << fixed(left - 4) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(left) << "\" y2=\"" << fixed(y)
          << "\" stroke=\"#888\"/>\n";
      out << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(y + 3) << "\" text-anchor=\"end\" font-size=\"9\">"
          << tick_label(value) << "</text>\n";
    }
    out << "<text x=\"" << fixed(left + plot_w() / 2) << "\" y=\"" << fixed(top + plot_h() + 30)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(panel_.x_label) << "</text>\n";
    out << "<text transform=\"translate(" << fixed(x0_ + 12) << "," << fixed(top + plot_h() / 2)
        << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"10\">" << escape(panel_.y_label) << "</text>\n";

    for (const auto& s : panel_.series) draw_series(out, s);
    draw_legend(out);
    out << "</g>\n";
  }

private:
  double plot_w() const { return w_ - kMarginLeft - kMarginRight; }
  double plot_h() const { return h_ - kMarginTop - kMarginBottom; }

  std::string stroke(const Series& s) const {
    std::string a = "stroke=\"" + s.color + "\" stroke-width=\"" + fixed(s.width) + "\"";
    if (s.opacity < 1.0) a += " stroke-opacity=\"" + fixed(s.opacity) + "\"";
    if (s.dashed) a += " stroke-dasharray=\"6,4\"";
    return a;
  }

  void draw_series(std::ostringstream& out, const Series& s) const {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.style == Style::markers) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!drawable(s.x[i], s.y[i])) continue;
        const double x = px(s.x[i]);
        const double y = py(s.y[i]);
        out << "<path d=\"M" << fixed(x - 3) << ' ' << fixed(y - 3) << "L" << fixed(x + 3) << ' ' << fixed(y + 3) << "M"
            << fixed(x - 3) << ' ' << fixed(y + 3) << "L" << fixed(x + 3) << ' ' << fixed(y - 3) << "\" fill=\"none\" "
            << stroke(s) << "/>\n";
      }
      return;
    }
    if (s.style == Style::step) {
      // x holds bin edges, y the bin heights.
      if (s.x.size() < 2 || s.y.size() + 1 != s.x.size()) return;
      const double base = py(panel_.log_y ? std::pow(10.0, yr_.lo) : std::max(yr_.lo, 0.0));
      out << "<path d=\"M" << fixed(px(s.x[0])) << ' ' << fixed(base);
      for (std::size_t i = 0; i < s.y.size(); ++i) {
        const double y = drawable(s.x[i], s.y[i]) ? py(s.y[i]) : base;
        out << "L" << fixed(px(s.x[i])) << ' ' << fixed(y) << "L" << fixed(px(s.x[i + 1])) << ' ' << fixed(y);
      }
      out << "L" << fixed(px(s.x.back())) << ' ' << fixed(base) << "\" fill=\"none\" " << stroke(s) << "/>\n";
      return;
    }
    const std::size_t stride = n > kMaxPolylinePoints ? (n + kMaxPolylinePoints - 1) / kMaxPolylinePoints : 1;
    std::string points;
    auto flush = [&] {
      if (!points.empty()) out << "<polyline fill=\"none\" " << stroke(s) << " points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (i % stride != 0 && i + 1 != n) continue;
      if (!drawable(s.x[i], s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fixed(px(s.x[i])) + "," + fixed(py(s.y[i]));
    }
    flush();
  }

  void draw_legend(std::ostringstream& out) const {
    double y = y0_ + kMarginTop + 10;
    const double x = x0_ + kMarginLeft + plot_w() - 110;
    for (const auto& s : panel_.series) {
      if (s.label.empty()) continue;
      out << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(x + 18) << "\" y2=\"" << fixed(y) << "\" "
          << stroke(s) << "/>\n";
      out << "<text x=\"" << fixed(x + 22) << "\" y=\"" << fixed(y + 3) << "\" font-size=\"9\">" << escape(s.label) << "</text>\n";
      y += 12;
    }
  }

  const Panel& panel_;
  double x0_, y0_, w_, h_;
  Range xr_, yr_;
};

} // namespace

Series trace(std::vector<double> x, std::vector<double> y) {
  Series s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = color::trace;
  s.width = 0.8;
  s.opacity = 0.35;
  return s;
}

Series mean(std::vector<double> x, std::vector<double> y, std::string label) {
  Series s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = color::mean;
  s.width = 1.8;
  s.label = std::move(label);
  return s;
}

Series formula(std::vector<double> x, std::vector<double> y, std::string label) {
  Series s;
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = color::formula;
  s.width = 1.6;
  s.dashed = true;
  s.label = std::move(label);
  return s;
}

Series bound(std::vector<double> x, std::vector<double> y, std::string label) {
  Series s = formula(std::move(x), std::move(y), std::move(label));
  s.color = color::bound;
  return s;
}

std::vector<double> generations(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i + 1);
  return g;
}

std::string render(const Figure& figure) {
  const int cols = std::max(1, figure.columns);
  const auto count = static_cast<int>(figure.panels.size());
  const int rows = std::max(1, (count + cols - 1) / cols);
  const double width = cols * figure.panel_width;
  const double height = kTitleHeight + rows * figure.panel_height;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- config_hash: " << escape(figure.config_hash) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
      << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height) << "\" font-family=\"sans-serif\">\n";
  out << "<metadata>config_hash=" << escape(figure.config_hash) << "</metadata>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(figure.title)
      << "</text>\n";
  for (int i = 0; i < count; ++i) {
    const double x0 = (i % cols) * figure.panel_width;
    const double y0 = kTitleHeight + (i / cols) * figure.panel_height;
    PanelFrame(figure.panels[static_cast<std::size_t>(i)], x0, y0, figure.panel_width, figure.panel_height).draw(out);
  }
  out << "</svg>\n";
  return out.str();
}

} // namespace collapse::svg
