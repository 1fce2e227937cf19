#include "gapfield/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gapfield/common.hpp"

namespace gapfield {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::TwoDisks: return "two_disks";
    case ProblemKind::Dirichlet: return "dirichlet";
    default: return "neumann";
  }
}

struct AxisMap {
  double lo = 0.0, hi = 1.0;    // data range (already log10 for log axes)
  double p0 = 0.0, p1 = 1.0;    // pixel range
  double at(double v) const {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return p0 + t * (p1 - p0);
  }
};

void svg_text(std::ostringstream& out, double x, double y, const std::string& s,
              const char* anchor = "middle", int size = 12) {
  out << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
      << "\" font-family=\"sans-serif\" fill=\"#333\" text-anchor=\"" << anchor
      << "\">" << s << "</text>\n";
}

void svg_line(std::ostringstream& out, double x1, double y1, double x2, double y2,
              const char* color = "#999", double w = 1.0) {
  out << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\""
      << y2 << "\" stroke=\"" << color << "\" stroke-width=\"" << w << "\"/>\n";
}

// log10 decade ticks covering [lo, hi]
std::vector<int> decade_ticks(double lo, double hi) {
  std::vector<int> out;
  for (int d = static_cast<int>(std::floor(lo)); d <= static_cast<int>(std::ceil(hi)); ++d)
    out.push_back(d);
  return out;
}

std::string decade_label(int d) {
  std::ostringstream s;
  s << "1e" << d;
  return s.str();
}

}  // namespace

std::string sweep_csv(const SweepReport& report, const std::string& config_json,
                      const std::vector<double>* oracle_errs) {
  std::ostringstream out;
  out << kSweepCsvHeader;
  if (oracle_errs) out << ",oracle_err";
  out << "\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const SweepRow& r = report.rows[i];
    out << fmt(r.eps) << ',' << fmt(r.k1) << ',' << fmt(r.k2) << ',' << fmt(r.grad_x1)
        << ',' << fmt(r.grad_x2) << ',' << fmt(r.sup_norm) << ',' << fmt(r.lower_factor)
        << ',' << fmt(r.upper_factor) << ',' << r.terms_used << ',' << fmt(r.ratio_low)
        << ',' << fmt(r.ratio_up);
    if (oracle_errs)
      out << ',' << fmt(i < oracle_errs->size() ? (*oracle_errs)[i]
                                                : std::numeric_limits<double>::quiet_NaN());
    out << "\n";
  }

  int failed = 0;
  for (const SweepRow& r : report.rows) failed += r.failed ? 1 : 0;
  out << "# kind=" << kind_name(report.kind) << " rows=" << report.rows.size()
      << " failed=" << failed << "\n";
  try {
    const RateFit fit = fit_blowup_rate(report);
    out << "# fit: slope=" << fmt(fit.slope) << " stderr=" << fmt(fit.stderr_slope)
        << " intercept=" << fmt(fit.intercept) << " rows_used=" << fit.rows_used
        << "\n";
  } catch (const ConfigError& e) {
    out << "# fit: unavailable (" << e.what() << ")\n";
  }
  const SandwichResult sw = sandwich_check(report);
  out << "# sandwich: low_dispersion=" << fmt(sw.low_dispersion)
      << " up_dispersion=" << fmt(sw.up_dispersion) << " rows_used=" << sw.rows_used
      << " excluded=" << sw.excluded << "\n";
  for (const SweepRow& r : report.rows) {
    if (!r.failed) continue;
    std::string msg = r.error;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "# row_failed: eps=" << fmt(r.eps) << " k1=" << fmt(r.k1) << " error=" << msg
        << "\n";
  }
  out << "# config: " << config_json << "\n";
  return out.str();
}

std::string render_plot_svg(const SweepReport& report) {
  std::vector<const SweepRow*> ok;
  for (const SweepRow& r : report.rows)
    if (!r.failed && r.grad_x1 > 0.0 && std::isfinite(r.grad_x1)) ok.push_back(&r);
  if (ok.size() < 2) throw ConfigError("plot needs at least two successful rows");

  const double width = 960, height = 430;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";

  // left panel: log-log gradient magnitude against the gap
  {
    AxisMap xm, ym;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const SweepRow* r : ok) {
      xlo = std::min(xlo, std::log10(r->eps));
      xhi = std::max(xhi, std::log10(r->eps));
      ylo = std::min(ylo, std::log10(r->grad_x1));
      yhi = std::max(yhi, std::log10(r->grad_x1));
    }
    if (yhi - ylo < 0.5) {
      const double mid = 0.5 * (ylo + yhi);
      ylo = mid - 0.25;
      yhi = mid + 0.25;
    }
    xm.lo = xlo;
    xm.hi = xhi;
    xm.p0 = 70;
    xm.p1 = 450;
    ym.lo = ylo;
    ym.hi = yhi;
    ym.p0 = 360;  // SVG y grows downward
    ym.p1 = 50;

    svg_line(out, xm.p0, ym.p0, xm.p1, ym.p0, "#333");
    svg_line(out, xm.p0, ym.p0, xm.p0, ym.p1, "#333");
    for (const int d : decade_ticks(xm.lo, xm.hi)) {
      if (d < xm.lo - 1e-9 || d > xm.hi + 1e-9) continue;
      const double px = xm.at(d);
      svg_line(out, px, ym.p0, px, ym.p0 + 5, "#333");
      svg_text(out, px, ym.p0 + 20, decade_label(d));
    }
    for (const int d : decade_ticks(ym.lo, ym.hi)) {
      if (d < ym.lo - 1e-9 || d > ym.hi + 1e-9) continue;
      const double py = ym.at(d);
      svg_line(out, xm.p0 - 5, py, xm.p0, py, "#333");
      svg_text(out, xm.p0 - 10, py + 4, decade_label(d), "end", 11);
    }
    svg_text(out, 0.5 * (xm.p0 + xm.p1), 395, "gap eps (log)");
    svg_text(out, 0.5 * (xm.p0 + xm.p1), 28, "gradient at the closest point", "middle",
             14);

    std::string slope_note = "slope: n/a";
    try {
      const RateFit fit = fit_blowup_rate(report);
      slope_note = "slope " + fmt_short(fit.slope) + " (stderr " +
                   fmt_short(fit.stderr_slope) + ")";
      const double y0 = fit.intercept + fit.slope * (xm.lo * std::log(10.0));
      const double y1 = fit.intercept + fit.slope * (xm.hi * std::log(10.0));
      svg_line(out, xm.at(xm.lo), ym.at(y0 / std::log(10.0)), xm.at(xm.hi),
               ym.at(y1 / std::log(10.0)), "#c44", 1.5);
    } catch (const ConfigError&) {
    }
    svg_text(out, xm.p1 - 4, ym.p1 + 16, slope_note, "end", 13);

    for (const SweepRow* r : ok)
      out << "<circle cx=\"" << xm.at(std::log10(r->eps)) << "\" cy=\""
          << ym.at(std::log10(r->grad_x1))
          << "\" r=\"4\" fill=\"#246\" fill-opacity=\"0.85\"/>\n";
  }

  // right panel: gradient magnitude across the gap at the smallest solved gap
  {
    const double px0 = 560, px1 = 930, py0 = 360, py1 = 50;
    svg_line(out, px0, py0, px1, py0, "#333");
    svg_line(out, px0, py0, px0, py1, "#333");
    svg_text(out, 0.5 * (px0 + px1), 395, "position across the gap (fraction)");
    if (report.gap_profile.empty()) {
      svg_text(out, 0.5 * (px0 + px1), 200, "no gap profile captured");
    } else {
      double mhi = 0.0, mlo = 1e300;
      for (const GapSample& s : report.gap_profile) {
        mhi = std::max(mhi, s.magnitude);
        mlo = std::min(mlo, s.magnitude);
      }
      if (mhi <= 0.0) mhi = 1.0;
      AxisMap xm{0.0, 1.0, px0, px1};
      AxisMap ym{0.0, 1.1 * mhi, py0, py1};
      out << "<polyline fill=\"none\" stroke=\"#246\" stroke-width=\"1.5\" points=\"";
      for (const GapSample& s : report.gap_profile)
        out << xm.at(s.t / report.gap_eps) << "," << ym.at(s.magnitude) << " ";
      out << "\"/>\n";
      svg_line(out, px0 - 5, ym.at(mhi), px0, ym.at(mhi), "#333");
      svg_text(out, px0 - 8, ym.at(mhi) + 4, fmt_short(mhi), "end", 11);
      svg_line(out, px0 - 5, ym.at(0.0), px0, ym.at(0.0), "#333");
      svg_text(out, px0 - 8, ym.at(0.0) + 4, "0", "end", 11);
      svg_text(out, 0.5 * (px0 + px1), 28,
               "field across the gap, eps = " + fmt_short(report.gap_eps), "middle", 14);
    }
  }

  out << "</svg>\n";
  return out.str();
}

void emit_plot(const SweepReport& report, const std::string& path) {
  write_text_file(path, render_plot_svg(report));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
  if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace gapfield
