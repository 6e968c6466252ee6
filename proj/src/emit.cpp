#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "v2x/experiment.hpp"

namespace v2x::exp {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_record(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << quote(fields[i]);
  os << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

// Row accessors, in the column order of the CSV and the plot legends.
struct Column {
  std::string name;
  std::string label;
  double (*analytic)(const analytic::SuccessBreakdown&);
  const sim::Estimate& (*mc)(const sim::SuccessEstimates&);
};

const std::vector<Column>& columns() {
  static const std::vector<Column> cols{
      {"p_v2x", "V2X", [](const analytic::SuccessBreakdown& a) { return a.p_v2x; },
       [](const sim::SuccessEstimates& e) -> const sim::Estimate& { return e.v2x; }},
      {"p_v2v_success", "C-V2V", [](const analytic::SuccessBreakdown& a) { return a.p_v2v_success; },
       [](const sim::SuccessEstimates& e) -> const sim::Estimate& { return e.v2v_success; }},
      {"p_v2b_success", "C-V2B", [](const analytic::SuccessBreakdown& a) { return a.p_v2b_success; },
       [](const sim::SuccessEstimates& e) -> const sim::Estimate& { return e.v2b_success; }},
      {"p_v2v_only", "V2V-only", [](const analytic::SuccessBreakdown& a) { return a.p_v2v_only; },
       [](const sim::SuccessEstimates& e) -> const sim::Estimate& { return e.v2v_only; }},
      {"p_v2v_assoc", "V2V", [](const analytic::SuccessBreakdown& a) { return a.p_v2v_assoc; },
       [](const sim::SuccessEstimates& e) -> const sim::Estimate& { return e.assoc_v2v; }},
      {"p_v2b_assoc", "V2B", [](const analytic::SuccessBreakdown& a) { return a.p_v2b_assoc; },
       [](const sim::SuccessEstimates& e) -> const sim::Estimate& { return e.assoc_v2b; }},
  };
  return cols;
}

// SVG ------------------------------------------------------------------------------

std::string xml_escape(const std::string& s) {
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

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

constexpr double kW = 760, kH = 500;
constexpr double kLeft = 70, kRight = 190, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  std::string label;
  std::vector<double> x, y;              // analytic, NaN marks a gap
  std::vector<double> mx, my, mci;       // MC
};

std::string axis_label(SweepParam p) {
  switch (p) {
    case SweepParam::z_dB: return "SINR threshold z (dB)";
    case SweepParam::mu_v: return "vehicle intensity mu_v (1/Km)";
    case SweepParam::lambda_R: return "road intensity lambda_R (Km/Km^2)";
    case SweepParam::lambda_b: return "BS intensity lambda_b (1/Km^2)";
    case SweepParam::bias_B: return "association bias B";
  }
  return "";
}

}  // namespace

std::string csv_text(const SweepResult& result) {
  std::ostringstream os;
  std::vector<std::string> header{sweep_column(result.param), "status"};
  for (const auto& c : columns()) header.push_back(c.name + "_analytic");
  for (const auto& c : columns()) {
    header.push_back(c.name + "_mc");
    header.push_back(c.name + "_mc_ci");
  }
  for (const char* h : {"mc_trials", "window_radius_km", "degenerate_resamples", "error"}) header.push_back(h);
  write_record(os, header);
  for (const auto& row : result.rows) {
    std::vector<std::string> f{num(row.value), row.ok() ? "ok" : "failed"};
    for (const auto& c : columns()) f.push_back(row.analytic ? num(c.analytic(*row.analytic)) : "");
    for (const auto& c : columns()) {
      f.push_back(row.mc ? num(c.mc(*row.mc).mean) : "");
      f.push_back(row.mc ? num(c.mc(*row.mc).ci_halfwidth) : "");
    }
    f.push_back(row.mc ? std::to_string(row.mc->v2x.n) : "");
    f.push_back(row.window_radius > 0.0 ? num(row.window_radius) : "");
    f.push_back(row.mc ? std::to_string(row.degenerate_resamples) : "");
    f.push_back(row.error);
    write_record(os, f);
  }
  return os.str();
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) { write_file(path, csv_text(result)); }

std::string distance_csv_text(const SweepResult& result) {
  std::ostringstream os;
  write_record(os, {"r_km", "cdf_analytic", "cdf_mc", "cdf_mc_ci"});
  for (const auto& d : result.distance)
    write_record(os, {num(d.r), num(d.analytic), d.mc ? num(d.mc->mean) : "", d.mc ? num(d.mc->ci_halfwidth) : ""});
  return os.str();
}

void emit_distance_csv(const SweepResult& result, const std::filesystem::path& path) {
  write_file(path, distance_csv_text(result));
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw std::runtime_error("parse_csv: unterminated quoted field");
  if (field_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string svg_text(const SweepResult& result) {
  std::vector<Series> series;
  std::string xlabel, ylabel;
  bool log_x = false;
  if (result.plot == PlotKind::distance) {
    if (result.distance.empty()) throw std::invalid_argument("emit_plot: no distance CDF points");
    Series s{"V2V distance CDF", {}, {}, {}, {}, {}};
    for (const auto& d : result.distance) {
      s.x.push_back(d.r);
      s.y.push_back(d.analytic);
      if (d.mc) {
        s.mx.push_back(d.r);
        s.my.push_back(d.mc->mean);
        s.mci.push_back(d.mc->ci_halfwidth);
      }
    }
    series.push_back(std::move(s));
    xlabel = "distance r_v (Km)";
    ylabel = "CDF";
  } else {
    if (result.rows.empty()) throw std::invalid_argument("emit_plot: no rows");
    const auto& cols = columns();
    const std::size_t first = result.plot == PlotKind::success ? 0 : 4;
    const std::size_t last = result.plot == PlotKind::success ? 4 : 6;
    for (std::size_t c = first; c < last; ++c) {
      Series s{cols[c].label, {}, {}, {}, {}, {}};
      for (const auto& row : result.rows) {
        if (!std::isfinite(row.value)) continue;
        s.x.push_back(row.value);
        s.y.push_back(row.analytic ? cols[c].analytic(*row.analytic) : NAN);
        if (row.mc) {
          const auto& e = cols[c].mc(*row.mc);
          s.mx.push_back(row.value);
          s.my.push_back(e.mean);
          s.mci.push_back(e.ci_halfwidth);
        }
      }
      series.push_back(std::move(s));
    }
    xlabel = axis_label(result.param);
    ylabel = result.plot == PlotKind::success ? "Success Probability" : "Association Probability";
    log_x = result.param != SweepParam::z_dB;
  }

  double x0 = INFINITY, x1 = -INFINITY;
  for (const auto& s : series)
    for (double x : s.x) {
      if (log_x && !(x > 0.0)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
  if (!std::isfinite(x0)) {
    log_x = false;
    x0 = 0.0;
    x1 = 1.0;
  }
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  double a = tx(x0), b = tx(x1);
  if (b - a <= 0.0) {
    a -= 0.5;
    b += 0.5;
  }
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - a) / (b - a) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - std::clamp(y, 0.0, 1.0)) * ph; };
  auto plottable = [&](double x) { return std::isfinite(x) && (!log_x || x > 0.0); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
     << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<title>" << xml_escape(result.name) << "</title>\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Grid and ticks.
  for (int k = 0; k <= 5; ++k) {
    const double y = 0.2 * k;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << fmt(py(y))
       << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(y) + 4) << "\" text-anchor=\"end\">" << tick_label(y)
       << "</text>\n";
  }
  std::vector<double> xticks;
  if (log_x) {
    for (double e = std::ceil(a - 1e-9); e <= b + 1e-9; e += 1.0) xticks.push_back(std::pow(10.0, e));
  } else {
    const double span = b - a;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double t = std::ceil(a / step) * step; t <= b + 1e-9 * span; t += step) xticks.push_back(std::fabs(t) < 1e-12 * span ? 0.0 : t);
  }
  for (double t : xticks) {
    os << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(px(t)) << "\" y2=\"" << kTop + ph
       << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << fmt(px(t)) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << tick_label(t)
       << "</text>\n";
  }
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << kH - 16 << "\" text-anchor=\"middle\">"
     << xml_escape(xlabel) << "</text>\n"
     << "<text x=\"18\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << fmt(kTop + ph / 2) << ")\">" << xml_escape(ylabel) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % std::size(kColors)];
    // Analytic: polylines broken at gaps; isolated points get a square.
    std::vector<std::pair<double, double>> run;
    auto flush = [&] {
      if (run.size() == 1) {
        os << "<rect x=\"" << fmt(run[0].first - 3) << "\" y=\"" << fmt(run[0].second - 3)
           << "\" width=\"6\" height=\"6\" fill=\"none\" stroke=\"" << color << "\"/>\n";
      } else if (run.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < run.size(); ++k) os << (k ? " " : "") << fmt(run[k].first) << ',' << fmt(run[k].second);
        os << "\"/>\n";
      }
      run.clear();
    };
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!plottable(s.x[k]) || !std::isfinite(s.y[k])) {
        flush();
        continue;
      }
      run.emplace_back(px(s.x[k]), py(s.y[k]));
    }
    flush();
    for (std::size_t k = 0; k < s.mx.size(); ++k) {
      if (!plottable(s.mx[k])) continue;
      const double x = px(s.mx[k]);
      const double lo = py(s.my[k] - s.mci[k]), hi = py(s.my[k] + s.mci[k]);
      os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(lo) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(hi)
         << "\" stroke=\"" << color << "\"/>\n"
         << "<line x1=\"" << fmt(x - 3) << "\" y1=\"" << fmt(lo) << "\" x2=\"" << fmt(x + 3) << "\" y2=\"" << fmt(lo)
         << "\" stroke=\"" << color << "\"/>\n"
         << "<line x1=\"" << fmt(x - 3) << "\" y1=\"" << fmt(hi) << "\" x2=\"" << fmt(x + 3) << "\" y2=\"" << fmt(hi)
         << "\" stroke=\"" << color << "\"/>\n"
         << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(py(s.my[k])) << "\" r=\"3.5\" fill=\"" << color
         << "\"/>\n";
    }
    // Legend.
    const double ly = kTop + 14 + 36.0 * si;
    const double lx = kLeft + pw + 14;
    os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
       << color << "\" stroke-width=\"1.5\"/>\n"
       << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label) << " analyt.</text>\n"
       << "<circle cx=\"" << lx + 12 << "\" cy=\"" << ly + 16 << "\" r=\"3.5\" fill=\"" << color << "\"/>\n"
       << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 20 << "\">" << xml_escape(s.label) << " sim.</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path) { write_file(path, svg_text(result)); }

}  // namespace v2x::exp
