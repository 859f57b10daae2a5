#pragma once

// File output: CSV for bulk numbers, JSON for reports and run manifests,
// SVG for plots. Numbers are written with %.17g so reruns diff cleanly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbc/model.hpp"
#include "sbc/search.hpp"

namespace sbc::io {

inline constexpr std::string_view tool_version = "0.1.0";

// Bump when a column is added, removed or reordered.
inline constexpr std::string_view trajectory_schema = "sbc-trajectory/1";
inline constexpr std::string_view sweep_schema = "sbc-sweep/1";
inline constexpr std::string_view bracket_schema = "sbc-bracket/1";

inline constexpr std::string_view trajectory_header =
    "s,t,Q1,Q2,P1,P2,x1,y1,x2,y2,x3,y3,x4,y4";
inline constexpr std::string_view sweep_header = "n,theta,signed_magnitude,t_collision,error";
inline constexpr std::string_view bracket_header = "iteration,lo,hi";

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (x == 0) x = 0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Quote a CSV field when it carries a separator, quote or newline.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<ReducedState>& traj) {
  os << trajectory_header << '\n';
  for (const auto& z : traj) {
    const auto frame = reduced_to_physical(z);
    os << fmt(z.s) << ',' << fmt(z.t) << ',' << fmt(z.Q1) << ',' << fmt(z.Q2) << ',' << fmt(z.P1)
       << ',' << fmt(z.P2);
    for (const auto& p : frame.positions) os << ',' << fmt(p.x) << ',' << fmt(p.y);
    os << '\n';
  }
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows) {
  os << sweep_header << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << fmt(r.theta) << ',' << fmt(r.signed_magnitude) << ',' << fmt(r.t_collision)
       << ',' << csv_field(r.error) << '\n';
  }
}

inline void write_bracket_csv(std::ostream& os,
                              const std::vector<std::pair<double, double>>& history) {
  os << bracket_header << '\n';
  for (std::size_t i = 0; i < history.size(); ++i) {
    os << i << ',' << fmt(history[i].first) << ',' << fmt(history[i].second) << '\n';
  }
}

// JSON cannot hold NaN; map it to null.
inline nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline nlohmann::json to_json(const ShootingResult& r) {
  return {{"theta_star", r.theta_star},
          {"v_star", r.v_star},
          {"E", energy_from_v(r.v_star)},
          {"s0", number(r.s0)},
          {"t0", number(r.t0)},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"final_bracket",
           r.bracket_history.empty()
               ? nlohmann::json::array()
               : nlohmann::json::array({r.bracket_history.back().first, r.bracket_history.back().second})}};
}

/// Record of one CLI invocation.
struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> outputs;
  double wall_seconds = 0;

  nlohmann::json to_json() const {
    return {{"command", command},
            {"parameters", parameters},
            {"tool_version", std::string(tool_version)},
            {"schemas",
             {{"trajectory", std::string(trajectory_schema)},
              {"sweep", std::string(sweep_schema)},
              {"bracket", std::string(bracket_schema)}}},
            {"outputs", outputs},
            {"timing", {{"wall_seconds", wall_seconds}}}};
  }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots.

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool equal_aspect = false;
  bool zero_line = false;
  int width = 720;
  int height = 540;
};

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* palette(std::size_t i) {
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % std::size(colors)];
}

inline std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double ml = 70, mr = 150, mt = 40, mb = 55;
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  double sx = pw / (xmax - xmin), sy = ph / (ymax - ymin);
  if (spec.equal_aspect) {
    sx = sy = std::min(sx, sy);
  }
  const double ox = ml + (pw - sx * (xmax - xmin)) / 2;
  const double oy = mt + (ph - sy * (ymax - ymin)) / 2;
  auto px = [&](double x) { return ox + (x - xmin) * sx; };
  auto py = [&](double y) { return oy + (ymax - y) * sy; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << sx * (xmax - xmin)
     << "\" height=\"" << sy * (ymax - ymin) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4, yv = ymin + (ymax - ymin) * k / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << py(ymin) + 16 << "\" text-anchor=\"middle\">"
       << xv << "</text>\n";
    os << "<text x=\"" << px(xmin) - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv
       << "</text>\n";
  }
  os << "<text x=\"" << ox + sx * (xmax - xmin) / 2 << "\" y=\"" << spec.height - 12
     << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << oy + sy * (ymax - ymin) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << oy + sy * (ymax - ymin) / 2
     << ")\">" << xml_escape(spec.y_label) << "</text>\n";
  if (spec.zero_line && ymin < 0 && ymax > 0) {
    os << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax) << "\" y2=\""
       << py(0) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color = s.color.empty() ? palette(k) : s.color;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = mt + 18 * double(k) + 10;
    os << "<line x1=\"" << spec.width - mr + 12 << "\" y1=\"" << ly << "\" x2=\""
       << spec.width - mr + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << spec.width - mr + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace sbc::io
