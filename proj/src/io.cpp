#include "cavity/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cavity/error.hpp"

namespace cavity {
namespace {

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

double parse_real(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw Error(Errc::IoError, where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json vec(Vec2 p) { return nlohmann::json::array({p.x, p.y}); }

}  // namespace

void write_field_csv(const ScalarField& u, const std::string& path) {
  std::ofstream out = open_out(path);
  const Grid& g = u.grid();
  out << "x,y,u\n";
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      const Vec2 p = g.position(i, j);
      out << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(u(i, j)) << '\n';
    }
  }
  finish(out, path);
}

ScalarField read_field_csv(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "x,y,u") throw Error(Errc::IoError, path + ": expected header x,y,u");
  ScalarField u(grid);
  const Grid& g = *grid;
  std::size_t row = 1;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      ++row;
      const std::string where = path + ":" + std::to_string(row);
      if (!std::getline(in, line)) throw Error(Errc::IoError, where + ": too few rows");
      const std::size_t c1 = line.find(',');
      const std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
      if (c2 == std::string::npos) throw Error(Errc::IoError, where + ": expected three columns");
      const std::string_view sv(line);
      const double x = parse_real(sv.substr(0, c1), where);
      const double y = parse_real(sv.substr(c1 + 1, c2 - c1 - 1), where);
      const Vec2 p = g.position(i, j);
      if (std::abs(x - p.x) > 1e-12 || std::abs(y - p.y) > 1e-12) {
        throw Error(Errc::IoError, where + ": node position does not match the grid");
      }
      u(i, j) = parse_real(sv.substr(c2 + 1), where);
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw Error(Errc::IoError, path + ": more rows than grid nodes");
  }
  return u;
}

void write_sweep_csv(const SweepReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "epsilon,lipschitz_norm,sup_u,min_u,sweeps,final_residual,fb_hausdorff_to_prev\n";
  for (const SweepRow& r : report.rows) {
    out << fmt17(r.eps) << ',' << fmt17(r.lipschitz_norm) << ',' << fmt17(r.sup_u) << ','
        << fmt17(r.min_u) << ',' << r.sweeps << ',' << fmt17(r.final_residual) << ','
        << fmt17(r.fb_hausdorff_to_prev) << '\n';
  }
  finish(out, path);
}

nlohmann::json to_json(const ReactionProfile& p) {
  return {{"kind", p.kind == ReactionKind::Bump ? "bump" : "off"}, {"B", p.peak}};
}

nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json j{{"converged", r.converged},
                   {"sweeps", r.sweeps},
                   {"final_residual", r.final_residual},
                   {"sup_u", r.sup_u},
                   {"min_u", r.min_u},
                   {"lipschitz_norm", r.lipschitz_norm},
                   {"relaxation", r.relaxation},
                   {"multiple_root_nodes", r.multiple_root_nodes}};
  if (!r.residual_history.empty()) j["residual_history"] = r.residual_history;
  return j;
}

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : r.rows) {
    rows.push_back({{"epsilon", row.eps},
                    {"lipschitz_norm", row.lipschitz_norm},
                    {"sup_u", row.sup_u},
                    {"min_u", row.min_u},
                    {"sweeps", row.sweeps},
                    {"final_residual", row.final_residual},
                    {"fb_hausdorff_to_prev", finite_or_null(row.fb_hausdorff_to_prev)},
                    {"converged", row.converged},
                    {"multiple_root_nodes", row.multiple_root_nodes}});
  }
  nlohmann::json gaps = nlohmann::json::array();
  for (double g : r.uniform_gaps) gaps.push_back(g);
  return {{"rows", rows},
          {"plateau_ratio", finite_or_null(r.plateau_ratio)},
          {"uniform_gaps", gaps},
          {"profile", to_json(r.profile)}};
}

nlohmann::json to_json(const BarrierReport& r) {
  return {{"samples", r.samples},
          {"sampled_min", r.sampled_min},
          {"min_gap_to_bound", r.min_gap_to_bound},
          {"negative_samples", r.negative_samples},
          {"fd_gradient_error", r.fd_gradient_error},
          {"fd_hessian_error", r.fd_hessian_error},
          {"admissible", r.admissible},
          {"delta_star", r.delta_star}};
}

nlohmann::json to_json(const StructuralReport& r) {
  return {{"samples", r.samples},
          {"f1_violations", r.f1_violations},
          {"worst_f1_gap", r.worst_f1_gap},
          {"theta_sup", r.theta_sup}};
}

nlohmann::json to_json(const SandwichReport& r) {
  return {{"lower_violations", r.lower_violations},
          {"upper_violations", r.upper_violations},
          {"worst_lower_gap", r.worst_lower_gap},
          {"worst_upper_gap", r.worst_upper_gap},
          {"tolerance", r.tolerance},
          {"holds", r.holds()}};
}

nlohmann::json to_json(const AbpReport& r) {
  return {{"min_u", r.min_u}, {"sup_u", r.sup_u}, {"ratio", finite_or_null(r.ratio)}};
}

nlohmann::json to_json(const LimitReport& r) {
  return {{"sup_residual", r.sup_residual}, {"nodes_checked", r.nodes_checked}, {"vacuous", r.vacuous}};
}

nlohmann::json to_json(const HopfResult& r) {
  return {{"theta", r.theta},
          {"u_center", r.u_center},
          {"c_measured", finite_or_null(r.c_measured)},
          {"center", vec(r.center)},
          {"contact", vec(r.contact)},
          {"solve", to_json(r.report)}};
}

nlohmann::json to_json(const PropagationResult& r) {
  return {{"c_measured", r.c_measured},
          {"reflection_residual", r.reflection_residual},
          {"mirror_error", r.mirror_error},
          {"solve", to_json(r.report)}};
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out = open_out(path);
  out << text;
  finish(out, path);
}

Rgb colormap(std::size_t index) {
  struct Stop {
    double t;
    double r, g, b;
  };
  static constexpr Stop stops[] = {{0.00, 68, 1, 84},
                                   {0.25, 59, 82, 139},
                                   {0.50, 33, 145, 140},
                                   {0.75, 94, 201, 98},
                                   {1.00, 253, 231, 37}};
  const double t = static_cast<double>(std::min<std::size_t>(index, 255)) / 255.0;
  std::size_t k = 0;
  while (k + 2 < std::size(stops) && t > stops[k + 1].t) ++k;
  const Stop& a = stops[k];
  const Stop& b = stops[k + 1];
  const double w = (t - a.t) / (b.t - a.t);
  auto mix = [w](double x, double y) { return static_cast<unsigned char>(std::lround(x + w * (y - x))); };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string render_heatmap_svg(const ScalarField& u, std::optional<double> contour_level) {
  const Grid& g = u.grid();
  constexpr int kPx = 4;
  const int cw = g.nx() - 1;
  const int ch = g.ny() - 1;
  const double lo = u.min_value();
  const double hi = u.max_value();
  const double span = hi - lo;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cw * kPx << "\" height=\"" << ch * kPx
    << "\" viewBox=\"0 0 " << cw << ' ' << ch << "\" shape-rendering=\"crispEdges\">\n";
  o << "<g stroke=\"none\">\n";
  char hex[8];
  for (int j = 0; j < ch; ++j) {
    for (int i = 0; i < cw; ++i) {
      if (!g.active(i, j) || !g.active(i + 1, j) || !g.active(i, j + 1) || !g.active(i + 1, j + 1)) continue;
      const double v = 0.25 * (u(i, j) + u(i + 1, j) + u(i, j + 1) + u(i + 1, j + 1));
      std::size_t idx = 0;
      if (span > 0.0) {
        const double t = std::clamp((v - lo) / span, 0.0, 1.0);
        idx = std::min<std::size_t>(255, static_cast<std::size_t>(t * 256.0));
      }
      const Rgb c = colormap(idx);
      std::snprintf(hex, sizeof hex, "#%02x%02x%02x", c.r, c.g, c.b);
      o << "<rect x=\"" << i << "\" y=\"" << ch - 1 - j << "\" width=\"1\" height=\"1\" fill=\"" << hex
        << "\"/>\n";
    }
  }
  o << "</g>\n";

  if (contour_level && *contour_level >= lo && *contour_level <= hi) {
    const Contour c = extract_free_boundary(u, *contour_level);
    if (!c.segments.empty()) {
      const Vec2 origin = g.origin();
      auto px = [&](Vec2 p) {
        return fmt6((p.x - origin.x) / g.h()) + ' ' + fmt6(ch - (p.y - origin.y) / g.h());
      };
      o << "<path fill=\"none\" stroke=\"#ffffff\" stroke-width=\"0.25\" d=\"";
      for (const Segment& s : c.segments) o << 'M' << px(s.a) << 'L' << px(s.b);
      o << "\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

void write_heatmap_svg(const ScalarField& u, const std::string& path, std::optional<double> contour_level) {
  write_text(render_heatmap_svg(u, contour_level), path);
}

}  // namespace cavity
