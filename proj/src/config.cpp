#include "cavity/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "cavity/error.hpp"
#include "cavity/expression.hpp"

namespace cavity {
namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table{
      {"one", "1"},
      {"zero", "0"},
      {"saddle", "x^2 - y^2"},
      {"tent", "max(0, 1 - 2*abs(x - 0.5))"},
      {"height", "y"},
      {"hopf_linear", "y + 1"},
  };
  return table;
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void range_error(const std::string& key, const std::string& why) {
  throw Error(Errc::RangeError, key + ": " + why);
}

class LineParser {
 public:
  LineParser(int line, std::string key, std::string value)
      : line_(line), key_(std::move(key)), value_(std::move(value)) {}

  [[noreturn]] void syntax(const std::string& why) const {
    throw Error(Errc::SyntaxError, "line " + std::to_string(line_) + ": " + key_ + ": " + why);
  }

  double real() const { return real_of(value_); }

  long integer() const {
    long v = 0;
    const auto [end, ec] = std::from_chars(value_.data(), value_.data() + value_.size(), v);
    if (ec != std::errc() || end != value_.data() + value_.size()) syntax("expected an integer");
    return v;
  }

  bool boolean() const {
    if (value_ == "true") return true;
    if (value_ == "false") return false;
    syntax("expected true or false");
  }

  std::vector<double> reals() const {
    std::vector<double> out;
    if (value_.empty()) return out;
    for (const auto& part : split(value_, ',')) out.push_back(real_of(part));
    return out;
  }

  const std::string& text() const { return value_; }

 private:
  double real_of(const std::string& s) const {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) syntax("expected a number");
    if (!std::isfinite(v)) syntax("number must be finite");
    return v;
  }

  int line_;
  std::string key_;
  std::string value_;
};

Shape shape_of(const LineParser& p) {
  const std::string& v = p.text();
  if (v == "unit_square") return Shape::UnitSquare;
  if (v == "half_ball") return Shape::HalfBall;
  if (v == "ball") return Shape::Ball;
  p.syntax("expected unit_square, half_ball or ball");
}

const char* shape_text(Shape s) {
  switch (s) {
    case Shape::UnitSquare: return "unit_square";
    case Shape::HalfBall: return "half_ball";
    case Shape::Ball: return "ball";
  }
  return "";
}

Variant variant_of(const LineParser& p) {
  const std::string& v = p.text();
  if (v == "laplace") return Variant::Laplace;
  if (v == "pucci_plus") return Variant::PucciPlus;
  if (v == "pucci_minus") return Variant::PucciMinus;
  if (v == "linear_drift") return Variant::LinearDrift;
  if (v == "isaacs") return Variant::Isaacs;
  p.syntax("unknown operator variant");
}

const char* variant_text(Variant v) {
  switch (v) {
    case Variant::Laplace: return "laplace";
    case Variant::PucciPlus: return "pucci_plus";
    case Variant::PucciMinus: return "pucci_minus";
    case Variant::LinearDrift: return "linear_drift";
    case Variant::Isaacs: return "isaacs";
  }
  return "";
}

Control control_of(const LineParser& p) {
  const auto v = p.reals();
  if (v.size() != 5) p.syntax("expected a11, a12, a22, bx, by");
  Control c;
  c.a = {v[0], v[1], v[2]};
  c.drift = {v[3], v[4]};
  return c;
}

struct Seen {
  bool preset = false;
  bool expression = false;
  std::map<std::pair<long, long>, Control> controls;
};

void apply(Config& c, Seen& seen, const std::string& section, const std::string& key, const LineParser& p) {
  const std::string full = section + "." + key;
  auto unknown = [&]() { throw Error(Errc::UnknownKey, full); };
  if (section == "domain") {
    if (key == "shape") c.domain.shape = shape_of(p);
    else if (key == "radius") c.domain.radius = p.real();
    else if (key == "center_x") c.domain.center.x = p.real();
    else if (key == "center_y") c.domain.center.y = p.real();
    else if (key == "resolution") c.domain.resolution = static_cast<int>(p.integer());
    else unknown();
  } else if (section == "operator") {
    if (key == "variant") c.op.variant = variant_of(p);
    else if (key == "lambda") c.op.params.lambda = p.real();
    else if (key == "Lambda") c.op.params.Lambda = p.real();
    else if (key == "b") c.op.params.b = p.real();
    else if (key == "a11") c.op.linear.a.m11 = p.real();
    else if (key == "a12") c.op.linear.a.m12 = p.real();
    else if (key == "a22") c.op.linear.a.m22 = p.real();
    else if (key == "bx") c.op.linear.drift.x = p.real();
    else if (key == "by") c.op.linear.drift.y = p.real();
    else if (key == "mode") {
      if (p.text() == "supinf") c.op.mode = IsaacsMode::SupInf;
      else if (p.text() == "infsup") c.op.mode = IsaacsMode::InfSup;
      else p.syntax("expected supinf or infsup");
    } else if (key.rfind("isaacs.", 0) == 0) {
      const auto parts = split(key, '.');
      long alpha = -1;
      long beta = -1;
      if (parts.size() == 3) {
        std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), alpha);
        std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), beta);
      }
      if (alpha < 0 || beta < 0 || alpha > 63 || beta > 63) p.syntax("expected isaacs.<alpha>.<beta>");
      seen.controls[{alpha, beta}] = control_of(p);
    } else {
      unknown();
    }
  } else if (section == "reaction") {
    if (key == "kind") {
      if (p.text() == "off") c.reaction.kind = ReactionKind::Off;
      else if (p.text() == "bump") c.reaction.kind = ReactionKind::Bump;
      else p.syntax("expected off or bump");
    } else if (key == "B") c.reaction.peak = p.real();
    else if (key == "epsilon") c.reaction.epsilon = p.real();
    else if (key == "eps_list") c.reaction.eps_list = p.reals();
    else unknown();
  } else if (section == "boundary") {
    if (key == "preset") {
      seen.preset = true;
      c.boundary.preset = p.text();
    } else if (key == "expression") {
      seen.expression = true;
      try {
        parse_expression(p.text());
      } catch (const Error& e) {
        p.syntax("position " + e.detail());
      }
      c.boundary.expression = p.text();
    } else {
      unknown();
    }
  } else if (section == "solver") {
    if (key == "tol") c.solver.tol = p.real();
    else if (key == "max_sweeps") c.solver.max_sweeps = p.integer();
    else if (key == "sweep_order") {
      if (p.text() == "lexicographic") c.solver.sweep_order = SweepOrder::Lexicographic;
      else if (p.text() == "red_black") c.solver.sweep_order = SweepOrder::RedBlack;
      else p.syntax("expected lexicographic or red_black");
    } else if (key == "newton_fallback_bisection") c.solver.newton_fallback_bisection = p.boolean();
    else if (key == "damping") c.solver.damping = p.real();
    else if (key == "relaxation") c.solver.relaxation = p.text() == "auto" ? 0.0 : p.real();
    else if (key == "newton") c.solver.newton = p.boolean();
    else if (key == "n_dirs") c.solver.stencil.n_dirs = static_cast<int>(p.integer());
    else if (key == "upwind") c.solver.stencil.upwind = p.boolean();
    else unknown();
  } else if (section == "output") {
    if (key == "out_dir") c.output.out_dir = p.text();
    else if (key == "emit_svg") c.output.emit_svg = p.boolean();
    else if (key == "seed") {
      const long s = p.integer();
      if (s < 0) p.syntax("seed must be nonnegative");
      c.output.seed = static_cast<std::uint64_t>(s);
    } else if (key == "contour_level") c.output.contour_level = p.real();
    else unknown();
  } else if (section == "experiment") {
    if (key == "mu") c.experiment.mu = p.real();
    else if (key == "delta") c.experiment.delta = p.real();
    else if (key == "samples") c.experiment.samples = p.integer();
    else if (key == "sigma") c.experiment.sigma = p.real();
    else if (key == "radii") c.experiment.radii = p.reals();
    else if (key == "instances") c.experiment.instances = p.integer();
    else if (key == "fraction") c.experiment.fraction = p.real();
    else if (key == "left") c.experiment.left = p.real();
    else if (key == "right") c.experiment.right = p.real();
    else if (key == "nodes") c.experiment.nodes = static_cast<int>(p.integer());
    else unknown();
  } else {
    throw Error(Errc::UnknownKey, section);
  }
}

void validate(Config& c, const Seen& seen) {
  const DomainSection& d = c.domain;
  if (d.resolution % 2 == 0 || d.resolution < 17 || d.resolution > 1025) {
    range_error("domain.resolution", "must be odd and in [17, 1025]");
  }
  if (!(d.radius > 0.0)) range_error("domain.radius", "must be positive");
  if (d.shape == Shape::Ball) {
    try {
      cavity::build_grid(build_domain(c), 17);
    } catch (const Error& e) {
      range_error("domain.radius", e.detail());
    }
  }

  const EllipticityParams& ep = c.op.params;
  if (!(ep.lambda > 0.0)) range_error("operator.lambda", "must be positive");
  if (!(ep.Lambda >= ep.lambda)) range_error("operator.Lambda", "must be at least lambda");
  if (!(ep.b >= 0.0)) range_error("operator.b", "must be nonnegative");
  if (!seen.controls.empty()) {
    const long alphas = seen.controls.rbegin()->first.first + 1;
    c.op.isaacs.assign(static_cast<std::size_t>(alphas), {});
    for (const auto& [ab, ctrl] : seen.controls) {
      auto& family = c.op.isaacs[static_cast<std::size_t>(ab.first)];
      if (static_cast<long>(family.size()) != ab.second) {
        range_error("operator.isaacs", "control indices must be contiguous from 0");
      }
      family.push_back(ctrl);
    }
    for (const auto& family : c.op.isaacs) {
      if (family.empty()) range_error("operator.isaacs", "control indices must be contiguous from 0");
    }
  }
  try {
    build_operator(c);
  } catch (const Error& e) {
    range_error("operator", e.detail());
  }

  if (!(c.reaction.peak > 0.0)) range_error("reaction.B", "must be positive");
  if (!(c.reaction.epsilon > 0.0)) range_error("reaction.epsilon", "must be positive");
  for (std::size_t k = 0; k < c.reaction.eps_list.size(); ++k) {
    const double e = c.reaction.eps_list[k];
    if (!(e > 0.0)) range_error("reaction.eps_list", "entries must be positive");
    if (k > 0 && !(e < c.reaction.eps_list[k - 1])) range_error("reaction.eps_list", "must be strictly decreasing");
  }

  if (seen.preset && seen.expression) range_error("boundary.preset", "give either preset or expression");
  if (seen.expression) c.boundary.preset.clear();
  const std::string bkey = c.boundary.preset.empty() ? "boundary.expression" : "boundary.preset";
  if (!c.boundary.preset.empty() && !presets().count(c.boundary.preset)) range_error(bkey, "unknown preset");
  if (c.boundary.preset.empty() && c.boundary.expression.empty()) range_error(bkey, "missing boundary data");
  if (c.reaction.kind == ReactionKind::Bump) {
    const BoundaryData phi = build_boundary(c);
    for (const Vec2& p : boundary_samples(build_domain(c), 10000)) {
      double v = 0.0;
      try {
        v = phi(p);
      } catch (const Error& e) {
        range_error(bkey, e.detail());
      }
      if (!(v >= 0.0)) {
        range_error(bkey, "boundary data must be nonnegative, got " + fmt(v) + " at (" + fmt(p.x) + ", " + fmt(p.y) + ")");
      }
    }
  }

  try {
    c.solver.validate();
  } catch (const Error& e) {
    range_error("solver", e.detail());
  }

  const ExperimentSection& x = c.experiment;
  if (!(x.mu > 0.0)) range_error("experiment.mu", "must be positive");
  if (!(x.delta > 0.0)) range_error("experiment.delta", "must be positive");
  if (x.samples < 1000) range_error("experiment.samples", "must be at least 1000");
  if (!(x.sigma > 0.0)) range_error("experiment.sigma", "must be positive");
  if (x.radii.empty()) range_error("experiment.radii", "must not be empty");
  for (double r : x.radii) {
    if (!(r > 0.0 && r <= 1.0)) range_error("experiment.radii", "entries must lie in (0, 1]");
  }
  if (x.instances < 0) range_error("experiment.instances", "must be nonnegative");
  if (!(x.fraction > 0.0 && x.fraction <= 1.0)) range_error("experiment.fraction", "must lie in (0, 1]");
  if (!(x.left >= 0.0)) range_error("experiment.left", "must be nonnegative");
  if (!(x.right >= 0.0)) range_error("experiment.right", "must be nonnegative");
  if (x.nodes < 33) range_error("experiment.nodes", "must be at least 33");
}

}  // namespace

Config parse_config(std::string_view text) {
  Config c;
  Seen seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw Error(Errc::SyntaxError, "line " + std::to_string(line) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"domain", "operator", "reaction", "boundary", "solver", "output", "experiment"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        throw Error(Errc::UnknownKey, section);
      }
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::SyntaxError, "line " + std::to_string(line) + ": expected key = value");
    if (section.empty()) throw Error(Errc::SyntaxError, "line " + std::to_string(line) + ": key outside a section");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw Error(Errc::SyntaxError, "line " + std::to_string(line) + ": empty key");
    apply(c, seen, section, key, LineParser(line, section + "." + key, trim(s.substr(eq + 1))));
  }
  validate(c, seen);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const Config& c) {
  std::ostringstream o;
  o << "[domain]\n"
    << "shape = " << shape_text(c.domain.shape) << "\n"
    << "radius = " << fmt(c.domain.radius) << "\n"
    << "center_x = " << fmt(c.domain.center.x) << "\n"
    << "center_y = " << fmt(c.domain.center.y) << "\n"
    << "resolution = " << c.domain.resolution << "\n\n";

  o << "[operator]\n"
    << "variant = " << variant_text(c.op.variant) << "\n"
    << "lambda = " << fmt(c.op.params.lambda) << "\n"
    << "Lambda = " << fmt(c.op.params.Lambda) << "\n"
    << "b = " << fmt(c.op.params.b) << "\n"
    << "a11 = " << fmt(c.op.linear.a.m11) << "\n"
    << "a12 = " << fmt(c.op.linear.a.m12) << "\n"
    << "a22 = " << fmt(c.op.linear.a.m22) << "\n"
    << "bx = " << fmt(c.op.linear.drift.x) << "\n"
    << "by = " << fmt(c.op.linear.drift.y) << "\n"
    << "mode = " << (c.op.mode == IsaacsMode::SupInf ? "supinf" : "infsup") << "\n";
  for (std::size_t a = 0; a < c.op.isaacs.size(); ++a) {
    for (std::size_t b = 0; b < c.op.isaacs[a].size(); ++b) {
      const Control& ctl = c.op.isaacs[a][b];
      o << "isaacs." << a << "." << b << " = "
        << fmt_list({ctl.a.m11, ctl.a.m12, ctl.a.m22, ctl.drift.x, ctl.drift.y}) << "\n";
    }
  }
  o << "\n";

  o << "[reaction]\n"
    << "kind = " << (c.reaction.kind == ReactionKind::Bump ? "bump" : "off") << "\n"
    << "B = " << fmt(c.reaction.peak) << "\n"
    << "epsilon = " << fmt(c.reaction.epsilon) << "\n"
    << "eps_list = " << fmt_list(c.reaction.eps_list) << "\n\n";

  o << "[boundary]\n";
  if (c.boundary.preset.empty()) {
    o << "expression = " << c.boundary.expression << "\n\n";
  } else {
    o << "preset = " << c.boundary.preset << "\n\n";
  }

  o << "[solver]\n"
    << "tol = " << fmt(c.solver.tol) << "\n"
    << "max_sweeps = " << c.solver.max_sweeps << "\n"
    << "sweep_order = " << (c.solver.sweep_order == SweepOrder::RedBlack ? "red_black" : "lexicographic") << "\n"
    << "newton_fallback_bisection = " << (c.solver.newton_fallback_bisection ? "true" : "false") << "\n"
    << "damping = " << fmt(c.solver.damping) << "\n"
    << "relaxation = " << (c.solver.relaxation == 0.0 ? std::string("auto") : fmt(c.solver.relaxation)) << "\n"
    << "newton = " << (c.solver.newton ? "true" : "false") << "\n"
    << "n_dirs = " << c.solver.stencil.n_dirs << "\n"
    << "upwind = " << (c.solver.stencil.upwind ? "true" : "false") << "\n\n";

  o << "[output]\n"
    << "out_dir = " << c.output.out_dir << "\n"
    << "emit_svg = " << (c.output.emit_svg ? "true" : "false") << "\n"
    << "seed = " << c.output.seed << "\n";
  if (c.output.contour_level) o << "contour_level = " << fmt(*c.output.contour_level) << "\n";
  o << "\n";

  const ExperimentSection& x = c.experiment;
  o << "[experiment]\n"
    << "mu = " << fmt(x.mu) << "\n"
    << "delta = " << fmt(x.delta) << "\n"
    << "samples = " << x.samples << "\n"
    << "sigma = " << fmt(x.sigma) << "\n"
    << "radii = " << fmt_list(x.radii) << "\n"
    << "instances = " << x.instances << "\n"
    << "fraction = " << fmt(x.fraction) << "\n"
    << "left = " << fmt(x.left) << "\n"
    << "right = " << fmt(x.right) << "\n"
    << "nodes = " << x.nodes << "\n";
  return o.str();
}

std::vector<std::string> boundary_presets() {
  std::vector<std::string> names;
  for (const auto& [name, expr] : presets()) names.push_back(name);
  return names;
}

std::string preset_expression(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) range_error("boundary.preset", "unknown preset " + name);
  return it->second;
}

DomainSpec build_domain(const Config& c) {
  switch (c.domain.shape) {
    case Shape::UnitSquare: return DomainSpec::unit_square();
    case Shape::HalfBall: return DomainSpec::half_ball(c.domain.radius);
    case Shape::Ball: return DomainSpec::ball(c.domain.center, c.domain.radius);
  }
  return {};
}

GridPtr build_grid(const Config& c) { return cavity::build_grid(build_domain(c), c.domain.resolution); }

OperatorSpec build_operator(const Config& c) {
  switch (c.op.variant) {
    case Variant::Laplace: return OperatorSpec::laplace();
    case Variant::PucciPlus: return OperatorSpec::pucci_plus(c.op.params);
    case Variant::PucciMinus: return OperatorSpec::pucci_minus(c.op.params);
    case Variant::LinearDrift: return OperatorSpec::linear_drift(c.op.params, c.op.linear);
    case Variant::Isaacs: return OperatorSpec::isaacs(c.op.params, c.op.isaacs, c.op.mode);
  }
  return OperatorSpec::laplace();
}

ReactionProfile build_profile(const Config& c) {
  return c.reaction.kind == ReactionKind::Bump ? ReactionProfile::bump(c.reaction.peak) : ReactionProfile::off();
}

BoundaryData build_boundary(const Config& c) {
  const std::string src = c.boundary.preset.empty() ? c.boundary.expression : preset_expression(c.boundary.preset);
  const Expr e = parse_expression(src);
  return [e](Vec2 p) { return e.eval(p.x, p.y); };
}

std::vector<Vec2> boundary_samples(const DomainSpec& d, std::size_t count) {
  std::vector<Vec2> out;
  out.reserve(count);
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count);
    switch (d.shape) {
      case Shape::UnitSquare: {
        const double s = 4.0 * t;
        if (s < 1.0) out.push_back({s, 0.0});
        else if (s < 2.0) out.push_back({1.0, s - 1.0});
        else if (s < 3.0) out.push_back({3.0 - s, 1.0});
        else out.push_back({0.0, 4.0 - s});
        break;
      }
      case Shape::HalfBall: {
        const double flat = 2.0 * d.radius;
        const double arc = pi * d.radius;
        const double s = t * (flat + arc);
        if (s < flat) {
          out.push_back({-d.radius + s, 0.0});
        } else {
          const double th = (s - flat) / d.radius;
          out.push_back({d.radius * std::cos(th), d.radius * std::sin(th)});
        }
        break;
      }
      case Shape::Ball: {
        const double th = 2.0 * pi * t;
        out.push_back({d.center.x + d.radius * std::cos(th), d.center.y + d.radius * std::sin(th)});
        break;
      }
    }
  }
  return out;
}

double boundary_lipschitz_estimate(const DomainSpec& d, const BoundaryData& phi) {
  double best = 0.0;
  auto quotient = [&](Vec2 p, Vec2 q) {
    const double dist = distance(p, q);
    if (dist > 0.0) best = std::max(best, std::abs(phi(p) - phi(q)) / dist);
  };
  const std::vector<Vec2> ring = boundary_samples(d, 4096);
  for (std::size_t k = 0; k < ring.size(); ++k) quotient(ring[k], ring[(k + 1) % ring.size()]);

  const Grid probe(d, 65);
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};
  if (d.shape == Shape::HalfBall) {
    lo = {-d.radius, 0.0};
    hi = {d.radius, d.radius};
  } else if (d.shape == Shape::Ball) {
    lo = d.center - Vec2{d.radius, d.radius};
    hi = d.center + Vec2{d.radius, d.radius};
  }
  constexpr int m = 64;
  auto at = [&](int i, int j) {
    return Vec2{lo.x + (hi.x - lo.x) * i / (m - 1), lo.y + (hi.y - lo.y) * j / (m - 1)};
  };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Vec2 p = at(i, j);
      if (!probe.in_domain(p)) continue;
      if (i + 1 < m && probe.in_domain(at(i + 1, j))) quotient(p, at(i + 1, j));
      if (j + 1 < m && probe.in_domain(at(i, j + 1))) quotient(p, at(i, j + 1));
    }
  }
  return best;
}

}  // namespace cavity
