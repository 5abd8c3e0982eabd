#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cavity/grid.hpp"
#include "cavity/operators.hpp"
#include "cavity/reaction.hpp"
#include "cavity/solver.hpp"

namespace cavity {

struct DomainSection {
  Shape shape = Shape::UnitSquare;
  double radius = 1.0;
  Vec2 center{};
  int resolution = 65;
  bool operator==(const DomainSection&) const = default;
};

struct OperatorSection {
  Variant variant = Variant::Laplace;
  EllipticityParams params{};
  Control linear{};  // LinearDrift coefficients
  IsaacsMode mode = IsaacsMode::SupInf;
  std::vector<std::vector<Control>> isaacs;
  bool operator==(const OperatorSection&) const = default;
};

struct ReactionSection {
  ReactionKind kind = ReactionKind::Off;
  double peak = 1.0;
  double epsilon = 0.1;
  std::vector<double> eps_list;
  bool operator==(const ReactionSection&) const = default;
};

struct BoundarySection {
  std::string preset = "one";  // one of boundary_presets(), or empty
  std::string expression;      // used when preset is empty
  bool operator==(const BoundarySection&) const = default;
};

struct OutputSection {
  std::string out_dir = "out";
  bool emit_svg = false;
  std::uint64_t seed = 1;
  std::optional<double> contour_level;
  bool operator==(const OutputSection&) const = default;
};

/// Parameters of the verify and oracle subcommands.
struct ExperimentSection {
  double mu = 1.0;
  double delta = 10.0;
  long samples = 10000;
  double sigma = 1.0;
  std::vector<double> radii{0.25, 0.5, 1.0};
  long instances = 10;
  double fraction = 0.5;
  double left = 1.0;
  double right = 1.0;
  int nodes = 1025;
  bool operator==(const ExperimentSection&) const = default;
};

struct Config {
  DomainSection domain;
  OperatorSection op;
  ReactionSection reaction;
  BoundarySection boundary;
  SolverConfig solver;
  OutputSection output;
  ExperimentSection experiment;
  bool operator==(const Config&) const = default;
};

/// Line-oriented `[section]` / `key = value` text with `#` comments. Every
/// section and key is optional. Errors: SyntaxError ("line N: ..."),
/// UnknownKey ("section.key"), RangeError ("section.key").
Config parse_config(std::string_view text);
Config load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const Config& c);

std::vector<std::string> boundary_presets();
/// Expression text behind a preset name; RangeError if unknown.
std::string preset_expression(const std::string& name);

DomainSpec build_domain(const Config& c);
GridPtr build_grid(const Config& c);
OperatorSpec build_operator(const Config& c);
ReactionProfile build_profile(const Config& c);
BoundaryData build_boundary(const Config& c);

/// Evenly spaced points along the physical boundary of the domain.
std::vector<Vec2> boundary_samples(const DomainSpec& d, std::size_t count);

/// Largest |phi(p) - phi(q)| / |p - q| over neighbouring boundary samples and
/// neighbouring points of a 64 x 64 lattice in the domain.
double boundary_lipschitz_estimate(const DomainSpec& d, const BoundaryData& phi);

}  // namespace cavity
