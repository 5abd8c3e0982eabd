#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "cavity/analysis.hpp"
#include "cavity/field.hpp"
#include "cavity/operators.hpp"
#include "cavity/solver.hpp"

namespace cavity {

/// Header `x,y,u`, one row per non-Exterior node in row-major order, %.17g.
void write_field_csv(const ScalarField& u, const std::string& path);
/// Reads a file written by write_field_csv back onto `grid`. Positions must
/// match the grid nodes; IoError otherwise.
ScalarField read_field_csv(const std::string& path, const GridPtr& grid);

/// Header `epsilon,lipschitz_norm,sup_u,min_u,sweeps,final_residual,fb_hausdorff_to_prev`.
/// A missing Hausdorff distance is written as `nan`.
void write_sweep_csv(const SweepReport& report, const std::string& path);

// Report objects. Wall-clock times are left out so that output depends only
// on the configuration.
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const BarrierReport& r);
nlohmann::json to_json(const StructuralReport& r);
nlohmann::json to_json(const SandwichReport& r);
nlohmann::json to_json(const AbpReport& r);
nlohmann::json to_json(const LimitReport& r);
nlohmann::json to_json(const HopfResult& r);
nlohmann::json to_json(const PropagationResult& r);
nlohmann::json to_json(const ReactionProfile& p);

/// Pretty-printed with a trailing newline; IoError on failure.
void write_json(const nlohmann::json& j, const std::string& path);

/// Fixed 256-entry colormap, dark blue through green to yellow.
struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
};
Rgb colormap(std::size_t index);

/// One rect per lattice cell with four active corners, coloured by the corner
/// average over [min u, max u]; y grows upward. A constant field renders in a
/// single colour. The optional level adds the contour as one path.
std::string render_heatmap_svg(const ScalarField& u, std::optional<double> contour_level = std::nullopt);
void write_heatmap_svg(const ScalarField& u, const std::string& path,
                       std::optional<double> contour_level = std::nullopt);

void write_text(const std::string& text, const std::string& path);

}  // namespace cavity
