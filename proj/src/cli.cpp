#include "cavity/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "cavity/analysis.hpp"
#include "cavity/config.hpp"
#include "cavity/error.hpp"
#include "cavity/io.hpp"
#include "cavity/norms.hpp"
#include "cavity/parallel.hpp"

namespace cavity {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string kind;
  std::string dir;
};

struct Context {
  Config cfg;
  int threads = 1;
  fs::path out_dir;
  std::ostream& out;
};

Context load(const Options& opt, std::ostream& out) {
  Config cfg = load_config(opt.config_path);
  if (opt.seed) cfg.output.seed = *opt.seed;
  fs::path dir(cfg.output.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  return {std::move(cfg), resolve_threads(opt.threads), dir, out};
}

json header(const Context& c, const char* command) {
  return {{"command", command}, {"seed", c.cfg.output.seed}, {"config", serialize_config(c.cfg)}};
}

std::string path_in(const Context& c, const std::string& name) { return (c.out_dir / name).string(); }

void maybe_svg(const Context& c, const ScalarField& u, const std::string& name, std::optional<double> level) {
  if (!c.cfg.output.emit_svg) return;
  write_heatmap_svg(u, path_in(c, name), c.cfg.output.contour_level ? c.cfg.output.contour_level : level);
}

int run_solve(const Context& c) {
  const Config& cfg = c.cfg;
  const OperatorSpec spec = build_operator(cfg);
  const ReactionProfile profile = build_profile(cfg);
  const BoundaryData phi = build_boundary(cfg);
  const GridPtr grid = build_grid(cfg);
  const double eps = cfg.reaction.epsilon;

  const SolveResult res = profile.kind == ReactionKind::Bump
                              ? solve_singular(spec, profile, eps, phi, grid, cfg.solver)
                              : solve_dirichlet(spec, 0.0, phi, grid, cfg.solver);
  write_field_csv(res.u, path_in(c, "field.csv"));
  json j = header(c, "solve");
  j["epsilon"] = eps;
  j["profile"] = to_json(profile);
  j["solve"] = to_json(res.report);
  j["abp"] = to_json(abp_check(res.u, phi));
  j["boundary_lipschitz_estimate"] = boundary_lipschitz_estimate(grid->domain(), phi);
  write_json(j, path_in(c, "report.json"));
  std::optional<double> level;
  if (profile.kind == ReactionKind::Bump && eps >= res.u.min_value() && eps <= res.u.max_value()) level = eps;
  maybe_svg(c, res.u, "heatmap.svg", level);

  c.out << "solve: " << (res.report.converged ? "converged" : "not converged") << " after "
        << res.report.sweeps << " sweeps, residual " << res.report.final_residual << ", lipschitz "
        << res.report.lipschitz_norm << "\n";
  return res.report.converged ? kExitOk : kExitNotConverged;
}

int run_sweep(const Context& c) {
  const Config& cfg = c.cfg;
  if (cfg.reaction.eps_list.empty()) throw Error(Errc::RangeError, "reaction.eps_list: required by sweep");
  SweepSetup setup;
  setup.spec = build_operator(cfg);
  setup.profile = build_profile(cfg);
  setup.phi = build_boundary(cfg);
  setup.grid = build_grid(cfg);
  setup.solver = cfg.solver;
  setup.eps_list = cfg.reaction.eps_list;
  setup.threads = c.threads;
  const SweepResult res = epsilon_sweep(setup);

  write_sweep_csv(res.report, path_in(c, "sweep.csv"));
  bool converged = true;
  for (std::size_t k = 0; k < res.fields.size(); ++k) {
    const std::string stem = "field_" + std::to_string(k);
    write_field_csv(res.fields[k], path_in(c, stem + ".csv"));
    const double eps = res.report.rows[k].eps;
    std::optional<double> level;
    if (eps >= res.fields[k].min_value() && eps <= res.fields[k].max_value()) level = eps;
    maybe_svg(c, res.fields[k], stem + ".svg", level);
    converged = converged && res.report.rows[k].converged;
  }
  json j = header(c, "sweep");
  j["sweep"] = to_json(res.report);
  const ScalarField& last = res.fields.back();
  j["limit"] = to_json(limit_residual_check(last, setup.spec, res.report.rows.back().eps, cfg.solver.stencil));
  write_json(j, path_in(c, "report.json"));

  for (const SweepRow& r : res.report.rows) {
    c.out << "eps " << r.eps << ": lipschitz " << r.lipschitz_norm << ", sup " << r.sup_u << ", sweeps "
          << r.sweeps << (r.converged ? "" : " (not converged)") << "\n";
  }
  return converged ? kExitOk : kExitNotConverged;
}

int verify_barrier_cmd(const Context& c) {
  BarrierParams bp;
  bp.mu = c.cfg.experiment.mu;
  bp.delta = c.cfg.experiment.delta;
  bp.params = c.cfg.op.params;
  const BarrierReport r = verify_barrier(bp, static_cast<std::size_t>(c.cfg.experiment.samples), c.cfg.output.seed);
  json j = header(c, "verify barrier");
  j["barrier"] = to_json(r);
  write_json(j, path_in(c, "report.json"));
  c.out << "barrier: delta " << bp.delta << " (delta* " << r.delta_star << "), sampled min " << r.sampled_min
        << ", negative samples " << r.negative_samples << "\n";
  return kExitOk;
}

// Identities of the reflected operator G: G = F on {y >= 0}, G(X, p, M) =
// -F(X~, p~, M~) below, and reflecting twice gives back F on {y >= 0}.
int verify_reflection_cmd(const Context& c) {
  const OperatorSpec spec = build_operator(c.cfg);
  const OperatorSpec g = reflect_operator(spec);
  const OperatorSpec gg = reflect_operator(g);
  std::mt19937_64 rng(c.cfg.output.seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::uniform_real_distribution<double> wide(-5.0, 5.0);
  double upper = 0.0;
  double lower = 0.0;
  double involution = 0.0;
  const auto n = static_cast<std::size_t>(c.cfg.experiment.samples);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 x{box(rng), box(rng)};
    const Vec2 p{wide(rng), wide(rng)};
    const SymMatrix2 m{wide(rng), wide(rng), wide(rng)};
    const double gv = eval_operator(g, x, p, m);
    if (x.y >= 0.0) {
      upper = std::max(upper, std::abs(gv - eval_operator(spec, x, p, m)));
      involution = std::max(involution, std::abs(eval_operator(gg, x, p, m) - eval_operator(spec, x, p, m)));
    } else {
      const double mirrored = eval_operator(spec, reflect_point(x), reflect_gradient(p), reflect_hessian(m));
      lower = std::max(lower, std::abs(gv + mirrored));
    }
  }
  json j = header(c, "verify reflection");
  j["reflection"] = {{"samples", n}, {"upper_error", upper}, {"lower_error", lower}, {"involution_error", involution}};
  write_json(j, path_in(c, "report.json"));
  c.out << "reflection: upper " << upper << ", lower " << lower << ", involution " << involution << "\n";
  return kExitOk;
}

int verify_propagation_cmd(const Context& c) {
  const OperatorSpec spec = build_operator(c.cfg);
  const PropagationResult r =
      propagation_experiment(spec, c.cfg.experiment.sigma, c.cfg.domain.resolution, c.cfg.solver);
  write_field_csv(r.w, path_in(c, "w.csv"));
  write_field_csv(r.reflected, path_in(c, "reflected.csv"));
  maybe_svg(c, r.reflected, "reflected.svg", std::nullopt);
  json j = header(c, "verify propagation");
  j["sigma"] = c.cfg.experiment.sigma;
  j["propagation"] = to_json(r);
  write_json(j, path_in(c, "report.json"));
  c.out << "propagation: C " << r.c_measured << ", reflection residual " << r.reflection_residual
        << ", mirror error " << r.mirror_error << "\n";
  return r.report.converged ? kExitOk : kExitNotConverged;
}

int verify_hopf_cmd(const Context& c) {
  const OperatorSpec spec = build_operator(c.cfg);
  const ExperimentSection& x = c.cfg.experiment;
  const BoundaryData configured = build_boundary(c.cfg);
  // Per radius: the configured data, then `instances` random data sets.
  const std::size_t per = static_cast<std::size_t>(x.instances) + 1;
  std::vector<HopfResult> results(x.radii.size() * per);
  parallel_for(results.size(), c.threads, [&](std::size_t k) {
    const double r = x.radii[k / per];
    const std::size_t inst = k % per;
    const BoundaryData phi =
        inst == 0 ? configured : hopf_random_data(r, c.cfg.output.seed + 1000 * (k / per) + inst);
    results[k] = hopf_experiment(spec, r, c.cfg.domain.resolution, phi, c.cfg.solver);
  });

  json runs = json::array();
  bool converged = true;
  for (std::size_t k = 0; k < results.size(); ++k) {
    json e = to_json(results[k]);
    e["radius"] = x.radii[k / per];
    e["data"] = k % per == 0 ? "configured" : "random";
    runs.push_back(e);
    converged = converged && results[k].report.converged;
  }
  json j = header(c, "verify hopf");
  j["hopf"] = runs;
  write_json(j, path_in(c, "report.json"));
  for (std::size_t k = 0; k < results.size(); k += per) {
    c.out << "hopf r " << x.radii[k / per] << ": theta " << results[k].theta << ", u(center) "
          << results[k].u_center << "\n";
  }
  return converged ? kExitOk : kExitNotConverged;
}

int verify_structural_cmd(const Context& c) {
  const OperatorSpec spec = build_operator(c.cfg);
  const auto n = static_cast<std::size_t>(c.cfg.experiment.samples);
  const StructuralReport s = check_F1(spec, n, c.cfg.output.seed);
  const MonotonicityReport m = monotonicity_check(spec, c.cfg.solver.stencil, n, c.cfg.output.seed);
  json j = header(c, "verify structural");
  j["structural"] = to_json(s);
  j["monotonicity"] = {{"samples", m.samples},
                       {"neighbor_violations", m.neighbor_violations},
                       {"own_violations", m.own_violations},
                       {"worst_gap", m.worst_gap}};
  write_json(j, path_in(c, "report.json"));
  c.out << "structural: F1 violations " << s.f1_violations << ", monotonicity violations "
        << m.neighbor_violations + m.own_violations << "\n";
  return kExitOk;
}

int verify_harnack_cmd(const Context& c) {
  const Config& cfg = c.cfg;
  const OperatorSpec spec = build_operator(cfg);
  const ReactionProfile profile = build_profile(cfg);
  const BoundaryData phi = build_boundary(cfg);
  const GridPtr grid = build_grid(cfg);
  const SolveResult res = profile.kind == ReactionKind::Bump
                              ? solve_singular(spec, profile, cfg.reaction.epsilon, phi, grid, cfg.solver)
                              : solve_dirichlet(spec, 0.0, phi, grid, cfg.solver);
  json j = header(c, "verify harnack");
  j["fraction"] = cfg.experiment.fraction;
  j["solve"] = to_json(res.report);
  try {
    const double ratio = harnack_ratio(res.u, cfg.experiment.fraction);
    j["ratio"] = ratio;
    c.out << "harnack: sup/inf " << ratio << "\n";
  } catch (const Error& e) {
    if (e.code() != Errc::NonPositiveField) throw;
    j["ratio"] = nullptr;
    j["note"] = e.detail();
    c.out << "harnack: " << e.detail() << "\n";
  }
  write_json(j, path_in(c, "report.json"));
  return res.report.converged ? kExitOk : kExitNotConverged;
}

int run_oracle1d(const Context& c) {
  const Config& cfg = c.cfg;
  const ExperimentSection& x = cfg.experiment;
  const OperatorSpec spec = build_operator(cfg);
  const ReactionProfile profile = build_profile(cfg);
  const double eps = cfg.reaction.epsilon;
  const Profile1D oracle = shooting_oracle_1d(profile, eps, x.left, x.right, x.nodes);
  const Solve1DResult scheme = solve_singular_1d(spec, profile, eps, x.left, x.right, x.nodes, cfg.solver);

  double gap = 0.0;
  std::string csv = "y,oracle,scheme\n";
  char buf[96];
  for (std::size_t k = 0; k < oracle.values.size(); ++k) {
    gap = std::max(gap, std::abs(oracle.values[k] - scheme.profile.values[k]));
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", oracle.position(k), oracle.values[k],
                  scheme.profile.values[k]);
    csv += buf;
  }
  write_text(csv, path_in(c, "profile.csv"));
  json j = header(c, "oracle1d");
  j["epsilon"] = eps;
  j["nodes"] = x.nodes;
  j["sup_gap"] = gap;
  j["solve"] = to_json(scheme.report);
  write_json(j, path_in(c, "report.json"));
  c.out << "oracle1d: sup |oracle - scheme| " << gap << "\n";
  return scheme.report.converged ? kExitOk : kExitNotConverged;
}

void summarize(const json& j, const std::string& prefix, std::ostream& out) {
  for (const auto& [key, value] : j.items()) {
    if (key == "config") continue;
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      summarize(value, name, out);
    } else if (value.is_array() && !value.empty() && value.front().is_object()) {
      for (std::size_t k = 0; k < value.size(); ++k) summarize(value[k], name + "[" + std::to_string(k) + "]", out);
    } else if (!value.is_array()) {
      out << name << " = " << value.dump() << "\n";
    }
  }
}

int run_report(const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(Errc::IoError, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw Error(Errc::IoError, "no report files in " + dir);
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    std::ifstream in(f);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(Errc::IoError, f.string() + ": " + e.what());
    }
    out << "# " << f.filename().string() << "\n";
    summarize(j, "", out);
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Singular reaction-diffusion solver and verification experiments", "cavity"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--threads", opt.threads, "Worker threads (default: CAVITY_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "Override output.seed");

  auto* solve = app.add_subcommand("solve", "Solve one boundary value problem");
  solve->add_option("config", opt.config_path)->required()->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "Solve along reaction.eps_list");
  sweep->add_option("config", opt.config_path)->required()->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "Run one verification experiment");
  verify->add_option("kind", opt.kind)
      ->required()
      ->check(CLI::IsMember({"barrier", "reflection", "propagation", "hopf", "structural", "harnack"}));
  verify->add_option("config", opt.config_path)->required()->check(CLI::ExistingFile);
  auto* oracle = app.add_subcommand("oracle1d", "Compare the column scheme with the shooting oracle");
  oracle->add_option("config", opt.config_path)->required()->check(CLI::ExistingFile);
  auto* report = app.add_subcommand("report", "Summarize the report files in a directory");
  report->add_option("dir", opt.dir)->required();
  for (auto* sub : {solve, sweep, verify, oracle, report}) sub->fallthrough();

  for (std::size_t k = 0; k < args.size(); ++k) {
    const std::string& a = args[k];
    if (a == "--threads" || a == "--seed") {
      ++k;
      continue;
    }
    if (a.starts_with("-")) continue;
    if (!app.get_subcommand_no_throw(a)) {
      err << "cavity: unknown subcommand '" << a << "'\n" << app.help();
      return kExitUsage;
    }
    break;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }

  try {
    if (report->parsed()) return run_report(opt.dir, out);
    const Context c = load(opt, out);
    if (solve->parsed()) return run_solve(c);
    if (sweep->parsed()) return run_sweep(c);
    if (oracle->parsed()) return run_oracle1d(c);
    if (opt.kind == "barrier") return verify_barrier_cmd(c);
    if (opt.kind == "reflection") return verify_reflection_cmd(c);
    if (opt.kind == "propagation") return verify_propagation_cmd(c);
    if (opt.kind == "hopf") return verify_hopf_cmd(c);
    if (opt.kind == "structural") return verify_structural_cmd(c);
    return verify_harnack_cmd(c);
  } catch (const Error& e) {
    err << "cavity: " << e.what() << "\n";
    const bool numerical = e.code() == Errc::BracketFailure || e.code() == Errc::ShootingBracketFailure;
    return numerical ? kExitNotConverged : kExitUsage;
  }
}

}  // namespace cavity
