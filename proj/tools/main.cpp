// spinmap CLI — configuration-driven pipelines over the library: bath discretization,
// exact joint propagation, dynamical-map analysis, second-order closed forms, and
// observable-bound audits. Every command writes CSV outputs plus a JSON run manifest.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spinmap/bloch.hpp"
#include "spinmap/config.hpp"
#include "spinmap/csv.hpp"
#include "spinmap/dynmap.hpp"
#include "spinmap/errors.hpp"
#include "spinmap/propagator.hpp"
#include "spinmap/spectral.hpp"
#include "spinmap/tcl2.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinmap;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr double kCutoffWarnLevel = 1e-3;
constexpr double kSumRuleWarnLevel = 1e-3;

struct Context {
  config::ExperimentConfig cfg;
  fs::path out;
  int workers = 1;
  std::string command;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  json extra = json::object();
};

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 4u));
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void warn(Context& ctx, const std::string& message) {
  std::cerr << "warning: " << message << "\n";
  ctx.warnings.push_back(message);
}

std::string out_file(Context& ctx, const std::string& name) {
  ctx.outputs.push_back(name);
  return (ctx.out / name).string();
}

// One manifest per command so successive pipeline stages in the same directory do not
// clobber each other's provenance.
void write_manifest(const Context& ctx) {
  json manifest;
  manifest["command"] = ctx.command;
  manifest["config_hash"] = config::config_hash(ctx.cfg);
  manifest["tool_version"] = kVersion;
  manifest["created_utc"] = utc_now();
  manifest["workers"] = ctx.workers;
  manifest["outputs"] = ctx.outputs;
  manifest["warnings"] = ctx.warnings;
  for (const auto& item : ctx.extra.items()) manifest[item.key()] = item.value();

  std::ofstream out(ctx.out / ("manifest_" + ctx.command + ".json"), std::ios::binary);
  if (!out) throw AnalysisError("cannot write manifest in " + ctx.out.string());
  out << manifest.dump(2) << '\n';
}

spectral::DiscretizedBath build_bath(const config::ExperimentConfig& cfg) {
  const auto density = config::build_density(cfg.model, cfg.delta);
  const auto [lo, hi] = config::bath_window(cfg);
  return spectral::discretize(density, cfg.bath.n_modes, lo, hi);
}

Eigen::MatrixXcd pauli_z() {
  Eigen::MatrixXcd sz(2, 2);
  sz << 1, 0, 0, -1;
  return sz;
}

Eigen::Vector3d bloch_of(const Eigen::Matrix2cd& rho) {
  const auto a = bloch::density_to_bloch(bloch::DensityMatrix::from_matrix(rho, 1e-6));
  return Eigen::Vector3d(a(0), a(1), a(2));
}

double basis_condition_number(const std::vector<propagator::Trajectory>& basis) {
  Eigen::MatrixXcd x(4, 4);
  for (int c = 0; c < 4; ++c) x.col(c) = dynmap::vec_rho(basis[static_cast<std::size_t>(c)].rho[0]);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(x).singularValues();
  return sv(0) / sv(3);
}

std::vector<propagator::Trajectory> read_basis(const Context& ctx) {
  std::vector<propagator::Trajectory> trajectories;
  for (const char* label : {"up", "down", "plus_x", "plus_y"}) {
    const fs::path path = ctx.out / (std::string("trajectory_") + label + ".csv");
    if (!fs::exists(path))
      throw AnalysisError("missing basis trajectory " + path.string() +
                          " (run the simulate command first)");
    propagator::Trajectory traj = io::read_trajectory_csv(path.string());
    traj.label = label;
    trajectories.push_back(std::move(traj));
  }
  for (int i = 0;; ++i) {
    const fs::path path = ctx.out / ("trajectory_extra_" + std::to_string(i) + ".csv");
    if (!fs::exists(path)) break;
    propagator::Trajectory traj = io::read_trajectory_csv(path.string());
    traj.label = "extra_" + std::to_string(i);
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

// sigma_z difference of the real up/down pair checked against the contraction bounds.
dynmap::BoundReport pair_bound_report(const std::vector<propagator::Trajectory>& basis,
                                      const dynmap::SvdSeries& svd, double slack) {
  const bloch::Observable sz = bloch::Observable::from_matrix(pauli_z());
  const std::vector<double> delta = dynmap::delta_observable(basis[0], basis[1], sz);
  return dynmap::bound_check(svd, bloch_of(basis[0].rho[0]), bloch_of(basis[1].rho[0]), sz,
                             delta, slack);
}

int cmd_discretize(Context& ctx) {
  const auto density = config::build_density(ctx.cfg.model, ctx.cfg.delta);
  const auto [lo, hi] = config::bath_window(ctx.cfg);
  const auto bath = spectral::discretize(density, ctx.cfg.bath.n_modes, lo, hi);
  io::write_bath_csv(out_file(ctx, "bath.csv"), bath);

  const auto report = spectral::sum_rule_check(bath, density, lo, hi);
  const double worst =
      std::max(std::abs(report.rel_error_j), std::abs(report.rel_error_j_over_w));
  if (bath.is_empty()) warn(ctx, "bath couplings are identically zero (decoupled model)");
  if (!bath.is_empty() && worst > kSumRuleWarnLevel)
    warn(ctx, "sum-rule error " + std::to_string(worst) + " exceeds " +
                  std::to_string(kSumRuleWarnLevel) + "; increase n_modes");

  ctx.extra["window"] = {{"omega_lo", lo}, {"omega_hi", hi}};
  ctx.extra["sum_rule"] = {{"integral_j", report.integral_j},
                           {"discrete_j", report.discrete_j},
                           {"integral_j_over_w", report.integral_j_over_w},
                           {"discrete_j_over_w", report.discrete_j_over_w},
                           {"rel_error_j", report.rel_error_j},
                           {"rel_error_j_over_w", report.rel_error_j_over_w}};
  std::printf("bath: %d modes on [%g, %g]; sum-rule errors %.3e / %.3e\n", bath.n_modes(), lo,
              hi, report.rel_error_j, report.rel_error_j_over_w);
  return 0;
}

int cmd_simulate(Context& ctx) {
  const auto bath = build_bath(ctx.cfg);
  if (bath.is_empty()) warn(ctx, "bath couplings are identically zero (decoupled model)");
  const auto space = propagator::HilbertSpaceSpec::uniform(bath, ctx.cfg.fock_cutoff);
  space.validate(static_cast<std::size_t>(ctx.cfg.memory_budget_mb * 1048576.0),
                 ctx.cfg.krylov.max_dim);
  const auto h = propagator::build_hamiltonian(space, ctx.cfg.delta);

  const propagator::TimeGrid grid{ctx.cfg.time.dt, ctx.cfg.time.steps,
                                  ctx.cfg.time.snapshot_stride};
  std::vector<std::pair<double, double>> extras;
  for (const auto& s : ctx.cfg.extra_states) extras.emplace_back(s.theta, s.phi);
  const auto trajectories =
      propagator::run_basis_trajectories(h, grid, extras, ctx.workers, ctx.cfg.krylov);

  io::write_bath_csv(out_file(ctx, "bath.csv"), bath);
  double norm_drift = 0.0, energy_drift = 0.0, cutoff_pop = 0.0;
  for (const auto& traj : trajectories) {
    io::write_trajectory_csv(out_file(ctx, "trajectory_" + traj.label + ".csv"), traj);
    norm_drift = std::max(norm_drift, traj.max_norm_drift);
    energy_drift = std::max(energy_drift, traj.max_energy_drift);
    cutoff_pop = std::max(cutoff_pop, traj.max_cutoff_population);
  }
  if (cutoff_pop > kCutoffWarnLevel)
    warn(ctx, "population " + std::to_string(cutoff_pop) +
                  " reached the highest retained oscillator level; raise fock_cutoff");

  ctx.extra["convergence"] = {{"max_norm_drift", norm_drift},
                              {"max_energy_drift", energy_drift},
                              {"max_cutoff_population", cutoff_pop},
                              {"cutoff_converged", cutoff_pop <= kCutoffWarnLevel}};
  ctx.extra["state_space"] = {{"modes", bath.n_modes()},
                              {"fock_cutoff", ctx.cfg.fock_cutoff},
                              {"dimension", space.total_dim()}};
  std::printf("simulated %zu trajectories (dim %zu, %ld steps): norm drift %.2e, "
              "energy drift %.2e, cutoff population %.2e\n",
              trajectories.size(), space.total_dim(), ctx.cfg.time.steps, norm_drift,
              energy_drift, cutoff_pop);
  return 0;
}

int cmd_analyze(Context& ctx) {
  const auto trajectories = read_basis(ctx);
  const std::vector<propagator::Trajectory> basis(trajectories.begin(),
                                                  trajectories.begin() + 4);

  const auto maps = dynmap::reconstruct_map(basis, ctx.cfg.analysis.cond_limit);
  const auto affine = dynmap::tensor_to_affine(maps);
  const auto svd = dynmap::svd_series(affine);
  io::write_map_csv(out_file(ctx, "map.csv"), affine);
  io::write_svd_csv(out_file(ctx, "svd.csv"), svd);

  const auto bound = pair_bound_report(basis, svd, ctx.cfg.bound.slack);
  io::write_bound_csv(out_file(ctx, "bound.csv"), bound);

  // held-out forecast: apply the reconstructed map to each extra state's t = 0 input
  double prediction_error = 0.0;
  if (trajectories.size() > 4) {
    std::ofstream pred(ctx.out / "prediction.csv", std::ios::binary);
    ctx.outputs.push_back("prediction.csv");
    pred << "t";
    for (std::size_t e = 4; e < trajectories.size(); ++e)
      pred << ",err_" << trajectories[e].label;
    pred << '\n';
    for (std::size_t k = 0; k < maps.t.size(); ++k) {
      pred << io::format_double(maps.t[k]);
      for (std::size_t e = 4; e < trajectories.size(); ++e) {
        const Eigen::MatrixXcd forecast = dynmap::apply_map(maps.phi[k], trajectories[e].rho[0]);
        const double err = (forecast - trajectories[e].rho[k]).cwiseAbs().maxCoeff();
        prediction_error = std::max(prediction_error, err);
        pred << ',' << io::format_double(err);
      }
      pred << '\n';
    }
  }

  const auto report = dynmap::classify_asymptotics(svd, ctx.cfg.analysis.asymptotics);
  json classification = {
      {"class", dynmap::to_string(report.classification)},
      {"rank", report.rank},
      {"s_inf", {report.s_inf(0), report.s_inf(1), report.s_inf(2)}},
      {"b_inf", {report.b_inf(0), report.b_inf(1), report.b_inf(2)}},
      {"max_fluctuation_s", report.max_fluctuation_s},
      {"max_fluctuation_b", report.max_fluctuation_b},
      {"window_begin_t", svd.t[report.window_begin]}};
  if (report.classification == dynmap::AsymptoticClass::kInitialStateDependent &&
      report.rank == 1) {
    const auto proj = dynmap::asymptotic_projection(report, ctx.cfg.analysis.asymptotics.tol_zero);
    classification["projection"] = {{"s1", proj.s1},
                                    {"v1", {proj.v1(0), proj.v1(1), proj.v1(2)}},
                                    {"w1", {proj.w1(0), proj.w1(1), proj.w1(2)}}};
  }
  ctx.extra["classification"] = classification;
  ctx.extra["condition_number"] = basis_condition_number(basis);
  ctx.extra["bound"] = {{"worst_general_margin", bound.worst_margin}};
  ctx.extra["max_prediction_error"] = prediction_error;

  std::printf("classification: %s (rank %d, s_inf = [%.3e, %.3e, %.3e])\n",
              dynmap::to_string(report.classification), report.rank, report.s_inf(0),
              report.s_inf(1), report.s_inf(2));
  if (trajectories.size() > 4)
    std::printf("held-out prediction max error: %.3e\n", prediction_error);
  return 0;
}

int cmd_tcl2(Context& ctx) {
  const double delta = ctx.cfg.delta;
  const tcl2::Rates rates =
      ctx.cfg.tcl2.rates
          ? *ctx.cfg.tcl2.rates
          : tcl2::rates_from_spectral_density(config::build_density(ctx.cfg.model, delta),
                                              delta);

  std::vector<double> grid(static_cast<std::size_t>(ctx.cfg.tcl2.n_samples));
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = ctx.cfg.tcl2.t_max * static_cast<double>(i) / (grid.size() - 1);

  // closed forms; an overdamped rate set throws RegimeError before anything is written
  dynmap::AffineBlochMap affine;
  affine.dim = 2;
  dynmap::SvdSeries svd;
  svd.dim = 2;
  for (double t : grid) {
    affine.t.push_back(t);
    affine.m.push_back(tcl2::analytic_m(delta, rates, t));
    affine.b.push_back(tcl2::analytic_b(delta, rates, t));
    const auto sv = tcl2::analytic_singular_values(delta, rates, t);
    Eigen::Vector3d s(sv.s_plus, sv.s_minus, sv.s_x);
    std::sort(s.data(), s.data() + 3, std::greater<double>());
    svd.t.push_back(t);
    svd.s.push_back(s);
    svd.b.push_back(affine.b.back());
  }
  io::write_map_csv(out_file(ctx, "tcl2_map.csv"), affine);
  io::write_svd_csv(out_file(ctx, "tcl2_svd.csv"), svd);

  // cross-check the printed solution against direct integration of the same equations
  const double theta = ctx.cfg.tcl2.initial.theta, phi = ctx.cfg.tcl2.initial.phi;
  const Eigen::Vector3d a0(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                           std::cos(theta));
  const auto ode = tcl2::solve_ode(delta, rates, a0, grid);
  double closed_vs_ode = 0.0;
  propagator::Trajectory ode_traj;
  ode_traj.label = "tcl2_ode";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Eigen::Vector3d closed = affine.m[k] * a0 + affine.b[k];
    closed_vs_ode = std::max(closed_vs_ode, (closed - ode.a[k]).norm());
    Eigen::Matrix2cd rho;
    const Eigen::Vector3d& a = ode.a[k];
    rho << 0.5 * (1.0 + a(2)), 0.5 * std::complex<double>(a(0), -a(1)),
        0.5 * std::complex<double>(a(0), a(1)), 0.5 * (1.0 - a(2));
    ode_traj.t.push_back(grid[k]);
    ode_traj.rho.push_back(rho);
  }
  io::write_trajectory_csv(out_file(ctx, "tcl2_ode.csv"), ode_traj);

  ctx.extra["rates"] = {{"gamma_xx", rates.gamma_xx},
                        {"gamma_x", rates.gamma_x},
                        {"gamma_yy", rates.gamma_yy},
                        {"gamma_yz", rates.gamma_yz},
                        {"renormalized_frequency", tcl2::renormalized_frequency(delta, rates)}};
  ctx.extra["max_closed_vs_ode"] = closed_vs_ode;

  // when a reconstructed series sits in the same directory, diff it sample by sample
  const fs::path reconstructed = ctx.out / "svd.csv";
  if (fs::exists(reconstructed)) {
    const auto other = io::read_svd_csv(reconstructed.string());
    double worst = -1.0;
    std::size_t matched = 0;
    for (std::size_t k = 0; k < svd.t.size(); ++k)
      for (std::size_t m = 0; m < other.t.size(); ++m)
        if (std::abs(svd.t[k] - other.t[m]) < 1e-9) {
          worst = std::max(worst, (svd.s[k] - other.s[m]).cwiseAbs().maxCoeff());
          ++matched;
        }
    if (matched > 0) {
      ctx.extra["vs_reconstructed"] = {{"matched_samples", matched},
                                       {"max_singular_value_diff", worst}};
      std::printf("vs reconstructed svd.csv: %zu shared samples, max diff %.3e\n", matched,
                  worst);
    } else {
      warn(ctx, "svd.csv present but shares no sample times with the configured grid");
    }
  }

  std::printf("rates: gamma_xx %.6g, gamma_x %.6g, gamma_yy %.6g, gamma_yz %.6g; "
              "closed-form vs ODE max diff %.3e\n",
              rates.gamma_xx, rates.gamma_x, rates.gamma_yy, rates.gamma_yz, closed_vs_ode);
  return 0;
}

int cmd_bound_check(Context& ctx) {
  for (const char* name : {"svd.csv", "map.csv"})
    if (!fs::exists(ctx.out / name))
      throw AnalysisError("missing " + std::string(name) + " (run the analyze command first)");
  const auto svd = io::read_svd_csv((ctx.out / "svd.csv").string());
  const auto affine = io::read_map_csv((ctx.out / "map.csv").string());
  const auto trajectories = read_basis(ctx);

  const auto pair_report = pair_bound_report(trajectories, svd, ctx.cfg.bound.slack);
  io::write_bound_csv(out_file(ctx, "bound.csv"), pair_report);

  // randomized audit on map-predicted pairs: draw states in the coefficient ball and
  // Gaussian Hermitian observables, then check |tr O (rho1 - rho2)| against both bounds
  std::mt19937_64 rng(ctx.cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const bloch::GeneratorSet gens(2);

  auto draw_ball = [&]() {
    Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
    while (v.norm() < 1e-6) v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    return Eigen::Vector3d(std::cbrt(uniform(rng)) * v.normalized());
  };

  double worst_general = std::numeric_limits<double>::infinity();
  double worst_sharp = std::numeric_limits<double>::infinity();
  for (int draw = 0; draw < ctx.cfg.bound.n_draws; ++draw) {
    const Eigen::Vector3d a1 = draw_ball(), a2 = draw_ball();
    Eigen::MatrixXcd o(2, 2);
    o(0, 0) = gauss(rng);
    o(1, 1) = gauss(rng);
    o(0, 1) = std::complex<double>(gauss(rng), gauss(rng)) / std::sqrt(2.0);
    o(1, 0) = std::conj(o(0, 1));
    const bloch::Observable obs = bloch::Observable::from_matrix(o);

    Eigen::Vector3d o_coeff;
    for (int n = 0; n < 3; ++n) o_coeff(n) = (o * gens[static_cast<std::size_t>(n)]).trace().real();

    std::vector<double> delta(affine.t.size());
    for (std::size_t k = 0; k < affine.t.size(); ++k)
      delta[k] = 0.5 * std::abs(o_coeff.dot(affine.m[k] * (a1 - a2)));

    const auto report = dynmap::bound_check(svd, a1, a2, obs, delta, ctx.cfg.bound.slack);
    worst_general = std::min(worst_general, report.worst_margin);
    for (std::size_t k = 0; k < report.t.size(); ++k)
      worst_sharp = std::min(worst_sharp, report.bound_sharp[k] - report.delta[k]);
  }
  if (ctx.cfg.bound.n_draws > 0 && worst_sharp < -ctx.cfg.bound.slack)
    throw AnalysisError("sharp bound violated on map-predicted pairs by " +
                        std::to_string(-worst_sharp));

  ctx.extra["bound"] = {{"pair_worst_general_margin", pair_report.worst_margin},
                        {"draws", ctx.cfg.bound.n_draws},
                        {"draw_worst_general_margin",
                         ctx.cfg.bound.n_draws > 0 ? json(worst_general) : json(nullptr)},
                        {"draw_worst_sharp_margin",
                         ctx.cfg.bound.n_draws > 0 ? json(worst_sharp) : json(nullptr)}};
  std::printf("bounds hold: up/down worst general margin %.3e", pair_report.worst_margin);
  if (ctx.cfg.bound.n_draws > 0)
    std::printf("; %d draws, worst general %.3e, worst sharp %.3e", ctx.cfg.bound.n_draws,
                worst_general, worst_sharp);
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinmap: dynamical-map reconstruction for the unbiased spin-boson model"};
  app.require_subcommand(0, 1);

  bool emit_default = false;
  app.add_flag("--emit-default-config", emit_default,
               "print the canonical default configuration to stdout and exit");

  struct SubArgs {
    std::string config_path;
    std::string out_dir = "out";
    int workers = default_workers();
    std::optional<std::uint64_t> seed;
  };
  SubArgs args;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"discretize", "discretize the spectral density into a finite mode table"},
      {"simulate", "propagate the basis (and extra) trajectories exactly"},
      {"analyze", "reconstruct the map and its singular-value series from trajectories"},
      {"tcl2", "closed-form and ODE weak-coupling reference dynamics"},
      {"bound-check", "validate observable-difference bounds on simulated trajectories"},
  };
  for (const auto& [name, blurb] : commands) {
    CLI::App* sub = app.add_subcommand(name, blurb);
    sub->add_option("--config", args.config_path, "experiment configuration (JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory (created if absent)");
    sub->add_option("--workers", args.workers, "concurrent trajectory jobs")
        ->check(CLI::Range(1, 256));
    sub->add_option("--seed", args.seed, "override the configured random seed");
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (emit_default) {
      std::cout << config::canonical_json(config::default_config()) << "\n";
      return 0;
    }

    Context ctx;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) ctx.command = name;
    if (ctx.command.empty()) {
      std::cerr << app.help();
      return 2;
    }

    ctx.cfg = config::load_config_file(args.config_path);
    if (args.seed) ctx.cfg.seed = *args.seed;
    ctx.workers = args.workers;
    ctx.out = args.out_dir;
    fs::create_directories(ctx.out);

    int rc = 1;
    if (ctx.command == "discretize") rc = cmd_discretize(ctx);
    else if (ctx.command == "simulate") rc = cmd_simulate(ctx);
    else if (ctx.command == "analyze") rc = cmd_analyze(ctx);
    else if (ctx.command == "tcl2") rc = cmd_tcl2(ctx);
    else if (ctx.command == "bound-check") rc = cmd_bound_check(ctx);
    write_manifest(ctx);
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const AnalysisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const RegimeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
