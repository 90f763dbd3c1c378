// Command-line driver for the regularization-path experiments: reproduces
// the error tables, runs the property suites, and checks solver orders.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regpath/analysis.hpp"
#include "regpath/elliptic.hpp"
#include "regpath/heat_backend.hpp"
#include "regpath/manufactured.hpp"
#include "regpath/tikhonov.hpp"

using namespace regpath;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string example = "located-heat";
  double kappa = 1.0;
  std::vector<int> levels{1, 2, 3, 4, 5, 6};
  int n_per_side = 33;
  int n_steps = 2048;
  double tolerance = 1e-5;
  int max_iterations = 10000;
  double alpha = 0.5;  // solve command only
  std::string output = "regpath_out";
  std::string format = "csv";
  unsigned seed = 1;
  bool reduced_scale = false;
  bool warm_start = false;
  bool verbose = false;
  bool inject_adjoint_sign_error = false;  // verify: mutation hook
};

std::string config_header(const RunConfig& cfg, const std::string& prefix) {
  std::ostringstream os;
  os << prefix << "example=" << cfg.example << " kappa=" << cfg.kappa << " levels=";
  for (std::size_t i = 0; i < cfg.levels.size(); ++i)
    os << (i ? "," : "") << cfg.levels[i];
  os << " n_per_side=" << cfg.n_per_side << " n_steps=" << cfg.n_steps
     << " tolerance=" << cfg.tolerance << " max_iterations=" << cfg.max_iterations
     << " seed=" << cfg.seed << " reduced_scale=" << (cfg.reduced_scale ? 1 : 0)
     << " warm_start=" << (cfg.warm_start ? 1 : 0) << '\n';
  return os.str();
}

json config_json(const RunConfig& cfg) {
  return json{{"example", cfg.example},
              {"kappa", cfg.kappa},
              {"levels", cfg.levels},
              {"n_per_side", cfg.n_per_side},
              {"n_steps", cfg.n_steps},
              {"tolerance", cfg.tolerance},
              {"max_iterations", cfg.max_iterations},
              {"seed", cfg.seed},
              {"reduced_scale", cfg.reduced_scale},
              {"warm_start", cfg.warm_start}};
}

json record_json(const RegPathRecord& rec, bool with_q) {
  json j{{"level", rec.level},         {"alpha", rec.alpha},
         {"iterations", rec.iterations}, {"converged", rec.converged},
         {"err_l1", rec.err_l1},       {"err_l2", rec.err_l2},
         {"state_err", rec.state_err}, {"inactive_measure", rec.inactive_measure},
         {"deriv_l1", rec.deriv_l1},   {"objective", rec.objective}};
  if (with_q) j["q"] = rec.q;
  return j;
}

FixedPointConfig solver_config(const RunConfig& cfg) {
  FixedPointConfig fp;
  fp.tolerance = cfg.tolerance;
  fp.max_iterations = cfg.max_iterations;
  fp.warm_start = cfg.warm_start;
  if (cfg.verbose) fp.log = &std::cerr;
  return fp;
}

void make_poisson_target(int n, NodalField& target, AdmissibleBox& box) {
  const SpaceMesh probe = build_uniform_mesh(n);
  NodalField u0 = NodalField::Zero(probe.n_nodes());
  for (int i : probe.interior) u0[i] = 0.05;
  box = {-0.2, 0.2};
  PoissonBackend seed(n, NodalField::Zero(probe.n_nodes()), box);
  target = seed.apply_T(u0);
}

std::vector<RegPathRecord> run_records(const RunConfig& cfg) {
  const FixedPointConfig fp = solver_config(cfg);
  if (cfg.example == "located-heat") {
    const ManufacturedProblem prob = make_located_heat_example(cfg.kappa);
    const LocatedHeatBackend backend(prob, cfg.n_per_side, cfg.n_steps);
    return run_reg_path(backend, cfg.levels, fp);
  }
  NodalField target;
  AdmissibleBox box;
  make_poisson_target(cfg.n_per_side, target, box);
  const PoissonBackend backend(cfg.n_per_side, target, box);
  return run_reg_path(backend, cfg.levels, fp);
}

void write_outputs(const RunConfig& cfg, const std::vector<RegPathRecord>& records) {
  const EOCTable table =
      make_eoc_table(records, cfg.kappa, cfg.n_per_side, cfg.n_steps, cfg.tolerance);
  {
    std::ofstream os(cfg.output + ".csv");
    os << config_header(cfg, "# ") << emit_table(table, TableFormat::csv);
  }
  {
    std::ofstream os(cfg.output + ".md");
    std::string hdr = config_header(cfg, "");
    hdr.pop_back();
    os << "<!-- " << hdr << " -->\n" << emit_table(table, TableFormat::markdown);
  }
  {
    std::ofstream os(cfg.output + ".jsonl");
    os << json{{"config", config_json(cfg)}}.dump() << '\n';
    for (const auto& rec : records) os << record_json(rec, true).dump() << '\n';
  }
  std::cout << config_header(cfg, "# ") << emit_table(table, TableFormat::markdown);
}

int cmd_path(const RunConfig& cfg) {
  const auto records = run_records(cfg);
  write_outputs(cfg, records);
  int bad = 0;
  for (const auto& rec : records) {
    if (!rec.converged) {
      std::cerr << "level " << rec.level << " did not converge\n";
      ++bad;
    }
  }
  return bad ? 1 : 0;
}

int cmd_solve(const RunConfig& cfg) {
  const FixedPointConfig fp = solver_config(cfg);
  RegPathRecord rec;
  rec.level = static_cast<int>(std::lround(-std::log2(cfg.alpha)));
  rec.alpha = cfg.alpha;
  if (cfg.example == "located-heat") {
    const ManufacturedProblem prob = make_located_heat_example(cfg.kappa);
    const LocatedHeatBackend backend(prob, cfg.n_per_side, cfg.n_steps);
    const FixedPointOutcome out = solve_fixed_point(backend, cfg.alpha, fp);
    rec.iterations = out.iterations;
    rec.converged = out.converged;
    rec.q = out.q;
    backend.fill_record(rec);
    std::ofstream os(cfg.output + "_control.csv");
    os << config_header(cfg, "# ");
    dump_control(backend.make_control(out.q, cfg.alpha), os);
  } else {
    NodalField target;
    AdmissibleBox box;
    make_poisson_target(cfg.n_per_side, target, box);
    const PoissonBackend backend(cfg.n_per_side, target, box);
    const FixedPointOutcome out = solve_fixed_point(backend, cfg.alpha, fp);
    rec.iterations = out.iterations;
    rec.converged = out.converged;
    rec.q = out.q;
    backend.fill_record(rec);
  }
  std::cout << record_json(rec, false).dump(2) << '\n';
  return rec.converged ? 0 : 1;
}

int check(const char* name, bool pass, double value) {
  std::printf("%-42s %s (%.3e)\n", name, pass ? "PASS" : "FAIL", value);
  return pass ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg) {
  int failures = 0;
  std::mt19937 rng(cfg.seed);
  std::normal_distribution<double> dist;

  {  // discrete adjointness, optionally with the injected sign error
    const SpaceMesh mesh = build_uniform_mesh(9);
    const TimePartition grid = build_uniform_partition(8, 0.5);
    const ParabolicOperator op(mesh, grid);
    auto rand_field = [&]() {
      NodalField v = NodalField::Zero(mesh.n_nodes());
      for (int i : mesh.interior) v[i] = dist(rng);
      return v;
    };
    const double flip = cfg.inject_adjoint_sign_error ? -1.0 : 1.0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<NodalField> F, H;
      for (int m = 0; m <= 8; ++m) {
        F.push_back(rand_field());
        H.push_back(rand_field());
      }
      const StateTrajectory y =
          op.solve_state([&](int m) { return F[m]; }, rand_field() * 0.0);
      const AdjointTrajectory p =
          op.solve_adjoint([&](int m) { return flip * H[m]; });
      double lhs = 0.0, rhs = 0.0;
      for (int m = 1; m <= 8; ++m) lhs += H[m].dot(y.value(m));
      rhs += F[0].dot(p.node(0));
      for (int m = 1; m <= 7; ++m) rhs += F[m].dot(p.node(m));
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    failures += check("adjointness (100 random pairs)", worst <= 1e-10, worst);
  }

  {  // projection properties
    const AdmissibleBox box{-0.2, 0.2};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng), w = u(rng);
      const double pv = project_box(v, box), pw = project_box(w, box);
      ok = ok && project_box(pv, box) == pv;
      worst = std::max(worst, std::abs(pv - pw) - std::abs(v - w));
      ok = ok && pv >= box.lower && pv <= box.upper;
    }
    failures += check("projection idempotent and 1-Lipschitz", ok && worst <= 1e-15, worst);
  }

  {  // exact control integrals vs composite Simpson
    const TimePartition pt = build_uniform_partition(8, 0.5);
    std::uniform_real_distribution<double> qdist(-0.6, 0.6);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      ImplicitControl u;
      u.grid = &pt;
      u.box = {-0.2, 0.2};
      u.alpha = 0.5;
      u.q.resize(9);
      for (auto& q : u.q) q = qdist(rng);
      double l1 = 0.0;
      const int per = 10000;
      for (int m = 1; m <= 8; ++m) {
        const double a = pt.nodes[m - 1], h = pt.length(m) / per;
        for (int i = 0; i < per; ++i) {
          const double t0 = a + i * h, tm = t0 + 0.5 * h, t1 = t0 + h;
          auto d = [&](double t) { return std::abs(u.value(t) + 0.2); };
          l1 += h / 6.0 * (d(t0) + 4.0 * d(tm) + d(t1));
        }
      }
      worst = std::max(worst, std::abs(control_error_norms(u, -0.2).first - l1));
    }
    failures += check("exact integrals vs quadrature oracle", worst <= 1e-6, worst);
  }

  if (cfg.example == "located-heat") {  // optimality and continuity on a toy path
    const ManufacturedProblem prob = make_located_heat_example(cfg.kappa);
    const LocatedHeatBackend backend(prob, 9, 32);
    FixedPointConfig fp = solver_config(cfg);
    const auto recs = run_reg_path(backend, {1, 2, 3, 4}, fp);
    bool conv = true;
    double worst_vi = 0.0, worst_slack = 0.0;
    for (const auto& rec : recs) {
      conv = conv && rec.converged;
      worst_vi = std::min(worst_vi,
                          variational_inequality_residual(backend, rec.q, rec.alpha));
    }
    for (std::size_t i = 1; i < recs.size(); ++i)
      worst_slack = std::min(worst_slack,
                             check_monotonicity_inequality(backend, recs[i - 1], recs[i]));
    failures += check("variational inequality residual", conv && worst_vi >= -1e-6, worst_vi);
    failures += check("continuity inequality slack", worst_slack >= -1e-6, worst_slack);
  } else {  // elliptic gradient check plus the same path properties
    NodalField target;
    AdmissibleBox box;
    make_poisson_target(9, target, box);
    const PoissonBackend backend(9, target, box);
    const SpaceMesh& mesh = backend.mesh();
    NodalField u = NodalField::Zero(mesh.n_nodes());
    for (int i : mesh.interior) u[i] = 0.03 * std::sin(1.0 + i);
    NodalField du = NodalField::Zero(mesh.n_nodes());
    for (int i : mesh.interior) du[i] = 0.01 * std::cos(2.0 + i);
    auto half_misfit = [&](const NodalField& v) {
      const NodalField y = backend.apply_T(v) - target;
      CtrlFn f;
      f.kind = CtrlFn::Kind::raw;
      f.q.assign(y.data(), y.data() + y.size());
      return 0.5 * backend.inner(f, f);
    };
    const double h = 1e-5;
    const double fd = (half_misfit(u + h * du) - half_misfit(u - h * du)) / (2.0 * h);
    const NodalField p = backend.adjoint_for(u);
    CtrlFn pf, df;
    pf.kind = df.kind = CtrlFn::Kind::raw;
    pf.q.assign(p.data(), p.data() + p.size());
    df.q.assign(du.data(), du.data() + du.size());
    const double pairing = backend.inner(pf, df);
    const double rel = std::abs(fd - pairing) / std::max(1e-30, std::abs(pairing));
    failures += check("elliptic gradient check", rel <= 1e-6, rel);

    FixedPointConfig fp = solver_config(cfg);
    fp.tolerance = std::min(fp.tolerance, 1e-9);
    const auto recs = run_reg_path(backend, {1, 2, 3, 4, 5, 6}, fp);
    double worst_slack = 0.0;
    for (std::size_t i = 1; i < recs.size(); ++i)
      worst_slack = std::min(worst_slack,
                             check_monotonicity_inequality(backend, recs[i - 1], recs[i]));
    failures += check("continuity inequality slack", worst_slack >= -1e-6, worst_slack);
  }

  {  // measure-condition estimator against the closed form
    const ManufacturedProblem prob = make_located_heat_example(cfg.kappa);
    const TimePartition grid = build_uniform_partition(32768, prob.end_time);
    std::vector<double> q;
    for (double t : grid.nodes) q.push_back(prob.bstar_pbar(t));
    std::vector<double> epsilons;
    for (int j = 12; j >= 1; --j) {
      const double eps = std::pow(2.0, -j) * 0.25;
      const double meas = std::pow(4.0 * eps, cfg.kappa);
      if (meas >= 4.0 * grid.length(1) && meas <= 0.8 * prob.end_time)
        epsilons.push_back(eps);
    }
    const RateFit fit = fit_rate(measure_condition_estimate(grid, q, epsilons), epsilons);
    const double err = std::abs(fit.exponent - cfg.kappa);
    failures += check("measure estimator exponent", err <= 0.05, fit.exponent);
  }

  std::printf("%d check(s) failed\n", failures);
  return failures ? 1 : 0;
}

int cmd_convergence(const RunConfig& cfg) {
  int failures = 0;
  const double om = 4.0 * std::numbers::pi;
  auto c = [&](double t) { return std::cos(om * t); };
  auto cdt = [&](double t) { return -om * std::sin(om * t); };

  {  // zero-data sanity
    const SpaceMesh mesh = build_uniform_mesh(5);
    const TimePartition grid = build_uniform_partition(4, 0.5);
    const ParabolicOperator op(mesh, grid);
    auto zero = [&](int) { return NodalField::Zero(mesh.n_nodes()); };
    const StateTrajectory y = op.solve_state(zero, NodalField::Zero(mesh.n_nodes()));
    double total = 0.0;
    for (int m = 1; m <= 4; ++m) total += y.value(m).norm();
    failures += check("zero-data sanity", total == 0.0, total);
  }

  {  // temporal order against the semidiscrete system
    const SpaceMesh mesh = build_uniform_mesh(9);
    const SparseOperator M = assemble(mesh, OperatorRole::mass);
    const SparseOperator K = assemble(mesh, OperatorRole::stiffness);
    const NodalField w = interpolate(mesh, &ManufacturedProblem::g1);
    const Eigen::VectorXd Mw = M.full * w;
    const Eigen::VectorXd Kw = K.full * w;
    auto err = [&](int steps) {
      const TimePartition grid = build_uniform_partition(steps, 0.5);
      const ParabolicOperator op(mesh, grid);
      const StateTrajectory y = op.solve_state(
          [&](int m) -> NodalField {
            return quad_against_basis(cdt, grid, TimeBasis::hat, m, 5) * Mw +
                   quad_against_basis(c, grid, TimeBasis::hat, m, 5) * Kw;
          },
          c(0.0) * w);
      double e = 0.0;
      for (int m = 1; m <= steps; ++m)
        e = std::max(e, (y.value(m) - c(grid.midpoint(m)) * w).lpNorm<Eigen::Infinity>());
      return e;
    };
    const double e1 = err(64), e2 = err(128), e3 = err(256), e4 = err(512);
    const double order = std::min({std::log2(e1 / e2), std::log2(e2 / e3),
                                   std::log2(e3 / e4)});
    failures += check("temporal order >= 1.8", order >= 1.8, order);
  }

  {  // spatial order at fine time resolution
    auto err = [&](int n) {
      const SpaceMesh mesh = build_uniform_mesh(n);
      const TimePartition grid = build_uniform_partition(512, 0.5);
      const ParabolicOperator op(mesh, grid);
      const SparseOperator M = assemble(mesh, OperatorRole::mass);
      const NodalField g = interpolate(mesh, &ManufacturedProblem::g1);
      const Eigen::VectorXd Mg = M.full * g;
      const double lam = 2.0 * std::numbers::pi * std::numbers::pi;
      const StateTrajectory y = op.solve_state(
          [&](int m) -> NodalField {
            return (quad_against_basis(cdt, grid, TimeBasis::hat, m, 5) +
                    lam * quad_against_basis(c, grid, TimeBasis::hat, m, 5)) *
                   Mg;
          },
          g);
      double e = 0.0;
      for (int m = 1; m <= 512; ++m) {
        const NodalField d = y.value(m) - c(grid.midpoint(m)) * g;
        e = std::max(e, std::sqrt(d.dot(M.full * d)));
      }
      return e;
    };
    const double e1 = err(9), e2 = err(17), e3 = err(33);
    const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
    failures += check("spatial order >= 1.8", order >= 1.8, order);
  }

  std::printf("%d check(s) failed\n", failures);
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov regularization-path laboratory"};
  app.set_config("--config", "", "plain key=value config file; flags override");
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--example", cfg.example, "located-heat or poisson")
        ->check(CLI::IsMember({"located-heat", "poisson"}));
    sub->add_option("--kappa", cfg.kappa, "measure-condition exponent")
        ->check(CLI::PositiveNumber);
    sub->add_option("--n-per-side", cfg.n_per_side, "spatial nodes per side");
    sub->add_option("--steps", cfg.n_steps, "time intervals");
    sub->add_option("--tolerance", cfg.tolerance, "fixed-point threshold t0");
    sub->add_option("--max-iterations", cfg.max_iterations, "iteration cap");
    sub->add_option("--output", cfg.output, "output file prefix");
    sub->add_option("--format", cfg.format, "csv or markdown (stdout table)");
    sub->add_option("--seed", cfg.seed, "seed for property suites");
    sub->add_flag("--reduced-scale", cfg.reduced_scale,
                  "coarse grids (n_per_side=17, steps=512)");
    sub->add_flag("--warm-start", cfg.warm_start, "reuse q across path levels");
    sub->add_flag("--verbose", cfg.verbose, "per-iteration progress on stderr");
  };

  CLI::App* path = app.add_subcommand("path", "run the regularization path");
  add_common(path);
  path->add_option("--levels", cfg.levels, "path levels l (alpha = 2^-l)");

  CLI::App* solve = app.add_subcommand("solve", "solve a single alpha");
  add_common(solve);
  solve->add_option("--alpha", cfg.alpha, "regularization parameter")
      ->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "run the property suites");
  add_common(verify);
  verify->add_flag("--inject-adjoint-sign-error", cfg.inject_adjoint_sign_error)
      ->group("");  // hidden mutation hook

  CLI::App* conv = app.add_subcommand("convergence", "PDE solver order studies");
  add_common(conv);

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  if (cfg.reduced_scale) {
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--n-per-side") == 0) cfg.n_per_side = 17;
    if (sub->count("--steps") == 0) cfg.n_steps = 512;
  }

  try {
    if (path->parsed()) return cmd_path(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    return cmd_convergence(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
