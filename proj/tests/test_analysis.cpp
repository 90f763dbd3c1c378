#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "regpath/analysis.hpp"
#include "regpath/manufactured.hpp"

using namespace regpath;

TEST_CASE("experimental orders of convergence") {
  SECTION("paper table rows") {
    const auto v = eoc({0.04006495, 0.02000722});
    REQUIRE(std::isnan(v[0]));
    REQUIRE(v[1] == Catch::Approx(1.00).margin(0.005));
    const auto w = eoc({0.01081546, 0.00279478});
    REQUIRE(w[1] == Catch::Approx(1.95).margin(0.005));
  }
  SECTION("equal errors give zero") {
    REQUIRE(eoc({0.3, 0.3})[1] == 0.0);
  }
  SECTION("rejects nonpositive errors") {
    REQUIRE_THROWS_AS(eoc({0.1, 0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(eoc({-0.1, 0.1}), std::invalid_argument);
  }
}

TEST_CASE("power-law fits") {
  SECTION("exact power law recovered") {
    std::vector<double> alphas, values;
    for (int l = 1; l <= 6; ++l) {
      alphas.push_back(std::pow(2.0, -l));
      values.push_back(3.0 * std::pow(alphas.back(), 1.5));
    }
    const RateFit fit = fit_rate(values, alphas);
    REQUIRE(fit.exponent == Catch::Approx(1.5).margin(1e-12));
    REQUIRE(fit.constant == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(fit.residual <= 1e-12);
    REQUIRE(fit.points == 6);
  }
  SECTION("paper table 4 column fits slope one") {
    const std::vector<double> l1{0.04006495, 0.02000722, 0.00998774,
                                 0.00498724, 0.00249053, 0.00123906};
    std::vector<double> alphas;
    for (int l = 1; l <= 6; ++l) alphas.push_back(std::pow(2.0, -l));
    REQUIRE(fit_rate(l1, alphas).exponent == Catch::Approx(1.00).margin(0.02));
  }
  SECTION("paper table 2 tail fits the kappa = 0.3 slope") {
    const std::vector<double> tail{0.07681662, 0.06212895, 0.05008158, 0.04011694};
    const std::vector<double> alphas{0.125, 0.0625, 0.03125, 0.015625};
    REQUIRE(fit_rate(tail, alphas).exponent == Catch::Approx(0.31).margin(0.05));
  }
  SECTION("rejects degenerate input") {
    REQUIRE_THROWS_AS(fit_rate({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_rate({1.0, 0.0, 1.0}, {1.0, 0.5, 0.25}),
                      std::invalid_argument);
  }
}

TEST_CASE("exact level-set measures of piecewise linear functions") {
  const TimePartition pt = build_uniform_partition(1, 1.0);
  SECTION("linear ramp") {
    // q from 0 to 1 on [0,1]: {|q| <= 0.1} = [0, 0.1]
    REQUIRE(level_set_measure(pt, {0.0, 1.0}, 0.1) == Catch::Approx(0.1));
  }
  SECTION("constant inside and outside") {
    REQUIRE(level_set_measure(pt, {0.05, 0.05}, 0.1) == 1.0);
    REQUIRE(level_set_measure(pt, {0.5, 0.5}, 0.1) == 0.0);
  }
  SECTION("brute-force scan on random piecewise linear q") {
    const TimePartition grid = build_uniform_partition(8, 0.5);
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> qdist(-0.5, 0.5);
    std::uniform_real_distribution<double> edist(0.01, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> q(9);
      for (auto& v : q) v = qdist(rng);
      const double eps = edist(rng);
      const int N = 1000000;
      int hits = 0;
      const PiecewiseLinearScalar f{q};
      for (int i = 0; i < N; ++i) {
        if (std::abs(f.evaluate(grid, 0.5 * (i + 0.5) / N)) <= eps) ++hits;
      }
      REQUIRE(level_set_measure(grid, q, eps) ==
              Catch::Approx(0.5 * hits / N).margin(1e-4));
    }
  }
}

TEST_CASE("measure-condition estimator on the exact adjoint image") {
  // sample 0.25 (Te - t)^{1/kappa} on a fine grid; level-set measures follow
  // (4 eps)^kappa, so the fit recovers kappa and the constant 4^kappa
  for (double kappa : {0.5, 1.0, 2.0}) {
    const ManufacturedProblem prob = make_located_heat_example(kappa);
    const TimePartition grid = build_uniform_partition(32768, prob.end_time);
    std::vector<double> q;
    for (double t : grid.nodes) q.push_back(prob.bstar_pbar(t));
    // keep the window away from saturation at Te and from the grid resolution
    std::vector<double> epsilons;
    for (int j = 12; j >= 1; --j) {
      const double eps = std::pow(2.0, -j) * 0.25;
      const double meas = std::pow(4.0 * eps, kappa);
      if (meas >= 4.0 * grid.length(1) && meas <= 0.8 * prob.end_time)
        epsilons.push_back(eps);
    }
    REQUIRE(epsilons.size() >= 4);
    const auto measures = measure_condition_estimate(grid, q, epsilons);
    const RateFit fit = fit_rate(measures, epsilons);
    REQUIRE(fit.exponent == Catch::Approx(kappa).margin(0.02));
    REQUIRE(fit.constant == Catch::Approx(std::pow(4.0, kappa))
                                .epsilon(0.05));
  }
}

TEST_CASE("path condition report") {
  auto synthetic = [](double kappa, int levels) {
    std::vector<RegPathRecord> records;
    for (int l = 1; l <= levels; ++l) {
      RegPathRecord rec;
      rec.level = l;
      rec.alpha = std::pow(2.0, -l);
      rec.converged = true;
      rec.inactive_measure = 0.7 * std::pow(rec.alpha, kappa);
      rec.deriv_l1 = 0.3 * std::pow(rec.alpha, kappa - 1.0);
      records.push_back(rec);
    }
    return records;
  };
  SECTION("recovers synthetic exponents") {
    const auto rep = path_condition_report(synthetic(0.5, 6), 0.5);
    REQUIRE_FALSE(rep.meas_all_zero);
    REQUIRE(rep.meas_fit.exponent == Catch::Approx(0.5).margin(1e-10));
    REQUIRE(rep.deriv_fit.exponent == Catch::Approx(-0.5).margin(1e-10));
    REQUIRE_FALSE(rep.violation);
  }
  SECTION("flags a violating path") {
    const auto rep = path_condition_report(synthetic(0.5, 6), 1.0);
    REQUIRE(rep.violation);
  }
  SECTION("fully active path uses the infinity convention") {
    auto records = synthetic(1.0, 6);
    for (auto& rec : records) {
      rec.inactive_measure = 0.0;
      rec.deriv_l1 = 0.0;
    }
    const auto rep = path_condition_report(records, 1.0);
    REQUIRE(rep.meas_all_zero);
    REQUIRE(rep.deriv_all_zero);
    REQUIRE_FALSE(rep.violation);
  }
  SECTION("uses only the last four levels by default") {
    auto records = synthetic(1.0, 6);
    records[0].inactive_measure = 17.0;  // pre-asymptotic outlier, excluded
    records[1].inactive_measure = 0.2;
    const auto rep = path_condition_report(records, 1.0);
    REQUIRE(rep.meas_fit.exponent == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(rep.meas_fit.points == 4);
  }
}

TEST_CASE("table emission") {
  std::vector<RegPathRecord> records;
  const std::vector<double> l1{0.04006495, 0.02000722};
  const std::vector<double> l2{0.07304858, 0.05160925};
  for (int l = 1; l <= 2; ++l) {
    RegPathRecord rec;
    rec.level = l;
    rec.alpha = std::pow(2.0, -l);
    rec.err_l1 = l1[l - 1];
    rec.err_l2 = l2[l - 1];
    records.push_back(rec);
  }
  const EOCTable table = make_eoc_table(records, 1.0, 33, 2048, 1e-5);

  SECTION("first EOC rendered as a slash") {
    const std::string csv = emit_table(table, TableFormat::csv);
    REQUIRE(csv.find("level,alpha,err_l1,err_l2,eoc_l1,eoc_l2") == 0);
    REQUIRE(csv.find(",/,/") != std::string::npos);
    REQUIRE(csv.find("0.04006495") != std::string::npos);
    REQUIRE(csv.find("1.00") != std::string::npos);
  }
  SECTION("markdown mirrors the column order") {
    const std::string md = emit_table(table, TableFormat::markdown);
    REQUIRE(md.find("| l |") == 0);
    REQUIRE(md.find("| / | / |") != std::string::npos);
  }
  SECTION("emission is deterministic") {
    REQUIRE(emit_table(table, TableFormat::csv) == emit_table(table, TableFormat::csv));
    REQUIRE(emit_table(make_eoc_table({}, 1.0, 33, 2048, 1e-5), TableFormat::csv) ==
            "level,alpha,err_l1,err_l2,eoc_l1,eoc_l2\n");
  }
}
