#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "regpath/control.hpp"
#include "regpath/mesh_fem.hpp"

using namespace regpath;

namespace {

const AdmissibleBox kBox{-0.2, 0.2};

ImplicitControl ramp_control(const TimePartition& pt) {
  // q(t) = t - 0.25 on [0, 0.5], alpha = 1: clamp breakpoints at 0.05, 0.45
  ImplicitControl u;
  u.grid = &pt;
  u.alpha = 1.0;
  u.box = kBox;
  u.q.resize(pt.nodes.size());
  for (std::size_t m = 0; m < pt.nodes.size(); ++m) u.q[m] = pt.nodes[m] - 0.25;
  return u;
}

}  // namespace

TEST_CASE("box projection") {
  REQUIRE(project_box(0.5, kBox) == 0.2);
  REQUIRE(project_box(-0.05, kBox) == -0.05);
  REQUIRE(project_box(-0.5, kBox) == -0.2);
  REQUIRE(kBox.sigma().value() == Catch::Approx(0.2));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng), w = dist(rng);
    const double pv = project_box(v, kBox), pw = project_box(w, kBox);
    REQUIRE(project_box(pv, kBox) == pv);                 // idempotent
    REQUIRE(std::abs(pv - pw) <= std::abs(v - w) + 1e-15);  // 1-Lipschitz
  }
}

TEST_CASE("clamp breakpoints of the ramp example") {
  const TimePartition pt = build_uniform_partition(1, 0.5);
  const ImplicitControl u = ramp_control(pt);
  const auto segs = control_segments(u);
  REQUIRE(segs.size() == 3);
  REQUIRE(segs[0].t1 == Catch::Approx(0.05).margin(1e-14));
  REQUIRE(segs[1].t1 == Catch::Approx(0.45).margin(1e-14));
  REQUIRE(segs[0].state == +1);
  REQUIRE(segs[1].state == 0);
  REQUIRE(segs[2].state == -1);

  SECTION("exact error norms against the bang-bang reference") {
    const auto [l1, l2] = control_error_norms(u, -0.2);
    REQUIRE(l1 == Catch::Approx(0.10).margin(1e-14));
    // int_0^0.05 0.4^2 + int_0.05^0.45 (0.45-t)^2 = 0.008 + 0.4^3/3
    REQUIRE(l2 == Catch::Approx(std::sqrt(0.008 + 0.064 / 3.0)).margin(1e-14));
  }
  SECTION("inactive measure and derivative norm") {
    REQUIRE(inactive_measure(u) == Catch::Approx(0.40).margin(1e-14));
    REQUIRE(control_derivative_l1(u) == Catch::Approx(0.40).margin(1e-14));
  }
}

TEST_CASE("fully active and fully inactive limits") {
  const TimePartition pt = build_uniform_partition(4, 0.5);
  ImplicitControl u;
  u.grid = &pt;
  u.box = kBox;
  u.alpha = 1.0;

  SECTION("-q/alpha above the upper bound everywhere") {
    u.q.assign(5, -1.0);
    REQUIRE(inactive_measure(u) == 0.0);
    REQUIRE(control_derivative_l1(u) == 0.0);
    const auto [l1, l2] = control_error_norms(u, 0.2);
    REQUIRE(l1 == 0.0);
    REQUIRE(l2 == 0.0);
  }
  SECTION("q identically zero is fully inactive") {
    u.q.assign(5, 0.0);
    REQUIRE(inactive_measure(u) == Catch::Approx(0.5));
  }
  SECTION("constant interior control has zero variation") {
    u.q.assign(5, 0.1);  // u = -0.1, interior
    REQUIRE(control_derivative_l1(u) == 0.0);
    const auto hats = control_hat_integrals(u);
    // interior hats integrate u * k_m
    REQUIRE(hats[2] == Catch::Approx(-0.1 * 0.125).margin(1e-14));
    REQUIRE(hats[0] == Catch::Approx(-0.1 * 0.0625).margin(1e-14));
  }
  SECTION("huge alpha gives a vanishing control") {
    u.alpha = 1e9;
    u.q = {0.3, -0.2, 0.1, 0.0, 0.25};
    for (double t : {0.0, 0.1, 0.3, 0.49})
      REQUIRE(std::abs(u.value(t)) < 1e-8);
    const auto hats = control_hat_integrals(u);
    for (double h : hats) REQUIRE(std::abs(h) < 1e-8);
  }
}

TEST_CASE("exact integrals agree with an independent sampling oracle") {
  const TimePartition pt = build_uniform_partition(8, 0.5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> qdist(-0.6, 0.6);
  std::uniform_real_distribution<double> adist(0.05, 2.0);

  for (int trial = 0; trial < 100; ++trial) {
    ImplicitControl u;
    u.grid = &pt;
    u.box = kBox;
    u.alpha = adist(rng);
    u.q.resize(pt.nodes.size());
    for (auto& q : u.q) q = qdist(rng);

    // composite Simpson, 1e4 points per interval
    const int per = 10000;
    double l1 = 0.0, l2 = 0.0;
    for (int m = 1; m <= pt.intervals(); ++m) {
      const double a = pt.nodes[m - 1], h = pt.length(m) / per;
      for (int i = 0; i < per; ++i) {
        const double t0 = a + i * h, t1 = t0 + h, tm = t0 + 0.5 * h;
        auto d = [&](double t) { return u.value(t) + 0.2; };
        l1 += h / 6.0 * (std::abs(d(t0)) + 4.0 * std::abs(d(tm)) + std::abs(d(t1)));
        l2 += h / 6.0 * (d(t0) * d(t0) + 4.0 * d(tm) * d(tm) + d(t1) * d(t1));
      }
    }
    const auto [el1, el2] = control_error_norms(u, -0.2);
    REQUIRE(el1 == Catch::Approx(l1).margin(1e-6));
    REQUIRE(el2 * el2 == Catch::Approx(l2).margin(1e-6));

    // inactive measure: scan for state changes, refine by bisection
    auto inside = [&](double t) {
      const double v = u.value(t);
      return v > u.box.lower && v < u.box.upper;
    };
    const int scan = 20000;
    double meas = 0.0;
    double prev_t = 0.0;
    bool prev_in = inside(0.0);
    double open = prev_in ? 0.0 : -1.0;
    for (int i = 1; i <= scan; ++i) {
      const double t = 0.5 * i / scan;
      const bool in = inside(t);
      if (in != prev_in) {
        double lo = prev_t, hi = t;
        for (int b = 0; b < 60; ++b) {
          const double mid = 0.5 * (lo + hi);
          if (inside(mid) == prev_in) lo = mid; else hi = mid;
        }
        if (prev_in) {
          meas += 0.5 * (lo + hi) - open;
          open = -1.0;
        } else {
          open = 0.5 * (lo + hi);
        }
      }
      prev_t = t;
      prev_in = in;
    }
    if (prev_in && open >= 0.0) meas += 0.5 - open;
    REQUIRE(inactive_measure(u) == Catch::Approx(meas).margin(1e-6));

    // sup bound and total variation consistency
    for (int i = 0; i <= 200; ++i)
      REQUIRE(std::abs(u.value(0.5 * i / 200)) <= 0.2 + 1e-15);
    double tv = 0.0;
    for (int i = 1; i <= scan; ++i)
      tv += std::abs(u.value(0.5 * i / scan) - u.value(0.5 * (i - 1) / scan));
    REQUIRE(control_derivative_l1(u) == Catch::Approx(tv).margin(1e-6));
  }
}

TEST_CASE("located control operator pairs against the mass matrix") {
  const SpaceMesh mesh = build_uniform_mesh(17);
  const SparseOperator M = assemble(mesh, OperatorRole::mass);
  const NodalField g1 = interpolate(mesh, [](double x, double y) {
    return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
  });
  const LocatedControlOperator op(mesh, M, g1);

  SECTION("zero adjoint maps to zero") {
    std::vector<NodalField> p(4, NodalField::Zero(mesh.n_nodes()));
    const auto q = apply_B_star(op, p);
    for (double v : q.values) REQUIRE(v == 0.0);
  }
  SECTION("constant-in-time g1 adjoint gives its squared norm") {
    std::vector<NodalField> p(5, g1);
    const auto q = apply_B_star(op, p);
    for (double v : q.values) REQUIRE(v == Catch::Approx(0.25).margin(0.25 * 0.05));
  }
  SECTION("exact adjoint at kappa = 1 evaluated at t = 0") {
    // B* pbar(t) = 0.25 (T_e - t); at t = 0 this is 0.125
    std::vector<NodalField> p = {NodalField(0.5 * g1)};
    const auto q = apply_B_star(op, p);
    REQUIRE(q.values[0] == Catch::Approx(0.125).margin(0.125 * 0.05));
  }
}
