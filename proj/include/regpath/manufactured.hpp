#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "regpath/control.hpp"

namespace regpath {

/// Heat-equation example with located controls and a known bang-bang limit
/// solution, parameterized by the measure-condition exponent kappa.
///
/// All space-time data factorizes over the spatial profile
/// g1(x) = sin(pi x1) sin(pi x2); the time factors below are exact.
/// The exact limit control is the constant lower bound, the exact adjoint is
/// pbar(t,x) = (T_e - t)^{1/kappa} g1(x) and the exact state is
/// ybar(t,x) = cos(2 pi a t / T_e) g1(x) with frequency factor a = 2.
struct ManufacturedProblem {
  double kappa = 1.0;
  double end_time = 0.5;
  double frequency_factor = 2.0;
  AdmissibleBox box{-0.2, 0.2};

  static double g1(double x1, double x2) {
    return std::sin(std::numbers::pi * x1) * std::sin(std::numbers::pi * x2);
  }

  double exact_control() const { return box.lower; }

  // time factor of the exact state and its initial value ybar(0,.) = g1
  double ybar_time(double t) const {
    return std::cos(2.0 * std::numbers::pi * frequency_factor * t / end_time);
  }
  double ybar_time_dt(double t) const {
    const double om = 2.0 * std::numbers::pi * frequency_factor / end_time;
    return -om * std::sin(om * t);
  }

  // time factor of the exact adjoint pbar
  double pbar_time(double t) const {
    return std::pow(end_time - t, 1.0 / kappa);
  }

  /// Exact B* pbar(t) = ||g1||^2 (T_e - t)^{1/kappa} with ||g1||^2 = 1/4.
  double bstar_pbar(double t) const { return 0.25 * pbar_time(t); }

  /// Time factor of the tracking target y_d, derived from the backward heat
  /// equation for pbar. Singular at t = T_e when kappa > 1 (integrable).
  double yd_time(double t) const {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return ybar_time(t) - (1.0 / kappa) * std::pow(end_time - t, 1.0 / kappa - 1.0) -
           2.0 * pi2 * std::pow(end_time - t, 1.0 / kappa);
  }

  /// Antiderivative of yd_time, used to integrate the adjoint load exactly
  /// through the end-time singularity.
  double yd_time_antiderivative(double t) const {
    const double om = 2.0 * std::numbers::pi * frequency_factor / end_time;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double e = 1.0 / kappa;
    return std::sin(om * t) / om + std::pow(end_time - t, e) +
           2.0 * pi2 * std::pow(end_time - t, e + 1.0) / (e + 1.0);
  }

  /// Time factor of the drift g0 = d_t ybar - Lap ybar - B ubar.
  double g0_time(double t) const {
    const double pi = std::numbers::pi;
    const double arg = 2.0 * pi * frequency_factor * t / end_time;
    return 2.0 * pi *
               (-(frequency_factor / end_time) * std::sin(arg) + pi * std::cos(arg)) -
           exact_control();
  }

  /// meas{t : |B* pbar_0(t)| <= eps} in closed form: min(T_e, (4 eps)^kappa).
  double exact_zero_measure(double eps) const {
    if (eps <= 0.0) throw std::invalid_argument("exact_zero_measure: eps must be positive");
    return std::min(end_time, std::pow(4.0 * eps, kappa));
  }
};

inline ManufacturedProblem make_located_heat_example(double kappa) {
  if (kappa <= 0.0)
    throw std::invalid_argument("make_located_heat_example: kappa must be positive");
  ManufacturedProblem prob;
  prob.kappa = kappa;
  return prob;
}

}  // namespace regpath
