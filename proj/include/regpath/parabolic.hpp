#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "regpath/mesh_fem.hpp"
#include "regpath/time_grid.hpp"

namespace regpath {

/// Discrete state y_kh: one spatial coefficient vector per time interval,
/// piecewise constant in time. value(m) is y_m on I_m, m = 1..M.
struct StateTrajectory {
  std::vector<NodalField> coeffs;  // y_1 .. y_M
  const TimePartition* grid = nullptr;

  const NodalField& value(int m) const { return coeffs[m - 1]; }
  int intervals() const { return static_cast<int>(coeffs.size()); }
};

/// Discrete adjoint p_kh: one spatial coefficient vector per time node,
/// continuous piecewise linear in time. node(m) is p_m at t_m, m = 0..M.
struct AdjointTrajectory {
  std::vector<NodalField> coeffs;  // p_0 .. p_M
  const TimePartition* grid = nullptr;

  const NodalField& node(int m) const { return coeffs[m]; }
};

/// Spatial load against the mass pairing for one temporal basis function:
/// the sampler returns F_m = int <f, phi_m> dt for the state (hat indices
/// m = 0..M-1) or H_m = int_{I_m} <h> dt for the adjoint (m = 1..M), as a
/// full-length nodal vector.
using LoadSampler = std::function<NodalField(int m)>;

/// Petrov-Galerkin Crank-Nicolson solver pair for the heat equation.
///
/// State scheme (ansatz piecewise constant, test piecewise linear in time),
/// realized as the square forward recurrence
///   (M + (k_1/2)K) y_1     = M y_0 + F_0,
///   (M + (k_{m+1}/2)K) y_{m+1} = (M - (k_m/2)K) y_m + F_m,  m = 1..M-1.
/// The adjoint scheme is the exact transpose of this system closed with
/// p_M = 0, i.e. the backward recurrence
///   (M + (k_m/2)K) p_{m-1} = (M - (k_m/2)K) p_m + H_m,      m = M..1,
/// which makes the discrete adjointness identity hold to solver precision.
class ParabolicOperator {
 public:
  ParabolicOperator(const SpaceMesh& mesh, const TimePartition& grid)
      : mesh_(&mesh),
        grid_(&grid),
        mass_(assemble(mesh, OperatorRole::mass)),
        stiff_(assemble(mesh, OperatorRole::stiffness)),
        solver_(mesh, mass_, stiff_) {}

  // solver_ references mass_/stiff_ in place
  ParabolicOperator(const ParabolicOperator&) = delete;
  ParabolicOperator& operator=(const ParabolicOperator&) = delete;

  const SpaceMesh& mesh() const { return *mesh_; }
  const TimePartition& grid() const { return *grid_; }
  const SparseOperator& mass() const { return mass_; }
  const SparseOperator& stiffness() const { return stiff_; }
  const CachedSpdSolver& solver() const { return solver_; }

  StateTrajectory solve_state(const LoadSampler& load, const NodalField& y0) const {
    const int M = grid_->intervals();
    if (y0.size() != mesh_->n_nodes())
      throw std::invalid_argument("solve_state: initial value dimension mismatch");
    StateTrajectory y;
    y.grid = grid_;
    y.coeffs.reserve(M);
    Eigen::VectorXd cur = restrict_interior(*mesh_, y0);
    // first step: hat phi_0 including the initial-datum term
    Eigen::VectorXd rhs = mass_.reduced * cur + restrict_interior(*mesh_, load(0));
    cur = solver_.solve_reduced(1.0, 0.5 * grid_->length(1), rhs);
    y.coeffs.push_back(prolong_interior(*mesh_, cur));
    for (int m = 1; m <= M - 1; ++m) {
      rhs = mass_.reduced * cur - 0.5 * grid_->length(m) * (stiff_.reduced * cur) +
            restrict_interior(*mesh_, load(m));
      cur = solver_.solve_reduced(1.0, 0.5 * grid_->length(m + 1), rhs);
      y.coeffs.push_back(prolong_interior(*mesh_, cur));
    }
    return y;
  }

  AdjointTrajectory solve_adjoint(const LoadSampler& load) const {
    const int M = grid_->intervals();
    AdjointTrajectory p;
    p.grid = grid_;
    p.coeffs.assign(M + 1, NodalField::Zero(mesh_->n_nodes()));
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(mesh_->n_interior());  // p_M = 0
    for (int m = M; m >= 1; --m) {
      const double km = grid_->length(m);
      Eigen::VectorXd rhs = mass_.reduced * cur - 0.5 * km * (stiff_.reduced * cur) +
                            restrict_interior(*mesh_, load(m));
      cur = solver_.solve_reduced(1.0, 0.5 * km, rhs);
      p.coeffs[m - 1] = prolong_interior(*mesh_, cur);
    }
    return p;
  }

  /// Relative defect of the discrete adjointness identity
  ///   sum_m H_m' y_m = (M y0 + F_0)' p_0 + sum_{m=1}^{M-1} F_m' p_m
  /// for given load pairs; zero up to solver tolerance by construction.
  double check_adjointness(const LoadSampler& state_load,
                           const LoadSampler& adjoint_load,
                           const NodalField& y0) const {
    const int M = grid_->intervals();
    const StateTrajectory y = solve_state(state_load, y0);
    const AdjointTrajectory p = solve_adjoint(adjoint_load);
    double lhs = 0.0;
    for (int m = 1; m <= M; ++m) lhs += adjoint_load(m).dot(y.value(m));
    const NodalField b0 =
        prolong_interior(*mesh_, mass_.reduced * restrict_interior(*mesh_, y0)) +
        state_load(0);
    double rhs = b0.dot(p.node(0));
    for (int m = 1; m <= M - 1; ++m) rhs += state_load(m).dot(p.node(m));
    return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
  }

  /// Squared L2(I, L2(Omega)) norm of a piecewise-constant-in-time state.
  double state_norm2(const StateTrajectory& y) const {
    double sum = 0.0;
    for (int m = 1; m <= y.intervals(); ++m) {
      const Eigen::VectorXd yi = restrict_interior(*mesh_, y.value(m));
      sum += grid_->length(m) * yi.dot(mass_.reduced * yi);
    }
    return sum;
  }

 private:
  const SpaceMesh* mesh_;
  const TimePartition* grid_;
  SparseOperator mass_;
  SparseOperator stiff_;
  CachedSpdSolver solver_;
};

/// CSV rows (m, t, nodal values...) for debugging and plotting.
inline void dump_state(const StateTrajectory& y, std::ostream& os) {
  for (int m = 1; m <= y.intervals(); ++m) {
    os << m << ',' << y.grid->nodes[m];
    for (int i = 0; i < y.value(m).size(); ++i) os << ',' << y.value(m)[i];
    os << '\n';
  }
}

}  // namespace regpath
