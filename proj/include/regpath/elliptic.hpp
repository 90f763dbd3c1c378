#pragma once

#include <cmath>
#include <vector>

#include "regpath/control.hpp"
#include "regpath/mesh_fem.hpp"
#include "regpath/tikhonov.hpp"

namespace regpath {

/// Poisson control backend: T = S = (-Laplace)^{-1}, B = identity,
/// U = H = L2(Omega). Controls are handled nodally (clamped nodal values of
/// -p/alpha); inner products use the symmetric edge-midpoint triangle rule,
/// exact for products of P1 functions.
class PoissonBackend {
 public:
  PoissonBackend(int n_per_side, NodalField target, AdmissibleBox box)
      : mesh_(build_uniform_mesh(n_per_side)),
        mass_(assemble(mesh_, OperatorRole::mass)),
        stiff_(assemble(mesh_, OperatorRole::stiffness)),
        solver_(mesh_, mass_, stiff_),
        target_(std::move(target)),
        box_(box) {
    if (target_.size() != mesh_.n_nodes())
      throw std::invalid_argument("PoissonBackend: target size mismatch");
  }

  // solver_ references mass_/stiff_ in place
  PoissonBackend(const PoissonBackend&) = delete;
  PoissonBackend& operator=(const PoissonBackend&) = delete;

  const SpaceMesh& mesh() const { return mesh_; }
  const NodalField& target() const { return target_; }

  int q_size() const { return mesh_.n_nodes(); }
  AdmissibleBox box() const { return box_; }
  double domain_measure() const { return 1.0; }

  NodalField apply_T(const NodalField& u) const {
    return solver_.solve(0.0, 1.0, mass_.full * u);
  }

  /// Pointwise values of the adjoint p = T*(T u - z) for nodal control u.
  NodalField adjoint_for(const NodalField& u) const {
    const NodalField y = apply_T(u);
    return solver_.solve(0.0, 1.0, mass_.full * (y - target_));
  }

  std::vector<double> qmap(const std::vector<double>& q, double alpha) const {
    NodalField u(mesh_.n_nodes());
    for (int i = 0; i < u.size(); ++i) u[i] = project_box(-q[i] / alpha, box_);
    const NodalField p = adjoint_for(u);
    return {p.data(), p.data() + p.size()};
  }

  double inner(const CtrlFn& a, const CtrlFn& b) const {
    const std::vector<double> va = nodal_values(a);
    const std::vector<double> vb = nodal_values(b);
    double sum = 0.0;
    for (const auto& tri : mesh_.triangles) {
      const double area = triangle_area(tri);
      for (int e = 0; e < 3; ++e) {
        const int i = tri[e], j = tri[(e + 1) % 3];
        const double fa = 0.5 * (va[i] + va[j]);
        const double fb = 0.5 * (vb[i] + vb[j]);
        sum += area / 3.0 * fa * fb;
      }
    }
    return sum;
  }

  double state_diff_norm2(const std::vector<double>& qa, double alpha_a,
                          const std::vector<double>& qb, double alpha_b) const {
    NodalField du(mesh_.n_nodes());
    for (int i = 0; i < du.size(); ++i)
      du[i] = project_box(-qa[i] / alpha_a, box_) - project_box(-qb[i] / alpha_b, box_);
    const NodalField dy = apply_T(du);
    return dy.dot(mass_.full * dy);
  }

  void fill_record(RegPathRecord& rec) const {
    NodalField u(mesh_.n_nodes());
    for (int i = 0; i < u.size(); ++i) u[i] = project_box(-rec.q[i] / rec.alpha, box_);
    const NodalField y = apply_T(u);
    const NodalField misfit = y - target_;
    const CtrlFn uf = CtrlFn::clamped(rec.q, rec.alpha);
    rec.objective =
        0.5 * misfit.dot(mass_.full * misfit) + 0.5 * rec.alpha * inner(uf, uf);
    rec.state_err = std::sqrt(misfit.dot(mass_.full * misfit));
  }

  /// Objective of the regularized problem for a nodal control.
  double objective(const NodalField& u, double alpha) const {
    const NodalField misfit = apply_T(u) - target_;
    double unorm2 = 0.0;
    std::vector<double> uv(u.data(), u.data() + u.size());
    CtrlFn f;
    f.kind = CtrlFn::Kind::raw;
    f.q = std::move(uv);
    unorm2 = inner(f, f);
    return 0.5 * misfit.dot(mass_.full * misfit) + 0.5 * alpha * unorm2;
  }

 private:
  std::vector<double> nodal_values(const CtrlFn& f) const {
    std::vector<double> v(mesh_.n_nodes());
    switch (f.kind) {
      case CtrlFn::Kind::clamped:
        for (int i = 0; i < mesh_.n_nodes(); ++i)
          v[i] = project_box(-f.q[i] / f.alpha, box_);
        break;
      case CtrlFn::Kind::raw:
        v.assign(f.q.begin(), f.q.end());
        break;
      case CtrlFn::Kind::constant:
        v.assign(mesh_.n_nodes(), f.value);
        break;
    }
    return v;
  }

  double triangle_area(const std::array<int, 3>& tri) const {
    const double x0 = mesh_.nodes(tri[0], 0), y0 = mesh_.nodes(tri[0], 1);
    const double x1 = mesh_.nodes(tri[1], 0), y1 = mesh_.nodes(tri[1], 1);
    const double x2 = mesh_.nodes(tri[2], 0), y2 = mesh_.nodes(tri[2], 1);
    return 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0));
  }

  SpaceMesh mesh_;
  SparseOperator mass_;
  SparseOperator stiff_;
  CachedSpdSolver solver_;
  NodalField target_;
  AdmissibleBox box_;
};

}  // namespace regpath
