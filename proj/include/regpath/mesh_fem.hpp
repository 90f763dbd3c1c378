#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace regpath {

/// Coefficient vector of a continuous piecewise linear function, one value
/// per mesh node. Fields living in the zero-trace subspace carry zeros on
/// boundary nodes.
using NodalField = Eigen::VectorXd;

using SpMat = Eigen::SparseMatrix<double>;

/// Uniform right-diagonal triangulation of the unit square.
struct SpaceMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;    // per node
  std::vector<int> interior;     // indices of non-boundary nodes
  std::vector<int> full_to_int;  // -1 on boundary nodes
  int n_per_side = 0;

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_interior() const { return static_cast<int>(interior.size()); }
  double mesh_width() const { return 1.0 / (n_per_side - 1); }
};

inline SpaceMesh build_uniform_mesh(int n_per_side) {
  if (n_per_side < 2)
    throw std::invalid_argument("build_uniform_mesh: n_per_side must be >= 2");
  SpaceMesh mesh;
  mesh.n_per_side = n_per_side;
  const int n = n_per_side;
  const double h = 1.0 / (n - 1);
  mesh.nodes.resize(n * n, 2);
  mesh.boundary.resize(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int idx = j * n + i;
      mesh.nodes(idx, 0) = i * h;
      mesh.nodes(idx, 1) = j * h;
      mesh.boundary[idx] = (i == 0 || i == n - 1 || j == 0 || j == n - 1);
    }
  }
  mesh.full_to_int.assign(n * n, -1);
  for (int idx = 0; idx < n * n; ++idx) {
    if (!mesh.boundary[idx]) {
      mesh.full_to_int[idx] = static_cast<int>(mesh.interior.size());
      mesh.interior.push_back(idx);
    }
  }
  // Each grid square splits along the lower-left to upper-right diagonal.
  mesh.triangles.reserve(2 * (n - 1) * (n - 1));
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const int ll = j * n + i;
      const int lr = j * n + i + 1;
      const int ul = (j + 1) * n + i;
      const int ur = (j + 1) * n + i + 1;
      mesh.triangles.push_back({ll, lr, ur});
      mesh.triangles.push_back({ll, ur, ul});
    }
  }
  return mesh;
}

enum class OperatorRole { mass, stiffness };

/// Assembled P1 operator, kept both on all nodes and restricted to the
/// interior (the reduced system used for Dirichlet solves).
struct SparseOperator {
  SpMat full;
  SpMat reduced;
  OperatorRole role = OperatorRole::mass;

  int dimension() const { return static_cast<int>(full.rows()); }
};

inline SparseOperator assemble(const SpaceMesh& mesh, OperatorRole role) {
  const int n = mesh.n_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<Eigen::Triplet<double>> trip_red;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    const double x0 = mesh.nodes(tri[0], 0), y0 = mesh.nodes(tri[0], 1);
    const double x1 = mesh.nodes(tri[1], 0), y1 = mesh.nodes(tri[1], 1);
    const double x2 = mesh.nodes(tri[2], 0), y2 = mesh.nodes(tri[2], 1);
    const double area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0));
    if (area <= 0.0) throw std::runtime_error("assemble: degenerate triangle");
    double elem[3][3];
    if (role == OperatorRole::mass) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) elem[i][j] = (i == j ? 2.0 : 1.0) * area / 12.0;
    } else {
      // gradient of barycentric i: (b_i, c_i) / (2 area), cyclic differences
      const double b[3] = {y1 - y2, y2 - y0, y0 - y1};
      const double c[3] = {x2 - x1, x0 - x2, x1 - x0};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          elem[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(tri[i], tri[j], elem[i][j]);
        const int ri = mesh.full_to_int[tri[i]];
        const int rj = mesh.full_to_int[tri[j]];
        if (ri >= 0 && rj >= 0) trip_red.emplace_back(ri, rj, elem[i][j]);
      }
    }
  }
  SparseOperator op;
  op.role = role;
  op.full.resize(n, n);
  op.full.setFromTriplets(trip.begin(), trip.end());
  op.reduced.resize(mesh.n_interior(), mesh.n_interior());
  op.reduced.setFromTriplets(trip_red.begin(), trip_red.end());
  return op;
}

inline NodalField interpolate(const SpaceMesh& mesh,
                              const std::function<double(double, double)>& f) {
  NodalField v(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i)
    v[i] = f(mesh.nodes(i, 0), mesh.nodes(i, 1));
  return v;
}

inline Eigen::VectorXd restrict_interior(const SpaceMesh& mesh, const NodalField& v) {
  Eigen::VectorXd r(mesh.n_interior());
  for (int i = 0; i < mesh.n_interior(); ++i) r[i] = v[mesh.interior[i]];
  return r;
}

inline NodalField prolong_interior(const SpaceMesh& mesh, const Eigen::VectorXd& r) {
  NodalField v = NodalField::Zero(mesh.n_nodes());
  for (int i = 0; i < mesh.n_interior(); ++i) v[mesh.interior[i]] = r[i];
  return v;
}

/// Direct sparse SPD solver for systems (mu*M + c*K) restricted to interior
/// nodes. Factorizations are cached per coefficient pair; the same operator
/// is solved thousands of times along a regularization path.
class CachedSpdSolver {
 public:
  CachedSpdSolver(const SpaceMesh& mesh, const SparseOperator& mass,
                  const SparseOperator& stiffness)
      : mesh_(&mesh), mass_(&mass), stiff_(&stiffness) {}

  /// Solve (mu*M + c*K) x = rhs on interior nodes; rhs and result are
  /// full-length nodal fields, the result has zero boundary values.
  NodalField solve(double mu, double c, const NodalField& rhs) const {
    if (rhs.size() != mesh_->n_nodes())
      throw std::invalid_argument("CachedSpdSolver::solve: dimension mismatch");
    return prolong_interior(*mesh_, solve_reduced(mu, c, restrict_interior(*mesh_, rhs)));
  }

  Eigen::VectorXd solve_reduced(double mu, double c, const Eigen::VectorXd& rhs) const {
    if (rhs.size() != mesh_->n_interior())
      throw std::invalid_argument("CachedSpdSolver::solve_reduced: dimension mismatch");
    const auto& fac = factorization(mu, c);
    Eigen::VectorXd x = fac.solve(rhs);
    if (fac.info() != Eigen::Success)
      throw std::runtime_error("CachedSpdSolver: solve failed");
    return x;
  }

 private:
  using Factorization = Eigen::SimplicialLDLT<SpMat>;

  const Factorization& factorization(double mu, double c) const {
    const auto key = std::make_pair(mu, c);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      SpMat A = mu * mass_->reduced + c * stiff_->reduced;
      auto [pos, inserted] = cache_.try_emplace(key);
      pos->second.compute(A);
      if (pos->second.info() != Eigen::Success)
        throw std::runtime_error("CachedSpdSolver: factorization failed (singular?)");
      it = pos;
    }
    return it->second;
  }

  const SpaceMesh* mesh_;
  const SparseOperator* mass_;
  const SparseOperator* stiff_;
  mutable std::map<std::pair<double, double>, Factorization> cache_;
};

/// Plain-text node/triangle listing for debugging.
inline void dump_mesh(const SpaceMesh& mesh, std::ostream& os) {
  for (int i = 0; i < mesh.n_nodes(); ++i)
    os << "node " << i << ' ' << mesh.nodes(i, 0) << ' ' << mesh.nodes(i, 1)
       << (mesh.boundary[i] ? " boundary\n" : "\n");
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    os << "tri " << t << ' ' << mesh.triangles[t][0] << ' '
       << mesh.triangles[t][1] << ' ' << mesh.triangles[t][2] << '\n';
}

}  // namespace regpath
