#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vclust/coeffs.hpp"

namespace vclust {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class NodeKind : std::uint8_t { Interior = 0, Boundary = 1, Exterior = 2 };

/// Uniform Cartesian lattice over the bounding box of a domain. Interior nodes
/// (strictly inside) carry the unknowns, numbered row-major.
struct Grid2D {
  Domain domain;
  double h = 0.0;
  int nx = 0, ny = 0;
  // node (i, j) sits at base + ((i - i0) h, (j - j0) h)
  Vec2 base = Vec2::Zero();
  int i0 = 0, j0 = 0;
  std::vector<NodeKind> kind;       // per node
  std::vector<int> unknown;         // per node: unknown index or -1
  std::vector<int> node_of;         // per unknown: node index
  std::vector<std::array<double, 4>> arm;  // per unknown: E, W, N, S arm lengths in (0, h]
  int interior_x = 0, interior_y = 0;      // max interior nodes on a lattice row/column

  int size() const { return static_cast<int>(node_of.size()); }
  int node(int i, int j) const { return j * nx + i; }
  double xcoord(double i) const { return base[0] + (i - i0) * h; }
  double ycoord(double j) const { return base[1] + (j - j0) * h; }
  Vec2 point(int i, int j) const { return Vec2(base[0] + (i - i0) * h, base[1] + (j - j0) * h); }
  Vec2 node_point(int n) const { return point(n % nx, n / nx); }
  Vec2 unknown_point(int u) const { return node_point(node_of[u]); }
  /// Coordinates of every unknown.
  std::vector<Vec2> unknown_points() const;
  /// Fractional lattice coordinates of x.
  Vec2 lattice_coords(const Vec2& x) const {
    return Vec2((x[0] - base[0]) / h + i0, (x[1] - base[1]) / h + j0);
  }
};

/// Builds the lattice, masks and cut distances. Requires h > 0, a nondegenerate
/// domain and at least 3 interior nodes per axis.
Grid2D build_grid(const Domain& domain, double h);
/// Throws std::invalid_argument unless the grid has at least min_nodes interior nodes per axis.
void require_resolution(const Grid2D& grid, int min_nodes, const char* who);

/// One stencil coefficient: either an unknown (index >= 0) or a known boundary point.
struct StencilEntry {
  int unknown = -1;
  Vec2 point = Vec2::Zero();
  double weight = 0.0;
};

enum class Parallel { Serial, OpenMP };

/// Stencil of u -> -div(K grad u) at unknown u, appended to out.
void stencil_row(const Grid2D& grid, const CoefficientField& field, int u, std::vector<StencilEntry>& out);

struct SolverOptions {
  enum class Kind { Direct, CG } kind = Kind::Direct;
  double tol = 1e-10;
  int maxit = 0;  // 0: 10 * size
};

class Factorization;

/// Discretization of -div(K grad .) on the interior unknowns; Dirichlet data are
/// kept as (point, weight) pairs per row.
struct DiscreteOperator {
  std::shared_ptr<const Grid2D> grid;
  SparseMatrix A;  // unscaled, symmetric
  double prefactor = 1.0;
  bool symmetric = true;
  // boundary entries in CSR layout
  std::vector<int> bptr;
  std::vector<Vec2> bpoint;
  std::vector<double> bweight;

  int size() const { return static_cast<int>(A.rows()); }
  /// Lazily computed LDL^T factorization, shared by copies of this operator.
  const Factorization& factorization() const;
  /// Right-hand side contribution -sum w g(point) of Dirichlet data g.
  Vector boundary_rhs(const std::function<double(const Vec2&)>& g) const;
  /// Applies the stencil to a function known everywhere: (A f)(x_u) including boundary points.
  Vector apply_function(const std::function<double(const Vec2&)>& f) const;
  /// A x for interior vectors (zero Dirichlet data).
  Vector apply(const Vector& x, Parallel par = Parallel::OpenMP) const;

  struct FactorCache {
    std::mutex mutex;
    std::shared_ptr<Factorization> factor;
  };
  std::shared_ptr<FactorCache> cache = std::make_shared<FactorCache>();
};

struct AssembleOptions {
  Parallel parallel = Parallel::OpenMP;
  bool symmetrize = true;  // replace A by (A + A^T)/2
};

DiscreteOperator assemble(const Grid2D& grid, const CoefficientField& field, double prefactor = 1.0,
                          const AssembleOptions& opts = {});

/// Cached sparse LDL^T factorization of a symmetric matrix.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& A);
  Vector solve(const Vector& b) const;
  double min_pivot() const { return min_pivot_; }
  double max_pivot() const { return max_pivot_; }
  bool positive_definite() const { return min_pivot_ > 0.0; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  double min_pivot_ = 0.0, max_pivot_ = 0.0;
};

struct LinearSolveReport {
  double relative_residual = 0.0;
  int iterations = 0;
  bool direct = true;
};

/// Solves A u = rhs to relative residual 1e-10 (direct LDL^T, or Jacobi-PCG).
Vector solve_linear(const DiscreteOperator& op, const Vector& rhs, const SolverOptions& opts = {},
                    LinearSolveReport* report = nullptr);
/// Jacobi-preconditioned conjugate gradients on a symmetric matrix.
Vector pcg(const SparseMatrix& A, const Vector& rhs, double tol, int maxit, Parallel par, LinearSolveReport* report);

/// Smallest Ritz value of A after `iters` Lanczos steps from a fixed start vector.
double lanczos_min_ritz(const SparseMatrix& A, int iters = 30);

/// Bilinear interpolation of an interior vector (values outside the unknown set taken as `outside`).
double interpolate(const Grid2D& grid, const Vector& u, const Vec2& x, double outside = 0.0);

/// Writes x1,x2,value rows for every interior node in row-major order (17 significant digits).
void write_field_csv(const std::string& path, const Grid2D& grid, const Vector& u);
/// Reads a file produced by write_field_csv.
std::vector<std::array<double, 3>> read_field_csv(const std::string& path);

}  // namespace vclust
