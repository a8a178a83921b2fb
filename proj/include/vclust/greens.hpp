#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "vclust/coeffs.hpp"
#include "vclust/grid.hpp"

namespace vclust {

/// Gamma(x) = -(1/2pi) ln|x|.
inline double fundamental(double r) { return -std::log(r) / (2.0 * kPi); }

/// sqrt(det K(y))^{-1} Gamma(T_y (x - y)).
double singular_part(const CoefficientField& field, const Vec2& y, const Vec2& x);
/// First-order correction F1_y(x); 0 at x = y.
double f1_correction(const CoefficientField& field, const Vec2& y, const Vec2& x);

enum class F2Form { Statement, Proof };
/// Second-order correction F2_y(x); both printed forms are available.
double f2_correction(const CoefficientField& field, const Vec2& y, const Vec2& x, F2Form form = F2Form::Statement);

/// Green's function of -lap on the disk of radius R centered at the origin (method of images).
double oracle_disk_green(const Vec2& x, const Vec2& y, double radius = 1.0);
/// Regular part S(x, y) = G - Gamma(x - y) for the same disk.
double oracle_disk_regular(const Vec2& x, const Vec2& y, double radius = 1.0);

/// One numerically computed column G(., y).
struct GreenTable {
  std::shared_ptr<const Grid2D> grid;
  Vec2 y = Vec2::Zero();
  Vector G;     // per unknown
  Vector Sbar;  // G - singular part; NaN at a node coinciding with y
  double r_excl = 0.0;
  double robin = 0.0;
  double spread = 0.0;
  bool has_robin = false;

  bool reliable(int u) const { return (grid->unknown_point(u) - y).norm() > r_excl; }
  /// Bilinear interpolation of the regular part.
  double regular_at(const Vec2& x) const;
  /// Singular part plus interpolated regular part.
  double green_at(const CoefficientField& field, const Vec2& x) const;
};

/// Solves A G = delta_y with the unscaled operator. The source is a grid-scaled
/// spike h^-2 distributed bilinearly over the cell containing y (a single node when y is a node).
GreenTable green_column(const DiscreteOperator& op, const CoefficientField& field, const Vec2& y,
                        const SolverOptions& solver = {});
/// Several columns against one factorization, in parallel.
std::vector<GreenTable> green_columns(const DiscreteOperator& op, const CoefficientField& field,
                                      const std::vector<Vec2>& ys);

struct RobinEstimate {
  double value = 0.0;
  double spread = 0.0;
  double ring[3] = {0, 0, 0};  // ring averages at 4h, 6h, 8h
};

/// Ring averages of the regular part at 4h, 6h, 8h, extrapolated to r = 0 in r^2.
RobinEstimate robin_from_column(const GreenTable& column, int ring_points = 64);
/// Convenience: assembles, solves and extrapolates.
RobinEstimate robin_value(const CoefficientField& field, const Grid2D& grid, const Vec2& y);
/// Interpolated G(x, y) from a freshly computed column.
double green_at(const CoefficientField& field, const Grid2D& grid, const Vec2& x, const Vec2& y);

/// Source of Robin values S(y, y) and Green values G(x, y) for the ansatz and the reduced energy.
class GreenProvider {
 public:
  virtual ~GreenProvider() = default;
  virtual double robin(const Vec2& y) const = 0;
  virtual double green(const Vec2& x, const Vec2& y) const = 0;
};

/// Exact images formula (K = Id on a disk centered at the origin).
class DiskImageGreen : public GreenProvider {
 public:
  explicit DiskImageGreen(double radius = 1.0) : radius_(radius) {}
  double robin(const Vec2& y) const override;
  double green(const Vec2& x, const Vec2& y) const override;

 private:
  double radius_;
};

/// Numeric columns computed on demand and memoized by source position.
class DirectGreen : public GreenProvider {
 public:
  DirectGreen(CoefficientField field, const Grid2D& grid);
  double robin(const Vec2& y) const override;
  double green(const Vec2& x, const Vec2& y) const override;
  const GreenTable& column(const Vec2& y) const;
  const DiscreteOperator& op() const { return op_; }

 private:
  CoefficientField field_;
  DiscreteOperator op_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<GreenTable>> cache_;
};

/// For rotation-invariant fields: queries are rotated so that the source lies on the
/// positive x1-axis before reaching the wrapped provider, making G(Rx, Ry) = G(x, y) exact.
class RotationReducedGreen : public GreenProvider {
 public:
  explicit RotationReducedGreen(const GreenProvider& base) : base_(base) {}
  double robin(const Vec2& y) const override;
  double green(const Vec2& x, const Vec2& y) const override;

 private:
  const GreenProvider& base_;
};

/// Columns on a lattice of sources covering a disk; values at moving points come from
/// interpolating the C^1 part S + F1 + F2 in the source variable.
class GreenCache : public GreenProvider {
 public:
  GreenCache(CoefficientField field, const Grid2D& grid, const Vec2& center, double radius, int lattice = 9);
  double robin(const Vec2& y) const override;
  double green(const Vec2& x, const Vec2& y) const override;
  /// S(x, y) + F1_y(x) + F2_y(x) interpolated in y.
  double smooth_part(const Vec2& x, const Vec2& y) const;
  int columns() const { return static_cast<int>(tables_.size()); }

 private:
  double smooth_at_source(int k, const Vec2& x) const;
  CoefficientField field_;
  Vec2 lo_ = Vec2::Zero();
  double step_ = 0.0;
  int n_ = 0;
  std::vector<GreenTable> tables_;
  std::vector<double> robin_;
};

}  // namespace vclust
