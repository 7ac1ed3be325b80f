#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ddf/error.hpp"

namespace ddf {

/// One axis of a rectangular grid: interval [lo, hi] split into `cells`
/// equal cells, densities evaluated at cell centers (midpoint rule).
struct GridAxis {
  double lo;
  double hi;
  int cells;
};

/// Dense discretized pdf over a rectangular domain (1 to 3 dimensions).
/// Stores normalized cell masses; the oracle representation against which
/// parametric fusion approximations are judged.
class GridPdf {
 public:
  GridPdf(std::vector<GridAxis> axes, std::vector<double> mass);

  static GridPdf from_density(const std::function<double(const Eigen::VectorXd&)>& f,
                              const std::vector<GridAxis>& axes);
  static GridPdf from_log_density(const std::function<double(const Eigen::VectorXd&)>& log_f,
                                  const std::vector<GridAxis>& axes);

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t size() const { return mass_.size(); }
  double mass(std::size_t i) const { return mass_[i]; }
  const std::vector<double>& masses() const { return mass_; }

  double cell_volume() const;
  Eigen::VectorXd center(std::size_t flat_index) const;
  bool same_grid(const GridPdf& other) const;

  /// Density value at the cell center (mass / cell volume).
  double density(std::size_t i) const { return mass_[i] / cell_volume(); }

  /// Grid-quadrature mean and covariance, used by oracle tests.
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

  double entropy() const;  // nats, of the cell-mass distribution

 private:
  std::vector<GridAxis> axes_;
  std::vector<double> mass_;
};

/// KLD between two nonnegative mass vectors on the same cell partition
/// (sum p log p/q over cells with p > 0). Shared by grid, discrete, and
/// hybrid-joint divergences.
double kld_masses(const std::vector<double>& p, const std::vector<double>& q);

/// Kullback-Leibler divergence in nats between grids on identical axes.
double grid_kld(const GridPdf& p, const GridPdf& q);

}  // namespace ddf
