#include "ddf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ddf {

namespace {

void validate_axes(const std::vector<GridAxis>& axes) {
  if (axes.empty() || axes.size() > 3)
    throw DimensionError("GridPdf: supports 1 to 3 dimensions");
  for (const auto& ax : axes) {
    if (!(ax.hi > ax.lo)) throw DimensionError("GridPdf: axis hi must exceed lo");
    if (ax.cells < 1) throw DimensionError("GridPdf: axis needs at least one cell");
  }
}

std::size_t total_cells(const std::vector<GridAxis>& axes) {
  std::size_t n = 1;
  for (const auto& ax : axes) n *= static_cast<std::size_t>(ax.cells);
  return n;
}

}  // namespace

GridPdf::GridPdf(std::vector<GridAxis> axes, std::vector<double> mass)
    : axes_(std::move(axes)), mass_(std::move(mass)) {
  validate_axes(axes_);
  if (mass_.size() != total_cells(axes_))
    throw DimensionError("GridPdf: mass array size does not match shape");
  double sum = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw NumericalError("GridPdf: cell masses must be finite and nonnegative");
    sum += m;
  }
  if (sum <= 0.0) throw NumericalError("GridPdf: degenerate density on domain");
  for (double& m : mass_) m /= sum;
}

GridPdf GridPdf::from_density(const std::function<double(const Eigen::VectorXd&)>& f,
                              const std::vector<GridAxis>& axes) {
  return from_log_density(
      [&f](const Eigen::VectorXd& x) {
        const double v = f(x);
        if (v < 0.0 || !std::isfinite(v))
          throw NumericalError("GridPdf::from_density: density negative or non-finite");
        return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
      },
      axes);
}

GridPdf GridPdf::from_log_density(const std::function<double(const Eigen::VectorXd&)>& log_f,
                                  const std::vector<GridAxis>& axes) {
  validate_axes(axes);
  const std::size_t n = total_cells(axes);
  std::vector<double> logs(n);
  double max_log = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(static_cast<int>(axes.size()));
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat;
    for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
      idx[static_cast<size_t>(d)] = rem % static_cast<std::size_t>(axes[static_cast<size_t>(d)].cells);
      rem /= static_cast<std::size_t>(axes[static_cast<size_t>(d)].cells);
    }
    for (std::size_t d = 0; d < axes.size(); ++d) {
      const double dx = (axes[d].hi - axes[d].lo) / axes[d].cells;
      x[static_cast<int>(d)] = axes[d].lo + (static_cast<double>(idx[d]) + 0.5) * dx;
    }
    logs[flat] = log_f(x);
    max_log = std::max(max_log, logs[flat]);
  }
  if (!std::isfinite(max_log))
    throw NumericalError("GridPdf: degenerate density on domain");
  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i)
    mass[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - max_log) : 0.0;
  return GridPdf(axes, std::move(mass));
}

double GridPdf::cell_volume() const {
  double v = 1.0;
  for (const auto& ax : axes_) v *= (ax.hi - ax.lo) / ax.cells;
  return v;
}

Eigen::VectorXd GridPdf::center(std::size_t flat_index) const {
  Eigen::VectorXd x(dim());
  std::size_t rem = flat_index;
  for (int d = dim() - 1; d >= 0; --d) {
    const auto& ax = axes_[static_cast<size_t>(d)];
    const std::size_t i = rem % static_cast<std::size_t>(ax.cells);
    rem /= static_cast<std::size_t>(ax.cells);
    x[d] = ax.lo + (static_cast<double>(i) + 0.5) * (ax.hi - ax.lo) / ax.cells;
  }
  return x;
}

bool GridPdf::same_grid(const GridPdf& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (axes_[d].lo != other.axes_[d].lo || axes_[d].hi != other.axes_[d].hi ||
        axes_[d].cells != other.axes_[d].cells)
      return false;
  }
  return true;
}

Eigen::VectorXd GridPdf::mean() const {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim());
  for (std::size_t i = 0; i < mass_.size(); ++i)
    if (mass_[i] > 0.0) mu += mass_[i] * center(i);
  return mu;
}

Eigen::MatrixXd GridPdf::covariance() const {
  const Eigen::VectorXd mu = mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim(), dim());
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    if (mass_[i] <= 0.0) continue;
    const Eigen::VectorXd d = center(i) - mu;
    cov += mass_[i] * d * d.transpose();
  }
  return cov;
}

double GridPdf::entropy() const {
  double h = 0.0;
  for (double m : mass_)
    if (m > 0.0) h -= m * std::log(m);
  return h;
}

double kld_masses(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DimensionError("kld_masses: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0)
      throw NumericalError("kld: absolute continuity violated at cell " + std::to_string(i));
    acc += p[i] * std::log(p[i] / q[i]);
  }
  if (acc < 0.0) {
    if (acc < -1e-12) throw NumericalError("kld: negative beyond rounding tolerance");
    acc = 0.0;
  }
  return acc;
}

double grid_kld(const GridPdf& p, const GridPdf& q) {
  if (!p.same_grid(q)) throw DimensionError("grid_kld: grids differ in bounds or shape");
  return kld_masses(p.masses(), q.masses());
}

}  // namespace ddf
