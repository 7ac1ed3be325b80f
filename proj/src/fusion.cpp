#include "ddf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddf {

namespace {

GridPdf power_product(const GridPdf& a, const GridPdf& b, double ea, double eb) {
  if (!a.same_grid(b)) throw DimensionError("wep_fuse: grids differ in bounds or shape");
  const std::size_t n = a.size();
  std::vector<double> mass(n, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double ma = a.mass(i);
    const double mb = b.mass(i);
    if (ma > 0.0 && mb > 0.0) {
      mass[i] = std::exp(ea * std::log(ma) + eb * std::log(mb));
      any = true;
    }
  }
  if (!any) throw NumericalError("wep_fuse: disjoint supports");
  return GridPdf(a.axes(), std::move(mass));
}

// Minimizes a unimodal objective over [0, 1] to the given interval width.
template <class F>
double golden_section(const F& objective, double tolerance) {
  const double gr = 0.61803398874989484820;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = objective(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

GridPdf exact_fuse(const GridPdf& p_i, const GridPdf& p_j, const GridPdf& p_c) {
  if (!p_i.same_grid(p_j) || !p_i.same_grid(p_c))
    throw DimensionError("exact_fuse: grids differ in bounds or shape");
  const std::size_t n = p_i.size();
  std::vector<double> mass(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double num = p_i.mass(i) * p_j.mass(i);
    if (num > 0.0) {
      if (p_c.mass(i) <= 0.0)
        throw NumericalError("exact_fuse: inconsistent common information at cell " +
                             std::to_string(i));
      mass[i] = num / p_c.mass(i);
    }
  }
  return GridPdf(p_i.axes(), std::move(mass));
}

GridPdf wep_fuse(const GridPdf& p_i, const GridPdf& p_j, double omega) {
  if (omega < 0.0 || omega > 1.0) throw ConfigError("wep_fuse: omega outside [0,1]");
  if (!p_i.same_grid(p_j)) throw DimensionError("wep_fuse: grids differ in bounds or shape");
  if (omega == 1.0) return p_i;
  if (omega == 0.0) return p_j;
  return power_product(p_i, p_j, omega, 1.0 - omega);
}

GridPdf estimate_common_info(const GridPdf& p_i, const GridPdf& p_j, double omega) {
  if (omega < 0.0 || omega > 1.0)
    throw ConfigError("estimate_common_info: omega outside [0,1]");
  if (!p_i.same_grid(p_j))
    throw DimensionError("estimate_common_info: grids differ in bounds or shape");
  if (omega == 0.0) return p_i;
  if (omega == 1.0) return p_j;
  return power_product(p_i, p_j, 1.0 - omega, omega);
}

std::vector<double> wep_masses(const std::vector<double>& p_i, const std::vector<double>& p_j,
                               double omega) {
  if (omega < 0.0 || omega > 1.0) throw ConfigError("wep_masses: omega outside [0,1]");
  if (p_i.size() != p_j.size()) throw DimensionError("wep_masses: size mismatch");
  if (omega == 1.0) return p_i;
  if (omega == 0.0) return p_j;
  std::vector<double> out(p_i.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < p_i.size(); ++k) {
    if (p_i[k] > 0.0 && p_j[k] > 0.0) {
      out[k] = std::exp(omega * std::log(p_i[k]) + (1.0 - omega) * std::log(p_j[k]));
      sum += out[k];
    }
  }
  if (sum <= 0.0) throw NumericalError("wep_masses: disjoint supports");
  for (double& m : out) m /= sum;
  return out;
}

double optimize_omega_masses(const std::vector<double>& p_i, const std::vector<double>& p_j,
                             const OmegaCost& cost) {
  if (!(cost.tolerance > 0.0) || cost.tolerance > 0.1)
    throw ConfigError("optimize_omega: tolerance outside (0, 0.1]");
  if (p_i.size() != p_j.size()) throw DimensionError("optimize_omega: size mismatch");

  bool equal = true;
  for (std::size_t i = 0; i < p_i.size() && equal; ++i)
    equal = std::abs(p_i[i] - p_j[i]) <= 1e-15;
  if (equal) return 0.5;

  const auto objective = [&](double w) {
    const std::vector<double> fused = wep_masses(p_i, p_j, w);
    return std::max(kld_masses(fused, p_i), kld_masses(fused, p_j));
  };
  return golden_section(objective, cost.tolerance);
}

double optimize_omega_toward(const std::vector<double>& target, const std::vector<double>& p_i,
                             const std::vector<double>& p_j, const OmegaCost& cost) {
  if (!(cost.tolerance > 0.0) || cost.tolerance > 0.1)
    throw ConfigError("optimize_omega_toward: tolerance outside (0, 0.1]");
  if (p_i.size() != p_j.size() || target.size() != p_i.size())
    throw DimensionError("optimize_omega_toward: size mismatch");
  const auto objective = [&](double w) {
    return kld_masses(target, wep_masses(p_i, p_j, w));
  };
  return golden_section(objective, cost.tolerance);
}

double optimize_omega(const GridPdf& p_i, const GridPdf& p_j, const OmegaCost& cost) {
  if (!p_i.same_grid(p_j))
    throw DimensionError("optimize_omega: grids differ in bounds or shape");
  return optimize_omega_masses(p_i.masses(), p_j.masses(), cost);
}

}  // namespace ddf
