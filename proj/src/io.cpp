#include "ddf/io.hpp"

#include <fstream>
#include <ostream>

namespace ddf {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  if (rows == 0) throw DdfError("pdf json: empty covariance");
  const auto cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw DdfError("pdf json: ragged covariance rows");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<int>(i), static_cast<int>(k)) = j[i][k].get<double>();
  }
  return m;
}

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw DdfError(std::string("pdf json: missing field '") + name + "'");
  return *it;
}

}  // namespace

nlohmann::json to_json(const Gaussian& g) {
  return {{"kind", "gaussian"}, {"mean", vec_to_json(g.mean())}, {"cov", mat_to_json(g.cov())}};
}

nlohmann::json to_json(const GaussianMixture& m) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : m.components())
    comps.push_back({{"weight", c.weight},
                     {"mean", vec_to_json(c.gaussian.mean())},
                     {"cov", mat_to_json(c.gaussian.cov())}});
  return {{"kind", "gm"}, {"components", comps}};
}

nlohmann::json to_json(const GridPdf& g) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& ax : g.axes())
    axes.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"cells", ax.cells}});
  return {{"kind", "grid"}, {"axes", axes}, {"mass", g.masses()}};
}

nlohmann::json to_json(const DiscreteDist& d) {
  return {{"kind", "discrete"}, {"probs", d.probs()}};
}

nlohmann::json to_json(const HybridBelief& b) {
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : b.conditionals) {
    if (std::holds_alternative<GridPdf>(c))
      conds.push_back(to_json(std::get<GridPdf>(c)));
    else
      conds.push_back(to_json(std::get<GaussianMixture>(c)));
  }
  return {{"kind", "hybrid"}, {"regions", b.regions.probs()}, {"conditionals", conds}};
}

nlohmann::json to_json(const PdfValue& v) {
  return std::visit([](const auto& x) { return to_json(x); }, v);
}

Gaussian gaussian_from_json(const nlohmann::json& j) {
  return Gaussian(vec_from_json(field(j, "mean")), mat_from_json(field(j, "cov")));
}

GaussianMixture mixture_from_json(const nlohmann::json& j) {
  std::vector<WeightedGaussian> comps;
  for (const auto& c : field(j, "components"))
    comps.push_back(WeightedGaussian{
        field(c, "weight").get<double>(),
        Gaussian(vec_from_json(field(c, "mean")), mat_from_json(field(c, "cov")))});
  return GaussianMixture(std::move(comps));
}

GridPdf grid_from_json(const nlohmann::json& j) {
  std::vector<GridAxis> axes;
  for (const auto& a : field(j, "axes"))
    axes.push_back(GridAxis{field(a, "lo").get<double>(), field(a, "hi").get<double>(),
                            field(a, "cells").get<int>()});
  return GridPdf(std::move(axes), field(j, "mass").get<std::vector<double>>());
}

DiscreteDist discrete_from_json(const nlohmann::json& j) {
  return DiscreteDist(field(j, "probs").get<std::vector<double>>());
}

HybridBelief hybrid_from_json(const nlohmann::json& j) {
  std::vector<ConditionalPdf> conds;
  for (const auto& c : field(j, "conditionals")) {
    const std::string kind = field(c, "kind").get<std::string>();
    if (kind == "grid")
      conds.push_back(grid_from_json(c));
    else if (kind == "gm")
      conds.push_back(mixture_from_json(c));
    else
      throw DdfError("pdf json: hybrid conditional must be 'grid' or 'gm', got '" + kind + "'");
  }
  HybridBelief b{DiscreteDist(field(j, "regions").get<std::vector<double>>()),
                 std::move(conds)};
  b.validate();
  return b;
}

PdfValue pdf_from_json(const nlohmann::json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "gaussian") return gaussian_from_json(j);
  if (kind == "gm") return mixture_from_json(j);
  if (kind == "grid") return grid_from_json(j);
  if (kind == "discrete") return discrete_from_json(j);
  if (kind == "hybrid") return hybrid_from_json(j);
  throw DdfError("pdf json: unknown kind '" + kind + "'");
}

PdfValue load_pdf(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DdfError("cannot open pdf file: " + path);
  nlohmann::json j;
  f >> j;
  return pdf_from_json(j);
}

void save_pdf(const std::string& path, const PdfValue& v) {
  std::ofstream f(path);
  if (!f) throw DdfError("cannot write pdf file: " + path);
  f << to_json(v).dump(2) << "\n";
}

void write_grid_csv(std::ostream& os, const GridPdf& g) {
  for (int d = 0; d < g.dim(); ++d) os << "x" << d << ",";
  os << "mass\n";
  char buf[64];
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Eigen::VectorXd c = g.center(i);
    for (int d = 0; d < g.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", c[d]);
      os << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", g.mass(i));
    os << buf << "\n";
  }
}

}  // namespace ddf
