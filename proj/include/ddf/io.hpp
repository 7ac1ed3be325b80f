#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "ddf/hybrid.hpp"

#include <json.hpp>

namespace ddf {

/// Any serializable pdf document ("kind" field selects the alternative).
using PdfValue = std::variant<Gaussian, GaussianMixture, GridPdf, DiscreteDist, HybridBelief>;

nlohmann::json to_json(const Gaussian& g);
nlohmann::json to_json(const GaussianMixture& m);
nlohmann::json to_json(const GridPdf& g);
nlohmann::json to_json(const DiscreteDist& d);
nlohmann::json to_json(const HybridBelief& b);
nlohmann::json to_json(const PdfValue& v);

PdfValue pdf_from_json(const nlohmann::json& j);
Gaussian gaussian_from_json(const nlohmann::json& j);
GaussianMixture mixture_from_json(const nlohmann::json& j);
GridPdf grid_from_json(const nlohmann::json& j);
DiscreteDist discrete_from_json(const nlohmann::json& j);
HybridBelief hybrid_from_json(const nlohmann::json& j);

PdfValue load_pdf(const std::string& path);
void save_pdf(const std::string& path, const PdfValue& v);

/// Grid dump as CSV: one row per cell, "x0[,x1[,x2]],mass".
void write_grid_csv(std::ostream& os, const GridPdf& g);

}  // namespace ddf
