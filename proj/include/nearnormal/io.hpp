#pragma once

// Matrix documents ({"n", "re", "im", "label"}) and run records.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nearnormal/errors.hpp"
#include "nearnormal/linalg.hpp"
#include "nearnormal/pipeline.hpp"

namespace nearnormal {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

struct MatrixFile {
  Matrix a;
  std::string label;
};

namespace detail {

inline double finite_entry(const nlohmann::json& v, const char* field) {
  if (!v.is_number()) throw IoError("matrix file", std::string("non-numeric entry in ") + field);
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw IoError("matrix file", std::string("non-finite entry in ") + field);
  return x;
}

inline void check_rows(const nlohmann::json& rows, std::int64_t n, const char* field) {
  if (!rows.is_array() || static_cast<std::int64_t>(rows.size()) != n)
    throw IoError("matrix file", std::string(field) + " must have n rows");
  for (const auto& r : rows)
    if (!r.is_array() || static_cast<std::int64_t>(r.size()) != n)
      throw IoError("matrix file", std::string(field) + " is ragged or has the wrong width");
}

}  // namespace detail

inline MatrixFile parse_matrix_file(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("matrix file", std::string("not a JSON document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("re") || !doc.contains("im"))
    throw IoError("matrix file", "fields n, re, im are required");
  if (!doc["n"].is_number_integer() || doc["n"].get<std::int64_t>() < 0)
    throw IoError("matrix file", "n must be a nonnegative integer");
  const std::int64_t n = doc["n"].get<std::int64_t>();
  detail::check_rows(doc["re"], n, "re");
  detail::check_rows(doc["im"], n, "im");
  MatrixFile out;
  out.a.resize(n, n);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      out.a(i, j) = Complex(detail::finite_entry(doc["re"][i][j], "re"), detail::finite_entry(doc["im"][i][j], "im"));
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) throw IoError("matrix file", "label must be a string");
    out.label = doc["label"].get<std::string>();
  }
  return out;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("io", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("io", "cannot write " + path);
  out << text;
  if (!out) throw IoError("io", "write failed for " + path);
}

inline MatrixFile read_matrix_file(const std::string& path) { return parse_matrix_file(read_text(path)); }

inline nlohmann::json matrix_json(const Matrix& a, const std::string& label = {}) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
    for (Index j = 0; j < a.cols(); ++j) {
      rr.push_back(a(i, j).real());
      ri.push_back(a(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  nlohmann::json doc = {{"n", a.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
  if (!label.empty()) doc["label"] = label;
  return doc;
}

inline void write_matrix_file(const std::string& path, const Matrix& a, const std::string& label = {}) {
  require_square(a, "write_matrix_file");
  write_text(path, matrix_json(a, label).dump(1) + "\n");
}

inline nlohmann::json config_json(const PipelineConfig& cfg) {
  return {{"epsilon_target", cfg.epsilon_target}, {"gate", cfg.gate},           {"force", cfg.force},
          {"bypass_tol", cfg.bypass_tol},         {"dispersion_tol", cfg.dispersion_tol}};
}

inline nlohmann::json surgery_json(const SurgeryReport& r) {
  return {{"input_commutator", r.input_commutator},
          {"output_commutator", r.output_commutator},
          {"amplification", r.amplification},
          {"distance", r.distance},
          {"normality", r.normality},
          {"outside_residual", r.outside_residual},
          {"min_avoidance", r.min_avoidance},
          {"max_block_residual", r.max_block_residual},
          {"max_line_residual", r.max_line_residual},
          {"active_holes", r.active_holes},
          {"holes", r.holes.size()}};
}

inline nlohmann::json report_json(const Report& r) {
  const ExtensionDiagnostics& e = r.extension;
  const LatticeRunTrace& l = r.lattice;
  return {
      {"n", r.n},
      {"norm_A", r.norm_A},
      {"comm_norm", r.comm_norm},
      {"d1", r.d1},
      {"lower_bound", r.lower_bound},
      {"distance", r.distance},
      {"complex_distance", r.complex_distance},
      {"frobenius_distance", r.frobenius_distance},
      {"ratio", r.ratio},
      {"input_pair_commutator", r.input_pair_commutator},
      {"normality_residual", r.normality_residual},
      {"pair_commutator", r.pair_commutator},
      {"lattice_spacing", r.lattice_spacing},
      {"lattice_residual", r.lattice_residual},
      {"dispersion", r.dispersion},
      {"epsilon", r.epsilon},
      {"bypassed", r.bypassed},
      {"fallback", r.fallback},
      {"wall_ms", r.wall_ms},
      {"extension",
       {{"scale", e.scale},
        {"norm_A", e.norm_A},
        {"norm_N", e.norm_N},
        {"distance", e.distance},
        {"constant_K", e.constant_K},
        {"commutator_P", e.commutator_P},
        {"normality_T", e.normality_T},
        {"normality_N", e.normality_N},
        {"pinch_shift", e.pinch_shift},
        {"pinch_constant", e.pinch_constant},
        {"band_residual", e.band_residual},
        {"projection_orthogonality", e.projection_orthogonality},
        {"projection_sum", e.projection_sum},
        {"band_min", e.band_min},
        {"band_max", e.band_max}}},
      {"lattice",
       {{"omega_corner", {l.omega_corner.real(), l.omega_corner.imag()}},
        {"omega_side", l.omega_side},
        {"round1_holes", l.round1_centers.size()},
        {"round2_holes", l.round2_holes.size()},
        {"comm_T", l.comm_T},
        {"comm_T1", l.comm_T1},
        {"comm_T1c", l.comm_T1c},
        {"comm_T2", l.comm_T2},
        {"comm_T2c", l.comm_T2c},
        {"comm_T0", l.comm_T0},
        {"move_round1", l.move_round1},
        {"move_snap1", l.move_snap1},
        {"move_round2", l.move_round2},
        {"move_snap2", l.move_snap2},
        {"distance", l.distance},
        {"constant", l.constant},
        {"lattice_residual", l.lattice_residual},
        {"normality", l.normality},
        {"center_margin", l.center_margin},
        {"line_condition", l.line_condition},
        {"round1", surgery_json(l.round1)},
        {"round2", surgery_json(l.round2)},
        {"wall_ms", l.wall_ms}}},
      {"warnings", r.warnings}};
}

/// Single-run record: report plus version, config echo and seeds.
inline nlohmann::json run_record(const Report& r, const PipelineConfig& cfg,
                                 const nlohmann::json& seeds = nlohmann::json::object()) {
  return {{"schema_version", kSchemaVersion},
          {"tool_version", kToolVersion},
          {"config", config_json(cfg)},
          {"seeds", seeds},
          {"report", report_json(r)}};
}

/// True when every number in the document is finite (non-finite doubles serialize as null).
inline bool all_finite(const nlohmann::json& j) {
  if (j.is_null()) return false;
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_structured())
    for (const auto& v : j)
      if (!all_finite(v)) return false;
  return true;
}

}  // namespace nearnormal
