#pragma once

// Loading set functions from CSV matrices, triplet lists, and JSON
// documents. The JSON schema is described in docs/function-spec.md.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "submod/core.hpp"
#include "submod/zoo.hpp"

namespace submod::io {

using json = nlohmann::json;

/// Malformed input file; the message names the row/column when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

/// Strict full-string parse of a finite double.
inline bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == text.size();
}

/// Dense row-major CSV of numbers. A first row that does not parse as numbers
/// is treated as a header and skipped.
inline Matrix parse_dense_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw ParseError("line " + std::to_string(line_no) + ": non-numeric matrix entry");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
                       " columns, found " + std::to_string(row.size()));
    for (std::size_t j = 0; j < row.size(); ++j)
      if (!std::isfinite(row[j]))
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) + ": non-finite value");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix file contains no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline Matrix load_dense_csv(const std::filesystem::path& path) { return parse_dense_csv(read_file(path)); }

/// Triplet list "i,j,value" (0-based, optional header). Missing entries are 0.
/// With n = 0 the size is inferred as 1 + the largest index. `symmetric`
/// mirrors every entry.
inline Matrix parse_triplets(const std::string& text, std::size_t n = 0, bool symmetric = false) {
  std::istringstream in(text);
  struct Entry {
    std::size_t i, j;
    double v;
  };
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    double a = 0, b = 0, v = 0;
    if (cells.size() != 3 || !parse_double(cells[0], a) || !parse_double(cells[1], b) || !parse_double(cells[2], v)) {
      if (line_no == 1) continue;
      throw ParseError("line " + std::to_string(line_no) + ": expected 'i,j,value'");
    }
    if (a < 0 || b < 0 || a != std::floor(a) || b != std::floor(b))
      throw ParseError("line " + std::to_string(line_no) + ": indices must be nonnegative integers");
    if (!std::isfinite(v)) throw ParseError("line " + std::to_string(line_no) + ": non-finite value");
    Entry e{static_cast<std::size_t>(a), static_cast<std::size_t>(b), v};
    max_index = std::max({max_index, e.i, e.j});
    entries.push_back(e);
  }
  if (n == 0) n = entries.empty() ? 0 : max_index + 1;
  if (n == 0) throw ParseError("triplet file contains no entries");
  if (!entries.empty() && max_index >= n) throw ParseError("triplet index exceeds the declared size");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : entries) {
    m(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.v;
    if (symmetric) m(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.v;
  }
  return m;
}

inline Matrix load_triplets(const std::filesystem::path& path, std::size_t n = 0, bool symmetric = false) {
  return parse_triplets(read_file(path), n, symmetric);
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(what + ": row " + std::to_string(r) + " has the wrong length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw ParseError(what + ": entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
      m(r, c) = cell.get<double>();
    }
  }
  return m;
}

inline std::vector<double> vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ParseError(what + ": non-numeric entry");
    out.push_back(x.get<double>());
  }
  return out;
}

inline ModularWeights modular_from_json(const json& j, const std::string& what) {
  ModularWeights m;
  if (j.contains("weights")) m.weights = vector_from_json(j.at("weights"), what + ".weights");
  m.constant = j.value("constant", 0.0);
  return m;
}

inline std::vector<ConcaveSpec> concave_list(const json& j, const std::string& what) {
  std::vector<ConcaveSpec> out;
  if (j.is_string()) {
    out.push_back(parse_concave(j.get<std::string>()));
    return out;
  }
  if (!j.is_array()) throw ParseError(what + ": expected a string or array of strings");
  for (const auto& s : j) out.push_back(parse_concave(s.get<std::string>()));
  return out;
}

inline DsfSpec dsf_from_json(const json& j) {
  DsfSpec spec;
  if (!j.contains("layers") || !j.at("layers").is_array()) throw ParseError("dsf: missing 'layers' array");
  std::size_t idx = 0;
  for (const auto& layer : j.at("layers")) {
    const std::string tag = "dsf.layers[" + std::to_string(idx++) + "]";
    DsfLayer l;
    l.weights = matrix_from_json(layer.at("weights"), tag + ".weights");
    l.concave = concave_list(layer.at("concave"), tag + ".concave");
    spec.layers.push_back(std::move(l));
  }
  if (j.contains("final_weights")) spec.final_weights = vector_from_json(j.at("final_weights"), "dsf.final_weights");
  if (j.contains("final_modular")) spec.final_modular = modular_from_json(j.at("final_modular"), "dsf.final_modular");
  return spec;
}

inline FeatureBasedSpec feature_based_from_json(const json& j) {
  FeatureBasedSpec spec;
  spec.weights = matrix_from_json(j.at("weights"), "feature-based.weights");
  spec.concave = concave_list(j.at("concave"), "feature-based.concave");
  if (j.contains("bias")) spec.bias = modular_from_json(j.at("bias"), "feature-based.bias");
  return spec;
}

/// Builds a SetFunction from a JSON function document. Relative paths inside
/// the document ("similarity_csv", "weights_csv", "matrix_csv") resolve
/// against `base_dir`.
inline SetFunction function_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object() || !j.contains("type")) throw ParseError("function document needs a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  auto matrix_field = [&](const char* inline_key, const char* csv_key) -> Matrix {
    if (j.contains(inline_key)) return matrix_from_json(j.at(inline_key), type + "." + inline_key);
    if (j.contains(csv_key)) return load_dense_csv(base_dir / j.at(csv_key).get<std::string>());
    throw ParseError(type + ": needs '" + inline_key + "' or '" + csv_key + "'");
  };
  try {
    if (type == "modular") return build_modular(modular_from_json(j, "modular"));
    if (type == "facility-location") return build_facility_location(SimilarityMatrix(matrix_field("similarity", "similarity_csv")));
    if (type == "feature-based") return build_feature_based(feature_based_from_json(j));
    if (type == "coverage") {
      CoverageSpec spec;
      spec.membership = matrix_from_json(j.at("membership"), "coverage.membership");
      if (j.contains("concept_weights")) spec.concept_weights = vector_from_json(j.at("concept_weights"), "coverage.concept_weights");
      return build_coverage(std::move(spec));
    }
    if (type == "set-cover") {
      const auto covers = j.at("covers").get<std::vector<std::vector<std::size_t>>>();
      return build_set_cover(covers, j.at("concepts").get<std::size_t>());
    }
    if (type == "graph-cut") {
      GraphCutSpec spec;
      spec.weights = matrix_field("weights", "weights_csv");
      spec.lambda = j.value("lambda", 1.0);
      spec.alpha = j.value("alpha", 1.0);
      return build_graph_cut(std::move(spec));
    }
    if (type == "log-det") return build_log_det(LogDetSpec{matrix_field("matrix", "matrix_csv")});
    if (type == "dsf") return build_dsf(dsf_from_json(j));
    if (type == "rouge") {
      const auto refs = j.at("references").get<std::vector<std::string>>();
      const auto sents = j.at("sentences").get<std::vector<std::string>>();
      return build_rouge_n(rouge_spec_from_text(refs, sents, j.value("order", std::size_t{1})));
    }
    if (type == "mixture") {
      std::vector<std::pair<double, SetFunction>> terms;
      for (const auto& t : j.at("terms")) terms.emplace_back(t.at("weight").get<double>(), function_from_json(t.at("function"), base_dir));
      return mixture(std::move(terms));
    }
  } catch (const json::exception& e) {
    throw ParseError(type + ": " + e.what());
  }
  throw ParseError("unknown function type '" + type + "'");
}

inline SetFunction load_function_json(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return function_from_json(j, path.parent_path());
}

}  // namespace submod::io
