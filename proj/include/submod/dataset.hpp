#pragma once

// Tabular datasets and the similarity kernels built from them.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "submod/io.hpp"
#include "submod/zoo.hpp"

namespace submod {

/// n records with named numeric feature columns and optional string ids.
struct DatasetTable {
  std::vector<std::string> columns;
  std::vector<std::string> ids;  // empty when no id column was requested
  Matrix values;                 // n x columns.size()

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InvalidArgument("no column named '" + name + "'");
  }

  /// Returns a copy without column `name`, e.g. to separate a score column from features.
  DatasetTable without_column(const std::string& name) const {
    const std::size_t drop = column_index(name);
    DatasetTable out;
    out.ids = ids;
    out.values.resize(values.rows(), values.cols() - 1);
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j == drop) continue;
      out.columns.push_back(columns[j]);
      out.values.col(c++) = values.col(static_cast<Eigen::Index>(j));
    }
    return out;
  }

  std::string id_of(std::size_t row) const { return ids.empty() ? std::to_string(row) : ids[row]; }
};

enum class DataFormat { csv, json };

namespace detail {

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  if (!io::parse_double(cell, v))
    throw io::ParseError("row " + std::to_string(row) + ", column '" + column + "': '" + cell + "' is not a number");
  if (!std::isfinite(v)) throw io::ParseError("row " + std::to_string(row) + ", column '" + column + "': non-finite value");
  return v;
}

}  // namespace detail

/// CSV with a mandatory header row. Rows are numbered from 1 (the first data row).
inline DatasetTable parse_csv_table(const std::string& text, const std::optional<std::string>& id_column = {}) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line))
    if (!io::trim(line).empty()) header = io::split_csv_line(line);
  if (header.empty()) throw io::ParseError("dataset is empty");

  std::optional<std::size_t> id_pos;
  if (id_column) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == *id_column) id_pos = i;
    if (!id_pos) throw io::ParseError("id column '" + *id_column + "' not in header");
  }

  DatasetTable t;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!id_pos || i != *id_pos) t.columns.push_back(header[i]);

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    ++row;
    const auto cells = io::split_csv_line(line);
    if (cells.size() != header.size())
      throw io::ParseError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()));
    std::vector<double> r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (id_pos && i == *id_pos) {
        t.ids.push_back(cells[i]);
        continue;
      }
      r.push_back(detail::parse_cell(cells[i], row, header[i]));
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw io::ParseError("dataset has a header but no rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

/// JSON: either an array of equal-length numeric arrays (columns named c0, c1, ...)
/// or an array of objects sharing the same keys.
inline DatasetTable parse_json_table(const std::string& text, const std::optional<std::string>& id_column = {}) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw io::ParseError(std::string("dataset JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw io::ParseError("dataset JSON must be a nonempty array of records");
  DatasetTable t;
  const std::size_t n = j.size();
  if (j.front().is_array()) {
    if (id_column) throw io::ParseError("id column requires records with named fields");
    const std::size_t d = j.front().size();
    for (std::size_t c = 0; c < d; ++c) t.columns.push_back("c" + std::to_string(c));
    t.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < n; ++r) {
      const auto& rec = j[r];
      if (!rec.is_array() || rec.size() != d)
        throw io::ParseError("row " + std::to_string(r + 1) + ": expected " + std::to_string(d) + " values");
      for (std::size_t c = 0; c < d; ++c) {
        if (!rec[c].is_number())
          throw io::ParseError("row " + std::to_string(r + 1) + ", column " + std::to_string(c) + ": not a number");
        const double v = rec[c].get<double>();
        if (!std::isfinite(v)) throw io::ParseError("row " + std::to_string(r + 1) + ": non-finite value");
        t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
    return t;
  }
  if (!j.front().is_object()) throw io::ParseError("dataset records must be arrays or objects");
  for (const auto& [key, _] : j.front().items())
    if (!id_column || key != *id_column) t.columns.push_back(key);
  t.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = j[r];
    const std::size_t expected = t.columns.size() + (id_column ? 1 : 0);
    if (!rec.is_object() || rec.size() != expected)
      throw io::ParseError("row " + std::to_string(r + 1) + ": record fields differ from the first record");
    if (id_column) {
      if (!rec.contains(*id_column)) throw io::ParseError("row " + std::to_string(r + 1) + ": missing id field");
      const auto& id = rec.at(*id_column);
      t.ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (!rec.contains(t.columns[c]) || !rec.at(t.columns[c]).is_number())
        throw io::ParseError("row " + std::to_string(r + 1) + ", column '" + t.columns[c] + "': missing or not a number");
      const double v = rec.at(t.columns[c]).get<double>();
      if (!std::isfinite(v)) throw io::ParseError("row " + std::to_string(r + 1) + ": non-finite value");
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return t;
}

inline DatasetTable ingest(const std::filesystem::path& path, DataFormat format,
                           const std::optional<std::string>& id_column = {}) {
  const std::string text = io::read_file(path);
  return format == DataFormat::csv ? parse_csv_table(text, id_column) : parse_json_table(text, id_column);
}

/// Picks the format from the file extension (".json" or anything else as CSV).
inline DatasetTable ingest(const std::filesystem::path& path, const std::optional<std::string>& id_column = {}) {
  return ingest(path, path.extension() == ".json" ? DataFormat::json : DataFormat::csv, id_column);
}

struct KernelSpec {
  enum class Kind { rbf, cosine, dot, precomputed };
  enum class Normalization { none, clip_nonneg };

  Kind kind = Kind::rbf;
  double bandwidth = 1.0;
  std::filesystem::path path;
  Normalization normalization = Normalization::clip_nonneg;
};

/// "rbf:1.5", "cosine", "dot", or "precomputed:sim.csv".
inline KernelSpec parse_kernel(const std::string& text) {
  KernelSpec k;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "rbf") {
    k.kind = KernelSpec::Kind::rbf;
    if (!arg.empty() && !io::parse_double(arg, k.bandwidth)) throw InvalidArgument("bad rbf bandwidth '" + arg + "'");
    if (!(k.bandwidth > 0.0) || !std::isfinite(k.bandwidth)) throw InvalidArgument("rbf bandwidth must be positive");
  } else if (head == "cosine") {
    k.kind = KernelSpec::Kind::cosine;
  } else if (head == "dot") {
    k.kind = KernelSpec::Kind::dot;
  } else if (head == "precomputed") {
    if (arg.empty()) throw InvalidArgument("precomputed kernel needs a path");
    k.kind = KernelSpec::Kind::precomputed;
    k.path = arg;
  } else {
    throw InvalidArgument("unknown kernel '" + text + "'");
  }
  return k;
}

/// Similarity matrix over the rows of `t`. rbf uses exp(-||a - v||^2 / (2 sigma^2)).
/// Negative entries are clipped to 0 under clip_nonneg with a warning on `log`.
inline SimilarityMatrix build_kernel(const DatasetTable& t, const KernelSpec& spec, std::ostream* log = &std::cerr) {
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows());
  Matrix s(n, n);
  switch (spec.kind) {
    case KernelSpec::Kind::rbf: {
      if (!(spec.bandwidth > 0.0)) throw InvalidArgument("rbf bandwidth must be positive");
      const double denom = 2.0 * spec.bandwidth * spec.bandwidth;
      for (Eigen::Index i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double d2 = (t.values.row(i) - t.values.row(j)).squaredNorm();
          s(i, j) = s(j, i) = std::exp(-d2 / denom);
        }
      }
      break;
    }
    case KernelSpec::Kind::cosine: {
      Eigen::VectorXd norms = t.values.rowwise().norm();
      for (Eigen::Index i = 0; i < n; ++i)
        if (norms(i) == 0.0) throw InvalidArgument("cosine kernel: row " + std::to_string(i) + " has zero norm");
      s = (t.values * t.values.transpose()).array() / (norms * norms.transpose()).array();
      break;
    }
    case KernelSpec::Kind::dot:
      s = t.values * t.values.transpose();
      break;
    case KernelSpec::Kind::precomputed:
      s = io::load_dense_csv(spec.path);
      if (s.rows() != n || s.cols() != n)
        throw DimensionError("precomputed kernel is " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                             " but the dataset has " + std::to_string(n) + " rows");
      break;
  }
  if ((s.array() < 0.0).any()) {
    if (spec.normalization != KernelSpec::Normalization::clip_nonneg)
      throw InvalidArgument("kernel has negative entries and clipping is disabled");
    const auto negatives = (s.array() < 0.0).count();
    if (log) *log << "warning: clipped " << negatives << " negative kernel entries to 0\n";
    s = s.cwiseMax(0.0);
  }
  return SimilarityMatrix(std::move(s));
}

}  // namespace submod
