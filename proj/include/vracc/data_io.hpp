#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vracc/types.hpp"

namespace vracc {

/// Dense binary-classification dataset; labels are normalized to {0,1}.
struct Dataset {
  Matrix features;          // N x (d-1)
  std::vector<int> labels;  // 0/1
  struct Provenance {
    std::string path;
    std::string format;
    bool standardized = false;
    std::string label_mapping;
  } provenance;

  long samples() const { return features.rows(); }
  long feature_count() const { return features.cols(); }
};

namespace detail {

inline bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);  // from_chars rejects '+'
  if (token.empty()) return false;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

inline int map_numeric_label(double raw, const std::string& where) {
  if (raw == -1.0 || raw == 0.0) return 0;
  if (raw == 1.0) return 1;
  throw std::runtime_error(where + ": label must be one of {-1, 0, +1}");
}

inline void check_classes(const Dataset& data) {
  if (data.samples() < 2) {
    std::cerr << "warning: dataset has fewer than two samples\n";
    return;
  }
  const auto ones = std::count(data.labels.begin(), data.labels.end(), 1);
  if (ones == 0 || ones == static_cast<long>(data.labels.size()))
    std::cerr << "warning: dataset contains a single class\n";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) {
    // trim surrounding whitespace
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string()
                                                : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

/// Reads space-separated "label index:value" lines with 1-based indices;
/// absent entries are zero and short rows are padded to the widest index
/// seen. Labels in {-1,+1} or {0,1} map to {0,1}.
inline Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<int> labels;
  int max_index = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream stream(line);
    std::string token;
    if (!(stream >> token)) continue;  // blank line
    const std::string where = path + ":" + std::to_string(line_no);
    double raw = 0.0;
    if (!detail::parse_double(token, raw)) throw std::runtime_error(where + ": malformed label");
    labels.push_back(detail::map_numeric_label(raw, where));
    rows.emplace_back();
    while (stream >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw std::runtime_error(where + ": expected index:value");
      int index = 0;
      double value = 0.0;
      const std::string index_part = token.substr(0, colon);
      auto [p, ec] = std::from_chars(index_part.data(), index_part.data() + index_part.size(), index);
      if (ec != std::errc() || p != index_part.data() + index_part.size() || index < 1)
        throw std::runtime_error(where + ": malformed feature index");
      if (!detail::parse_double(token.substr(colon + 1), value))
        throw std::runtime_error(where + ": malformed feature value");
      rows.back().emplace_back(index, value);
      max_index = std::max(max_index, index);
    }
  }
  if (rows.empty()) throw std::runtime_error(path + ": no samples");

  Dataset data;
  data.features = Matrix::Zero(static_cast<long>(rows.size()), max_index);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [index, value] : rows[r]) data.features(static_cast<long>(r), index - 1) = value;
  data.labels = std::move(labels);
  data.provenance = {path, "libsvm", false, "{-1,0}->0, +1->1"};
  detail::check_classes(data);
  return data;
}

/// Reads dense comma-separated rows; `label_column` selects the label field
/// (-1 = last). A leading row whose feature fields are non-numeric is
/// treated as a header. Numeric labels map as in the sparse loader; a
/// non-numeric label column with exactly two distinct values maps the
/// alphabetically smaller one to 0.
inline Dataset load_csv(const std::string& path, int label_column = -1) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::string line;
  long line_no = 0;
  long width = -1;
  bool first_content_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    auto fields = detail::split_csv_line(line);
    if (fields.size() < 2) throw std::runtime_error(where + ": need at least two columns");
    const long cols = static_cast<long>(fields.size());
    const long label_idx = label_column < 0 ? cols - 1 : label_column;
    if (label_idx >= cols) throw std::runtime_error(where + ": label column out of range");

    std::vector<double> feats;
    feats.reserve(static_cast<std::size_t>(cols) - 1);
    bool numeric = true;
    for (long c = 0; c < cols; ++c) {
      if (c == label_idx) continue;
      double value = 0.0;
      if (!detail::parse_double(fields[static_cast<std::size_t>(c)], value)) {
        numeric = false;
        break;
      }
      feats.push_back(value);
    }
    if (!numeric) {
      if (first_content_row) {
        first_content_row = false;
        continue;  // header row
      }
      throw std::runtime_error(where + ": malformed feature value");
    }
    first_content_row = false;
    if (width < 0) width = static_cast<long>(feats.size());
    if (static_cast<long>(feats.size()) != width)
      throw std::runtime_error(where + ": inconsistent column count");
    rows.push_back(std::move(feats));
    raw_labels.push_back(fields[static_cast<std::size_t>(label_idx)]);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no samples");

  Dataset data;
  data.features.resize(static_cast<long>(rows.size()), width);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (long c = 0; c < width; ++c) data.features(static_cast<long>(r), c) = rows[r][static_cast<std::size_t>(c)];

  // Labels: numeric when every entry parses, otherwise a two-class string map.
  bool numeric_labels = true;
  std::vector<double> numeric(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i)
    if (!detail::parse_double(raw_labels[i], numeric[i])) {
      numeric_labels = false;
      break;
    }
  data.labels.resize(raw_labels.size());
  std::string mapping;
  if (numeric_labels) {
    for (std::size_t i = 0; i < raw_labels.size(); ++i)
      data.labels[i] = detail::map_numeric_label(numeric[i], path);
    mapping = "{-1,0}->0, +1->1";
  } else {
    std::map<std::string, int> classes;
    for (const auto& label : raw_labels) classes.emplace(label, 0);
    if (classes.size() != 2)
      throw std::runtime_error(path + ": non-numeric labels must form exactly two classes");
    int value = 0;
    for (auto& [name, id] : classes) id = value++;
    for (std::size_t i = 0; i < raw_labels.size(); ++i) data.labels[i] = classes[raw_labels[i]];
    auto it = classes.begin();
    mapping = it->first + "->0, " + std::next(it)->first + "->1";
  }
  data.provenance = {path, "csv", false, mapping};
  detail::check_classes(data);
  return data;
}

/// Centers and scales every feature column to sample mean 0 and sample
/// standard deviation 1 (ddof = 1); constant columns become zero.
inline Dataset standardize(Dataset data) {
  const long n = data.samples();
  if (n < 2) throw std::invalid_argument("standardize: need at least two samples");
  for (long c = 0; c < data.features.cols(); ++c) {
    auto column = data.features.col(c);
    const double mean = column.mean();
    const double var = (column.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (var > 0.0)
      column = (column.array() - mean) / std::sqrt(var);
    else
      column.setZero();
  }
  data.provenance.standardized = true;
  return data;
}

inline void write_libsvm(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (long r = 0; r < data.samples(); ++r) {
    out << (data.labels[static_cast<std::size_t>(r)] == 1 ? "+1" : "-1");
    for (long c = 0; c < data.features.cols(); ++c)
      if (data.features(r, c) != 0.0) out << ' ' << c + 1 << ':' << data.features(r, c);
    out << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (long r = 0; r < data.samples(); ++r) {
    for (long c = 0; c < data.features.cols(); ++c) out << data.features(r, c) << ',';
    out << data.labels[static_cast<std::size_t>(r)] << '\n';
  }
}

}  // namespace vracc
