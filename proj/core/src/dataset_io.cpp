#include "cslearn/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cslearn {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, std::size_t file_line, const std::string& column) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(s, &consumed);
    if (consumed != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("CSV line " + std::to_string(file_line) + ": field '" + s +
                             "' in column '" + column + "' is not numeric");
  }
}

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

Dataset load_dataset_csv(const std::string& path, const DatasetCsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset CSV: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  // Expected layout: x0..x{d-1}, y [, z].
  std::size_t d = 0;
  while (d < header.size() && header[d] == "x" + std::to_string(d)) ++d;
  if (d == 0 || d >= header.size() || header[d] != "y") {
    throw std::runtime_error("dataset CSV header must be x0..x{d-1},y[,z]; got '" + line + "'");
  }
  const bool has_group = header.size() > d + 1;
  if (has_group && (header.size() != d + 2 || header[d + 1] != "z")) {
    throw std::runtime_error("dataset CSV header must be x0..x{d-1},y[,z]; got '" + line + "'");
  }
  const std::size_t expected_fields = d + 1 + (has_group ? 1 : 0);

  std::vector<Sample> samples;
  std::size_t file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != expected_fields) {
      throw std::runtime_error("CSV line " + std::to_string(file_line) + ": expected " +
                               std::to_string(expected_fields) + " fields, got " +
                               std::to_string(fields.size()));
    }
    Sample s;
    s.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double v = parse_double(fields[j], file_line, header[j]);
      if (!std::isfinite(v)) {
        throw std::runtime_error("CSV line " + std::to_string(file_line) +
                                 ": non-finite feature value");
      }
      s.features.push_back(v);
    }
    s.label = parse_double(fields[d], file_line, "y");
    if (options.require_binary_labels && s.label != 0.0 && s.label != 1.0) {
      throw std::runtime_error("CSV line " + std::to_string(file_line) +
                               ": label must be 0 or 1");
    }
    if (has_group) s.group = fields[d + 1];
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw std::runtime_error("dataset CSV has no data rows: " + path);

  if (!options.encode_protected) return Dataset(std::move(samples), d);

  // Append the encoded protected attribute as one extra feature slot.
  std::set<std::string> values;
  for (const Sample& s : samples) {
    if (!s.group) {
      throw std::runtime_error("encode_protected requires a z column in " + path);
    }
    values.insert(*s.group);
  }
  if (values.size() != 2) {
    throw std::runtime_error("encode_protected requires exactly 2 distinct z values, found " +
                             std::to_string(values.size()));
  }
  const std::string group_a = *values.begin();
  for (Sample& s : samples) {
    s.features.push_back(*s.group == group_a ? 1.0 : 0.0);
  }
  Dataset data(std::move(samples), d + 1);
  data.set_protected_slot(d);
  return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset CSV: " + path);
  const std::size_t d = data.dimension();
  const bool has_group = data[0].group.has_value();
  for (std::size_t j = 0; j < d; ++j) out << "x" << j << ",";
  out << "y";
  if (has_group) out << ",z";
  out << "\n";
  for (const Sample& s : data.samples()) {
    for (std::size_t j = 0; j < d; ++j) out << format_g12(s.features[j]) << ",";
    out << format_g12(s.label);
    if (has_group) out << "," << s.group.value_or("");
    out << "\n";
  }
}

}  // namespace cslearn
