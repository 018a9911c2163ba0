#pragma once

#include <string>

#include "cslearn/types.hpp"

namespace cslearn {

/// Loading options for the canonical dataset CSV layout:
/// header `x0,..,x{d-1},y[,z]`, real-valued features, y scalar, optional
/// categorical z column.
struct DatasetCsvOptions {
  /// Reject labels outside {0,1}.
  bool require_binary_labels = false;
  /// Append one extra feature slot carrying the encoded z value (the two
  /// distinct z values are sorted; the first maps to 1.0, the second to 0.0)
  /// and mark it as the dataset's protected slot. Requires a z column with
  /// exactly two distinct values.
  bool encode_protected = false;
};

/// Strict parse: wrong column count, malformed headers, or non-numeric
/// fields raise std::runtime_error naming the offending file line.
Dataset load_dataset_csv(const std::string& path, const DatasetCsvOptions& options = {});

/// Writes the canonical layout (z column included when any sample carries a
/// group tag). Values use 12 significant digits.
void save_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace cslearn
