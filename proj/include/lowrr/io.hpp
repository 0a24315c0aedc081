#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowrr/data.hpp"

namespace lowrr {

/// File formats (all plain text):
///   response:   one numeric value per line, n lines.
///   covariates: CSV, n rows by m columns, optional header line.
///   matrices:   first line "p q", then n CSV lines of p*q values each in
///               column-major order (column 1 top to bottom, then column 2).
MatrixDataset load_dataset(const std::string& response_path,
                           const std::string& matrix_path,
                           const std::optional<std::string>& covariate_path,
                           std::optional<Family> family = std::nullopt);

void save_dataset(const MatrixDataset& data, const std::string& response_path,
                  const std::string& matrix_path,
                  const std::optional<std::string>& covariate_path);

/// Shortest decimal form that round-trips the exact double.
std::string format_double(double v);

/// "key: value" lines; the sidecar format next to every CSV output.
void write_metadata(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& entries);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lowrr
