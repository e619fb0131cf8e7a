#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ddinv/linalg.hpp"

namespace ddinv {

using Json = nlohmann::ordered_json;

/// Malformed input file. The message names the file and, where it applies,
/// the 1-based line and column.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix CSV: one row per line, comma separated, no header. Lines that
/// are empty or start with '#' are skipped. Values are written with 17
/// significant digits so a write/read cycle is exact.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& M);

/// A vector is stored as a single column.
Vector read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(const std::filesystem::path& path, const Vector& v);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Creates the parent directories of `path` if missing.
void ensure_parent_dir(const std::filesystem::path& path);

/// Resolves `p` against `base` unless `p` is absolute.
std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p);

Json matrix_to_json(const Matrix& M);

}  // namespace ddinv
