#include "ddinv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace ddinv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line,
                  std::size_t column) {
  cell = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(fmt::format("{}:{}: column {}: cannot parse '{}' as a number",
                                 path.string(), line, column, cell));
  }
  return value;
}

}  // namespace

void ensure_parent_dir(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path candidate(p);
  return candidate.is_absolute() ? candidate : base / candidate;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
  std::vector<std::vector<double>> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const std::string_view view = trim(text);
    if (view.empty() || view.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const auto comma = view.find(',', start);
      const auto cell = view.substr(start, comma == std::string_view::npos ? view.npos : comma - start);
      row.push_back(parse_cell(cell, path, line, row.size() + 1));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(fmt::format("{}:{}: expected {} values, found {}", path.string(), line,
                                   rows.front().size(), row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(fmt::format("{}: no matrix rows", path.string()));
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return M;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
  std::string buf;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    buf.clear();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) buf += ',';
      buf += fmt::format("{:.17g}", M(i, j));
    }
    buf += '\n';
    out << buf;
  }
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const Matrix M = read_matrix_csv(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw ParseError(fmt::format("{}: expected a single row or column, got {}x{}", path.string(),
                               M.rows(), M.cols()));
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v) {
  write_matrix_csv(path, v);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; translate it to line/column.
    std::ifstream again(path);
    std::stringstream ss;
    ss << again.rdbuf();
    const std::string text = ss.str();
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(fmt::format("{}:{}: column {}: {}", path.string(), line, col, e.what()));
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
  out << j.dump(2) << '\n';
}

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ddinv
