#include "lowrr/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lowrr/errors.hpp"

namespace lowrr {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& token, double* out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) return false;
  *out = v;
  return true;
}

double parse_cell(const std::string& token, const std::string& file, size_t row,
                  size_t col) {
  double v = 0.0;
  if (!parse_double(token, &v)) {
    throw ValidationError(file + ": non-numeric cell at row " +
                          std::to_string(row) + ", column " +
                          std::to_string(col) + " ('" + trim(token) + "')");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

MatrixDataset load_dataset(const std::string& response_path,
                           const std::string& matrix_path,
                           const std::optional<std::string>& covariate_path,
                           std::optional<Family> family) {
  // Responses.
  const std::vector<std::string> ylines = read_lines(response_path);
  if (ylines.empty()) throw ValidationError(response_path + ": empty file");
  Vector y(static_cast<Index>(ylines.size()));
  for (size_t i = 0; i < ylines.size(); ++i) {
    y(static_cast<Index>(i)) = parse_cell(ylines[i], response_path, i + 1, 1);
  }
  const Index n = y.size();

  // Matrices: header "p q", then n rows of p*q column-major values.
  const std::vector<std::string> mlines = read_lines(matrix_path);
  if (mlines.size() < 2) {
    throw ValidationError(matrix_path + ": expected a 'p q' header plus rows");
  }
  std::istringstream header(mlines[0]);
  Index p = 0, q = 0;
  if (!(header >> p >> q) || p < 1 || q < 1) {
    throw ValidationError(matrix_path + ": bad header, expected 'p q'");
  }
  if (mlines.size() - 1 != static_cast<size_t>(n)) {
    throw ValidationError(matrix_path + ": has " +
                          std::to_string(mlines.size() - 1) + " rows but " +
                          response_path + " has " + std::to_string(n));
  }
  std::vector<Matrix> mats(n);
  for (Index i = 0; i < n; ++i) {
    const auto cells = split_csv(mlines[i + 1]);
    if (cells.size() != static_cast<size_t>(p * q)) {
      throw ValidationError(matrix_path + ": row " + std::to_string(i + 2) +
                            " has " + std::to_string(cells.size()) +
                            " values, expected " + std::to_string(p * q));
    }
    Vector v(p * q);
    for (size_t c = 0; c < cells.size(); ++c) {
      v(static_cast<Index>(c)) = parse_cell(cells[c], matrix_path, i + 2, c + 1);
    }
    mats[i] = unvec(v, p, q);
  }

  // Optional covariates, with an optional header line.
  Matrix z(n, 0);
  if (covariate_path) {
    std::vector<std::string> zlines = read_lines(*covariate_path);
    if (zlines.empty()) throw ValidationError(*covariate_path + ": empty file");
    size_t first = 0;
    {
      double ignored = 0.0;
      const auto cells = split_csv(zlines[0]);
      bool numeric = true;
      for (const auto& c : cells) numeric = numeric && parse_double(c, &ignored);
      if (!numeric) first = 1;
    }
    if (zlines.size() - first != static_cast<size_t>(n)) {
      throw ValidationError(*covariate_path + ": has " +
                            std::to_string(zlines.size() - first) +
                            " data rows but " + response_path + " has " +
                            std::to_string(n));
    }
    const size_t m = split_csv(zlines[first]).size();
    z.resize(n, static_cast<Index>(m));
    for (Index i = 0; i < n; ++i) {
      const auto cells = split_csv(zlines[first + i]);
      if (cells.size() != m) {
        throw ValidationError(*covariate_path + ": row " +
                              std::to_string(first + i + 1) + " has " +
                              std::to_string(cells.size()) +
                              " values, expected " + std::to_string(m));
      }
      for (size_t c = 0; c < m; ++c) {
        z(i, static_cast<Index>(c)) =
            parse_cell(cells[c], *covariate_path, first + i + 1, c + 1);
      }
    }
  }

  return MatrixDataset::create(std::move(y), std::move(z), std::move(mats),
                               family);
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void save_dataset(const MatrixDataset& data, const std::string& response_path,
                  const std::string& matrix_path,
                  const std::optional<std::string>& covariate_path) {
  {
    std::ostringstream out;
    for (Index i = 0; i < data.n(); ++i) {
      out << format_double(data.y(i)) << "\n";
    }
    write_text_file(response_path, out.str());
  }
  {
    std::ostringstream out;
    out << data.p << " " << data.q << "\n";
    for (Index i = 0; i < data.n(); ++i) {
      const Vector v = vec(data.mats[i]);
      for (Index c = 0; c < v.size(); ++c) {
        if (c > 0) out << ",";
        out << format_double(v(c));
      }
      out << "\n";
    }
    write_text_file(matrix_path, out.str());
  }
  if (covariate_path) {
    if (data.m() == 0) {
      throw ValidationError("save_dataset: dataset has no covariates to save");
    }
    std::ostringstream out;
    for (Index i = 0; i < data.n(); ++i) {
      for (Index c = 0; c < data.m(); ++c) {
        if (c > 0) out << ",";
        out << format_double(data.z(i, c));
      }
      out << "\n";
    }
    write_text_file(*covariate_path, out.str());
  }
}

void write_metadata(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ostringstream out;
  for (const auto& [key, value] : entries) {
    out << key << ": " << value << "\n";
  }
  write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lowrr
