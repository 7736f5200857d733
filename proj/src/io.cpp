#include "jointlmr/io.hpp"

#include "jointlmr/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <memory>
#include <sstream>
#include <vector>

namespace jointlmr::io {

namespace fs = std::filesystem;

std::string_view to_string(MatrixFormat f) {
  return f == MatrixFormat::Csv ? "csv" : "rdm";
}

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "rdm") return MatrixFormat::Rdm;
  if (name == "csv") return MatrixFormat::Csv;
  throw ValidationError("unknown matrix format '" + std::string(name) +
                        "' (expected rdm or csv)");
}

std::string_view file_extension(MatrixFormat f) {
  return f == MatrixFormat::Csv ? ".csv" : ".rdm";
}

MatrixFormat format_for_path(const fs::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::Csv : MatrixFormat::Rdm;
}

namespace {

std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

std::uint64_t load_le(const char* p, int width) {
  std::uint64_t v = 0;
  for (int k = width - 1; k >= 0; --k) {
    v = (v << 8) | static_cast<unsigned char>(p[k]);
  }
  return v;
}

void store_le(std::string& out, std::uint64_t v, int width) {
  for (int k = 0; k < width; ++k) {
    out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
  }
}

}  // namespace

DenseMatrix read_rdm(const fs::path& path) {
  const std::string bytes = read_file_bytes(path);
  const std::string where = " in '" + path.string() + "'";

  if (bytes.size() < kRdmHeaderBytes) {
    if (bytes.compare(0, std::min(bytes.size(), kRdmMagic.size()), kRdmMagic.data(),
                      std::min(bytes.size(), kRdmMagic.size())) != 0) {
      throw BadMagicError("bad magic" + where + " (expected RDM1)");
    }
    throw TruncatedPayloadError("header truncated" + where + ": " +
                                std::to_string(bytes.size()) + " of 12 bytes");
  }
  if (std::string_view(bytes.data(), 4) != kRdmMagic) {
    throw BadMagicError("bad magic" + where + " (expected RDM1)");
  }

  const std::uint64_t rows = load_le(bytes.data() + 4, 4);
  const std::uint64_t cols = load_le(bytes.data() + 8, 4);
  if (rows == 0 || cols == 0) {
    throw BadHeaderError("degenerate shape " + std::to_string(rows) + "x" +
                         std::to_string(cols) + where +
                         " (rows and cols must be >= 1)");
  }

  const std::uint64_t expected = kRdmHeaderBytes + 8 * rows * cols;
  if (bytes.size() < expected) {
    throw TruncatedPayloadError("payload truncated" + where + ": expected " +
                                std::to_string(expected) + " bytes, found " +
                                std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing data" + where + ": expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(bytes.size()));
  }

  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const char* p = bytes.data() + kRdmHeaderBytes;
  for (Eigen::Index k = 0; k < m.size(); ++k, p += 8) {
    const double v = std::bit_cast<double>(load_le(p, 8));
    if (!std::isfinite(v)) {
      throw FormatError("non-finite value at flat index " + std::to_string(k) + where);
    }
    m.data()[k] = v;
  }
  return m;
}

void write_rdm(const fs::path& path, const DenseMatrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ValidationError("cannot write empty matrix " + shape_string(m));
  }
  if (m.rows() > 0xffffffffLL || m.cols() > 0xffffffffLL) {
    throw ValidationError("matrix " + shape_string(m) + " exceeds RDM1 limits");
  }
  std::string out(kRdmMagic);
  out.reserve(kRdmHeaderBytes + 8 * static_cast<std::size_t>(m.size()));
  store_le(out, static_cast<std::uint64_t>(m.rows()), 4);
  store_le(out, static_cast<std::uint64_t>(m.cols()), 4);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    store_le(out, std::bit_cast<std::uint64_t>(m.data()[k]), 8);
  }
  write_file_bytes(path, out);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

DenseMatrix parse_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;

  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) {
      // Blank lines are only tolerated at the end of the document.
      if (!trim(text).empty()) {
        throw CsvParseError("blank line " + std::to_string(line_no) +
                            " inside CSV data");
      }
      break;
    }

    std::size_t row_cols = 0;
    while (true) {
      const std::size_t comma = line.find(',');
      const std::string_view cell = trim(line.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw CsvParseError("non-numeric cell '" + std::string(cell) + "' at line " +
                            std::to_string(line_no) + ", column " +
                            std::to_string(row_cols + 1));
      }
      values.push_back(v);
      ++row_cols;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }

    if (rows == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw CsvParseError("line " + std::to_string(line_no) + " has " +
                          std::to_string(row_cols) + " cells, expected " +
                          std::to_string(cols));
    }
    ++rows;
  }

  if (rows == 0) throw CsvParseError("CSV document has no rows");
  return reshape(values, rows, cols);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_csv(const DenseMatrix& m) {
  std::string out;
  std::array<char, 64> buf{};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out.push_back(',');
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), m(r, c),
                                     std::chars_format::general, 17);
      out.append(buf.data(), res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

DenseMatrix read_csv(const fs::path& path) {
  try {
    return parse_csv(read_file_bytes(path));
  } catch (const CsvParseError& e) {
    throw CsvParseError(path.string() + ": " + e.what());
  }
}

void write_csv(const fs::path& path, const DenseMatrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw ValidationError("cannot write empty matrix " + shape_string(m));
  }
  write_file_bytes(path, format_csv(m));
}

DenseMatrix read_matrix(const fs::path& path) {
  return format_for_path(path) == MatrixFormat::Csv ? read_csv(path) : read_rdm(path);
}

void write_matrix(const fs::path& path, const DenseMatrix& m) {
  if (format_for_path(path) == MatrixFormat::Csv) {
    write_csv(path, m);
  } else {
    write_rdm(path, m);
  }
}

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw IoError("SHA-256 computation failed for '" + path.string() + "'");
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int k = 0; k < len; ++k) hex << std::setw(2) << int{digest[k]};
  return hex.str();
}

void ConfigOverrides::apply_to(SolverConfig& cfg) const {
  if (lambda) cfg.lambda = *lambda;
  if (mu) cfg.mu = *mu;
  if (max_iters) cfg.max_iters = *max_iters;
  if (epsilon) cfg.epsilon = *epsilon;
}

ConfigOverrides parse_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config file must hold a JSON object");

  const auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw ValidationError("config key '" + key + "' must be a number");
    return v.get<double>();
  };

  ConfigOverrides out;
  for (const auto& [key, value] : doc.items()) {
    if (key == "lambda") {
      out.lambda = number(value, key);
    } else if (key == "mu") {
      out.mu = number(value, key);
    } else if (key == "epsilon") {
      out.epsilon = number(value, key);
    } else if (key == "max_iters") {
      if (!value.is_number_integer()) {
        throw ValidationError("config key 'max_iters' must be an integer");
      }
      out.max_iters = value.get<int>();
    } else {
      throw ValidationError("unknown config key '" + key +
                            "' (allowed: lambda, mu, max_iters, epsilon)");
    }
  }
  return out;
}

ConfigOverrides load_config(const fs::path& path) {
  return parse_config(read_file_bytes(path));
}

std::string_view to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::Truncate: return "truncate";
    case AlignMode::MeanPool: return "mean-pool";
    case AlignMode::None: break;
  }
  return "none";
}

AlignMode parse_align_mode(std::string_view name) {
  if (name == "none") return AlignMode::None;
  if (name == "truncate") return AlignMode::Truncate;
  if (name == "mean-pool") return AlignMode::MeanPool;
  throw ValidationError("unknown align mode '" + std::string(name) +
                        "' (expected none, truncate or mean-pool)");
}

DenseMatrix mean_pool_rows(const DenseMatrix& a, Eigen::Index target) {
  const Eigen::Index n = a.rows();
  if (target < 1 || target > n) {
    throw ValidationError("mean_pool_rows: cannot pool " + std::to_string(n) +
                          " rows into " + std::to_string(target));
  }
  DenseMatrix out(target, a.cols());
  for (Eigen::Index j = 0; j < target; ++j) {
    const Eigen::Index begin = j * n / target;
    const Eigen::Index end = (j + 1) * n / target;
    out.row(j) = a.middleRows(begin, end - begin).colwise().mean();
  }
  return out;
}

std::pair<DenseMatrix, DenseMatrix> align_rows(const DenseMatrix& a,
                                               const DenseMatrix& b,
                                               AlignMode mode) {
  if (a.cols() != b.cols()) {
    throw DimensionError("inputs have different column counts: " +
                         shape_string(a) + " vs " + shape_string(b));
  }
  if (a.rows() == b.rows()) return {a, b};

  const Eigen::Index rows = std::min(a.rows(), b.rows());
  switch (mode) {
    case AlignMode::None:
      throw DimensionError("inputs have different row counts: " + shape_string(a) +
                           " vs " + shape_string(b) +
                           " (use --align truncate or --align mean-pool)");
    case AlignMode::Truncate:
      return {a.topRows(rows), b.topRows(rows)};
    case AlignMode::MeanPool:
      return {mean_pool_rows(a, rows), mean_pool_rows(b, rows)};
  }
  return {a, b};
}

DenseMatrix center_columns(const DenseMatrix& a) {
  const Eigen::RowVectorXd mean = a.colwise().mean();
  return a.rowwise() - mean;
}

}  // namespace jointlmr::io
