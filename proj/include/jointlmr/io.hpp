#pragma once

#include "jointlmr/decomposition.hpp"
#include "jointlmr/matrix.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace jointlmr::io {

// RDM1 layout, all little-endian:
//   bytes 0..3   "RDM1"
//   bytes 4..7   rows (uint32, >= 1)
//   bytes 8..11  cols (uint32, >= 1)
//   then rows*cols IEEE-754 binary64 values, row-major.
// The file is exactly 12 + 8*rows*cols bytes long.
inline constexpr std::string_view kRdmMagic = "RDM1";
inline constexpr std::size_t kRdmHeaderBytes = 12;

enum class MatrixFormat { Rdm, Csv };

std::string_view to_string(MatrixFormat f);
MatrixFormat parse_matrix_format(std::string_view name);
std::string_view file_extension(MatrixFormat f);

/// Csv for paths ending in ".csv", Rdm otherwise.
MatrixFormat format_for_path(const std::filesystem::path& path);

DenseMatrix read_rdm(const std::filesystem::path& path);
void write_rdm(const std::filesystem::path& path, const DenseMatrix& m);

/// Headerless, comma-separated, one row per line.
DenseMatrix read_csv(const std::filesystem::path& path);
/// Values rendered with 17 significant digits so they parse back exactly.
void write_csv(const std::filesystem::path& path, const DenseMatrix& m);

DenseMatrix parse_csv(std::string_view text);
std::string format_csv(const DenseMatrix& m);

/// Dispatches on format_for_path.
DenseMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Solver keys read from a config file; absent keys stay unset.
struct ConfigOverrides {
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<int> max_iters;
  std::optional<double> epsilon;

  void apply_to(SolverConfig& cfg) const;
};

/// Flat JSON object with keys drawn from {lambda, mu, max_iters, epsilon}.
/// Unknown keys or wrongly typed values raise ValidationError.
ConfigOverrides parse_config(std::string_view text);
ConfigOverrides load_config(const std::filesystem::path& path);

enum class AlignMode { None, Truncate, MeanPool };

std::string_view to_string(AlignMode mode);
AlignMode parse_align_mode(std::string_view name);

/// Brings two row-sequences to a common row count min(N, M). Columns must
/// already agree. None rejects unequal row counts.
std::pair<DenseMatrix, DenseMatrix> align_rows(const DenseMatrix& a,
                                               const DenseMatrix& b,
                                               AlignMode mode);

/// Pools rows into `target` contiguous groups; group j averages rows
/// [floor(j*N/target), floor((j+1)*N/target)).
DenseMatrix mean_pool_rows(const DenseMatrix& a, Eigen::Index target);

/// Subtracts each column's mean.
DenseMatrix center_columns(const DenseMatrix& a);

}  // namespace jointlmr::io
