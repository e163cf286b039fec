#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsl/dataset.hpp"
#include "zsl/matrix.hpp"

namespace zsl {

// Binary matrix layout ("ZSLM"):
//   bytes 0..3   magic "ZSLM"
//   bytes 4..7   rows, u32 little-endian
//   bytes 8..11  cols, u32 little-endian
//   then rows*cols f32 little-endian values, row-major.
// Values are widened to double on read and narrowed to float on write.
inline constexpr char kMatrixMagic[4] = {'Z', 'S', 'L', 'M'};
inline constexpr char kCheckpointMagic[4] = {'Z', 'S', 'L', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class MatrixFormat { kCsv, kBinary };

/// kBinary if the file starts with the ZSLM magic, otherwise kCsv.
MatrixFormat detect_matrix_format(const std::filesystem::path& path);

/// `base_offset` is added to reported byte offsets (for embedded bodies).
Matrix read_matrix_binary(std::istream& in, std::uint64_t base_offset = 0);
void write_matrix_binary(std::ostream& out, const Matrix& m);

Matrix read_matrix_csv(std::istream& in);
/// Shortest round-trip decimal representation of every value.
void write_matrix_csv(std::ostream& out, const Matrix& m);

Matrix load_features(const std::filesystem::path& path,
                     std::optional<MatrixFormat> format = std::nullopt);
Matrix load_attributes(const std::filesystem::path& path);
std::vector<ClassId> load_labels(const std::filesystem::path& path);

struct ClassSplit {
  std::vector<ClassId> seen;
  std::vector<ClassId> unseen;
};

/// Two lines, "seen <ids...>" and "unseen <ids...>". Overlap is an error.
ClassSplit load_split(const std::filesystem::path& path);
ClassSplit parse_split(std::istream& in);
std::vector<ClassId> parse_labels(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format);
void save_labels(const std::filesystem::path& path, std::span<const ClassId> labels);
void save_split(const std::filesystem::path& path, const ClassSplit& split);

struct DatasetPaths {
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path attributes;
  std::filesystem::path split;
};

/// Loads and validates; never returns a partially valid dataset.
ZslDataset load_dataset(const DatasetPaths& paths);

/// Checkpoint layout ("ZSLC"): magic, u32 version, u32 entry count, then per
/// entry a u16 name length, the UTF-8 name, and a ZSLM matrix.
struct NamedMatrix {
  std::string name;
  Matrix value;
};

void write_checkpoint(std::ostream& out, std::span<const NamedMatrix> entries);
std::vector<NamedMatrix> read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, std::span<const NamedMatrix> entries);
std::vector<NamedMatrix> load_checkpoint(const std::filesystem::path& path);

/// Entry by name; FormatError if absent.
const Matrix& find_entry(std::span<const NamedMatrix> entries, const std::string& name);

/// Rounds every entry to the nearest float, the precision the matrix format stores.
void round_to_float(Matrix& m);

}  // namespace zsl
