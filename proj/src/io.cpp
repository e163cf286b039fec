#include "zsl/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "zsl/error.hpp"

namespace zsl {

namespace {

static_assert(sizeof(float) == 4);

class ByteReader {
 public:
  ByteReader(std::istream& in, std::uint64_t base_offset) : in_(in), offset_(base_offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

  void read_exact(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw FormatError(std::string("truncated file while reading ") + what + ": expected " +
                            std::to_string(n) + " bytes, got " + std::to_string(got),
                        offset_ + got);
    }
    offset_ += n;
  }

  std::uint32_t read_u32(const char* what) {
    std::array<char, 4> b{};
    read_exact(b.data(), b.size(), what);
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[0])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[3])) << 24;
  }

  std::uint16_t read_u16(const char* what) {
    std::array<char, 2> b{};
    read_exact(b.data(), b.size(), what);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[0]) |
                                      static_cast<unsigned char>(b[1]) << 8);
  }

  void expect_magic(const char (&magic)[4], const char* what) {
    const std::uint64_t at = offset_;
    std::array<char, 4> b{};
    read_exact(b.data(), b.size(), what);
    if (std::memcmp(b.data(), magic, 4) != 0) {
      throw FormatError(std::string("bad magic bytes for ") + what + ", expected \"" +
                            std::string(magic, 4) + "\"",
                        at);
    }
  }

 private:
  std::istream& in_;
  std::uint64_t offset_;
};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
bool parse_number(std::string_view token, T& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

MatrixFormat detect_matrix_format(const std::filesystem::path& path) {
  auto in = open_in(path);
  char b[4] = {};
  in.read(b, 4);
  if (in.gcount() == 4 && std::memcmp(b, kMatrixMagic, 4) == 0) return MatrixFormat::kBinary;
  return MatrixFormat::kCsv;
}

Matrix read_matrix_binary(std::istream& in, std::uint64_t base_offset) {
  ByteReader reader(in, base_offset);
  reader.expect_magic(kMatrixMagic, "matrix");
  const std::uint32_t rows = reader.read_u32("matrix rows");
  const std::uint32_t cols = reader.read_u32("matrix cols");

  // Grow as rows arrive so a corrupt header cannot force a huge allocation.
  const std::uint64_t total = static_cast<std::uint64_t>(rows) * cols;
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(total, 1u << 20)));
  std::vector<char> buffer(static_cast<std::size_t>(cols) * 4);
  for (std::size_t r = 0; r < rows; ++r) {
    reader.read_exact(buffer.data(), buffer.size(), "matrix payload");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto* p = reinterpret_cast<const unsigned char*>(buffer.data() + 4 * c);
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 static_cast<std::uint32_t>(p[1]) << 8 |
                                 static_cast<std::uint32_t>(p[2]) << 16 |
                                 static_cast<std::uint32_t>(p[3]) << 24;
      const double v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw DataError("non-finite matrix entry", r);
      data.push_back(v);
    }
  }
  return Matrix(rows, cols, std::move(data));
}

void write_matrix_binary(std::ostream& out, const Matrix& m) {
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw ShapeError("matrix " + m.shape_string() + " too large for the binary format");
  }
  out.write(kMatrixMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  std::vector<char> buffer(m.cols() * 4);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(row[c]));
      for (int k = 0; k < 4; ++k) buffer[4 * c + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    const std::string_view content = trim(line);
    if (content.empty()) continue;

    std::size_t fields = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      const std::string_view token = trim(std::string_view(line).substr(pos, end - pos));
      double v = 0.0;
      if (!parse_number(token, v)) {
        throw FormatError("invalid number '" + std::string(token) + "' in CSV matrix",
                          line_offset + pos);
      }
      if (!std::isfinite(v)) throw DataError("non-finite matrix entry", rows);
      values.push_back(v);
      ++fields;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw FormatError("CSV row has " + std::to_string(fields) + " fields, expected " +
                            std::to_string(cols),
                        line_offset);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError("CSV matrix file contains no rows", 0);
  return Matrix(rows, cols, std::move(values));
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  std::array<char, 32> buf{};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out.put(',');
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), row[c]);
      out.write(buf.data(), ptr - buf.data());
    }
    out.put('\n');
  }
}

Matrix load_features(const std::filesystem::path& path, std::optional<MatrixFormat> format) {
  const MatrixFormat fmt = format.value_or(detect_matrix_format(path));
  auto in = open_in(path);
  if (fmt == MatrixFormat::kBinary) {
    Matrix m = read_matrix_binary(in);
    if (in.peek() != std::char_traits<char>::eof()) {
      const auto expected = 12 + 4 * static_cast<std::uint64_t>(m.size());
      throw FormatError("trailing bytes after matrix payload in '" + path.string() + "'",
                        expected);
    }
    return m;
  }
  return read_matrix_csv(in);
}

Matrix load_attributes(const std::filesystem::path& path) { return load_features(path); }

std::vector<ClassId> parse_labels(std::istream& in) {
  std::vector<ClassId> labels;
  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    const std::string_view token = trim(line);
    if (token.empty()) continue;
    long long v = 0;
    if (!parse_number(token, v)) {
      throw FormatError("invalid label '" + std::string(token) + "'", line_offset);
    }
    if (v < 0 || v > INT32_MAX) {
      throw DataError("label " + std::to_string(v) + " is not a valid class id", labels.size());
    }
    labels.push_back(static_cast<ClassId>(v));
  }
  return labels;
}

std::vector<ClassId> load_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_labels(in);
}

ClassSplit parse_split(std::istream& in) {
  ClassSplit split;
  bool have_seen = false;
  bool have_unseen = false;
  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    std::istringstream tokens{std::string(trim(line))};
    std::string key;
    if (!(tokens >> key)) continue;
    std::vector<ClassId>* target = nullptr;
    if (key == "seen" && !have_seen) {
      target = &split.seen;
      have_seen = true;
    } else if (key == "unseen" && !have_unseen) {
      target = &split.unseen;
      have_unseen = true;
    } else {
      throw FormatError("unexpected split line key '" + key + "'", line_offset);
    }
    std::string tok;
    while (tokens >> tok) {
      long long v = 0;
      if (!parse_number(std::string_view(tok), v) || v < 0 || v > INT32_MAX) {
        throw FormatError("invalid class id '" + tok + "' in split file", line_offset);
      }
      target->push_back(static_cast<ClassId>(v));
    }
  }
  if (!have_seen || !have_unseen) {
    throw FormatError("split file needs both a 'seen' and an 'unseen' line", offset);
  }
  for (auto* ids : {&split.seen, &split.unseen}) {
    std::ranges::sort(*ids);
    if (std::ranges::adjacent_find(*ids) != ids->end()) {
      throw InputError("split file lists a class id twice on one line");
    }
  }
  for (ClassId c : split.seen) {
    if (std::ranges::binary_search(split.unseen, c)) {
      throw InputError("class " + std::to_string(c) + " appears in both seen and unseen sets");
    }
  }
  return split;
}

ClassSplit load_split(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_split(in);
}

void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format) {
  auto out = open_out(path);
  if (format == MatrixFormat::kBinary) {
    write_matrix_binary(out, m);
  } else {
    write_matrix_csv(out, m);
  }
  finish_write(out, path);
}

void save_labels(const std::filesystem::path& path, std::span<const ClassId> labels) {
  auto out = open_out(path);
  for (ClassId c : labels) out << c << '\n';
  finish_write(out, path);
}

void save_split(const std::filesystem::path& path, const ClassSplit& split) {
  auto out = open_out(path);
  out << "seen";
  for (ClassId c : split.seen) out << ' ' << c;
  out << "\nunseen";
  for (ClassId c : split.unseen) out << ' ' << c;
  out << '\n';
  finish_write(out, path);
}

ZslDataset load_dataset(const DatasetPaths& paths) {
  ZslDataset ds;
  ds.features = load_features(paths.features);
  ds.labels = load_labels(paths.labels);
  ds.attributes = load_attributes(paths.attributes);
  ClassSplit split = load_split(paths.split);
  ds.seen_classes = std::move(split.seen);
  ds.unseen_classes = std::move(split.unseen);
  ds.validate();
  return ds;
}

void write_checkpoint(std::ostream& out, std::span<const NamedMatrix> entries) {
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.name.size() > UINT16_MAX) throw InputError("checkpoint entry name too long");
    put_u16(out, static_cast<std::uint16_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_matrix_binary(out, e.value);
  }
}

std::vector<NamedMatrix> read_checkpoint(std::istream& in) {
  ByteReader reader(in, 0);
  reader.expect_magic(kCheckpointMagic, "checkpoint");
  const std::uint64_t version_at = reader.offset();
  const std::uint32_t version = reader.read_u32("checkpoint version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")",
                      version_at);
  }
  const std::uint32_t count = reader.read_u32("checkpoint entry count");
  std::vector<NamedMatrix> entries;
  std::uint64_t offset = reader.offset();
  for (std::uint32_t i = 0; i < count; ++i) {
    ByteReader header(in, offset);
    const std::uint16_t len = header.read_u16("entry name length");
    std::string name(len, '\0');
    header.read_exact(name.data(), len, "entry name");
    Matrix value = read_matrix_binary(in, header.offset());
    offset = header.offset() + 12 + 4 * static_cast<std::uint64_t>(value.size());
    entries.push_back({std::move(name), std::move(value)});
  }
  return entries;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedMatrix> entries) {
  auto out = open_out(path);
  write_checkpoint(out, entries);
  finish_write(out, path);
}

std::vector<NamedMatrix> load_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_checkpoint(in);
}

const Matrix& find_entry(std::span<const NamedMatrix> entries, const std::string& name) {
  for (const auto& e : entries) {
    if (e.name == name) return e.value;
  }
  throw FormatError("checkpoint has no entry named '" + name + "'", 0);
}

void round_to_float(Matrix& m) {
  for (double& v : m.data()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace zsl
