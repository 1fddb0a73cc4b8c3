#include "fsr/store_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fsr/errors.hpp"

namespace fsr {

namespace {

bool has_magic(const std::string& bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0;
}

// Little-endian reader over an in-memory file.
class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  template <typename T>
  T read_le() {
    need(sizeof(T), "integer");
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  float read_f32() { return std::bit_cast<float>(read_le<std::uint32_t>()); }

  std::string read_bytes(std::size_t n) {
    need(n, "label");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) {
    need(n, "header");
    pos_ += n;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw DataError(fmt::format("{}: truncated file while reading {} at byte {}", source_, what,
                                  pos_));
    }
  }

  const std::string& bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

template <typename T>
void put_le(std::string& out, T v) {
  const auto u = static_cast<std::uint64_t>(v);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

EmbeddingStore parse_binary(const std::string& bytes, const std::string& source) {
  ByteReader in(bytes, source);
  in.skip(4);
  const auto version = in.read_le<std::uint32_t>();
  if (version != kBinaryVersion) {
    throw DataError(fmt::format("{}: unsupported binary version {}", source, version));
  }
  const auto n = in.read_le<std::uint32_t>();
  const auto d = in.read_le<std::uint32_t>();
  if (n == 0 || d == 0) throw DataError(source + ": empty store");
  if (in.remaining() / 4 / d < n) {
    throw DataError(fmt::format("{}: truncated file ({} x {} values declared)", source, n, d));
  }
  Matrix values(n, d);
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < d; ++c) values(r, c) = in.read_f32();
  }
  std::vector<std::string> labels(n);
  for (auto& label : labels) label = in.read_bytes(in.read_le<std::uint16_t>());
  if (in.remaining() != 0) throw DataError(source + ": trailing bytes after labels");

  EmbeddingStore store;
  for (std::uint32_t r = 0; r < n; ++r) {
    const Eigen::RowVectorXd row = values.row(r);
    if (!row.allFinite()) {
      throw DataError(fmt::format("{}: non-finite value in vector {}", source, r));
    }
    store.add(labels[r], std::span<const double>(row.data(), d));
  }
  store.metadata = source;
  return store;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

EmbeddingStore parse_csv(const std::string& bytes, const std::string& source) {
  std::istringstream in(bytes);
  std::string line;
  std::size_t line_no = 0;
  std::size_t d = 0;
  EmbeddingStore store;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (d == 0) {
      if (fields.size() < 2 || fields[0] != "label") {
        throw DataError(fmt::format("{}:{}: expected header 'label,f0,...'", source, line_no));
      }
      d = fields.size() - 1;
      continue;
    }
    if (fields.size() != d + 1) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", source, line_no, d + 1,
                                  fields.size()));
    }
    if (fields[0].empty()) throw DataError(fmt::format("{}:{}: empty label", source, line_no));
    row.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
      std::string_view f = fields[c + 1];
      while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || end != f.data() + f.size()) {
        throw DataError(fmt::format("{}:{}: bad number '{}' in column {}", source, line_no,
                                    fields[c + 1], c + 1));
      }
      if (!std::isfinite(row[c])) {
        throw DataError(fmt::format("{}:{}: non-finite value in column {}", source, line_no, c + 1));
      }
    }
    store.add(std::string(fields[0]), row);
  }
  if (d == 0) throw DataError(source + ": missing header");
  if (store.empty()) throw DataError(source + ": no vectors");
  store.metadata = source;
  return store;
}

}  // namespace

EmbeddingStore parse_store(const std::string& bytes, const std::string& source) {
  return has_magic(bytes) ? parse_binary(bytes, source) : parse_csv(bytes, source);
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open store '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_store(ss.str(), path.string());
}

std::string serialize_store(const EmbeddingStore& store, StoreFormat format) {
  if (store.empty()) throw DataError("cannot save an empty store");
  std::string out;
  if (format == StoreFormat::csv) {
    out += "label";
    for (Eigen::Index c = 0; c < store.dim(); ++c) out += fmt::format(",f{}", c);
    out += '\n';
    for (const auto& cls : store.classes()) {
      if (cls.name.find(',') != std::string::npos || cls.name.find('\n') != std::string::npos) {
        throw DataError("label '" + cls.name + "' cannot be written to CSV");
      }
      for (Eigen::Index r = 0; r < cls.vectors.rows(); ++r) {
        out += cls.name;
        for (Eigen::Index c = 0; c < cls.vectors.cols(); ++c) {
          out += fmt::format(",{:.17g}", cls.vectors(r, c));
        }
        out += '\n';
      }
    }
    return out;
  }
  out.append(kBinaryMagic, 4);
  put_le<std::uint32_t>(out, kBinaryVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.total_vectors()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim()));
  for (const auto& cls : store.classes()) {
    for (Eigen::Index r = 0; r < cls.vectors.rows(); ++r) {
      for (Eigen::Index c = 0; c < cls.vectors.cols(); ++c) {
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(cls.vectors(r, c))));
      }
    }
  }
  for (const auto& cls : store.classes()) {
    if (cls.name.size() > 0xffff) throw DataError("label longer than 65535 bytes");
    for (Eigen::Index r = 0; r < cls.vectors.rows(); ++r) {
      put_le<std::uint16_t>(out, static_cast<std::uint16_t>(cls.name.size()));
      out += cls.name;
    }
  }
  return out;
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                StoreFormat format) {
  const std::string bytes = serialize_store(store, format);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write '" + path.string() + "'");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("write failed for '" + path.string() + "'");
}

StoreFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? StoreFormat::csv : StoreFormat::binary;
}

StoreFormat parse_store_format(const std::string& name) {
  if (name == "csv") return StoreFormat::csv;
  if (name == "binary" || name == "bin" || name == "fse") return StoreFormat::binary;
  throw ConfigError("unknown store format '" + name + "' (csv | binary)");
}

}  // namespace fsr
