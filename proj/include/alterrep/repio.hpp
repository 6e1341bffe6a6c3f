#pragma once

// Binary interchange files for representation matrices (RepFile, magic
// "AREP") and concept subspaces (SubspaceFile, magic "ASUB"). All integers
// and floats are little-endian; every file ends with a CRC-32 of the bytes
// before it.
//
// RepFile
//   0   char[4] "AREP"
//   4   u32     format version (1)
//   8   u32     dtype: 1 = f32, 2 = f64
//   12  u32     flags: bit 0 label block present, bit 1 lossy (f64 -> f32)
//   16  u64     n
//   24  u64     d
//   32  n*d values, row-major
//       n label bytes in {0, 1, 255 = unlabeled} when flag bit 0 is set
//       u32     CRC-32
//
// SubspaceFile
//   0   char[4] "ASUB"
//   4   u32     format version (1)
//   8   u32     dtype (2, f64)
//   12  u32     source: 0 trained, 1 random
//   16  u64     m
//   24  u64     d
//   32  u32     concept name length L, then L bytes UTF-8
//       u64     accuracy count A (m for trained subspaces, 0 for random)
//       A f64   per-iteration accuracy
//       m*d f64 basis rows
//       u32     CRC-32

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/crc.hpp>

#include "alterrep/error.hpp"
#include "alterrep/inlp.hpp"
#include "alterrep/probe.hpp"
#include "alterrep/subspace.hpp"

namespace alterrep::io {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint8_t kUnlabeled = 255;
/// Orthonormality tolerance applied when loading a SubspaceFile.
inline constexpr double kLoadTolerance = 1e-6;

enum class Dtype : std::uint32_t { f32 = 1, f64 = 2 };

inline std::size_t dtype_size(Dtype t) { return t == Dtype::f32 ? 4 : 8; }

struct RepData {
  RowMatrix matrix;
  std::optional<std::vector<std::uint8_t>> labels;
  Dtype dtype = Dtype::f64;
  bool lossy = false;
};

struct RepWriteOptions {
  Dtype dtype = Dtype::f64;
  /// f32 output discards precision and must be requested explicitly.
  bool allow_lossy = false;
};

namespace detail {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }

  template <typename T>
  void le(T value) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }

  void crc() {
    boost::crc_32_type c;
    c.process_bytes(buf_.data(), buf_.size());
    le(static_cast<std::uint32_t>(c.checksum()));
  }

  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  void need(std::uint64_t n, std::string_view field) const {
    if (n > data_.size() - pos_) {
      fail(ErrorCode::format, what_ + ": truncated " + std::string(field) + ": expected " + std::to_string(n) +
                                  " bytes at offset " + std::to_string(pos_) + ", only " +
                                  std::to_string(data_.size() - pos_) + " available");
    }
  }

  template <typename T>
  T le(std::string_view field) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    need(sizeof(U), field);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string_view take(std::uint64_t n, std::string_view field) {
    need(n, field);
    auto out = data_.substr(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return out;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  const std::string& what() const { return what_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

inline std::uint64_t checked_product(std::uint64_t a, std::uint64_t b, const std::string& what) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) fail(ErrorCode::format, what + ": dimension overflow");
  return out;
}

/// Verifies the CRC trailer. Callers check the header and the total size
/// first, so truncation is reported with byte counts rather than as a
/// checksum mismatch.
inline void check_trailer(std::string_view data, const std::string& what) {
  require(data.size() >= 4, ErrorCode::format,
          what + ": truncated file: expected at least 4 bytes, got " + std::to_string(data.size()));
  const std::string_view body = data.substr(0, data.size() - 4);
  Reader tail(data.substr(data.size() - 4), what);
  const auto stored = tail.le<std::uint32_t>("checksum");
  boost::crc_32_type c;
  c.process_bytes(body.data(), body.size());
  require(stored == c.checksum(), ErrorCode::format, what + ": checksum mismatch");
}

inline void check_magic(Reader& r, std::string_view magic) {
  const auto got = r.take(4, "magic");
  require(got == magic, ErrorCode::format, r.what() + ": bad magic (expected \"" + std::string(magic) + "\")");
  const auto version = r.le<std::uint32_t>("version");
  require(version == kFormatVersion, ErrorCode::format,
          r.what() + ": unsupported format version " + std::to_string(version));
}

inline void expect_exact(const Reader& r, std::uint64_t expected, std::string_view field) {
  if (r.remaining() != expected) {
    fail(ErrorCode::format, r.what() + ": " + (r.remaining() < expected ? "truncated " : "oversized ") +
                                std::string(field) + ": expected " + std::to_string(expected) +
                                " bytes after offset " + std::to_string(r.pos()) + ", got " +
                                std::to_string(r.remaining()));
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::io, "write failed for '" + path.string() + "'");
}

}  // namespace detail

inline std::string encode_rep(const RowMatrix& matrix, const std::optional<std::vector<std::uint8_t>>& labels,
                              const RepWriteOptions& options = {}) {
  require(options.dtype == Dtype::f64 || options.allow_lossy, ErrorCode::invalid_argument,
          "f32 output is lossy; request it explicitly");
  require_finite(matrix, "RepFile payload");
  if (labels) {
    require_same_dim(matrix.rows(), static_cast<long>(labels->size()), "RepFile labels");
    for (auto l : *labels) {
      require(l == 0 || l == 1 || l == kUnlabeled, ErrorCode::invalid_argument, "labels must be 0, 1 or 255");
    }
  }
  detail::Writer w;
  w.bytes("AREP", 4);
  w.le(kFormatVersion);
  w.le(static_cast<std::uint32_t>(options.dtype));
  std::uint32_t flags = labels ? 1u : 0u;
  if (options.dtype == Dtype::f32) flags |= 2u;
  w.le(flags);
  w.le(static_cast<std::uint64_t>(matrix.rows()));
  w.le(static_cast<std::uint64_t>(matrix.cols()));
  for (long i = 0; i < matrix.rows(); ++i) {
    for (long j = 0; j < matrix.cols(); ++j) {
      if (options.dtype == Dtype::f32) {
        w.le(static_cast<float>(matrix(i, j)));
      } else {
        w.le(matrix(i, j));
      }
    }
  }
  if (labels) w.bytes(labels->data(), labels->size());
  w.crc();
  return w.take();
}

inline RepData decode_rep(std::string_view data, const std::string& what = "RepFile") {
  detail::Reader r(data, what);
  detail::check_magic(r, "AREP");
  const auto dtype = r.le<std::uint32_t>("dtype");
  require(dtype == 1 || dtype == 2, ErrorCode::format, what + ": unknown dtype " + std::to_string(dtype));
  const auto flags = r.le<std::uint32_t>("flags");
  require((flags & ~3u) == 0, ErrorCode::format, what + ": unknown flag bits");
  const auto n = r.le<std::uint64_t>("row count");
  const auto d = r.le<std::uint64_t>("dimension");
  const bool has_labels = (flags & 1u) != 0;

  RepData out;
  out.dtype = static_cast<Dtype>(dtype);
  out.lossy = (flags & 2u) != 0;
  const std::uint64_t cells = detail::checked_product(n, d, what);
  std::uint64_t payload = detail::checked_product(cells, dtype_size(out.dtype), what);
  std::uint64_t expected = payload;
  if (has_labels && __builtin_add_overflow(expected, n, &expected)) fail(ErrorCode::format, what + ": dimension overflow");
  if (__builtin_add_overflow(expected, 4, &expected)) fail(ErrorCode::format, what + ": dimension overflow");
  detail::expect_exact(r, expected, "payload and checksum");
  detail::check_trailer(data, what);
  require(n <= static_cast<std::uint64_t>(std::numeric_limits<long>::max()) &&
              d <= static_cast<std::uint64_t>(std::numeric_limits<long>::max()),
          ErrorCode::format, what + ": dimension overflow");

  out.matrix.resize(static_cast<long>(n), static_cast<long>(d));
  for (long i = 0; i < out.matrix.rows(); ++i) {
    for (long j = 0; j < out.matrix.cols(); ++j) {
      out.matrix(i, j) = out.dtype == Dtype::f32 ? static_cast<double>(r.le<float>("payload")) : r.le<double>("payload");
    }
  }
  require_finite(out.matrix, what + " payload");
  if (has_labels) {
    const auto block = r.take(n, "label block");
    out.labels.emplace(block.begin(), block.end());
    for (auto l : *out.labels) {
      require(l == 0 || l == 1 || l == kUnlabeled, ErrorCode::format, what + ": label byte outside {0, 1, 255}");
    }
  }
  return out;
}

inline void write_rep(const std::filesystem::path& path, const RowMatrix& matrix,
                      const std::optional<std::vector<std::uint8_t>>& labels = std::nullopt,
                      const RepWriteOptions& options = {}) {
  detail::write_file(path, encode_rep(matrix, labels, options));
}

inline RepData read_rep(const std::filesystem::path& path) {
  return decode_rep(detail::read_file(path), "RepFile '" + path.string() + "'");
}

/// Rows carrying a 0/1 label, as a probe training set.
inline LabeledSet labeled_rows(const RepData& rep) {
  require(rep.labels.has_value(), ErrorCode::invalid_argument, "RepFile has no label block");
  std::vector<long> keep;
  for (std::size_t i = 0; i < rep.labels->size(); ++i) {
    if ((*rep.labels)[i] != kUnlabeled) keep.push_back(static_cast<long>(i));
  }
  LabeledSet out;
  out.representations.resize(static_cast<long>(keep.size()), rep.matrix.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.representations.row(static_cast<long>(k)) = rep.matrix.row(keep[k]);
    out.labels.push_back((*rep.labels)[static_cast<std::size_t>(keep[k])]);
  }
  return out;
}

inline std::string encode_subspace(const ConceptSubspace& s) {
  require(s.per_iteration_accuracy.empty() || static_cast<long>(s.per_iteration_accuracy.size()) == s.m(),
          ErrorCode::invalid_argument, "subspace accuracy list must be empty or have m entries");
  require(s.concept_name.size() <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::invalid_argument,
          "concept name too long");
  detail::Writer w;
  w.bytes("ASUB", 4);
  w.le(kFormatVersion);
  w.le(static_cast<std::uint32_t>(Dtype::f64));
  w.le(static_cast<std::uint32_t>(s.source));
  w.le(static_cast<std::uint64_t>(s.m()));
  w.le(static_cast<std::uint64_t>(s.dim()));
  w.le(static_cast<std::uint32_t>(s.concept_name.size()));
  w.bytes(s.concept_name.data(), s.concept_name.size());
  w.le(static_cast<std::uint64_t>(s.per_iteration_accuracy.size()));
  for (double a : s.per_iteration_accuracy) w.le(a);
  const RowMatrix& rows = s.basis.rows();
  for (long i = 0; i < rows.rows(); ++i) {
    for (long j = 0; j < rows.cols(); ++j) w.le(rows(i, j));
  }
  w.crc();
  return w.take();
}

inline ConceptSubspace decode_subspace(std::string_view data, const std::string& what = "SubspaceFile") {
  detail::Reader r(data, what);
  detail::check_magic(r, "ASUB");
  const auto dtype = r.le<std::uint32_t>("dtype");
  require(dtype == static_cast<std::uint32_t>(Dtype::f64), ErrorCode::format,
          what + ": subspace payload must be f64 (dtype 2), got " + std::to_string(dtype));
  const auto source = r.le<std::uint32_t>("source");
  require(source <= 1, ErrorCode::format, what + ": unknown subspace source " + std::to_string(source));
  const auto m = r.le<std::uint64_t>("m");
  const auto d = r.le<std::uint64_t>("dimension");
  require(d >= 1 && m >= 1 && m <= d, ErrorCode::format,
          what + ": invalid shape m=" + std::to_string(m) + ", d=" + std::to_string(d));
  const auto name_len = r.le<std::uint32_t>("name length");
  ConceptSubspace out;
  out.concept_name = std::string(r.take(name_len, "concept name"));
  out.source = static_cast<SubspaceSource>(source);
  const auto acc_count = r.le<std::uint64_t>("accuracy count");
  require(acc_count == 0 || acc_count == m, ErrorCode::format,
          what + ": accuracy count " + std::to_string(acc_count) + " does not match m=" + std::to_string(m));
  const std::uint64_t expected =
      detail::checked_product(acc_count + detail::checked_product(m, d, what), 8, what) + 4;
  detail::expect_exact(r, expected, "accuracy, basis and checksum");
  detail::check_trailer(data, what);
  for (std::uint64_t i = 0; i < acc_count; ++i) out.per_iteration_accuracy.push_back(r.le<double>("accuracy"));

  RowMatrix rows(static_cast<long>(m), static_cast<long>(d));
  for (long i = 0; i < rows.rows(); ++i) {
    for (long j = 0; j < rows.cols(); ++j) rows(i, j) = r.le<double>("basis");
  }
  try {
    out.basis = OrthonormalBasis::from_rows(rows, kLoadTolerance);
  } catch (const Error& e) {
    fail(ErrorCode::format, what + ": " + e.what());
  }
  return out;
}

inline void write_subspace(const std::filesystem::path& path, const ConceptSubspace& s) {
  detail::write_file(path, encode_subspace(s));
}

inline ConceptSubspace read_subspace(const std::filesystem::path& path) {
  return decode_subspace(detail::read_file(path), "SubspaceFile '" + path.string() + "'");
}

}  // namespace alterrep::io
