#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "meshff/features.hpp"

namespace meshff {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order and assume little-endian");

// Append-only byte buffer and cursor used by the binary containers.
class ByteWriter {
 public:
  template <typename T>
  void put(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.append(p, sizeof(T));
  }
  void put_bytes(std::string_view s) { bytes_.append(s); }
  void put_string(std::string_view s) {
    put<std::uint64_t>(s.size());
    bytes_.append(s);
  }
  void put_matrix(const Matrix& m);
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string get_string() { return std::string(get_bytes(get<std::uint64_t>())); }
  Matrix get_matrix();
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

/// Feature container layout (little-endian):
///   char[4] "MFFT", u32 version (1), u64 edge count, u64 channel count,
///   u32 kind tag (FeatureKind value), then edges*channels f64 row-major.
std::string serialize_features(const FeatureTensor& features);
FeatureTensor deserialize_features(std::string_view bytes);

void write_feature_file(const std::filesystem::path& path, const FeatureTensor& features);
FeatureTensor read_feature_file(const std::filesystem::path& path);

}  // namespace meshff
