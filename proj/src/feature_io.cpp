#include "meshff/feature_io.hpp"

#include "meshff/obj_io.hpp"

namespace meshff {

void ByteWriter::put_matrix(const Matrix& m) {
  put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
  bytes_.append(reinterpret_cast<const char*>(m.data()),
                static_cast<std::size_t>(m.size()) * sizeof(double));
}

Matrix ByteReader::get_matrix() {
  const auto rows = get<std::uint64_t>();
  const auto cols = get<std::uint64_t>();
  if (cols != 0 && rows > (bytes_.size() - pos_) / sizeof(double) / cols) {
    throw DataError("matrix block larger than the container");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  auto raw = get_bytes(rows * cols * sizeof(double));
  std::memcpy(m.data(), raw.data(), raw.size());
  return m;
}

void ByteReader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) throw DataError("truncated binary container");
}

std::string serialize_features(const FeatureTensor& f) {
  ByteWriter w;
  w.put_bytes("MFFT");
  w.put<std::uint32_t>(1);
  w.put<std::uint64_t>(f.edge_count());
  w.put<std::uint64_t>(static_cast<std::uint64_t>(f.channels()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(f.kind));
  w.put_bytes(std::string_view(reinterpret_cast<const char*>(f.values.data()),
                               static_cast<std::size_t>(f.values.size()) * sizeof(double)));
  return w.bytes();
}

FeatureTensor deserialize_features(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4) != "MFFT") throw DataError("not a feature file");
  if (r.get<std::uint32_t>() != 1) throw DataError("unsupported feature file version");
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  const auto tag = r.get<std::uint32_t>();
  if (tag < 1 || tag > 5) throw DataError("unknown feature kind tag " + std::to_string(tag));
  FeatureTensor f;
  f.kind = static_cast<FeatureKind>(tag);
  if (cols != 0 && rows > bytes.size() / cols) throw DataError("feature file header is corrupt");
  f.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  auto raw = r.get_bytes(rows * cols * sizeof(double));
  std::memcpy(f.values.data(), raw.data(), raw.size());
  if (!r.done()) throw DataError("trailing bytes in feature file");
  return f;
}

void write_feature_file(const std::filesystem::path& path, const FeatureTensor& features) {
  write_text_file(path, serialize_features(features));
}

FeatureTensor read_feature_file(const std::filesystem::path& path) {
  return deserialize_features(read_text_file(path));
}

}  // namespace meshff
