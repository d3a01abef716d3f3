#include "meshff/checkpoint.hpp"

#include "meshff/feature_io.hpp"
#include "meshff/obj_io.hpp"

namespace meshff::nn {
namespace {

void put_stats(ByteWriter& w, const std::optional<ChannelStats>& s) {
  w.put<std::uint8_t>(s ? 1 : 0);
  if (!s) return;
  w.put_matrix(Matrix(s->mean));
  w.put_matrix(Matrix(s->std));
}

std::optional<ChannelStats> get_stats(ByteReader& r) {
  if (r.get<std::uint8_t>() == 0) return std::nullopt;
  ChannelStats s;
  s.mean = r.get_matrix();
  s.std = r.get_matrix();
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  w.put_bytes("MFCK");
  w.put<std::uint32_t>(1);
  w.put_string(c.config_text);
  w.put<std::uint64_t>(c.config_hash);
  w.put<std::uint32_t>(c.model.pool_policy() == PoolPolicy::kEnhanced ? 0 : 1);
  w.put<std::uint64_t>(c.model.layers().size());
  for (const LayerSpec& l : c.model.layers()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.type));
    w.put<std::int32_t>(l.in);
    w.put<std::int32_t>(l.out);
    w.put<std::uint64_t>(l.target);
  }
  const Parameters& p = c.model.parameters();
  w.put<std::uint64_t>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    w.put_string(p.names[i]);
    w.put_matrix(p.values[i]);
  }
  put_stats(w, c.input_stats);
  put_stats(w, c.target_stats);
  return w.bytes();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4) != "MFCK") throw DataError("not a checkpoint file");
  if (r.get<std::uint32_t>() != 1) throw DataError("unsupported checkpoint version");
  Checkpoint c;
  c.config_text = r.get_string();
  c.config_hash = r.get<std::uint64_t>();
  const PoolPolicy policy = r.get<std::uint32_t>() == 0 ? PoolPolicy::kEnhanced : PoolPolicy::kBatchLegacy;
  const auto n_layers = r.get<std::uint64_t>();
  if (n_layers > bytes.size()) throw DataError("checkpoint layer count is corrupt");
  std::vector<LayerSpec> layers;
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    LayerSpec l;
    const auto type = r.get<std::uint32_t>();
    if (type < 1 || type > 7) throw DataError("unknown layer type in checkpoint");
    l.type = static_cast<LayerType>(type);
    l.in = r.get<std::int32_t>();
    l.out = r.get<std::int32_t>();
    l.target = r.get<std::uint64_t>();
    layers.push_back(l);
  }
  Parameters params;
  const auto n_params = r.get<std::uint64_t>();
  if (n_params > bytes.size()) throw DataError("checkpoint parameter count is corrupt");
  for (std::uint64_t i = 0; i < n_params; ++i) {
    params.names.push_back(r.get_string());
    params.values.push_back(r.get_matrix());
  }
  try {
    c.model = Model(std::move(layers), policy, std::move(params));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint model is inconsistent: ") + e.what());
  }
  c.input_stats = get_stats(r);
  c.target_stats = get_stats(r);
  if (!r.done()) throw DataError("trailing bytes in checkpoint");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_text_file(path));
}

}  // namespace meshff::nn
