#include "meshff/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "meshff/hash.hpp"

namespace meshff {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value) {
  throw std::invalid_argument("bad value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad(key, value);
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view value) {
  std::vector<T> out;
  if (value.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = value.find(',', start);
    out.push_back(parse_number<T>(key, trim(value.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kClassification: return "classification";
    case Task::kSegmentation: return "segmentation";
    case Task::kDenoising: return "denoising";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  if (name == "classification") return Task::kClassification;
  if (name == "segmentation") return Task::kSegmentation;
  if (name == "denoising") return Task::kDenoising;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

void set_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "task") {
    c.task = parse_task(value);
  } else if (key == "features") {
    c.features = parse_feature_kind(value);
  } else if (key == "channel_mask") {
    if (!value.empty()) parse_channel_mask(value);
    c.channel_mask = std::string(value);
  } else if (key == "signed_dihedral") {
    c.signed_dihedral = parse_bool(key, value);
  } else if (key == "target") {
    c.target = parse_feature_kind(value);
  } else if (key == "noise_variance") {
    c.noise_variance = parse_number<double>(key, value);
  } else if (key == "pool_policy") {
    c.pool_policy = parse_pool_policy(value);
  } else if (key == "conv_widths") {
    c.conv_widths = parse_list<int>(key, value);
  } else if (key == "pool_targets") {
    c.pool_targets = parse_list<std::uint64_t>(key, value);
  } else if (key == "optimizer") {
    c.optimizer = nn::parse_optimizer(value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "lr_decay") {
    c.lr_decay = parse_number<double>(key, value);
  } else if (key == "lr_decay_at") {
    c.lr_decay_at = parse_number<double>(key, value);
  } else if (key == "momentum") {
    c.momentum = parse_number<double>(key, value);
  } else if (key == "epochs") {
    c.epochs = parse_number<int>(key, value);
  } else if (key == "batch") {
    c.batch = parse_number<int>(key, value);
  } else if (key == "rotate_train") {
    c.rotate_train = parse_bool(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<int>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (conv_widths.empty()) throw std::invalid_argument("conv_widths must not be empty");
  for (int w : conv_widths) {
    if (w < 1) throw std::invalid_argument("conv widths must be positive");
  }
  if (pool_targets.size() > conv_widths.size()) {
    throw std::invalid_argument("at most one pool target per conv block");
  }
  for (std::size_t i = 0; i < pool_targets.size(); ++i) {
    if (pool_targets[i] == 0) throw std::invalid_argument("pool targets must be positive");
    if (i > 0 && pool_targets[i] >= pool_targets[i - 1]) {
      throw std::invalid_argument("pool targets must be strictly decreasing");
    }
  }
  if (!channel_mask.empty()) {
    if (features != FeatureKind::kMeshCnn5) throw std::invalid_argument("channel_mask applies to meshcnn5 only");
    if (channel_mask.size() != 5) throw std::invalid_argument("channel_mask needs 5 bits");
  }
  if (task == Task::kDenoising && target != FeatureKind::kFundamentalForms && target != FeatureKind::kXyz) {
    throw std::invalid_argument("denoising target must be ff or xyz");
  }
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise_variance must be non-negative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (batch < 1) throw std::invalid_argument("batch must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  if (lr_decay_at < 0.0 || lr_decay_at > 1.0) throw std::invalid_argument("lr_decay_at must be in [0, 1]");
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  auto line = [&](std::string_view k, const std::string& v) { s += std::string(k) + " = " + v + "\n"; };
  line("task", std::string(to_string(task)));
  line("features", std::string(to_string(features)));
  line("channel_mask", channel_mask);
  line("signed_dihedral", signed_dihedral ? "true" : "false");
  line("target", std::string(to_string(target)));
  line("noise_variance", fmt(noise_variance));
  line("pool_policy", std::string(to_string(pool_policy)));
  line("conv_widths", join(conv_widths));
  line("pool_targets", join(pool_targets));
  line("optimizer", std::string(nn::to_string(optimizer)));
  line("learning_rate", fmt(learning_rate));
  line("lr_decay", fmt(lr_decay));
  line("lr_decay_at", fmt(lr_decay_at));
  line("momentum", fmt(momentum));
  line("epochs", std::to_string(epochs));
  line("batch", std::to_string(batch));
  line("rotate_train", rotate_train ? "true" : "false");
  line("seed", std::to_string(seed));
  return s;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(to_text()); }

}  // namespace meshff
