#include "meshff/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "json.hpp"

#include "meshff/hash.hpp"
#include "meshff/optimizer.hpp"
#include "meshff/transform.hpp"

namespace meshff::pipe {
namespace {

using nn::Checkpoint;
using nn::Model;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

FeatureOptions feature_options(const ExperimentConfig& c) { return {c.signed_dihedral}; }

struct Sample {
  Mesh mesh;   // network input geometry
  Mesh clean;  // denoising only
  std::shared_ptr<const EdgeTopology> topology;
  Matrix raw_input;
  Matrix input;
  Matrix raw_target;
  Matrix target;
  int label = 0;
  std::vector<int> edge_labels;
};

ExperimentConfig checkpoint_config(const Checkpoint& ckpt, Task expected) {
  ExperimentConfig c;
  try {
    c = parse_config(ckpt.config_text);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint carries an invalid config: ") + e.what());
  }
  if (c.task != expected) {
    throw TaskMismatchError("checkpoint was trained for " + std::string(to_string(c.task)) + ", not " +
                            std::string(to_string(expected)));
  }
  if (!ckpt.input_stats) throw DataError("checkpoint has no input channel statistics");
  return c;
}

Matrix predict(const Checkpoint& ckpt, const ExperimentConfig& c, const EdgeTopology& topo, const Mesh& mesh) {
  const Matrix x = normalize(input_features(c, topo, mesh), *ckpt.input_stats);
  return ckpt.model.forward(x, topo).output();
}

Mesh rotated(const Mesh& m, std::uint64_t seed) { return data::augment(m, {true, 0.0, seed}); }

std::vector<double> edge_lengths(const EdgeTopology& topo, const Mesh& mesh) {
  std::vector<double> out;
  out.reserve(topo.edge_count());
  for (const auto& [p, q] : topo.edges) out.push_back((mesh.vertices[p] - mesh.vertices[q]).norm());
  return out;
}

double mean_squared(const Matrix& a, const Matrix& b) {
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace

TrainingDivergedError::TrainingDivergedError(int epoch, std::uint64_t step, const std::string& what)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + ", step " +
                         std::to_string(step) + ": " + what),
      epoch_(epoch),
      step_(step) {}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t t = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(t);
  auto run_block = [&](std::size_t b) {
    try {
      for (std::size_t i = b * n / t; i < (b + 1) * n / t; ++i) fn(i);
    } catch (...) {
      errors[b] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t b = 1; b < t; ++b) pool.emplace_back(run_block, b);
  run_block(0);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Matrix input_features(const ExperimentConfig& config, const EdgeTopology& topology, const Mesh& mesh) {
  FeatureTensor f = compute_features(topology, mesh, config.features, feature_options(config));
  if (!config.channel_mask.empty()) apply_channel_mask(f.values, parse_channel_mask(config.channel_mask));
  return std::move(f.values);
}

nn::Model build_model(const ExperimentConfig& config, int output_channels) {
  using nn::LayerSpec;
  config.validate();
  std::vector<LayerSpec> layers;
  int prev = channel_count(config.features);
  for (std::size_t i = 0; i < config.conv_widths.size(); ++i) {
    const int w = config.conv_widths[i];
    layers.push_back(LayerSpec::conv(prev, w));
    layers.push_back(LayerSpec::norm(w));
    layers.push_back(LayerSpec::relu());
    if (i < config.pool_targets.size()) layers.push_back(LayerSpec::pool(config.pool_targets[i]));
    prev = w;
  }
  if (config.task == Task::kClassification) {
    layers.push_back(LayerSpec::global_average());
    layers.push_back(LayerSpec::dense(prev, output_channels));
  } else {
    for (std::size_t i = 0; i < config.pool_targets.size(); ++i) {
      layers.push_back(LayerSpec::unpool());
      layers.push_back(LayerSpec::conv(prev, prev));
      layers.push_back(LayerSpec::norm(prev));
      layers.push_back(LayerSpec::relu());
    }
    layers.push_back(LayerSpec::conv(prev, output_channels));
  }
  return Model(std::move(layers), config.pool_policy, data::derive_seed(config.seed, 0x6d6f64656cULL));
}

std::vector<DenoisePair> make_denoise_pairs(const data::Dataset& dataset, double variance, std::uint64_t seed) {
  std::vector<DenoisePair> out;
  out.reserve(dataset.size());
  for (const data::LabeledMesh& s : dataset) {
    DenoisePair p;
    p.id = s.id;
    p.clean = s.mesh;
    p.noisy = data::add_vertex_noise(s.mesh, variance, data::derive_seed(seed, fnv1a64(s.id), 0x6e6f697365ULL));
    p.split = s.split;
    out.push_back(std::move(p));
  }
  return out;
}

TrainResult train(const ExperimentConfig& config, const data::Dataset& dataset,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const data::Dataset train_set = data::select(dataset, Split::kTrain);
  if (train_set.empty()) throw DataError("dataset has no training samples");
  const Task task = config.task;
  const FeatureOptions opts = feature_options(config);

  std::vector<Sample> samples(train_set.size());
  std::vector<DenoisePair> pairs;
  if (task == Task::kDenoising) pairs = make_denoise_pairs(train_set, config.noise_variance, config.seed);
  parallel_for(samples.size(), config.threads, [&](std::size_t i) {
    Sample& s = samples[i];
    const data::LabeledMesh& src = train_set[i];
    s.mesh = task == Task::kDenoising ? pairs[i].noisy : src.mesh;
    auto topo = std::make_shared<EdgeTopology>(build_edge_topology(s.mesh));
    s.raw_input = input_features(config, *topo, s.mesh);
    if (task == Task::kClassification) {
      if (!src.class_label) throw DataError("sample " + src.id + " has no class label");
      s.label = *src.class_label;
    } else if (task == Task::kSegmentation) {
      if (!src.edge_labels) throw DataError("sample " + src.id + " has no edge labels");
      s.edge_labels = *src.edge_labels;
    } else {
      s.clean = src.mesh;
      s.raw_target = compute_features(*topo, s.clean, config.target, opts).values;
    }
    s.topology = std::move(topo);
  });

  int outputs = 0;
  for (const Sample& s : samples) {
    if (task == Task::kClassification) outputs = std::max(outputs, s.label + 1);
    if (task == Task::kSegmentation) {
      for (int l : s.edge_labels) outputs = std::max(outputs, l + 1);
    }
  }
  for (const Sample& s : samples) {
    if (s.label < 0) throw DataError("negative class label");
    for (int l : s.edge_labels) {
      if (l < 0) throw DataError("negative edge label");
    }
  }
  if (task == Task::kDenoising) outputs = channel_count(config.target);

  std::vector<Matrix> raws;
  for (const Sample& s : samples) raws.push_back(s.raw_input);
  Checkpoint ckpt;
  ckpt.input_stats = fit_channel_stats(std::span<const Matrix>(raws));
  if (task == Task::kDenoising) {
    std::vector<Matrix> targets;
    for (const Sample& s : samples) targets.push_back(s.raw_target);
    ckpt.target_stats = fit_channel_stats(std::span<const Matrix>(targets));
  }
  for (Sample& s : samples) {
    s.input = normalize(s.raw_input, *ckpt.input_stats);
    if (task == Task::kDenoising) s.target = normalize(s.raw_target, *ckpt.target_stats);
  }

  ckpt.config_text = config.to_text();
  ckpt.config_hash = config.hash();
  ckpt.model = build_model(config, outputs);
  nn::OptimizerSettings settings;
  settings.method = config.optimizer;
  settings.learning_rate = config.learning_rate;
  settings.momentum = config.momentum;
  nn::Optimizer optimizer(settings);

  MetricsReport report;
  report.task = task;
  report.config_hash = ckpt.config_hash;
  report.seed = config.seed;
  report.dataset_hash = data::dataset_hash(dataset);

  std::mt19937_64 order_rng(data::derive_seed(config.seed, 0x6f72646572ULL));
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const int decay_epoch = static_cast<int>(std::floor(config.lr_decay_at * config.epochs));
  std::uint64_t step = 0;
  const std::size_t batch = static_cast<std::size_t>(config.batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = epoch >= decay_epoch ? config.learning_rate * config.lr_decay : config.learning_rate;
    optimizer.set_learning_rate(lr);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng() % i]);
    double loss_sum = 0.0, metric_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t b = std::min(batch, order.size() - start);
      std::vector<nn::Gradients> grads(b);
      std::vector<double> losses(b), metrics(b);
      parallel_for(b, config.threads, [&](std::size_t k) {
        const std::size_t idx = order[start + k];
        const Sample& s = samples[idx];
        Matrix x = s.input;
        Matrix target = s.target;
        if (config.rotate_train) {
          const std::uint64_t seed = data::derive_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1, idx);
          x = normalize(input_features(config, *s.topology, rotated(s.mesh, seed)), *ckpt.input_stats);
          if (task == Task::kDenoising) {
            target = normalize(compute_features(*s.topology, rotated(s.clean, seed), config.target, opts).values,
                               *ckpt.target_stats);
          }
        }
        nn::ForwardPass pass = ckpt.model.forward(x, *s.topology);
        nn::Var loss;
        if (task == Task::kClassification) {
          loss = pass.cross_entropy_loss(s.label);
          metrics[k] = argmax_rows(pass.output())[0] == s.label ? 1.0 : 0.0;
        } else if (task == Task::kSegmentation) {
          loss = pass.cross_entropy_loss(std::span<const int>(s.edge_labels));
          metrics[k] = accuracy(argmax_rows(pass.output()), s.edge_labels);
        } else {
          loss = pass.mse_loss(target);
          metrics[k] = pass.loss_value(loss);
        }
        losses[k] = pass.loss_value(loss);
        grads[k] = pass.backward(loss);
      });
      for (std::size_t k = 0; k < b; ++k) {
        if (!std::isfinite(losses[k])) throw TrainingDivergedError(epoch + 1, step + 1, "non-finite loss");
        loss_sum += losses[k];
        metric_sum += metrics[k];
      }
      nn::Gradients total = nn::zero_gradients(ckpt.model.parameters());
      for (const auto& g : grads) nn::add_gradients(total, g);
      nn::scale_gradients(total, 1.0 / static_cast<double>(b));
      try {
        optimizer.step(ckpt.model.parameters(), total);
      } catch (const nn::NonFiniteGradientError& e) {
        throw TrainingDivergedError(epoch + 1, step + 1, e.what());
      }
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(samples.size());
    rec.train_metric = metric_sum / static_cast<double>(samples.size());
    rec.learning_rate = lr;
    report.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(ckpt), std::move(report)};
}

double evaluate_classification(const Checkpoint& ckpt, const data::Dataset& dataset, const EvalOptions& options) {
  const ExperimentConfig c = checkpoint_config(ckpt, Task::kClassification);
  const data::Dataset test = data::select(dataset, Split::kTest);
  if (test.empty()) throw DataError("test split is empty");
  const std::size_t reps = static_cast<std::size_t>(std::max(1, options.rotations));
  std::vector<int> predicted(test.size() * reps), labels(test.size() * reps);
  parallel_for(test.size() * reps, options.threads, [&](std::size_t job) {
    const std::size_t i = job / reps;
    if (!test[i].class_label) throw DataError("sample " + test[i].id + " has no class label");
    const Mesh mesh = options.rotations > 0 ? rotated(test[i].mesh, data::derive_seed(options.seed, i, job % reps))
                                            : test[i].mesh;
    const EdgeTopology topo = build_edge_topology(mesh);
    predicted[job] = argmax_rows(predict(ckpt, c, topo, mesh))[0];
    labels[job] = *test[i].class_label;
  });
  return accuracy(predicted, labels);
}

double evaluate_segmentation(const Checkpoint& ckpt, const data::Dataset& dataset, const EvalOptions& options) {
  const ExperimentConfig c = checkpoint_config(ckpt, Task::kSegmentation);
  const data::Dataset test = data::select(dataset, Split::kTest);
  if (test.empty()) throw DataError("test split is empty");
  const std::size_t reps = static_cast<std::size_t>(std::max(1, options.rotations));
  std::vector<double> scores(test.size() * reps);
  parallel_for(test.size() * reps, options.threads, [&](std::size_t job) {
    const std::size_t i = job / reps;
    if (!test[i].edge_labels) throw DataError("sample " + test[i].id + " has no edge labels");
    const Mesh mesh = options.rotations > 0 ? rotated(test[i].mesh, data::derive_seed(options.seed, i, job % reps))
                                            : test[i].mesh;
    const EdgeTopology topo = build_edge_topology(mesh);
    const auto pred = argmax_rows(predict(ckpt, c, topo, mesh));
    scores[job] = soft_edge_accuracy(pred, *test[i].edge_labels, edge_lengths(topo, mesh));
  });
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

double evaluate_denoising(const Checkpoint& ckpt, std::span<const DenoisePair> pairs, int threads) {
  const ExperimentConfig c = checkpoint_config(ckpt, Task::kDenoising);
  if (!ckpt.target_stats) throw DataError("denoising checkpoint has no target statistics");
  if (pairs.empty()) throw DataError("no clean/noisy pairs to evaluate");
  std::vector<double> errors(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const DenoisePair& p = pairs[i];
    if (p.clean.faces != p.noisy.faces || p.clean.vertices.size() != p.noisy.vertices.size()) {
      throw DataError("pair " + p.id + ": clean and noisy meshes differ in topology");
    }
    const EdgeTopology topo = build_edge_topology(p.noisy);
    const Matrix out = denormalize(predict(ckpt, c, topo, p.noisy), *ckpt.target_stats);
    const Matrix target = compute_features(topo, p.clean, c.target, feature_options(c)).values;
    errors[i] = mean_squared(out, target);
  });
  double sum = 0.0;
  for (double e : errors) sum += e;
  return sum / static_cast<double>(errors.size());
}

double identity_baseline(std::span<const DenoisePair> pairs, FeatureKind kind) {
  if (pairs.empty()) throw DataError("no clean/noisy pairs to evaluate");
  double sum = 0.0;
  for (const DenoisePair& p : pairs) {
    if (p.clean.faces != p.noisy.faces || p.clean.vertices.size() != p.noisy.vertices.size()) {
      throw DataError("pair " + p.id + ": clean and noisy meshes differ in topology");
    }
    const EdgeTopology topo = build_edge_topology(p.clean);
    sum += mean_squared(compute_features(topo, p.noisy, kind).values, compute_features(topo, p.clean, kind).values);
  }
  return sum / static_cast<double>(pairs.size());
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw std::invalid_argument("prediction and label counts differ");
  if (labels.empty()) throw DataError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double soft_edge_accuracy(std::span<const int> predicted, std::span<const int> labels,
                          std::span<const double> lengths) {
  if (predicted.size() != labels.size() || lengths.size() != labels.size()) {
    throw std::invalid_argument("prediction, label and length counts differ");
  }
  double hit = 0.0, total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += lengths[i];
    if (predicted[i] == labels[i]) hit += lengths[i];
  }
  if (!(total > 0.0)) throw DataError("soft edge accuracy needs a positive total edge length");
  return hit / total;
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    scores.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const data::Dataset& dataset,
                                      const std::function<void(const AblationRow&)>& on_row) {
  std::vector<AblationRow> rows;
  const std::uint64_t dh = data::dataset_hash(dataset);
  for (PoolPolicy policy : {PoolPolicy::kBatchLegacy, PoolPolicy::kEnhanced}) {
    for (FeatureKind kind : {FeatureKind::kMeshCnn5, FeatureKind::kFundamentalForms}) {
      ExperimentConfig c = base;
      c.task = Task::kClassification;
      c.pool_policy = policy;
      c.features = kind;
      c.channel_mask.clear();
      const TrainResult r = train(c, dataset);
      AblationRow row;
      row.policy = policy;
      row.features = kind;
      row.config_hash = c.hash();
      row.dataset_hash = dh;
      row.accuracy = evaluate_classification(r.checkpoint, dataset, {0, c.seed, c.threads});
      rows.push_back(row);
      if (on_row) on_row(row);
    }
  }
  return rows;
}

std::string format_ablation(std::span<const AblationRow> rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %-10s %9s  %-16s  %-16s\n", "pooling", "features", "accuracy", "config_hash",
                "dataset_hash");
  out += buf;
  for (const AblationRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %-10s %9.4f  %-16s  %-16s\n", std::string(to_string(r.policy)).c_str(),
                  std::string(to_string(r.features)).c_str(), r.accuracy, hex64(r.config_hash).c_str(),
                  hex64(r.dataset_hash).c_str());
    out += buf;
  }
  return out;
}

std::string MetricsReport::to_records() const {
  using nlohmann::ordered_json;
  std::string out;
  ordered_json head;
  head["record"] = "run";
  head["task"] = std::string(to_string(task));
  head["config_hash"] = hex64(config_hash);
  head["seed"] = seed;
  head["dataset_hash"] = hex64(dataset_hash);
  out += head.dump() + "\n";
  for (const EpochRecord& e : curve) {
    ordered_json j;
    j["record"] = "epoch";
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["train_metric"] = e.train_metric;
    j["learning_rate"] = e.learning_rate;
    out += j.dump() + "\n";
  }
  ordered_json tail;
  tail["record"] = "result";
  if (accuracy) tail["accuracy"] = *accuracy;
  if (soft_edge_accuracy) tail["soft_edge_accuracy"] = *soft_edge_accuracy;
  if (mse) tail["mse"] = *mse;
  if (identity_mse) tail["identity_mse"] = *identity_mse;
  out += tail.dump() + "\n";
  return out;
}

std::string MetricsReport::to_table() const {
  std::string out;
  char buf[160];
  auto line = [&](const char* key, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-20s %s\n", key, value.c_str());
    out += buf;
  };
  auto num = [&](double v) {
    char b[48];
    std::snprintf(b, sizeof b, "%.6g", v);
    return std::string(b);
  };
  line("task", std::string(to_string(task)));
  line("config_hash", hex64(config_hash));
  line("seed", std::to_string(seed));
  line("dataset_hash", hex64(dataset_hash));
  line("epochs", std::to_string(curve.size()));
  if (!curve.empty()) line("final_train_loss", num(curve.back().loss));
  if (accuracy) line("accuracy", num(*accuracy));
  if (soft_edge_accuracy) line("soft_edge_accuracy", num(*soft_edge_accuracy));
  if (mse) line("mse", num(*mse));
  if (identity_mse) line("identity_mse", num(*identity_mse));
  line("wall_seconds", num(wall_seconds));
  return out;
}

}  // namespace meshff::pipe
