#include "meshff/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"

#include "meshff/checkpoint.hpp"
#include "meshff/config.hpp"
#include "meshff/datasets.hpp"
#include "meshff/feature_io.hpp"
#include "meshff/hash.hpp"
#include "meshff/obj_io.hpp"
#include "meshff/pipelines.hpp"
#include "meshff/pool.hpp"
#include "meshff/topology.hpp"
#include "meshff/transform.hpp"

namespace meshff::cli {
namespace {

namespace fs = std::filesystem;
using data::Split;

// Raised for bad flag values found after parsing; maps to the usage code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void header(std::ostream& out, std::uint64_t config_hash, std::uint64_t seed) {
  out << "config " << hex64(config_hash) << " seed " << seed << "\n";
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw DataError("no such file: " + p.string());
}

void require_dataset(const fs::path& dir) { require_file(dir / "index.tsv"); }

void prepare_output_file(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  if (fs::is_directory(p)) throw UsageError("output path is a directory: " + p.string());
}

Mesh read_manifold(const fs::path& path) {
  require_file(path);
  Mesh mesh = read_obj_file(path);
  const ValidationReport report = validate_manifold(mesh);
  if (!report.ok()) throw TopologyError(path.string() + " is not a manifold mesh\n" + report.to_string());
  return mesh;
}

std::vector<std::uint64_t> parse_targets(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument("");
      out.push_back(static_cast<std::uint64_t>(v));
    } catch (const std::exception&) {
      throw UsageError("bad pool target '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("no pool targets given");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] >= out[i - 1]) throw UsageError("pool targets must be strictly decreasing");
  }
  return out;
}

// Experiment flags shared by train, denoise and ablate.
struct ExperimentFlags {
  std::string config_path;
  std::string task, features, policy, mask, target, optimizer;
  std::optional<int> epochs, threads, batch;
  std::optional<double> lr, noise;
  std::optional<std::uint64_t> seed;
  bool rotate_train = false;
  std::vector<std::string> sets;

  void add(CLI::App* app, bool with_task) {
    app->add_option("--config", config_path, "experiment config file");
    if (with_task) app->add_option("--task", task, "classification | segmentation | denoising");
    app->add_option("--features", features, "input feature kind");
    app->add_option("--policy", policy, "pooling policy: enhanced | legacy");
    app->add_option("--mask", mask, "meshcnn5 channel mask, e.g. 10011");
    app->add_option("--optimizer", optimizer, "adam | sgd");
    app->add_option("--epochs", epochs);
    app->add_option("--threads", threads);
    app->add_option("--batch", batch);
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--seed", seed);
    app->add_flag("--rotate-train", rotate_train, "random rotation augmentation while training");
    app->add_option("--set", sets, "extra key=value config overrides");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config_path.empty()) {
      require_file(config_path);
      c = parse_config(read_text_file(config_path));
    }
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!task.empty()) c.task = parse_task(task);
    if (!features.empty()) c.features = parse_feature_kind(features);
    if (!policy.empty()) c.pool_policy = parse_pool_policy(policy);
    if (!mask.empty()) c.channel_mask = mask;
    if (!target.empty()) c.target = parse_feature_kind(target);
    if (!optimizer.empty()) c.optimizer = nn::parse_optimizer(optimizer);
    if (epochs) c.epochs = *epochs;
    if (threads) c.threads = *threads;
    if (batch) c.batch = *batch;
    if (lr) c.learning_rate = *lr;
    if (noise) c.noise_variance = *noise;
    if (seed) c.seed = *seed;
    if (rotate_train) c.rotate_train = true;
    c.validate();
    return c;
  }
};

void print_epoch(std::ostream& err, const pipe::EpochRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "epoch %4d  loss %.6f  train %.4f  lr %.3g\n", r.epoch, r.loss, r.train_metric,
                r.learning_rate);
  err << buf;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// gen-data ----------------------------------------------------------------

struct GenDataFlags {
  std::string spec, out;
  int classes = 4, per_class = 20, min_edges = 240, max_edges = 480;
  std::optional<int> train, test;
  std::uint64_t seed = 0;
};

int cmd_gen_data(const GenDataFlags& f, std::ostream& out, std::ostream& err) {
  data::DatasetSpec spec;
  try {
    spec.kind = data::parse_generator_kind(f.spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.classes = f.classes;
  spec.per_class = f.per_class;
  spec.min_edges = f.min_edges;
  spec.max_edges = f.max_edges;
  spec.seed = f.seed;
  const int n_train = f.train.value_or(f.per_class * 4 / 5);
  const int n_test = f.test.value_or(f.per_class - n_train);
  const std::string canon = "gen-data spec=" + f.spec + " classes=" + std::to_string(f.classes) +
                            " per_class=" + std::to_string(f.per_class) + " edges=" + std::to_string(f.min_edges) +
                            ".." + std::to_string(f.max_edges) + " split=" + std::to_string(n_train) + "/" +
                            std::to_string(n_test) + " seed=" + std::to_string(f.seed);
  header(out, fnv1a64(canon), f.seed);
  fs::create_directories(f.out);
  err << "generating " << spec.classes * spec.per_class << " meshes\n";
  const data::Dataset all = data::generate(spec);
  const data::Dataset ds = data::split(all, n_train, n_test, f.seed);
  data::write_dataset(f.out, ds);
  out << "samples " << ds.size() << " train " << data::select(ds, Split::kTrain).size() << " test "
      << data::select(ds, Split::kTest).size() << " dataset_hash " << hex64(data::dataset_hash(ds)) << "\n";
  return kOk;
}

// features ----------------------------------------------------------------

struct FeaturesFlags {
  std::string mesh, kind, out, heatmap, mask;
  bool normalize = false, signed_dihedral = false;
};

int cmd_features(const FeaturesFlags& f, std::ostream& out, std::ostream&) {
  FeatureKind kind;
  ChannelMask mask;
  try {
    kind = parse_feature_kind(f.kind);
    if (!f.mask.empty()) mask = parse_channel_mask(f.mask);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  prepare_output_file(f.out);
  if (!f.heatmap.empty()) prepare_output_file(f.heatmap);
  Mesh mesh = read_manifold(f.mesh);
  if (f.normalize) mesh = normalize_unit_box(mesh);
  const EdgeTopology topo = build_edge_topology(mesh);
  FeatureTensor t = compute_features(topo, mesh, kind, {f.signed_dihedral});
  if (!mask.empty()) apply_channel_mask(t.values, mask);
  const std::string canon = "features kind=" + f.kind + " mask=" + f.mask + " normalize=" +
                            std::to_string(f.normalize) + " signed=" + std::to_string(f.signed_dihedral);
  header(out, fnv1a64(canon), 0);
  write_feature_file(f.out, t);
  out << "edges " << t.edge_count() << " channels " << t.channels() << " kind " << to_string(kind) << "\n";
  if (!f.heatmap.empty()) {
    // Channels are standardized over this mesh before taking norms, then
    // the norms are scaled to [0, 1].
    const FeatureTensor one[] = {t};
    const Matrix z = normalize(t.values, fit_channel_stats(std::span<const FeatureTensor>(one)));
    std::vector<double> heat = edge_norms(z);
    const double top = heat.empty() ? 0.0 : *std::max_element(heat.begin(), heat.end());
    if (top > 0.0) {
      for (double& h : heat) h /= top;
    }
    write_obj_file(f.heatmap, mesh, heat);
    out << "heatmap " << f.heatmap << "\n";
  }
  return kOk;
}

// pool-trace --------------------------------------------------------------

struct PoolTraceFlags {
  std::string mesh, kind, features_file, targets, policy = "enhanced", out;
};

int cmd_pool_trace(const PoolTraceFlags& f, std::ostream& out, std::ostream& err) {
  if (f.kind.empty() == f.features_file.empty()) {
    throw UsageError("give exactly one of --features KIND or --features-file FILE");
  }
  PoolPolicy policy;
  std::optional<FeatureKind> kind;
  try {
    policy = parse_pool_policy(f.policy);
    if (!f.kind.empty()) kind = parse_feature_kind(f.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto targets = parse_targets(f.targets);
  if (!f.features_file.empty()) require_file(f.features_file);
  const Mesh mesh = read_manifold(f.mesh);
  fs::create_directories(f.out);
  const EdgeTopology topo = build_edge_topology(mesh);
  Matrix features = kind ? compute_features(topo, mesh, *kind).values : read_feature_file(f.features_file).values;
  if (static_cast<std::size_t>(features.rows()) != topo.edge_count()) {
    throw DataError("feature file has " + std::to_string(features.rows()) + " rows for " +
                    std::to_string(topo.edge_count()) + " edges");
  }
  header(out, fnv1a64("pool-trace features=" + (kind ? f.kind : f.features_file) + " targets=" + f.targets +
                      " policy=" + f.policy),
         0);

  // Step index at which each original edge disappeared, across all stages.
  std::vector<int> step(topo.edge_count(), 0);
  std::vector<int> origin(topo.edge_count());
  for (std::size_t e = 0; e < origin.size(); ++e) origin[e] = static_cast<int>(e);
  int steps_done = 0;
  EdgeTopology current = topo;
  std::vector<Vec3> positions = mesh.vertices;
  for (std::size_t s = 0; s < targets.size(); ++s) {
    PoolResult r = pool(features, current, targets[s], policy, positions);
    const auto local = collapse_steps(r.history);
    for (std::size_t e = 0; e < local.size(); ++e) {
      if (local[e] <= static_cast<int>(r.history.records.size())) step[origin[e]] = steps_done + local[e];
    }
    steps_done += static_cast<int>(r.history.records.size());
    std::vector<int> next_origin;
    for (int src : r.history.survivors) next_origin.push_back(origin[src]);
    origin = std::move(next_origin);

    Mesh stage;
    stage.vertices = r.positions;
    stage.faces = r.topology.faces;
    const ValidationReport report = validate_manifold(stage);
    if (!report.ok()) throw std::runtime_error("pooled stage is not manifold: " + report.to_string());
    const fs::path path = fs::path(f.out) / ("stage_" + std::to_string(s + 1) + ".obj");
    write_text_file(path, write_obj(stage));
    out << "stage " << s + 1 << " target " << targets[s] << " edges " << r.topology.edge_count() << " file "
        << path.string() << "\n";
    err << "stage " << s + 1 << ": " << r.history.records.size() << " collapses\n";
    features = std::move(r.features);
    current = std::move(r.topology);
    positions = std::move(r.positions);
  }
  for (int& s : step) {
    if (s == 0) s = steps_done + 1;
  }
  const std::vector<double> values(step.begin(), step.end());
  write_text_file(fs::path(f.out) / "collapse_order.txt", write_edge_scalars(topo, values));
  out << "collapses " << steps_done << " order " << (fs::path(f.out) / "collapse_order.txt").string() << "\n";
  return kOk;
}

// train / eval / denoise / ablate -----------------------------------------

struct TrainFlags {
  ExperimentFlags exp;
  std::string data, out, metrics;
};

void write_metrics(const std::string& path, const pipe::MetricsReport& report) {
  if (path.empty()) return;
  write_text_file(path, report.to_records());
}

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = f.exp.resolve();
  require_dataset(f.data);
  prepare_output_file(f.out);
  if (!f.metrics.empty()) prepare_output_file(f.metrics);
  header(out, config.hash(), config.seed);
  const data::Dataset ds = data::read_dataset(f.data);
  pipe::TrainResult r = pipe::train(config, ds, [&](const pipe::EpochRecord& e) { print_epoch(err, e); });
  if (!data::select(ds, Split::kTest).empty()) {
    const pipe::EvalOptions opts{0, config.seed, config.threads};
    if (config.task == Task::kClassification) {
      r.report.accuracy = pipe::evaluate_classification(r.checkpoint, ds, opts);
    } else if (config.task == Task::kSegmentation) {
      r.report.soft_edge_accuracy = pipe::evaluate_segmentation(r.checkpoint, ds, opts);
    } else {
      const auto pairs = pipe::make_denoise_pairs(data::select(ds, Split::kTest), config.noise_variance, config.seed);
      r.report.mse = pipe::evaluate_denoising(r.checkpoint, pairs, config.threads);
      r.report.identity_mse = pipe::identity_baseline(pairs, config.target);
    }
  }
  nn::save_checkpoint(f.out, r.checkpoint);
  write_metrics(f.metrics, r.report);
  out << r.report.to_table();
  return kOk;
}

struct EvalFlags {
  std::string checkpoint, data, metrics;
  int rotations = 0, threads = 1;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream&) {
  require_file(f.checkpoint);
  require_dataset(f.data);
  if (!f.metrics.empty()) prepare_output_file(f.metrics);
  if (f.rotations < 0 || f.threads < 1) throw UsageError("--rotations must be >= 0 and --threads >= 1");
  const nn::Checkpoint ckpt = nn::load_checkpoint(f.checkpoint);
  ExperimentConfig config;
  try {
    config = parse_config(ckpt.config_text);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  header(out, config.hash(), f.seed);
  const data::Dataset ds = data::read_dataset(f.data);
  pipe::MetricsReport report;
  report.task = config.task;
  report.config_hash = config.hash();
  report.seed = f.seed;
  report.dataset_hash = data::dataset_hash(ds);
  const pipe::EvalOptions opts{f.rotations, f.seed, f.threads};
  if (config.task == Task::kClassification) {
    report.accuracy = pipe::evaluate_classification(ckpt, ds, opts);
  } else if (config.task == Task::kSegmentation) {
    report.soft_edge_accuracy = pipe::evaluate_segmentation(ckpt, ds, opts);
  } else {
    const auto pairs = pipe::make_denoise_pairs(data::select(ds, Split::kTest), config.noise_variance, config.seed);
    report.mse = pipe::evaluate_denoising(ckpt, pairs, f.threads);
    report.identity_mse = pipe::identity_baseline(pairs, config.target);
  }
  write_metrics(f.metrics, report);
  out << report.to_table();
  return kOk;
}

struct DenoiseFlags {
  ExperimentFlags exp;
  std::string data, out, metrics, checkpoint;
};

int cmd_denoise(DenoiseFlags f, std::ostream& out, std::ostream& err) {
  require_dataset(f.data);
  if (!f.metrics.empty()) prepare_output_file(f.metrics);
  const data::Dataset ds = data::read_dataset(f.data);
  nn::Checkpoint ckpt;
  ExperimentConfig config;
  pipe::MetricsReport report;
  if (!f.checkpoint.empty()) {
    require_file(f.checkpoint);
    ckpt = nn::load_checkpoint(f.checkpoint);
    try {
      config = parse_config(ckpt.config_text);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("checkpoint config: ") + e.what());
    }
    header(out, config.hash(), config.seed);
    report.task = config.task;
    report.config_hash = config.hash();
    report.seed = config.seed;
    report.dataset_hash = data::dataset_hash(ds);
  } else {
    if (f.out.empty()) throw UsageError("denoise needs --out when training (or --checkpoint to evaluate)");
    f.exp.task = "denoising";
    config = f.exp.resolve();
    prepare_output_file(f.out);
    header(out, config.hash(), config.seed);
    pipe::TrainResult r = pipe::train(config, ds, [&](const pipe::EpochRecord& e) { print_epoch(err, e); });
    nn::save_checkpoint(f.out, r.checkpoint);
    ckpt = std::move(r.checkpoint);
    report = std::move(r.report);
  }
  const auto pairs = pipe::make_denoise_pairs(data::select(ds, Split::kTest), config.noise_variance, config.seed);
  report.mse = pipe::evaluate_denoising(ckpt, pairs, config.threads);
  report.identity_mse = pipe::identity_baseline(pairs, config.target);
  write_metrics(f.metrics, report);
  out << report.to_table();
  return kOk;
}

struct AblateFlags {
  ExperimentFlags exp;
  std::string data;
};

int cmd_ablate(const AblateFlags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = f.exp.resolve();
  require_dataset(f.data);
  header(out, config.hash(), config.seed);
  const data::Dataset ds = data::read_dataset(f.data);
  const auto rows = pipe::run_ablation(config, ds, [&](const pipe::AblationRow& r) {
    err << to_string(r.policy) << "/" << to_string(r.features) << " accuracy " << fmt(r.accuracy) << "\n";
  });
  out << pipe::format_ablation(rows);
  return kOk;
}

// validate ----------------------------------------------------------------

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  require_file(path);
  const Mesh mesh = read_obj_file(path);
  header(out, fnv1a64("validate"), 0);
  const ValidationReport report = validate_manifold(mesh);
  if (!report.ok()) {
    out << report.to_string() << "\n";
    err << path << ": not a manifold mesh\n";
    return kDataError;
  }
  const EdgeTopology topo = build_edge_topology(mesh);
  out << "ok vertices " << mesh.vertex_count() << " faces " << mesh.face_count() << " edges " << topo.edge_count()
      << " boundary_edges "
      << std::count_if(topo.edge_faces.begin(), topo.edge_faces.end(),
                       [](const auto& ef) { return ef[1] == kNoFace; })
      << " euler " << euler_characteristic(topo) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Edge-based mesh learning toolkit", "meshff"};
  app.require_subcommand(1);

  GenDataFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen_cmd->add_option("--spec", gen.spec, "primitive-zoo | engraved-cube | articulated-limbs")->required();
  gen_cmd->add_option("--classes", gen.classes);
  gen_cmd->add_option("--per-class", gen.per_class);
  gen_cmd->add_option("--train", gen.train, "training samples per class");
  gen_cmd->add_option("--test", gen.test, "test samples per class");
  gen_cmd->add_option("--min-edges", gen.min_edges);
  gen_cmd->add_option("--max-edges", gen.max_edges);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "output directory")->required();

  FeaturesFlags feat;
  auto* feat_cmd = app.add_subcommand("features", "extract per-edge features");
  feat_cmd->add_option("--mesh", feat.mesh)->required();
  feat_cmd->add_option("--kind", feat.kind, "ff | meshcnn5 | xyz | xyz-inv | laplacian")->required();
  feat_cmd->add_option("--out", feat.out, "feature file")->required();
  feat_cmd->add_option("--heatmap", feat.heatmap, "OBJ path; an edge-norm sidecar is written next to it");
  feat_cmd->add_option("--mask", feat.mask, "meshcnn5 channel mask");
  feat_cmd->add_flag("--normalize", feat.normalize, "normalize the mesh to the unit box first");
  feat_cmd->add_flag("--signed-dihedral", feat.signed_dihedral);

  PoolTraceFlags trace;
  auto* trace_cmd = app.add_subcommand("pool-trace", "pool a mesh in stages and export each stage");
  trace_cmd->add_option("--mesh", trace.mesh)->required();
  trace_cmd->add_option("--features", trace.kind, "feature kind used as pooling input");
  trace_cmd->add_option("--features-file", trace.features_file, "precomputed feature file");
  trace_cmd->add_option("--targets", trace.targets, "strictly decreasing edge counts, comma-separated")->required();
  trace_cmd->add_option("--policy", trace.policy, "enhanced | legacy");
  trace_cmd->add_option("--out", trace.out, "output directory")->required();

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train.exp.add(train_cmd, true);
  train_cmd->add_option("--target", train.exp.target, "denoising target kind: ff | xyz");
  train_cmd->add_option("--data", train.data, "dataset directory")->required();
  train_cmd->add_option("--out", train.out, "checkpoint path")->required();
  train_cmd->add_option("--metrics", train.metrics, "line-delimited metrics output");

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  eval_cmd->add_option("--checkpoint", eval.checkpoint)->required();
  eval_cmd->add_option("--data", eval.data)->required();
  eval_cmd->add_option("--rotations", eval.rotations, "random test-time rotations per mesh");
  eval_cmd->add_option("--seed", eval.seed);
  eval_cmd->add_option("--threads", eval.threads);
  eval_cmd->add_option("--metrics", eval.metrics);

  DenoiseFlags den;
  auto* den_cmd = app.add_subcommand("denoise", "train and evaluate a de-noising model");
  den.exp.add(den_cmd, false);
  den_cmd->add_option("--target", den.exp.target, "ff | xyz");
  den_cmd->add_option("--noise-variance", den.exp.noise);
  den_cmd->add_option("--data", den.data)->required();
  den_cmd->add_option("--out", den.out, "checkpoint path");
  den_cmd->add_option("--checkpoint", den.checkpoint, "evaluate this checkpoint instead of training");
  den_cmd->add_option("--metrics", den.metrics);

  AblateFlags abl;
  auto* abl_cmd = app.add_subcommand("ablate", "pooling policy x feature kind grid");
  abl.exp.add(abl_cmd, false);
  abl_cmd->add_option("--data", abl.data)->required();

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "check that a mesh is a 2-manifold");
  val_cmd->add_option("--mesh", validate_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "meshff: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, out, err);
    if (feat_cmd->parsed()) return cmd_features(feat, out, err);
    if (trace_cmd->parsed()) return cmd_pool_trace(trace, out, err);
    if (train_cmd->parsed()) return cmd_train(train, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (den_cmd->parsed()) return cmd_denoise(den, out, err);
    if (abl_cmd->parsed()) return cmd_ablate(abl, out, err);
    if (val_cmd->parsed()) return cmd_validate(validate_path, out, err);
  } catch (const UsageError& e) {
    err << "meshff: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "meshff: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "meshff: " << e.what() << "\n";
    return kDataError;
  } catch (const PoolExhaustedError& e) {
    err << "meshff: " << e.what() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "meshff: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsage;
}

}  // namespace meshff::cli
