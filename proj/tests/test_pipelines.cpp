#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "json.hpp"
#include "meshff/pipelines.hpp"

namespace meshff::pipe {
namespace {

data::Dataset small_zoo(int classes = 2, int train = 3, int test = 2, std::uint64_t seed = 3) {
  data::DatasetSpec spec;
  spec.classes = classes;
  spec.per_class = train + test;
  spec.min_edges = 150;
  spec.max_edges = 300;
  spec.seed = seed;
  return data::split(data::generate(spec), train, test, seed);
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.conv_widths = {6, 8};
  c.pool_targets = {120};
  c.epochs = 1;
  c.batch = 2;
  c.learning_rate = 1e-3;
  c.seed = 4;
  return c;
}

TEST(Config, ParsesCommentsAndRoundTripsCanonicalText) {
  const ExperimentConfig c = parse_config(
      "# demo\n"
      "task = segmentation\n"
      "features = meshcnn5   # trailing\n"
      "channel_mask = 10011\n"
      "conv_widths = 8, 16\n"
      "pool_targets = 200\n"
      "\n"
      "epochs = 3\n");
  EXPECT_EQ(c.task, Task::kSegmentation);
  EXPECT_EQ(c.features, FeatureKind::kMeshCnn5);
  EXPECT_EQ(c.conv_widths, (std::vector<int>{8, 16}));
  EXPECT_EQ(c.pool_targets, (std::vector<std::uint64_t>{200}));
  const ExperimentConfig back = parse_config(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.hash(), c.hash());
}

TEST(Config, HashIgnoresThreadsButNotSettings) {
  ExperimentConfig a, b;
  b.threads = 8;
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 1;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, RejectsUnknownKeysAndInconsistentValues) {
  try {
    parse_config("epochs = 2\nwidth = 3\n");
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("epochs = two\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("pool_targets = 100, 200\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("channel_mask = 10011\n"), std::invalid_argument);  // ff features
  EXPECT_THROW(parse_config("task = denoising\ntarget = laplacian\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("learning_rate = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("just words\n"), std::invalid_argument);
}

TEST(Metrics, AccuracyAndSoftEdgeAccuracyToyCases) {
  const std::vector<int> pred{0, 1, 1, 2}, lab{0, 1, 2, 2};
  EXPECT_DOUBLE_EQ(accuracy(pred, lab), 0.75);
  // Long edge right, two short edges wrong: 2 / (2 + 1 + 1).
  const std::vector<int> p2{1, 0, 0}, l2{1, 1, 1};
  const std::vector<double> len{2.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(soft_edge_accuracy(p2, l2, len), 0.5);
  // Uniform lengths reduce to plain accuracy.
  const std::vector<double> uniform(4, 0.3);
  EXPECT_DOUBLE_EQ(soft_edge_accuracy(pred, lab, uniform), accuracy(pred, lab));
  EXPECT_THROW(accuracy(pred, l2), std::invalid_argument);
  EXPECT_THROW(accuracy({}, {}), DataError);
  EXPECT_EQ(argmax_rows((Matrix(2, 3) << 0, 5, 1, 2, 2, 1).finished()), (std::vector<int>{1, 0}));
}

TEST(ParallelFor, CoversEveryIndexOnceAndRethrowsFirstError) {
  for (int threads : {1, 3, 16}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, threads, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 15) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(BuildModel, ShapesFollowTheTask) {
  ExperimentConfig c = tiny_config();
  const nn::Model cls = build_model(c, 4);
  EXPECT_TRUE(cls.per_mesh_output());
  EXPECT_EQ(cls.input_channels(), 2);
  EXPECT_EQ(cls.output_channels(), 4);
  c.task = Task::kSegmentation;
  c.features = FeatureKind::kMeshCnn5;
  const nn::Model seg = build_model(c, 3);
  EXPECT_FALSE(seg.per_mesh_output());
  EXPECT_EQ(seg.input_channels(), 5);
}

TEST(Train, OneEpochSmokeRunIsFiniteAndDeterministic) {
  const data::Dataset ds = small_zoo();
  const ExperimentConfig c = tiny_config();
  int epochs_seen = 0;
  const TrainResult a = train(c, ds, [&](const EpochRecord&) { ++epochs_seen; });
  EXPECT_EQ(epochs_seen, 1);
  ASSERT_EQ(a.report.curve.size(), 1u);
  EXPECT_TRUE(std::isfinite(a.report.curve[0].loss));
  EXPECT_EQ(a.report.config_hash, c.hash());
  EXPECT_EQ(a.report.dataset_hash, data::dataset_hash(ds));

  ExperimentConfig threaded = c;
  threaded.threads = 3;
  const TrainResult b = train(threaded, ds);
  EXPECT_EQ(nn::serialize_checkpoint(a.checkpoint), nn::serialize_checkpoint(b.checkpoint));
  EXPECT_EQ(a.report.to_records(), b.report.to_records());

  ExperimentConfig other = c;
  other.seed = 5;
  EXPECT_NE(nn::serialize_checkpoint(train(other, ds).checkpoint), nn::serialize_checkpoint(a.checkpoint));
}

TEST(Train, RecordsAreJsonLines) {
  const data::Dataset ds = small_zoo();
  ExperimentConfig c = tiny_config();
  c.epochs = 2;
  TrainResult r = train(c, ds);
  r.report.accuracy = evaluate_classification(r.checkpoint, ds);
  std::istringstream in(r.report.to_records());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1]["epoch"], 1);
  EXPECT_TRUE(rows[3].contains("accuracy"));
  EXPECT_EQ(r.report.to_records().find("wall"), std::string::npos);
  EXPECT_NE(r.report.to_table().find("accuracy"), std::string::npos);
}

TEST(Evaluate, UntrainedClassifierIsNearChance) {
  const int k = 4;
  const data::Dataset ds = small_zoo(k, 2, 5, 11);
  ExperimentConfig c = tiny_config();
  c.epochs = 0;
  const TrainResult r = train(c, ds);
  const double acc = evaluate_classification(r.checkpoint, ds);
  const double n = static_cast<double>(data::select(ds, Split::kTest).size());
  const double sigma = std::sqrt((1.0 / k) * (1 - 1.0 / k) / n);
  EXPECT_LE(std::abs(acc - 1.0 / k), 3 * sigma) << acc;
}

TEST(Evaluate, EmptyTestSplitAndWrongTaskAreDataErrors) {
  const data::Dataset ds = small_zoo();
  const TrainResult r = train(tiny_config(), ds);
  EXPECT_THROW(evaluate_classification(r.checkpoint, data::select(ds, Split::kTrain)), DataError);
  EXPECT_THROW(evaluate_segmentation(r.checkpoint, ds), TaskMismatchError);
  ExperimentConfig seg = tiny_config();
  seg.task = Task::kSegmentation;
  EXPECT_THROW(train(seg, ds), DataError);  // zoo samples carry no edge labels
}

TEST(Evaluate, RotationsLeaveInvariantFeaturesUnchanged) {
  const data::Dataset ds = small_zoo();
  const TrainResult r = train(tiny_config(), ds);
  const double plain = evaluate_classification(r.checkpoint, ds);
  const double rotated = evaluate_classification(r.checkpoint, ds, {4, 1, 1});
  EXPECT_DOUBLE_EQ(plain, rotated);
}

TEST(Segmentation, TrainsAndEvaluatesOnLimbs) {
  data::DatasetSpec spec;
  spec.kind = data::GeneratorKind::kArticulatedLimbs;
  spec.classes = 1;
  spec.per_class = 3;
  spec.min_edges = 150;
  spec.max_edges = 400;
  const data::Dataset ds = data::split(data::generate(spec), 2, 1, 0);
  ExperimentConfig c = tiny_config();
  c.task = Task::kSegmentation;
  const TrainResult r = train(c, ds);
  const double acc = evaluate_segmentation(r.checkpoint, ds);
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
}

TEST(Denoising, IdentityBaselineAndTopologyChecks) {
  const data::Dataset ds = small_zoo();
  const auto clean = make_denoise_pairs(ds, 0.0, 1);
  EXPECT_EQ(identity_baseline(clean, FeatureKind::kFundamentalForms), 0.0);
  EXPECT_EQ(identity_baseline(clean, FeatureKind::kXyz), 0.0);
  const auto noisy = make_denoise_pairs(ds, 0.1, 1);
  EXPECT_GT(identity_baseline(noisy, FeatureKind::kFundamentalForms), 0.0);
  EXPECT_EQ(make_denoise_pairs(ds, 0.1, 1)[0].noisy, noisy[0].noisy);

  auto broken = noisy;
  broken[0].noisy.faces.pop_back();
  EXPECT_THROW(identity_baseline(broken, FeatureKind::kXyz), DataError);

  ExperimentConfig c = tiny_config();
  c.task = Task::kDenoising;
  const TrainResult r = train(c, ds);
  ASSERT_TRUE(r.checkpoint.target_stats.has_value());
  EXPECT_TRUE(std::isfinite(evaluate_denoising(r.checkpoint, noisy)));
  EXPECT_THROW(evaluate_denoising(r.checkpoint, broken), DataError);
  EXPECT_THROW(evaluate_classification(r.checkpoint, ds), TaskMismatchError);
}

TEST(Ablation, FourRowsShareTheDataset) {
  const data::Dataset ds = small_zoo();
  ExperimentConfig c = tiny_config();
  const auto rows = run_ablation(c, ds);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].policy, PoolPolicy::kBatchLegacy);
  EXPECT_EQ(rows[0].features, FeatureKind::kMeshCnn5);
  EXPECT_EQ(rows[3].policy, PoolPolicy::kEnhanced);
  EXPECT_EQ(rows[3].features, FeatureKind::kFundamentalForms);
  for (const auto& row : rows) EXPECT_EQ(row.dataset_hash, rows[0].dataset_hash);
  EXPECT_NE(rows[0].config_hash, rows[3].config_hash);
  const std::string table = format_ablation(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}

}  // namespace
}  // namespace meshff::pipe
