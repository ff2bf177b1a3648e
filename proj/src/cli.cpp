#include "tempocomp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tempocomp/config.hpp"
#include "tempocomp/datagen.hpp"
#include "tempocomp/errors.hpp"
#include "tempocomp/io.hpp"
#include "tempocomp/matrix.hpp"
#include "tempocomp/nn.hpp"
#include "tempocomp/oracle.hpp"
#include "tempocomp/rng.hpp"
#include "tempocomp/signal_encoding.hpp"
#include "tempocomp/summation.hpp"
#include "tempocomp/wdm.hpp"

namespace tempocomp {

namespace fs = std::filesystem;

namespace {

// seed salts for the CLI's own derived streams, disjoint from the engine's
// substream purposes
constexpr uint64_t kSaltShuffle = 21;
constexpr uint64_t kSaltDetectTrain = 31;
constexpr uint64_t kSaltScenePatch = 42;
constexpr uint64_t kSaltSceneRender = 43;
constexpr uint64_t kSaltTargetScene = 44;
constexpr uint64_t kSaltDemoDigit = 61;
constexpr uint64_t kSaltPilot = 71;
constexpr uint64_t kSaltDump = 81;
constexpr uint64_t kSaltTestSet = 101;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::string dataset_dir;
  std::string noise;     // "on" / "off", empty keeps the config value
  std::string fidelity;  // empty keeps the config value
  std::optional<uint64_t> seed;
};

RunConfig resolve_run_config(const GlobalArgs& g) {
  RunConfig rc;
  if (!g.config_path.empty()) rc = load_run_config(g.config_path);
  if (g.seed) rc.engine.noise.rng_seed = *g.seed;
  if (!g.noise.empty()) rc.engine.noise_enabled = (g.noise == "on");
  if (!g.fidelity.empty()) rc.engine.fidelity = fidelity_from_string(g.fidelity);
  if (!g.out_dir.empty()) rc.out_dir = g.out_dir;
  if (!g.dataset_dir.empty()) rc.dataset_dir = g.dataset_dir;
  rc.engine.validate();
  return rc;
}

fs::path out_path(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out_dir);
  return fs::path(rc.out_dir) / name;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using ReportRows = std::vector<std::pair<std::string, std::string>>;

void write_report_csv(const fs::path& path, const ReportRows& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "key,value\n";
  for (const auto& [key, value] : rows) out << key << "," << value << "\n";
  if (!out) throw DataError("short write to " + path.string());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("short write to " + path.string());
}

std::string format_ops(double ops_per_s) {
  struct Unit {
    double scale;
    const char* suffix;
  };
  constexpr Unit units[] = {
      {1e15, "POPS"}, {1e12, "TOPS"}, {1e9, "GOPS"}, {1e6, "MOPS"}, {1e3, "kOPS"}};
  char buf[64];
  for (const Unit& u : units) {
    if (ops_per_s >= u.scale) {
      std::snprintf(buf, sizeof(buf), "%.6g %s", ops_per_s / u.scale, u.suffix);
      return buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "%.6g OPS", ops_per_s);
  return buf;
}

ImageTensor to_unit_image(const Matrix& m) {
  UnitRescale r = rescale_unit(std::span<const double>(m.data));
  return ImageTensor::create(m.rows, m.cols, std::move(r.values));
}

// smoothing layer in front of the digit classifier; 784 features per image
ConvSpec digit_conv() { return ConvSpec{gaussian5x5(), 2, 1}; }

struct TrainArgs {
  size_t per_class = 1000;
  size_t epochs = 20;
  double learning_rate = 0.5;
  uint64_t data_seed = 11;
};

DigitDataset load_train_set(const RunConfig& rc, const TrainArgs& t) {
  if (!rc.dataset_dir.empty()) {
    auto ds = try_load_idx_dataset(rc.dataset_dir, "train");
    if (!ds) {
      throw DataError("no train-images-idx3-ubyte / train-labels-idx1-ubyte under " +
                      rc.dataset_dir);
    }
    return std::move(*ds);
  }
  if (auto ds = try_load_idx_dataset("", "train")) return std::move(*ds);
  return make_digit_dataset(t.per_class, t.data_seed);
}

// count images, balanced when synthesized, a seeded subset when a stored test
// set is available
DigitDataset load_test_subset(const RunConfig& rc, size_t count, uint64_t data_seed) {
  std::optional<DigitDataset> ds;
  if (!rc.dataset_dir.empty()) {
    ds = try_load_idx_dataset(rc.dataset_dir, "t10k");
    if (!ds) {
      throw DataError("no t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte under " +
                      rc.dataset_dir);
    }
  } else {
    ds = try_load_idx_dataset("", "t10k");
  }
  if (!ds) {
    DigitDataset synth = make_digit_dataset((count + 9) / 10, mix_keys(data_seed, kSaltTestSet));
    if (synth.images.size() > count) {
      synth.images.resize(count);
      synth.labels.resize(count);
    }
    return synth;
  }
  if (ds->images.size() <= count) return std::move(*ds);
  std::vector<size_t> order(ds->images.size());
  std::iota(order.begin(), order.end(), size_t{0});
  RngStream rng(mix_keys(data_seed, kSaltTestSet));
  for (size_t i = order.size() - 1; i > 0; --i) {
    size_t j = std::min(i, static_cast<size_t>(rng.uniform() * static_cast<double>(i + 1)));
    std::swap(order[i], order[j]);
  }
  DigitDataset subset;
  subset.images.reserve(count);
  subset.labels.reserve(count);
  for (size_t k = 0; k < count; ++k) {
    subset.images.push_back(ds->images[order[k]]);
    subset.labels.push_back(ds->labels[order[k]]);
  }
  return subset;
}

FcSpec load_or_train_fc(const RunConfig& rc, const std::string& weights_flag, const TrainArgs& t,
                        const ConvSpec& conv) {
  const std::string path = !weights_flag.empty() ? weights_flag : rc.weights_path;
  if (!path.empty()) return read_fcspec_csv(path);
  DigitDataset train = load_train_set(rc, t);
  return train_fc_digital(train.images, train.labels, conv, t.epochs, t.learning_rate,
                          mix_keys(t.data_seed, kSaltShuffle));
}

int classify_digital(const ImageTensor& img, const ConvSpec& conv, const FcSpec& fc) {
  Matrix feats = oracle::conv2d_digital(img, conv);
  UnitRescale r = rescale_unit(std::span<const double>(feats.data));
  std::vector<double> scores = oracle::fc_digital(r.values, fc);
  return fc.class_labels[classify(scores)];
}

// even channels carry the conv frames, odd channels the fc frames, so every
// image keeps disjoint noise substreams
int classify_photonic(const ImageTensor& img, const ConvSpec& conv, const FcSpec& fc,
                      const EngineConfig& cfg, const CalibrationResult& cal,
                      uint64_t image_index) {
  ConvResult feats = conv2d_photonic(img, conv, cfg, cal, 2 * image_index);
  std::vector<double> scores =
      fc_forward_photonic(flatten_image(feats.normalized), fc, cfg, cal, 2 * image_index + 1);
  return fc.class_labels[classify(scores)];
}

void run_edge_detect(const GlobalArgs& g, const std::string& image_flag) {
  RunConfig rc = resolve_run_config(g);
  ImageTensor img;
  if (!image_flag.empty()) {
    img = read_pgm(image_flag);
  } else if (!rc.image_path.empty()) {
    img = read_pgm(rc.image_path);
  } else {
    img = make_flower_image();
  }
  const ConvSpec spec{laplacian3x3(), 1, 1};
  const CalibrationResult cal = calibrate_gain(rc.engine);
  ConvResult photonic = conv2d_photonic(img, spec, rc.engine, cal);
  Matrix digital = oracle::conv2d_digital(img, spec);
  const double corr =
      pearson(std::span<const double>(photonic.raw.data), std::span<const double>(digital.data));
  const double diff = max_abs_diff(std::span<const double>(photonic.raw.data),
                                   std::span<const double>(digital.data));

  write_pgm(img, out_path(rc, "input.pgm"));
  write_pgm(to_unit_image(digital), out_path(rc, "edges_digital.pgm"));
  write_pgm(photonic.normalized, out_path(rc, "edges_photonic.pgm"));
  write_report_csv(out_path(rc, "edge_report.csv"),
                   {{"height", std::to_string(img.height)},
                    {"width", std::to_string(img.width)},
                    {"pearson", fmt(corr)},
                    {"max_abs_diff", fmt(diff)},
                    {"noise_enabled", rc.engine.noise_enabled ? "1" : "0"},
                    {"fidelity", to_string(rc.engine.fidelity)}});
  std::printf("edge-detect: %zux%zu image, pearson(photonic, digital) = %.6f\n", img.height,
              img.width, corr);
  std::printf("wrote input.pgm edges_digital.pgm edges_photonic.pgm edge_report.csv in %s\n",
              rc.out_dir.c_str());
}

void run_mnist_train(const GlobalArgs& g, const TrainArgs& t) {
  RunConfig rc = resolve_run_config(g);
  const ConvSpec conv = digit_conv();
  DigitDataset train = load_train_set(rc, t);
  FcSpec fc = train_fc_digital(train.images, train.labels, conv, t.epochs, t.learning_rate,
                               mix_keys(t.data_seed, kSaltShuffle));

  size_t train_hits = 0;
  for (size_t i = 0; i < train.images.size(); ++i) {
    train_hits += classify_digital(train.images[i], conv, fc) == train.labels[i];
  }
  DigitDataset test = load_test_subset(rc, 100, t.data_seed);
  size_t test_hits = 0;
  for (size_t i = 0; i < test.images.size(); ++i) {
    test_hits += classify_digital(test.images[i], conv, fc) == test.labels[i];
  }
  const double train_acc = static_cast<double>(train_hits) / train.images.size();
  const double test_acc = static_cast<double>(test_hits) / test.images.size();

  write_fcspec_csv(fc, out_path(rc, "fc_weights.csv"));
  write_report_csv(out_path(rc, "train_report.csv"),
                   {{"images", std::to_string(train.images.size())},
                    {"epochs", std::to_string(t.epochs)},
                    {"learning_rate", fmt(t.learning_rate)},
                    {"data_seed", std::to_string(t.data_seed)},
                    {"train_accuracy", fmt(train_acc)},
                    {"test_accuracy", fmt(test_acc)}});
  std::printf("mnist-train: %zu images, %zu epochs, train accuracy %.4f, test accuracy %.4f\n",
              train.images.size(), t.epochs, train_acc, test_acc);
  std::printf("wrote fc_weights.csv train_report.csv in %s\n", rc.out_dir.c_str());
}

void run_mnist_infer(const GlobalArgs& g, const TrainArgs& t, const std::string& weights_flag,
                     size_t count) {
  RunConfig rc = resolve_run_config(g);
  if (count == 0) throw ConfigError("mnist-infer needs a positive --count");
  const ConvSpec conv = digit_conv();
  FcSpec fc = load_or_train_fc(rc, weights_flag, t, conv);
  DigitDataset test = load_test_subset(rc, count, t.data_seed);
  const CalibrationResult cal = calibrate_gain(rc.engine);

  ConfusionMatrix cm(10);
  size_t digital_hits = 0;
  size_t photonic_hits = 0;
  size_t agreements = 0;
  for (size_t i = 0; i < test.images.size(); ++i) {
    const int d = classify_digital(test.images[i], conv, fc);
    const int p = classify_photonic(test.images[i], conv, fc, rc.engine, cal, i);
    digital_hits += d == test.labels[i];
    photonic_hits += p == test.labels[i];
    agreements += d == p;
    cm.add(static_cast<size_t>(test.labels[i]), static_cast<size_t>(p));
  }
  const double n = static_cast<double>(test.images.size());
  const double digital_acc = digital_hits / n;
  const double photonic_acc = photonic_hits / n;
  const double parity = agreements / n;

  write_confusion_csv(cm, out_path(rc, "confusion.csv"));
  write_report_csv(out_path(rc, "infer_report.csv"),
                   {{"count", std::to_string(test.images.size())},
                    {"digital_accuracy", fmt(digital_acc)},
                    {"photonic_accuracy", fmt(photonic_acc)},
                    {"parity", fmt(parity)},
                    {"noise_enabled", rc.engine.noise_enabled ? "1" : "0"},
                    {"fidelity", to_string(rc.engine.fidelity)}});
  std::printf(
      "mnist-infer: %zu images, digital %.4f, photonic %.4f, agreement %.4f (noise %s)\n",
      test.images.size(), digital_acc, photonic_acc, parity,
      rc.engine.noise_enabled ? "on" : "off");
  std::printf("wrote confusion.csv infer_report.csv in %s\n", rc.out_dir.c_str());
}

size_t patch_origin_row(size_t patch, size_t grid, uint32_t stride) {
  return (patch - 1) / grid * stride;
}
size_t patch_origin_col(size_t patch, size_t grid, uint32_t stride) {
  return (patch - 1) % grid * stride;
}

struct DetectArgs {
  std::string image;
  std::vector<int> targets{0, 4, 8};
  size_t train_per_class = 80;
  size_t calib_scenes = 3;
  uint64_t data_seed = 11;
};

// scene digits keep a moderate pose so the demo exercises the detector well
// inside its training distribution
constexpr double kSceneSeverity = 0.5;

constexpr size_t kSceneDim = 68;  // 5x5 patch grid at window 28, stride 10

std::vector<LabeledScene> make_calibration_scenes(const DetectArgs& a, const DetectionSpec& spec) {
  // the four patch slots whose 28-pixel windows are pairwise disjoint on a
  // 68x68 scene; anything closer lets a neighbour's strokes bleed into the
  // window
  const std::vector<size_t> sparse = {1, 5, 21, 25};
  if (a.targets.size() > sparse.size()) {
    throw DataError("calibration scenes hold at most " + std::to_string(sparse.size()) +
                    " digits");
  }
  const size_t grid = spec.grid_dim(kSceneDim);
  std::vector<LabeledScene> scenes;
  for (size_t s = 0; s < a.calib_scenes; ++s) {
    std::vector<size_t> slots = sparse;
    RngStream rng(mix_keys(a.data_seed, kSaltScenePatch, s));
    for (size_t i = slots.size() - 1; i > 0; --i) {
      size_t j = std::min(i, static_cast<size_t>(rng.uniform() * static_cast<double>(i + 1)));
      std::swap(slots[i], slots[j]);
    }
    std::vector<Placement> placements;
    LabeledScene scene;
    for (size_t i = 0; i < a.targets.size(); ++i) {
      const size_t patch = slots[i];
      ImageTensor digit =
          render_digit(a.targets[i], mix_keys(a.data_seed, kSaltSceneRender, s, i), kSceneSeverity);
      placements.push_back({std::move(digit), patch_origin_row(patch, grid, spec.stride),
                            patch_origin_col(patch, grid, spec.stride)});
      scene.truths.push_back({a.targets[i], patch, 0.0});
    }
    scene.image = compose_scene(kSceneDim, kSceneDim, placements);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

ImageTensor make_target_scene(const DetectArgs& a, const DetectionSpec& spec,
                              std::vector<size_t>* patches_out) {
  // first target lands at the grid center-left patch, row 2 column 0; the
  // first three windows are pairwise disjoint
  const std::vector<size_t> slots = {11, 5, 25, 1, 21};
  if (a.targets.size() > slots.size()) {
    throw DataError("the built-in scene holds at most " + std::to_string(slots.size()) +
                    " digits");
  }
  const size_t grid = spec.grid_dim(kSceneDim);
  std::vector<Placement> placements;
  for (size_t i = 0; i < a.targets.size(); ++i) {
    ImageTensor digit =
        render_digit(a.targets[i],
                     mix_keys(a.data_seed, kSaltTargetScene, static_cast<uint64_t>(a.targets[i])),
                     kSceneSeverity);
    placements.push_back({std::move(digit), patch_origin_row(slots[i], grid, spec.stride),
                          patch_origin_col(slots[i], grid, spec.stride)});
    if (patches_out) patches_out->push_back(slots[i]);
  }
  return compose_scene(kSceneDim, kSceneDim, placements);
}

void run_detect(const GlobalArgs& g, const DetectArgs& a) {
  RunConfig rc = resolve_run_config(g);
  if (a.targets.empty()) throw ConfigError("detect needs at least one target digit");
  for (int t : a.targets) {
    if (t < 0 || t > 9) throw ConfigError("target digits must be 0..9");
  }
  DigitDataset train =
      make_digit_dataset(a.train_per_class, mix_keys(a.data_seed, kSaltDetectTrain), kSceneSeverity);
  DetectionSpec spec = train_detection_templates(train.images, train.labels, a.targets, 28, 10);
  std::vector<LabeledScene> scenes = make_calibration_scenes(a, spec);
  calibrate_detection_thresholds(spec, scenes);

  ImageTensor scene;
  std::vector<size_t> expected;
  if (!a.image.empty()) {
    scene = read_pgm(a.image);
  } else if (!rc.image_path.empty()) {
    scene = read_pgm(rc.image_path);
  } else {
    scene = make_target_scene(a, spec, &expected);
  }

  const CalibrationResult cal = calibrate_gain(rc.engine);
  DetectionResult res = sliding_window_detect(scene, spec, rc.engine, cal);
  Matrix digital = oracle::detect_digital(scene, spec);
  const double diff = max_abs_diff(std::span<const double>(res.decisions.data),
                                   std::span<const double>(digital.data));

  write_pgm(scene, out_path(rc, "scene.pgm"));
  write_matrix_csv(res.decisions, out_path(rc, "decisions.csv"));
  write_matrix_csv(digital, out_path(rc, "decisions_digital.csv"));
  {
    std::ofstream out(out_path(rc, "detections.csv"), std::ios::binary);
    if (!out) throw DataError("cannot open detections.csv for writing");
    out << "label,patch_index,decision_value\n";
    for (const Detection& d : res.detections) {
      out << d.label << "," << d.patch_index << "," << fmt(d.decision_value) << "\n";
    }
  }
  {
    std::ofstream out(out_path(rc, "thresholds.csv"), std::ios::binary);
    if (!out) throw DataError("cannot open thresholds.csv for writing");
    out << "label,threshold\n";
    for (size_t i = 0; i < spec.labels.size(); ++i) {
      out << spec.labels[i] << "," << fmt(spec.thresholds[i]) << "\n";
    }
  }
  for (size_t i = 0; i < spec.labels.size(); ++i) {
    write_matrix_csv(spec.templates[i],
                     out_path(rc, "template_" + std::to_string(spec.labels[i]) + ".csv"));
  }
  write_report_csv(out_path(rc, "detect_report.csv"),
                   {{"scene_dim", std::to_string(scene.height)},
                    {"patches", std::to_string(res.decisions.rows)},
                    {"classifiers", std::to_string(res.decisions.cols)},
                    {"detections", std::to_string(res.detections.size())},
                    {"max_abs_diff_vs_digital", fmt(diff)},
                    {"noise_enabled", rc.engine.noise_enabled ? "1" : "0"}});

  std::printf("detect: %zu patches x %zu classifiers, %zu detections\n", res.decisions.rows,
              res.decisions.cols, res.detections.size());
  for (const Detection& d : res.detections) {
    std::printf("  digit %d at patch %zu (decision %.4f)\n", d.label, d.patch_index,
                d.decision_value);
  }
  if (!expected.empty()) {
    std::printf("  expected patches:");
    for (size_t i = 0; i < expected.size(); ++i) {
      std::printf(" %d->%zu", a.targets[i], expected[i]);
    }
    std::printf("\n");
  }
  std::printf("wrote scene.pgm decisions.csv detections.csv thresholds.csv in %s\n",
              rc.out_dir.c_str());
}

struct WdmArgs {
  std::vector<int> digits{4, 2};
  std::string weights;
  size_t wavelengths = 2;
  std::optional<double> crosstalk_db;
  TrainArgs train;
};

void run_wdm_demo(const GlobalArgs& g, const WdmArgs& a) {
  RunConfig rc = resolve_run_config(g);
  if (a.digits.empty()) throw ConfigError("wdm-demo needs at least one digit");
  for (int d : a.digits) {
    if (d < 0 || d > 9) throw ConfigError("digits must be 0..9");
  }
  const ConvSpec conv = digit_conv();
  FcSpec fc = load_or_train_fc(rc, a.weights, a.train, conv);

  Matrix data(a.digits.size(), fc.weights.cols);
  for (size_t i = 0; i < a.digits.size(); ++i) {
    ImageTensor img = render_digit(
        a.digits[i], mix_keys(a.train.data_seed, kSaltDemoDigit, static_cast<uint64_t>(a.digits[i])));
    Matrix feats = oracle::conv2d_digital(img, conv);
    UnitRescale r = rescale_unit(std::span<const double>(feats.data));
    if (r.values.size() != data.cols) {
      throw DimensionError("weight bank expects " + std::to_string(data.cols) +
                           " features, conv produced " + std::to_string(r.values.size()));
    }
    std::copy(r.values.begin(), r.values.end(),
              data.data.begin() + static_cast<ptrdiff_t>(i * data.cols));
  }

  ChannelPlan plan = plan_matmul(data.rows, data.cols, fc.weights.rows, a.wavelengths, 1);
  if (a.crosstalk_db) {
    plan.crosstalk_db = *a.crosstalk_db;
    plan.validate();
  }
  const CalibrationResult cal = calibrate_gain(rc.engine);
  Matrix scores = execute_plan(data, fc.weights, plan, rc.engine, cal);
  Matrix sequential = batched_weighted_sum(data, fc.weights, rc.engine, cal);
  const double diff = max_abs_diff(std::span<const double>(scores.data),
                                   std::span<const double>(sequential.data));
  const double ops = throughput_estimate(plan, rc.engine.scheme.symbol_rate,
                                         rc.engine.scheme.guard_symbols);

  write_matrix_csv(scores, out_path(rc, "scores.csv"));
  write_text_file(out_path(rc, "plan.json"), plan_to_json(plan));
  ReportRows rows = {{"slot_count", std::to_string(plan.slot_count())},
                     {"parallel_channels", std::to_string(plan.parallel_channels())},
                     {"throughput_ops", fmt(ops)},
                     {"max_abs_diff_vs_sequential", fmt(diff)}};
  std::printf("wdm-demo: %zu digits on %zu wavelengths, %zu slots, %s\n", a.digits.size(),
              a.wavelengths, plan.slot_count(), format_ops(ops).c_str());
  for (size_t i = 0; i < a.digits.size(); ++i) {
    const int predicted = fc.class_labels[classify(scores.row(i))];
    rows.push_back({"digit_" + std::to_string(i), std::to_string(a.digits[i])});
    rows.push_back({"predicted_" + std::to_string(i), std::to_string(predicted)});
    std::printf("  digit %d -> predicted %d\n", a.digits[i], predicted);
  }
  write_report_csv(out_path(rc, "wdm_report.csv"), rows);
  std::printf("max |wdm - sequential| = %.3g\n", diff);
  std::printf("wrote scores.csv plan.json wdm_report.csv in %s\n", rc.out_dir.c_str());
}

struct PlanArgs {
  size_t data_rows = 4;
  size_t inner = 784;
  size_t weight_rows = 4;
  size_t wavelengths = 2;
  size_t spatial = 1;
  std::optional<double> crosstalk_db;
};

void run_plan(const GlobalArgs& g, const PlanArgs& a) {
  RunConfig rc = resolve_run_config(g);
  ChannelPlan plan = plan_matmul(a.data_rows, a.inner, a.weight_rows, a.wavelengths, a.spatial);
  if (a.crosstalk_db) {
    plan.crosstalk_db = *a.crosstalk_db;
    plan.validate();
  }
  const double peak = throughput_estimate(plan, rc.engine.scheme.symbol_rate);
  const double effective = throughput_estimate(plan, rc.engine.scheme.symbol_rate,
                                               rc.engine.scheme.guard_symbols);
  write_text_file(out_path(rc, "plan.json"), plan_to_json(plan));
  std::printf("plan: %zu assignments, %zu slots, %zu parallel channels\n",
              plan.assignments.size(), plan.slot_count(), plan.parallel_channels());
  std::printf("throughput at %.6g Bd: peak %s, with guard %s\n", rc.engine.scheme.symbol_rate,
              format_ops(peak).c_str(), format_ops(effective).c_str());
  std::printf("wrote plan.json in %s\n", rc.out_dir.c_str());
}

struct BenchArgs {
  double symbol_rate = 0.0;  // 0 means the configured scheme rate
  size_t wavelengths = 1;
  size_t spatial = 1;
  size_t inner = 784;
  uint32_t guard = 0;
};

void run_bench(const GlobalArgs& g, const BenchArgs& a) {
  RunConfig rc = resolve_run_config(g);
  const double rate = a.symbol_rate > 0.0 ? a.symbol_rate : rc.engine.scheme.symbol_rate;
  ChannelPlan plan = plan_matmul(a.wavelengths, a.inner, a.spatial, a.wavelengths, a.spatial);
  const double ops = throughput_estimate(plan, rate, a.guard);
  write_report_csv(out_path(rc, "bench.csv"), {{"symbol_rate", fmt(rate)},
                                               {"wavelengths", std::to_string(a.wavelengths)},
                                               {"spatial", std::to_string(a.spatial)},
                                               {"inner_dim", std::to_string(a.inner)},
                                               {"guard_symbols", std::to_string(a.guard)},
                                               {"parallel_channels",
                                                std::to_string(plan.parallel_channels())},
                                               {"ops_per_s", fmt(ops)}});
  std::printf("bench: %zu wavelength(s) x %zu spatial at %.6g Bd -> %s\n", a.wavelengths,
              a.spatial, rate, format_ops(ops).c_str());
  std::printf("wrote bench.csv in %s\n", rc.out_dir.c_str());
}

struct CalArgs {
  int injected = 0;
  size_t pilot_len = 64;
};

void run_calibrate(const GlobalArgs& g, const CalArgs& a) {
  RunConfig rc = resolve_run_config(g);
  const CalibrationResult cal = calibrate_gain(rc.engine);
  if (a.pilot_len < 32) throw ConfigError("sync pilot needs at least 32 symbols");
  const int span = 2 * static_cast<int>(rc.engine.scheme.samples_per_symbol);
  if (std::abs(a.injected + rc.engine.sync_offset) > span) {
    throw ConfigError("total misalignment exceeds the +/-2 symbol search range of " +
                      std::to_string(span) + " samples");
  }
  std::vector<double> pilot(a.pilot_len);
  RngStream rng(mix_keys(rc.engine.noise.rng_seed, kSaltPilot));
  for (double& p : pilot) p = rng.uniform() < 0.5 ? 0.0 : 1.0;
  const int recovered = find_sync_offset(rc.engine, pilot, a.injected);

  write_report_csv(out_path(rc, "calibration.csv"),
                   {{"gain", fmt(cal.gain)},
                    {"residual_offset", fmt(cal.residual_offset)},
                    {"found_sync_offset", std::to_string(cal.found_sync_offset)},
                    {"injected_offset", std::to_string(a.injected)},
                    {"recovered_offset", std::to_string(recovered)}});
  std::printf("calibrate: gain %.6g V/unit, residual offset %.3g V\n", cal.gain,
              cal.residual_offset);
  std::printf("sync: injected %d samples, recovered %d\n", a.injected, recovered);
  std::printf("wrote calibration.csv in %s\n", rc.out_dir.c_str());
}

void run_dump_waveform(const GlobalArgs& g, size_t symbols) {
  RunConfig rc = resolve_run_config(g);
  if (symbols == 0) throw ConfigError("dump-waveform needs at least one symbol");
  RngStream rng(mix_keys(rc.engine.noise.rng_seed, kSaltDump));
  std::vector<double> data(symbols);
  std::vector<double> weights(symbols);
  for (size_t k = 0; k < symbols; ++k) {
    data[k] = rng.uniform();
    weights[k] = 2.0 * rng.uniform() - 1.0;
  }
  OpticalFrame frame = simulate_optical_frame(data, weights, rc.engine);
  Waveform current = frame_photocurrent(frame, rc.engine);
  const double volts = integrate_frame(current, 0, current.samples.size(), rc.engine.bpd);

  write_waveform(frame.upper, out_path(rc, "upper.tcwf"));
  write_waveform(frame.lower, out_path(rc, "lower.tcwf"));
  write_waveform(current, out_path(rc, "photocurrent.tcwf"));
  write_waveform_csv(frame.upper, out_path(rc, "upper.csv"));
  write_waveform_csv(frame.lower, out_path(rc, "lower.csv"));
  write_waveform_csv(current, out_path(rc, "photocurrent.csv"));
  write_report_csv(out_path(rc, "waveform_report.csv"),
                   {{"symbols", std::to_string(symbols)},
                    {"samples", std::to_string(current.samples.size())},
                    {"sample_rate", fmt(current.sample_rate)},
                    {"integrated_volts", fmt(volts)}});
  std::printf("dump-waveform: %zu symbols, %zu samples, integrated reading %.6g V\n", symbols,
              current.samples.size(), volts);
  std::printf("wrote upper/lower/photocurrent .tcwf and .csv in %s\n", rc.out_dir.c_str());
}

void add_train_options(CLI::App* cmd, TrainArgs& t) {
  cmd->add_option("--per-class", t.per_class, "synthetic images per digit class");
  cmd->add_option("--epochs", t.epochs, "training epochs");
  cmd->add_option("--lr", t.learning_rate, "learning rate");
  cmd->add_option("--data-seed", t.data_seed, "dataset and shuffle seed");
}

}  // namespace

int cli_dispatch(std::vector<std::string> args) {
  CLI::App app{"photonic temporal weighted-summation simulator"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--seed", g.seed, "noise RNG seed");
  app.add_option("--noise", g.noise, "noise on or off")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--fidelity", g.fidelity, "weight modulator model")
      ->check(CLI::IsMember({"linearized", "physical"}));
  app.add_option("--out", g.out_dir, "artifact directory");
  app.add_option("--dataset", g.dataset_dir, "IDX digit dataset directory");

  std::string edge_image;
  auto* edge = app.add_subcommand("edge-detect", "photonic Laplacian edge map vs digital");
  edge->add_option("--image", edge_image, "input PGM, defaults to a built-in test image");
  edge->callback([&] { run_edge_detect(g, edge_image); });

  TrainArgs train_args;
  auto* train = app.add_subcommand("mnist-train", "train the digit classifier digitally");
  add_train_options(train, train_args);
  train->callback([&] { run_mnist_train(g, train_args); });

  TrainArgs infer_train;
  std::string infer_weights;
  size_t infer_count = 100;
  auto* infer = app.add_subcommand("mnist-infer", "photonic digit classification");
  add_train_options(infer, infer_train);
  infer->add_option("--weights", infer_weights, "trained weight bank CSV");
  infer->add_option("--count", infer_count, "test images to classify");
  infer->callback([&] { run_mnist_infer(g, infer_train, infer_weights, infer_count); });

  DetectArgs detect_args;
  auto* det = app.add_subcommand("detect", "sliding-window digit detection in a scene");
  det->add_option("--image", detect_args.image, "scene PGM, defaults to a built-in scene");
  det->add_option("--targets", detect_args.targets, "digits to detect");
  det->add_option("--train-per-class", detect_args.train_per_class,
                  "training images per digit class");
  det->add_option("--scenes", detect_args.calib_scenes, "threshold calibration scenes");
  det->add_option("--data-seed", detect_args.data_seed, "dataset and scene seed");
  det->callback([&] { run_detect(g, detect_args); });

  WdmArgs wdm_args;
  auto* wdm = app.add_subcommand("wdm-demo", "two digits classified on parallel wavelengths");
  wdm->add_option("--digits", wdm_args.digits, "digits to classify in parallel");
  wdm->add_option("--weights", wdm_args.weights, "trained weight bank CSV");
  wdm->add_option("--wavelengths", wdm_args.wavelengths, "wavelength channels");
  wdm->add_option("--crosstalk", wdm_args.crosstalk_db, "demux crosstalk in dB");
  add_train_options(wdm, wdm_args.train);
  wdm->callback([&] { run_wdm_demo(g, wdm_args); });

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "tile a matrix multiply across channels");
  plan->add_option("--data-rows", plan_args.data_rows, "data matrix rows");
  plan->add_option("--inner", plan_args.inner, "shared inner dimension");
  plan->add_option("--weight-rows", plan_args.weight_rows, "weight matrix rows");
  plan->add_option("--wavelengths", plan_args.wavelengths, "wavelength channels");
  plan->add_option("--spatial", plan_args.spatial, "spatial channels");
  plan->add_option("--crosstalk", plan_args.crosstalk_db, "demux crosstalk in dB");
  plan->callback([&] { run_plan(g, plan_args); });

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "throughput for a channel configuration");
  bench->add_option("--symbol-rate", bench_args.symbol_rate, "symbols per second");
  bench->add_option("--wavelengths", bench_args.wavelengths, "wavelength channels");
  bench->add_option("--spatial", bench_args.spatial, "spatial channels");
  bench->add_option("--inner", bench_args.inner, "dot product length");
  bench->add_option("--guard", bench_args.guard, "guard symbols per frame");
  bench->callback([&] { run_bench(g, bench_args); });

  CalArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "gain calibration and sync recovery");
  cal->add_option("--injected", cal_args.injected, "weight-stream misalignment in samples");
  cal->add_option("--pilot-len", cal_args.pilot_len, "sync pilot length in symbols");
  cal->callback([&] { run_calibrate(g, cal_args); });

  size_t dump_symbols = 16;
  auto* dump = app.add_subcommand("dump-waveform", "write one frame's optical waveforms");
  dump->add_option("--symbols", dump_symbols, "random symbols in the frame");
  dump->callback([&] { run_dump_waveform(g, dump_symbols); });

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const CalibrationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace tempocomp
