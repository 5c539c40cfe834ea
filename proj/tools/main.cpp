// hmlelm: train, evaluate and benchmark HML-ELM pipelines, check the
// type reducers, and generate or segment synthetic shape frames.
//
// Exit codes: 0 success, 2 usage or data error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hmlelm/eval.hpp"
#include "hmlelm/manifest.hpp"
#include "hmlelm/model_io.hpp"

namespace fs = std::filesystem;
using hml::Json;

namespace {

constexpr int kReportVersion = 1;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_json(const fs::path& path, const Json& j) { hml::write_file_atomic(path, j.dump(2) + "\n"); }

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

hml::PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed, int data_width) {
  int input_size = 0;
  hml::PipelineConfig c = hml::config_from_json(hml::read_json_file(path, "config"), &input_size);
  if (seed) c.seed = *seed;
  hml::require(input_size == 0 || input_size == data_width, hml::ErrorKind::kDimension,
               "config input_size " + std::to_string(input_size) + " does not match data width " +
                   std::to_string(data_width));
  return c;
}

hml::HmlModel train_model(const hml::LabeledDataset& ds, const hml::PipelineConfig& config) {
  hml::HmlModel m = hml::hml_train(ds.X, ds.labels, ds.n_classes(), config);
  m.class_names = ds.class_names;
  return m;
}

// ------------------------------------------------------------ train

struct TrainArgs {
  std::string config, data, out, report;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  const auto t0 = Clock::now();
  const auto ds = hml::load_manifest(a.data, "train");
  const double load_seconds = seconds_since(t0);
  const auto config = load_config(a.config, a.seed, static_cast<int>(ds.X.cols()));
  const auto model = train_model(ds, config);
  hml::save_model(a.out, model);

  Json report;
  report["version"] = kReportVersion;
  report["command"] = "train";
  report["config"] = hml::config_to_json(config);
  report["n_train"] = ds.X.rows();
  report["n_features"] = ds.X.cols();
  report["n_classes"] = model.n_classes;
  report["train_accuracy"] = model.record.train_accuracy;
  report["seconds"] = {{"load", load_seconds},
                       {"standardize", model.record.standardize_seconds},
                       {"stack", model.record.stack_seconds},
                       {"head", model.record.head_seconds},
                       {"train_total", model.record.standardize_seconds + model.record.stack_seconds +
                                           model.record.head_seconds}};
  write_json(a.report.empty() ? with_suffix(a.out, ".report.json") : fs::path(a.report), report);
  std::cout << "train accuracy " << model.record.train_accuracy << " on " << ds.X.rows() << " samples, "
            << report["seconds"]["train_total"].get<double>() << " s\n";
  return 0;
}

// ------------------------------------------------------------ eval

struct EvalArgs {
  std::string model, data, out, split = "test";
  double threshold = 0.82;
  std::size_t window = 40;
};

std::string confusion_csv(const hml::ConfusionMatrix& cm, const std::vector<std::string>& names) {
  std::ostringstream os;
  for (int c = 0; c < cm.n_classes(); ++c) os << (c ? "," : "") << names[static_cast<std::size_t>(c)];
  os << "\n";
  for (int r = 0; r < cm.n_classes(); ++r) {
    for (int c = 0; c < cm.n_classes(); ++c) os << (c ? "," : "") << cm.counts(r, c);
    os << "\n";
  }
  return os.str();
}

// Per-stream MAP decisions over frames grouped by stream id, in file order.
Json active_report(const Eigen::Ref<const hml::Matrix>& scores, const hml::LabeledDataset& ds, double t_c,
                   std::size_t window) {
  std::map<int, std::vector<Eigen::Index>> rows;
  for (std::size_t p = 0; p < ds.streams.size(); ++p)
    if (ds.streams[p] >= 0) rows[ds.streams[p]].push_back(static_cast<Eigen::Index>(p));
  std::size_t decided = 0, correct = 0;
  double frames = 0.0;
  for (const auto& [id, idx] : rows) {
    hml::Matrix s(static_cast<Eigen::Index>(idx.size()), scores.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) s.row(static_cast<Eigen::Index>(i)) = scores.row(idx[i]);
    const auto out = hml::run_stream(s, t_c, window);
    if (out.decision) {
      ++decided;
      correct += *out.decision == ds.labels[static_cast<std::size_t>(idx.front())];
      frames += static_cast<double>(out.frames_seen);
    }
  }
  Json j;
  j["threshold"] = t_c;
  j["window"] = window;
  j["streams"] = rows.size();
  j["decided"] = decided;
  j["decided_correct"] = correct;
  j["decided_fraction"] = rows.empty() ? 0.0 : static_cast<double>(decided) / static_cast<double>(rows.size());
  j["mean_frames_to_decision"] = decided ? frames / static_cast<double>(decided) : 0.0;
  return j;
}

int cmd_eval(const EvalArgs& a) {
  const auto model = hml::load_model(a.model);
  const auto ds = hml::load_manifest(a.data, a.split);
  hml::require(ds.X.cols() == model.input_width(), hml::ErrorKind::kDimension,
               "feature width " + std::to_string(ds.X.cols()) + " does not match model input width " +
                   std::to_string(model.input_width()));
  hml::require(ds.n_classes() <= model.n_classes, hml::ErrorKind::kDataFormat, "data has more classes than the model");
  const auto t0 = Clock::now();
  const hml::Matrix scores = hml::hml_predict(model, ds.X);
  const double infer_seconds = seconds_since(t0);
  const auto pred = hml::argmax_rows(scores);
  const auto cm = hml::confusion(ds.labels, pred, model.n_classes);
  const auto acc = hml::accuracy(cm);

  Json metrics;
  metrics["version"] = kReportVersion;
  metrics["command"] = "eval";
  metrics["split"] = a.split;
  metrics["n"] = ds.X.rows();
  metrics["accuracy"] = acc.overall;
  metrics["per_class_accuracy"] = acc.per_class;
  metrics["class_names"] = model.class_names;
  metrics["inference_seconds_per_frame"] = infer_seconds / static_cast<double>(std::max<Eigen::Index>(1, ds.X.rows()));
  const bool has_streams = std::any_of(ds.streams.begin(), ds.streams.end(), [](int s) { return s >= 0; });
  if (has_streams) metrics["active"] = active_report(scores, ds, a.threshold, a.window);

  const fs::path prefix = a.out.empty() ? with_suffix(a.model, "." + a.split) : fs::path(a.out);
  hml::write_file_atomic(with_suffix(prefix, ".confusion.csv"), confusion_csv(cm, model.class_names));
  write_json(with_suffix(prefix, ".metrics.json"), metrics);
  std::cout << a.split << " accuracy " << acc.overall << " on " << ds.X.rows() << " samples\n";
  if (has_streams)
    std::cout << "streams decided " << metrics["active"]["decided"] << "/" << metrics["active"]["streams"] << "\n";
  return 0;
}

// ------------------------------------------------------------ bench

struct BenchArgs {
  std::string config, data, out;
  std::optional<std::uint64_t> seed;
  int elm_hidden = 1000;
};

int cmd_bench(const BenchArgs& a) {
  const auto train = hml::load_manifest(a.data, "train");
  const auto test = hml::load_manifest(a.data, "test");
  const auto hml_config = load_config(a.config, a.seed, static_cast<int>(train.X.cols()));

  hml::PipelineConfig elm = hml_config;
  elm.layer_sizes.clear();
  elm.Cs = {hml_config.head_C()};
  elm.head = hml::HeadKind::kElm;
  elm.head_size = a.elm_hidden;
  hml::PipelineConfig ml = hml_config;
  ml.head = hml::HeadKind::kRidge;

  Json rows = Json::array();
  std::cout << "| model | accuracy | train s | test ms/frame |\n|---|---|---|---|\n";
  for (const auto& [name, config] : {std::pair{"elm", elm}, std::pair{"ml-elm", ml}, std::pair{"hml-elm", hml_config}}) {
    const auto t0 = Clock::now();
    const auto model = train_model(train, config);
    const double train_seconds = seconds_since(t0);
    const auto t1 = Clock::now();
    const hml::Matrix scores = hml::hml_predict(model, test.X);
    const double test_seconds = seconds_since(t1);
    const double acc = hml::accuracy_of(scores, test.labels);
    const double ms = 1e3 * test_seconds / static_cast<double>(std::max<Eigen::Index>(1, test.X.rows()));
    rows.push_back({{"model", name},
                    {"config", hml::config_to_json(config)},
                    {"accuracy", acc},
                    {"train_accuracy", model.record.train_accuracy},
                    {"train_seconds", train_seconds},
                    {"inference_ms_per_frame", ms}});
    std::cout << "| " << name << " | " << std::fixed << std::setprecision(4) << acc << " | " << std::setprecision(2)
              << train_seconds << " | " << std::setprecision(3) << ms << " |\n"
              << std::defaultfloat;
  }
  Json table;
  table["version"] = kReportVersion;
  table["command"] = "bench";
  table["n_train"] = train.X.rows();
  table["n_test"] = test.X.rows();
  table["rows"] = rows;
  if (!a.out.empty()) write_json(a.out, table);
  return 0;
}

// ------------------------------------------------------------ oracle

struct OracleArgs {
  std::size_t trials = 1000;
  std::size_t max_rules = 12;
  std::uint64_t seed = 7;
  std::string out;
};

int cmd_oracle(const OracleArgs& a) {
  hml::require(a.trials >= 1, hml::ErrorKind::kInvalidArgument, "oracle: --trials must be at least 1");
  hml::require(a.max_rules >= 2, hml::ErrorKind::kInvalidArgument, "oracle: --max-rules must be at least 2");
  hml::require(a.max_rules <= hml::kBruteForceMaxRules, hml::ErrorKind::kInvalidArgument,
               "oracle guard: --max-rules above " + std::to_string(hml::kBruteForceMaxRules) +
                   " makes exhaustive enumeration infeasible");
  const auto t0 = Clock::now();
  hml::Rng rng(a.seed);
  double sc_err = 0.0, ekm_err = 0.0;
  std::size_t nt_violations = 0;
  auto rel = [](double x, double ref) { return std::fabs(x - ref) / std::max(1.0, std::fabs(ref)); };
  for (std::size_t t = 0; t < a.trials; ++t) {
    const std::size_t m = 2 + rng.index(a.max_rules - 1);
    hml::FiringInterval f;
    f.lower.resize(static_cast<Eigen::Index>(m));
    f.upper.resize(static_cast<Eigen::Index>(m));
    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double u = rng.uniform(), v = rng.uniform();
      f.lower(static_cast<Eigen::Index>(j)) = std::min(u, v);
      f.upper(static_cast<Eigen::Index>(j)) = std::max(u, v);
      w[j] = rng.uniform(-10.0, 10.0);
    }
    const auto bf = hml::brute_force_cos(f, w);
    const auto sc = hml::sc_reduce(f, w);
    const auto ekm = hml::ekm_reduce(f, w);
    sc_err = std::max({sc_err, rel(sc.y_l, bf.y_l), rel(sc.y_r, bf.y_r)});
    ekm_err = std::max({ekm_err, rel(ekm.y_l, bf.y_l), rel(ekm.y_r, bf.y_r)});
    const double nt = hml::nt_defuzz(f, w);
    nt_violations += !(bf.y_l <= nt && nt <= bf.y_r);
  }
  const double secs = seconds_since(t0);
  const bool pass = sc_err < 1e-9 && ekm_err < 1e-9 && nt_violations == 0;
  Json j = {{"version", kReportVersion},     {"command", "oracle"},         {"trials", a.trials},
            {"max_rules", a.max_rules},      {"seed", a.seed},              {"max_rel_error_sc", sc_err},
            {"max_rel_error_ekm", ekm_err},  {"nt_violations", nt_violations}, {"seconds", secs},
            {"pass", pass}};
  if (!a.out.empty()) write_json(a.out, j);
  std::cout << "max relative endpoint error: sc " << sc_err << ", ekm " << ekm_err << "\n"
            << "nt containment violations: " << nt_violations << "\n"
            << "trials " << a.trials << " in " << secs << " s\n";
  return pass ? 0 : 3;
}

// ------------------------------------------------------------ synth

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 1;
  std::size_t per_class = 1200;
  double test_fraction = 0.3;
  std::size_t streams_per_class = 0;
  std::size_t stream_frames = 120;
  double noise = 0.04;
};

int cmd_synth(const SynthArgs& a) {
  hml::require(a.per_class >= 1, hml::ErrorKind::kInvalidArgument, "synth: --per-class must be positive");
  hml::require(a.test_fraction >= 0.0 && a.test_fraction < 1.0, hml::ErrorKind::kInvalidArgument,
               "synth: --test-fraction must be in [0, 1)");
  const fs::path dir(a.out);
  fs::create_directories(dir / "frames");
  hml::SynthParams params;
  params.noise_level = a.noise;
  const hml::Rng root(a.seed);

  Json frames = Json::array();
  std::size_t counter = 0;
  auto emit = [&](const hml::SynthFrame& f, const std::string& split, int stream) {
    std::ostringstream name;
    name << "frames/f" << std::setw(6) << std::setfill('0') << counter++ << ".ppm";
    hml::write_pnm(dir / name.str(), f.image);
    Json e = {{"path", name.str()}, {"label", f.label}, {"split", split}};
    if (stream >= 0) e["stream"] = stream;
    frames.push_back(e);
  };

  const auto n_test = static_cast<std::size_t>(std::lround(a.test_fraction * static_cast<double>(a.per_class)));
  for (int k = 0; k < 4; ++k) {
    hml::Rng rng = root.split(static_cast<std::uint64_t>(k));
    for (std::size_t i = 0; i < a.per_class; ++i) {
      const hml::Pose pose = hml::random_pose(rng, params);
      emit(hml::synth_shape(static_cast<hml::ShapeKind>(k), pose, rng, params), i < a.per_class - n_test ? "train" : "test", -1);
    }
  }
  int stream_id = 0;
  for (int k = 0; k < 4; ++k) {
    hml::Rng rng = root.split(100 + static_cast<std::uint64_t>(k));
    for (std::size_t s = 0; s < a.streams_per_class; ++s, ++stream_id) {
      const hml::Pose base = hml::random_pose(rng, params);
      for (std::size_t t = 0; t < a.stream_frames; ++t)
        emit(hml::synth_shape(static_cast<hml::ShapeKind>(k), hml::jitter_pose(base, rng, params), rng, params), "stream",
             stream_id);
    }
  }
  Json manifest;
  manifest["format"] = "ppm";
  manifest["class_names"] = hml::kShapeNames;
  manifest["hue_band"] = {hml::kRedBand.lo_deg, hml::kRedBand.hi_deg};
  manifest["seed"] = a.seed;
  manifest["frames"] = frames;
  write_json(dir / "manifest.json", manifest);
  std::cout << "wrote " << counter << " frames to " << dir.string() << "\n";
  return 0;
}

// ------------------------------------------------------------ segment

struct SegmentArgs {
  std::string data, out;
  double hue_lo = hml::kRedBand.lo_deg, hue_hi = hml::kRedBand.hi_deg;
  double threshold = 0.5;
};

int cmd_segment(const SegmentArgs& a) {
  hml::require(fs::exists(a.data), hml::ErrorKind::kIo, "frame not found: " + a.data);
  const auto frame = hml::read_pnm(a.data);
  hml::SegmentParams params;
  params.threshold = a.threshold;
  const auto seg = hml::segment_object(frame, {a.hue_lo, a.hue_hi}, params);
  const hml::RowVector patch = hml::extract_patch(seg.mask, seg.centroid);
  Json j = {{"centroid", {seg.centroid.row, seg.centroid.col}}, {"area", seg.area}, {"patch_ones", patch.sum()}};
  if (!a.out.empty()) {
    hml::write_pnm(with_suffix(a.out, ".mask.pgm"), seg.mask);
    hml::ImageFrame p(hml::kPatchSide, hml::kPatchSide, hml::PixelFormat::kBinary);
    for (Eigen::Index i = 0; i < patch.size(); ++i) p.pixels[static_cast<std::size_t>(i)] = patch(i) > 0.5;
    hml::write_pnm(with_suffix(a.out, ".patch.pgm"), p);
    write_json(with_suffix(a.out, ".json"), j);
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int exit_code_for(hml::ErrorKind k) {
  switch (k) {
    case hml::ErrorKind::kRankDeficient:
    case hml::ErrorKind::kVacuousFiring:
    case hml::ErrorKind::kNumerical: return 3;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HML-ELM toolkit: train, evaluate, benchmark, reducer oracle, synthetic shapes"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a pipeline and write a model file");
  t->add_option("--config", train.config, "pipeline config JSON")->required();
  t->add_option("--data", train.data, "dataset manifest JSON")->required();
  t->add_option("--out", train.out, "model file to write")->required();
  t->add_option("--report", train.report, "training report JSON (default: <out>.report.json)");
  t->add_option("--seed", train.seed, "overrides the config seed");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a model on a manifest split");
  e->add_option("--model", eval.model, "model file")->required();
  e->add_option("--data", eval.data, "dataset manifest JSON")->required();
  e->add_option("--split", eval.split, "manifest split")->capture_default_str();
  e->add_option("--out", eval.out, "output prefix for .confusion.csv and .metrics.json");
  e->add_option("--threshold", eval.threshold, "MAP decision threshold for streams")->capture_default_str();
  e->add_option("--window", eval.window, "frames per MAP vote window")->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "compare ELM, ML-ELM and HML-ELM on one manifest");
  b->add_option("--config", bench.config, "HML-ELM config JSON")->required();
  b->add_option("--data", bench.data, "dataset manifest JSON")->required();
  b->add_option("--out", bench.out, "table JSON");
  b->add_option("--seed", bench.seed, "overrides the config seed");
  b->add_option("--elm-hidden", bench.elm_hidden, "hidden nodes of the ELM baseline")->capture_default_str();

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "check SC and EKM against exhaustive enumeration");
  o->add_option("--trials", oracle.trials)->capture_default_str();
  o->add_option("--max-rules", oracle.max_rules)->capture_default_str();
  o->add_option("--seed", oracle.seed)->capture_default_str();
  o->add_option("--out", oracle.out, "report JSON");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write a synthetic colored-shape dataset");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--per-class", synth.per_class)->capture_default_str();
  s->add_option("--test-fraction", synth.test_fraction)->capture_default_str();
  s->add_option("--streams", synth.streams_per_class, "MAP streams per class")->capture_default_str();
  s->add_option("--stream-frames", synth.stream_frames)->capture_default_str();
  s->add_option("--noise", synth.noise, "Gaussian pixel noise as a fraction of 255")->capture_default_str();

  SegmentArgs seg;
  auto* g = app.add_subcommand("segment", "segment one PPM frame and extract its patch");
  g->add_option("--data", seg.data, "PPM frame")->required();
  g->add_option("--out", seg.out, "output prefix for mask, patch and JSON");
  g->add_option("--hue-lo", seg.hue_lo)->capture_default_str();
  g->add_option("--hue-hi", seg.hue_hi)->capture_default_str();
  g->add_option("--threshold", seg.threshold, "binary threshold as a fraction of the blurred maximum")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(eval);
    if (*b) return cmd_bench(bench);
    if (*o) return cmd_oracle(oracle);
    if (*s) return cmd_synth(synth);
    if (*g) return cmd_segment(seg);
  } catch (const hml::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code_for(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 2;
}
