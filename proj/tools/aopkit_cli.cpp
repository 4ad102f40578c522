// aopkit: batch front-end for frame measurement, ensembling, metrics,
// phantom generation, augmentation and frame sampling.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aopkit/biometry.hpp"
#include "aopkit/dataprep.hpp"
#include "aopkit/ensemble.hpp"
#include "aopkit/io.hpp"
#include "aopkit/metrics.hpp"
#include "aopkit/overlay.hpp"
#include "aopkit/phantom.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace aopkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config

struct Config {
  json doc = json::object();

  void load(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config " + path + " must be a JSON object");
  }

  /// Copies `key` into `value` unless the flag was given on the command line.
  template <typename T>
  void apply(const std::string& key, T& value, const CLI::Option* flag) const {
    if (flag && flag->count() > 0) return;
    if (!doc.contains(key)) return;
    try {
      value = doc.at(key).get<T>();
    } catch (const json::exception& e) {
      throw UsageError("config key " + key + ": " + e.what());
    }
  }

  void apply_range(const std::string& key, Range& r) const {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if (!v.is_array() || v.size() != 2) throw UsageError("config key " + key + " must be [lo, hi]");
    r = {v[0].get<double>(), v[1].get<double>()};
  }
};

struct RefineFlags {
  RefineParams params;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["kernel_w"] = app->add_option("--kernel-w", params.kernel_w, "closing kernel width");
    opts["kernel_h"] = app->add_option("--kernel-h", params.kernel_h, "closing kernel height");
    opts["canny_min"] = app->add_option("--canny-min", params.canny_min, "edge hysteresis low");
    opts["canny_max"] = app->add_option("--canny-max", params.canny_max, "edge hysteresis high");
    opts["prune_distance"] = app->add_option("--prune-distance", params.prune_distance,
                                             "pixels kept beyond the fitted ellipse");
    opts["max_prune"] = app->add_option("--max-prune", params.max_prune, "prune iteration cap");
    opts["ellipse_accept_ratio"] = app->add_option("--ellipse-accept-ratio",
                                                   params.ellipse_accept_ratio,
                                                   "use the ellipse below this ratio");
  }

  void resolve(const Config& c) {
    c.apply("kernel_w", params.kernel_w, opts["kernel_w"]);
    c.apply("kernel_h", params.kernel_h, opts["kernel_h"]);
    c.apply("canny_min", params.canny_min, opts["canny_min"]);
    c.apply("canny_max", params.canny_max, opts["canny_max"]);
    c.apply("prune_distance", params.prune_distance, opts["prune_distance"]);
    c.apply("max_prune", params.max_prune, opts["max_prune"]);
    c.apply("ellipse_accept_ratio", params.ellipse_accept_ratio, opts["ellipse_accept_ratio"]);
    try {
      params.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
};

// ---------------------------------------------------------------- inputs

bool is_input_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pgm" || ext == ".fpm";
}

/// Expands directories (non-recursively) and sorts by file name.
std::vector<fs::path> collect_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    const fs::path p(a);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && is_input_file(entry.path())) out.push_back(entry.path());
      }
    } else {
      out.push_back(p);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

/// A frame file is either a label mask (PGM) or a probability map (FPM),
/// told apart by the magic bytes.
LabelMask load_frame(const fs::path& p) {
  const auto bytes = io::read_file(p);
  if (bytes.size() >= 3 && bytes[0] == 'F' && bytes[1] == 'P' && bytes[2] == 'M') {
    return decide(io::decode_prob_map(bytes));
  }
  return io::decode_label_mask(bytes);
}

/// Runs `work(i)` for i in [0, n) on up to `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, int jobs, F work) {
  const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------- measure

struct MeasureArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::string overlay_dir;
  bool emit_overlays = false;
  int jobs = 1;
  CLI::Option* jobs_opt = nullptr;
  RefineFlags refine;
};

int cmd_measure(MeasureArgs& a, const Config& cfg) {
  a.refine.resolve(cfg);
  cfg.apply("jobs", a.jobs, a.jobs_opt);
  if (a.jobs < 1) throw UsageError("--jobs must be >= 1");
  const auto files = collect_inputs(a.inputs);
  if (files.empty()) throw UsageError("measure: no input frames");

  std::vector<std::optional<io::MeasurementReport>> rows(files.size());
  std::vector<std::string> errors(files.size());
  fs::path overlay_dir = a.overlay_dir.empty() ? fs::path(a.output).parent_path() : fs::path(a.overlay_dir);
  if (a.emit_overlays && !overlay_dir.empty()) fs::create_directories(overlay_dir);

  parallel_for(files.size(), a.jobs, [&](std::size_t i) {
    try {
      const LabelMask labels = load_frame(files[i]);
      const auto r = measure_frame(labels, a.refine.params);
      rows[i] = io::MeasurementReport{files[i].stem().string(), r.aop, r.hsd,
                                      r.ps.used_ellipse, r.fh.used_ellipse,
                                      r.ps.prune_iterations, r.fh.prune_iterations};
      if (a.emit_overlays) {
        io::write_pixmap(render_overlay(labels, r), overlay_dir / (files[i].stem().string() + ".ppm"));
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<io::MeasurementReport> ok;
  int failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (rows[i]) {
      ok.push_back(*rows[i]);
    } else {
      ++failed;
      std::cerr << "measure: " << files[i].string() << ": " << errors[i] << "\n";
    }
  }
  io::write_report_csv(ok, a.output);
  if (failed) {
    std::cerr << "measure: " << failed << " of " << files.size() << " frames failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- ensemble

struct EnsembleArgs {
  std::vector<std::string> members;
  std::string output;
  std::string mask;
  bool vote = false;
};

int cmd_ensemble(EnsembleArgs& a, const Config&) {
  if (a.members.empty()) throw UsageError("ensemble: no member files");
  if (a.output.empty() && a.mask.empty()) throw UsageError("ensemble: give --output and/or --mask");
  if (a.vote && a.mask.empty()) throw UsageError("ensemble: --vote needs --mask");
  std::vector<ProbMap> maps;
  for (const auto& m : a.members) {
    try {
      maps.push_back(io::read_prob_map(m));
    } catch (const Error& e) {
      throw Error(m + ": " + e.what());
    }
    if (!maps.back().same_shape(maps.front())) {
      throw DimensionMismatch("member " + m + " shape differs from " + a.members.front());
    }
  }
  const ProbMap avg = average(maps);
  if (!a.output.empty()) io::write_prob_map(avg, a.output);
  if (!a.mask.empty()) io::write_label_mask(a.vote ? vote(maps) : decide(avg), a.mask);
  return kExitOk;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  std::vector<std::string> pred;
  std::vector<std::string> gt;
  std::string scores;
  std::string pred_report;
  std::string gt_report;
  std::string output;
  double threshold = kDecisionThreshold;
  CLI::Option* threshold_opt = nullptr;
};

int cmd_metrics(MetricsArgs& a, const Config& cfg) {
  cfg.apply("threshold", a.threshold, a.threshold_opt);
  json out = {{"acc", nullptr}, {"f1", nullptr}, {"auc", nullptr}, {"mcc", nullptr},
              {"dsc", nullptr}, {"asd", nullptr}, {"hd", nullptr},
              {"d_aop", nullptr}, {"d_hsd", nullptr}};
  if (a.pred.empty() && a.gt.empty() && a.scores.empty() && a.pred_report.empty()) {
    throw UsageError("metrics: nothing to evaluate");
  }

  if (!a.scores.empty()) {
    std::vector<double> s;
    std::vector<int> l;
    for (const auto& r : io::read_frame_scores(a.scores)) {
      if (!r.score || !r.label) throw ParseError(a.scores + ": every row needs score and label", 0);
      s.push_back(*r.score);
      l.push_back(*r.label);
    }
    if (s.empty()) throw UsageError("metrics: " + a.scores + " has no rows");
    const auto c = confusion(s, l, a.threshold);
    out["acc"] = accuracy(c);
    out["f1"] = f1_score(c);
    out["mcc"] = mcc(c);
    try {
      out["auc"] = auc(s, l);
    } catch (const UndefinedMetric& e) {
      std::cerr << "metrics: " << e.what() << "\n";
    }
  }

  if (!a.pred.empty() || !a.gt.empty()) {
    const auto pred = collect_inputs(a.pred);
    const auto gt = collect_inputs(a.gt);
    std::map<std::string, fs::path> gt_by_name;
    for (const auto& g : gt) gt_by_name[g.stem().string()] = g;
    if (pred.size() != gt.size()) {
      throw UsageError("metrics: " + std::to_string(pred.size()) + " predictions vs " +
                       std::to_string(gt.size()) + " ground truths");
    }
    double dsc = 0, asd = 0, hd = 0;
    int n_dist = 0;
    for (const auto& p : pred) {
      const auto it = gt_by_name.find(p.stem().string());
      if (it == gt_by_name.end()) throw UsageError("metrics: no ground truth for " + p.string());
      const auto s = seg_scores(load_frame(p), load_frame(it->second));
      dsc += s.mean.dsc;
      if (s.mean.asd && s.mean.hd) {
        asd += *s.mean.asd;
        hd += *s.mean.hd;
        ++n_dist;
      }
    }
    if (pred.empty()) throw UsageError("metrics: no mask pairs");
    out["dsc"] = dsc / static_cast<double>(pred.size());
    if (n_dist) {
      out["asd"] = asd / n_dist;
      out["hd"] = hd / n_dist;
    }
  }

  if (!a.pred_report.empty() || !a.gt_report.empty()) {
    if (a.pred_report.empty() || a.gt_report.empty()) {
      throw UsageError("metrics: --pred-report and --gt-report go together");
    }
    std::map<std::string, io::MeasurementReport> truth;
    for (const auto& r : io::read_report_csv(a.gt_report)) truth[r.frame] = r;
    double d_aop = 0, d_hsd = 0;
    int n = 0;
    for (const auto& r : io::read_report_csv(a.pred_report)) {
      const auto it = truth.find(r.frame);
      if (it == truth.end()) throw UsageError("metrics: frame " + r.frame + " missing from ground truth");
      const auto d = biometry_delta(r.aop_deg, r.hsd_px, it->second.aop_deg, it->second.hsd_px);
      d_aop += d.d_aop;
      d_hsd += d.d_hsd;
      ++n;
    }
    if (n) {
      out["d_aop"] = d_aop / n;
      out["d_hsd"] = d_hsd / n;
    }
  }

  const std::string text = out.dump(2) + "\n";
  if (a.output.empty() || a.output == "-") {
    std::cout << text;
  } else {
    io::write_text(a.output, text);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- phantom

struct PhantomArgs {
  int count = 1;
  std::uint64_t seed = 0;
  int size = 512;
  std::string out_dir;
  std::vector<std::string> perturb;
  CLI::Option* count_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* size_opt = nullptr;
};

Perturbation parse_perturbation(const std::vector<std::string>& items, std::uint64_t seed) {
  Perturbation p;
  p.seed = seed;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--perturb expects key=value, got " + kv);
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      try {
        if (key == "holes") p.holes = std::stoi(val);
        else if (key == "protrusions") p.protrusions = std::stoi(val);
        else if (key == "noise") p.boundary_noise = std::stoi(val);
        else if (key == "hole_radius_max") p.hole_radius_max = std::stod(val);
        else if (key == "protrusion_length_max") p.protrusion_length_max = std::stod(val);
        else throw UsageError("unknown perturbation " + key);
      } catch (const std::logic_error&) {
        throw UsageError("bad value in --perturb " + kv);
      }
    }
  }
  return p;
}

json ellipse_json(const Ellipse& e) {
  return {{"cx", e.center.x}, {"cy", e.center.y}, {"a", e.a}, {"b", e.b}, {"theta_deg", e.theta}};
}

json point_json(Point p) { return json::array({p.x, p.y}); }

int cmd_phantom(PhantomArgs& a, const Config& cfg) {
  cfg.apply("count", a.count, a.count_opt);
  cfg.apply("seed", a.seed, a.seed_opt);
  cfg.apply("size", a.size, a.size_opt);
  if (a.count < 1) throw UsageError("--count must be >= 1");
  if (a.size < 16) throw UsageError("--size must be >= 16");
  const Perturbation base = parse_perturbation(a.perturb, a.seed);
  try {
    base.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(a.out_dir);
  for (int i = 0; i < a.count; ++i) {
    const auto scene = random_scene(a.seed, static_cast<std::uint64_t>(i), a.size);
    const auto truth = analytic_biometry(scene);
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04d", i);
    const LabelMask mask = render(scene);
    io::write_label_mask(mask, fs::path(a.out_dir) / (std::string(name) + ".pgm"));
    json side = {{"seed", a.seed},
                 {"index", i},
                 {"width", scene.width},
                 {"height", scene.height},
                 {"ps", ellipse_json(scene.ps)},
                 {"fh", ellipse_json(scene.fh)},
                 {"aop_deg", truth.aop},
                 {"hsd_px", truth.hsd},
                 {"apex", point_json(truth.apex)},
                 {"proximal", point_json(truth.proximal)},
                 {"tangent", point_json(truth.tangent)},
                 {"head_point", point_json(truth.head_point)}};
    if (!base.is_identity()) {
      Perturbation p = base;
      p.seed = rng::hash({a.seed, static_cast<std::uint64_t>(i)});
      io::write_label_mask(perturb(mask, p), fs::path(a.out_dir) / (std::string(name) + "_perturbed.pgm"));
      side["perturbation"] = {{"holes", p.holes},
                              {"protrusions", p.protrusions},
                              {"noise", p.boundary_noise},
                              {"seed", p.seed}};
    }
    io::write_text(fs::path(a.out_dir) / (std::string(name) + ".json"), side.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- augment

struct AugmentArgs {
  std::string image;
  std::string mask;
  std::string output;
  std::string mask_output;
  std::uint64_t index = 0;
  AugmentParams params;
  std::map<std::string, CLI::Option*> opts;
};

void resolve_augment(AugmentArgs& a, const Config& c) {
  auto& p = a.params;
  c.apply("flip_prob", p.flip_prob, a.opts["flip_prob"]);
  c.apply("noise_prob", p.noise_prob, nullptr);
  c.apply("gamma_prob", p.gamma_prob, nullptr);
  c.apply("contrast_prob", p.contrast_prob, nullptr);
  c.apply("affine_prob", p.affine_prob, nullptr);
  c.apply("translate", p.translate, nullptr);
  c.apply("rotate_deg", p.rotate_deg, nullptr);
  c.apply("seed", p.seed, a.opts["seed"]);
  c.apply_range("noise_sigma", p.noise_sigma);
  c.apply_range("gamma", p.gamma);
  c.apply_range("contrast", p.contrast);
  c.apply_range("scale", p.scale);
  try {
    p.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

int cmd_augment(AugmentArgs& a, const Config& cfg) {
  resolve_augment(a, cfg);
  if (!a.mask.empty() && a.mask_output.empty()) throw UsageError("augment: --mask needs --mask-output");
  const auto img = normalize_intensity(io::read_greymap(a.image));
  std::optional<LabelMask> mask;
  if (!a.mask.empty()) mask = io::read_label_mask(a.mask);
  const auto r = augment(img, mask, a.params, a.index);
  io::write_greymap(to_8bit(r.image), a.output);
  if (r.mask) io::write_label_mask(*r.mask, a.mask_output);
  return kExitOk;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::string videos;
  std::string output;
  int n_pos = kDefaultPositiveFrames;
  int n_neg = kDefaultNegativeFrames;
  std::uint64_t seed = 0;
  CLI::Option* n_pos_opt = nullptr;
  CLI::Option* n_neg_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

/// Reads "video_id,length,label" rows (header optional).
std::vector<VideoInfo> read_videos(const std::string& path) {
  const auto bytes = io::read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<VideoInfo> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = io::detail::split_csv_line(line);
    if (out.empty() && !f.empty() && f[0] == "video_id") continue;
    if (f.size() != 3) throw ParseError(path + ": expected video_id,length,label", here);
    out.push_back({f[0], static_cast<int>(io::detail::parse_long(f[1], "length")),
                   static_cast<int>(io::detail::parse_long(f[2], "label"))});
  }
  return out;
}

int cmd_sample(SampleArgs& a, const Config& cfg) {
  cfg.apply("n_pos", a.n_pos, a.n_pos_opt);
  cfg.apply("n_neg", a.n_neg, a.n_neg_opt);
  cfg.apply("seed", a.seed, a.seed_opt);
  if (a.n_pos < 1 || a.n_neg < 1) throw UsageError("--n-pos and --n-neg must be >= 1");
  const auto plan = sparse_sample(read_videos(a.videos), a.n_pos, a.n_neg, a.seed);
  for (const auto& w : plan.warnings) std::cerr << "sample: " << w << "\n";
  std::vector<io::FrameRecord> rows;
  for (const auto& v : plan.videos) {
    for (int f : v.frames) rows.push_back({v.id, f, v.label, std::nullopt});
  }
  io::write_frame_scores(rows, a.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrapartum ultrasound biometry toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config; command-line flags take precedence");

  MeasureArgs measure;
  auto* m = app.add_subcommand("measure", "AoP/HSD for every frame, written as a CSV report");
  m->add_option("inputs", measure.inputs, "mask (.pgm) or probability map (.fpm) files or directories")
      ->required();
  m->add_option("-o,--output", measure.output, "report CSV")->required();
  measure.jobs_opt = m->add_option("-j,--jobs", measure.jobs, "worker threads");
  m->add_flag("--emit-overlays", measure.emit_overlays, "write one PPM overlay per frame");
  m->add_option("--overlay-dir", measure.overlay_dir, "overlay directory (default: next to the report)");
  measure.refine.add(m);

  EnsembleArgs ens;
  auto* e = app.add_subcommand("ensemble", "average (or vote over) member probability maps");
  e->add_option("members", ens.members, "member .fpm files")->required();
  e->add_option("-o,--output", ens.output, "averaged .fpm");
  e->add_option("--mask", ens.mask, "decided label mask .pgm");
  e->add_flag("--vote", ens.vote, "majority vote instead of argmax of the average");

  MetricsArgs met;
  auto* mt = app.add_subcommand("metrics", "classification, segmentation and biometry metrics as JSON");
  mt->add_option("--pred", met.pred, "predicted masks or maps (files or directories)");
  mt->add_option("--gt", met.gt, "ground-truth masks, paired by file name");
  mt->add_option("--scores", met.scores, "frame score CSV with labels");
  mt->add_option("--pred-report", met.pred_report, "measured report CSV");
  mt->add_option("--gt-report", met.gt_report, "reference report CSV");
  met.threshold_opt = mt->add_option("--threshold", met.threshold, "classification threshold");
  mt->add_option("-o,--output", met.output, "JSON output (default stdout)");

  PhantomArgs ph;
  auto* p = app.add_subcommand("phantom", "synthetic PS/FH scenes with analytic biometry");
  ph.count_opt = p->add_option("-n,--count", ph.count, "number of scenes");
  ph.seed_opt = p->add_option("--seed", ph.seed, "random seed");
  ph.size_opt = p->add_option("--size", ph.size, "canvas edge in pixels");
  p->add_option("-o,--out-dir", ph.out_dir, "output directory")->required();
  p->add_option("--perturb", ph.perturb, "e.g. holes=2,protrusions=1,noise=1");

  AugmentArgs aug;
  auto* au = app.add_subcommand("augment", "seeded augmentation of one image (and mask)");
  au->add_option("image", aug.image, "8-bit greymap")->required();
  au->add_option("--mask", aug.mask, "label mask transformed alongside");
  au->add_option("-o,--output", aug.output, "augmented greymap")->required();
  au->add_option("--mask-output", aug.mask_output, "augmented mask");
  au->add_option("--index", aug.index, "sample index");
  aug.opts["seed"] = au->add_option("--seed", aug.params.seed, "random seed");
  aug.opts["flip_prob"] = au->add_option("--flip-prob", aug.params.flip_prob, "flip probability");

  SampleArgs smp;
  auto* s = app.add_subcommand("sample", "sparse frame sampling per video");
  s->add_option("videos", smp.videos, "CSV of video_id,length,label")->required();
  s->add_option("-o,--output", smp.output, "frame list CSV")->required();
  smp.n_pos_opt = s->add_option("--n-pos", smp.n_pos, "frames per positive video");
  smp.n_neg_opt = s->add_option("--n-neg", smp.n_neg, "frames per negative video");
  smp.seed_opt = s->add_option("--seed", smp.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Config cfg;
    cfg.load(config_path);
    if (*m) return cmd_measure(measure, cfg);
    if (*e) return cmd_ensemble(ens, cfg);
    if (*mt) return cmd_metrics(met, cfg);
    if (*p) return cmd_phantom(ph, cfg);
    if (*au) return cmd_augment(aug, cfg);
    if (*s) return cmd_sample(smp, cfg);
  } catch (const UsageError& err) {
    std::cerr << "aopkit: " << err.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& err) {
    std::cerr << "aopkit: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "aopkit: " << err.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
