#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tain/bench.hpp"
#include "tain/checkpoint.hpp"
#include "tain/config.hpp"
#include "tain/dataset.hpp"
#include "tain/error.hpp"
#include "tain/log.hpp"
#include "tain/metrics.hpp"
#include "tain/png_io.hpp"
#include "tain/train.hpp"

#ifndef TAIN_VERSION
#define TAIN_VERSION "0.0.0"
#endif

namespace tain::cli {

namespace fs = std::filesystem;

namespace {

using RunInfo = std::vector<std::pair<std::string, std::string>>;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_manifest(const fs::path& path, const std::string& command, const RunConfig& cfg, RunInfo info) {
  info.insert(info.begin(), {"tool_version", TAIN_VERSION});
  info.insert(info.begin() + 1, {"command", command});
  write_text(path, to_config_text(cfg, info));
}

// "256" or "256x448" (height x width).
std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    std::size_t pos = 0;
    if (x == std::string::npos) {
      const auto v = std::stoul(text, &pos);
      if (pos != text.size() || v == 0) throw std::invalid_argument(text);
      return {v, v};
    }
    const auto h = std::stoul(text.substr(0, x), &pos);
    if (pos != x) throw std::invalid_argument(text);
    const auto w = std::stoul(text.substr(x + 1), &pos);
    if (pos != text.size() - x - 1 || h == 0 || w == 0) throw std::invalid_argument(text);
    return {h, w};
  } catch (const std::logic_error&) {
    throw ConfigError("size '" + text + "': expected N or HxW with positive integers");
  }
}

std::pair<std::size_t, std::size_t> parse_point(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    std::size_t pos = 0;
    const auto x = std::stoul(text.substr(0, comma), &pos);
    if (pos != comma) throw std::invalid_argument(text);
    const auto y = std::stoul(text.substr(comma + 1), &pos);
    if (pos != text.size() - comma - 1) throw std::invalid_argument(text);
    return {x, y};
  } catch (const std::logic_error&) {
    throw ConfigError("query '" + text + "': expected x,y");
  }
}

std::size_t eval_threads(std::size_t requested) {
  std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TAIN_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (*end != '\0' || cap == 0) throw ConfigError("TAIN_THREADS: expected a positive integer, got '" + std::string(env) + "'");
    n = std::min<std::size_t>(n, cap);
  }
  return n;
}

std::pair<Image, Image> load_frame_pair(const fs::path& f0, const fs::path& f1) {
  Image i0 = load_png(f0), i1 = load_png(f1);
  if (!i0.same_size(i1)) {
    throw ShapeError("frame0 is " + std::to_string(i0.height) + "x" + std::to_string(i0.width) + " but frame1 is " +
                     std::to_string(i1.height) + "x" + std::to_string(i1.width));
  }
  return {std::move(i0), std::move(i1)};
}

// Nearest-neighbour upsampling of a [gh,gw] grid by s, cropped to h x w.
Image grid_to_gray(const std::vector<float>& grid, std::size_t gh, std::size_t gw, std::size_t s, std::size_t h,
                   std::size_t w) {
  Image img(h, w);
  for (std::size_t y = 0; y < h && y / s < gh; ++y) {
    for (std::size_t x = 0; x < w && x / s < gw; ++x) {
      const float v = grid[(y / s) * gw + x / s];
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = v;
    }
  }
  return img;
}

void mark_cell(Image& img, std::size_t gy, std::size_t gx, std::size_t s) {
  for (std::size_t y = gy * s; y < std::min(img.height, (gy + 1) * s); ++y) {
    for (std::size_t x = gx * s; x < std::min(img.width, (gx + 1) * s); ++x) {
      img.at(y, x, 0) = 1.0f;
      img.at(y, x, 1) = 0.0f;
      img.at(y, x, 2) = 0.0f;
    }
  }
}

struct TrainArgs {
  std::string data, out, config, resume;
  bool toy = false;
  std::vector<std::string> overrides;
};

RunConfig resolve_config(bool toy, const std::string& config_path, const std::vector<std::string>& overrides) {
  RunConfig cfg = toy ? RunConfig::toy() : RunConfig{};
  if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = resolve_config(a.toy, a.config, a.overrides);
  const TripletDataset dataset = load_triplet_dir(a.data);

  TrainState state;
  std::optional<TainModel<float>> model;
  if (!a.resume.empty()) {
    const Checkpoint ckpt = load_checkpoint(a.resume);
    if (!(ckpt.config == cfg.model)) {
      throw ConfigError("resume: model configuration in '" + a.resume + "' differs from the run configuration");
    }
    if (!ckpt.adam) throw ConfigError("resume: '" + a.resume + "' holds no optimizer state");
    model.emplace(model_from_checkpoint(ckpt));
    state.step = ckpt.step;
    state.adam = *ckpt.adam;
  } else {
    model.emplace(cfg.model);
  }

  const fs::path out_dir = a.out;
  fs::create_directories(out_dir);
  write_manifest(out_dir / "manifest.txt", "train", cfg,
                 {{"data", a.data}, {"out", a.out}, {"resume", a.resume}, {"items", std::to_string(dataset.size())}});

  out << "training " << dataset.size() << " triplets, " << model->parameters().parameter_count()
      << " parameters, steps " << state.step << ".." << cfg.train.max_steps << "\n";
  const std::size_t every = std::max<std::size_t>(1, cfg.train.max_steps / 20);
  const auto result = train(*model, dataset, cfg.train, cfg.augment, state, out_dir, [&](std::uint64_t step, double loss) {
    if ((step + 1) % every == 0) out << "step " << step + 1 << " loss " << loss << "\n";
  });
  out << "done: " << result.losses.size() << " steps";
  if (result.skipped_updates > 0) out << ", " << result.skipped_updates << " skipped updates";
  out << ", checkpoint " << (out_dir / "latest.tain").string() << "\n";
  return 0;
}

struct InferArgs {
  std::string ckpt, frame0, frame1, out;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const auto model = model_from_checkpoint(ckpt);
  const auto [i0, i1] = load_frame_pair(a.frame0, a.frame1);
  const Image pred = model.infer_padded(i0, i1);
  const fs::path out_path = a.out;
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  save_png(out_path, pred);
  RunConfig cfg;
  cfg.model = ckpt.config;
  fs::path manifest = out_path;
  manifest += ".manifest";
  write_manifest(manifest, "infer", cfg, {{"ckpt", a.ckpt}, {"frame0", a.frame0}, {"frame1", a.frame1}, {"out", a.out}});
  out << "wrote " << a.out << " (" << pred.height << "x" << pred.width << ")\n";
  return 0;
}

struct EvalArgs {
  std::string ckpt, data, report;
  bool identity = false;
  std::size_t threads = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.identity == !a.ckpt.empty()) throw ConfigError("eval: pass exactly one of --ckpt or --identity");
  const TripletDataset dataset = load_triplet_dir(a.data);
  const std::size_t threads = eval_threads(a.threads);

  RunConfig cfg;
  MetricsReport report;
  if (a.identity) {
    report = evaluate([](const Triplet& t) { return t.it; }, dataset, threads);
  } else {
    const Checkpoint ckpt = load_checkpoint(a.ckpt);
    cfg.model = ckpt.config;
    const auto model = model_from_checkpoint(ckpt);
    report = evaluate([&](const Triplet& t) { return model.infer_padded(t.i0, t.i1); }, dataset, threads);
  }
  write_text(a.report, report.to_json());
  fs::path manifest = a.report;
  manifest += ".manifest";
  write_manifest(manifest, "eval", cfg,
                 {{"ckpt", a.identity ? std::string("identity") : a.ckpt}, {"data", a.data}, {"report", a.report}});
  out << std::fixed << std::setprecision(4) << "items " << report.items.size() << "  psnr " << report.psnr
      << " dB  ssim " << report.ssim << "  ie " << report.ie << "\n";
  return 0;
}

struct BenchArgs {
  std::string ckpt, config, size = "256", out;
  bool toy = false;
  std::size_t n = 300, warmup = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (!a.ckpt.empty() && (!a.config.empty() || a.toy)) throw ConfigError("bench: --ckpt excludes --config and --toy");
  RunConfig cfg = resolve_config(a.toy, a.config, a.overrides);
  std::optional<TainModel<float>> model;
  if (!a.ckpt.empty()) {
    const Checkpoint ckpt = load_checkpoint(a.ckpt);
    cfg.model = ckpt.config;
    model.emplace(model_from_checkpoint(ckpt));
  } else {
    model.emplace(cfg.model);
  }
  BenchConfig bench;
  std::tie(bench.height, bench.width) = parse_size(a.size);
  bench.n = a.n;
  bench.warmup = a.warmup;
  bench.seed = a.seed;
  const TimingStats stats = bench_inference(*model, bench);

  out << std::fixed << std::setprecision(3) << stats.mean_ms << " ± " << stats.std_ms << " ms  (n=" << stats.n
      << ", " << bench.height << "x" << bench.width << ", s=" << cfg.model.s << ", d=" << cfg.model.d
      << ", resgroups=" << cfg.model.n_resgroups << ")\n";

  const fs::path dir = a.out.empty() ? fs::path(".") : fs::path(a.out);
  std::ostringstream json;
  json << std::setprecision(17) << "{\n  \"height\": " << bench.height << ",\n  \"width\": " << bench.width
       << ",\n  \"n\": " << stats.n << ",\n  \"warmup\": " << bench.warmup << ",\n  \"mean_ms\": " << stats.mean_ms
       << ",\n  \"std_ms\": " << stats.std_ms << "\n}\n";
  write_text(dir / "bench.json", json.str());
  write_manifest(dir / "bench.manifest", "bench", cfg,
                 {{"ckpt", a.ckpt}, {"size", a.size}, {"n", std::to_string(a.n)}, {"warmup", std::to_string(a.warmup)},
                  {"seed", std::to_string(a.seed)}});
  return 0;
}

struct VisualizeArgs {
  std::string ckpt, frame0, frame1, out, query;
  std::size_t resgroup = 1;
};

int cmd_visualize(const VisualizeArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const auto model = model_from_checkpoint(ckpt);
  const ModelConfig& mc = model.config();
  const auto [i0, i1] = load_frame_pair(a.frame0, a.frame1);
  const std::size_t h = i0.height, w = i0.width, s = mc.s;

  std::size_t qx = w / 2, qy = h / 2;
  if (!a.query.empty()) std::tie(qx, qy) = parse_point(a.query);
  if (qx >= w || qy >= h) {
    throw ShapeError("query (" + std::to_string(qx) + "," + std::to_string(qy) + ") is outside the " +
                     std::to_string(w) + "x" + std::to_string(h) + " frame");
  }
  if (a.resgroup == 0 || a.resgroup > mc.n_resgroups) {
    throw ConfigError("resgroup " + std::to_string(a.resgroup) + " is outside 1.." + std::to_string(mc.n_resgroups));
  }

  const std::size_t hp = (h + s - 1) / s * s, wp = (w + s - 1) / s * s;
  const auto t0 = reflect_pad(i0, hp, wp).to_tensor<float>();
  const auto t1 = reflect_pad(i1, hp, wp).to_tensor<float>();
  NoGradGuard no_grad;
  const fs::path dir = a.out;
  fs::create_directories(dir);

  const auto preds = model.intermediate_predictions(t0, t1);
  for (std::size_t r = 0; r < preds.size(); ++r) {
    Image img = crop(Image::from_tensor(preds[r]), 0, 0, h, w);
    save_png(dir / ("pred_rg" + std::to_string(r + 1) + ".png"), img);
  }
  std::size_t written = preds.size();

  const auto trace = model.forward_trace(t0, t1);
  const auto& stage = trace.stages.at(a.resgroup - 1);
  if (stage.cs0 && stage.cs1) {
    const std::size_t gh = stage.cs0->grid_h, gw = stage.cs0->grid_w, n = gh * gw;
    const std::size_t q = (qy / s) * gw + qx / s;
    int frame = 0;
    for (const auto* cs : {&*stage.cs0, &*stage.cs1}) {
      auto sim = cs->similarity.data();
      std::vector<float> row(sim.begin() + q * n, sim.begin() + (q + 1) * n);
      const float peak = *std::max_element(row.begin(), row.end());
      if (peak > 0.0f) {
        for (auto& v : row) v /= peak;
      }
      Image img = grid_to_gray(row, gh, gw, s, h, w);
      const std::size_t k = cs->argmax_idx.at(q);
      mark_cell(img, k / gw, k % gw, s);
      save_png(dir / ("similarity_f" + std::to_string(frame) + ".png"), img);
      ++frame;
      ++written;
    }
    if (stage.ia) {
      const std::size_t gs = stage.ia->a0.dim(0), gt = stage.ia->a0.dim(1);
      auto a0 = stage.ia->a0.data();
      auto a1 = stage.ia->a1.data();
      save_png(dir / "a0.png", grid_to_gray(std::vector<float>(a0.begin(), a0.end()), gs, gt, s, h, w));
      save_png(dir / "a1.png", grid_to_gray(std::vector<float>(a1.begin(), a1.end()), gs, gt, s, h, w));
      written += 2;
    }
  } else {
    log_warning("visualize: no cross similarity after ResGroup " + std::to_string(a.resgroup) +
                "; similarity and attention maps skipped");
  }

  RunConfig cfg;
  cfg.model = mc;
  write_manifest(dir / "manifest.txt", "visualize", cfg,
                 {{"ckpt", a.ckpt},
                  {"frame0", a.frame0},
                  {"frame1", a.frame1},
                  {"query", std::to_string(qx) + "," + std::to_string(qy)},
                  {"resgroup", std::to_string(a.resgroup)}});
  out << "wrote " << written << " images to " << a.out << "\n";
  return 0;
}

struct SynthArgs {
  std::string out, size = "64";
  std::size_t count = 4;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto [h, w] = parse_size(a.size);
  write_triplet_dir(a.out, make_moving_pattern_triplets(a.count, h, w, a.seed));
  out << "wrote " << a.count << " triplets to " << a.out << "\n";
  return 0;
}

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frame interpolation: train, infer, eval, bench, visualize", "tain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TAIN_VERSION);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a triplet directory");
  train_cmd->add_option("--data", train_args.data, "Triplet directory")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--config", train_args.config, "Config file");
  train_cmd->add_option("--resume", train_args.resume, "Checkpoint to continue from");
  train_cmd->add_flag("--toy", train_args.toy, "Start from the toy preset");
  train_cmd->add_option("--set", train_args.overrides, "Override a config key (section.key=value)");

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "Interpolate the midpoint of two frames");
  infer_cmd->add_option("--ckpt", infer_args.ckpt)->required();
  infer_cmd->add_option("--frame0", infer_args.frame0)->required();
  infer_cmd->add_option("--frame1", infer_args.frame1)->required();
  infer_cmd->add_option("--out", infer_args.out, "Output PNG")->required();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Compute PSNR, SSIM and IE over a triplet directory");
  eval_cmd->add_option("--ckpt", eval_args.ckpt);
  eval_cmd->add_flag("--identity", eval_args.identity, "Score the ground truth against itself");
  eval_cmd->add_option("--data", eval_args.data)->required();
  eval_cmd->add_option("--report", eval_args.report, "JSON report path")->required();
  eval_cmd->add_option("--threads", eval_args.threads, "Worker threads (0: all cores; TAIN_THREADS caps)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time forward passes on random input pairs");
  bench_cmd->add_option("--ckpt", bench_args.ckpt);
  bench_cmd->add_option("--config", bench_args.config);
  bench_cmd->add_flag("--toy", bench_args.toy);
  bench_cmd->add_option("--set", bench_args.overrides);
  bench_cmd->add_option("--size", bench_args.size, "N or HxW")->capture_default_str();
  bench_cmd->add_option("--n", bench_args.n)->capture_default_str();
  bench_cmd->add_option("--warmup", bench_args.warmup)->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed)->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "Directory for bench.json and the manifest (default: .)");

  VisualizeArgs vis_args;
  auto* vis_cmd = app.add_subcommand("visualize", "Write intermediate predictions and attention maps");
  vis_cmd->add_option("--ckpt", vis_args.ckpt)->required();
  vis_cmd->add_option("--frame0", vis_args.frame0)->required();
  vis_cmd->add_option("--frame1", vis_args.frame1)->required();
  vis_cmd->add_option("--out", vis_args.out, "Output directory")->required();
  vis_cmd->add_option("--query", vis_args.query, "Query pixel x,y (default: center)");
  vis_cmd->add_option("--resgroup", vis_args.resgroup, "ResGroup (1-based) for similarity and attention maps")
      ->capture_default_str();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic moving-pattern triplets");
  synth_cmd->add_option("--out", synth_args.out)->required();
  synth_cmd->add_option("--count", synth_args.count)->capture_default_str();
  synth_cmd->add_option("--size", synth_args.size, "N or HxW")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << TAIN_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*infer_cmd) return cmd_infer(infer_args, out);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*bench_cmd) return cmd_bench(bench_args, out);
    if (*vis_cmd) return cmd_visualize(vis_args, out);
    if (*synth_cmd) return cmd_synth(synth_args, out);
  } catch (const ConfigError& e) {
    err << "error: config: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ShapeError& e) {
    err << "error: shape: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "error: io: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const NumericError& e) {
    err << "error: numeric: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 1;
}

}  // namespace tain::cli
