#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <dentobox/dentobox.hpp>

namespace fs = std::filesystem;
using namespace dentobox;

namespace {

// DENTOBOX_LOG: unset/0 = quiet, 1/"info" = progress, 2/"debug" = chatty.
int log_level() {
  static const int level = [] {
    const char* env = std::getenv("DENTOBOX_LOG");
    if (!env || !*env) return 0;
    const std::string v = env;
    if (v == "debug" || v == "2") return 2;
    if (v == "info" || v == "1") return 1;
    if (v == "0" || v == "quiet") return 0;
    return 1;
  }();
  return level;
}

std::mutex log_mutex;

void log_info(const std::string& msg) {
  if (log_level() < 1) return;
  std::lock_guard lock(log_mutex);
  std::cerr << "[dentobox] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() < 2) return;
  std::lock_guard lock(log_mutex);
  std::cerr << "[dentobox] " << msg << '\n';
}

bool is_map_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".pgm";
}

// A single map file, or every map file in a directory, sorted by filename.
std::vector<fs::path> collect_inputs(const fs::path& input) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(input)) {
    files.push_back(input);
  } else if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input))
      if (entry.is_regular_file() && is_map_file(entry.path()))
        files.push_back(entry.path());
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename() < b.filename();
    });
  } else {
    throw io_error("no such file or directory: " + input.string());
  }
  return files;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw io_error("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& content) {
  write_file(path.string(),
             std::vector<std::uint8_t>(content.begin(), content.end()));
}

// Run fn(i) for i in [0, count) on up to `jobs` threads. The first failing
// index (lowest i) determines the rethrown exception, so failures are
// reported deterministically regardless of scheduling.
void run_parallel(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------

int cmd_postprocess(const fs::path& input, const fs::path& out_dir, int jobs) {
  const auto files = collect_inputs(input);
  ensure_dir(out_dir);
  run_parallel(files.size(), jobs, [&](std::size_t i) {
    const fs::path& file = files[i];
    const LabelMap map = load_labelmap_file(file.string());
    const PostprocessResult result = postprocess(map);
    save_labelmap_file((out_dir / file.filename()).string(), result.map);
    const std::string stem = file.stem().string();
    write_text(out_dir / (stem + ".changes.json"),
               changes_to_json(stem, result.changes).dump(2) + "\n");
    log_info("postprocess " + file.filename().string() + ": " +
             std::to_string(result.changes.size()) + " change(s)");
  });
  log_info("postprocess: " + std::to_string(files.size()) + " image(s) done");
  return 0;
}

int cmd_obb(const fs::path& input, const fs::path& out_dir, int jobs) {
  const auto files = collect_inputs(input);
  ensure_dir(out_dir);
  run_parallel(files.size(), jobs, [&](std::size_t i) {
    const fs::path& file = files[i];
    const LabelMap map = load_labelmap_file(file.string());
    // One component per label is a precondition of per-tooth boxing.
    const LabelMap clean = postprocess(map).map;
    std::map<int, Obb> obbs;
    for (const Instance& inst : extract_instances(clean))
      obbs[inst.label] = generate_obb(inst);
    for (int label = 1; label <= kMaxLabel; ++label)
      if (!obbs.count(label))
        log_debug(file.filename().string() + ": label " +
                  std::to_string(label) + " absent, entry omitted");
    const std::string stem = file.stem().string();
    write_text(out_dir / (stem + ".json"),
               export_obbs(obbs, stem).dump(2) + "\n");
    log_info("obb " + file.filename().string() + ": " +
             std::to_string(obbs.size()) + " box(es)");
  });
  return 0;
}

struct EvalPair {
  std::string stem;
  fs::path pred;
  fs::path gt;
};

std::vector<EvalPair> pair_by_stem(const std::vector<fs::path>& pred,
                                   const std::vector<fs::path>& gt) {
  std::map<std::string, fs::path> pred_by_stem;
  std::map<std::string, fs::path> gt_by_stem;
  for (const auto& p : pred) pred_by_stem[p.stem().string()] = p;
  for (const auto& p : gt) gt_by_stem[p.stem().string()] = p;

  std::vector<std::string> pred_only;
  std::vector<std::string> gt_only;
  for (const auto& [stem, path] : pred_by_stem)
    if (!gt_by_stem.count(stem)) pred_only.push_back(stem);
  for (const auto& [stem, path] : gt_by_stem)
    if (!pred_by_stem.count(stem)) gt_only.push_back(stem);
  if (!pred_only.empty() || !gt_only.empty()) {
    std::string msg = "unpaired files:";
    for (const auto& s : pred_only) msg += " pred-only:" + s;
    for (const auto& s : gt_only) msg += " gt-only:" + s;
    throw pairing_error(msg);
  }

  std::vector<EvalPair> pairs;
  for (const auto& [stem, path] : pred_by_stem)
    pairs.push_back({stem, path, gt_by_stem.at(stem)});
  return pairs;  // std::map iteration -> sorted by stem
}

std::map<int, Obb> obbs_for(const fs::path& dir, const std::string& stem) {
  const fs::path file = dir / (stem + ".json");
  if (!fs::is_regular_file(file))
    throw io_error("missing OBB file: " + file.string());
  const auto bytes = read_file(file.string());
  return import_obbs(nlohmann::json::parse(bytes.begin(), bytes.end()));
}

struct ImageLosses {
  double dice = 0.0;
  double focal = 0.0;
  double combined = 0.0;
};

int cmd_eval(const fs::path& pred_path, const fs::path& gt_path,
             const fs::path& out_dir, const std::string& pred_obb_dir,
             const std::string& gt_obb_dir, const LossConfig& loss_cfg,
             int jobs) {
  const auto pairs = pair_by_stem(collect_inputs(pred_path), collect_inputs(gt_path));
  ensure_dir(out_dir);

  std::vector<MetricReport> reports(pairs.size());
  std::vector<ImageLosses> losses(pairs.size());
  run_parallel(pairs.size(), jobs, [&](std::size_t i) {
    const EvalPair& pair = pairs[i];
    const LabelMap pred = load_labelmap_file(pair.pred.string());
    const LabelMap gt = load_labelmap_file(pair.gt.string());

    // Boxes come from sibling OBB files when provided, otherwise straight
    // from the masks (post-processed so each label is one component).
    const std::map<int, Obb> pred_obbs =
        !pred_obb_dir.empty() ? obbs_for(pred_obb_dir, pair.stem) : [&] {
          std::map<int, Obb> m;
          for (const Instance& inst : extract_instances(postprocess(pred).map))
            m[inst.label] = generate_obb(inst);
          return m;
        }();
    const std::map<int, Obb> gt_obbs =
        !gt_obb_dir.empty() ? obbs_for(gt_obb_dir, pair.stem) : [&] {
          std::map<int, Obb> m;
          for (const Instance& inst : extract_instances(postprocess(gt).map))
            m[inst.label] = generate_obb(inst);
          return m;
        }();

    reports[i] = evaluate(pred, gt, pred_obbs, gt_obbs);

    // Foreground-vs-foreground training losses on the hard masks.
    std::vector<double> soft(pred.values().size());
    std::vector<std::uint8_t> target(gt.values().size());
    for (std::size_t k = 0; k < soft.size(); ++k) {
      soft[k] = pred.values()[k] != 0 ? 1.0 : 0.0;
      target[k] = gt.values()[k] != 0 ? 1 : 0;
    }
    losses[i].dice = dice_loss(soft, target, loss_cfg);
    losses[i].focal = focal_loss(soft, target, loss_cfg);
    losses[i].combined = combined_loss(soft, target, loss_cfg);
    log_info("eval " + pair.stem + ": " +
             std::to_string(reports[i].per_label.size()) + " label(s)");
  });

  const MetricReport merged = merge_reports(reports);
  ImageLosses mean;
  for (const ImageLosses& l : losses) {
    mean.dice += l.dice;
    mean.focal += l.focal;
    mean.combined += l.combined;
  }
  if (!losses.empty()) {
    mean.dice /= static_cast<double>(losses.size());
    mean.focal /= static_cast<double>(losses.size());
    mean.combined /= static_cast<double>(losses.size());
  }

  nlohmann::ordered_json summary = render_summary_json(merged);
  summary["loss"] = {{"dice", detail::round4(mean.dice)},
                     {"focal", detail::round4(mean.focal)},
                     {"combined", detail::round4(mean.combined)}};

  write_text(out_dir / "per_label.csv", render_per_label_csv(merged));
  write_text(out_dir / "radar.csv", render_radar_csv(merged));
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  log_info("eval: " + std::to_string(pairs.size()) + " pair(s) done");
  return 0;
}

int cmd_demo_attention() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Tensor u(8, 6, 6);
  for (double& v : u.data) v = unit(rng);
  SqueezeParams sp = SqueezeParams::zeros(8, 2);
  for (auto& row : sp.reduce_w)
    for (double& w : row) w = 0.5 * unit(rng);
  for (auto& row : sp.expand_w)
    for (double& w : row) w = 0.5 * unit(rng);
  for (double& w : sp.spatial_w) w = 0.5 * unit(rng);

  const auto s = cse_gates(u, sp);
  const Tensor q = sse_gates(u, sp);
  const Tensor p = pscse_forward(u, sp, pscse_default_maxout(u.channels));

  Tensor x(4, 5, 5), g(4, 5, 5);
  for (double& v : x.data) v = unit(rng);
  for (double& v : g.data) v = unit(rng);
  GateParams gp = GateParams::zeros(4, 4, 3);
  for (auto& row : gp.wx)
    for (double& w : row) w = 0.5 * unit(rng);
  for (auto& row : gp.wg)
    for (double& w : row) w = 0.5 * unit(rng);
  for (double& w : gp.psi) w = 0.5 * unit(rng);
  const GateResult gate = attention_gate_forward(x, g, gp);

  auto stats = [](const std::vector<double>& v) {
    double lo = v.front(), hi = v.front(), sum = 0.0;
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      sum += x;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "min %.6f  max %.6f  mean %.6f", lo, hi,
                  sum / static_cast<double>(v.size()));
    return std::string(buf);
  };

  std::cout << "cse gates (8 channels):   " << stats(s) << '\n';
  std::cout << "sse gates (6x6 pixels):   " << stats(q.data) << '\n';
  std::cout << "p-scse output (maxout on): " << stats(p.data) << '\n';
  std::cout << "gate alpha (5x5 pixels):  " << stats(gate.alpha.data) << '\n';
  std::cout << "gated feature map:        " << stats(gate.gated.data) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dentobox — tooth label-map post-processing, oriented boxes, "
               "and evaluation reports"};
  app.require_subcommand(1);
  app.fallthrough();  // allow the global flags after a subcommand, too

  int jobs = 1;
  int patch_size = 512;
  int overlap = 10;
  app.add_option("--jobs", jobs, "worker threads for batch commands")
      ->check(CLI::Range(1, 256));
  app.add_option("--patch-size", patch_size, "tile size for patch planning")
      ->check(CLI::PositiveNumber);
  app.add_option("--overlap", overlap, "tile overlap in pixels")
      ->check(CLI::NonNegativeNumber);

  std::string pp_in, pp_out;
  auto* pp = app.add_subcommand("postprocess",
                                "dissolve duplicate-label components");
  pp->add_option("input", pp_in, "label map file or directory")->required();
  pp->add_option("output", pp_out, "output directory")->required();

  std::string obb_in, obb_out;
  auto* ob = app.add_subcommand("obb", "oriented bounding boxes per tooth");
  ob->add_option("input", obb_in, "label map file or directory")->required();
  ob->add_option("--out", obb_out, "output directory")->required();

  std::string ev_pred, ev_gt, ev_out, ev_pred_obb, ev_gt_obb;
  LossConfig loss_cfg;
  auto* ev = app.add_subcommand("eval", "score predictions against ground truth");
  ev->add_option("--pred", ev_pred, "predicted label maps (file or directory)")
      ->required();
  ev->add_option("--gt", ev_gt, "ground-truth label maps (file or directory)")
      ->required();
  ev->add_option("--out", ev_out, "report directory")->required();
  ev->add_option("--pred-obb", ev_pred_obb, "directory of predicted OBB JSON");
  ev->add_option("--gt-obb", ev_gt_obb, "directory of ground-truth OBB JSON");
  ev->add_option("--focal-gamma", loss_cfg.focal_gamma, "focal loss gamma")
      ->check(CLI::NonNegativeNumber);
  ev->add_option("--focal-alpha", loss_cfg.focal_alpha, "focal loss alpha")
      ->check(CLI::Range(0.0, 1.0));

  auto* demo = app.add_subcommand("demo-attention",
                                  "run the attention blocks on a fixture");

  CLI11_PARSE(app, argc, argv);

  try {
    if (overlap >= patch_size)
      throw invariant_error("--overlap must be smaller than --patch-size");
    if (pp->parsed()) return cmd_postprocess(pp_in, pp_out, jobs);
    if (ob->parsed()) return cmd_obb(obb_in, obb_out, jobs);
    if (ev->parsed())
      return cmd_eval(ev_pred, ev_gt, ev_out, ev_pred_obb, ev_gt_obb, loss_cfg,
                      jobs);
    if (demo->parsed()) return cmd_demo_attention();
  } catch (const pairing_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const invariant_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
