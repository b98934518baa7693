// Command-line front end: synth, reconstruct, render, train, finetune,
// eval and stats.
#include <CLI11.hpp>

#include <malloc.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "nsurf/core/binary_io.hpp"
#include "nsurf/io/dataset.hpp"
#include "nsurf/io/image_io.hpp"
#include "nsurf/io/map_io.hpp"
#include "nsurf/io/metrics.hpp"
#include "nsurf/io/plot.hpp"
#include "nsurf/io/synth.hpp"
#include "nsurf/nn/checkpoint.hpp"
#include "nsurf/pipeline/keyframes.hpp"
#include "nsurf/pipeline/settings.hpp"

namespace {

using namespace nsurf;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

io::Config load_config(const Common& c) {
  io::Config cfg;
  if (!c.config_path.empty()) cfg = io::Config::load(c.config_path);
  cfg.require_known(known_config_keys());
  return cfg;
}

TrainConfig settings(const Common& c, const io::Config& cfg) {
  TrainConfig t;
  t.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  apply_config(cfg, t);
  if (c.seed) t.seed = *c.seed;
  if (c.workers > 1) {
    t.render.workers = c.workers;
    t.reconstruct.fusion.workers = c.workers;
  }
  return t;
}

void write_lines(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
  if (!out) throw FormatError(path + ": write failed");
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value settings file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "seed for all randomness");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  // Keep large tape buffers on the heap between steps instead of
  // returning them to the OS.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  CLI::App app{"Online neural surfel reconstruction and rendering"};
  app.require_subcommand(1);
  Common common;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic RGB-D dataset");
  std::string synth_out, synth_preset;
  std::size_t synth_frames = 400;
  int synth_w = 0, synth_h = 0;
  double synth_holes = -1.0;
  synth->add_option("--out", synth_out, "output dataset directory")->required();
  synth->add_option("--preset", synth_preset, "room | room-b | wall");
  synth->add_option("--frames", synth_frames, "number of frames");
  synth->add_option("--width", synth_w, "image width");
  synth->add_option("--height", synth_h, "image height");
  synth->add_option("--holes", synth_holes, "per-pixel depth drop probability");
  add_common(synth, common);

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "fuse a dataset's keyframes into a surfel map");
  std::string dataset, checkpoint, map_path, report_path;
  std::optional<int> stride;
  std::string fusion_scheme;
  recon->add_option("--dataset", dataset, "dataset directory")->required();
  recon->add_option("--checkpoint", checkpoint, "network checkpoint")->required();
  recon->add_option("--out", map_path, "output map (.smap)")->required();
  recon->add_option("--stride", stride, "pixel sampling stride");
  recon->add_option("--report", report_path, "per-keyframe fusion report CSV");
  recon->add_option("--fusion", fusion_scheme, "gru | weighted_sum");
  add_common(recon, common);

  // render
  auto* render = app.add_subcommand("render", "render a map from a pose");
  std::string pose_file, intrinsics_file, image_out, baseline;
  double step = 0.01, t_far = 0.0;
  bool print_stats = false;
  render->add_option("--map", map_path, "surfel map")->required();
  render->add_option("--checkpoint", checkpoint, "network checkpoint")->required();
  render->add_option("--pose-file", pose_file, "4x4 camera-to-world pose")->required();
  render->add_option("--intrinsics", intrinsics_file, "intrinsics.txt of the target camera")->required();
  render->add_option("--out", image_out, "output PNG")->required();
  render->add_option("--baseline", baseline, "dense: use the ray-marching reference renderer")
      ->check(CLI::IsMember({"dense"}));
  render->add_option("--step", step, "dense baseline step (m)")->check(CLI::PositiveNumber);
  render->add_option("--t-far", t_far, "dense baseline far distance (m), default from the map bounds");
  render->add_flag("--stats", print_stats, "print rasterization statistics");
  add_common(render, common);

  // train
  auto* train = app.add_subcommand("train", "train the networks on a dataset");
  std::string train_out, train_log;
  std::optional<int> iterations;
  train->add_option("--dataset", dataset, "dataset directory")->required();
  train->add_option("--out", train_out, "output checkpoint")->required();
  train->add_option("--checkpoint", checkpoint, "initial checkpoint (default: fresh networks)");
  train->add_option("--iterations", iterations, "training steps");
  train->add_option("--log", train_log, "training log CSV");
  train->add_option("--fusion", fusion_scheme, "gru | weighted_sum");
  bool learned_refiner = false;
  train->add_flag("--learned-refiner", learned_refiner, "create fresh networks with a learned depth refiner");
  add_common(train, common);

  // finetune
  auto* finetune = app.add_subcommand("finetune", "per-scene fine-tuning of features and shading networks");
  std::string out_map, out_checkpoint;
  finetune->add_option("--map", map_path, "surfel map")->required();
  finetune->add_option("--checkpoint", checkpoint, "network checkpoint")->required();
  finetune->add_option("--dataset", dataset, "dataset directory")->required();
  finetune->add_option("--out-map", out_map, "fine-tuned map")->required();
  finetune->add_option("--out-checkpoint", out_checkpoint, "fine-tuned checkpoint")->required();
  finetune->add_option("--iterations", iterations, "fine-tuning steps");
  finetune->add_option("--log", train_log, "fine-tuning log CSV");
  add_common(finetune, common);

  // eval
  auto* eval = app.add_subcommand("eval", "render dataset views and report PSNR / SSIM");
  std::string split = "heldout", metrics_out;
  eval->add_option("--map", map_path, "surfel map")->required();
  eval->add_option("--checkpoint", checkpoint, "network checkpoint")->required();
  eval->add_option("--dataset", dataset, "dataset directory")->required();
  eval->add_option("--split", split, "heldout | all")->check(CLI::IsMember({"heldout", "all"}));
  eval->add_option("--metrics", metrics_out, "per-view metrics CSV")->required();
  add_common(eval, common);

  // stats
  auto* stats = app.add_subcommand("stats", "plot map growth from a fusion report");
  std::string plot_out;
  stats->add_option("--report", report_path, "fusion report CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--plot", plot_out, "output PNG")->required();
  add_common(stats, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const io::Config cfg = load_config(common);
    TrainConfig ts = settings(common, cfg);
    if (!fusion_scheme.empty()) ts.reconstruct.fusion.scheme = parse_fusion_scheme(fusion_scheme);

    if (*synth) {
      io::Config scfg = cfg;
      if (!synth_preset.empty()) scfg.set("scene.preset", synth_preset);
      if (synth_w > 0) scfg.set("camera.width", std::to_string(synth_w));
      if (synth_h > 0) scfg.set("camera.height", std::to_string(synth_h));
      if (synth_holes >= 0.0) scfg.set("scene.hole_probability", std::to_string(synth_holes));
      const std::size_t frames = synth->count("--frames") ? synth_frames
                                                          : static_cast<std::size_t>(cfg.get_int("frames", 400));
      synth::synth_generate(synth::scene_from_config(scfg), frames, ts.seed, synth_out);
      std::printf("wrote %zu frames to %s\n", frames, synth_out.c_str());
      return kOk;
    }

    if (*recon) {
      if (stride) ts.reconstruct.ingest.stride = *stride;
      nn::NetworkBundle nets = nn::load_checkpoint(checkpoint);
      io::Dataset data(dataset);
      const ReconstructResult r = reconstruct_online(data, nets, ts.reconstruct);
      io::save_map(map_path, r.map);
      if (!report_path.empty()) {
        std::vector<std::string> rows;
        for (const auto& rep : r.reports) rows.push_back(rep.csv_row());
        write_lines(report_path, FusionReport::csv_header(), rows);
      }
      std::printf("%zu keyframes, %zu surfels (%zu without fusion), %zu bytes\n", r.keyframes.size(), r.map.size(),
                  r.local_surfels, r.map.memory_bytes());
      return kOk;
    }

    if (*render) {
      const SurfelMap map = io::load_map(map_path);
      nn::NetworkBundle nets = nn::load_checkpoint(checkpoint);
      const CameraIntrinsics intr = io::read_intrinsics(intrinsics_file);
      const Pose pose = io::read_pose(pose_file);
      ImageF image;
      if (baseline == "dense") {
        double far = t_far;
        if (!(far > 0.0)) {
          far = 1.0;
          for (const auto& g : map.geometries()) far = std::max(far, (g.position.cast<double>() - pose.center()).norm() + g.radius);
        }
        image = render_image_dense_baseline(map, intr, pose, nets, ts.render, step, far);
      } else {
        RasterStats rs;
        image = render_image(map, intr, pose, nets, ts.render, &rs);
        if (print_stats) std::printf("mean_hits=%.4f max_hits=%zu coverage=%.4f\n", rs.mean_hits, rs.max_hits, rs.coverage);
      }
      io::write_png_rgb(image_out, image);
      return kOk;
    }

    if (*train) {
      if (iterations) ts.iterations = *iterations;
      nn::NetworkConfig nc;
      nc.learned_refiner = learned_refiner;
      nn::NetworkBundle nets = checkpoint.empty() ? nn::NetworkBundle::create(nc, ts.seed) : nn::load_checkpoint(checkpoint);
      io::Dataset data(dataset);
      std::vector<Frame> frames;
      for (std::size_t i = 0; i < data.size(); ++i) frames.push_back(data.frame(i));
      const TrainScene scene = TrainScene::split(std::move(frames), ts.keyframe_fraction);
      Trainer trainer(nets, ts);
      std::vector<std::string> rows;
      for (int i = 0; i < ts.iterations; ++i) {
        const StepLosses s = trainer.step(scene);
        rows.push_back(s.csv_row());
        if (s.step % 100 == 0 || s.step == ts.iterations) {
          std::printf("step %d L_render %.6f L_d %.6f\n", s.step, s.render, s.depth);
          std::fflush(stdout);
        }
      }
      nn::save_checkpoint(nets, train_out);
      if (!train_log.empty()) write_lines(train_log, StepLosses::csv_header(), rows);
      return kOk;
    }

    if (*finetune) {
      ts.lr = cfg.has("train.lr") ? ts.lr : 2e-4;
      if (iterations) ts.iterations = *iterations;
      SurfelMap map = io::load_map(map_path);
      nn::NetworkBundle nets = nn::load_checkpoint(checkpoint);
      io::Dataset data(dataset);
      const auto keyframes = select_keyframes(data.size(), ts.keyframe_fraction);
      const auto heldout = heldout_indices(data.size(), keyframes);
      std::vector<Frame> views;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::binary_search(heldout.begin(), heldout.end(), i)) views.push_back(data.frame(i));
      }
      const auto log = finetune_scene(map, nets, views, ts);
      io::save_map(out_map, map);
      nn::save_checkpoint(nets, out_checkpoint);
      if (!train_log.empty()) {
        std::vector<std::string> rows;
        for (const auto& s : log) rows.push_back(s.csv_row());
        write_lines(train_log, StepLosses::csv_header(), rows);
      }
      return kOk;
    }

    if (*eval) {
      const SurfelMap map = io::load_map(map_path);
      nn::NetworkBundle nets = nn::load_checkpoint(checkpoint);
      io::Dataset data(dataset);
      std::vector<std::size_t> views;
      if (split == "heldout") {
        views = heldout_indices(data.size(), select_keyframes(data.size(), ts.keyframe_fraction));
      } else {
        for (std::size_t i = 0; i < data.size(); ++i) views.push_back(i);
      }
      std::vector<std::string> rows;
      double total_psnr = 0.0, total_ssim = 0.0;
      for (std::size_t i : views) {
        const Frame f = data.frame(i);
        const ImageF img = render_image(map, f.intrinsics, f.pose, nets, ts.render);
        const double p = psnr(img, f.rgb);
        const double s = (img.width >= 11 && img.height >= 11) ? ssim(img, f.rgb) : std::nan("");
        total_psnr += p;
        total_ssim += s;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f", i, p, s);
        rows.emplace_back(buf);
      }
      write_lines(metrics_out, "frame_index,psnr,ssim", rows);
      if (!views.empty()) {
        std::printf("%zu views: PSNR %.3f dB, SSIM %.4f\n", views.size(), total_psnr / views.size(),
                    total_ssim / views.size());
      }
      return kOk;
    }

    if (*stats) {
      const auto rows = io::read_report_csv(report_path);
      io::write_png_rgb(plot_out, io::growth_plot(rows));
      std::size_t no_fusion = 0;
      for (const auto& r : rows) no_fusion += r.merged + r.inserted;
      if (!rows.empty()) {
        std::printf("%zu keyframes, %zu surfels, %zu without fusion\n", rows.size(), rows.back().total_surfels, no_fusion);
      }
      return kOk;
    }
  } catch (const nn::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumeric;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
