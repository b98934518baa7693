#include "nsurf/fusion/fusion.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "nsurf/nn/ops.hpp"
#include "nsurf/raster/raster.hpp"

namespace nsurf {

FusionScheme parse_fusion_scheme(const std::string& name) {
  if (name == "gru") return FusionScheme::gru;
  if (name == "weighted_sum" || name == "weighted-sum") return FusionScheme::weighted_sum;
  throw std::invalid_argument("unknown fusion scheme '" + name + "'");
}

std::string to_string(FusionScheme scheme) { return scheme == FusionScheme::gru ? "gru" : "weighted_sum"; }

void FusionConfig::validate() const {
  if (!(delta_depth > 0.0)) throw std::invalid_argument("fusion: delta_depth must be > 0");
  if (k_candidates < 1) throw std::invalid_argument("fusion: k_candidates must be >= 1");
  if (!(normal_angle_max > 0.0 && normal_angle_max < 90.0)) {
    throw std::invalid_argument("fusion: normal_angle_max must be in (0, 90)");
  }
}

AssociationResult associate(const SurfelMap& global, const SurfelMap& local, const CameraIntrinsics& intr,
                            const Pose& pose, const FusionConfig& config) {
  config.validate();
  AssociationResult out;
  PixelSurfelBuffer buffers;
  if (!global.empty()) {
    buffers = rasterize(global, intr, pose, config.k_candidates, RasterOptions{config.workers});
  }
  const double min_cos = std::cos(config.normal_angle_max * M_PI / 180.0);
  for (std::size_t i = 0; i < local.size(); ++i) {
    const SurfelGeometry& s = local.geometry(i);
    const Vec3 p = s.position.cast<double>();
    const auto proj = project(intr, pose, p);
    const SurfelHit* best = nullptr;
    double best_dz = 0.0;
    if (proj && !global.empty()) {
      const long px = std::lround(proj->pixel.u);
      const long py = std::lround(proj->pixel.v);
      if (px >= 0 && py >= 0 && px < intr.width && py < intr.height) {
        const Vec3 n = s.normal.cast<double>();
        for (const SurfelHit& hit : buffers.hits(static_cast<int>(px), static_cast<int>(py))) {
          const SurfelGeometry& g = global.geometry(hit.surfel_index);
          if (n.dot(g.normal.cast<double>()) < min_cos) continue;
          const double dz = std::abs(proj->depth - pose.to_camera(hit.hit_point).z());
          if (!(dz < config.delta_depth)) continue;
          const bool better = best == nullptr || dz < best_dz ||
                              (dz == best_dz && (hit.center_offset < best->center_offset ||
                                                 (hit.center_offset == best->center_offset && hit_before(hit, *best))));
          if (better) {
            best = &hit;
            best_dz = dz;
          }
        }
      }
    }
    if (best) {
      out.merges.emplace_back(s.id, best->surfel_id);
    } else {
      out.inserts.push_back(s.id);
    }
  }
  return out;
}

GeometryMerge merge_geometry(const SurfelGeometry& global, const SurfelGeometry& local) {
  const double wg = global.weight, wl = local.weight;
  const double w = wg + wl;
  GeometryMerge out;
  out.geometry = global;
  out.geometry.position = ((wg * global.position.cast<double>() + wl * local.position.cast<double>()) / w).cast<float>();
  const Vec3 n = (wg * global.normal.cast<double>() + wl * local.normal.cast<double>()) / w;
  const double len = n.norm();
  if (len < 1e-6) {
    out.degenerate_normal = true;
  } else {
    out.geometry.normal = (n / len).cast<float>();
  }
  out.geometry.radius = static_cast<float>((wg * global.radius + wl * local.radius) / w);
  out.geometry.weight = static_cast<float>(w);
  return out;
}

namespace {

nn::Matrix row_matrix(std::span<const float> f) {
  nn::Matrix m(1, static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = f[i];
  return m;
}

nn::Var fuse_rows(nn::Tape& t, nn::NetworkBundle& nets, FusionScheme scheme, nn::Var local, nn::Var global,
                  const nn::Vector& w_local, const nn::Vector& w_global) {
  if (scheme == FusionScheme::gru) return nn::gru_cell(t, nets, local, global);
  const nn::Vector total = w_local + w_global;
  return nn::add(t, nn::scale_rows(t, local, w_local.cwiseQuotient(total)),
                 nn::scale_rows(t, global, w_global.cwiseQuotient(total)));
}

}  // namespace

std::vector<float> merge_feature(FusionScheme scheme, std::span<const float> f_local, std::span<const float> f_global,
                                 double w_local, double w_global, nn::NetworkBundle& nets) {
  if (f_local.size() != f_global.size()) throw std::invalid_argument("merge_feature: dimension mismatch");
  if (scheme == FusionScheme::gru && f_local.size() != static_cast<std::size_t>(nets.config().feature_dim)) {
    throw std::invalid_argument("merge_feature: feature width does not match the GRU");
  }
  nn::Tape t(false);
  const nn::Var out = fuse_rows(t, nets, scheme, t.constant(row_matrix(f_local)), t.constant(row_matrix(f_global)),
                                nn::Vector::Constant(1, w_local), nn::Vector::Constant(1, w_global));
  const nn::Matrix& v = t.value(out);
  std::vector<float> result(f_local.size());
  for (std::size_t i = 0; i < result.size(); ++i) result[i] = static_cast<float>(v(0, static_cast<Eigen::Index>(i)));
  return result;
}

nn::Var replay_feature_fusion(nn::Tape& t, nn::NetworkBundle& nets, FusionScheme scheme, nn::Var global_features,
                              nn::Var local_features, const FusionTrace& trace) {
  nn::Var g = global_features;
  for (const MergeRound& round : trace.rounds) {
    const nn::Var x = nn::gather_rows(t, local_features, round.local_rows);
    const nn::Var h = nn::gather_rows(t, g, round.global_rows);
    g = nn::scatter_rows(t, g, round.global_rows, fuse_rows(t, nets, scheme, x, h, round.w_local, round.w_global));
  }
  if (!trace.inserted_local_rows.empty()) {
    g = nn::concat_rows(t, {g, nn::gather_rows(t, local_features, trace.inserted_local_rows)});
  }
  return g;
}

std::string FusionReport::csv_header() { return "frame_index,merged,inserted,total_surfels,bytes,ms"; }

std::string FusionReport::csv_row() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%zu,%zu,%zu,%zu,%.3f", frame_index, merged, inserted, total_surfels, bytes, ms);
  return buf;
}

FusionTrace integrate_geometry(SurfelMap& global, const SurfelMap& local, const AssociationResult& assoc,
                               FusionReport& report) {
  FusionTrace trace;
  std::unordered_map<std::size_t, std::size_t> merges_into;
  for (const auto& [local_id, global_id] : assoc.merges) {
    const std::size_t li = local.index_of(local_id).value();
    const std::size_t gi = global.index_of(global_id).value();
    const std::size_t round = merges_into[gi]++;
    if (round == trace.rounds.size()) trace.rounds.emplace_back();
    MergeRound& r = trace.rounds[round];
    SurfelGeometry& g = global.geometry(gi);
    const SurfelGeometry& l = local.geometry(li);
    r.global_rows.push_back(static_cast<int>(gi));
    r.local_rows.push_back(static_cast<int>(li));
    r.w_local.conservativeResize(r.w_local.size() + 1);
    r.w_local(r.w_local.size() - 1) = l.weight;
    r.w_global.conservativeResize(r.w_global.size() + 1);
    r.w_global(r.w_global.size() - 1) = g.weight;
    const GeometryMerge m = merge_geometry(g, l);
    if (m.degenerate_normal) ++report.degenerate_normals;
    g = m.geometry;
  }
  const std::vector<float> zeros(global.feature_dim(), 0.0f);
  for (std::uint64_t local_id : assoc.inserts) {
    const std::size_t li = local.index_of(local_id).value();
    global.add(local.geometry(li), zeros);
    trace.inserted_local_rows.push_back(static_cast<int>(li));
  }
  report.merged = assoc.merges.size();
  report.inserted = assoc.inserts.size();
  return trace;
}

FusionReport integrate_frame(SurfelMap& global, const SurfelMap& local, const CameraIntrinsics& intr,
                             const Pose& pose, const FusionConfig& config, nn::NetworkBundle& nets, int frame_index,
                             FusionTrace* trace_out) {
  if (local.feature_dim() != global.feature_dim()) throw std::invalid_argument("integrate_frame: feature width mismatch");
  const auto start = std::chrono::steady_clock::now();
  FusionReport report;
  report.frame_index = frame_index;
  const AssociationResult assoc = associate(global, local, intr, pose, config);
  const nn::Matrix old_features = global.features().cast<double>();
  FusionTrace trace = integrate_geometry(global, local, assoc, report);

  nn::Tape t(false);
  const nn::Var fused = replay_feature_fusion(t, nets, config.scheme, t.constant(old_features),
                                              t.constant(local.features().cast<double>()), trace);
  const nn::Matrix& values = t.value(fused);
  if (static_cast<std::size_t>(values.rows()) != global.size()) throw std::logic_error("integrate_frame: row mismatch");
  global.features() = values.cast<float>();

  report.total_surfels = global.size();
  report.bytes = global.memory_bytes();
  report.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (trace_out) *trace_out = std::move(trace);
  return report;
}

}  // namespace nsurf
