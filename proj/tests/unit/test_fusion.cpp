#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "nsurf/fusion/fusion.hpp"
#include "nsurf/ingest/features.hpp"
#include "nsurf/ingest/local_field.hpp"
#include "nsurf/io/synth.hpp"
#include "nsurf/nn/bundle.hpp"

namespace nsurf {
namespace {

SurfelGeometry surfel(Vec3 p, double r, double w, Vec3 n = Vec3(0, 0, -1)) {
  SurfelGeometry g;
  g.position = p.cast<float>();
  g.normal = n.normalized().cast<float>();
  g.radius = static_cast<float>(r);
  g.weight = static_cast<float>(w);
  return g;
}

nn::NetworkBundle zero_nets() {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 1);
  for (nn::Parameter* p : nets.parameters()) p->value.values.setZero();
  return nets;
}

TEST(MergeGeometry, EqualWeights) {
  const GeometryMerge m = merge_geometry(surfel({0, 0, 0}, 0.02, 1), surfel({1, 0, 0}, 0.04, 1));
  EXPECT_EQ(m.geometry.position, Vec3f(0.5f, 0.0f, 0.0f));
  EXPECT_EQ(m.geometry.weight, 2.0f);
  EXPECT_FLOAT_EQ(m.geometry.radius, 0.03f);
  EXPECT_FALSE(m.degenerate_normal);
}

TEST(MergeGeometry, WeightedPosition) {
  const GeometryMerge m = merge_geometry(surfel({0, 0, 0}, 0.1, 3), surfel({1, 0, 0}, 0.1, 1));
  EXPECT_EQ(m.geometry.position.x(), 0.25f);
  EXPECT_EQ(m.geometry.weight, 4.0f);
}

TEST(MergeGeometry, KeepsGlobalIdAndNormalisesNormal) {
  SurfelGeometry g = surfel({0, 0, 1}, 0.1, 1, {0, 0, -1});
  g.id = 42;
  const GeometryMerge m = merge_geometry(g, surfel({0, 0, 1}, 0.1, 1, {1, 0, -1}));
  EXPECT_EQ(m.geometry.id, 42u);
  EXPECT_NEAR(m.geometry.normal.norm(), 1.0f, 1e-6f);
  const Vec3 expected = (Vec3(0, 0, -1) + Vec3(1, 0, -1).normalized()).normalized();
  EXPECT_NEAR((m.geometry.normal.cast<double>() - expected).norm(), 0.0, 1e-6);
}

TEST(MergeGeometry, OpposedNormalsKeepGlobal) {
  const GeometryMerge m = merge_geometry(surfel({0, 0, 1}, 0.1, 1, {0, 0, -1}), surfel({0, 0, 1}, 0.1, 1, {0, 0, 1}));
  EXPECT_TRUE(m.degenerate_normal);
  EXPECT_EQ(m.geometry.normal, Vec3f(0.0f, 0.0f, -1.0f));
}

TEST(MergeFeature, WeightedSumFixedPoint) {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 1);
  const std::vector<float> v = {0.25f, -0.5f, 1.0f};
  EXPECT_EQ(merge_feature(FusionScheme::weighted_sum, v, v, 1.0, 1.0, nets), v);
  const auto m = merge_feature(FusionScheme::weighted_sum, std::vector<float>{1.0f}, std::vector<float>{0.0f}, 1.0,
                               3.0, nets);
  EXPECT_FLOAT_EQ(m[0], 0.25f);
}

TEST(MergeFeature, GruAtZeroParameters) {
  nn::NetworkBundle nets = zero_nets();
  std::vector<float> fg(32), fl(32);
  for (int i = 0; i < 32; ++i) {
    fg[i] = 0.03f * i - 0.4f;
    fl[i] = 0.7f - 0.01f * i;
  }
  const auto out = merge_feature(FusionScheme::gru, fl, fg, 1.0, 1.0, nets);
  for (int i = 0; i < 32; ++i) EXPECT_FLOAT_EQ(out[i], 0.5f * fg[i]);
}

// Gate equations evaluated by hand from the parameter tensors.
std::vector<double> gru_oracle(const nn::NetworkBundle& nets, const std::vector<float>& x, const std::vector<float>& h) {
  const int n = 32;
  auto dense = [&](const std::string& name, const std::vector<double>& in, int j) {
    const nn::Matrix& w = nets.get(name + ".weight").value.values;
    double acc = nets.get(name + ".bias").value.values(0, j);
    for (std::size_t i = 0; i < in.size(); ++i) acc += in[i] * w(static_cast<Eigen::Index>(i), j);
    return acc;
  };
  std::vector<double> xh(2 * n);
  for (int i = 0; i < n; ++i) {
    xh[i] = x[i];
    xh[n + i] = h[i];
  }
  std::vector<double> z(n), r(n), rx(2 * n), out(n);
  for (int j = 0; j < n; ++j) {
    z[j] = 1.0 / (1.0 + std::exp(-dense("gru.z", xh, j)));
    r[j] = 1.0 / (1.0 + std::exp(-dense("gru.r", xh, j)));
  }
  for (int i = 0; i < n; ++i) {
    rx[i] = r[i] * h[i];
    rx[n + i] = x[i];
  }
  for (int j = 0; j < n; ++j) out[j] = (1.0 - z[j]) * h[j] + z[j] * std::tanh(dense("gru.t", rx, j));
  return out;
}

TEST(MergeFeature, GruMatchesHandEvaluation) {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 9);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<float> x(32), h(32);
    for (float& v : x) v = u(rng);
    for (float& v : h) v = u(rng);
    const auto got = merge_feature(FusionScheme::gru, x, h, 1.0, 1.0, nets);
    const auto want = gru_oracle(nets, x, h);
    for (int i = 0; i < 32; ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-6);
      EXPECT_GT(got[i], -1.0f);
      EXPECT_LT(got[i], 1.0f);
    }
  }
}

TEST(MergeFeature, DimensionMismatch) {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 1);
  EXPECT_THROW(merge_feature(FusionScheme::weighted_sum, std::vector<float>(3), std::vector<float>(4), 1, 1, nets),
               std::invalid_argument);
  EXPECT_THROW(merge_feature(FusionScheme::gru, std::vector<float>(4), std::vector<float>(4), 1, 1, nets),
               std::invalid_argument);
}

TEST(FusionConfig, Validation) {
  FusionConfig c;
  c.delta_depth = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.normal_angle_max = 95.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_fusion_scheme("weighted_sum"), FusionScheme::weighted_sum);
  EXPECT_THROW(parse_fusion_scheme("max"), std::invalid_argument);
}

struct Fixture {
  synth::Scene scene = synth::preset("room", 40, 30);
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 3);

  Frame frame(std::size_t i, std::size_t n) {
    const Pose pose = synth::trajectory_pose(scene.trajectory, i, n);
    const synth::View v = synth::render_view(scene, pose);
    return make_frame(v.rgb, v.depth, scene.intrinsics, pose, static_cast<int>(i));
  }
  SurfelMap local(const Frame& f) {
    const FeatureExtractor ex(nets);
    return build_local_surfels(f, DepthRefiner{}, ex, nets, IngestConfig{});
  }
};

TEST(Associate, EmptyGlobalInsertsEverything) {
  Fixture fx;
  const Frame f = fx.frame(0, 8);
  const SurfelMap local = fx.local(f);
  SurfelMap global;
  const FusionReport r = integrate_frame(global, local, f.intrinsics, f.pose, FusionConfig{}, fx.nets);
  EXPECT_EQ(r.inserted, local.size());
  EXPECT_EQ(r.merged, 0u);
  EXPECT_EQ(global.size(), local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    EXPECT_EQ(global.geometry(i).position, local.geometry(i).position);
    for (std::size_t k = 0; k < 32; ++k) EXPECT_EQ(global.feature(i)[k], local.feature(i)[k]);
  }
}

TEST(Associate, SelfAssociation) {
  Fixture fx;
  const Frame f = fx.frame(1, 8);
  const SurfelMap local = fx.local(f);
  const AssociationResult a = associate(local, local, f.intrinsics, f.pose, FusionConfig{});
  EXPECT_TRUE(a.inserts.empty());
  ASSERT_EQ(a.merges.size(), local.size());
}

TEST(Associate, DepthThreshold) {
  const CameraIntrinsics c{10, 10, 2, 2, 5, 5};
  SurfelMap global(1), near_local(1), far_local(1);
  global.add(surfel({0, 0, 2.0}, 0.1, 1), std::vector<float>{0});
  near_local.add(surfel({0, 0, 2.05}, 0.1, 1), std::vector<float>{0});
  far_local.add(surfel({0, 0, 2.15}, 0.1, 1), std::vector<float>{0});
  EXPECT_EQ(associate(global, near_local, c, Pose::identity(), FusionConfig{}).merges.size(), 1u);
  const AssociationResult far = associate(global, far_local, c, Pose::identity(), FusionConfig{});
  EXPECT_TRUE(far.merges.empty());
  EXPECT_EQ(far.inserts.size(), 1u);
}

TEST(Associate, NormalFilter) {
  const CameraIntrinsics c{10, 10, 2, 2, 5, 5};
  SurfelMap global(1), local(1);
  global.add(surfel({0, 0, 2.0}, 0.1, 1), std::vector<float>{0});
  local.add(surfel({0, 0, 2.0}, 0.1, 1, {std::sin(0.7), 0, -std::cos(0.7)}), std::vector<float>{0});
  EXPECT_TRUE(associate(global, local, c, Pose::identity(), FusionConfig{}).merges.empty());
}

TEST(Associate, PicksSmallestDepthGap) {
  const CameraIntrinsics c{10, 10, 2, 2, 5, 5};
  SurfelMap global(1), local(1);
  const auto a = global.add(surfel({0, 0, 1.95}, 0.1, 1), std::vector<float>{0});
  const auto b = global.add(surfel({0, 0, 2.02}, 0.1, 1), std::vector<float>{0});
  local.add(surfel({0, 0, 2.0}, 0.1, 1), std::vector<float>{0});
  const AssociationResult r = associate(global, local, c, Pose::identity(), FusionConfig{});
  ASSERT_EQ(r.merges.size(), 1u);
  EXPECT_EQ(r.merges[0].second, b);
  EXPECT_NE(r.merges[0].second, a);
}

TEST(Integrate, IdempotentGrowth) {
  Fixture fx;
  const Frame f = fx.frame(2, 8);
  const SurfelMap local = fx.local(f);
  SurfelMap global;
  integrate_frame(global, local, f.intrinsics, f.pose, FusionConfig{}, fx.nets);
  const FusionReport second = integrate_frame(global, local, f.intrinsics, f.pose, FusionConfig{}, fx.nets);
  EXPECT_EQ(second.inserted, 0u);
  EXPECT_EQ(second.merged, local.size());
  EXPECT_EQ(global.size(), local.size());
}

TEST(Integrate, DisjointViewsAddUp) {
  Fixture fx;
  fx.scene.trajectory.arc_deg = 180.0;
  const Frame a = fx.frame(0, 2);
  const Frame b = fx.frame(1, 2);
  const SurfelMap la = fx.local(a), lb = fx.local(b);
  SurfelMap global;
  integrate_frame(global, la, a.intrinsics, a.pose, FusionConfig{}, fx.nets);
  const FusionReport r = integrate_frame(global, lb, b.intrinsics, b.pose, FusionConfig{}, fx.nets);
  EXPECT_EQ(r.merged, 0u);
  EXPECT_EQ(global.size(), la.size() + lb.size());
}

TEST(Integrate, WeightConservation) {
  Fixture fx;
  SurfelMap global;
  double expected = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Frame f = fx.frame(i, 24);
    const SurfelMap local = fx.local(f);
    expected += local.total_weight();
    integrate_frame(global, local, f.intrinsics, f.pose, FusionConfig{}, fx.nets);
    EXPECT_NEAR(global.total_weight(), expected, 1e-6 * expected);
  }
}

// Sequential per-surfel merges in ascending local order.
TEST(Integrate, BatchedFeatureFusionMatchesSequentialMerges) {
  for (FusionScheme scheme : {FusionScheme::gru, FusionScheme::weighted_sum}) {
    Fixture fx;
    FusionConfig cfg;
    cfg.scheme = scheme;
    SurfelMap global;
    const Frame f0 = fx.frame(0, 40);
    integrate_frame(global, fx.local(f0), f0.intrinsics, f0.pose, cfg, fx.nets);
    const Frame f1 = fx.frame(1, 40);
    const SurfelMap local = fx.local(f1);

    const AssociationResult assoc = associate(global, local, f1.intrinsics, f1.pose, cfg);
    SurfelMap expected = global;
    std::size_t repeated = 0;
    std::map<std::uint64_t, int> seen;
    for (const auto& [lid, gid] : assoc.merges) {
      const std::size_t li = *local.index_of(lid), gi = *expected.index_of(gid);
      if (seen[gid]++ > 0) ++repeated;
      const std::vector<float> fg(expected.feature(gi).begin(), expected.feature(gi).end());
      const auto merged = merge_feature(scheme, local.feature(li), fg, local.geometry(li).weight,
                                        expected.geometry(gi).weight, fx.nets);
      std::copy(merged.begin(), merged.end(), expected.feature(gi).begin());
      expected.geometry(gi) = merge_geometry(expected.geometry(gi), local.geometry(li)).geometry;
    }
    for (std::uint64_t lid : assoc.inserts) {
      const std::size_t li = *local.index_of(lid);
      expected.add(local.geometry(li), local.feature(li));
    }
    EXPECT_GT(repeated, 0u);

    integrate_frame(global, local, f1.intrinsics, f1.pose, cfg, fx.nets);
    ASSERT_EQ(global.size(), expected.size());
    for (std::size_t i = 0; i < global.size(); ++i) {
      EXPECT_EQ(global.geometry(i).id, expected.geometry(i).id);
      EXPECT_EQ(global.geometry(i).position, expected.geometry(i).position);
      EXPECT_EQ(global.geometry(i).weight, expected.geometry(i).weight);
      for (std::size_t k = 0; k < 32; ++k) ASSERT_NEAR(global.feature(i)[k], expected.feature(i)[k], 1e-6);
    }
  }
}

TEST(Integrate, ReportCsv) {
  FusionReport r;
  r.frame_index = 3;
  r.merged = 10;
  r.inserted = 5;
  r.total_surfels = 15;
  r.bytes = 100;
  r.ms = 1.25;
  EXPECT_EQ(FusionReport::csv_header(), "frame_index,merged,inserted,total_surfels,bytes,ms");
  EXPECT_EQ(r.csv_row(), "3,10,5,15,100,1.250");
}

}  // namespace
}  // namespace nsurf
