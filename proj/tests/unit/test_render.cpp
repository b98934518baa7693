#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsurf/nn/ops.hpp"
#include "nsurf/render/composite.hpp"
#include "nsurf/render/embedding.hpp"
#include "nsurf/render/renderer.hpp"
#include "nsurf/render/shading.hpp"
#include "oracles.hpp"

namespace nsurf {
namespace {

TEST(Embedding, ZeroInput) {
  const std::vector<double> x = {0.0};
  const auto e = positional_encode(x, PositionalEmbedding{});
  ASSERT_EQ(e.size(), 11u);
  EXPECT_EQ(e[0], 0.0);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(e[1 + 2 * k], 0.0);
    EXPECT_EQ(e[2 + 2 * k], 1.0);
  }
}

TEST(Embedding, FirstBandAtOne) {
  const std::vector<double> x = {1.0};
  const auto e = positional_encode(x, PositionalEmbedding{});
  EXPECT_NEAR(e[1], 0.0, 1e-15);
  EXPECT_NEAR(e[2], -1.0, 1e-15);
  EXPECT_NEAR(e[3], 0.0, 1e-15);  // sin(2 pi)
  EXPECT_NEAR(e[4], 1.0, 1e-15);
}

TEST(Embedding, Widths) {
  EXPECT_EQ(positional_encode(std::vector<double>{0.1, 0.2, 0.3}, PositionalEmbedding{}).size(), 33u);
  EXPECT_EQ(PositionalEmbedding{}.width(3), 33);
  EXPECT_EQ((PositionalEmbedding{4, false}).width(2), 16);
  const double x = 0.37;
  const auto e = positional_encode(std::vector<double>{x}, PositionalEmbedding{});
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(e[1 + 2 * k], std::sin(std::ldexp(1.0, k) * std::numbers::pi * x), 1e-15);
    EXPECT_NEAR(e[2 + 2 * k], std::cos(std::ldexp(1.0, k) * std::numbers::pi * x), 1e-15);
  }
}

Surfel test_surfel(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Surfel s;
  s.geometry.position = Vec3f(0.1f, -0.2f, 2.0f);
  s.geometry.normal = Vec3f(0.0f, 0.6f, -0.8f);
  s.geometry.radius = 0.05f;
  s.geometry.weight = 0.7f;
  s.feature.resize(32);
  for (float& f : s.feature) f = u(rng);
  return s;
}

SurfelHit hit_at(const Surfel& s, double offset) {
  SurfelHit h;
  const Vec3 tangent = Vec3(1.0, 0.0, 0.0);
  h.hit_point = s.geometry.position.cast<double>() + offset * tangent;
  h.center_offset = offset;
  h.t = h.hit_point.norm();
  return h;
}

TEST(Interpolation, CenterRimAndHalf) {
  const nn::NetworkBundle nets = nn::NetworkBundle::create({}, 2);
  std::mt19937_64 rng(1);
  const Surfel s = test_surfel(rng);
  const Vec3 dir = Vec3(0.05, -0.1, 1.0).normalized();
  const Eigen::VectorXd center = interpolate_feature(hit_at(s, 0.0), s, dir, nets);
  EXPECT_EQ(center.size(), 256);
  EXPECT_GT(center.norm(), 0.0);
  const Eigen::VectorXd rim = interpolate_feature(hit_at(s, 0.05f), s, dir, nets);
  EXPECT_EQ(rim.norm(), 0.0);
  // Same hit point, only the scalar changes.
  SurfelHit half = hit_at(s, 0.0);
  half.center_offset = 0.025f;
  const Eigen::VectorXd h = interpolate_feature(half, s, dir, nets);
  EXPECT_NEAR((h - 0.5 * center).norm(), 0.0, 1e-12);
}

TEST(Shading, RangesHoldForRandomInputs) {
  const nn::NetworkBundle nets = nn::NetworkBundle::create({}, 3);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd f(256);
    for (auto& v : f) v = g(rng);
    const ShadeSample s = shade_point({g(rng), g(rng), g(rng)}, f, Vec3(g(rng), g(rng), g(rng)).normalized(), nets);
    EXPECT_GE(s.sigma, 0.0);
    for (int c = 0; c < 3; ++c) {
      EXPECT_GT(s.rgb[c], 0.0);
      EXPECT_LT(s.rgb[c], 1.0);
    }
  }
}

TEST(Shading, ZeroParameters) {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 3);
  for (nn::Parameter* p : nets.parameters()) p->value.values.setZero();
  Eigen::VectorXd f = Eigen::VectorXd::Constant(256, 0.3);
  const ShadeSample s = shade_point({0.2, 0.1, 1.0}, f, Vec3::UnitZ(), nets);
  EXPECT_EQ(s.sigma, 0.0);
  EXPECT_EQ(s.rgb, Eigen::Vector3d::Constant(0.5));
}

TEST(Shading, TapeMatchesPlainEvaluation) {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 4);
  std::mt19937_64 rng(3);
  const SurfelMap map = oracle::random_map(rng, 30, 0.4, 1.0, 3.0, 0.05, 0.2);
  HitInputs in(PositionalEmbedding::from_config(nets.config()));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    const int row = i % 30;
    const SurfelGeometry& g = map.geometry(row);
    const double off = u(rng) * g.radius;
    in.add(row, g, g.position.cast<double>() + Vec3(off, 0, 0), off, Vec3(u(rng), u(rng), 1.0).normalized());
  }
  const RowMatrix<double> features = map.features().cast<double>();
  RowMatrix<double> gathered(in.size(), features.cols());
  for (std::size_t i = 0; i < in.size(); ++i) gathered.row(i) = features.row(i % 30);
  const ShadingModel<double> model(nets);
  ColVector<double> sigma;
  RowMatrix<double> rgb;
  model.shade(model.interpolate(gathered, in), in, sigma, rgb);

  nn::Tape t(true);
  const ShadeVars v = shade_hits(t, nets, t.constant(features), in);
  EXPECT_LT((t.value(v.sigma).col(0) - sigma).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t.value(v.rgb) - rgb).cwiseAbs().maxCoeff(), 1e-12);

  const ShadingModel<float> single(nets);
  ColVector<float> sigma_f;
  RowMatrix<float> rgb_f;
  single.shade(single.interpolate(gathered.cast<float>(), in), in, sigma_f, rgb_f);
  EXPECT_LT((sigma_f.cast<double>() - sigma).cwiseAbs().maxCoeff(), 1e-3 * (1.0 + sigma.cwiseAbs().maxCoeff()));
  EXPECT_LT((rgb_f.cast<double>() - rgb).cwiseAbs().maxCoeff(), 1e-4);
}

RenderConfig cfg() { return RenderConfig{}; }

TEST(Composite, AllTransparentGivesBackground) {
  RenderConfig c = cfg();
  c.background = Eigen::Vector3d(0.1, 0.2, 0.3);
  const std::vector<double> t = {1.0, 2.0}, s = {0.0, 0.0};
  const std::vector<Eigen::Vector3d> rgb = {Eigen::Vector3d::Ones(), Eigen::Vector3d::Ones()};
  const CompositeResult r = composite(t, s, rgb, c);
  EXPECT_EQ(r.color, c.background);
  EXPECT_EQ(r.final_transmittance, 1.0);
}

TEST(Composite, OpaqueLimit) {
  RenderConfig c = cfg();
  c.background = Eigen::Vector3d(1.0, 1.0, 1.0);
  const Eigen::Vector3d c1(0.2, 0.4, 0.6);
  const std::vector<double> t = {1.0}, s = {50.0 / c.last_delta};
  const std::vector<Eigen::Vector3d> rgb = {c1};
  const CompositeResult r = composite(t, s, rgb, c);
  const double leak = std::exp(-50.0);
  EXPECT_LT((r.color - c1).cwiseAbs().maxCoeff(), 1e-20 + leak);
}

TEST(Composite, TwoHitsLnTwo) {
  RenderConfig c = cfg();
  c.background = Eigen::Vector3d(0.9, 0.1, 0.5);
  const Eigen::Vector3d c1(1.0, 0.0, 0.0), c2(0.0, 1.0, 0.0);
  const double d1 = 0.5;
  const std::vector<double> t = {1.0, 1.0 + d1};
  const std::vector<double> s = {std::log(2.0) / d1, std::log(2.0) / c.last_delta};
  const std::vector<Eigen::Vector3d> rgb = {c1, c2};
  const CompositeResult r = composite(t, s, rgb, c);
  EXPECT_LT((r.color - (0.5 * c1 + 0.25 * c2 + 0.25 * c.background)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(r.weights[1], 0.25, 1e-12);
  EXPECT_NEAR(r.final_transmittance, 0.25, 1e-12);
}

TEST(Composite, MatchesOracleAndInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(u(rng) * 12);
    std::vector<double> t(n), s(n);
    std::vector<Eigen::Vector3d> rgb(n);
    double at = 0.5;
    for (int i = 0; i < n; ++i) {
      at += 0.001 + 0.2 * u(rng);
      t[i] = at;
      s[i] = e(rng) * 30.0;
      rgb[i] = Eigen::Vector3d(u(rng), u(rng), u(rng));
    }
    RenderConfig c = cfg();
    c.background = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const CompositeResult r = composite(t, s, rgb, c);
    EXPECT_LT((r.color - oracle::composite(t, s, rgb, c.last_delta, c.background)).cwiseAbs().maxCoeff(), 1e-12);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      sum += r.weights[i];
      if (i > 0) EXPECT_LE(r.transmittance[i], r.transmittance[i - 1]);
    }
    EXPECT_LE(sum, 1.0 + 1e-12);
  }
}

TEST(Composite, Intervals) {
  const std::vector<double> t = {1.0, 1.5, 3.0};
  EXPECT_EQ(interval_lengths(t, 0.01), (std::vector<double>{0.5, 1.5, 0.01}));
}

TEST(Composite, RejectsBadInput) {
  const std::vector<Eigen::Vector3d> rgb(2, Eigen::Vector3d::Zero());
  EXPECT_THROW(composite(std::vector<double>{2.0, 1.0}, std::vector<double>{1, 1}, rgb, cfg()), std::invalid_argument);
  EXPECT_THROW(composite(std::vector<double>{1.0}, std::vector<double>{1, 1}, rgb, cfg()), std::invalid_argument);
  RenderConfig c = cfg();
  c.max_hits = 1;
  EXPECT_THROW(composite(std::vector<double>{1.0, 2.0}, std::vector<double>{1, 1}, rgb, c), std::invalid_argument);
  c = cfg();
  c.last_delta = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Composite, DifferentiableMatchesPlain) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<int> offsets = {0, 3, 3, 5};
  nn::Matrix sigma(5, 1), rgb(5, 3);
  nn::Vector deltas(5);
  for (int i = 0; i < 5; ++i) {
    sigma(i, 0) = 10.0 * u(rng);
    deltas(i) = 0.01 + 0.1 * u(rng);
    for (int c = 0; c < 3; ++c) rgb(i, c) = u(rng);
  }
  const Eigen::Vector3d bg(0.3, 0.6, 0.9);
  nn::Tape t(false);
  const nn::Matrix& out = t.value(nn::composite(t, t.constant(sigma), t.constant(rgb), deltas, offsets, bg));
  ASSERT_EQ(out.rows(), 3);
  for (int p = 0; p < 3; ++p) {
    std::vector<double> ts, ss;
    std::vector<Eigen::Vector3d> cs;
    double at = 1.0;
    for (int i = offsets[p]; i < offsets[p + 1]; ++i) {
      ts.push_back(at);
      at += deltas(i);
      ss.push_back(sigma(i, 0));
      cs.push_back(rgb.row(i).transpose());
    }
    const double last = offsets[p + 1] > offsets[p] ? deltas(offsets[p + 1] - 1) : 0.01;
    const Eigen::Vector3d want = oracle::composite(ts, ss, cs, last, bg);
    EXPECT_LT((out.row(p).transpose() - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

CameraIntrinsics cam16() { return {12.0, 12.0, 7.5, 7.5, 16, 16}; }

TEST(Renderer, EmptyMapIsBackground) {
  const nn::NetworkBundle nets = nn::NetworkBundle::create({}, 1);
  RenderConfig c = cfg();
  c.background = Eigen::Vector3d(0.25, 0.5, 0.75);
  const ImageF img = render_image(SurfelMap(), cam16(), Pose::identity(), nets, c);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      EXPECT_EQ(img.at(x, y, 0), 0.25f);
      EXPECT_EQ(img.at(x, y, 1), 0.5f);
      EXPECT_EQ(img.at(x, y, 2), 0.75f);
    }
  }
  const ImageF dense = render_image_dense_baseline(SurfelMap(), cam16(), Pose::identity(), nets, c, 0.05, 3.0);
  EXPECT_EQ(dense.data, img.data);
}

TEST(Renderer, DeterministicAcrossRunsAndWorkers) {
  const nn::NetworkBundle nets = nn::NetworkBundle::create({}, 8);
  std::mt19937_64 rng(7);
  const SurfelMap map = oracle::random_map(rng, 400, 0.5, 1.0, 3.0, 0.05, 0.3);
  RenderConfig c = cfg();
  const CameraIntrinsics big{30.0, 30.0, 19.5, 14.5, 40, 30};
  const ImageF a = render_image(map, big, Pose::identity(), nets, c);
  const ImageF b = render_image(map, big, Pose::identity(), nets, c);
  c.workers = 3;
  const ImageF d = render_image(map, big, Pose::identity(), nets, c);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.data, d.data);
}

// Rasterize, shade each hit on its own and composite, pixel by pixel.
TEST(Renderer, MatchesPerPixelDecomposition) {
  const nn::NetworkBundle nets = nn::NetworkBundle::create({}, 9);
  std::mt19937_64 rng(8);
  SurfelMap map = oracle::random_map(rng, 150, 0.5, 1.0, 3.0, 0.05, 0.4);
  RenderConfig c = cfg();
  c.double_precision = true;
  c.background = Eigen::Vector3d(0.1, 0.2, 0.3);
  const ImageF img = render_image(map, cam16(), Pose::identity(), nets, c);
  const PixelSurfelBuffer buffers = rasterize(map, cam16(), Pose::identity(), c.max_hits);
  double worst = 0.0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const Ray ray = ray_through_pixel(cam16(), Pose::identity(), {double(x), double(y)});
      std::vector<double> ts, ss;
      std::vector<Eigen::Vector3d> cs;
      for (const SurfelHit& h : buffers.hits(x, y)) {
        const Surfel s = map.surfel(h.surfel_index);
        const ShadeSample sh = shade_point(h.hit_point, interpolate_feature(h, s, ray.direction, nets), ray.direction, nets);
        ts.push_back(h.t);
        ss.push_back(sh.sigma);
        cs.push_back(sh.rgb);
      }
      const Eigen::Vector3d want = composite(ts, ss, cs, c).color.cwiseMax(0.0).cwiseMin(1.0);
      for (int ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(img.at(x, y, ch) - want[ch]));
    }
  }
  // Output is stored in single precision.
  EXPECT_LE(worst, 6e-8);
}

TEST(Renderer, DenseBaselineAgreesOnSingleOpaqueSurfel) {
  nn::NetworkBundle nets = nn::NetworkBundle::create({}, 10);
  nets.get("shade.sigma.bias").value.values.setConstant(2000.0);
  SurfelMap map(32);
  SurfelGeometry g;
  g.position = Vec3f(0.0f, 0.0f, 2.0f);
  g.normal = Vec3f(0.0f, 0.0f, -1.0f);
  g.radius = 0.6f;
  g.weight = 1.0f;
  std::vector<float> f(32);
  for (int i = 0; i < 32; ++i) f[i] = 0.05f * (i % 7) - 0.1f;
  map.add(g, f);
  RenderConfig c = cfg();
  c.background = Eigen::Vector3d(0.0, 0.0, 0.0);
  const ImageF fast = render_image(map, cam16(), Pose::identity(), nets, c);
  const ImageF dense = render_image_dense_baseline(map, cam16(), Pose::identity(), nets, c, 0.01, 4.0);
  int covered = 0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_LE(std::abs(fast.at(x, y, ch) - dense.at(x, y, ch)), 2.0 / 255.0);
      covered += fast.at(x, y, 0) > 0.0f;
    }
  }
  EXPECT_GT(covered, 20);
}

}  // namespace
}  // namespace nsurf
