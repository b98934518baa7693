#pragma once

// Independent reference implementations used by the tests. They share no
// code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/image.hpp"
#include "nsurf/core/surfel_map.hpp"

namespace oracle {

struct Hit {
  std::uint64_t id = 0;
  double t = 0.0;
  double offset = 0.0;
};

// All-pairs ray/disk test for every pixel, sorted by (t, id), truncated to
// `cap`.
inline std::vector<std::vector<Hit>> raster(const nsurf::SurfelMap& map, const nsurf::CameraIntrinsics& intr,
                                            const nsurf::Pose& pose, int cap) {
  std::vector<std::vector<Hit>> out(static_cast<std::size_t>(intr.width) * intr.height);
  const Eigen::Vector3d o = pose.translation;
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      Eigen::Vector3d d((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
      d = (pose.rotation * d).normalized();
      auto& list = out[static_cast<std::size_t>(y) * intr.width + x];
      for (const auto& s : map.geometries()) {
        const Eigen::Vector3d p = s.position.cast<double>();
        const Eigen::Vector3d n = s.normal.cast<double>();
        const double dn = d.dot(n);
        if (dn == 0.0) continue;
        const double t = (p - o).dot(n) / dn;
        if (!(t > 1e-4)) continue;
        const double off = (o + t * d - p).norm();
        if (off <= static_cast<double>(s.radius)) list.push_back({s.id, t, off});
      }
      std::sort(list.begin(), list.end(), [](const Hit& a, const Hit& b) {
        return a.t < b.t || (a.t == b.t && a.id < b.id);
      });
      if (list.size() > static_cast<std::size_t>(cap)) list.resize(static_cast<std::size_t>(cap));
    }
  }
  return out;
}

// Front-to-back compositing written as a product of survival factors.
inline Eigen::Vector3d composite(const std::vector<double>& t, const std::vector<double>& sigma,
                                 const std::vector<Eigen::Vector3d>& rgb, double last_delta,
                                 const Eigen::Vector3d& background) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  double survive = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double delta = i + 1 < t.size() ? t[i + 1] - t[i] : last_delta;
    const double alpha = 1.0 - std::exp(-sigma[i] * delta);
    c += survive * alpha * rgb[i];
    survive *= 1.0 - alpha;
  }
  return c + survive * background;
}

// Direct-summation SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, L = 1, averaged over channels and all fully inside windows.
inline double ssim(const nsurf::ImageF& a, const nsurf::ImageF& b) {
  const int r = 5;
  double w[11][11];
  double wsum = 0.0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      w[i + r][j + r] = std::exp(-(i * i + j * j) / (2.0 * 1.5 * 1.5));
      wsum += w[i + r][j + r];
    }
  }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  long count = 0;
  for (int c = 0; c < a.channels; ++c) {
    for (int y = r; y < a.height - r; ++y) {
      for (int x = r; x < a.width - r; ++x) {
        double ma = 0, mb = 0;
        for (int i = -r; i <= r; ++i) {
          for (int j = -r; j <= r; ++j) {
            const double k = w[i + r][j + r] / wsum;
            ma += k * a.at(x + j, y + i, c);
            mb += k * b.at(x + j, y + i, c);
          }
        }
        double va = 0, vb = 0, cov = 0;
        for (int i = -r; i <= r; ++i) {
          for (int j = -r; j <= r; ++j) {
            const double k = w[i + r][j + r] / wsum;
            const double da = a.at(x + j, y + i, c) - ma, db = b.at(x + j, y + i, c) - mb;
            va += k * da * da;
            vb += k * db * db;
            cov += k * da * db;
          }
        }
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

// Central difference of `f` with respect to *x.
inline double central_difference(const std::function<double()>& f, double* x, double eps) {
  const double keep = *x;
  *x = keep + eps;
  const double up = f();
  *x = keep - eps;
  const double down = f();
  *x = keep;
  return (up - down) / (2.0 * eps);
}

inline nsurf::SurfelMap random_map(std::mt19937_64& rng, std::size_t count, double spread, double depth_min,
                                   double depth_max, double radius_min, double radius_max,
                                   std::size_t feature_dim = nsurf::kDefaultFeatureDim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), z(depth_min, depth_max), rad(radius_min, radius_max);
  std::normal_distribution<double> g(0.0, 1.0);
  nsurf::SurfelMap map(feature_dim);
  std::vector<float> feature(feature_dim);
  for (std::size_t i = 0; i < count; ++i) {
    nsurf::SurfelGeometry s;
    const double depth = z(rng);
    s.position = Eigen::Vector3f(static_cast<float>(u(rng) * spread * depth), static_cast<float>(u(rng) * spread * depth),
                                 static_cast<float>(depth));
    Eigen::Vector3d n(g(rng), g(rng), g(rng) - 2.0);
    s.normal = n.normalized().cast<float>();
    s.radius = static_cast<float>(rad(rng));
    s.weight = static_cast<float>(0.1 + 0.9 * (u(rng) + 1.0) / 2.0);
    for (float& f : feature) f = static_cast<float>(u(rng));
    map.add(s, feature);
  }
  return map;
}

}  // namespace oracle
