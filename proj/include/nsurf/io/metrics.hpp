#pragma once

#include "nsurf/core/image.hpp"

namespace nsurf {

inline constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) over all channels; identical images give kPsnrCap.
// Throws std::invalid_argument on shape mismatch.
double psnr(const ImageF& a, const ImageF& b);

// Mean SSIM over channels and all positions where an 11x11 Gaussian window
// (sigma 1.5) fits, with K1 = 0.01, K2 = 0.03 and a data range of 1.
// Images must be at least 11 pixels in each dimension.
double ssim(const ImageF& a, const ImageF& b);

// Mean absolute difference over all channels.
double mean_abs_diff(const ImageF& a, const ImageF& b);

}  // namespace nsurf
