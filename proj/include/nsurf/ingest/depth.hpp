#pragma once

#include "nsurf/ingest/frame.hpp"
#include "nsurf/nn/bundle.hpp"

namespace nsurf {

enum class RefinerKind { identity, diffusion_fill, learned };

struct DepthRefiner {
  RefinerKind kind = RefinerKind::diffusion_fill;
  double tolerance = 1e-4;  // meters, max change per sweep at convergence
  int max_iterations = 500;
  double learned_range = 0.1;  // learned residual scales depth by exp(+-range)
};

RefinerKind parse_refiner_kind(const std::string& name);

// Hole filling by iterated 4-neighbour averaging (Jacobi sweeps) with the
// valid pixels held fixed. Holes start at the mean valid depth. Throws
// std::invalid_argument("no depth support") when nothing is valid.
ImageF diffusion_fill(const ImageF& depth, const Mask& valid, double tolerance, int max_iterations);

// Refined depth for a frame. diffusion_fill and learned produce dense,
// strictly positive depth. identity returns the sensor depth untouched
// (holes stay 0 and yield no surfels), which is the no-refinement ablation.
// The learned variant needs `nets` with refiner tensors.
ImageF refine_depth(const DepthRefiner& refiner, const Frame& frame, nn::NetworkBundle* nets = nullptr);

// Learned refinement on a tape: returns an (H*W) x 1 depth column.
// `base` is the diffusion-filled depth the residual multiplies.
nn::Var refine_depth_learned(nn::Tape& t, nn::NetworkBundle& nets, const Frame& frame, const ImageF& base,
                             double range);

// Masked L1 depth loss against the sensor depth (mean over valid pixels).
nn::Var depth_loss(nn::Tape& t, nn::Var refined, const Frame& frame);

}  // namespace nsurf
