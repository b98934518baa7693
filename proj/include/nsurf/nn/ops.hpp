#pragma once

#include <vector>

#include "nsurf/nn/tape.hpp"

namespace nsurf::nn {

// Elementwise and linear-algebra ops. All shape mismatches throw
// std::invalid_argument.

Var matmul(Tape& t, Var a, Var b);
// x + b with b a 1 x cols row broadcast over the rows of x.
Var add_bias(Tape& t, Var x, Var b);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
// 1 - a.
Var one_minus(Tape& t, Var a);
// Row i of a multiplied by the constant s[i].
Var scale_rows(Tape& t, Var a, const Vector& s);

Var relu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var tanh(Tape& t, Var a);
Var exp(Tape& t, Var a);

Var concat_cols(Tape& t, const std::vector<Var>& parts);
Var concat_rows(Tape& t, const std::vector<Var>& parts);
Var gather_rows(Tape& t, Var a, const std::vector<int>& rows);
// Copy of `base` with rows[k] replaced by row k of `values`. Rows must be
// distinct.
Var scatter_rows(Tape& t, Var base, const std::vector<int>& rows, Var values);

// Images are (height*width) x channels matrices in row-major pixel order.
// 3x3 'same' zero-padded patch extraction: output column order is
// (ky, kx, channel), matching a [3,3,Cin,Cout] weight.
Var im2col3x3(Tape& t, Var image, int height, int width);
// 2x2 average pooling; odd trailing rows/columns are pooled over the
// available pixels. Output size is ceil(h/2) x ceil(w/2).
Var avg_pool2(Tape& t, Var image, int height, int width);

// Volume-rendering compositing. Hits of pixel p occupy rows
// [offsets[p], offsets[p+1]) of sigma (n x 1) and rgb (n x 3), front to back.
// deltas[i] is the interval length of hit i. Output is P x 3.
Var composite(Tape& t, Var sigma, Var rgb, const Vector& deltas, const std::vector<int>& offsets,
              const Eigen::Vector3d& background);

// mean((a - target)^2) over all entries, as a 1x1.
Var mse(Tape& t, Var a, const Matrix& target);
// mean(|a - target|) over entries where mask != 0, as a 1x1 (0 if empty).
Var masked_l1(Tape& t, Var a, const Matrix& target, const Matrix& mask);
Var sum(Tape& t, Var a);

}  // namespace nsurf::nn
