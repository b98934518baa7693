#include "nsurf/nn/ops.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nsurf::nn {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
        << b.cols();
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.rows()) {
    std::ostringstream msg;
    msg << "matmul: inner dimensions " << av.cols() << " and " << bv.rows();
    throw std::invalid_argument(msg.str());
  }
  Matrix out = av * bv;
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(ia)) {
      tp.grad_storage(ia).noalias() += g * tp.value_of(ib).transpose();
    }
    if (tp.needs_grad(ib)) {
      tp.grad_storage(ib).noalias() += tp.value_of(ia).transpose() * g;
    }
  });
}

Var add_bias(Tape& t, Var x, Var b) {
  const Matrix& xv = t.value(x);
  const Matrix& bv = t.value(b);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw std::invalid_argument("add_bias: bias must be 1 x cols(x)");
  }
  Matrix out = xv;
  out.rowwise() += bv.row(0);
  const int ix = x.id(), ib = b.id();
  return t.push(std::move(out), {x, b}, [ix, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(ix)) {
      tp.grad_storage(ix) += g;
    }
    if (tp.needs_grad(ib)) {
      tp.grad_storage(ib) += g.colwise().sum();
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a) + t.value(b);
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(ia)) tp.grad_storage(ia) += g;
    if (tp.needs_grad(ib)) tp.grad_storage(ib) += g;
  });
}

Var sub(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "sub");
  Matrix out = t.value(a) - t.value(b);
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(ia)) tp.grad_storage(ia) += g;
    if (tp.needs_grad(ib)) tp.grad_storage(ib) -= g;
  });
}

Var mul(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "mul");
  Matrix out = t.value(a).cwiseProduct(t.value(b));
  const int ia = a.id(), ib = b.id();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(ia)) tp.grad_storage(ia) += g.cwiseProduct(tp.value_of(ib));
    if (tp.needs_grad(ib)) tp.grad_storage(ib) += g.cwiseProduct(tp.value_of(ia));
  });
}

Var scale(Tape& t, Var a, double s) {
  Matrix out = t.value(a) * s;
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, s](Tape& tp, int self) {
    tp.grad_storage(ia) += tp.grad_of(self) * s;
  });
}

Var one_minus(Tape& t, Var a) {
  Matrix out = (1.0 - t.value(a).array()).matrix();
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    tp.grad_storage(ia) -= tp.grad_of(self);
  });
}

Var scale_rows(Tape& t, Var a, const Vector& s) {
  const Matrix& av = t.value(a);
  if (s.size() != av.rows()) {
    throw std::invalid_argument("scale_rows: scale length must equal row count");
  }
  Matrix out = s.asDiagonal() * av;
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, s](Tape& tp, int self) {
    tp.grad_storage(ia).noalias() += s.asDiagonal() * tp.grad_of(self);
  });
}

Var relu(Tape& t, Var a) {
  Matrix out = t.value(a).cwiseMax(0.0);
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& x = tp.value_of(ia);
    tp.grad_storage(ia) += (x.array() > 0.0).select(tp.grad_of(self), 0.0).matrix();
  });
}

Var sigmoid(Tape& t, Var a) {
  Matrix out = (1.0 / (1.0 + (-t.value(a).array()).exp())).matrix();
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& y = tp.value_of(self);
    tp.grad_storage(ia) += (tp.grad_of(self).array() * y.array() * (1.0 - y.array())).matrix();
  });
}

Var tanh(Tape& t, Var a) {
  Matrix out = t.value(a).array().tanh().matrix();
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& y = tp.value_of(self);
    tp.grad_storage(ia) += (tp.grad_of(self).array() * (1.0 - y.array().square())).matrix();
  });
}

Var exp(Tape& t, Var a) {
  Matrix out = t.value(a).array().exp().matrix();
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    tp.grad_storage(ia) += tp.grad_of(self).cwiseProduct(tp.value_of(self));
  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_cols: no inputs");
  }
  const Eigen::Index rows = t.value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (t.value(p).rows() != rows) {
      throw std::invalid_argument("concat_cols: row counts differ");
    }
    cols += t.value(p).cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    const Matrix& v = t.value(p);
    out.middleCols(at, v.cols()) = v;
    spans.emplace_back(p.id(), at);
    at += v.cols();
  }
  return t.push(std::move(out), parts, [spans](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    for (const auto& [id, offset] : spans) {
      if (tp.needs_grad(id)) {
        tp.grad_storage(id) += g.middleCols(offset, tp.value_of(id).cols());
      }
    }
  });
}

Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_rows: no inputs");
  }
  const Eigen::Index cols = t.value(parts[0]).cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (t.value(p).cols() != cols) {
      throw std::invalid_argument("concat_rows: column counts differ");
    }
    rows += t.value(p).rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    const Matrix& v = t.value(p);
    out.middleRows(at, v.rows()) = v;
    spans.emplace_back(p.id(), at);
    at += v.rows();
  }
  return t.push(std::move(out), parts, [spans](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    for (const auto& [id, offset] : spans) {
      if (tp.needs_grad(id)) {
        tp.grad_storage(id) += g.middleRows(offset, tp.value_of(id).rows());
      }
    }
  });
}

Var gather_rows(Tape& t, Var a, const std::vector<int>& rows) {
  const Matrix& av = t.value(a);
  Matrix out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= av.rows()) {
      throw std::invalid_argument("gather_rows: index out of range");
    }
    out.row(static_cast<Eigen::Index>(k)) = av.row(rows[k]);
  }
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, rows](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Matrix& ga = tp.grad_storage(ia);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      ga.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
    }
  });
}

Var scatter_rows(Tape& t, Var base, const std::vector<int>& rows, Var values) {
  const Matrix& bv = t.value(base);
  const Matrix& vv = t.value(values);
  if (vv.rows() != static_cast<Eigen::Index>(rows.size()) || vv.cols() != bv.cols()) {
    throw std::invalid_argument("scatter_rows: values shape mismatch");
  }
  Matrix out = bv;
  std::vector<char> seen(static_cast<std::size_t>(bv.rows()), 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= bv.rows() || seen[rows[k]]) {
      throw std::invalid_argument("scatter_rows: rows must be distinct and in range");
    }
    seen[rows[k]] = 1;
    out.row(rows[k]) = vv.row(static_cast<Eigen::Index>(k));
  }
  const int ib = base.id(), iv = values.id();
  return t.push(std::move(out), {base, values}, [ib, iv, rows](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.needs_grad(ib)) {
      Matrix gb = g;
      for (int r : rows) gb.row(r).setZero();
      tp.grad_storage(ib) += gb;
    }
    if (tp.needs_grad(iv)) {
      Matrix& gv = tp.grad_storage(iv);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        gv.row(static_cast<Eigen::Index>(k)) += g.row(rows[k]);
      }
    }
  });
}

Var im2col3x3(Tape& t, Var image, int height, int width) {
  const Matrix& img = t.value(image);
  if (img.rows() != static_cast<Eigen::Index>(height) * width) {
    throw std::invalid_argument("im2col3x3: row count must equal height*width");
  }
  const Eigen::Index c = img.cols();
  Matrix out = Matrix::Zero(img.rows(), 9 * c);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * width + x;
      for (int ky = 0; ky < 3; ++ky) {
        const int sy = y + ky - 1;
        if (sy < 0 || sy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int sx = x + kx - 1;
          if (sx < 0 || sx >= width) continue;
          out.row(row).segment((ky * 3 + kx) * c, c) = img.row(static_cast<Eigen::Index>(sy) * width + sx);
        }
      }
    }
  }
  const int ii = image.id();
  return t.push(std::move(out), {image}, [ii, height, width, c](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Matrix& gi = tp.grad_storage(ii);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const Eigen::Index row = static_cast<Eigen::Index>(y) * width + x;
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= width) continue;
            gi.row(static_cast<Eigen::Index>(sy) * width + sx) += g.row(row).segment((ky * 3 + kx) * c, c);
          }
        }
      }
    }
  });
}

Var avg_pool2(Tape& t, Var image, int height, int width) {
  const Matrix& img = t.value(image);
  if (img.rows() != static_cast<Eigen::Index>(height) * width) {
    throw std::invalid_argument("avg_pool2: row count must equal height*width");
  }
  const int oh = (height + 1) / 2;
  const int ow = (width + 1) / 2;
  // Each output pixel averages its 1..4 source pixels.
  std::vector<std::vector<Eigen::Index>> sources(static_cast<std::size_t>(oh) * ow);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(oh) * ow, img.cols());
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      auto& src = sources[static_cast<std::size_t>(y) * ow + x];
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int sy = 2 * y + dy, sx = 2 * x + dx;
          if (sy < height && sx < width) src.push_back(static_cast<Eigen::Index>(sy) * width + sx);
        }
      }
      const Eigen::Index row = static_cast<Eigen::Index>(y) * ow + x;
      for (Eigen::Index s : src) out.row(row) += img.row(s);
      out.row(row) /= static_cast<double>(src.size());
    }
  }
  const int ii = image.id();
  return t.push(std::move(out), {image}, [ii, sources](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Matrix& gi = tp.grad_storage(ii);
    for (std::size_t o = 0; o < sources.size(); ++o) {
      const double w = 1.0 / static_cast<double>(sources[o].size());
      for (Eigen::Index s : sources[o]) gi.row(s) += w * g.row(static_cast<Eigen::Index>(o));
    }
  });
}

Var composite(Tape& t, Var sigma, Var rgb, const Vector& deltas, const std::vector<int>& offsets,
              const Eigen::Vector3d& background) {
  const Matrix& s = t.value(sigma);
  const Matrix& c = t.value(rgb);
  const Eigen::Index n = s.rows();
  if (s.cols() != 1 || c.rows() != n || c.cols() != 3 || deltas.size() != n || offsets.empty() ||
      offsets.front() != 0 || offsets.back() != n) {
    throw std::invalid_argument("composite: inconsistent hit arrays");
  }
  const std::size_t pixels = offsets.size() - 1;
  Matrix out(static_cast<Eigen::Index>(pixels), 3);
  // Transmittance before each hit, plus the final one per pixel.
  Vector trans(n);
  Vector final_trans(static_cast<Eigen::Index>(pixels));
  for (std::size_t p = 0; p < pixels; ++p) {
    double tau = 1.0;
    Eigen::RowVector3d color = Eigen::RowVector3d::Zero();
    for (int i = offsets[p]; i < offsets[p + 1]; ++i) {
      trans[i] = tau;
      const double next = tau * std::exp(-s(i, 0) * deltas[i]);
      color += (tau - next) * c.row(i);
      tau = next;
    }
    final_trans[static_cast<Eigen::Index>(p)] = tau;
    out.row(static_cast<Eigen::Index>(p)) = color + tau * background.transpose();
  }
  const int is = sigma.id(), ic = rgb.id();
  return t.push(std::move(out), {sigma, rgb},
                [is, ic, deltas, offsets, background, trans, final_trans](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& sv = tp.value_of(is);
    const Matrix& cv = tp.value_of(ic);
    const bool need_s = tp.needs_grad(is), need_c = tp.needs_grad(ic);
    Matrix* gs = need_s ? &tp.grad_storage(is) : nullptr;
    Matrix* gc = need_c ? &tp.grad_storage(ic) : nullptr;
    for (std::size_t p = 0; p + 1 < offsets.size(); ++p) {
      const int begin = offsets[p], end = offsets[p + 1];
      const Eigen::RowVector3d gp = g.row(static_cast<Eigen::Index>(p));
      // dC/dsigma_k = delta_k * (T_{k+1} c_k - sum_{i>k} w_i c_i - T_end * bg)
      double tail = final_trans[static_cast<Eigen::Index>(p)] * gp.dot(background.transpose());
      for (int k = end - 1; k >= begin; --k) {
        const double t_next = (k + 1 < end) ? trans[k + 1] : final_trans[static_cast<Eigen::Index>(p)];
        const double w = trans[k] - t_next;
        const double gdotc = gp.dot(cv.row(k));
        if (need_c) gc->row(k) += w * gp;
        if (need_s) (*gs)(k, 0) += deltas[k] * (t_next * gdotc - tail);
        tail += w * gdotc;
      }
    }
    (void)sv;
  });
}

Var mse(Tape& t, Var a, const Matrix& target) {
  require_same_shape(t.value(a), target, "mse");
  const double n = static_cast<double>(target.size());
  Matrix diff = t.value(a) - target;
  Matrix out(1, 1);
  out(0, 0) = n > 0 ? diff.squaredNorm() / n : 0.0;
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, diff, n](Tape& tp, int self) {
    if (n > 0) tp.grad_storage(ia) += (2.0 * tp.grad_of(self)(0, 0) / n) * diff;
  });
}

Var masked_l1(Tape& t, Var a, const Matrix& target, const Matrix& mask) {
  require_same_shape(t.value(a), target, "masked_l1");
  require_same_shape(target, mask, "masked_l1");
  const Matrix& av = t.value(a);
  Matrix sign = Matrix::Zero(av.rows(), av.cols());
  double total = 0.0, count = 0.0;
  for (Eigen::Index i = 0; i < av.size(); ++i) {
    if (mask.data()[i] != 0.0) {
      const double d = av.data()[i] - target.data()[i];
      total += std::abs(d);
      sign.data()[i] = (d > 0.0) - (d < 0.0);
      count += 1.0;
    }
  }
  Matrix out(1, 1);
  out(0, 0) = count > 0 ? total / count : 0.0;
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, sign, count](Tape& tp, int self) {
    if (count > 0) tp.grad_storage(ia) += (tp.grad_of(self)(0, 0) / count) * sign;
  });
}

Var sum(Tape& t, Var a) {
  Matrix out(1, 1);
  out(0, 0) = t.value(a).sum();
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    tp.grad_storage(ia).array() += tp.grad_of(self)(0, 0);
  });
}

}  // namespace nsurf::nn
