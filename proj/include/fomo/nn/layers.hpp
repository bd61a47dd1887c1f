#pragma once

// Minimal dense/conv/recurrent layers with hand-written backward passes.
// Parameters of a whole model live in one flat ParamSet so they can be copied,
// clipped, optimized and serialized as a single vector. Activations are
// row-per-sample Eigen matrices.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fomo/common/rng.hpp"

namespace fomo::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Vec = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <typename S>
using MatMap = Eigen::Map<Mat<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const Mat<S>>;
template <typename S>
using VecMap = Eigen::Map<Vec<S>>;
template <typename S>
using ConstVecMap = Eigen::Map<const Vec<S>>;

template <typename S>
struct ParamSet {
  // Aligned so that vectorized reductions split the same way on every run.
  std::vector<S, Eigen::aligned_allocator<S>> values;
  std::vector<S, Eigen::aligned_allocator<S>> grads;

  size_t allocate(size_t n) {
    const size_t off = values.size();
    values.resize(off + n, S(0));
    grads.resize(off + n, S(0));
    return off;
  }
  size_t size() const { return values.size(); }
  void zero_grad() { std::fill(grads.begin(), grads.end(), S(0)); }

  MatMap<S> mat(size_t off, int rows, int cols) { return {values.data() + off, rows, cols}; }
  ConstMatMap<S> mat(size_t off, int rows, int cols) const { return {values.data() + off, rows, cols}; }
  MatMap<S> grad_mat(size_t off, int rows, int cols) { return {grads.data() + off, rows, cols}; }
  VecMap<S> vec(size_t off, int n) { return {values.data() + off, n}; }
  ConstVecMap<S> vec(size_t off, int n) const { return {values.data() + off, n}; }
  VecMap<S> grad_vec(size_t off, int n) { return {grads.data() + off, n}; }

  bool all_finite() const {
    for (S v : values)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), the classic default init.
template <typename S>
void init_uniform(ParamSet<S>& p, size_t off, size_t n, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (size_t i = 0; i < n; ++i) p.values[off + i] = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
}

template <typename S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

// dX = dY masked where the forward output was zero.
template <typename S>
Mat<S> relu_backward(const Mat<S>& out, const Mat<S>& dy) {
  return (out.array() > S(0)).select(dy, S(0));
}

// ---------------------------------------------------------------------------

template <typename S>
class Linear {
 public:
  Linear() = default;
  Linear(ParamSet<S>& p, int in, int out) : in_(in), out_(out) {
    w_ = p.allocate(static_cast<size_t>(in * out));
    b_ = p.allocate(static_cast<size_t>(out));
  }
  void init(ParamSet<S>& p, Rng& rng) const {
    init_uniform(p, w_, static_cast<size_t>(in_ * out_), in_, rng);
    init_uniform(p, b_, static_cast<size_t>(out_), in_, rng);
  }
  int in() const { return in_; }
  int out() const { return out_; }

  Mat<S> forward(const ParamSet<S>& p, const Mat<S>& x) const {
    Mat<S> y(x.rows(), out_);
    y.noalias() = x * p.mat(w_, out_, in_).transpose();
    y.rowwise() += p.vec(b_, out_);
    return y;
  }

  // Accumulates parameter gradients; returns dL/dx.
  Mat<S> backward(ParamSet<S>& p, const Mat<S>& x, const Mat<S>& dy, bool need_dx = true) const {
    p.grad_mat(w_, out_, in_).noalias() += dy.transpose() * x;
    p.grad_vec(b_, out_) += dy.colwise().sum();
    if (!need_dx) return {};
    Mat<S> dx(x.rows(), in_);
    dx.noalias() = dy * p.mat(w_, out_, in_);
    return dx;
  }

 private:
  int in_ = 0, out_ = 0;
  size_t w_ = 0, b_ = 0;
};

// Linear map applied to a multi-hot input given as active row indices: each
// sample sums `active` rows of the table plus a bias.
template <typename S>
class SparseLinear {
 public:
  SparseLinear() = default;
  SparseLinear(ParamSet<S>& p, int rows, int out, int active_per_sample)
      : rows_(rows), out_(out), active_(active_per_sample) {
    w_ = p.allocate(static_cast<size_t>(rows * out));
    b_ = p.allocate(static_cast<size_t>(out));
  }
  void init(ParamSet<S>& p, Rng& rng) const {
    init_uniform(p, w_, static_cast<size_t>(rows_ * out_), active_, rng);
    init_uniform(p, b_, static_cast<size_t>(out_), active_, rng);
  }
  int out() const { return out_; }

  // idx: batch * active indices.
  Mat<S> forward(const ParamSet<S>& p, const std::vector<int>& idx, int batch) const {
    const auto w = p.mat(w_, rows_, out_);
    Mat<S> y(batch, out_);
    y.rowwise() = p.vec(b_, out_);
    for (int b = 0; b < batch; ++b)
      for (int k = 0; k < active_; ++k) y.row(b) += w.row(idx[static_cast<size_t>(b * active_ + k)]);
    return y;
  }

  void backward(ParamSet<S>& p, const std::vector<int>& idx, const Mat<S>& dy) const {
    auto gw = p.grad_mat(w_, rows_, out_);
    for (int b = 0; b < dy.rows(); ++b)
      for (int k = 0; k < active_; ++k) gw.row(idx[static_cast<size_t>(b * active_ + k)]) += dy.row(b);
    p.grad_vec(b_, out_) += dy.colwise().sum();
  }

 private:
  int rows_ = 0, out_ = 0, active_ = 0;
  size_t w_ = 0, b_ = 0;
};

// 2-D convolution over CHW-flattened rows, via im2col.
template <typename S>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamSet<S>& p, int in_c, int out_c, int in_h, int in_w, int k, int stride, int pad)
      : in_c_(in_c), out_c_(out_c), in_h_(in_h), in_w_(in_w), k_(k), stride_(stride), pad_(pad) {
    out_h_ = (in_h + 2 * pad - k) / stride + 1;
    out_w_ = (in_w + 2 * pad - k) / stride + 1;
    if (out_h_ <= 0 || out_w_ <= 0) throw std::invalid_argument("conv input too small");
    w_ = p.allocate(static_cast<size_t>(out_c * patch()));
    b_ = p.allocate(static_cast<size_t>(out_c));
  }
  void init(ParamSet<S>& p, Rng& rng) const {
    init_uniform(p, w_, static_cast<size_t>(out_c_ * patch()), patch(), rng);
    init_uniform(p, b_, static_cast<size_t>(out_c_), patch(), rng);
  }
  int patch() const { return in_c_ * k_ * k_; }
  int positions() const { return out_h_ * out_w_; }
  int out_size() const { return out_c_ * positions(); }
  int in_size() const { return in_c_ * in_h_ * in_w_; }
  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }
  int out_c() const { return out_c_; }

  // cols (optional) receives one im2col matrix per sample for backward.
  Mat<S> forward(const ParamSet<S>& p, const Mat<S>& x, std::vector<Mat<S>>* cols = nullptr) const {
    const int batch = static_cast<int>(x.rows());
    Mat<S> y(batch, out_size());
    const auto w = p.mat(w_, out_c_, patch());
    const auto b = p.vec(b_, out_c_);
    if (cols) cols->resize(static_cast<size_t>(batch));
    Mat<S> col, ys(out_c_, positions());
    for (int n = 0; n < batch; ++n) {
      im2col(x.row(n).data(), col);
      ys.noalias() = w * col.transpose();
      ys.colwise() += b.transpose();
      y.row(n) = Eigen::Map<const Vec<S>>(ys.data(), out_size());
      if (cols) (*cols)[static_cast<size_t>(n)] = col;
    }
    return y;
  }

  Mat<S> backward(ParamSet<S>& p, const std::vector<Mat<S>>& cols, const Mat<S>& dy, bool need_dx = true) const {
    const int batch = static_cast<int>(dy.rows());
    auto gw = p.grad_mat(w_, out_c_, patch());
    auto gb = p.grad_vec(b_, out_c_);
    const auto w = p.mat(w_, out_c_, patch());
    Mat<S> dx;
    if (need_dx) dx = Mat<S>::Zero(batch, in_size());
    Mat<S> dcol(positions(), patch());
    for (int n = 0; n < batch; ++n) {
      Eigen::Map<const Mat<S>> dys(dy.row(n).data(), out_c_, positions());
      gw.noalias() += dys * cols[static_cast<size_t>(n)];
      gb += dys.rowwise().sum().transpose();
      if (need_dx) {
        dcol.noalias() = dys.transpose() * w;
        col2im(dcol, dx.row(n).data());
      }
    }
    return dx;
  }

 private:
  void im2col(const S* x, Mat<S>& col) const {
    col.resize(positions(), patch());
    for (int oy = 0; oy < out_h_; ++oy)
      for (int ox = 0; ox < out_w_; ++ox) {
        S* row = col.row(oy * out_w_ + ox).data();
        int j = 0;
        for (int c = 0; c < in_c_; ++c)
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            for (int kx = 0; kx < k_; ++kx, ++j) {
              const int ix = ox * stride_ - pad_ + kx;
              row[j] = (iy < 0 || ix < 0 || iy >= in_h_ || ix >= in_w_)
                           ? S(0)
                           : x[(c * in_h_ + iy) * in_w_ + ix];
            }
          }
      }
  }

  void col2im(const Mat<S>& dcol, S* dx) const {
    for (int oy = 0; oy < out_h_; ++oy)
      for (int ox = 0; ox < out_w_; ++ox) {
        const S* row = dcol.row(oy * out_w_ + ox).data();
        int j = 0;
        for (int c = 0; c < in_c_; ++c)
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            for (int kx = 0; kx < k_; ++kx, ++j) {
              const int ix = ox * stride_ - pad_ + kx;
              if (iy < 0 || ix < 0 || iy >= in_h_ || ix >= in_w_) continue;
              dx[(c * in_h_ + iy) * in_w_ + ix] += row[j];
            }
          }
      }
  }

  int in_c_ = 0, out_c_ = 0, in_h_ = 0, in_w_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
  int out_h_ = 0, out_w_ = 0;
  size_t w_ = 0, b_ = 0;
};

// ---------------------------------------------------------------------------

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// LSTM cell; gate order i, f, g, o.
template <typename S>
class LstmCell {
 public:
  struct Cache {
    Mat<S> x, h_prev, c_prev;  // inputs (after any reset masking)
    Mat<S> i, f, g, o, c, tanh_c;
  };

  LstmCell() = default;
  LstmCell(ParamSet<S>& p, int in, int hidden) : in_(in), hidden_(hidden) {
    w_ih_ = p.allocate(static_cast<size_t>(4 * hidden * in));
    w_hh_ = p.allocate(static_cast<size_t>(4 * hidden * hidden));
    b_ = p.allocate(static_cast<size_t>(4 * hidden));
  }
  void init(ParamSet<S>& p, Rng& rng) const {
    init_uniform(p, w_ih_, static_cast<size_t>(4 * hidden_ * in_), hidden_, rng);
    init_uniform(p, w_hh_, static_cast<size_t>(4 * hidden_ * hidden_), hidden_, rng);
    init_uniform(p, b_, static_cast<size_t>(4 * hidden_), hidden_, rng);
  }
  int hidden() const { return hidden_; }

  // Returns (h, c); fills `cache` when given.
  std::pair<Mat<S>, Mat<S>> forward(const ParamSet<S>& p, const Mat<S>& x, const Mat<S>& h_prev,
                                    const Mat<S>& c_prev, Cache* cache = nullptr) const {
    const int n = static_cast<int>(x.rows());
    const int hd = hidden_;
    Mat<S> z(n, 4 * hd);
    z.noalias() = x * p.mat(w_ih_, 4 * hd, in_).transpose();
    z.noalias() += h_prev * p.mat(w_hh_, 4 * hd, hd).transpose();
    z.rowwise() += p.vec(b_, 4 * hd);
    Mat<S> i = z.leftCols(hd).unaryExpr([](S v) { return sigmoid(v); });
    Mat<S> f = z.middleCols(hd, hd).unaryExpr([](S v) { return sigmoid(v); });
    Mat<S> g = z.middleCols(2 * hd, hd).array().tanh();
    Mat<S> o = z.rightCols(hd).unaryExpr([](S v) { return sigmoid(v); });
    Mat<S> c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    Mat<S> tanh_c = c.array().tanh();
    Mat<S> h = o.cwiseProduct(tanh_c);
    if (cache) {
      cache->x = x;
      cache->h_prev = h_prev;
      cache->c_prev = c_prev;
      cache->i = std::move(i);
      cache->f = std::move(f);
      cache->g = std::move(g);
      cache->o = std::move(o);
      cache->c = c;
      cache->tanh_c = std::move(tanh_c);
    }
    return {std::move(h), std::move(c)};
  }

  struct Grads {
    Mat<S> dx, dh_prev, dc_prev;
  };

  Grads backward(ParamSet<S>& p, const Cache& k, const Mat<S>& dh, const Mat<S>& dc_next) const {
    const int hd = hidden_;
    const Mat<S> dc = dc_next + dh.cwiseProduct(k.o).cwiseProduct(
                                    (S(1) - k.tanh_c.array().square()).matrix());
    Mat<S> dz(dh.rows(), 4 * hd);
    dz.leftCols(hd) = dc.cwiseProduct(k.g).cwiseProduct(
        k.i.cwiseProduct((S(1) - k.i.array()).matrix()));
    dz.middleCols(hd, hd) = dc.cwiseProduct(k.c_prev).cwiseProduct(
        k.f.cwiseProduct((S(1) - k.f.array()).matrix()));
    dz.middleCols(2 * hd, hd) = dc.cwiseProduct(k.i).cwiseProduct(
        (S(1) - k.g.array().square()).matrix());
    dz.rightCols(hd) = dh.cwiseProduct(k.tanh_c).cwiseProduct(
        k.o.cwiseProduct((S(1) - k.o.array()).matrix()));
    p.grad_mat(w_ih_, 4 * hd, in_).noalias() += dz.transpose() * k.x;
    p.grad_mat(w_hh_, 4 * hd, hd).noalias() += dz.transpose() * k.h_prev;
    p.grad_vec(b_, 4 * hd) += dz.colwise().sum();
    Grads g;
    g.dx.noalias() = dz * p.mat(w_ih_, 4 * hd, in_);
    g.dh_prev.noalias() = dz * p.mat(w_hh_, 4 * hd, hd);
    g.dc_prev = dc.cwiseProduct(k.f);
    return g;
  }

 private:
  int in_ = 0, hidden_ = 0;
  size_t w_ih_ = 0, w_hh_ = 0, b_ = 0;
};

// ---------------------------------------------------------------------------

template <typename S>
Mat<S> log_softmax(const Mat<S>& logits) {
  Mat<S> out = logits;
  for (int r = 0; r < out.rows(); ++r) {
    const S m = out.row(r).maxCoeff();
    const S lse = m + std::log((out.row(r).array() - m).exp().sum());
    out.row(r).array() -= lse;
  }
  return out;
}

// RMSProp without momentum: v = a v + (1 - a) g^2; p -= lr g / (sqrt(v) + eps).
template <typename S>
class RmsProp {
 public:
  struct Options {
    double learning_rate = 1e-4;
    double alpha = 0.99;
    double epsilon = 0.01;
  };
  RmsProp() = default;
  RmsProp(size_t n, Options o) : opt_(o), square_avg_(n, S(0)) {}

  void step(ParamSet<S>& p) {
    const S a = static_cast<S>(opt_.alpha);
    const S lr = static_cast<S>(opt_.learning_rate);
    const S eps = static_cast<S>(opt_.epsilon);
    for (size_t i = 0; i < p.values.size(); ++i) {
      const S g = p.grads[i];
      S& v = square_avg_[i];
      v = a * v + (S(1) - a) * g * g;
      p.values[i] -= lr * g / (std::sqrt(v) + eps);
    }
  }
  const std::vector<S>& state() const { return square_avg_; }
  std::vector<S>& state() { return square_avg_; }
  Options& options() { return opt_; }

 private:
  Options opt_;
  std::vector<S> square_avg_;
};

// Scales gradients so their global L2 norm is at most max_norm; returns the
// norm before clipping.
template <typename S>
double clip_grad_norm(ParamSet<S>& p, double max_norm) {
  double sq = 0;
  for (S g : p.grads) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const S scale = static_cast<S>(max_norm / (norm + 1e-6));
    for (S& g : p.grads) g *= scale;
  }
  return norm;
}

}  // namespace fomo::nn
