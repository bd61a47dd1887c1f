#pragma once

// RIDE baseline dynamics model: a learned state encoder trained by a forward
// model (predict the next embedding) and an inverse model (predict the action
// between two embeddings).

#include "fomo/nn/torso.hpp"

namespace fomo::novelty {

using nn::Mat;

struct RideConfig {
  nn::FrameSpec frame;
  nn::TorsoConfig torso;
  int embedding_dim = 128;
  int forward_hidden = 256;
  int inverse_hidden = 256;
  int num_actions = 7;
  double forward_coef = 1.0;
  // Let the forward loss pull on the target embedding too. Off by default:
  // with it on, the encoder collapses to a constant within a few hundred
  // updates and the inverse model never leaves chance.
  bool forward_target_grad = false;
  double inverse_coef = 1.0;
  // The policy's 1e-4 / 0.01 leaves the inverse model at chance for over a
  // thousand updates on DoorKey-5x5.
  double learning_rate = 1e-3;
  double rmsprop_alpha = 0.99;
  double rmsprop_eps = 1e-5;
  double grad_clip = 40.0;
};

struct RideLosses {
  double forward = 0;
  double inverse = 0;
  double inverse_accuracy = 0;  // argmax of the inverse model vs the action
};

template <typename S>
class RideModel {
 public:
  explicit RideModel(const RideConfig& cfg) : cfg_(cfg) {
    torso_ = nn::Torso<S>(params_, cfg.frame, cfg.torso);
    enc_out_ = nn::Linear<S>(params_, torso_.out(), cfg.embedding_dim);
    fwd1_ = nn::Linear<S>(params_, cfg.embedding_dim + cfg.num_actions, cfg.forward_hidden);
    fwd2_ = nn::Linear<S>(params_, cfg.forward_hidden, cfg.embedding_dim);
    inv1_ = nn::Linear<S>(params_, 2 * cfg.embedding_dim, cfg.inverse_hidden);
    inv2_ = nn::Linear<S>(params_, cfg.inverse_hidden, cfg.num_actions);
  }

  void init(uint64_t seed) {
    Rng rng(Rng::splitmix64(seed ^ 0x9d1e));
    torso_.init(params_, rng);
    enc_out_.init(params_, rng);
    fwd1_.init(params_, rng);
    fwd2_.init(params_, rng);
    inv1_.init(params_, rng);
    inv2_.init(params_, rng);
  }

  const RideConfig& config() const { return cfg_; }
  nn::ParamSet<S>& params() { return params_; }
  const nn::ParamSet<S>& params() const { return params_; }

  Mat<S> encode(const std::vector<const uint8_t*>& frames) const {
    return enc_out_.forward(params_, torso_.forward(params_, frames, nullptr));
  }

  // Mean losses over the batch; accumulates d(fc * forward + ic * inverse)
  // into the parameter gradients when `grads` is set.
  RideLosses losses(const std::vector<const uint8_t*>& frames_t, const std::vector<int>& actions,
                    const std::vector<const uint8_t*>& frames_t1, bool grads) {
    const int n = static_cast<int>(actions.size());
    const int e = cfg_.embedding_dim, A = cfg_.num_actions;
    // Encode both sides in one pass.
    std::vector<const uint8_t*> all(frames_t);
    all.insert(all.end(), frames_t1.begin(), frames_t1.end());
    typename nn::Torso<S>::Cache tc;
    const Mat<S> feat = torso_.forward(params_, all, &tc);
    const Mat<S> emb = enc_out_.forward(params_, feat);
    const Mat<S> phi_t = emb.topRows(n), phi_t1 = emb.bottomRows(n);

    Mat<S> fin = Mat<S>::Zero(n, e + A);
    fin.leftCols(e) = phi_t;
    for (int i = 0; i < n; ++i) fin(i, e + actions[static_cast<size_t>(i)]) = S(1);
    const Mat<S> fh = nn::relu(fwd1_.forward(params_, fin));
    const Mat<S> pred = fwd2_.forward(params_, fh);
    const Mat<S> diff = pred - phi_t1;

    Mat<S> iin(n, 2 * e);
    iin.leftCols(e) = phi_t;
    iin.rightCols(e) = phi_t1;
    const Mat<S> ih = nn::relu(inv1_.forward(params_, iin));
    const Mat<S> logits = inv2_.forward(params_, ih);
    const Mat<S> lp = nn::log_softmax(logits);

    RideLosses out;
    for (int i = 0; i < n; ++i) {
      const int a = actions[static_cast<size_t>(i)];
      out.forward += static_cast<double>(diff.row(i).squaredNorm());
      out.inverse -= static_cast<double>(lp(i, a));
      int best = 0;
      lp.row(i).maxCoeff(&best);
      out.inverse_accuracy += best == a;
    }
    out.forward /= n;
    out.inverse /= n;
    out.inverse_accuracy /= n;
    if (!grads) return out;

    const S inv_n = S(1) / static_cast<S>(n);
    const Mat<S> dpred = diff * (S(2) * static_cast<S>(cfg_.forward_coef) * inv_n);
    Mat<S> dlogits = lp.array().exp();
    for (int i = 0; i < n; ++i) dlogits(i, actions[static_cast<size_t>(i)]) -= S(1);
    dlogits *= static_cast<S>(cfg_.inverse_coef) * inv_n;

    Mat<S> demb = Mat<S>::Zero(2 * n, e);
    const Mat<S> dfh = nn::relu_backward(fh, fwd2_.backward(params_, fh, dpred));
    demb.topRows(n) += fwd1_.backward(params_, fin, dfh).leftCols(e);
    if (cfg_.forward_target_grad) demb.bottomRows(n) -= dpred;
    const Mat<S> dih = nn::relu_backward(ih, inv2_.backward(params_, ih, dlogits));
    const Mat<S> diin = inv1_.backward(params_, iin, dih);
    demb.topRows(n) += diin.leftCols(e);
    demb.bottomRows(n) += diin.rightCols(e);
    torso_.backward(params_, tc, enc_out_.backward(params_, feat, demb));
    return out;
  }

 private:
  RideConfig cfg_;
  nn::ParamSet<S> params_;
  nn::Torso<S> torso_;
  nn::Linear<S> enc_out_, fwd1_, fwd2_, inv1_, inv2_;
};

}  // namespace fomo::novelty
