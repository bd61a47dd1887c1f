#pragma once

// Recurrent actor-critic: torso -> [features, one-hot previous action] ->
// LSTM -> policy logits and state value.

#include "fomo/nn/torso.hpp"

namespace fomo::learner {

using nn::Mat;

struct NetConfig {
  nn::FrameSpec frame;
  nn::TorsoConfig torso;
  int core_hidden = 128;
  int num_actions = 7;
};

template <typename S>
struct Memory {
  Mat<S> h, c;  // batch x core_hidden
};

// T x B inputs, flattened time-major (index t * B + b).
struct SeqInput {
  int steps = 0;
  int batch = 0;
  std::vector<const uint8_t*> frames;
  std::vector<int> prev_actions;  // -1: none (start of episode)
  std::vector<uint8_t> resets;    // memory is zeroed before this step
};

template <typename S>
class PolicyNet {
 public:
  struct Output {
    Mat<S> logits;  // (T*B) x A
    Mat<S> values;  // (T*B) x 1
  };

  struct Cache {
    SeqInput input;
    typename nn::Torso<S>::Cache torso;
    Mat<S> core_in;  // (T*B) x (torso + A)
    std::vector<typename nn::LstmCell<S>::Cache> lstm;
    std::vector<Mat<S>> keep;  // per step: B x 1, 0 where memory was reset
    Mat<S> h_all;              // (T*B) x H
  };

  explicit PolicyNet(const NetConfig& cfg) : cfg_(cfg) {
    torso_ = nn::Torso<S>(params_, cfg.frame, cfg.torso);
    lstm_ = nn::LstmCell<S>(params_, torso_.out() + cfg.num_actions, cfg.core_hidden);
    policy_ = nn::Linear<S>(params_, cfg.core_hidden, cfg.num_actions);
    value_ = nn::Linear<S>(params_, cfg.core_hidden, 1);
  }

  void init(uint64_t seed) {
    Rng rng(Rng::splitmix64(seed));
    torso_.init(params_, rng);
    lstm_.init(params_, rng);
    policy_.init(params_, rng);
    value_.init(params_, rng);
  }

  const NetConfig& config() const { return cfg_; }
  nn::ParamSet<S>& params() { return params_; }
  const nn::ParamSet<S>& params() const { return params_; }

  Memory<S> initial_memory(int batch) const {
    return {Mat<S>::Zero(batch, cfg_.core_hidden), Mat<S>::Zero(batch, cfg_.core_hidden)};
  }

  // Runs T steps from `memory`, which is updated to the state after the last
  // step. Fills `cache` for backward when given.
  Output forward(const SeqInput& in, Memory<S>& memory, Cache* cache = nullptr) const {
    const int T = in.steps, B = in.batch, A = cfg_.num_actions;
    Cache local;
    Cache& k = cache ? *cache : local;
    k.input = in;
    const Mat<S> feat = torso_.forward(params_, in.frames, &k.torso);
    k.core_in = Mat<S>::Zero(T * B, torso_.out() + A);
    k.core_in.leftCols(torso_.out()) = feat;
    for (int i = 0; i < T * B; ++i) {
      const int a = in.prev_actions[static_cast<size_t>(i)];
      if (a >= 0) k.core_in(i, torso_.out() + a) = S(1);
    }
    k.lstm.resize(static_cast<size_t>(T));
    k.keep.resize(static_cast<size_t>(T));
    k.h_all.resize(T * B, cfg_.core_hidden);
    for (int t = 0; t < T; ++t) {
      Mat<S> keep(B, 1);
      for (int b = 0; b < B; ++b) keep(b, 0) = in.resets[static_cast<size_t>(t * B + b)] ? S(0) : S(1);
      const Mat<S> h0 = memory.h.array().colwise() * keep.col(0).array();
      const Mat<S> c0 = memory.c.array().colwise() * keep.col(0).array();
      auto [h, c] = lstm_.forward(params_, k.core_in.middleRows(t * B, B), h0, c0, &k.lstm[static_cast<size_t>(t)]);
      k.h_all.middleRows(t * B, B) = h;
      k.keep[static_cast<size_t>(t)] = std::move(keep);
      memory.h = std::move(h);
      memory.c = std::move(c);
    }
    return {policy_.forward(params_, k.h_all), value_.forward(params_, k.h_all)};
  }

  // Accumulates parameter gradients given dL/dlogits and dL/dvalues. The
  // initial memory is treated as a constant.
  void backward(const Cache& k, const Mat<S>& dlogits, const Mat<S>& dvalues) {
    const int T = k.input.steps, B = k.input.batch;
    Mat<S> dh_all = policy_.backward(params_, k.h_all, dlogits);
    dh_all += value_.backward(params_, k.h_all, dvalues);
    Mat<S> dcore(T * B, k.core_in.cols());
    Mat<S> dh = Mat<S>::Zero(B, cfg_.core_hidden), dc = Mat<S>::Zero(B, cfg_.core_hidden);
    for (int t = T - 1; t >= 0; --t) {
      const Mat<S> dh_t = dh + dh_all.middleRows(t * B, B);
      auto g = lstm_.backward(params_, k.lstm[static_cast<size_t>(t)], dh_t, dc);
      dcore.middleRows(t * B, B) = g.dx;
      const auto& keep = k.keep[static_cast<size_t>(t)];
      dh = g.dh_prev.array().colwise() * keep.col(0).array();
      dc = g.dc_prev.array().colwise() * keep.col(0).array();
    }
    torso_.backward(params_, k.torso, dcore.leftCols(torso_.out()));
  }

 private:
  NetConfig cfg_;
  nn::ParamSet<S> params_;
  nn::Torso<S> torso_;
  nn::LstmCell<S> lstm_;
  nn::Linear<S> policy_, value_;
};

}  // namespace fomo::learner
