#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fomo/learner/policy_net.hpp"

namespace fomo::learner {

// Raised on non-finite ratios, losses or parameters. The run must stop.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossWeights {
  double c_base = 0.5;
  double c_ent = 0.0005;
};

struct LearnerConfig {
  double gamma = 0.99;
  int unroll_length = 100;
  int batch_size = 8;
  double learning_rate = 5e-4;
  double rmsprop_alpha = 0.99;
  double rmsprop_eps = 1e-5;
  LossWeights weights;
  double rho_clip = 1.0;
  double c_clip = 1.0;
  double grad_clip = 40.0;
  double alpha = 0.0;  // intrinsic reward coefficient
  uint64_t seed = 0;
  std::string dump_dir;  // where a batch with non-finite loss is written
};

// One actor unroll of length U. Frames, previous actions and reset flags have
// U + 1 entries: the last one only feeds the bootstrap value, and is the
// first entry of the actor's next unroll.
struct Trajectory {
  int unroll = 0;
  nn::FrameSpec frame;
  std::vector<uint8_t> frames;
  std::vector<int> prev_actions;
  std::vector<uint8_t> resets;
  std::vector<int> actions;
  std::vector<float> behavior_logits;  // U x num_actions
  std::vector<float> rewards_ext;
  std::vector<float> rewards_int;
  std::vector<uint8_t> dones;          // episode ended after this action
  std::vector<float> init_h, init_c;   // core memory before frame 0
  // Frames for the RIDE encoder (intrinsic scope), only when it is in use.
  nn::FrameSpec ride_frame;
  std::vector<uint8_t> ride_frames;
  uint64_t param_version = 0;
  int actor = 0;
  uint64_t sequence = 0;
  // Episodes that finished inside this unroll.
  std::vector<double> episode_returns;
  std::vector<double> episode_intrinsic;

  const uint8_t* frame_at(int t) const { return &frames[static_cast<size_t>(t) * frame.bytes()]; }
  const uint8_t* ride_frame_at(int t) const {
    return &ride_frames[static_cast<size_t>(t) * ride_frame.bytes()];
  }
  // Throws std::invalid_argument when the parallel arrays disagree.
  void validate(int num_actions) const;
};

double combine_rewards(double r_ext, double r_int, double alpha);

struct VTraceOutput {
  std::vector<double> vs;             // value targets
  std::vector<double> pg_advantages;  // clipped rho * (r + gamma v_{s+1} - V)
  std::vector<double> clipped_rhos;
};

// Single unroll. discounts[t] = gamma * (1 - done_t). Throws NumericalError
// on a non-finite importance ratio.
VTraceOutput vtrace(const std::vector<double>& log_rhos, const std::vector<double>& discounts,
                    const std::vector<double>& rewards, const std::vector<double>& values,
                    double bootstrap_value, double rho_clip, double c_clip);

// Log-probability of `action` under softmax(logits) for each row.
std::vector<double> action_log_probs(const Mat<double>& logits, const std::vector<int>& actions);

// V-trace for a trajectory given the learner's logits (U x A) and values
// (U + 1 entries, the last is the bootstrap).
VTraceOutput vtrace_targets(const Trajectory& traj, const Mat<double>& target_logits,
                            const std::vector<double>& values, double gamma, double alpha,
                            double rho_clip, double c_clip);

struct Losses {
  double pg = 0, base = 0, ent = 0, total = 0;
  double entropy = 0;  // mean policy entropy
};

inline double total_loss(double pg, double base, double ent, const LossWeights& w) {
  return pg + w.c_base * base + w.c_ent * ent;
}

// Means over all rows. With grads requested, fills dL_tot/dlogits and
// dL_tot/dvalues (targets and advantages are constants).
Losses compute_losses(const Mat<double>& logits, const std::vector<double>& values,
                      const std::vector<int>& actions, const std::vector<double>& vs,
                      const std::vector<double>& pg_advantages, const LossWeights& w,
                      Mat<double>* dlogits = nullptr, Mat<double>* dvalues = nullptr);

struct StepMetrics {
  Losses losses;
  double grad_norm = 0;
  double mean_reward_ext = 0;
  double mean_reward_int = 0;
  uint64_t frames = 0;
  uint64_t version = 0;
};

// Builds the T x B network input for a batch (T = U + 1 frames).
SeqInput batch_input(const std::vector<const Trajectory*>& batch);

// V-trace targets, trajectory-major (index b * U + t).
struct Targets {
  std::vector<double> vs, pg_advantages;
  bool empty() const { return vs.empty(); }
};

struct BatchLoss {
  Losses losses;
  double mean_reward_ext = 0;
  double mean_reward_int = 0;
};

// Replays the batch through `net` from the stored initial memories and
// evaluates L_tot. When `targets` is empty they are computed from this pass
// and stored; otherwise the given targets are used (the targets are constants
// of the objective either way). With `grads`, dL_tot/dparams is accumulated.
template <typename S>
BatchLoss policy_loss(PolicyNet<S>& net, const std::vector<const Trajectory*>& batch, const LearnerConfig& cfg,
                      bool grads, Targets& targets);

class Learner {
 public:
  Learner(const NetConfig& net, const LearnerConfig& cfg);

  // One RMSProp step on L_tot over the batch. Throws NumericalError when a
  // loss or the updated parameters are not finite.
  StepMetrics step(const std::vector<const Trajectory*>& batch);

  PolicyNet<float>& net() { return net_; }
  const PolicyNet<float>& net() const { return net_; }
  nn::RmsProp<float>& optimizer() { return opt_; }
  const LearnerConfig& config() const { return cfg_; }
  uint64_t version() const { return version_; }
  void set_version(uint64_t v) { version_ = v; }

 private:
  void dump_batch(const std::vector<const Trajectory*>& batch, const std::string& why) const;

  NetConfig net_cfg_;
  LearnerConfig cfg_;
  PolicyNet<float> net_;
  nn::RmsProp<float> opt_;
  uint64_t version_ = 0;
};

template <typename S>
BatchLoss policy_loss(PolicyNet<S>& net, const std::vector<const Trajectory*>& batch, const LearnerConfig& cfg,
                      bool grads, Targets& targets) {
  if (batch.empty()) throw std::invalid_argument("learner: empty batch");
  const NetConfig& nc = net.config();
  const int u = batch.front()->unroll;
  const int B = static_cast<int>(batch.size());
  const int A = nc.num_actions;
  for (const Trajectory* t : batch) {
    t->validate(A);
    if (t->unroll != u || !(t->frame == nc.frame)) {
      throw std::invalid_argument("learner: batch trajectories disagree in shape");
    }
    if (t->init_h.size() != static_cast<size_t>(nc.core_hidden)) {
      throw std::invalid_argument("learner: initial memory width mismatch");
    }
  }
  const SeqInput in = batch_input(batch);
  Memory<S> mem{Mat<S>(B, nc.core_hidden), Mat<S>(B, nc.core_hidden)};
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < nc.core_hidden; ++j) {
      mem.h(b, j) = static_cast<S>(batch[static_cast<size_t>(b)]->init_h[static_cast<size_t>(j)]);
      mem.c(b, j) = static_cast<S>(batch[static_cast<size_t>(b)]->init_c[static_cast<size_t>(j)]);
    }
  typename PolicyNet<S>::Cache cache;
  const auto out = net.forward(in, mem, grads ? &cache : nullptr);

  const int n = u * B;
  const bool have_targets = !targets.empty();
  Mat<double> logits(n, A);
  std::vector<double> values(static_cast<size_t>(n));
  std::vector<int> actions(static_cast<size_t>(n));
  BatchLoss r;
  if (!have_targets) {
    targets.vs.resize(static_cast<size_t>(n));
    targets.pg_advantages.resize(static_cast<size_t>(n));
  }
  for (int b = 0; b < B; ++b) {
    const Trajectory& tr = *batch[static_cast<size_t>(b)];
    Mat<double> tl(u, A);
    std::vector<double> tv(static_cast<size_t>(u + 1));
    for (int t = 0; t <= u; ++t) {
      tv[static_cast<size_t>(t)] = static_cast<double>(out.values(t * B + b, 0));
      if (t < u) tl.row(t) = out.logits.row(t * B + b).template cast<double>();
    }
    if (!have_targets) {
      const VTraceOutput vt = vtrace_targets(tr, tl, tv, cfg.gamma, cfg.alpha, cfg.rho_clip, cfg.c_clip);
      std::copy(vt.vs.begin(), vt.vs.end(), targets.vs.begin() + b * u);
      std::copy(vt.pg_advantages.begin(), vt.pg_advantages.end(), targets.pg_advantages.begin() + b * u);
    }
    for (int t = 0; t < u; ++t) {
      const size_t i = static_cast<size_t>(b * u + t);
      logits.row(static_cast<int>(i)) = tl.row(t);
      values[i] = tv[static_cast<size_t>(t)];
      actions[i] = tr.actions[static_cast<size_t>(t)];
      r.mean_reward_ext += tr.rewards_ext[static_cast<size_t>(t)];
      r.mean_reward_int += tr.rewards_int[static_cast<size_t>(t)];
    }
  }
  r.mean_reward_ext /= n;
  r.mean_reward_int /= n;
  Mat<double> dl, dv;
  r.losses = compute_losses(logits, values, actions, targets.vs, targets.pg_advantages, cfg.weights,
                            grads ? &dl : nullptr, grads ? &dv : nullptr);
  if (!grads) return r;
  Mat<S> dlogits = Mat<S>::Zero((u + 1) * B, A);
  Mat<S> dvalues = Mat<S>::Zero((u + 1) * B, 1);
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < u; ++t) {
      dlogits.row(t * B + b) = dl.row(b * u + t).template cast<S>();
      dvalues(t * B + b, 0) = static_cast<S>(dv(b * u + t, 0));
    }
  net.backward(cache, dlogits, dvalues);
  return r;
}

}  // namespace fomo::learner
