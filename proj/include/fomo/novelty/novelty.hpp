#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>

#include "fomo/embed/embedder.hpp"
#include "fomo/learner/frames.hpp"
#include "fomo/novelty/ride.hpp"

namespace fomo::novelty {

enum class Strategy { kFomorl, kRide, kNone };

Strategy parse_strategy(const std::string& s);
std::string strategy_name(Strategy s);
grid::Scope parse_scope(const std::string& s);
std::string scope_name(grid::Scope s);

// Per-episode visit counts keyed by state fingerprint.
class EpisodicCounter {
 public:
  // Increments and returns the post-increment count (1 on the first visit).
  uint32_t record_and_count(uint64_t fingerprint) { return ++counts_[fingerprint]; }
  uint32_t count(uint64_t fingerprint) const {
    auto it = counts_.find(fingerprint);
    return it == counts_.end() ? 0 : it->second;
  }
  void reset_episode() { counts_.clear(); }
  size_t size() const { return counts_.size(); }

  // Sorted by fingerprint, for checkpoints.
  std::vector<std::pair<uint64_t, uint32_t>> entries() const {
    std::vector<std::pair<uint64_t, uint32_t>> out(counts_.begin(), counts_.end());
    std::sort(out.begin(), out.end());
    return out;
  }
  void restore(const std::vector<std::pair<uint64_t, uint32_t>>& entries) {
    counts_ = {entries.begin(), entries.end()};
  }

 private:
  std::unordered_map<uint64_t, uint32_t> counts_;
};

// ||emb_t1 - emb_t||_2 / sqrt(count_t1). Throws std::invalid_argument on a
// dimension mismatch or count 0.
double fomorl_reward(std::span<const float> emb_t, std::span<const float> emb_t1, uint64_t count_t1);
double fomorl_reward(const embed::EmbeddingVector& emb_t, const embed::EmbeddingVector& emb_t1,
                     uint64_t count_t1);

// Maps observations to representation vectors.
class StateEncoder {
 public:
  virtual ~StateEncoder() = default;
  virtual embed::EmbeddingVector encode(const grid::Observation& obs, grid::Scope scope) const = 0;
};

// Frozen embedder behind the StateEncoder interface.
class EmbedderEncoder : public StateEncoder {
 public:
  explicit EmbedderEncoder(std::shared_ptr<embed::EmbedderBackend> backend) : backend_(std::move(backend)) {}
  embed::EmbeddingVector encode(const grid::Observation& obs, grid::Scope scope) const override {
    return backend_->embed(obs, scope);
  }

 private:
  std::shared_ptr<embed::EmbedderBackend> backend_;
};

// Learned RIDE encoder (read-only snapshot, as used by actors).
class RideEncoder : public StateEncoder {
 public:
  explicit RideEncoder(std::shared_ptr<const RideModel<float>> model) : model_(std::move(model)) {}
  embed::EmbeddingVector encode(const grid::Observation& obs, grid::Scope scope) const override;

 private:
  std::shared_ptr<const RideModel<float>> model_;
};

// ||enc(o_t1) - enc(o_t)|| / sqrt(count_t1) with a learned (or any) encoder.
double ride_reward(const StateEncoder& encoder, const grid::Observation& obs_t,
                   const grid::Observation& obs_t1, grid::Scope scope, uint64_t count_t1);

// Learner-side RIDE model with its optimizer.
class RideDynamicsModel {
 public:
  explicit RideDynamicsModel(const RideConfig& cfg, uint64_t seed);

  // One RMSProp step on the forward + inverse loss. Throws
  // learner::NumericalError on a non-finite loss or parameters.
  RideLosses update(const std::vector<const uint8_t*>& frames_t, const std::vector<int>& actions,
                    const std::vector<const uint8_t*>& frames_t1);
  RideLosses evaluate(const std::vector<const uint8_t*>& frames_t, const std::vector<int>& actions,
                      const std::vector<const uint8_t*>& frames_t1);

  RideModel<float>& model() { return model_; }
  const RideModel<float>& model() const { return model_; }
  nn::RmsProp<float>& optimizer() { return opt_; }
  std::shared_ptr<const RideModel<float>> snapshot() const {
    return std::make_shared<const RideModel<float>>(model_);
  }

 private:
  RideModel<float> model_;
  nn::RmsProp<float> opt_;
};

struct IntrinsicConfig {
  Strategy strategy = Strategy::kFomorl;
  double alpha = 0.02;
  grid::Scope scope = grid::Scope::kPartial;
  bool normalize_embeddings = false;
  std::shared_ptr<embed::EmbedderBackend> embedder;  // fomorl only

  // Throws std::invalid_argument on alpha < 0 or a missing embedder.
  void validate() const;
};

// The reward for one transition s_t -> s_t1: records s_t1 in `counter` and
// dispatches on the strategy. `ride` is required for Strategy::kRide.
double intrinsic_for_transition(const IntrinsicConfig& config, EpisodicCounter& counter,
                                const StateEncoder* ride, const grid::GridState& state_t1,
                                const grid::Observation& obs_t, const grid::Observation& obs_t1);

// Per-actor helper around intrinsic_for_transition that also owns the
// episodic counter.
class IntrinsicRewarder {
 public:
  explicit IntrinsicRewarder(IntrinsicConfig config) : config_(std::move(config)) { config_.validate(); }

  // Clears the counter and records the initial state as visited once.
  void begin_episode(const grid::GridState& s0);
  double reward(const grid::GridState& state_t1, const grid::Observation& obs_t,
                const grid::Observation& obs_t1);
  void set_ride_model(std::shared_ptr<const RideModel<float>> model);

  const IntrinsicConfig& config() const { return config_; }
  const EpisodicCounter& counter() const { return counter_; }
  EpisodicCounter& counter() { return counter_; }

 private:
  IntrinsicConfig config_;
  EpisodicCounter counter_;
  std::unique_ptr<RideEncoder> ride_;
};

}  // namespace fomo::novelty
