#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "fomo/learner/learner.hpp"
#include "fomo/novelty/novelty.hpp"

namespace CLI {
class App;
}

namespace fomo::orchestrator {

struct RunConfig {
  std::string task = "DoorKey-5x5";
  uint64_t frames = 1'000'000;
  int actors = 4;

  // Intrinsic reward.
  std::string intrinsic = "fomorl";
  double alpha = 0.02;
  std::string intrinsic_scope = "partial";
  std::string embedder = "surrogate";
  bool normalize_embeddings = true;

  learner::LearnerConfig learner;

  // Network.
  std::string torso = "compact";
  int torso_hidden = 128;
  int core_hidden = 128;
  int view_size = 7;
  int tile_size = 8;

  // RIDE dynamics model (strategy ride only).
  double ride_learning_rate = 1e-3;
  int ride_embedding_dim = 128;

  uint64_t seed = 0;

  // Evaluation every `eval_every` frames (0: never); stop early once the mean
  // evaluation return reaches `target_return` (0: run the whole budget).
  uint64_t eval_every = 100'000;
  int eval_episodes = 32;
  bool eval_greedy = false;
  double target_return = 0.0;

  uint64_t checkpoint_every = 0;  // frames; 0 writes only the final checkpoint
  int log_every = 1;              // learner steps per metrics record
  int queue_capacity = 0;         // trajectories; 0 picks 2 * batch_size
  bool deterministic = false;
  std::string out = "runs/default";

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  novelty::IntrinsicConfig intrinsic_config() const;
  learner::NetConfig net_config() const;
  novelty::RideConfig ride_config() const;
  grid::ObsConfig obs_config() const;
  grid::TaskSpec task_spec() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);

// Registers every RunConfig field as a flag on `app`, plus `--config <file>`
// (TOML/INI). Values from the file are applied first; flags override them.
void add_run_options(CLI::App& app, RunConfig& config);

}  // namespace fomo::orchestrator
