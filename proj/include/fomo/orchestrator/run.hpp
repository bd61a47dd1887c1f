#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "fomo/orchestrator/config.hpp"

namespace fomo::orchestrator {

// Test and tooling knobs that are not part of a run's identity.
struct RunHooks {
  // Resume from <out>/checkpoint.cbor when it exists.
  bool resume = false;
  // Stop (as if killed) right after the first checkpoint at or past this
  // many frames. 0: never.
  uint64_t halt_after_checkpoint = 0;
  // Throw from actor `crash_actor` when it starts unroll `crash_at_unroll`.
  int crash_actor = -1;
  uint64_t crash_at_unroll = 0;
  // Run the actors' intrinsic-reward code even for strategy none.
  bool force_intrinsic_path = false;
  // Called after every learner step with the frame count.
  std::function<void(uint64_t)> on_step;
};

struct RunSummary {
  uint64_t frames = 0;
  uint64_t learner_steps = 0;
  uint64_t trajectories_consumed = 0;
  uint64_t trajectories_produced = 0;
  uint64_t trajectories_discarded = 0;  // left in the queue at shutdown
  uint64_t sequence_errors = 0;         // duplicate or missing per-actor sequence numbers
  uint64_t actor_respawns = 0;
  uint64_t episodes = 0;
  bool halted = false;           // stopped by halt_after_checkpoint
  bool reached_target = false;
  std::optional<double> best_eval_return;
  std::optional<uint64_t> target_frames;  // frames at the first eval >= target
  std::filesystem::path metrics_path;
  std::filesystem::path checkpoint_path;
};

// Trains until the frame budget (or the target return) is reached. Writes
// <out>/config.json, <out>/metrics.jsonl (one JSON record per learner
// window), <out>/checkpoint.cbor and <out>/summary.json. Throws on invalid
// config, unreachable embedder or numerical failure.
RunSummary run(const RunConfig& config, const RunHooks& hooks = {});

// ---------------------------------------------------------------------------
// Evaluation

struct EvalStats {
  int episodes = 0;
  double mean_return = 0;
  double stderr_return = 0;
  double success_rate = 0;
  std::vector<double> returns;
};

EvalStats summarize_returns(std::vector<double> returns);

// Acts for a batch of environments in lock-step.
class EpisodePolicy {
 public:
  virtual ~EpisodePolicy() = default;
  virtual void reset(int batch) = 0;
  // One action per environment; `active[i]` is false for finished ones.
  virtual std::vector<grid::Action> act(const std::vector<grid::Observation>& obs,
                                        const std::vector<bool>& active) = 0;
  virtual grid::ObsConfig obs_config() const { return {}; }
};

// Plays `episodes` episodes of `task` and reports the extrinsic return.
// Episode i uses the i-th draw of Rng(seed) as its task seed. Throws
// std::invalid_argument for episodes < 1.
EvalStats evaluate_policy(EpisodePolicy& policy, const grid::TaskSpec& task, int episodes, uint64_t seed);

// Loads a checkpoint and evaluates its policy with intrinsic reward off.
// `task` defaults to the checkpoint's own task; a task whose observation
// shape does not match the network is rejected.
EvalStats evaluate(const std::filesystem::path& checkpoint, int episodes, const std::string& task = "",
                   uint64_t seed = 12345, bool greedy = false);

// ---------------------------------------------------------------------------
// Plots

struct ConvergenceRow {
  std::string task;
  std::string label;  // run group (task + strategy)
  int seeds = 0;
  double last_return = 0;   // mean over seeds of the last raw value
  double final_return = 0;  // mean over seeds of the final smoothed value
  std::optional<double> convergence_frames;  // mean over seeds that converged
};

struct PlotOptions {
  std::string metric = "episode_return";  // or eval_return
  int smooth = 5;                         // centered moving-average width (windows)
  double threshold = 0.95;
};

// One curve: (frames, value) per metrics window.
struct Curve {
  std::vector<double> frames, values;
};

// Reads one metrics file; malformed lines are skipped with a warning on
// stderr.
Curve read_curve(const std::filesystem::path& metrics, const std::string& metric, int* skipped = nullptr);
std::vector<double> smooth_curve(const std::vector<double>& values, int width);
// First frame whose smoothed value reaches threshold * final smoothed value;
// none when the final smoothed value is not positive.
std::optional<double> convergence_frame(const Curve& curve, int smooth, double threshold);

// Groups run directories by (task, intrinsic, alpha, scope), writes one SVG
// per group (mean with a min-max band across seeds) and convergence.md into
// `out_dir`. Returns the table rows.
std::vector<ConvergenceRow> emit_plots(const std::vector<std::filesystem::path>& run_dirs,
                                       const std::filesystem::path& out_dir, const PlotOptions& options = {});

}  // namespace fomo::orchestrator
