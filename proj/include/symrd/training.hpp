#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "symrd/common.hpp"
#include "symrd/env.hpp"
#include "symrd/instance.hpp"
#include "symrd/policy.hpp"

namespace symrd {

enum class Method { RlOnly, Symrd, MaxEnt, MultiStart, NonsymDistill };
enum class TransformPolicy { Uniform, Identity };

const char* method_name(Method m);
Method method_from_name(const std::string& name);
const char* transform_name(TransformPolicy t);
TransformPolicy transform_from_name(const std::string& name);

struct TrainConfig {
    Task task = Task::TSP;
    int n = 20;
    Method method = Method::Symrd;
    int batch_size = 100;
    std::uint64_t k_max = 10000;
    double distill_scaler = 0.001;  // 0.01 by default for FFSP (reward scale)
    int transform_width = 1;        // L: symmetric trajectories per greedy rollout
    int distill_period = 1;         // x: RL steps between distillation steps
    TransformPolicy transform = TransformPolicy::Uniform;
    double lr = 0.1;
    std::vector<double> lr_milestones = {0.5, 0.75};  // fractions of k_max
    double lr_gamma = 0.1;
    double alpha = 0.01;       // entropy coefficient (maxent)
    double critic_coef = 0.5;  // weight of the critic MSE term
    int multistart_p = 4;      // rollouts per instance (multistart)
    std::uint64_t seed = 1;
    std::uint64_t val_seed = 9999;
    int val_count = 100;
    std::string val_dataset;   // optional path; overrides (val_seed, val_count)
    std::uint64_t grid = 0;    // validation grid in reward calls; 0 = max(k_max/50, batch)
    int policy_dim = 16;
    int l1_instances = 20;     // instances per in-training L1 gap estimate
    int l1_draws = 1;
    bool save_checkpoints = false;
    std::string distill_target = "greedy";  // or "best_sampled"
};

TrainConfig default_config(Task task);
void validate_config(const TrainConfig& config);
std::uint64_t effective_grid(const TrainConfig& config);

// Flat key=value config text, keys mirroring TrainConfig fields. Unknown keys
// are hard errors.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config(const std::string& path);
std::string config_to_text(const TrainConfig& config);

struct HistoryRecord {
    std::uint64_t k = 0;
    double val_cost = 0.0;
    double train_mean_reward = 0.0;
    double ssd_loss = 0.0;
    double l1_gap = 0.0;
    double wall_ms = 0.0;  // not part of the reproducibility contract
};

struct TrainHistory {
    std::vector<HistoryRecord> records;

    // Equality over the deterministic fields (wall_ms excluded).
    bool same_results(const TrainHistory& other) const;
};

struct StepStats {
    double mean_reward = 0.0;
    double loss = 0.0;
    std::uint64_t reward_calls = 0;
    // Best sampled trajectory per instance (by reward), for best_sampled
    // distillation targets.
    std::vector<Trajectory> best_samples;
};

struct SsdStats {
    double loss = 0.0;  // mean over the batch of L_SSD at the pre-update params
};

// One REINFORCE update with the method's baseline (critic / shared multistart
// mean / critic + entropy bonus). Ledger grows by exactly the number of
// sampled trajectories.
StepStats rl_step(PolicyParams& params, std::span<const ProblemInstance> batch, const TrainConfig& config,
                  double lr, Rng& rollout_rng, BudgetLedger& ledger);

// One gradient step on distill_scaler * L_SSD. Per instance the target is a
// fresh greedy rollout (or targets[i] when given); width symmetric transforms
// of it are imitated. Never touches the ledger.
SsdStats ssd_step(PolicyParams& params, std::span<const ProblemInstance> batch,
                  const std::vector<Trajectory>* targets, double distill_scaler, int width,
                  TransformPolicy transform, double lr, Rng& transform_rng, BudgetLedger& ledger);

// Ablation: imitates the untransformed target itself.
SsdStats nonsym_distill_step(PolicyParams& params, std::span<const ProblemInstance> batch,
                             const std::vector<Trajectory>* targets, double distill_scaler, int width, double lr,
                             Rng& rng, BudgetLedger& ledger);

double lr_at(const TrainConfig& config, std::uint64_t reward_calls);

struct TrainResult {
    TrainHistory history;
    PolicyParams params;
    std::uint64_t reward_calls = 0;
    std::uint64_t rl_steps = 0;
    std::uint64_t ssd_steps = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ledger_events;  // (step, calls)
};

// The full alternating loop; a pure function of (config contents, seeds).
// Checkpoints, when enabled, are written under checkpoint_dir.
TrainResult train(const TrainConfig& config, const std::string& checkpoint_dir = "");

}  // namespace symrd
