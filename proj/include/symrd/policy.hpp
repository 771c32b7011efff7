#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "symrd/common.hpp"
#include "symrd/env.hpp"
#include "symrd/instance.hpp"

namespace symrd {

// All learnable parameters of the autoregressive policy + critic head, as one
// flat vector. The architecture is a linear node embedding with a dot-product
// decoder:
//
//   E[i]    = features(i) * W_e + b_e                (d-dim node embedding)
//   context = [mean(E) | E[last] | task extras]      (see ctx_dim below)
//   q       = context * W_q + b_q
//   logit_a = s * <q, E[a]>        masked softmax over feasible actions
//   critic  = <mean(E), w_c> + b_c
//
// Feature widths: TSP 2 (coords), CVRP 4 (coords, demand/Q, depot flag),
// ATSP 4 (row/col mean and min of the distance matrix), FFSP total_machines
// (processing times / 10). Context: [mean|last|first] for TSP/ATSP,
// [mean|last|first|capacity] for CVRP, [mean|last|machine one-hot] for FFSP,
// which also owns a learnable skip embedding.
//
// Parameter count: in_dim*d + d + ctx_dim*d + d + 1 + d + 1 (+ d for FFSP).
struct PolicyParams {
    Task task = Task::TSP;
    int d = 16;
    std::uint64_t seed = 0;
    std::vector<int> machines_per_stage;  // FFSP topology; empty otherwise
    std::vector<double> values;

    bool operator==(const PolicyParams& other) const = default;
};

struct ParamLayout {
    int d = 0;
    int in_dim = 0;
    int ctx_dim = 0;
    int n_actions_extra = 0;  // 1 for the FFSP skip embedding
    std::size_t w_embed = 0, b_embed = 0, w_query = 0, b_query = 0;
    std::size_t logit_scale = 0, w_critic = 0, b_critic = 0, e_skip = 0;
    std::size_t total = 0;
};

ParamLayout param_layout(Task task, int d, const std::vector<int>& machines_per_stage);
std::size_t param_count(Task task, int d, const std::vector<int>& machines_per_stage = {});

// Entries i.i.d. uniform on (-1/sqrt(d), 1/sqrt(d)); deterministic in seed.
PolicyParams init_params(Task task, int d, std::uint64_t seed, const std::vector<int>& machines_per_stage = {});
PolicyParams init_params_for(const ProblemInstance& inst, int d, std::uint64_t seed);

// All-zero parameters: every feasible action equally likely at every step.
PolicyParams uniform_params(Task task, int d, const std::vector<int>& machines_per_stage = {});

struct GradientBundle {
    double loss = 0.0;
    std::vector<double> grad;
};

struct SampleResult {
    Trajectory trajectory;
    double log_prob = 0.0;
    double reward = 0.0;
};

// Sum over steps of the masked log-softmax probability of the taken action.
double log_prob(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj);

// Extended-precision forward passes. The finite-difference oracle divides a
// tiny loss difference by 2h; evaluating in 80-bit precision keeps that
// cancellation noise orders of magnitude below the 1e-4 tolerance.
long double log_prob_extended(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj);
long double critic_value_extended(const PolicyParams& params, const ProblemInstance& inst);

// One policy rollout; evaluating its reward is THE budget-metered call.
SampleResult sample_trajectory(const PolicyParams& params, const ProblemInstance& inst, Rng& rng,
                               BudgetLedger& ledger);

// Argmax rollout, ties to the lowest action id. Never touches a ledger.
Trajectory greedy_trajectory(const PolicyParams& params, const ProblemInstance& inst);

double critic_value(const PolicyParams& params, const ProblemInstance& inst);

// d/dtheta of [-advantage * log pi(traj)]; the advantage is a constant here.
GradientBundle grad_reinforce(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj,
                              double advantage);

// d/dtheta of L_SSD = -sum_i log pi(traj_i).
GradientBundle grad_ssd(const PolicyParams& params, const ProblemInstance& inst,
                        std::span<const Trajectory> trajectories);

// Value -log pi(traj) and its gradient (the per-sample entropy estimate used
// by maximum-entropy REINFORCE).
GradientBundle entropy_bonus_term(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj);

// d/dtheta of (critic_value - target)^2.
GradientBundle grad_critic_mse(const PolicyParams& params, const ProblemInstance& inst, double target);

// Central-difference check: max over parameters of the relative error between
// analytic[i] and (f(theta+h e_i) - f(theta-h e_i)) / 2h, with denominator
// max(|analytic|, |numeric|, 1e-8). The closure should evaluate in extended
// precision (see log_prob_extended) so the difference quotient stays clean.
double fd_check(const PolicyParams& params, const std::function<long double(const PolicyParams&)>& loss,
                std::span<const double> analytic, double h);

// Reusable forward/backward engine bound to one (params, instance) pair; the
// node embeddings are computed once at construction. record=true keeps the
// step tape so a following add_*_grad call can run; each recorded forward
// replaces the previous tape.
class PolicyEvaluator {
  public:
    PolicyEvaluator(const PolicyParams& params, const ProblemInstance& inst);
    ~PolicyEvaluator();
    PolicyEvaluator(PolicyEvaluator&&) noexcept;
    PolicyEvaluator& operator=(PolicyEvaluator&&) noexcept;

    double sample(Trajectory& out, Rng& rng, bool record);  // returns log prob
    double replay(const Trajectory& traj, bool record);     // returns log prob
    void greedy(Trajectory& out);
    double critic() const;

    // Adds coef * d(log pi)/dtheta of the last recorded episode into grad.
    void add_logprob_grad(double coef, std::vector<double>& grad);
    // Adds coef * d(critic)/dtheta into grad.
    void add_critic_grad(double coef, std::vector<double>& grad);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Versioned checkpoint with bit-exact round trip. reward_calls records the
// ledger position at save time (0 when standalone).
void save_checkpoint(const PolicyParams& params, std::uint64_t reward_calls, const std::string& path);
std::pair<PolicyParams, std::uint64_t> load_checkpoint(const std::string& path);

}  // namespace symrd
