#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "symrd/common.hpp"
#include "symrd/env.hpp"
#include "symrd/instance.hpp"
#include "symrd/policy.hpp"

namespace symrd {

// Mean greedy-decoding cost over the dataset. Evaluation never touches a
// budget ledger.
double validate_cost(const PolicyParams& params, const Dataset& dataset);
double validate_cost(const PolicyParams& params, std::span<const ProblemInstance> instances);

// Mean |log pi(greedy) - log pi(symmetric transform)| over instances and
// draws.
double l1_symmetry_gap(const PolicyParams& params, std::span<const ProblemInstance> instances,
                       int samples_per_instance, Rng& rng);

struct EntropyDecomposition {
    double h_traj = 0.0;     // H(pi(a|s1))
    double h_sol = 0.0;      // H(pi(x|s1))
    double e_cond = 0.0;     // E_x H(pi(a|x,s1))
    double h_uniform_bound = 0.0;  // H(x) + E_x log|orbit(x)|
};

// Exact enumeration over all trajectories (TSP/ATSP, N <= 7): the chain-rule
// identity h_traj = h_sol + e_cond holds to roundoff, and h_traj never
// exceeds h_uniform_bound.
EntropyDecomposition entropy_decomposition_exact(const PolicyParams& params, const ProblemInstance& inst);

// Running mean of the k best distinct canonical solutions' rewards.
class TopKTracker {
  public:
    explicit TopKTracker(int k);
    void add(const Solution& solution, double reward);
    double topk_mean() const;  // over the solutions seen so far (up to k best)
    void record(double reward_calls);
    const std::vector<std::pair<double, double>>& curve() const { return curve_; }
    std::size_t distinct_count() const { return best_.size(); }

  private:
    int k_;
    std::map<Solution, double> best_;
    std::vector<std::pair<double, double>> curve_;
};

// Trapezoidal area of the (reward calls, value) curve, extended flat to the
// ends of [0, k_max], normalized by k_max. Values are expected in [0,1]
// (see normalize_curve); a constant curve c integrates to c.
double auc_topk(std::span<const std::pair<double, double>> curve, double k_max);

// Maps values affinely onto [0,1] with the observed per-run extremes
// (constant curves map to 1).
std::vector<std::pair<double, double>> normalize_curve(std::span<const std::pair<double, double>> curve);

// Mean relative excess of greedy cost over the exact optimum; oracle-sized
// instances only.
double optimality_gap(const PolicyParams& params, std::span<const ProblemInstance> instances);

}  // namespace symrd
