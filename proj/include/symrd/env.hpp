#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "symrd/common.hpp"
#include "symrd/instance.hpp"

namespace symrd {

// A complete episode. For routing tasks the action sequence alone determines
// the episode. For FFSP the tie-break order of simultaneously idle machines
// is part of the episode: machine_order is a permutation of machine slot ids
// (slot = stage-major, machine-index-minor flattening); empty means the base
// order 0,1,2,...
struct Trajectory {
    Task task = Task::TSP;
    std::vector<int> actions;
    std::vector<int> machine_order;

    bool operator==(const Trajectory& other) const {
        return task == other.task && actions == other.actions && machine_order == other.machine_order;
    }
};

// Canonical, reward-bearing value of a trajectory: two trajectories are
// symmetric exactly when their Solutions compare equal.
//   TSP   cycle rotated so city 0 leads, oriented so cycle[1] < cycle[N-1]
//   ATSP  cycle rotated so city 0 leads (no reflection)
//   CVRP  depot-split routes, each flipped so first < last, sorted by first
//   FFSP  per machine slot, the ordered (job, start_time) assignments
struct Solution {
    Task task = Task::TSP;
    std::vector<int> cycle;
    std::vector<std::vector<int>> routes;
    std::vector<std::vector<std::pair<int, long long>>> schedule;

    bool operator==(const Solution& other) const;
    bool operator<(const Solution& other) const;
};

// One MDP state: instance + action prefix + task scratch. A pure function of
// (instance, prefix, machine_order); apply() is the in-place transition.
class State {
  public:
    static State initial(const ProblemInstance& inst);
    static State initial(const ProblemInstance& inst, const std::vector<int>& machine_order);

    const ProblemInstance& instance() const { return *inst_; }
    const std::vector<int>& prefix() const { return prefix_; }
    bool terminal() const;

    // Number of action ids: N for TSP/ATSP, N+1 for CVRP (0 = depot) and for
    // FFSP (N = skip token).
    int action_count() const;

    // mask[a] != 0 iff action a is feasible. Throws InfeasibleAction when the
    // state is terminal.
    std::vector<std::uint8_t> feasible_mask() const;
    void feasible_mask(std::vector<std::uint8_t>& mask) const;

    void apply(int action);  // throws InfeasibleAction on masked actions

    // Scratch accessors used by the policy features.
    int last_action() const { return prefix_.empty() ? -1 : prefix_.back(); }
    int first_action() const { return prefix_.empty() ? -1 : prefix_.front(); }
    int remaining_capacity() const { return remaining_cap_; }
    int current_slot() const;           // FFSP: machine slot about to act
    long long current_time() const { return time_; }
    const std::vector<int>& machine_order() const { return machine_order_; }
    long long makespan() const;         // FFSP: max completion time so far
    const std::vector<std::vector<std::pair<int, long long>>>& slot_assignments() const { return slot_jobs_; }

  private:
    State() = default;
    void normalize_cursor();
    bool job_feasible(int stage, int job) const;
    bool skip_feasible() const;
    int slot_stage(int slot) const { return slot_stage_[slot]; }
    int slot_machine(int slot) const { return slot_machine_[slot]; }

    const ProblemInstance* inst_ = nullptr;
    std::vector<int> prefix_;

    // routing scratch
    std::vector<std::uint8_t> visited_;
    int visited_count_ = 0;
    int pos_ = -1;
    int remaining_cap_ = 0;

    // ffsp scratch
    std::vector<int> machine_order_;
    std::vector<int> slot_stage_;
    std::vector<int> slot_machine_;
    std::size_t cursor_ = 0;
    long long time_ = 0;
    std::vector<long long> machine_ready_;
    std::vector<std::uint8_t> stage_assigned_;    // [stage * n + job]
    std::vector<long long> stage_completion_;     // [stage * n + job]
    std::vector<std::vector<std::pair<int, long long>>> slot_jobs_;
    int assignments_done_ = 0;

    mutable std::vector<std::uint8_t> mask_scratch_;
};

State initial_state(const ProblemInstance& inst);

// step is the pure-value transition; rollout loops use State::apply directly.
State step(const State& state, int action);

// Replays and validates a trajectory; throws InfeasibleAction / InvalidArgument
// if any step is masked or the trajectory does not end terminal.
void validate_trajectory(const ProblemInstance& inst, const Trajectory& traj);

// Objective value of a valid terminal trajectory (tour length / total route
// length / makespan). Free of the budget ledger.
double trajectory_cost(const ProblemInstance& inst, const Trajectory& traj);

// The budget-metered reward call: returns -cost and increments the ledger by
// exactly one.
double episodic_reward(const ProblemInstance& inst, const Trajectory& traj, BudgetLedger& ledger);

// The mapping C: trajectory -> canonical solution. Free (no ledger).
Solution solution_of(const ProblemInstance& inst, const Trajectory& traj);

double solution_cost(const ProblemInstance& inst, const Solution& sol);

// All valid terminal trajectories of a tiny instance (N! for routing). Used
// for exact entropy/normalization checks; throws TooLarge above `limit`
// trajectories.
std::vector<Trajectory> enumerate_all_trajectories(const ProblemInstance& inst, std::size_t limit = 2000000);

// A uniformly random feasible rollout (each step uniform over the mask).
// Costs nothing: no reward evaluation happens.
Trajectory random_trajectory(const ProblemInstance& inst, Rng& rng);

// Exact optimum by exhaustive enumeration. TSP/ATSP N <= 10, CVRP N <= 8,
// FFSP jobs <= 6 (and small machine counts). Never touches a BudgetLedger.
std::pair<Solution, double> brute_force_best(const ProblemInstance& inst);

}  // namespace symrd
