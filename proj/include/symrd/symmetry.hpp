#pragma once

#include <cstdint>
#include <vector>

#include "symrd/common.hpp"
#include "symrd/env.hpp"
#include "symrd/instance.hpp"

namespace symrd {

// One solution-preserving transformation. Which fields apply depends on task:
//   TSP   cyclic shift + optional reversal
//   ATSP  cyclic shift only
//   CVRP  permutation of routes + per-route flips (length-1 routes never flip)
//   FFSP  permutation of the machine tie-break order
struct TransformSpec {
    Task task = Task::TSP;
    int shift = 0;
    bool flip = false;
    std::vector<int> route_order;
    std::vector<std::uint8_t> route_flip;
    std::vector<int> machine_order;
};

// The set of trajectories mapping to one solution. For FFSP, members are
// distinct token sequences; multiplicity[i] counts how many machine-order
// permutations realize member i (1 for every other task).
struct Orbit {
    Solution solution;
    std::vector<Trajectory> members;
    std::vector<long long> multiplicity;
};

TransformSpec identity_transform(const ProblemInstance& inst, const Trajectory& traj);
TransformSpec sample_transform(const ProblemInstance& inst, const Trajectory& traj, Rng& rng);
Trajectory apply_transform(const ProblemInstance& inst, const Trajectory& traj, const TransformSpec& spec);

// Draws uniformly over TransformSpecs, which for TSP/ATSP/CVRP is uniform over
// the orbit of solution_of(traj). Never evaluates a reward.
Trajectory sample_symmetric(const ProblemInstance& inst, const Trajectory& traj, Rng& rng);

// Exhaustive orbit for small solutions (TSP/ATSP N <= 8, CVRP <= 4 routes,
// FFSP <= 5 jobs and <= 4 machines in total). Throws TooLarge beyond.
Orbit enumerate_orbit(const ProblemInstance& inst, const Solution& solution);

// Closed forms: 2N (TSP, N >= 3), N (ATSP), k! * 2^m (CVRP, m = routes of
// length >= 2). FFSP has no closed form; use enumerate_orbit.
long long orbit_size(const Solution& solution);

int hamming_distance(const Trajectory& a, const Trajectory& b);

// True iff the two trajectories induce the same canonical solution and equal
// cost (1e-9 relative). Test-side helper; does not touch any ledger.
bool verify_preserving(const ProblemInstance& inst, const Trajectory& a, const Trajectory& b);

}  // namespace symrd
