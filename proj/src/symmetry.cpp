#include "symrd/symmetry.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace symrd {

namespace {

std::vector<std::vector<int>> routes_of(const Trajectory& traj) {
    std::vector<std::vector<int>> routes;
    std::vector<int> current;
    for (std::size_t i = 1; i < traj.actions.size(); ++i) {
        if (traj.actions[i] == 0) {
            if (!current.empty()) routes.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(traj.actions[i]);
        }
    }
    return routes;
}

Trajectory rebuild_cvrp(const std::vector<std::vector<int>>& routes) {
    Trajectory traj;
    traj.task = Task::CVRP;
    traj.actions.push_back(0);
    for (const auto& r : routes) {
        traj.actions.insert(traj.actions.end(), r.begin(), r.end());
        traj.actions.push_back(0);
    }
    return traj;
}

// Regenerates the token sequence that realizes `sol` when the cursor visits
// machines in `order`. A simulation of the environment, not an index remap:
// at each idle machine we emit its next scheduled job if (and only if) that
// job starts now, otherwise skip.
Trajectory replay_schedule(const ProblemInstance& inst, const Solution& sol, const std::vector<int>& order) {
    Trajectory traj;
    traj.task = Task::FFSP;
    traj.machine_order = order;
    State s = State::initial(inst, order);
    std::vector<std::size_t> next(sol.schedule.size(), 0);
    const std::size_t step_cap = 4 * (sol.schedule.size() + 1) *
                                 (static_cast<std::size_t>(inst.size()) * inst.num_stages() + 1) * 8 + 64;
    while (!s.terminal()) {
        if (traj.actions.size() > step_cap) {
            throw Error("ffsp schedule replay did not terminate");
        }
        const int slot = s.current_slot();
        int action = inst.size();  // skip
        if (next[slot] < sol.schedule[slot].size()) {
            const auto& [job, start] = sol.schedule[slot][next[slot]];
            if (start == s.current_time()) {
                action = job;
                ++next[slot];
            }
        }
        s.apply(action);
        traj.actions.push_back(action);
    }
    return traj;
}

}  // namespace

TransformSpec identity_transform(const ProblemInstance& inst, const Trajectory& traj) {
    TransformSpec spec;
    spec.task = inst.task();
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP:
            break;
        case Task::CVRP: {
            const auto routes = routes_of(traj);
            spec.route_order.resize(routes.size());
            std::iota(spec.route_order.begin(), spec.route_order.end(), 0);
            spec.route_flip.assign(routes.size(), 0);
            break;
        }
        case Task::FFSP:
            if (traj.machine_order.empty()) {
                spec.machine_order.resize(inst.total_machines());
                std::iota(spec.machine_order.begin(), spec.machine_order.end(), 0);
            } else {
                spec.machine_order = traj.machine_order;
            }
            break;
    }
    return spec;
}

TransformSpec sample_transform(const ProblemInstance& inst, const Trajectory& traj, Rng& rng) {
    TransformSpec spec;
    spec.task = inst.task();
    switch (inst.task()) {
        case Task::TSP:
            spec.shift = rng.uniform_int(0, inst.size() - 1);
            spec.flip = rng.uniform_int(0, 1) != 0;
            break;
        case Task::ATSP:
            spec.shift = rng.uniform_int(0, inst.size() - 1);
            break;
        case Task::CVRP: {
            const auto routes = routes_of(traj);
            spec.route_order.resize(routes.size());
            std::iota(spec.route_order.begin(), spec.route_order.end(), 0);
            rng.shuffle(spec.route_order);
            spec.route_flip.resize(routes.size());
            for (std::size_t i = 0; i < routes.size(); ++i) {
                spec.route_flip[i] = routes[i].size() >= 2 ? static_cast<std::uint8_t>(rng.uniform_int(0, 1)) : 0;
            }
            break;
        }
        case Task::FFSP:
            spec.machine_order.resize(inst.total_machines());
            std::iota(spec.machine_order.begin(), spec.machine_order.end(), 0);
            rng.shuffle(spec.machine_order);
            break;
    }
    return spec;
}

Trajectory apply_transform(const ProblemInstance& inst, const Trajectory& traj, const TransformSpec& spec) {
    if (spec.task != inst.task()) throw InvalidArgument("transform task does not match instance");
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP: {
            const int n = static_cast<int>(traj.actions.size());
            std::vector<int> base = traj.actions;
            if (spec.flip) std::reverse(base.begin(), base.end());
            Trajectory out;
            out.task = traj.task;
            out.actions.resize(n);
            for (int i = 0; i < n; ++i) out.actions[i] = base[(i + spec.shift) % n];
            return out;
        }
        case Task::CVRP: {
            auto routes = routes_of(traj);
            if (spec.route_order.size() != routes.size() || spec.route_flip.size() != routes.size()) {
                throw InvalidArgument("transform route count does not match trajectory");
            }
            std::vector<std::vector<int>> rebuilt;
            rebuilt.reserve(routes.size());
            for (int idx : spec.route_order) {
                auto r = routes[idx];
                if (spec.route_flip[idx] && r.size() >= 2) std::reverse(r.begin(), r.end());
                rebuilt.push_back(std::move(r));
            }
            return rebuild_cvrp(rebuilt);
        }
        case Task::FFSP:
            return replay_schedule(inst, solution_of(inst, traj), spec.machine_order);
    }
    throw InvalidArgument("unknown task");
}

Trajectory sample_symmetric(const ProblemInstance& inst, const Trajectory& traj, Rng& rng) {
    validate_trajectory(inst, traj);
    return apply_transform(inst, traj, sample_transform(inst, traj, rng));
}

Orbit enumerate_orbit(const ProblemInstance& inst, const Solution& solution) {
    Orbit orbit;
    orbit.solution = solution;
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP: {
            const int n = static_cast<int>(solution.cycle.size());
            if (n > 8) throw TooLarge("orbit enumeration limited to N <= 8");
            std::set<std::vector<int>> seen;
            const int flips = inst.task() == Task::TSP ? 2 : 1;
            for (int f = 0; f < flips; ++f) {
                std::vector<int> base = solution.cycle;
                if (f) std::reverse(base.begin(), base.end());
                for (int k = 0; k < n; ++k) {
                    std::vector<int> rotated(n);
                    for (int i = 0; i < n; ++i) rotated[i] = base[(i + k) % n];
                    if (seen.insert(rotated).second) {
                        Trajectory t;
                        t.task = inst.task();
                        t.actions = rotated;
                        orbit.members.push_back(std::move(t));
                        orbit.multiplicity.push_back(1);
                    }
                }
            }
            break;
        }
        case Task::CVRP: {
            const auto& routes = solution.routes;
            if (routes.size() > 4) throw TooLarge("orbit enumeration limited to <= 4 routes");
            std::vector<int> order(routes.size());
            std::iota(order.begin(), order.end(), 0);
            std::vector<int> flippable;
            for (std::size_t i = 0; i < routes.size(); ++i) {
                if (routes[i].size() >= 2) flippable.push_back(static_cast<int>(i));
            }
            do {
                for (std::uint64_t bits = 0; bits < (1ULL << flippable.size()); ++bits) {
                    std::vector<std::vector<int>> rebuilt;
                    rebuilt.reserve(routes.size());
                    for (int idx : order) {
                        auto r = routes[idx];
                        const auto pos = std::find(flippable.begin(), flippable.end(), idx) - flippable.begin();
                        if (pos < static_cast<long>(flippable.size()) && (bits >> pos) & 1) {
                            std::reverse(r.begin(), r.end());
                        }
                        rebuilt.push_back(std::move(r));
                    }
                    orbit.members.push_back(rebuild_cvrp(rebuilt));
                    orbit.multiplicity.push_back(1);
                }
            } while (std::next_permutation(order.begin(), order.end()));
            break;
        }
        case Task::FFSP: {
            if (inst.size() > 5 || inst.total_machines() > 4) {
                throw TooLarge("ffsp orbit enumeration limited to <= 5 jobs, <= 4 machines");
            }
            std::vector<int> order(inst.total_machines());
            std::iota(order.begin(), order.end(), 0);
            std::map<std::vector<int>, std::size_t> index_of;
            do {
                Trajectory t = replay_schedule(inst, solution, order);
                auto [it, inserted] = index_of.try_emplace(t.actions, orbit.members.size());
                if (inserted) {
                    orbit.members.push_back(std::move(t));
                    orbit.multiplicity.push_back(1);
                } else {
                    ++orbit.multiplicity[it->second];
                }
            } while (std::next_permutation(order.begin(), order.end()));
            break;
        }
    }
    return orbit;
}

long long orbit_size(const Solution& solution) {
    switch (solution.task) {
        case Task::TSP: {
            const long long n = static_cast<long long>(solution.cycle.size());
            if (n <= 2) return n;  // reversal coincides with a rotation below N=3
            return 2 * n;
        }
        case Task::ATSP:
            return static_cast<long long>(solution.cycle.size());
        case Task::CVRP: {
            long long size = 1;
            for (std::size_t k = 2; k <= solution.routes.size(); ++k) size *= static_cast<long long>(k);
            for (const auto& r : solution.routes) {
                if (r.size() >= 2) size *= 2;
            }
            return size;
        }
        case Task::FFSP:
            throw InvalidArgument("orbit_size: no closed form for FFSP; use enumerate_orbit");
    }
    throw InvalidArgument("unknown task");
}

int hamming_distance(const Trajectory& a, const Trajectory& b) {
    if (a.actions.size() != b.actions.size()) {
        throw InvalidArgument("hamming_distance: trajectory lengths differ");
    }
    int count = 0;
    for (std::size_t i = 0; i < a.actions.size(); ++i) {
        if (a.actions[i] != b.actions[i]) ++count;
    }
    return count;
}

bool verify_preserving(const ProblemInstance& inst, const Trajectory& a, const Trajectory& b) {
    if (!(solution_of(inst, a) == solution_of(inst, b))) return false;
    return nearly_equal_rel(trajectory_cost(inst, a), trajectory_cost(inst, b));
}

}  // namespace symrd
