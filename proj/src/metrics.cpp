#include "symrd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "symrd/symmetry.hpp"

namespace symrd {

double validate_cost(const PolicyParams& params, std::span<const ProblemInstance> instances) {
    if (instances.empty()) throw InvalidArgument("validate_cost: empty dataset");
    double total = 0.0;
    for (const auto& inst : instances) {
        total += trajectory_cost(inst, greedy_trajectory(params, inst));
    }
    return total / static_cast<double>(instances.size());
}

double validate_cost(const PolicyParams& params, const Dataset& dataset) {
    return validate_cost(params, std::span<const ProblemInstance>(dataset.instances));
}

double l1_symmetry_gap(const PolicyParams& params, std::span<const ProblemInstance> instances,
                       int samples_per_instance, Rng& rng) {
    if (instances.empty()) throw InvalidArgument("l1_symmetry_gap: empty instance list");
    if (samples_per_instance < 1) throw InvalidArgument("l1_symmetry_gap: samples must be >= 1");
    double total = 0.0;
    for (const auto& inst : instances) {
        PolicyEvaluator ev(params, inst);
        Trajectory greedy;
        ev.greedy(greedy);
        const double lp = ev.replay(greedy, false);
        for (int s = 0; s < samples_per_instance; ++s) {
            const Trajectory transformed = sample_symmetric(inst, greedy, rng);
            total += std::abs(lp - ev.replay(transformed, false));
        }
    }
    return total / (static_cast<double>(instances.size()) * samples_per_instance);
}

EntropyDecomposition entropy_decomposition_exact(const PolicyParams& params, const ProblemInstance& inst) {
    if (inst.task() != Task::TSP && inst.task() != Task::ATSP) {
        throw TooLarge("exact entropy decomposition supports TSP/ATSP only");
    }
    if (inst.size() > 7) throw TooLarge("exact entropy decomposition limited to N <= 7");

    const auto trajectories = enumerate_all_trajectories(inst);
    PolicyEvaluator ev(params, inst);

    std::map<Solution, std::vector<double>> by_solution;  // probabilities per orbit
    double h_traj = 0.0;
    for (const auto& traj : trajectories) {
        const double p = std::exp(ev.replay(traj, false));
        if (p > 0.0) h_traj -= p * std::log(p);
        by_solution[solution_of(inst, traj)].push_back(p);
    }

    EntropyDecomposition out;
    out.h_traj = h_traj;
    for (const auto& [sol, probs] : by_solution) {
        double px = 0.0;
        for (double p : probs) px += p;
        if (px <= 0.0) continue;
        out.h_sol -= px * std::log(px);
        double h_cond = 0.0;
        for (double p : probs) {
            const double c = p / px;
            if (c > 0.0) h_cond -= c * std::log(c);
        }
        out.e_cond += px * h_cond;
        out.h_uniform_bound += px * std::log(static_cast<double>(probs.size()));
    }
    out.h_uniform_bound += out.h_sol;
    return out;
}

TopKTracker::TopKTracker(int k) : k_(k) {
    if (k < 1) throw InvalidArgument("TopKTracker: k must be >= 1");
}

void TopKTracker::add(const Solution& solution, double reward) {
    auto [it, inserted] = best_.try_emplace(solution, reward);
    if (!inserted) it->second = std::max(it->second, reward);
}

double TopKTracker::topk_mean() const {
    if (best_.empty()) throw InvalidArgument("TopKTracker: no solutions recorded");
    std::vector<double> rewards;
    rewards.reserve(best_.size());
    for (const auto& [sol, r] : best_) rewards.push_back(r);
    std::sort(rewards.begin(), rewards.end(), std::greater<>());
    const std::size_t take = std::min<std::size_t>(k_, rewards.size());
    double total = 0.0;
    for (std::size_t i = 0; i < take; ++i) total += rewards[i];
    return total / static_cast<double>(take);
}

void TopKTracker::record(double reward_calls) { curve_.emplace_back(reward_calls, topk_mean()); }

double auc_topk(std::span<const std::pair<double, double>> curve, double k_max) {
    if (curve.empty()) throw InvalidArgument("auc_topk: empty history");
    if (k_max <= 0.0) throw InvalidArgument("auc_topk: k_max must be positive");
    double area = 0.0;
    double prev_k = 0.0;
    double prev_v = curve.front().second;  // flat extension to K = 0
    for (const auto& [k, v] : curve) {
        area += (k - prev_k) * 0.5 * (prev_v + v);
        prev_k = k;
        prev_v = v;
    }
    area += (k_max - prev_k) * prev_v;  // flat extension to K = k_max
    return area / k_max;
}

std::vector<std::pair<double, double>> normalize_curve(std::span<const std::pair<double, double>> curve) {
    if (curve.empty()) throw InvalidArgument("normalize_curve: empty history");
    double lo = curve.front().second, hi = curve.front().second;
    for (const auto& [k, v] : curve) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::pair<double, double>> out(curve.begin(), curve.end());
    for (auto& [k, v] : out) v = hi > lo ? (v - lo) / (hi - lo) : 1.0;
    return out;
}

double optimality_gap(const PolicyParams& params, std::span<const ProblemInstance> instances) {
    if (instances.empty()) throw InvalidArgument("optimality_gap: empty instance list");
    double total = 0.0;
    for (const auto& inst : instances) {
        const auto [best, opt_cost] = brute_force_best(inst);
        const double greedy_cost = trajectory_cost(inst, greedy_trajectory(params, inst));
        total += (greedy_cost - opt_cost) / opt_cost;
    }
    return total / static_cast<double>(instances.size());
}

}  // namespace symrd
