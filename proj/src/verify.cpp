#include "symrd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "symrd/env.hpp"
#include "symrd/metrics.hpp"
#include "symrd/policy.hpp"
#include "symrd/symmetry.hpp"

namespace symrd {

namespace {

ProblemInstance small_instance(Task task, int n, Rng& rng) {
    switch (task) {
        case Task::TSP:
        case Task::ATSP:
            return sample_instance(task, std::min(n, 7), rng);
        case Task::CVRP:
            return sample_instance(task, std::min(n, 6), rng);
        case Task::FFSP: {
            // Enumeration limits: <= 5 jobs, <= 4 machines in total.
            const int jobs = std::min(n, 4);
            std::vector<std::vector<std::vector<int>>> proc(2);
            proc[0].assign(2, std::vector<int>(jobs));
            proc[1].assign(2, std::vector<int>(jobs));
            for (auto& stage : proc) {
                for (auto& machine : stage) {
                    for (auto& p : machine) p = rng.uniform_int(2, 9);
                }
            }
            return ProblemInstance::ffsp(std::move(proc));
        }
    }
    throw InvalidArgument("unknown task");
}

// Trajectory with an enumerable orbit (CVRP needs <= 4 routes).
Trajectory enumerable_trajectory(const ProblemInstance& inst, Rng& rng) {
    for (int attempt = 0; attempt < 500; ++attempt) {
        Trajectory traj = random_trajectory(inst, rng);
        if (inst.task() != Task::CVRP) return traj;
        const auto sol = solution_of(inst, traj);
        if (sol.routes.size() <= 4) return traj;
    }
    throw Error("could not draw a trajectory with a small orbit");
}

void corrupt(Trajectory& traj, Rng& rng) {
    if (traj.actions.size() < 2) return;
    const std::size_t i = rng.index(traj.actions.size());
    std::size_t j = rng.index(traj.actions.size());
    while (j == i) j = rng.index(traj.actions.size());
    std::swap(traj.actions[i], traj.actions[j]);
}

SuiteResult preservation_suite(const VerifyOptions& opts, Rng& rng) {
    SuiteResult res;
    res.name = "preservation";
    BudgetLedger ledger;
    for (int t = 0; t < opts.trials; ++t) {
        const ProblemInstance inst = sample_instance(opts.task, opts.n, rng);
        const Trajectory traj = random_trajectory(inst, rng);
        ++res.checks;
        try {
            Trajectory transformed = sample_symmetric(inst, traj, rng);
            if (opts.corrupt_transform) corrupt(transformed, rng);
            if (!verify_preserving(inst, traj, transformed)) ++res.failures;
        } catch (const Error&) {
            ++res.failures;
        }
    }
    if (ledger.count() != 0) ++res.failures;
    res.passed = res.failures == 0;
    std::ostringstream d;
    d << res.checks - res.failures << "/" << res.checks << " transforms preserved solution and reward";
    res.detail = d.str();
    return res;
}

SuiteResult orbit_suite(const VerifyOptions& opts, Rng& rng) {
    SuiteResult res;
    res.name = "orbit-structure";
    const int trials = std::min(opts.trials, 50);
    for (int t = 0; t < trials; ++t) {
        const ProblemInstance inst = small_instance(opts.task, opts.n, rng);
        const Trajectory traj = enumerable_trajectory(inst, rng);
        const Solution sol = solution_of(inst, traj);
        ++res.checks;
        try {
            const Orbit orbit = enumerate_orbit(inst, sol);
            bool ok = !orbit.members.empty();
            std::map<std::vector<int>, int> seen;
            for (const auto& member : orbit.members) {
                if (++seen[member.actions] > 1) ok = false;          // duplicate-free
                if (!verify_preserving(inst, traj, member)) ok = false;
            }
            if (opts.task != Task::FFSP) {
                if (orbit_size(sol) != static_cast<long long>(orbit.members.size())) ok = false;
            }
            if (!ok) ++res.failures;
        } catch (const Error&) {
            ++res.failures;
        }
    }
    res.passed = res.failures == 0;
    std::ostringstream d;
    d << res.checks - res.failures << "/" << res.checks << " orbits matched "
      << (opts.task == Task::FFSP ? "replay checks" : "closed-form sizes");
    res.detail = d.str();
    return res;
}

SuiteResult uniformity_suite(const VerifyOptions& opts, Rng& rng) {
    SuiteResult res;
    res.name = "uniformity";
    const int trials = std::min(opts.trials, 10);
    for (int t = 0; t < trials; ++t) {
        const ProblemInstance inst = small_instance(opts.task, opts.n, rng);
        const Trajectory traj = enumerable_trajectory(inst, rng);
        const Orbit orbit = enumerate_orbit(inst, solution_of(inst, traj));
        std::map<std::vector<int>, long long> counts;
        for (const auto& member : orbit.members) counts[member.actions] = 0;
        long long total_mult = 0;
        for (long long m : orbit.multiplicity) total_mult += m;
        const long long draws = 20 * static_cast<long long>(orbit.members.size());
        bool ok = true;
        for (long long i = 0; i < draws; ++i) {
            const Trajectory sample = sample_symmetric(inst, traj, rng);
            auto it = counts.find(sample.actions);
            if (it == counts.end()) {
                ok = false;  // sampled outside the enumerated orbit
                break;
            }
            ++it->second;
        }
        ++res.checks;
        if (ok) {
            for (std::size_t m = 0; m < orbit.members.size(); ++m) {
                const double p = static_cast<double>(orbit.multiplicity[m]) / static_cast<double>(total_mult);
                const double sigma = std::sqrt(p * (1.0 - p) * static_cast<double>(draws));
                const double expected = p * static_cast<double>(draws);
                const double observed = static_cast<double>(counts[orbit.members[m].actions]);
                if (std::abs(observed - expected) > 5.0 * sigma + 1e-9) ok = false;
            }
        }
        if (!ok) ++res.failures;
    }
    res.passed = res.failures == 0;
    std::ostringstream d;
    d << res.checks - res.failures << "/" << res.checks << " instances inside 5-sigma binomial bands";
    res.detail = d.str();
    return res;
}

SuiteResult gradient_suite(const VerifyOptions& opts, Rng& rng) {
    SuiteResult res;
    res.name = "gradient-fdcheck";
    const int trials = std::min(std::max(opts.trials / 10, 3), 10);
    const double h = 1e-5;
    const double tol = 1e-4;
    for (int t = 0; t < trials; ++t) {
        // Small instances keep |loss| low so central-difference cancellation
        // noise stays far below the tolerance.
        const ProblemInstance inst =
            small_instance(opts.task, opts.task == Task::FFSP ? 2 : std::min(opts.n, 4), rng);
        const PolicyParams params = init_params_for(inst, 6, rng.next_u64());
        const Trajectory traj = random_trajectory(inst, rng);
        const double advantage = rng.uniform(-1.0, 1.0);

        const auto reinforce = grad_reinforce(params, inst, traj, advantage);
        res.checks++;
        if (fd_check(
                params, [&](const PolicyParams& p) { return -static_cast<long double>(advantage) * log_prob_extended(p, inst, traj); },
                reinforce.grad, h) > tol) {
            ++res.failures;
        }

        const Trajectory other = random_trajectory(inst, rng);
        const std::vector<Trajectory> both = {traj, other};
        const auto ssd = grad_ssd(params, inst, both);
        res.checks++;
        if (fd_check(
                params,
                [&](const PolicyParams& p) { return -log_prob_extended(p, inst, traj) - log_prob_extended(p, inst, other); },
                ssd.grad, h) > tol) {
            ++res.failures;
        }

        const auto bonus = entropy_bonus_term(params, inst, traj);
        res.checks++;
        if (fd_check(params, [&](const PolicyParams& p) { return -log_prob_extended(p, inst, traj); }, bonus.grad, h) >
            tol) {
            ++res.failures;
        }

        const double target = rng.uniform(-2.0, 2.0);
        const auto critic = grad_critic_mse(params, inst, target);
        res.checks++;
        if (fd_check(
                params,
                [&](const PolicyParams& p) {
                    const long double v = critic_value_extended(p, inst);
                    return (v - target) * (v - target);
                },
                critic.grad, h) > tol) {
            ++res.failures;
        }
    }
    res.passed = res.failures == 0;
    std::ostringstream d;
    d << res.checks - res.failures << "/" << res.checks << " analytic gradients within 1e-4 of central differences";
    res.detail = d.str();
    return res;
}

SuiteResult entropy_suite(const VerifyOptions& opts, Rng& rng) {
    SuiteResult res;
    res.name = "entropy-identity";
    if (opts.task == Task::CVRP || opts.task == Task::FFSP) {
        res.detail = "exact enumeration applies to TSP/ATSP only; skipped";
        return res;
    }
    const int trials = std::min(std::max(opts.trials / 20, 3), 10);
    for (int t = 0; t < trials; ++t) {
        const ProblemInstance inst = sample_instance(opts.task, std::min(opts.n, 6), rng);
        const PolicyParams params = init_params_for(inst, 6, rng.next_u64());
        const auto dec = entropy_decomposition_exact(params, inst);
        ++res.checks;
        if (std::abs(dec.h_traj - (dec.h_sol + dec.e_cond)) > 1e-8 ||
            dec.h_traj > dec.h_uniform_bound + 1e-8) {
            ++res.failures;
        }
    }
    res.passed = res.failures == 0;
    std::ostringstream d;
    d << res.checks - res.failures << "/" << res.checks << " entropy chain-rule identities and bounds held";
    res.detail = d.str();
    return res;
}

}  // namespace

std::vector<SuiteResult> run_verify(const VerifyOptions& opts) {
    if (opts.trials < 1) throw InvalidArgument("verify: trials must be >= 1");
    Rng root(opts.seed);
    Rng rng = root.fork(1);
    std::vector<SuiteResult> out;
    out.push_back(preservation_suite(opts, rng));
    out.push_back(orbit_suite(opts, rng));
    out.push_back(uniformity_suite(opts, rng));
    out.push_back(gradient_suite(opts, rng));
    out.push_back(entropy_suite(opts, rng));
    return out;
}

bool all_passed(const std::vector<SuiteResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const SuiteResult& r) { return r.passed; });
}

}  // namespace symrd
