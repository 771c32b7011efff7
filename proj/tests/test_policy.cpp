#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

#include "oracles.hpp"
#include "symrd/policy.hpp"

using namespace symrd;

namespace {

Trajectory make_traj(Task task, std::vector<int> actions) {
    Trajectory t;
    t.task = task;
    t.actions = std::move(actions);
    return t;
}

}  // namespace

TEST_CASE("param_count follows the documented formula") {
    for (int d : {4, 16}) {
        // in_dim*d + b_e(d) + ctx_dim*d + b_q(d) + scale(1) + critic(d+1)
        CHECK(param_count(Task::TSP, d) == static_cast<std::size_t>(2 * d + d + 3 * d * d + d + 1 + d + 1));
        CHECK(param_count(Task::CVRP, d) ==
              static_cast<std::size_t>(4 * d + d + (3 * d + 1) * d + d + 1 + d + 1));
        CHECK(param_count(Task::ATSP, d) == static_cast<std::size_t>(4 * d + d + 3 * d * d + d + 1 + d + 1));
        const std::vector<int> mps{2, 2};
        CHECK(param_count(Task::FFSP, d, mps) ==
              static_cast<std::size_t>(4 * d + d + (2 * d + 4) * d + d + 1 + d + 1 + d));
    }
}

TEST_CASE("init_params: deterministic in seed, seeds differ") {
    const auto a = init_params(Task::TSP, 8, 5);
    const auto b = init_params(Task::TSP, 8, 5);
    const auto c = init_params(Task::TSP, 8, 6);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    const double bound = 1.0 / std::sqrt(8.0);
    for (double v : a.values) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
    }
}

TEST_CASE("uniform params factorize to uniform over feasible actions") {
    Rng rng(1);
    const auto inst = sample_instance(Task::TSP, 4, rng);
    const auto params = uniform_params(Task::TSP, 8);
    const auto traj = make_traj(Task::TSP, {2, 0, 3, 1});
    CHECK(log_prob(params, inst, traj) == doctest::Approx(-std::log(24.0)).epsilon(1e-12));
}

TEST_CASE("normalization: trajectory probabilities sum to one by enumeration") {
    Rng rng(2);
    for (Task task : {Task::TSP, Task::ATSP, Task::CVRP}) {
        const auto inst = sample_instance(task, 4, rng);
        const auto params = init_params_for(inst, 8, 77);
        double total = 0.0;
        for (const auto& traj : enumerate_all_trajectories(inst)) {
            total += std::exp(log_prob(params, inst, traj));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("log_prob rejects infeasible trajectories") {
    Rng rng(3);
    const auto inst = sample_instance(Task::TSP, 4, rng);
    const auto params = uniform_params(Task::TSP, 8);
    CHECK_THROWS_AS(log_prob(params, inst, make_traj(Task::TSP, {0, 0, 1, 2})), InfeasibleAction);
}

TEST_CASE("sample_trajectory: ledger +1, log prob and reward consistent") {
    Rng rng(4);
    const auto inst = sample_instance(Task::CVRP, 5, rng);
    const auto params = init_params_for(inst, 8, 9);
    BudgetLedger ledger;
    const auto res = sample_trajectory(params, inst, rng, ledger);
    CHECK(ledger.count() == 1);
    CHECK(log_prob(params, inst, res.trajectory) == doctest::Approx(res.log_prob).epsilon(1e-12));
    BudgetLedger check;
    CHECK(res.reward == episodic_reward(inst, res.trajectory, check));
}

TEST_CASE("sampling matches the factorized distribution (binomial bands)") {
    Rng rng(5);
    const auto inst = sample_instance(Task::TSP, 4, rng);
    const auto params = uniform_params(Task::TSP, 8);
    BudgetLedger ledger;
    std::map<std::vector<int>, long long> counts;
    const long long draws = 10000;
    for (long long i = 0; i < draws; ++i) {
        counts[sample_trajectory(params, inst, rng, ledger).trajectory.actions]++;
    }
    CHECK(counts.size() == 24);
    for (const auto& [actions, count] : counts) {
        CHECK(oracle::within_binomial_band(count, draws, 1.0 / 24.0));
    }
    CHECK(ledger.count() == draws);
}

TEST_CASE("greedy: deterministic, lowest-id tie-break, no ledger touch") {
    Rng rng(6);
    for (Task task : {Task::TSP, Task::ATSP, Task::CVRP, Task::FFSP}) {
        const auto inst = sample_instance(task, 5, rng);
        const auto params = init_params_for(inst, 8, 11);
        const auto t1 = greedy_trajectory(params, inst);
        const auto t2 = greedy_trajectory(params, inst);
        CHECK(t1 == t2);
    }
    // All-zero weights: every logit ties, so ids come out in ascending order.
    const auto inst = sample_instance(Task::TSP, 5, rng);
    const auto uniform = uniform_params(Task::TSP, 8);
    CHECK(greedy_trajectory(uniform, inst).actions == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("critic: finite and deterministic") {
    Rng rng(7);
    const auto inst = sample_instance(Task::ATSP, 6, rng);
    const auto params = init_params_for(inst, 8, 13);
    const double v = critic_value(params, inst);
    CHECK(std::isfinite(v));
    CHECK(critic_value(params, inst) == v);
}

TEST_CASE("grad_reinforce: zero advantage and linearity") {
    Rng rng(8);
    const auto inst = sample_instance(Task::TSP, 5, rng);
    const auto params = init_params_for(inst, 8, 15);
    const auto traj = random_trajectory(inst, rng);

    const auto zero = grad_reinforce(params, inst, traj, 0.0);
    for (double g : zero.grad) CHECK(g == 0.0);

    const auto g1 = grad_reinforce(params, inst, traj, 0.7);
    const auto g2 = grad_reinforce(params, inst, traj, 1.4);
    for (std::size_t i = 0; i < g1.grad.size(); ++i) {
        CHECK(g2.grad[i] == doctest::Approx(2.0 * g1.grad[i]).epsilon(1e-12));
    }
}

TEST_CASE("finite differences confirm every analytic gradient") {
    Rng rng(9);
    const double h = 1e-5;
    const double tol = 1e-4;
    for (Task task : {Task::TSP, Task::ATSP, Task::CVRP, Task::FFSP}) {
        for (int trial = 0; trial < 2; ++trial) {
            // Small instances keep |loss| low, which keeps the cancellation
            // noise of the central differences well under the tolerance.
            const auto inst = sample_instance(task, task == Task::FFSP ? 2 : 4, rng);
            const auto params = init_params_for(inst, 5, rng.next_u64());
            const auto traj = random_trajectory(inst, rng);
            const double advantage = rng.uniform(-1.0, 1.0);

            const auto rb = grad_reinforce(params, inst, traj, advantage);
            CHECK(fd_check(
                      params, [&](const PolicyParams& p) { return -static_cast<long double>(advantage) * log_prob_extended(p, inst, traj); },
                      rb.grad, h) < tol);

            const auto other = random_trajectory(inst, rng);
            const std::vector<Trajectory> pair = {traj, other};
            const auto sb = grad_ssd(params, inst, pair);
            CHECK(fd_check(
                      params,
                      [&](const PolicyParams& p) {
                          return -log_prob_extended(p, inst, traj) - log_prob_extended(p, inst, other);
                      },
                      sb.grad, h) < tol);

            const double target = rng.uniform(-3.0, 3.0);
            const auto cb = grad_critic_mse(params, inst, target);
            CHECK(fd_check(
                      params,
                      [&](const PolicyParams& p) {
                          const long double v = critic_value_extended(p, inst);
                          return (v - target) * (v - target);
                      },
                      cb.grad, h) < tol);
        }
    }
}

TEST_CASE("grad_ssd: probability-one target has zero gradient") {
    // One customer: depot -> customer -> depot, every step forced.
    const auto inst = ProblemInstance::cvrp({{0.5, 0.5}, {0.2, 0.2}}, {3}, 30);
    const auto params = init_params_for(inst, 8, 17);
    const auto traj = make_traj(Task::CVRP, {0, 1, 0});
    CHECK(log_prob(params, inst, traj) == 0.0);
    const std::vector<Trajectory> one = {traj};
    const auto bundle = grad_ssd(params, inst, one);
    double norm = 0.0;
    for (double g : bundle.grad) norm += g * g;
    CHECK(std::sqrt(norm) < 1e-8);
}

TEST_CASE("grad_ssd: additive over trajectories") {
    Rng rng(10);
    const auto inst = sample_instance(Task::TSP, 5, rng);
    const auto params = init_params_for(inst, 8, 19);
    const auto t1 = random_trajectory(inst, rng);
    const auto t2 = random_trajectory(inst, rng);
    const std::vector<Trajectory> both = {t1, t2};
    const auto sum = grad_ssd(params, inst, both);
    const std::vector<Trajectory> first = {t1}, second = {t2};
    const auto a = grad_ssd(params, inst, first);
    const auto b = grad_ssd(params, inst, second);
    CHECK(sum.loss == doctest::Approx(a.loss + b.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < sum.grad.size(); ++i) {
        CHECK(sum.grad[i] == doctest::Approx(a.grad[i] + b.grad[i]).epsilon(1e-10));
    }
}

TEST_CASE("entropy bonus equals minus log prob") {
    Rng rng(11);
    const auto inst = sample_instance(Task::TSP, 5, rng);
    const auto params = init_params_for(inst, 8, 21);
    const auto traj = random_trajectory(inst, rng);
    const auto bonus = entropy_bonus_term(params, inst, traj);
    CHECK(bonus.loss == doctest::Approx(-log_prob(params, inst, traj)).epsilon(1e-12));
}

TEST_CASE("fd_check is exact for quadratics") {
    const auto params = init_params(Task::TSP, 4, 23);
    std::vector<double> coeffs(params.values.size());
    Rng rng(12);
    for (auto& c : coeffs) c = rng.uniform(0.5, 2.0);
    auto loss = [&](const PolicyParams& p) {
        long double total = 0.0L;
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            total += static_cast<long double>(coeffs[i]) * p.values[i] * p.values[i];
        }
        return total;
    };
    std::vector<double> analytic(params.values.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) analytic[i] = 2.0 * coeffs[i] * params.values[i];
    // Central differences are exact for quadratics at any h; a larger h only
    // shrinks the cancellation roundoff.
    CHECK(fd_check(params, loss, analytic, 1e-3) < 1e-9);
}

TEST_CASE("checkpoint: bit-exact round trip") {
    const auto params = init_params(Task::CVRP, 16, 31);
    const auto path =
        (std::filesystem::temp_directory_path() / "symrd_test_checkpoint.json").string();
    save_checkpoint(params, 12345, path);
    const auto [loaded, k] = load_checkpoint(path);
    CHECK(k == 12345);
    CHECK(loaded.task == params.task);
    CHECK(loaded.d == params.d);
    CHECK(loaded.seed == params.seed);
    REQUIRE(loaded.values.size() == params.values.size());
    CHECK(std::memcmp(loaded.values.data(), params.values.data(), params.values.size() * sizeof(double)) == 0);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint: malformed files are format errors") {
    const auto path = (std::filesystem::temp_directory_path() / "symrd_test_bad_ckpt.json").string();
    std::ofstream(path) << "{\"format\":\"something-else\"}\n";
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    std::remove(path.c_str());
}
