#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "symrd/env.hpp"

using namespace symrd;

namespace {

ProblemInstance unit_square() {
    return ProblemInstance::tsp({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
}

Trajectory make_traj(Task task, std::vector<int> actions) {
    Trajectory t;
    t.task = task;
    t.actions = std::move(actions);
    return t;
}

}  // namespace

TEST_CASE("tsp: initial state has every city feasible") {
    const auto inst = unit_square();
    const State s = initial_state(inst);
    CHECK(s.prefix().empty());
    const auto mask = s.feasible_mask();
    REQUIRE(mask.size() == 4);
    for (auto m : mask) CHECK(m == 1);
}

TEST_CASE("tsp: mask after (0,1) is exactly the unvisited cities") {
    const auto inst = unit_square();
    State s = initial_state(inst);
    s.apply(0);
    s.apply(1);
    const auto mask = s.feasible_mask();
    CHECK(mask[0] == 0);
    CHECK(mask[1] == 0);
    CHECK(mask[2] == 1);
    CHECK(mask[3] == 1);
    CHECK(s.prefix() == std::vector<int>{0, 1});
    CHECK_THROWS_AS(s.apply(1), InfeasibleAction);
}

TEST_CASE("tsp: unit-square tour rewards -4 and increments the ledger once") {
    const auto inst = unit_square();
    const auto traj = make_traj(Task::TSP, {0, 1, 2, 3});
    BudgetLedger ledger;
    const double reward = episodic_reward(inst, traj, ledger);
    CHECK(reward == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(ledger.count() == 1);
}

TEST_CASE("cvrp: episode starts at the depot and tracks capacity") {
    const auto inst = ProblemInstance::cvrp({{0.5, 0.5}, {0.1, 0.1}, {0.9, 0.9}, {0.2, 0.8}}, {27, 5, 2}, 30);
    State s = initial_state(inst);
    auto mask = s.feasible_mask();
    CHECK(mask == std::vector<std::uint8_t>{1, 0, 0, 0});  // forced depot start
    s.apply(0);
    mask = s.feasible_mask();
    CHECK(mask[0] == 0);  // no second depot in a row while customers remain
    CHECK(mask[1] == 1);
    s.apply(1);
    CHECK(s.remaining_capacity() == 3);
    mask = s.feasible_mask();
    CHECK(mask[0] == 1);  // back to depot
    CHECK(mask[2] == 0);  // demand 5 > remaining 3
    CHECK(mask[3] == 1);  // demand 2 fits
    s.apply(0);
    CHECK(s.remaining_capacity() == 30);  // depot restores capacity
}

TEST_CASE("cvrp: final action returns to the depot") {
    const auto inst = ProblemInstance::cvrp({{0.5, 0.5}, {0.1, 0.1}, {0.9, 0.9}}, {4, 4}, 30);
    const auto traj = make_traj(Task::CVRP, {0, 1, 2, 0});
    CHECK_NOTHROW(validate_trajectory(inst, traj));
    CHECK_THROWS_AS(validate_trajectory(inst, make_traj(Task::CVRP, {0, 1, 2})), InvalidArgument);
}

TEST_CASE("ffsp: serial single machine sums processing times") {
    const auto inst = ProblemInstance::ffsp({{{3, 5}}});
    BudgetLedger ledger;
    CHECK(episodic_reward(inst, make_traj(Task::FFSP, {0, 1}), ledger) == -8.0);
    CHECK(episodic_reward(inst, make_traj(Task::FFSP, {1, 0}), ledger) == -8.0);
    CHECK(ledger.count() == 2);
}

TEST_CASE("ffsp: stage precedence masks unfinished jobs") {
    // 2 stages x 1 machine, 2 jobs.
    const auto inst = ProblemInstance::ffsp({{{2, 2}}, {{3, 3}}});
    State s = initial_state(inst);
    CHECK(s.current_slot() == 0);  // cursor at first machine of the stage-major order
    auto mask = s.feasible_mask();
    CHECK(mask[0] == 1);
    CHECK(mask[1] == 1);
    CHECK(mask[2] == 0);  // skip masked: work exists, nothing running, no later machine has work
    s.apply(0);
    // Cursor moves to the stage-1 machine at t=0: job 0 is still processing.
    CHECK(s.current_slot() == 1);
    mask = s.feasible_mask();
    CHECK(mask[0] == 0);
    CHECK(mask[1] == 0);
    CHECK(mask[2] == 1);  // forced skip
}

TEST_CASE("ffsp: skip advances to the next completion event") {
    const auto inst = ProblemInstance::ffsp({{{2, 2}}, {{3, 3}}});
    State s = initial_state(inst);
    s.apply(0);  // stage 0 starts job 0 at t=0
    s.apply(2);  // stage 1 must skip
    CHECK(s.current_time() == 2);  // next event: job 0 done at stage 0
    CHECK(s.current_slot() == 0);
    auto mask = s.feasible_mask();
    CHECK(mask[1] == 1);  // job 1 at stage 0
    CHECK(mask[0] == 0);  // job 0 already assigned at this stage
}

TEST_CASE("solution_of: rotations and reflections collapse to the canonical cycle") {
    const auto inst = unit_square();
    const auto canon = solution_of(inst, make_traj(Task::TSP, {0, 1, 2, 3}));
    CHECK(canon.cycle == std::vector<int>{0, 1, 2, 3});
    CHECK(solution_of(inst, make_traj(Task::TSP, {2, 3, 0, 1})).cycle == std::vector<int>{0, 1, 2, 3});
    CHECK(solution_of(inst, make_traj(Task::TSP, {3, 2, 1, 0})).cycle == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("solution_of: atsp keeps orientation") {
    Rng rng(3);
    const auto inst = sample_instance(Task::ATSP, 4, rng);
    const auto forward = solution_of(inst, make_traj(Task::ATSP, {2, 3, 0, 1}));
    CHECK(forward.cycle == std::vector<int>{0, 1, 2, 3});
    const auto reversed = solution_of(inst, make_traj(Task::ATSP, {3, 2, 1, 0}));
    CHECK(reversed.cycle == std::vector<int>{0, 3, 2, 1});
    CHECK_FALSE(forward == reversed);
}

TEST_CASE("solution_of: cvrp splits, flips and sorts routes") {
    const auto inst =
        ProblemInstance::cvrp({{0.5, 0.5}, {0.1, 0.1}, {0.9, 0.9}, {0.2, 0.8}}, {4, 4, 4}, 30);
    const auto sol = solution_of(inst, make_traj(Task::CVRP, {0, 2, 1, 0, 3, 0}));
    REQUIRE(sol.routes.size() == 2);
    CHECK(sol.routes[0] == std::vector<int>{1, 2});  // flipped: first < last
    CHECK(sol.routes[1] == std::vector<int>{3});
}

TEST_CASE("solution_of: canonicalization is idempotent") {
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const auto inst = sample_instance(Task::TSP, 6, rng);
        const auto traj = random_trajectory(inst, rng);
        const auto sol = solution_of(inst, traj);
        const auto again = solution_of(inst, make_traj(Task::TSP, sol.cycle));
        CHECK(sol == again);
    }
}

TEST_CASE("reward magnitude equals canonical solution cost") {
    Rng rng(23);
    BudgetLedger ledger;
    for (Task task : {Task::TSP, Task::ATSP, Task::CVRP, Task::FFSP}) {
        for (int i = 0; i < 10; ++i) {
            const auto inst = sample_instance(task, task == Task::FFSP ? 4 : 6, rng);
            const auto traj = random_trajectory(inst, rng);
            const double reward = episodic_reward(inst, traj, ledger);
            const double canon_cost = solution_cost(inst, solution_of(inst, traj));
            CHECK(std::abs(-reward - canon_cost) <= 1e-9 * std::max(1.0, canon_cost));
        }
    }
}

TEST_CASE("ffsp: trajectories carry a validated machine tie-break order") {
    const auto inst = ProblemInstance::ffsp({{{2, 3}, {4, 2}}});
    CHECK_NOTHROW(State::initial(inst, {1, 0}));
    CHECK_THROWS_AS(State::initial(inst, {0, 0}), InvalidArgument);  // not a permutation
    CHECK_THROWS_AS(State::initial(inst, {0}), InvalidArgument);     // wrong length
    const auto tsp = unit_square();
    Trajectory bad = make_traj(Task::TSP, {0, 1, 2, 3});
    bad.machine_order = {0, 1};
    CHECK_THROWS_AS(validate_trajectory(tsp, bad), InvalidArgument);
}

TEST_CASE("step returns a new state and leaves the input untouched") {
    const auto inst = unit_square();
    const State s0 = initial_state(inst);
    const State s1 = step(s0, 2);
    CHECK(s0.prefix().empty());
    CHECK(s1.prefix() == std::vector<int>{2});
    const State s2 = step(s1, 0);
    CHECK(s1.prefix() == std::vector<int>{2});
    CHECK(s2.prefix() == std::vector<int>{2, 0});
    CHECK_THROWS_AS(step(s2, 2), InfeasibleAction);
}

TEST_CASE("trajectory enumeration respects its limit") {
    Rng rng(53);
    const auto inst = sample_instance(Task::TSP, 6, rng);
    CHECK(enumerate_all_trajectories(inst).size() == 720);
    CHECK_THROWS_AS(enumerate_all_trajectories(inst, 100), TooLarge);
}

TEST_CASE("replay is deterministic") {
    Rng rng(29);
    const auto inst = sample_instance(Task::CVRP, 6, rng);
    const auto traj = random_trajectory(inst, rng);
    CHECK(trajectory_cost(inst, traj) == trajectory_cost(inst, traj));
    CHECK(solution_of(inst, traj) == solution_of(inst, traj));
}

TEST_CASE("invalid trajectories are rejected") {
    const auto inst = unit_square();
    CHECK_THROWS_AS(validate_trajectory(inst, make_traj(Task::TSP, {0, 0, 1, 2})), InfeasibleAction);
    CHECK_THROWS_AS(validate_trajectory(inst, make_traj(Task::TSP, {0, 1})), InvalidArgument);
    CHECK_THROWS_AS(validate_trajectory(inst, make_traj(Task::TSP, {0, 1, 2, 3, 3})), InvalidArgument);
    BudgetLedger ledger;
    CHECK_THROWS_AS(episodic_reward(inst, make_traj(Task::TSP, {0, 1}), ledger), InvalidArgument);
    CHECK(ledger.count() == 0);
}

TEST_CASE("brute force: unit square optimum is the perimeter") {
    const auto [sol, cost] = brute_force_best(unit_square());
    CHECK(cost == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sol.cycle == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("brute force: never beaten by random feasible trajectories") {
    Rng rng(31);
    for (Task task : {Task::TSP, Task::ATSP, Task::CVRP, Task::FFSP}) {
        const auto inst = sample_instance(task, task == Task::FFSP ? 3 : 6, rng);
        const auto [sol, best_cost] = brute_force_best(inst);
        for (int i = 0; i < 100; ++i) {
            const auto traj = random_trajectory(inst, rng);
            CHECK(trajectory_cost(inst, traj) >= best_cost - 1e-9);
        }
    }
}

TEST_CASE("brute force: agrees with the independent full-permutation oracle") {
    Rng rng(37);
    for (int i = 0; i < 5; ++i) {
        const auto tsp = sample_instance(Task::TSP, 6, rng);
        CHECK(brute_force_best(tsp).second == doctest::Approx(oracle::routing_optimum(tsp)).epsilon(1e-12));
        const auto atsp = sample_instance(Task::ATSP, 6, rng);
        CHECK(brute_force_best(atsp).second == doctest::Approx(oracle::routing_optimum(atsp)).epsilon(1e-12));
    }
}

// Frozen before brute_force_best existed: the independent oracle's optimum for
// generate(ATSP, 5, 1, seed=7).
TEST_CASE("brute force: frozen atsp value from the enumeration oracle") {
    const Dataset ds = generate(Task::ATSP, 5, 1, 7);
    const double expected = 1.727323400941055;
    CHECK(oracle::routing_optimum(ds.instances[0]) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(brute_force_best(ds.instances[0]).second == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("brute force: size limits throw") {
    Rng rng(41);
    CHECK_THROWS_AS(brute_force_best(sample_instance(Task::TSP, 11, rng)), TooLarge);
    CHECK_THROWS_AS(brute_force_best(sample_instance(Task::CVRP, 9, rng)), TooLarge);
    CHECK_THROWS_AS(brute_force_best(sample_instance(Task::FFSP, 7, rng)), TooLarge);
}

TEST_CASE("brute force: cvrp matches exhaustive trajectory enumeration") {
    Rng rng(43);
    for (int i = 0; i < 3; ++i) {
        const auto inst = sample_instance(Task::CVRP, 4, rng);
        const auto [sol, cost] = brute_force_best(inst);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& traj : enumerate_all_trajectories(inst)) {
            best = std::min(best, trajectory_cost(inst, traj));
        }
        CHECK(cost == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("brute force: ffsp matches exhaustive trajectory enumeration") {
    Rng rng(47);
    const auto inst = ProblemInstance::ffsp({{{3, 5, 2}, {4, 2, 6}}});
    const auto [sol, cost] = brute_force_best(inst);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& traj : enumerate_all_trajectories(inst)) {
        best = std::min(best, trajectory_cost(inst, traj));
    }
    CHECK(cost == doctest::Approx(best).epsilon(1e-12));
}
