#include <doctest.h>

#include <cmath>
#include <vector>

#include "symrd/metrics.hpp"
#include "symrd/symmetry.hpp"
#include "symrd/training.hpp"

using namespace symrd;

namespace {

std::vector<ProblemInstance> make_batch(Task task, int n, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ProblemInstance> batch;
    for (int i = 0; i < count; ++i) batch.push_back(sample_instance(task, n, rng));
    return batch;
}

TrainConfig tiny_config(Method method) {
    TrainConfig config = default_config(Task::TSP);
    config.method = method;
    config.n = 4;
    config.batch_size = 20;
    config.k_max = 200;
    config.val_count = 5;
    config.policy_dim = 4;
    config.l1_instances = 2;
    config.seed = 3;
    return config;
}

}  // namespace

TEST_CASE("rl_step: ledger grows by the number of sampled trajectories") {
    const auto batch = make_batch(Task::TSP, 5, 10, 1);
    TrainConfig config = default_config(Task::TSP);
    config.method = Method::RlOnly;
    auto params = init_params(Task::TSP, 4, 1);
    Rng rng(2);
    BudgetLedger ledger;
    rl_step(params, batch, config, 0.01, rng, ledger);
    CHECK(ledger.count() == 10);

    config.method = Method::MultiStart;
    config.multistart_p = 4;
    const auto small = make_batch(Task::TSP, 5, 5, 2);
    rl_step(params, small, config, 0.01, rng, ledger);
    CHECK(ledger.count() == 10 + 20);
}

TEST_CASE("rl_step: zero learning rate leaves parameters unchanged") {
    const auto batch = make_batch(Task::ATSP, 5, 5, 3);
    TrainConfig config = default_config(Task::ATSP);
    config.method = Method::RlOnly;
    auto params = init_params(Task::ATSP, 4, 7);
    const auto before = params.values;
    Rng rng(4);
    BudgetLedger ledger;
    const auto stats = rl_step(params, batch, config, 0.0, rng, ledger);
    CHECK(params.values == before);
    CHECK(std::isfinite(stats.mean_reward));
    CHECK(stats.reward_calls == 5);
}

TEST_CASE("ssd_step: never touches the ledger, lambda=0 is a no-op") {
    const auto batch = make_batch(Task::TSP, 5, 5, 5);
    auto params = init_params(Task::TSP, 4, 9);
    const auto before = params.values;
    Rng rng(6);
    BudgetLedger ledger;
    const auto stats =
        ssd_step(params, batch, nullptr, 0.0, 1, TransformPolicy::Uniform, 0.05, rng, ledger);
    CHECK(ledger.count() == 0);
    CHECK(params.values == before);
    CHECK(stats.loss > 0.0);  // negative log-likelihood of the greedy targets

    ssd_step(params, batch, nullptr, 0.01, 2, TransformPolicy::Uniform, 0.05, rng, ledger);
    CHECK(ledger.count() == 0);
    CHECK(params.values != before);
}

TEST_CASE("ssd_step: identity transform with width 1 reports -log pi of the greedy rollout") {
    const auto batch = make_batch(Task::TSP, 5, 1, 7);
    auto params = init_params(Task::TSP, 4, 11);
    Rng rng(8);
    BudgetLedger ledger;
    const double expected = -log_prob(params, batch[0], greedy_trajectory(params, batch[0]));
    const auto stats =
        ssd_step(params, batch, nullptr, 0.001, 1, TransformPolicy::Identity, 0.01, rng, ledger);
    CHECK(stats.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("nonsym_distill_step equals ssd_step with the identity transform") {
    const auto batch = make_batch(Task::TSP, 5, 4, 9);
    auto a = init_params(Task::TSP, 4, 13);
    auto b = a;
    Rng rng_a(10), rng_b(10);
    BudgetLedger ledger;
    const auto sa = ssd_step(a, batch, nullptr, 0.01, 2, TransformPolicy::Identity, 0.05, rng_a, ledger);
    const auto sb = nonsym_distill_step(b, batch, nullptr, 0.01, 2, 0.05, rng_b, ledger);
    CHECK(a.values == b.values);
    CHECK(sa.loss == sb.loss);
    CHECK(sb.loss >= 0.0);
    CHECK(ledger.count() == 0);
}

TEST_CASE("a small ssd step decreases L_SSD on fixed targets") {
    Rng rng(11);
    const auto inst = sample_instance(Task::TSP, 6, rng);
    const auto params = init_params_for(inst, 6, 15);
    const Trajectory greedy = greedy_trajectory(params, inst);
    std::vector<Trajectory> targets;
    for (int i = 0; i < 3; ++i) targets.push_back(sample_symmetric(inst, greedy, rng));

    const auto bundle = grad_ssd(params, inst, targets);
    bool decreased = false;
    for (double eta : {1e-3, 1e-4}) {
        PolicyParams stepped = params;
        for (std::size_t i = 0; i < stepped.values.size(); ++i) stepped.values[i] -= eta * bundle.grad[i];
        const auto after = grad_ssd(stepped, inst, targets);
        if (after.loss < bundle.loss) decreased = true;
    }
    CHECK(decreased);
}

TEST_CASE("train: budget arithmetic and grid recording") {
    TrainConfig config = tiny_config(Method::RlOnly);
    config.batch_size = 20;
    config.k_max = 200;
    config.grid = 20;  // record at every step
    const auto result = train(config);
    CHECK(result.rl_steps == 10);
    CHECK(result.ssd_steps == 0);
    CHECK(result.reward_calls == 200);
    CHECK(result.history.records.size() == 10);
    for (std::size_t i = 1; i < result.history.records.size(); ++i) {
        CHECK(result.history.records[i].k > result.history.records[i - 1].k);
    }

    TrainConfig sym = config;
    sym.method = Method::Symrd;
    const auto sym_result = train(sym);
    CHECK(sym_result.rl_steps == 10);
    CHECK(sym_result.ssd_steps == 10);  // x = 1: one free distillation per RL step
    CHECK(sym_result.reward_calls == 200);
    // Budget fairness: identical reward-call grids.
    REQUIRE(sym_result.history.records.size() == result.history.records.size());
    for (std::size_t i = 0; i < result.history.records.size(); ++i) {
        CHECK(sym_result.history.records[i].k == result.history.records[i].k);
    }
}

TEST_CASE("train: distill_period spaces out ssd steps") {
    TrainConfig config = tiny_config(Method::Symrd);
    config.distill_period = 5;
    const auto result = train(config);
    CHECK(result.rl_steps == 10);
    CHECK(result.ssd_steps == 2);
}

TEST_CASE("train: bit-identical reruns") {
    const TrainConfig config = tiny_config(Method::Symrd);
    const auto a = train(config);
    const auto b = train(config);
    CHECK(a.history.same_results(b.history));
    CHECK(a.params.values == b.params.values);
    CHECK(a.reward_calls == b.reward_calls);
}

TEST_CASE("train: maxent with alpha=0 reproduces the critic method exactly") {
    TrainConfig a = tiny_config(Method::RlOnly);
    TrainConfig b = tiny_config(Method::MaxEnt);
    b.alpha = 0.0;
    const auto ra = train(a);
    const auto rb = train(b);
    CHECK(ra.params.values == rb.params.values);
}

TEST_CASE("train: ledger event log matches per-step arithmetic") {
    TrainConfig config = tiny_config(Method::RlOnly);
    const auto result = train(config);
    REQUIRE(result.ledger_events.size() == result.rl_steps);
    for (std::size_t i = 0; i < result.ledger_events.size(); ++i) {
        CHECK(result.ledger_events[i].first == i + 1);
        CHECK(result.ledger_events[i].second == (i + 1) * static_cast<std::uint64_t>(config.batch_size));
    }
}

TEST_CASE("lr schedule: decays by gamma at the configured budget fractions") {
    TrainConfig config = default_config(Task::TSP);
    config.lr = 0.1;
    config.k_max = 1000;
    CHECK(lr_at(config, 0) == doctest::Approx(0.1));
    CHECK(lr_at(config, 499) == doctest::Approx(0.1));
    CHECK(lr_at(config, 500) == doctest::Approx(0.01));
    CHECK(lr_at(config, 750) == doctest::Approx(0.001));
}

TEST_CASE("config: text round trip and validation") {
    TrainConfig config = default_config(Task::CVRP);
    config.method = Method::MultiStart;
    config.k_max = 5000;
    config.lr = 0.25;
    config.lr_milestones = {0.4, 0.8};
    const TrainConfig back = parse_config_text(config_to_text(config));
    CHECK(back.task == config.task);
    CHECK(back.method == config.method);
    CHECK(back.k_max == config.k_max);
    CHECK(back.lr == config.lr);
    CHECK(back.lr_milestones == config.lr_milestones);

    CHECK_THROWS_AS(parse_config_text("task=tsp\nnot_a_key=1\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config_text("task=tsp\nbatch_size=0\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config_text("task=tsp\nbatch_size=200\nk_max=100\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config_text("task=tsp\nn=abc\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config_text("task=knapsack\n"), InvalidArgument);

    // FFSP defaults to the larger distillation scaler unless overridden.
    CHECK(parse_config_text("task=ffsp\n").distill_scaler == 0.01);
    CHECK(parse_config_text("task=ffsp\ndistill_scaler=0.5\n").distill_scaler == 0.5);
    CHECK(parse_config_text("task=tsp\n").distill_scaler == 0.001);
}

TEST_CASE("train: best_sampled distillation targets run end to end") {
    TrainConfig config = tiny_config(Method::Symrd);
    config.distill_target = "best_sampled";
    const auto result = train(config);
    CHECK(result.ssd_steps == 10);
    CHECK(result.reward_calls == 200);
}
