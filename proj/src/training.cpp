#include "symrd/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "symrd/metrics.hpp"
#include "symrd/symmetry.hpp"

namespace symrd {

const char* method_name(Method m) {
    switch (m) {
        case Method::RlOnly: return "rl_only";
        case Method::Symrd: return "symrd";
        case Method::MaxEnt: return "maxent";
        case Method::MultiStart: return "multistart";
        case Method::NonsymDistill: return "nonsym_distill";
    }
    throw InvalidArgument("unknown method enum value");
}

Method method_from_name(const std::string& name) {
    if (name == "rl_only") return Method::RlOnly;
    if (name == "symrd") return Method::Symrd;
    if (name == "maxent") return Method::MaxEnt;
    if (name == "multistart") return Method::MultiStart;
    if (name == "nonsym_distill") return Method::NonsymDistill;
    throw InvalidArgument("unknown method: '" + name + "'");
}

const char* transform_name(TransformPolicy t) {
    return t == TransformPolicy::Uniform ? "uniform" : "identity";
}

TransformPolicy transform_from_name(const std::string& name) {
    if (name == "uniform") return TransformPolicy::Uniform;
    if (name == "identity") return TransformPolicy::Identity;
    throw InvalidArgument("unknown transform policy: '" + name + "'");
}

TrainConfig default_config(Task task) {
    TrainConfig config;
    config.task = task;
    if (task == Task::FFSP) {
        config.distill_scaler = 0.01;  // makespans are an order of magnitude larger
        config.n = 20;
    }
    return config;
}

void validate_config(const TrainConfig& config) {
    if (config.n < (config.task == Task::FFSP ? 2 : 3)) throw InvalidArgument("config: n below task minimum");
    if (config.batch_size < 1) throw InvalidArgument("config: batch_size must be >= 1");
    if (config.k_max < static_cast<std::uint64_t>(config.batch_size)) {
        throw InvalidArgument("config: k_max must be >= batch_size");
    }
    if (config.distill_scaler < 0.0) throw InvalidArgument("config: distill_scaler must be >= 0");
    if (config.transform_width < 1) throw InvalidArgument("config: transform_width must be >= 1");
    if (config.distill_period < 1) throw InvalidArgument("config: distill_period must be >= 1");
    if (config.lr < 0.0) throw InvalidArgument("config: lr must be >= 0");
    if (config.lr_gamma <= 0.0) throw InvalidArgument("config: lr_gamma must be > 0");
    if (config.multistart_p < 1) throw InvalidArgument("config: multistart_p must be >= 1");
    if (config.val_count < 1 && config.val_dataset.empty()) {
        throw InvalidArgument("config: val_count must be >= 1");
    }
    if (config.policy_dim < 2) throw InvalidArgument("config: policy_dim must be >= 2");
    if (config.l1_instances < 0 || config.l1_draws < 0) {
        throw InvalidArgument("config: l1 settings must be nonnegative");
    }
    if (config.distill_target != "greedy" && config.distill_target != "best_sampled") {
        throw InvalidArgument("config: distill_target must be greedy or best_sampled");
    }
    for (double f : config.lr_milestones) {
        if (f <= 0.0 || f > 1.0) throw InvalidArgument("config: lr milestones are fractions in (0,1]");
    }
}

std::uint64_t effective_grid(const TrainConfig& config) {
    if (config.grid > 0) return config.grid;
    return std::max<std::uint64_t>(config.k_max / 50, config.batch_size);
}

double lr_at(const TrainConfig& config, std::uint64_t reward_calls) {
    double lr = config.lr;
    for (double f : config.lr_milestones) {
        if (static_cast<double>(reward_calls) >= f * static_cast<double>(config.k_max)) lr *= config.lr_gamma;
    }
    return lr;
}

bool TrainHistory::same_results(const TrainHistory& other) const {
    if (records.size() != other.records.size()) return false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = other.records[i];
        if (a.k != b.k || a.val_cost != b.val_cost || a.train_mean_reward != b.train_mean_reward ||
            a.ssd_loss != b.ssd_loss || a.l1_gap != b.l1_gap) {
            return false;
        }
    }
    return true;
}

namespace {

void apply_sgd(PolicyParams& params, const std::vector<double>& grad, double lr) {
    for (std::size_t i = 0; i < params.values.size(); ++i) params.values[i] -= lr * grad[i];
}

}  // namespace

StepStats rl_step(PolicyParams& params, std::span<const ProblemInstance> batch, const TrainConfig& config,
                  double lr, Rng& rollout_rng, BudgetLedger& ledger) {
    if (batch.empty()) throw InvalidArgument("rl_step: empty batch");
    StepStats stats;
    std::vector<double> grad(params.values.size(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (const auto& inst : batch) {
        PolicyEvaluator ev(params, inst);
        if (config.method == Method::MultiStart) {
            const int p = config.multistart_p;
            std::vector<Trajectory> trajs(p);
            std::vector<double> rewards(p);
            double mean_reward = 0.0;
            // Sampling and reward first; the shared baseline is their mean.
            for (int i = 0; i < p; ++i) {
                ev.sample(trajs[i], rollout_rng, false);
                rewards[i] = episodic_reward(inst, trajs[i], ledger);
                mean_reward += rewards[i];
            }
            mean_reward /= p;
            int best = 0;
            for (int i = 0; i < p; ++i) {
                const double advantage = rewards[i] - mean_reward;
                const double logp = ev.replay(trajs[i], true);
                ev.add_logprob_grad(-advantage * inv_batch / p, grad);  // d(-A log pi)
                stats.loss += -advantage * logp * inv_batch / p;
                if (rewards[i] > rewards[best]) best = i;
                stats.mean_reward += rewards[i] * inv_batch / p;
            }
            stats.reward_calls += p;
            stats.best_samples.push_back(std::move(trajs[best]));
        } else {
            Trajectory traj;
            const double logp = ev.sample(traj, rollout_rng, true);
            const double reward = episodic_reward(inst, traj, ledger);
            const double value = ev.critic();
            double advantage = reward - value;
            if (config.method == Method::MaxEnt) advantage += config.alpha * (-logp);
            ev.add_logprob_grad(-advantage * inv_batch, grad);  // d(-A log pi)
            ev.add_critic_grad(2.0 * (value - reward) * config.critic_coef * inv_batch, grad);
            stats.loss += (-advantage * logp + config.critic_coef * (value - reward) * (value - reward)) * inv_batch;
            stats.mean_reward += reward * inv_batch;
            stats.reward_calls += 1;
            stats.best_samples.push_back(std::move(traj));
        }
    }
    apply_sgd(params, grad, lr);
    return stats;
}

SsdStats ssd_step(PolicyParams& params, std::span<const ProblemInstance> batch,
                  const std::vector<Trajectory>* targets, double distill_scaler, int width,
                  TransformPolicy transform, double lr, Rng& transform_rng, BudgetLedger& ledger) {
    if (batch.empty()) throw InvalidArgument("ssd_step: empty batch");
    if (width < 1) throw InvalidArgument("ssd_step: width must be >= 1");
    if (targets && targets->size() != batch.size()) {
        throw InvalidArgument("ssd_step: one target per instance required");
    }
    (void)ledger;  // distillation is free: never touched

    SsdStats stats;
    std::vector<double> grad(params.values.size(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& inst = batch[b];
        PolicyEvaluator ev(params, inst);
        Trajectory target;
        if (targets) {
            target = (*targets)[b];
        } else {
            ev.greedy(target);
        }
        for (int i = 0; i < width; ++i) {
            const Trajectory imitation = transform == TransformPolicy::Uniform
                                             ? sample_symmetric(inst, target, transform_rng)
                                             : target;
            const double logp = ev.replay(imitation, true);
            stats.loss += -logp * inv_batch;
            ev.add_logprob_grad(-distill_scaler * inv_batch, grad);
        }
    }
    if (distill_scaler > 0.0) apply_sgd(params, grad, lr);
    return stats;
}

SsdStats nonsym_distill_step(PolicyParams& params, std::span<const ProblemInstance> batch,
                             const std::vector<Trajectory>* targets, double distill_scaler, int width, double lr,
                             Rng& rng, BudgetLedger& ledger) {
    return ssd_step(params, batch, targets, distill_scaler, width, TransformPolicy::Identity, lr, rng, ledger);
}

TrainResult train(const TrainConfig& config, const std::string& checkpoint_dir) {
    validate_config(config);

    const Rng root(config.seed);
    Rng data_rng = root.fork(stream::data);
    Rng rollout_rng = root.fork(stream::rollout);
    Rng transform_rng = root.fork(stream::transform);
    Rng eval_rng = root.fork(stream::val_data);

    Dataset val;
    if (!config.val_dataset.empty()) {
        val = load(config.val_dataset);
        if (val.task != config.task) throw InvalidArgument("validation dataset task does not match config");
    } else {
        val = generate(config.task, config.n, config.val_count, config.val_seed);
    }

    TrainResult result;
    std::vector<int> mps;
    if (config.task == Task::FFSP) {
        Rng probe(0);
        const ProblemInstance shape = sample_instance(config.task, config.n, probe);
        for (int s = 0; s < shape.num_stages(); ++s) mps.push_back(shape.machines_at(s));
    }
    result.params = init_params(config.task, config.policy_dim, root.fork(stream::init).next_u64(), mps);

    BudgetLedger ledger;
    const std::uint64_t grid = effective_grid(config);
    std::uint64_t next_grid = grid;
    const bool distills = config.method == Method::Symrd || config.method == Method::NonsymDistill;
    const auto t0 = std::chrono::steady_clock::now();

    double last_ssd_loss = 0.0;
    std::uint64_t step = 0;
    while (ledger.count() < config.k_max) {
        ++step;
        const double lr = lr_at(config, ledger.count());

        std::vector<ProblemInstance> batch;
        batch.reserve(config.batch_size);
        for (int i = 0; i < config.batch_size; ++i) {
            batch.push_back(sample_instance(config.task, config.n, data_rng));
        }

        StepStats rl = rl_step(result.params, batch, config, lr, rollout_rng, ledger);
        ++result.rl_steps;

        if (distills && step % static_cast<std::uint64_t>(config.distill_period) == 0) {
            const TransformPolicy tp =
                config.method == Method::NonsymDistill ? TransformPolicy::Identity : config.transform;
            const std::vector<Trajectory>* targets = nullptr;
            if (config.distill_target == "best_sampled") targets = &rl.best_samples;
            SsdStats ssd = ssd_step(result.params, batch, targets, config.distill_scaler, config.transform_width,
                                    tp, lr, transform_rng, ledger);
            last_ssd_loss = ssd.loss;
            ++result.ssd_steps;
        }
        ledger.note_step(step);

        if (ledger.count() >= next_grid) {
            HistoryRecord rec;
            rec.k = ledger.count();
            rec.val_cost = validate_cost(result.params, val);
            rec.train_mean_reward = rl.mean_reward;
            rec.ssd_loss = last_ssd_loss;
            if (config.l1_instances > 0 && config.l1_draws > 0) {
                const std::size_t count = std::min<std::size_t>(config.l1_instances, val.instances.size());
                rec.l1_gap = l1_symmetry_gap(
                    result.params, std::span<const ProblemInstance>(val.instances.data(), count),
                    config.l1_draws, eval_rng);
            }
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            result.history.records.push_back(rec);
            if (config.save_checkpoints && !checkpoint_dir.empty()) {
                save_checkpoint(result.params, rec.k,
                                checkpoint_dir + "/checkpoint_k" + std::to_string(rec.k) + ".json");
            }
            while (next_grid <= ledger.count()) next_grid += grid;
        }
    }
    result.reward_calls = ledger.count();
    result.ledger_events = ledger.events();
    return result;
}

namespace {

std::vector<double> parse_fraction_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string fraction_list_to_text(const std::vector<double>& fs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (i) out << ',';
        out << fs[i];
    }
    return out.str();
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidArgument("config: expected boolean, got '" + v + "'");
}

void apply_key(TrainConfig& config, const std::string& key, const std::string& value) {
    if (key == "task") {
        config.task = task_from_name(value);
    } else if (key == "n") {
        config.n = std::stoi(value);
    } else if (key == "method") {
        config.method = method_from_name(value);
    } else if (key == "batch_size") {
        config.batch_size = std::stoi(value);
    } else if (key == "k_max") {
        config.k_max = std::stoull(value);
    } else if (key == "distill_scaler") {
        config.distill_scaler = std::stod(value);
    } else if (key == "transform_width") {
        config.transform_width = std::stoi(value);
    } else if (key == "distill_period") {
        config.distill_period = std::stoi(value);
    } else if (key == "transform") {
        config.transform = transform_from_name(value);
    } else if (key == "lr") {
        config.lr = std::stod(value);
    } else if (key == "lr_milestones") {
        config.lr_milestones = parse_fraction_list(value);
    } else if (key == "lr_gamma") {
        config.lr_gamma = std::stod(value);
    } else if (key == "alpha") {
        config.alpha = std::stod(value);
    } else if (key == "critic_coef") {
        config.critic_coef = std::stod(value);
    } else if (key == "multistart_p") {
        config.multistart_p = std::stoi(value);
    } else if (key == "seed") {
        config.seed = std::stoull(value);
    } else if (key == "val_seed") {
        config.val_seed = std::stoull(value);
    } else if (key == "val_count") {
        config.val_count = std::stoi(value);
    } else if (key == "val_dataset") {
        config.val_dataset = value;
    } else if (key == "grid") {
        config.grid = std::stoull(value);
    } else if (key == "policy_dim") {
        config.policy_dim = std::stoi(value);
    } else if (key == "l1_instances") {
        config.l1_instances = std::stoi(value);
    } else if (key == "l1_draws") {
        config.l1_draws = std::stoi(value);
    } else if (key == "save_checkpoints") {
        config.save_checkpoints = parse_bool(value);
    } else if (key == "distill_target") {
        config.distill_target = value;
    } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
    }
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t\r");
        line = line.substr(start, end - start + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("config: expected key=value, got '" + line + "'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    Task task = Task::TSP;
    for (const auto& [k, v] : pairs) {
        if (k == "task") {
            try {
                task = task_from_name(v);
            } catch (const FormatError& e) {
                throw InvalidArgument(e.what());
            }
        }
    }
    TrainConfig config = default_config(task);

    for (const auto& [key, value] : pairs) {
        try {
            apply_key(config, key, value);
        } catch (const InvalidArgument&) {
            throw;
        } catch (const std::exception&) {
            throw InvalidArgument("config: bad value for key '" + key + "': '" + value + "'");
        }
    }
    validate_config(config);
    return config;
}


TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const TrainConfig& config) {
    std::ostringstream out;
    out << "task=" << task_name(config.task) << '\n';
    out << "n=" << config.n << '\n';
    out << "method=" << method_name(config.method) << '\n';
    out << "batch_size=" << config.batch_size << '\n';
    out << "k_max=" << config.k_max << '\n';
    out << "distill_scaler=" << config.distill_scaler << '\n';
    out << "transform_width=" << config.transform_width << '\n';
    out << "distill_period=" << config.distill_period << '\n';
    out << "transform=" << transform_name(config.transform) << '\n';
    out << "lr=" << config.lr << '\n';
    out << "lr_milestones=" << fraction_list_to_text(config.lr_milestones) << '\n';
    out << "lr_gamma=" << config.lr_gamma << '\n';
    out << "alpha=" << config.alpha << '\n';
    out << "critic_coef=" << config.critic_coef << '\n';
    out << "multistart_p=" << config.multistart_p << '\n';
    out << "seed=" << config.seed << '\n';
    out << "val_seed=" << config.val_seed << '\n';
    out << "val_count=" << config.val_count << '\n';
    if (!config.val_dataset.empty()) out << "val_dataset=" << config.val_dataset << '\n';
    out << "grid=" << config.grid << '\n';
    out << "policy_dim=" << config.policy_dim << '\n';
    out << "l1_instances=" << config.l1_instances << '\n';
    out << "l1_draws=" << config.l1_draws << '\n';
    out << "save_checkpoints=" << (config.save_checkpoints ? "true" : "false") << '\n';
    out << "distill_target=" << config.distill_target << '\n';
    return out.str();
}

}  // namespace symrd
