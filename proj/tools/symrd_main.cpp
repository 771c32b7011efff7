#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "symrd/env.hpp"
#include "symrd/instance.hpp"
#include "symrd/metrics.hpp"
#include "symrd/policy.hpp"
#include "symrd/symmetry.hpp"
#include "symrd/training.hpp"
#include "symrd/verify.hpp"

namespace fs = std::filesystem;
using namespace symrd;

namespace {

constexpr const char* kVersion = "symrd 0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitIo = 4;

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << "# symrd run manifest v1\n";
    out << "version=" << kVersion << "\n";
    for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
}

// Exclusive lock on an output directory; concurrent runs must not share one.
class DirLock {
  public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (fs::exists(path_)) throw IoError("output directory is locked: " + path_.string());
        std::ofstream lock(path_);
        if (!lock) throw IoError("cannot create lockfile: " + path_.string());
        lock << timestamp() << "\n";
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

  private:
    fs::path path_;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr const char* kHistoryHeader = "method,task,n,seed,k,val_cost,l1_gap,ssd_loss,wall_ms";

void write_history_csv(const std::string& path, const TrainConfig& config, const TrainHistory& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write history: " + path);
    out << "# symrd-history v1\n" << kHistoryHeader << "\n";
    for (const auto& rec : history.records) {
        out << method_name(config.method) << ',' << task_name(config.task) << ',' << config.n << ','
            << config.seed << ',' << rec.k << ',' << format_double(rec.val_cost) << ','
            << format_double(rec.l1_gap) << ',' << format_double(rec.ssd_loss) << ','
            << format_double(rec.wall_ms) << "\n";
    }
}

int cmd_gen_data(const std::string& task_str, int n, int count, std::uint64_t seed, const std::string& out_path) {
    Task task;
    try {
        task = task_from_name(task_str);
    } catch (const FormatError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (count < 1) {
        std::cerr << "usage error: count must be >= 1\n";
        return kExitUsage;
    }
    const Dataset ds = generate(task, n, count, seed);
    save(ds, out_path);
    const std::uint64_t hash = file_hash(out_path);
    char hash_str[32];
    std::snprintf(hash_str, sizeof(hash_str), "%016llx", static_cast<unsigned long long>(hash));
    write_manifest(out_path + ".manifest",
                   {{"command", "gen-data"},
                    {"task", task_str},
                    {"n", std::to_string(n)},
                    {"count", std::to_string(count)},
                    {"seed", std::to_string(seed)},
                    {"output", out_path},
                    {"dataset_hash", hash_str},
                    {"created", timestamp()}});
    std::cout << out_path << " " << hash_str << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    const TrainConfig config = load_config(config_path);
    DirLock lock(out_dir);
    const std::string started = timestamp();
    const TrainResult result = train(config, out_dir);

    const std::string csv_path = out_dir + "/history.csv";
    write_history_csv(csv_path, config, result.history);
    const std::string ckpt_path = out_dir + "/final_checkpoint.json";
    save_checkpoint(result.params, result.reward_calls, ckpt_path);

    std::vector<std::pair<std::string, std::string>> manifest{
        {"command", "train"},
        {"config_path", config_path},
        {"started", started},
        {"finished", timestamp()},
        {"history", csv_path},
        {"final_checkpoint", ckpt_path},
        {"reward_calls", std::to_string(result.reward_calls)},
        {"rl_steps", std::to_string(result.rl_steps)},
        {"ssd_steps", std::to_string(result.ssd_steps)},
    };
    if (!config.val_dataset.empty()) {
        char hash_str[32];
        std::snprintf(hash_str, sizeof(hash_str), "%016llx",
                      static_cast<unsigned long long>(file_hash(config.val_dataset)));
        manifest.emplace_back("val_dataset_hash", hash_str);
    }
    std::istringstream cfg(config_to_text(config));
    std::string line;
    while (std::getline(cfg, line)) manifest.emplace_back("config." + line.substr(0, line.find('=')),
                                                          line.substr(line.find('=') + 1));
    write_manifest(out_dir + "/manifest.txt", manifest);
    std::cout << "history " << csv_path << " rows " << result.history.records.size() << " reward_calls "
              << result.reward_calls << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path, const std::string& out_path,
             int l1_draws, bool with_optimality_gap, std::uint64_t seed) {
    const auto [params, k] = load_checkpoint(checkpoint_path);
    const Dataset ds = load(dataset_path);
    Rng rng(seed);

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write metrics: " + out_path);
    auto record = [&](const std::string& name, double value) {
        out << "{\"name\":\"" << name << "\",\"k\":" << k << ",\"value\":" << format_double(value)
            << ",\"instances\":" << ds.instances.size() << ",\"seed\":" << seed << "}\n";
        std::cout << name << " " << format_double(value) << "\n";
    };
    record("val_cost", validate_cost(params, ds));
    if (l1_draws > 0) record("l1_symmetry_gap", l1_symmetry_gap(params, ds.instances, l1_draws, rng));
    if (with_optimality_gap) record("optimality_gap", optimality_gap(params, ds.instances));
    write_manifest(out_path + ".manifest", {{"command", "eval"},
                                            {"checkpoint", checkpoint_path},
                                            {"dataset", dataset_path},
                                            {"output", out_path},
                                            {"created", timestamp()}});
    return kExitOk;
}

int cmd_verify(const std::string& task_str, int n, int trials, std::uint64_t seed, bool corrupt) {
    VerifyOptions opts;
    try {
        opts.task = task_from_name(task_str);
    } catch (const FormatError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (trials < 1) {
        std::cerr << "usage error: trials must be >= 1\n";
        return kExitUsage;
    }
    opts.n = n;
    opts.trials = trials;
    opts.seed = seed;
    opts.corrupt_transform = corrupt;
    const auto results = run_verify(opts);
    for (const auto& suite : results) {
        std::cout << (suite.passed ? "PASS" : "FAIL") << " " << suite.name << ": " << suite.detail << "\n";
    }
    return all_passed(results) ? kExitOk : kExitVerify;
}

int cmd_compare(const std::string& config_dir, int seeds, const std::string& out_path) {
    std::vector<fs::path> config_files;
    for (const auto& entry : fs::directory_iterator(config_dir)) {
        if (entry.is_regular_file() && entry.path().extension() != ".manifest") {
            config_files.push_back(entry.path());
        }
    }
    std::sort(config_files.begin(), config_files.end());
    if (config_files.size() < 2) {
        std::cerr << "config error: compare needs at least 2 method configs in " << config_dir << "\n";
        return kExitConfig;
    }
    if (seeds < 1) {
        std::cerr << "usage error: seeds must be >= 1\n";
        return kExitUsage;
    }

    struct MethodRuns {
        TrainConfig config;
        std::vector<TrainHistory> histories;
    };
    std::vector<MethodRuns> runs;
    for (const auto& path : config_files) {
        MethodRuns mr;
        mr.config = load_config(path.string());
        for (int s = 0; s < seeds; ++s) {
            TrainConfig c = mr.config;
            c.seed = mr.config.seed + static_cast<std::uint64_t>(s);
            mr.histories.push_back(train(c).history);
        }
        runs.push_back(std::move(mr));
    }

    // Budget fairness: every run must visit the same reward-call grid.
    const auto& reference = runs.front().histories.front().records;
    for (const auto& mr : runs) {
        for (const auto& h : mr.histories) {
            if (h.records.size() != reference.size()) {
                std::cerr << "config error: reward-call grids differ between runs\n";
                return kExitConfig;
            }
            for (std::size_t i = 0; i < reference.size(); ++i) {
                if (h.records[i].k != reference[i].k) {
                    std::cerr << "config error: reward-call grids differ between runs\n";
                    return kExitConfig;
                }
            }
        }
    }

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write summary: " + out_path);
    out << "# symrd-compare v1 (std = sample standard deviation, n-1)\n";
    out << "method,task,n,k,mean_val_cost,std_val_cost,seeds\n";
    for (const auto& mr : runs) {
        for (std::size_t i = 0; i < reference.size(); ++i) {
            double mean = 0.0;
            for (const auto& h : mr.histories) mean += h.records[i].val_cost;
            mean /= seeds;
            double var = 0.0;
            for (const auto& h : mr.histories) {
                const double d = h.records[i].val_cost - mean;
                var += d * d;
            }
            const double stddev = seeds > 1 ? std::sqrt(var / (seeds - 1)) : 0.0;
            out << method_name(mr.config.method) << ',' << task_name(mr.config.task) << ',' << mr.config.n
                << ',' << mr.histories.front().records[i].k << ',' << format_double(mean) << ','
                << format_double(stddev) << ',' << seeds << "\n";
        }
    }
    write_manifest(out_path + ".manifest", {{"command", "compare"},
                                            {"config_dir", config_dir},
                                            {"seeds", std::to_string(seeds)},
                                            {"output", out_path},
                                            {"created", timestamp()}});
    std::cout << "summary " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SymRD: symmetric reinforcement distillation for combinatorial optimization"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "Generate a dataset file");
    std::string gen_task = "tsp", gen_out = "dataset.jsonl";
    int gen_n = 20, gen_count = 100;
    std::uint64_t gen_seed = 1;
    gen->add_option("--task", gen_task, "tsp|atsp|cvrp|ffsp");
    gen->add_option("--n", gen_n, "instance size (cities/customers/jobs)");
    gen->add_option("--count", gen_count, "number of instances");
    gen->add_option("--seed", gen_seed, "dataset seed");
    gen->add_option("--out", gen_out, "output path");

    auto* tr = app.add_subcommand("train", "Run a training configuration");
    std::string tr_config, tr_out = "run";
    tr->add_option("--config", tr_config, "config file (key=value)")->required();
    tr->add_option("--out", tr_out, "output directory");

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    std::string ev_ckpt, ev_data, ev_out = "metrics.jsonl";
    int ev_l1_draws = 10;
    bool ev_gap = false;
    std::uint64_t ev_seed = 1;
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--dataset", ev_data)->required();
    ev->add_option("--out", ev_out);
    ev->add_option("--l1-draws", ev_l1_draws, "symmetric draws per instance (0 disables)");
    ev->add_flag("--optimality-gap", ev_gap, "compare against the exact oracle (tiny instances)");
    ev->add_option("--seed", ev_seed);

    auto* vf = app.add_subcommand("verify", "Run the property suites");
    std::string vf_task = "tsp";
    int vf_n = 6, vf_trials = 200;
    std::uint64_t vf_seed = 1;
    bool vf_corrupt = false;
    vf->add_option("--task", vf_task);
    vf->add_option("--n", vf_n);
    vf->add_option("--trials", vf_trials);
    vf->add_option("--seed", vf_seed);
    vf->add_flag("--corrupt-transform", vf_corrupt,
                 "negative control: corrupt transforms so preservation must fail");

    auto* cp = app.add_subcommand("compare", "Train several configs over seeds and summarize");
    std::string cp_dir, cp_out = "summary.csv";
    int cp_seeds = 4;
    cp->add_option("--config-dir", cp_dir)->required();
    cp->add_option("--seeds", cp_seeds);
    cp->add_option("--out", cp_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_task, gen_n, gen_count, gen_seed, gen_out);
        if (tr->parsed()) return cmd_train(tr_config, tr_out);
        if (ev->parsed()) return cmd_eval(ev_ckpt, ev_data, ev_out, ev_l1_draws, ev_gap, ev_seed);
        if (vf->parsed()) return cmd_verify(vf_task, vf_n, vf_trials, vf_seed, vf_corrupt);
        if (cp->parsed()) return cmd_compare(cp_dir, cp_seeds, cp_out);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitUsage;
}
