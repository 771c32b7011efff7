#include "symrd/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace symrd {

using nlohmann::json;

const char* task_name(Task t) {
    switch (t) {
        case Task::TSP: return "tsp";
        case Task::ATSP: return "atsp";
        case Task::CVRP: return "cvrp";
        case Task::FFSP: return "ffsp";
    }
    throw InvalidArgument("unknown task enum value");
}

Task task_from_name(const std::string& name) {
    if (name == "tsp") return Task::TSP;
    if (name == "atsp") return Task::ATSP;
    if (name == "cvrp") return Task::CVRP;
    if (name == "ffsp") return Task::FFSP;
    throw FormatError("unknown task tag: '" + name + "'");
}

namespace {

void check_coords(const std::vector<Point>& coords) {
    for (const auto& p : coords) {
        if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
            throw InvalidArgument("coordinates must lie in [0,1]^2");
        }
    }
}

}  // namespace

ProblemInstance ProblemInstance::tsp(std::vector<Point> coords) {
    if (coords.empty()) throw InvalidArgument("tsp: empty coordinate list");
    check_coords(coords);
    ProblemInstance inst;
    inst.task_ = Task::TSP;
    inst.n_ = static_cast<int>(coords.size());
    inst.coords_ = std::move(coords);
    return inst;
}

ProblemInstance ProblemInstance::atsp(std::vector<std::vector<double>> dist) {
    const int n = static_cast<int>(dist.size());
    if (n == 0) throw InvalidArgument("atsp: empty distance matrix");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(dist[i].size()) != n) throw InvalidArgument("atsp: matrix not square");
        if (dist[i][i] != 0.0) throw InvalidArgument("atsp: diagonal must be exactly zero");
        for (double v : dist[i]) {
            if (!(v >= 0.0)) throw InvalidArgument("atsp: distances must be nonnegative");
        }
    }
    ProblemInstance inst;
    inst.task_ = Task::ATSP;
    inst.n_ = n;
    inst.dist_ = std::move(dist);
    return inst;
}

ProblemInstance ProblemInstance::cvrp(std::vector<Point> coords, std::vector<int> demands, int capacity) {
    if (coords.size() != demands.size() + 1) {
        throw InvalidArgument("cvrp: coords must hold depot + one point per customer");
    }
    if (demands.empty()) throw InvalidArgument("cvrp: no customers");
    check_coords(coords);
    for (int d : demands) {
        if (d < 1) throw InvalidArgument("cvrp: demands must be >= 1");
        if (d > capacity) throw InvalidArgument("cvrp: demand exceeds vehicle capacity");
    }
    ProblemInstance inst;
    inst.task_ = Task::CVRP;
    inst.n_ = static_cast<int>(demands.size());
    inst.coords_ = std::move(coords);
    inst.demands_ = std::move(demands);
    inst.capacity_ = capacity;
    return inst;
}

ProblemInstance ProblemInstance::ffsp(std::vector<std::vector<std::vector<int>>> proc) {
    if (proc.empty()) throw InvalidArgument("ffsp: need at least one stage");
    int jobs = -1;
    for (const auto& stage : proc) {
        if (stage.empty()) throw InvalidArgument("ffsp: stage with no machines");
        for (const auto& machine : stage) {
            if (jobs < 0) jobs = static_cast<int>(machine.size());
            if (static_cast<int>(machine.size()) != jobs) {
                throw InvalidArgument("ffsp: inconsistent job counts across machines");
            }
            for (int p : machine) {
                if (p < 1) throw InvalidArgument("ffsp: processing times must be >= 1");
            }
        }
    }
    if (jobs < 1) throw InvalidArgument("ffsp: no jobs");
    ProblemInstance inst;
    inst.task_ = Task::FFSP;
    inst.n_ = jobs;
    inst.proc_ = std::move(proc);
    return inst;
}

int ProblemInstance::total_machines() const {
    int total = 0;
    for (const auto& stage : proc_) total += static_cast<int>(stage.size());
    return total;
}

double ProblemInstance::dist(int a, int b) const {
    if (task_ == Task::ATSP) return dist_[a][b];
    const double dx = coords_[a][0] - coords_[b][0];
    const double dy = coords_[a][1] - coords_[b][1];
    return std::sqrt(dx * dx + dy * dy);
}

bool ProblemInstance::operator==(const ProblemInstance& other) const {
    return task_ == other.task_ && n_ == other.n_ && coords_ == other.coords_ && dist_ == other.dist_ &&
           demands_ == other.demands_ && capacity_ == other.capacity_ && proc_ == other.proc_;
}

bool Dataset::operator==(const Dataset& other) const {
    return task == other.task && n == other.n && seed == other.seed && instances == other.instances;
}

int cvrp_capacity_for(int n) {
    if (n <= 20) return 30;
    if (n <= 50) return 40;
    return 50;
}

namespace {

constexpr int kFfspStages = 3;
constexpr int kFfspMachinesPerStage = 4;

ProblemInstance generate_one(Task task, int n, Rng& rng) {
    switch (task) {
        case Task::TSP: {
            std::vector<Point> coords(n);
            for (auto& p : coords) {
                p[0] = rng.uniform();
                p[1] = rng.uniform();
            }
            return ProblemInstance::tsp(std::move(coords));
        }
        case Task::ATSP: {
            std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (i != j) dist[i][j] = rng.uniform();
                }
            }
            return ProblemInstance::atsp(std::move(dist));
        }
        case Task::CVRP: {
            std::vector<Point> coords(n + 1);
            for (auto& p : coords) {
                p[0] = rng.uniform();
                p[1] = rng.uniform();
            }
            std::vector<int> demands(n);
            for (auto& d : demands) d = rng.uniform_int(1, 9);
            return ProblemInstance::cvrp(std::move(coords), std::move(demands), cvrp_capacity_for(n));
        }
        case Task::FFSP: {
            std::vector<std::vector<std::vector<int>>> proc(
                kFfspStages, std::vector<std::vector<int>>(kFfspMachinesPerStage, std::vector<int>(n)));
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

}  // namespace

ProblemInstance sample_instance(Task task, int n, Rng& rng) { return generate_one(task, n, rng); }

Dataset generate(Task task, int n, int count, std::uint64_t seed) {
    const int min_n = task == Task::FFSP ? 2 : 3;
    if (n < min_n) {
        throw InvalidArgument(std::string("generate: size below minimum for ") + task_name(task));
    }
    if (count < 1) throw InvalidArgument("generate: count must be >= 1");

    Dataset ds;
    ds.task = task;
    ds.n = n;
    ds.seed = seed;
    ds.instances.reserve(count);
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        ds.instances.push_back(generate_one(task, n, rng));
    }
    return ds;
}

namespace {

constexpr int kDatasetVersion = 1;

json instance_to_json(const ProblemInstance& inst) {
    json j;
    switch (inst.task()) {
        case Task::TSP:
            j["coords"] = inst.coords();
            break;
        case Task::ATSP:
            j["dist"] = inst.atsp_dist();
            break;
        case Task::CVRP:
            j["coords"] = inst.coords();
            j["demands"] = inst.demands();
            j["capacity"] = inst.capacity();
            break;
        case Task::FFSP:
            j["proc"] = inst.proc();
            break;
    }
    return j;
}

ProblemInstance instance_from_json(Task task, const json& j) {
    switch (task) {
        case Task::TSP:
            return ProblemInstance::tsp(j.at("coords").get<std::vector<Point>>());
        case Task::ATSP:
            return ProblemInstance::atsp(j.at("dist").get<std::vector<std::vector<double>>>());
        case Task::CVRP:
            return ProblemInstance::cvrp(j.at("coords").get<std::vector<Point>>(),
                                         j.at("demands").get<std::vector<int>>(), j.at("capacity").get<int>());
        case Task::FFSP:
            return ProblemInstance::ffsp(j.at("proc").get<std::vector<std::vector<std::vector<int>>>>());
    }
    throw FormatError("unknown task in dataset");
}

}  // namespace

void save(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    json header;
    header["format"] = "symrd-dataset";
    header["version"] = kDatasetVersion;
    header["task"] = task_name(dataset.task);
    header["n"] = dataset.n;
    header["count"] = dataset.instances.size();
    header["seed"] = dataset.seed;
    out << header.dump() << '\n';
    for (const auto& inst : dataset.instances) {
        out << instance_to_json(inst).dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Dataset load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty dataset file: " + path);

    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad dataset header: ") + e.what());
    }

    Dataset ds;
    try {
        if (header.at("format").get<std::string>() != "symrd-dataset") {
            throw FormatError("not a symrd dataset file");
        }
        if (header.at("version").get<int>() != kDatasetVersion) {
            throw FormatError("unsupported dataset format version");
        }
        ds.task = task_from_name(header.at("task").get<std::string>());
        ds.n = header.at("n").get<int>();
        ds.seed = header.at("seed").get<std::uint64_t>();
        const auto count = header.at("count").get<std::size_t>();
        ds.instances.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line)) {
                throw FormatError("truncated dataset file: expected " + std::to_string(count) + " instances, got " +
                                  std::to_string(i));
            }
            ds.instances.push_back(instance_from_json(ds.task, json::parse(line)));
        }
    } catch (const FormatError&) {
        throw;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed dataset: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("invalid instance in dataset: ") + e.what());
    }
    return ds;
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

}  // namespace symrd
