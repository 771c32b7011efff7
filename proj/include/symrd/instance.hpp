#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "symrd/common.hpp"

namespace symrd {

enum class Task { TSP, ATSP, CVRP, FFSP };

const char* task_name(Task t);
Task task_from_name(const std::string& name);  // throws FormatError on unknown name

using Point = std::array<double, 2>;

// Immutable problem data for one instance of any of the four tasks.
//
// Size conventions:
//   TSP/ATSP  n = number of cities; coords has n points (TSP) or dist is n x n (ATSP).
//   CVRP      n = number of customers; coords has n+1 points with the depot at
//             index 0; demands has n entries (customer i is node index i, demand
//             demands[i-1]); the depot has demand 0.
//   FFSP      n = number of jobs; proc[s][m][j] is the processing time of job j
//             on machine m of stage s.
class ProblemInstance {
  public:
    static ProblemInstance tsp(std::vector<Point> coords);
    static ProblemInstance atsp(std::vector<std::vector<double>> dist);
    static ProblemInstance cvrp(std::vector<Point> coords, std::vector<int> demands, int capacity);
    static ProblemInstance ffsp(std::vector<std::vector<std::vector<int>>> proc);

    Task task() const { return task_; }
    int size() const { return n_; }

    const std::vector<Point>& coords() const { return coords_; }
    const std::vector<std::vector<double>>& atsp_dist() const { return dist_; }
    const std::vector<int>& demands() const { return demands_; }
    int capacity() const { return capacity_; }

    // FFSP accessors
    const std::vector<std::vector<std::vector<int>>>& proc() const { return proc_; }
    int num_stages() const { return static_cast<int>(proc_.size()); }
    int machines_at(int stage) const { return static_cast<int>(proc_[stage].size()); }
    int total_machines() const;
    int proc_time(int stage, int machine, int job) const { return proc_[stage][machine][job]; }

    // Travel distance between node indices (euclidean for TSP/CVRP, matrix for ATSP).
    double dist(int a, int b) const;

    bool operator==(const ProblemInstance& other) const;

  private:
    ProblemInstance() = default;

    Task task_ = Task::TSP;
    int n_ = 0;
    std::vector<Point> coords_;
    std::vector<std::vector<double>> dist_;
    std::vector<int> demands_;
    int capacity_ = 0;
    std::vector<std::vector<std::vector<int>>> proc_;
};

struct Dataset {
    Task task = Task::TSP;
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<ProblemInstance> instances;

    bool operator==(const Dataset& other) const;
};

// Deterministic instance generation; a pure function of its arguments.
// TSP/CVRP coordinates are i.i.d. uniform on [0,1]^2; CVRP demands uniform
// 1..9 with capacity 30/40/50 by size bracket; ATSP distances uniform (0,1)
// with zero diagonal (triangle inequality not enforced); FFSP uses 3 stages
// of 4 machines with processing times uniform 2..9.
Dataset generate(Task task, int n, int count, std::uint64_t seed);

// One instance drawn from the same distributions as generate; advances rng.
ProblemInstance sample_instance(Task task, int n, Rng& rng);

int cvrp_capacity_for(int n);

// Line-based JSON on disk: a header line {format, version, task, n, count,
// seed} followed by one instance per line. load(save(d)) == d bit-exactly.
void save(const Dataset& dataset, const std::string& path);
Dataset load(const std::string& path);

std::uint64_t file_hash(const std::string& path);  // FNV-1a of file bytes

}  // namespace symrd
