#include <algorithm>
#include <limits>
#include <numeric>

#include "symrd/env.hpp"

namespace symrd {

namespace {

std::pair<Solution, double> routing_best(const ProblemInstance& inst) {
    const int n = inst.size();
    if (n > 10) throw TooLarge("brute force limited to N <= 10 for TSP/ATSP");

    std::vector<int> perm(n - 1);
    std::iota(perm.begin(), perm.end(), 1);  // tours fixed to start at city 0

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> best_tour;
    if (perm.empty()) {
        best_cost = 0.0;
    } else {
        do {
            double cost = inst.dist(0, perm.front());
            for (std::size_t i = 0; i + 1 < perm.size(); ++i) cost += inst.dist(perm[i], perm[i + 1]);
            cost += inst.dist(perm.back(), 0);
            if (cost < best_cost) {
                best_cost = cost;
                best_tour = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    Trajectory traj;
    traj.task = inst.task();
    traj.actions.push_back(0);
    traj.actions.insert(traj.actions.end(), best_tour.begin(), best_tour.end());
    Solution sol = solution_of(inst, traj);
    return {sol, solution_cost(inst, sol)};
}

std::pair<Solution, double> cvrp_best(const ProblemInstance& inst) {
    const int n = inst.size();
    if (n > 8) throw TooLarge("brute force limited to N <= 8 customers for CVRP");

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> best_perm;
    std::vector<int> best_split;

    // For a fixed customer order, the optimal capacity-feasible partition into
    // consecutive routes is a shortest-path DP over split points.
    std::vector<double> f(n + 1);
    std::vector<int> arg(n + 1);
    do {
        f[0] = 0.0;
        for (int j = 1; j <= n; ++j) {
            f[j] = std::numeric_limits<double>::infinity();
            int load = 0;
            double inner = 0.0;
            for (int i = j; i >= 1; --i) {  // route covers perm[i-1..j-1]
                load += inst.demands()[perm[i - 1] - 1];
                if (load > inst.capacity()) break;
                if (i < j) inner += inst.dist(perm[i - 1], perm[i]);
                const double route_cost = inst.dist(0, perm[i - 1]) + inner + inst.dist(perm[j - 1], 0);
                if (f[i - 1] + route_cost < f[j]) {
                    f[j] = f[i - 1] + route_cost;
                    arg[j] = i - 1;
                }
            }
        }
        if (f[n] < best_cost) {
            best_cost = f[n];
            best_perm = perm;
            best_split.clear();
            for (int j = n; j > 0; j = arg[j]) best_split.push_back(arg[j]);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Trajectory traj;
    traj.task = Task::CVRP;
    traj.actions.push_back(0);
    std::sort(best_split.begin(), best_split.end());
    std::size_t cut = 1;  // best_split holds route starts (first is 0)
    for (int i = 0; i < n; ++i) {
        if (cut < best_split.size() && i == best_split[cut]) {
            traj.actions.push_back(0);
            ++cut;
        }
        traj.actions.push_back(best_perm[i]);
    }
    traj.actions.push_back(0);
    Solution sol = solution_of(inst, traj);
    return {sol, solution_cost(inst, sol)};
}

struct FfspSearch {
    const ProblemInstance& inst;
    int n;
    std::vector<std::vector<long long>> prev_completion;  // per stage entry
    long long best = std::numeric_limits<long long>::max();
    std::vector<std::vector<std::vector<std::pair<int, long long>>>> stage_best;  // winning per-stage slots
    std::vector<std::vector<std::vector<std::pair<int, long long>>>> stage_current;

    explicit FfspSearch(const ProblemInstance& i) : inst(i), n(i.size()) {}

    void run() {
        prev_completion.assign(1, std::vector<long long>(n, 0));
        stage_current.resize(inst.num_stages());
        stage_best.resize(inst.num_stages());
        search_stage(0);
    }

    void search_stage(int stage) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        const int machines = inst.machines_at(stage);
        std::vector<int> lens(machines, 0);
        do {
            compositions(stage, perm, lens, 0, n);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    void compositions(int stage, const std::vector<int>& perm, std::vector<int>& lens, int machine, int remaining) {
        const int machines = inst.machines_at(stage);
        if (machine == machines - 1) {
            lens[machine] = remaining;
            evaluate(stage, perm, lens);
            return;
        }
        for (int take = 0; take <= remaining; ++take) {
            lens[machine] = take;
            compositions(stage, perm, lens, machine + 1, remaining - take);
        }
    }

    void evaluate(int stage, const std::vector<int>& perm, const std::vector<int>& lens) {
        const int machines = inst.machines_at(stage);
        std::vector<long long> completion(n, 0);
        std::vector<std::vector<std::pair<int, long long>>> slots(machines);
        int idx = 0;
        for (int m = 0; m < machines; ++m) {
            long long ready = 0;
            for (int k = 0; k < lens[m]; ++k) {
                const int job = perm[idx++];
                const long long start = std::max(ready, prev_completion[stage][job]);
                const long long done = start + inst.proc_time(stage, m, job);
                ready = done;
                completion[job] = done;
                slots[m].emplace_back(job, start);
            }
        }
        stage_current[stage] = std::move(slots);
        if (stage + 1 < inst.num_stages()) {
            if (static_cast<int>(prev_completion.size()) <= stage + 1) prev_completion.resize(stage + 2);
            prev_completion[stage + 1] = completion;
            search_stage(stage + 1);
        } else {
            const long long makespan = *std::max_element(completion.begin(), completion.end());
            if (makespan < best) {
                best = makespan;
                stage_best = stage_current;
            }
        }
    }
};

std::pair<Solution, double> ffsp_best(const ProblemInstance& inst) {
    const int n = inst.size();
    if (n > 6) throw TooLarge("brute force limited to <= 6 jobs for FFSP");

    // Configurations per stage grow as n! * C(n+M-1, M-1); refuse runaway cases.
    double work = 1.0;
    for (int s = 0; s < inst.num_stages(); ++s) {
        double fact = 1.0;
        for (int k = 2; k <= n; ++k) fact *= k;
        double comb = 1.0;
        const int m = inst.machines_at(s);
        for (int k = 1; k < m; ++k) comb = comb * (n + k) / k;
        work *= fact * comb;
    }
    if (work > 2e7) throw TooLarge("ffsp brute force search space too large");

    FfspSearch search(inst);
    search.run();

    Solution sol;
    sol.task = Task::FFSP;
    sol.schedule.clear();
    for (int s = 0; s < inst.num_stages(); ++s) {
        for (auto& slot : search.stage_best[s]) sol.schedule.push_back(slot);
    }
    return {sol, static_cast<double>(search.best)};
}

}  // namespace

std::pair<Solution, double> brute_force_best(const ProblemInstance& inst) {
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP:
            return routing_best(inst);
        case Task::CVRP:
            return cvrp_best(inst);
        case Task::FFSP:
            return ffsp_best(inst);
    }
    throw InvalidArgument("unknown task");
}

}  // namespace symrd
