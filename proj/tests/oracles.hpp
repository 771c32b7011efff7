#pragma once

// Independent reference implementations used only by tests. These deliberately
// avoid the library's solution canonicalization and brute-force code paths so
// that agreement between the two is meaningful.

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "symrd/instance.hpp"

namespace oracle {

// Exhaustive routing optimum over all N! visiting orders (the library oracle
// fixes city 0 first; this one does not).
inline double routing_optimum(const symrd::ProblemInstance& inst) {
    const int n = inst.size();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (int i = 0; i + 1 < n; ++i) cost += inst.dist(perm[i], perm[i + 1]);
        cost += inst.dist(perm[n - 1], perm[0]);
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Tour identity as a sorted multiset of undirected edges: a grouping key for
// symmetric TSP that never looks at rotation or orientation.
inline std::vector<std::pair<int, int>> tsp_edge_key(const std::vector<int>& tour) {
    std::vector<std::pair<int, int>> edges;
    const int n = static_cast<int>(tour.size());
    for (int i = 0; i < n; ++i) {
        int a = tour[i], b = tour[(i + 1) % n];
        if (a > b) std::swap(a, b);
        edges.emplace_back(a, b);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

// Directed variant for ATSP.
inline std::vector<std::pair<int, int>> atsp_edge_key(const std::vector<int>& tour) {
    std::vector<std::pair<int, int>> edges;
    const int n = static_cast<int>(tour.size());
    for (int i = 0; i < n; ++i) edges.emplace_back(tour[i], tour[(i + 1) % n]);
    std::sort(edges.begin(), edges.end());
    return edges;
}

// CVRP solution identity: the multiset of direction-free routes. Each route is
// keyed by the lexicographic minimum of itself and its reversal; the multiset
// is the sorted list of those keys.
inline std::vector<std::vector<int>> cvrp_route_key(const std::vector<int>& actions) {
    std::vector<std::vector<int>> keys;
    std::vector<int> current;
    for (std::size_t i = 1; i < actions.size(); ++i) {
        if (actions[i] == 0) {
            if (!current.empty()) {
                std::vector<int> reversed(current.rbegin(), current.rend());
                keys.push_back(std::min(current, reversed));
                current.clear();
            }
        } else {
            current.push_back(actions[i]);
        }
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

// 5-sigma binomial frequency band check.
inline bool within_binomial_band(long long observed, long long draws, double p, double sigmas = 5.0) {
    const double expected = p * static_cast<double>(draws);
    const double sigma = std::sqrt(p * (1.0 - p) * static_cast<double>(draws));
    return std::abs(static_cast<double>(observed) - expected) <= sigmas * sigma + 1e-9;
}

}  // namespace oracle
