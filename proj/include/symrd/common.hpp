#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symrd {

// Error hierarchy. Callers that need to discriminate catch the subtype;
// everything derives from Error so `catch (const Error&)` is always safe.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct InfeasibleAction : Error {
    using Error::Error;
};
struct TooLarge : Error {
    using Error::Error;
};

// Deterministic RNG. mt19937_64 has a standardized output sequence, and all
// mappings to doubles/ints below are implemented by hand so streams are
// bit-identical across platforms and standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo,hi] inclusive
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // uniform index in [0,n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // Derived stream for a named purpose; forking the same tag twice yields
    // the same stream, so all run randomness flows from one root seed.
    Rng fork(std::uint64_t tag) const {
        std::uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL + tag);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return Rng(x);
    }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_ = 0;
};

// Named sub-stream tags (see Rng::fork).
namespace stream {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t rollout = 2;
inline constexpr std::uint64_t transform = 3;
inline constexpr std::uint64_t init = 4;
inline constexpr std::uint64_t val_data = 5;
}  // namespace stream

// FNV-1a, used for dataset/file hashes in manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counts reward-function evaluations: the sample-efficiency currency. Only
// episodic_reward increments it; greedy rollouts, distillation and evaluation
// must leave it untouched.
class BudgetLedger {
  public:
    BudgetLedger() = default;
    BudgetLedger(const BudgetLedger&) = delete;
    BudgetLedger& operator=(const BudgetLedger&) = delete;

    void add(std::uint64_t n = 1) { calls_.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t count() const { return calls_.load(std::memory_order_relaxed); }

    void note_step(std::uint64_t step) { events_.emplace_back(step, count()); }
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& events() const { return events_; }

  private:
    std::atomic<std::uint64_t> calls_{0};
    std::vector<std::pair<std::uint64_t, std::uint64_t>> events_;
};

inline constexpr double kRelTol = 1e-9;

inline bool nearly_equal_rel(double a, double b, double rel = kRelTol) {
    const double diff = a > b ? a - b : b - a;
    const double mag = std::max(a < 0 ? -a : a, b < 0 ? -b : b);
    return diff <= rel * std::max(mag, 1.0);
}

}  // namespace symrd
