#include "symrd/env.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace symrd {

bool Solution::operator==(const Solution& other) const {
    return task == other.task && cycle == other.cycle && routes == other.routes && schedule == other.schedule;
}

bool Solution::operator<(const Solution& other) const {
    return std::tie(task, cycle, routes, schedule) < std::tie(other.task, other.cycle, other.routes, other.schedule);
}

State State::initial(const ProblemInstance& inst) {
    return initial(inst, std::vector<int>());
}

State State::initial(const ProblemInstance& inst, const std::vector<int>& machine_order) {
    State s;
    s.inst_ = &inst;
    const int n = inst.size();
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP:
            if (!machine_order.empty()) throw InvalidArgument("machine order only applies to FFSP");
            s.visited_.assign(n, 0);
            break;
        case Task::CVRP:
            if (!machine_order.empty()) throw InvalidArgument("machine order only applies to FFSP");
            s.visited_.assign(n + 1, 0);
            s.remaining_cap_ = inst.capacity();
            break;
        case Task::FFSP: {
            const int stages = inst.num_stages();
            const int total = inst.total_machines();
            for (int st = 0; st < stages; ++st) {
                for (int m = 0; m < inst.machines_at(st); ++m) {
                    s.slot_stage_.push_back(st);
                    s.slot_machine_.push_back(m);
                }
            }
            if (machine_order.empty()) {
                s.machine_order_.resize(total);
                for (int i = 0; i < total; ++i) s.machine_order_[i] = i;
            } else {
                if (static_cast<int>(machine_order.size()) != total) {
                    throw InvalidArgument("machine order has wrong length");
                }
                std::vector<std::uint8_t> seen(total, 0);
                for (int slot : machine_order) {
                    if (slot < 0 || slot >= total || seen[slot]) {
                        throw InvalidArgument("machine order is not a permutation of slots");
                    }
                    seen[slot] = 1;
                }
                s.machine_order_ = machine_order;
            }
            s.machine_ready_.assign(total, 0);
            s.stage_assigned_.assign(static_cast<std::size_t>(stages) * n, 0);
            s.stage_completion_.assign(static_cast<std::size_t>(stages) * n, 0);
            s.slot_jobs_.resize(total);
            s.cursor_ = 0;
            s.time_ = 0;
            break;
        }
    }
    return s;
}

bool State::terminal() const {
    switch (inst_->task()) {
        case Task::TSP:
        case Task::ATSP:
            return visited_count_ == inst_->size();
        case Task::CVRP:
            return visited_count_ == inst_->size() && pos_ == 0;
        case Task::FFSP:
            return assignments_done_ == inst_->num_stages() * inst_->size();
    }
    return false;
}

int State::action_count() const {
    switch (inst_->task()) {
        case Task::TSP:
        case Task::ATSP:
            return inst_->size();
        case Task::CVRP:
        case Task::FFSP:
            return inst_->size() + 1;
    }
    return 0;
}

int State::current_slot() const {
    if (inst_->task() != Task::FFSP) throw InvalidArgument("current_slot is FFSP-only");
    return machine_order_[cursor_];
}

long long State::makespan() const {
    long long m = 0;
    for (long long r : machine_ready_) m = std::max(m, r);
    return m;
}

bool State::job_feasible(int stage, int job) const {
    const int n = inst_->size();
    if (stage_assigned_[static_cast<std::size_t>(stage) * n + job]) return false;
    if (stage == 0) return true;
    const std::size_t prev = static_cast<std::size_t>(stage - 1) * n + job;
    return stage_assigned_[prev] && stage_completion_[prev] <= time_;
}

// Skip may not be chosen when doing so could stall the clock: if this machine
// has work, nothing is running, and no machine later in the round has work,
// then a job must be assigned here.
bool State::skip_feasible() const {
    const int slot = machine_order_[cursor_];
    const int stage = slot_stage_[slot];
    const int n = inst_->size();
    bool has_job = false;
    for (int j = 0; j < n; ++j) {
        if (job_feasible(stage, j)) {
            has_job = true;
            break;
        }
    }
    if (!has_job) return true;
    for (long long r : machine_ready_) {
        if (r > time_) return true;
    }
    for (std::size_t k = cursor_ + 1; k < machine_order_.size(); ++k) {
        const int later = machine_order_[k];
        if (machine_ready_[later] > time_) continue;
        const int later_stage = slot_stage_[later];
        for (int j = 0; j < n; ++j) {
            if (job_feasible(later_stage, j)) return true;
        }
    }
    return false;
}

void State::feasible_mask(std::vector<std::uint8_t>& mask) const {
    if (terminal()) throw InfeasibleAction("feasible_mask called on terminal state");
    const int n = inst_->size();
    mask.assign(action_count(), 0);
    switch (inst_->task()) {
        case Task::TSP:
        case Task::ATSP:
            for (int a = 0; a < n; ++a) mask[a] = !visited_[a];
            break;
        case Task::CVRP: {
            if (prefix_.empty()) {
                mask[0] = 1;  // episodes start at the depot
                break;
            }
            for (int c = 1; c <= n; ++c) {
                if (!visited_[c] && inst_->demands()[c - 1] <= remaining_cap_) mask[c] = 1;
            }
            // No two depot visits in a row while customers remain; from the
            // depot every unvisited customer is feasible (demand <= Q), so the
            // mask is never empty.
            if (pos_ != 0) mask[0] = 1;
            break;
        }
        case Task::FFSP: {
            const int stage = slot_stage_[machine_order_[cursor_]];
            for (int j = 0; j < n; ++j) mask[j] = job_feasible(stage, j);
            mask[n] = skip_feasible();
            break;
        }
    }
}

std::vector<std::uint8_t> State::feasible_mask() const {
    std::vector<std::uint8_t> mask;
    feasible_mask(mask);
    return mask;
}

void State::normalize_cursor() {
    const std::size_t total = machine_order_.size();
    for (;;) {
        while (cursor_ < total && machine_ready_[machine_order_[cursor_]] > time_) ++cursor_;
        if (cursor_ < total) return;
        // Round over: advance to the next completion event.
        long long next = std::numeric_limits<long long>::max();
        for (long long r : machine_ready_) {
            if (r > time_) next = std::min(next, r);
        }
        if (next == std::numeric_limits<long long>::max()) {
            throw InfeasibleAction("ffsp: no runnable machine and no pending completion");
        }
        time_ = next;
        cursor_ = 0;
    }
}

void State::apply(int action) {
    feasible_mask(mask_scratch_);
    const auto& mask = mask_scratch_;
    if (action < 0 || action >= static_cast<int>(mask.size()) || !mask[action]) {
        throw InfeasibleAction("action " + std::to_string(action) + " is not feasible");
    }
    const int n = inst_->size();
    switch (inst_->task()) {
        case Task::TSP:
        case Task::ATSP:
            visited_[action] = 1;
            ++visited_count_;
            pos_ = action;
            break;
        case Task::CVRP:
            if (action == 0) {
                remaining_cap_ = inst_->capacity();
            } else {
                visited_[action] = 1;
                ++visited_count_;
                remaining_cap_ -= inst_->demands()[action - 1];
            }
            pos_ = action;
            break;
        case Task::FFSP: {
            const int slot = machine_order_[cursor_];
            if (action < n) {
                const int stage = slot_stage_[slot];
                const int machine = slot_machine_[slot];
                const long long done = time_ + inst_->proc_time(stage, machine, action);
                machine_ready_[slot] = done;
                stage_assigned_[static_cast<std::size_t>(stage) * n + action] = 1;
                stage_completion_[static_cast<std::size_t>(stage) * n + action] = done;
                slot_jobs_[slot].emplace_back(action, time_);
                ++assignments_done_;
            }
            ++cursor_;
            break;
        }
    }
    prefix_.push_back(action);
    if (inst_->task() == Task::FFSP && !terminal()) normalize_cursor();
}

State initial_state(const ProblemInstance& inst) { return State::initial(inst); }

State step(const State& state, int action) {
    State next = state;
    next.apply(action);
    return next;
}

namespace {

State replay(const ProblemInstance& inst, const Trajectory& traj) {
    if (traj.task != inst.task()) throw InvalidArgument("trajectory task does not match instance");
    State s = State::initial(inst, traj.machine_order);
    for (int a : traj.actions) {
        if (s.terminal()) throw InvalidArgument("trajectory continues past terminal state");
        s.apply(a);
    }
    if (!s.terminal()) throw InvalidArgument("trajectory does not reach a terminal state");
    return s;
}

std::vector<std::vector<int>> cvrp_routes_of(const std::vector<int>& actions) {
    std::vector<std::vector<int>> routes;
    std::vector<int> current;
    for (std::size_t i = 1; i < actions.size(); ++i) {  // actions[0] is the depot start
        if (actions[i] == 0) {
            if (!current.empty()) routes.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(actions[i]);
        }
    }
    return routes;
}

}  // namespace

void validate_trajectory(const ProblemInstance& inst, const Trajectory& traj) { replay(inst, traj); }

double trajectory_cost(const ProblemInstance& inst, const Trajectory& traj) {
    const State end = replay(inst, traj);
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP: {
            const auto& a = traj.actions;
            double cost = 0.0;
            for (std::size_t i = 0; i + 1 < a.size(); ++i) cost += inst.dist(a[i], a[i + 1]);
            cost += inst.dist(a.back(), a.front());
            return cost;
        }
        case Task::CVRP: {
            const auto& a = traj.actions;
            double cost = 0.0;
            for (std::size_t i = 0; i + 1 < a.size(); ++i) cost += inst.dist(a[i], a[i + 1]);
            return cost;
        }
        case Task::FFSP:
            return static_cast<double>(end.makespan());
    }
    throw InvalidArgument("unknown task");
}

double episodic_reward(const ProblemInstance& inst, const Trajectory& traj, BudgetLedger& ledger) {
    const double cost = trajectory_cost(inst, traj);
    ledger.add(1);
    return -cost;
}

Solution solution_of(const ProblemInstance& inst, const Trajectory& traj) {
    const State end = replay(inst, traj);
    Solution sol;
    sol.task = inst.task();
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP: {
            const auto& a = traj.actions;
            const int n = static_cast<int>(a.size());
            int zero_pos = 0;
            for (int i = 0; i < n; ++i) {
                if (a[i] == 0) {
                    zero_pos = i;
                    break;
                }
            }
            std::vector<int> cycle(n);
            for (int i = 0; i < n; ++i) cycle[i] = a[(zero_pos + i) % n];
            if (inst.task() == Task::TSP && n >= 3 && cycle[1] > cycle[n - 1]) {
                std::reverse(cycle.begin() + 1, cycle.end());
            }
            sol.cycle = std::move(cycle);
            break;
        }
        case Task::CVRP: {
            auto routes = cvrp_routes_of(traj.actions);
            for (auto& r : routes) {
                if (r.size() >= 2 && r.front() > r.back()) std::reverse(r.begin(), r.end());
            }
            std::sort(routes.begin(), routes.end(),
                      [](const auto& x, const auto& y) { return x.front() < y.front(); });
            sol.routes = std::move(routes);
            break;
        }
        case Task::FFSP:
            sol.schedule = end.slot_assignments();
            break;
    }
    return sol;
}

double solution_cost(const ProblemInstance& inst, const Solution& sol) {
    switch (inst.task()) {
        case Task::TSP:
        case Task::ATSP: {
            double cost = 0.0;
            const auto& c = sol.cycle;
            for (std::size_t i = 0; i + 1 < c.size(); ++i) cost += inst.dist(c[i], c[i + 1]);
            cost += inst.dist(c.back(), c.front());
            return cost;
        }
        case Task::CVRP: {
            double cost = 0.0;
            for (const auto& r : sol.routes) {
                cost += inst.dist(0, r.front());
                for (std::size_t i = 0; i + 1 < r.size(); ++i) cost += inst.dist(r[i], r[i + 1]);
                cost += inst.dist(r.back(), 0);
            }
            return cost;
        }
        case Task::FFSP: {
            long long makespan = 0;
            for (std::size_t slot = 0; slot < sol.schedule.size(); ++slot) {
                int st = 0, m = static_cast<int>(slot);
                while (m >= inst.machines_at(st)) {
                    m -= inst.machines_at(st);
                    ++st;
                }
                for (const auto& [job, start] : sol.schedule[slot]) {
                    makespan = std::max(makespan, start + inst.proc_time(st, m, job));
                }
            }
            return static_cast<double>(makespan);
        }
    }
    throw InvalidArgument("unknown task");
}

namespace {

void enumerate_rec(const State& state, Trajectory& current, std::vector<Trajectory>& out, std::size_t limit) {
    if (state.terminal()) {
        out.push_back(current);
        if (out.size() > limit) throw TooLarge("trajectory enumeration exceeds limit");
        return;
    }
    const auto mask = state.feasible_mask();
    for (int a = 0; a < static_cast<int>(mask.size()); ++a) {
        if (!mask[a]) continue;
        State next = state;
        next.apply(a);
        current.actions.push_back(a);
        enumerate_rec(next, current, out, limit);
        current.actions.pop_back();
    }
}

}  // namespace

std::vector<Trajectory> enumerate_all_trajectories(const ProblemInstance& inst, std::size_t limit) {
    std::vector<Trajectory> out;
    Trajectory current;
    current.task = inst.task();
    enumerate_rec(State::initial(inst), current, out, limit);
    return out;
}

Trajectory random_trajectory(const ProblemInstance& inst, Rng& rng) {
    Trajectory traj;
    traj.task = inst.task();
    State state = State::initial(inst);
    std::vector<std::uint8_t> mask;
    std::vector<int> feasible;
    while (!state.terminal()) {
        state.feasible_mask(mask);
        feasible.clear();
        for (int a = 0; a < static_cast<int>(mask.size()); ++a) {
            if (mask[a]) feasible.push_back(a);
        }
        const int action = feasible[rng.index(feasible.size())];
        state.apply(action);
        traj.actions.push_back(action);
    }
    return traj;
}

}  // namespace symrd
