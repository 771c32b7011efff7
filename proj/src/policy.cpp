#include "symrd/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace symrd {

using nlohmann::json;

namespace {

int feature_dim(Task task, const std::vector<int>& machines_per_stage) {
    switch (task) {
        case Task::TSP: return 2;
        case Task::CVRP: return 4;
        case Task::ATSP: return 4;
        case Task::FFSP: {
            int total = 0;
            for (int m : machines_per_stage) total += m;
            if (total <= 0) throw InvalidArgument("ffsp policy needs machines_per_stage");
            return total;
        }
    }
    throw InvalidArgument("unknown task");
}

int context_dim(Task task, int d, int in_dim) {
    switch (task) {
        case Task::TSP:
        case Task::ATSP: return 3 * d;
        case Task::CVRP: return 3 * d + 1;
        case Task::FFSP: return 2 * d + in_dim;  // machine one-hot spans total machines
    }
    throw InvalidArgument("unknown task");
}

}  // namespace

ParamLayout param_layout(Task task, int d, const std::vector<int>& machines_per_stage) {
    if (d < 2) throw InvalidArgument("embedding width must be >= 2");
    ParamLayout lay;
    lay.d = d;
    lay.in_dim = feature_dim(task, machines_per_stage);
    lay.ctx_dim = context_dim(task, d, lay.in_dim);
    lay.n_actions_extra = task == Task::FFSP ? 1 : 0;
    std::size_t off = 0;
    lay.w_embed = off;
    off += static_cast<std::size_t>(lay.in_dim) * d;
    lay.b_embed = off;
    off += d;
    lay.w_query = off;
    off += static_cast<std::size_t>(lay.ctx_dim) * d;
    lay.b_query = off;
    off += d;
    lay.logit_scale = off;
    off += 1;
    lay.w_critic = off;
    off += d;
    lay.b_critic = off;
    off += 1;
    if (task == Task::FFSP) {
        lay.e_skip = off;
        off += d;
    }
    lay.total = off;
    return lay;
}

std::size_t param_count(Task task, int d, const std::vector<int>& machines_per_stage) {
    return param_layout(task, d, machines_per_stage).total;
}

PolicyParams init_params(Task task, int d, std::uint64_t seed, const std::vector<int>& machines_per_stage) {
    PolicyParams p;
    p.task = task;
    p.d = d;
    p.seed = seed;
    p.machines_per_stage = machines_per_stage;
    const auto lay = param_layout(task, d, machines_per_stage);
    p.values.resize(lay.total);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& v : p.values) v = rng.uniform(-scale, scale);
    return p;
}

PolicyParams init_params_for(const ProblemInstance& inst, int d, std::uint64_t seed) {
    std::vector<int> mps;
    if (inst.task() == Task::FFSP) {
        for (int s = 0; s < inst.num_stages(); ++s) mps.push_back(inst.machines_at(s));
    }
    return init_params(inst.task(), d, seed, mps);
}

PolicyParams uniform_params(Task task, int d, const std::vector<int>& machines_per_stage) {
    PolicyParams p;
    p.task = task;
    p.d = d;
    p.seed = 0;
    p.machines_per_stage = machines_per_stage;
    p.values.assign(param_count(task, d, machines_per_stage), 0.0);
    return p;
}

namespace {

enum class Mode { Sample, Greedy, Replay };

// Forward/backward engine for one (params, instance) pair. Node embeddings are
// computed once; each step records what the backward pass needs. The scalar
// type is a template parameter so finite-difference oracles can run the
// forward pass in extended precision.
template <typename Scalar>
class Evaluator {
  public:
    Evaluator(const PolicyParams& params, const ProblemInstance& inst)
        : inst_(inst),
          lay_(param_layout(params.task, params.d, params.machines_per_stage)),
          values_(params.values.begin(), params.values.end()) {
        if (params.task != inst.task()) throw InvalidArgument("policy task does not match instance");
        if (params.values.size() != lay_.total) throw InvalidArgument("parameter vector has wrong length");
        if (inst.task() == Task::FFSP) {
            std::vector<int> mps;
            for (int s = 0; s < inst.num_stages(); ++s) mps.push_back(inst.machines_at(s));
            if (mps != params.machines_per_stage) {
                throw InvalidArgument("ffsp policy shape does not match instance");
            }
        }
        build_features();
        embed();
    }

    Scalar forward(Mode mode, Trajectory& traj, Rng* rng, bool record) {
        clear_records();
        record_ = record;
        const int d = lay_.d;
        State state = mode == Mode::Replay ? State::initial(inst_, traj.machine_order) : State::initial(inst_);
        if (mode != Mode::Replay) {
            traj.task = inst_.task();
            traj.actions.clear();
            traj.machine_order.clear();
        }
        Scalar logp_total = 0;
        std::size_t t = 0;
        std::vector<std::uint8_t> mask;
        std::vector<Scalar> ctx(lay_.ctx_dim), q(d), probs(n_actions_), logits(n_actions_);
        while (!state.terminal()) {
            if (mode == Mode::Replay && t >= traj.actions.size()) {
                throw InvalidArgument("trajectory ends before terminal state");
            }
            state.feasible_mask(mask);
            build_context(state, ctx);
            // q = ctx * W_q + b_q
            const Scalar* wq = values_.data() + lay_.w_query;
            const Scalar* bq = values_.data() + lay_.b_query;
            for (int k = 0; k < d; ++k) q[k] = bq[k];
            for (int j = 0; j < lay_.ctx_dim; ++j) {
                const Scalar cj = ctx[j];
                if (cj == Scalar(0)) continue;
                const Scalar* row = wq + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) q[k] += cj * row[k];
            }
            const Scalar scale = values_[lay_.logit_scale];
            Scalar zmax = -std::numeric_limits<Scalar>::infinity();
            for (int a = 0; a < n_actions_; ++a) {
                if (!mask[a]) continue;
                const Scalar* ea = embedding(a);
                Scalar dot = 0;
                for (int k = 0; k < d; ++k) dot += q[k] * ea[k];
                logits[a] = scale * dot;
                zmax = std::max(zmax, logits[a]);
            }
            Scalar sumexp = 0;
            for (int a = 0; a < n_actions_; ++a) {
                probs[a] = mask[a] ? std::exp(logits[a] - zmax) : Scalar(0);
                sumexp += probs[a];
            }
            for (int a = 0; a < n_actions_; ++a) probs[a] /= sumexp;

            int action = -1;
            switch (mode) {
                case Mode::Sample: {
                    const Scalar u = static_cast<Scalar>(rng->uniform());
                    Scalar acc = 0;
                    for (int a = 0; a < n_actions_; ++a) {
                        if (!mask[a]) continue;
                        acc += probs[a];
                        if (u < acc) {
                            action = a;
                            break;
                        }
                    }
                    if (action < 0) {  // numeric slack: fall back to last feasible
                        for (int a = n_actions_ - 1; a >= 0; --a) {
                            if (mask[a]) {
                                action = a;
                                break;
                            }
                        }
                    }
                    break;
                }
                case Mode::Greedy: {
                    Scalar best = -std::numeric_limits<Scalar>::infinity();
                    for (int a = 0; a < n_actions_; ++a) {
                        if (mask[a] && logits[a] > best) {
                            best = logits[a];
                            action = a;
                        }
                    }
                    break;
                }
                case Mode::Replay:
                    action = traj.actions[t];
                    if (action < 0 || action >= n_actions_ || !mask[action]) {
                        throw InfeasibleAction("trajectory step " + std::to_string(t) + " is infeasible");
                    }
                    break;
            }
            logp_total += logits[action] - zmax - std::log(sumexp);

            if (record_) {
                ctx_rec_.insert(ctx_rec_.end(), ctx.begin(), ctx.end());
                q_rec_.insert(q_rec_.end(), q.begin(), q.end());
                prob_rec_.insert(prob_rec_.end(), probs.begin(), probs.end());
                action_rec_.push_back(action);
                last_rec_.push_back(embed_id_of_last(state));
                first_rec_.push_back(embed_id_of_first(state));
            }
            if (mode != Mode::Replay) traj.actions.push_back(action);
            state.apply(action);
            ++t;
        }
        if (mode == Mode::Replay && t != traj.actions.size()) {
            throw InvalidArgument("trajectory continues past terminal state");
        }
        return logp_total;
    }

    // Adds coef * d(sum_t log pi_t)/dtheta into grad; needs a recorded forward.
    void backward(double coef, std::vector<double>& grad) {
        const int d = lay_.d;
        const std::size_t steps = action_rec_.size();
        std::vector<Scalar> d_emb(static_cast<std::size_t>(n_emb_rows_) * d, 0);
        std::vector<Scalar> d_mu(d, 0);
        std::vector<Scalar> dq(d), dc(lay_.ctx_dim);
        const Scalar scale = values_[lay_.logit_scale];
        const Scalar* wq = values_.data() + lay_.w_query;

        for (std::size_t t = 0; t < steps; ++t) {
            const Scalar* ctx = ctx_rec_.data() + t * lay_.ctx_dim;
            const Scalar* q = q_rec_.data() + t * d;
            const Scalar* probs = prob_rec_.data() + t * n_actions_;
            const int chosen = action_rec_[t];
            std::fill(dq.begin(), dq.end(), Scalar(0));
            Scalar dscale = 0;
            for (int a = 0; a < n_actions_; ++a) {
                Scalar g = -static_cast<Scalar>(coef) * probs[a];
                if (a == chosen) g += static_cast<Scalar>(coef);
                if (g == Scalar(0)) continue;
                const Scalar* ea = embedding(a);
                Scalar dot = 0;
                for (int k = 0; k < d; ++k) dot += q[k] * ea[k];
                dscale += g * dot;
                const Scalar gs = g * scale;
                Scalar* de = d_emb.data() + static_cast<std::size_t>(embed_row(a)) * d;
                for (int k = 0; k < d; ++k) {
                    dq[k] += gs * ea[k];
                    de[k] += gs * q[k];
                }
            }
            grad[lay_.logit_scale] += static_cast<double>(dscale);
            double* gwq = grad.data() + lay_.w_query;
            double* gbq = grad.data() + lay_.b_query;
            for (int k = 0; k < d; ++k) gbq[k] += static_cast<double>(dq[k]);
            std::fill(dc.begin(), dc.end(), Scalar(0));
            for (int j = 0; j < lay_.ctx_dim; ++j) {
                const Scalar cj = ctx[j];
                const Scalar* row = wq + static_cast<std::size_t>(j) * d;
                Scalar acc = 0;
                for (int k = 0; k < d; ++k) {
                    acc += row[k] * dq[k];
                    if (cj != Scalar(0)) {
                        gwq[static_cast<std::size_t>(j) * d + k] += static_cast<double>(cj * dq[k]);
                    }
                }
                dc[j] = acc;
            }
            for (int k = 0; k < d; ++k) d_mu[k] += dc[k];
            const int last = last_rec_[t];
            if (last >= 0) {
                Scalar* de = d_emb.data() + static_cast<std::size_t>(last) * d;
                for (int k = 0; k < d; ++k) de[k] += dc[d + k];
            }
            const int first = first_rec_[t];
            if (has_first_block() && first >= 0) {
                Scalar* de = d_emb.data() + static_cast<std::size_t>(first) * d;
                for (int k = 0; k < d; ++k) de[k] += dc[2 * d + k];
            }
        }
        distribute_mean_grad(d_mu, d_emb);
        embed_backward(d_emb, grad);
    }

    Scalar critic() const {
        const Scalar* wc = values_.data() + lay_.w_critic;
        Scalar v = values_[lay_.b_critic];
        for (int k = 0; k < lay_.d; ++k) v += wc[k] * mu_[k];
        return v;
    }

    void critic_backward(double coef, std::vector<double>& grad) {
        const int d = lay_.d;
        double* gwc = grad.data() + lay_.w_critic;
        for (int k = 0; k < d; ++k) gwc[k] += coef * static_cast<double>(mu_[k]);
        grad[lay_.b_critic] += coef;
        std::vector<Scalar> d_mu(d);
        const Scalar* wc = values_.data() + lay_.w_critic;
        for (int k = 0; k < d; ++k) d_mu[k] = static_cast<Scalar>(coef) * wc[k];
        std::vector<Scalar> d_emb(static_cast<std::size_t>(n_emb_rows_) * d, 0);
        distribute_mean_grad(d_mu, d_emb);
        embed_backward(d_emb, grad);
    }

    void clear_records() {
        ctx_rec_.clear();
        q_rec_.clear();
        prob_rec_.clear();
        action_rec_.clear();
        last_rec_.clear();
        first_rec_.clear();
    }

  private:
    bool has_first_block() const {
        return inst_.task() == Task::TSP || inst_.task() == Task::ATSP || inst_.task() == Task::CVRP;
    }

    // Rows of the embedding matrix: the n_emb_ node rows, plus the skip row
    // for FFSP (index n_emb_).
    int embed_row(int action) const {
        if (inst_.task() == Task::FFSP && action == inst_.size()) return n_emb_;
        return action;
    }

    const Scalar* embedding(int action) const {
        return emb_.data() + static_cast<std::size_t>(embed_row(action)) * lay_.d;
    }

    int embed_id_of_last(const State& state) const {
        const int last = state.last_action();
        return last < 0 ? -1 : embed_row(last);
    }

    int embed_id_of_first(const State& state) const {
        const int first = state.first_action();
        return first < 0 ? -1 : embed_row(first);
    }

    void build_features() {
        const int n = inst_.size();
        switch (inst_.task()) {
            case Task::TSP: {
                n_emb_ = n;
                feat_.resize(static_cast<std::size_t>(n) * 2);
                for (int i = 0; i < n; ++i) {
                    feat_[i * 2 + 0] = static_cast<Scalar>(inst_.coords()[i][0]);
                    feat_[i * 2 + 1] = static_cast<Scalar>(inst_.coords()[i][1]);
                }
                break;
            }
            case Task::CVRP: {
                n_emb_ = n + 1;
                feat_.resize(static_cast<std::size_t>(n + 1) * 4);
                for (int i = 0; i <= n; ++i) {
                    feat_[i * 4 + 0] = static_cast<Scalar>(inst_.coords()[i][0]);
                    feat_[i * 4 + 1] = static_cast<Scalar>(inst_.coords()[i][1]);
                    feat_[i * 4 + 2] =
                        i == 0 ? Scalar(0) : Scalar(inst_.demands()[i - 1]) / Scalar(inst_.capacity());
                    feat_[i * 4 + 3] = i == 0 ? Scalar(1) : Scalar(0);
                }
                break;
            }
            case Task::ATSP: {
                n_emb_ = n;
                feat_.resize(static_cast<std::size_t>(n) * 4);
                const auto& dmat = inst_.atsp_dist();
                for (int i = 0; i < n; ++i) {
                    Scalar row_sum = 0, col_sum = 0;
                    Scalar row_min = std::numeric_limits<Scalar>::infinity();
                    Scalar col_min = std::numeric_limits<Scalar>::infinity();
                    for (int j = 0; j < n; ++j) {
                        if (j == i) continue;
                        row_sum += static_cast<Scalar>(dmat[i][j]);
                        row_min = std::min(row_min, static_cast<Scalar>(dmat[i][j]));
                        col_sum += static_cast<Scalar>(dmat[j][i]);
                        col_min = std::min(col_min, static_cast<Scalar>(dmat[j][i]));
                    }
                    const Scalar denom = static_cast<Scalar>(std::max(n - 1, 1));
                    feat_[i * 4 + 0] = row_sum / denom;
                    feat_[i * 4 + 1] = n > 1 ? row_min : Scalar(0);
                    feat_[i * 4 + 2] = col_sum / denom;
                    feat_[i * 4 + 3] = n > 1 ? col_min : Scalar(0);
                }
                break;
            }
            case Task::FFSP: {
                n_emb_ = n;
                feat_.resize(static_cast<std::size_t>(n) * lay_.in_dim);
                for (int j = 0; j < n; ++j) {
                    int col = 0;
                    for (int s = 0; s < inst_.num_stages(); ++s) {
                        for (int m = 0; m < inst_.machines_at(s); ++m) {
                            feat_[static_cast<std::size_t>(j) * lay_.in_dim + col] =
                                Scalar(inst_.proc_time(s, m, j)) / Scalar(10);
                            ++col;
                        }
                    }
                }
                break;
            }
        }
        n_actions_ = inst_.task() == Task::TSP || inst_.task() == Task::ATSP ? n : n + 1;
        n_emb_rows_ = n_emb_ + lay_.n_actions_extra;
    }

    void embed() {
        const int d = lay_.d;
        emb_.assign(static_cast<std::size_t>(n_emb_rows_) * d, 0);
        const Scalar* we = values_.data() + lay_.w_embed;
        const Scalar* be = values_.data() + lay_.b_embed;
        for (int i = 0; i < n_emb_; ++i) {
            Scalar* e = emb_.data() + static_cast<std::size_t>(i) * d;
            for (int k = 0; k < d; ++k) e[k] = be[k];
            const Scalar* f = feat_.data() + static_cast<std::size_t>(i) * lay_.in_dim;
            for (int j = 0; j < lay_.in_dim; ++j) {
                const Scalar fj = f[j];
                if (fj == Scalar(0)) continue;
                const Scalar* row = we + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) e[k] += fj * row[k];
            }
        }
        if (lay_.n_actions_extra) {
            const Scalar* es = values_.data() + lay_.e_skip;
            Scalar* dst = emb_.data() + static_cast<std::size_t>(n_emb_) * d;
            for (int k = 0; k < d; ++k) dst[k] = es[k];
        }
        mu_.assign(d, 0);
        for (int i = 0; i < n_emb_; ++i) {
            const Scalar* e = emb_.data() + static_cast<std::size_t>(i) * d;
            for (int k = 0; k < d; ++k) mu_[k] += e[k];
        }
        for (int k = 0; k < d; ++k) mu_[k] /= static_cast<Scalar>(n_emb_);
    }

    void build_context(const State& state, std::vector<Scalar>& ctx) const {
        const int d = lay_.d;
        std::fill(ctx.begin(), ctx.end(), Scalar(0));
        for (int k = 0; k < d; ++k) ctx[k] = mu_[k];
        const int last = embed_id_of_last(state);
        if (last >= 0) {
            const Scalar* e = emb_.data() + static_cast<std::size_t>(last) * d;
            for (int k = 0; k < d; ++k) ctx[d + k] = e[k];
        }
        switch (inst_.task()) {
            case Task::TSP:
            case Task::ATSP:
            case Task::CVRP: {
                const int first = embed_id_of_first(state);
                if (first >= 0) {
                    const Scalar* e = emb_.data() + static_cast<std::size_t>(first) * d;
                    for (int k = 0; k < d; ++k) ctx[2 * d + k] = e[k];
                }
                if (inst_.task() == Task::CVRP) {
                    ctx[3 * d] = Scalar(state.remaining_capacity()) / Scalar(inst_.capacity());
                }
                break;
            }
            case Task::FFSP:
                ctx[2 * d + state.current_slot()] = Scalar(1);
                break;
        }
    }

    void distribute_mean_grad(const std::vector<Scalar>& d_mu, std::vector<Scalar>& d_emb) const {
        const int d = lay_.d;
        for (int i = 0; i < n_emb_; ++i) {
            Scalar* de = d_emb.data() + static_cast<std::size_t>(i) * d;
            for (int k = 0; k < d; ++k) de[k] += d_mu[k] / static_cast<Scalar>(n_emb_);
        }
    }

    void embed_backward(const std::vector<Scalar>& d_emb, std::vector<double>& grad) const {
        const int d = lay_.d;
        double* gwe = grad.data() + lay_.w_embed;
        double* gbe = grad.data() + lay_.b_embed;
        for (int i = 0; i < n_emb_; ++i) {
            const Scalar* de = d_emb.data() + static_cast<std::size_t>(i) * d;
            const Scalar* f = feat_.data() + static_cast<std::size_t>(i) * lay_.in_dim;
            for (int k = 0; k < d; ++k) gbe[k] += static_cast<double>(de[k]);
            for (int j = 0; j < lay_.in_dim; ++j) {
                const Scalar fj = f[j];
                if (fj == Scalar(0)) continue;
                double* row = gwe + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) row[k] += static_cast<double>(fj * de[k]);
            }
        }
        if (lay_.n_actions_extra) {
            const Scalar* de = d_emb.data() + static_cast<std::size_t>(n_emb_) * d;
            double* ges = grad.data() + lay_.e_skip;
            for (int k = 0; k < d; ++k) ges[k] += static_cast<double>(de[k]);
        }
    }

    const ProblemInstance& inst_;
    ParamLayout lay_;
    std::vector<Scalar> values_;
    int n_emb_ = 0;       // embedded entities (nodes / jobs)
    int n_emb_rows_ = 0;  // + skip row for FFSP
    int n_actions_ = 0;
    std::vector<Scalar> feat_, emb_, mu_;
    bool record_ = false;

    std::vector<Scalar> ctx_rec_, q_rec_, prob_rec_;
    std::vector<int> action_rec_, last_rec_, first_rec_;
};

}  // namespace

struct PolicyEvaluator::Impl {
    Impl(const PolicyParams& params, const ProblemInstance& inst) : ev(params, inst) {}
    Evaluator<double> ev;
};

PolicyEvaluator::PolicyEvaluator(const PolicyParams& params, const ProblemInstance& inst)
    : impl_(std::make_unique<Impl>(params, inst)) {}
PolicyEvaluator::~PolicyEvaluator() = default;
PolicyEvaluator::PolicyEvaluator(PolicyEvaluator&&) noexcept = default;
PolicyEvaluator& PolicyEvaluator::operator=(PolicyEvaluator&&) noexcept = default;

double PolicyEvaluator::sample(Trajectory& out, Rng& rng, bool record) {
    return impl_->ev.forward(Mode::Sample, out, &rng, record);
}

double PolicyEvaluator::replay(const Trajectory& traj, bool record) {
    Trajectory copy = traj;
    return impl_->ev.forward(Mode::Replay, copy, nullptr, record);
}

void PolicyEvaluator::greedy(Trajectory& out) { impl_->ev.forward(Mode::Greedy, out, nullptr, false); }

double PolicyEvaluator::critic() const { return impl_->ev.critic(); }

void PolicyEvaluator::add_logprob_grad(double coef, std::vector<double>& grad) {
    impl_->ev.backward(coef, grad);
}

void PolicyEvaluator::add_critic_grad(double coef, std::vector<double>& grad) {
    impl_->ev.critic_backward(coef, grad);
}

double log_prob(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj) {
    if (traj.task != inst.task()) throw InvalidArgument("trajectory task does not match instance");
    Evaluator<double> ev(params, inst);
    Trajectory copy = traj;
    return ev.forward(Mode::Replay, copy, nullptr, false);
}

long double log_prob_extended(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj) {
    if (traj.task != inst.task()) throw InvalidArgument("trajectory task does not match instance");
    Evaluator<long double> ev(params, inst);
    Trajectory copy = traj;
    return ev.forward(Mode::Replay, copy, nullptr, false);
}

long double critic_value_extended(const PolicyParams& params, const ProblemInstance& inst) {
    return Evaluator<long double>(params, inst).critic();
}

SampleResult sample_trajectory(const PolicyParams& params, const ProblemInstance& inst, Rng& rng,
                               BudgetLedger& ledger) {
    Evaluator<double> ev(params, inst);
    SampleResult res;
    res.log_prob = ev.forward(Mode::Sample, res.trajectory, &rng, false);
    res.reward = episodic_reward(inst, res.trajectory, ledger);
    return res;
}

Trajectory greedy_trajectory(const PolicyParams& params, const ProblemInstance& inst) {
    Evaluator<double> ev(params, inst);
    Trajectory traj;
    ev.forward(Mode::Greedy, traj, nullptr, false);
    return traj;
}

double critic_value(const PolicyParams& params, const ProblemInstance& inst) {
    return Evaluator<double>(params, inst).critic();
}

GradientBundle grad_reinforce(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj,
                              double advantage) {
    Evaluator<double> ev(params, inst);
    Trajectory copy = traj;
    GradientBundle out;
    out.grad.assign(params.values.size(), 0.0);
    const double logp = ev.forward(Mode::Replay, copy, nullptr, true);
    out.loss = -advantage * logp;
    ev.backward(-advantage, out.grad);
    return out;
}

GradientBundle grad_ssd(const PolicyParams& params, const ProblemInstance& inst,
                        std::span<const Trajectory> trajectories) {
    if (trajectories.empty()) throw InvalidArgument("grad_ssd needs at least one trajectory");
    Evaluator<double> ev(params, inst);
    GradientBundle out;
    out.grad.assign(params.values.size(), 0.0);
    for (const auto& traj : trajectories) {
        Trajectory copy = traj;
        const double logp = ev.forward(Mode::Replay, copy, nullptr, true);
        out.loss -= logp;
        ev.backward(-1.0, out.grad);
    }
    return out;
}

GradientBundle entropy_bonus_term(const PolicyParams& params, const ProblemInstance& inst, const Trajectory& traj) {
    return grad_ssd(params, inst, std::span<const Trajectory>(&traj, 1));
}

GradientBundle grad_critic_mse(const PolicyParams& params, const ProblemInstance& inst, double target) {
    Evaluator<double> ev(params, inst);
    GradientBundle out;
    out.grad.assign(params.values.size(), 0.0);
    const double v = ev.critic();
    out.loss = (v - target) * (v - target);
    ev.critic_backward(2.0 * (v - target), out.grad);
    return out;
}

double fd_check(const PolicyParams& params, const std::function<long double(const PolicyParams&)>& loss,
                std::span<const double> analytic, double h) {
    if (h <= 0.0) throw InvalidArgument("fd_check: h must be positive");
    if (analytic.size() != params.values.size()) throw InvalidArgument("fd_check: gradient size mismatch");
    PolicyParams probe = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const double orig = params.values[i];
        probe.values[i] = orig + h;
        const long double fp = loss(probe);
        probe.values[i] = orig - h;
        const long double fm = loss(probe);
        probe.values[i] = orig;
        const double numeric = static_cast<double>((fp - fm) / (2.0L * static_cast<long double>(h)));
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const PolicyParams& params, std::uint64_t reward_calls, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    json j;
    j["format"] = "symrd-checkpoint";
    j["version"] = kCheckpointVersion;
    j["task"] = task_name(params.task);
    j["d"] = params.d;
    j["seed"] = params.seed;
    j["machines_per_stage"] = params.machines_per_stage;
    j["reward_calls"] = reward_calls;
    j["values"] = params.values;
    out << j.dump() << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::pair<PolicyParams, std::uint64_t> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    json j;
    try {
        in >> j;
        if (j.at("format").get<std::string>() != "symrd-checkpoint") {
            throw FormatError("not a symrd checkpoint");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw FormatError("unsupported checkpoint version");
        }
        PolicyParams p;
        p.task = task_from_name(j.at("task").get<std::string>());
        p.d = j.at("d").get<int>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.machines_per_stage = j.at("machines_per_stage").get<std::vector<int>>();
        p.values = j.at("values").get<std::vector<double>>();
        if (p.values.size() != param_count(p.task, p.d, p.machines_per_stage)) {
            throw FormatError("checkpoint parameter count does not match header");
        }
        return {std::move(p), j.at("reward_calls").get<std::uint64_t>()};
    } catch (const FormatError&) {
        throw;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

}  // namespace symrd
