#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "symrd/env.hpp"
#include "symrd/instance.hpp"
#include "symrd/metrics.hpp"
#include "symrd/policy.hpp"
#include "symrd/symmetry.hpp"
#include "symrd/training.hpp"
#include "symrd/verify.hpp"

namespace py = pybind11;
using namespace symrd;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Symmetric reinforcement distillation for combinatorial optimization";

    py::register_exception<Error>(m, "SymrdError");

    py::enum_<Task>(m, "Task")
        .value("TSP", Task::TSP)
        .value("ATSP", Task::ATSP)
        .value("CVRP", Task::CVRP)
        .value("FFSP", Task::FFSP);

    py::enum_<Method>(m, "Method")
        .value("RL_ONLY", Method::RlOnly)
        .value("SYMRD", Method::Symrd)
        .value("MAXENT", Method::MaxEnt)
        .value("MULTISTART", Method::MultiStart)
        .value("NONSYM_DISTILL", Method::NonsymDistill);

    py::enum_<TransformPolicy>(m, "TransformPolicy")
        .value("UNIFORM", TransformPolicy::Uniform)
        .value("IDENTITY", TransformPolicy::Identity);

    py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>()).def("fork", &Rng::fork);

    py::class_<BudgetLedger>(m, "BudgetLedger")
        .def(py::init<>())
        .def("count", &BudgetLedger::count)
        .def("add", &BudgetLedger::add, py::arg("n") = 1);

    py::class_<ProblemInstance>(m, "ProblemInstance")
        .def_static("tsp", &ProblemInstance::tsp)
        .def_static("atsp", &ProblemInstance::atsp)
        .def_static("cvrp", &ProblemInstance::cvrp)
        .def_static("ffsp", &ProblemInstance::ffsp)
        .def_property_readonly("task", &ProblemInstance::task)
        .def_property_readonly("size", &ProblemInstance::size)
        .def_property_readonly("coords", &ProblemInstance::coords)
        .def_property_readonly("demands", &ProblemInstance::demands)
        .def_property_readonly("capacity", &ProblemInstance::capacity)
        .def_property_readonly("proc", &ProblemInstance::proc)
        .def("dist", &ProblemInstance::dist)
        .def("__eq__", [](const ProblemInstance& a, const ProblemInstance& b) { return a == b; });

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("task", &Dataset::task)
        .def_readonly("n", &Dataset::n)
        .def_readonly("seed", &Dataset::seed)
        .def_readonly("instances", &Dataset::instances)
        .def("__len__", [](const Dataset& d) { return d.instances.size(); })
        .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

    m.def("generate", &generate, py::arg("task"), py::arg("n"), py::arg("count"), py::arg("seed"));
    m.def("sample_instance", &sample_instance);
    m.def("save", &save);
    m.def("load", &load);
    m.def("file_hash", &file_hash);

    py::class_<Trajectory>(m, "Trajectory")
        .def(py::init([](Task task, std::vector<int> actions, std::vector<int> machine_order) {
                 Trajectory t;
                 t.task = task;
                 t.actions = std::move(actions);
                 t.machine_order = std::move(machine_order);
                 return t;
             }),
             py::arg("task"), py::arg("actions"), py::arg("machine_order") = std::vector<int>())
        .def_readonly("task", &Trajectory::task)
        .def_readonly("actions", &Trajectory::actions)
        .def_readonly("machine_order", &Trajectory::machine_order)
        .def("__eq__", [](const Trajectory& a, const Trajectory& b) { return a == b; });

    py::class_<Solution>(m, "Solution")
        .def_readonly("task", &Solution::task)
        .def_readonly("cycle", &Solution::cycle)
        .def_readonly("routes", &Solution::routes)
        .def_readonly("schedule", &Solution::schedule)
        .def("__eq__", [](const Solution& a, const Solution& b) { return a == b; })
        .def("__lt__", [](const Solution& a, const Solution& b) { return a < b; });

    py::class_<State>(m, "State")
        .def_property_readonly("prefix", &State::prefix)
        .def_property_readonly("terminal", &State::terminal)
        .def("feasible_mask", [](const State& s) { return s.feasible_mask(); });

    m.def("initial_state", &initial_state);
    m.def("step", &step);
    m.def("validate_trajectory", &validate_trajectory);
    m.def("trajectory_cost", &trajectory_cost);
    m.def("episodic_reward", &episodic_reward);
    m.def("solution_of", &solution_of);
    m.def("solution_cost", &solution_cost);
    m.def("enumerate_all_trajectories", &enumerate_all_trajectories, py::arg("inst"),
          py::arg("limit") = 2000000);
    m.def("random_trajectory", &random_trajectory);
    m.def("brute_force_best", &brute_force_best);

    py::class_<Orbit>(m, "Orbit")
        .def_readonly("solution", &Orbit::solution)
        .def_readonly("members", &Orbit::members)
        .def_readonly("multiplicity", &Orbit::multiplicity);

    m.def("sample_symmetric", &sample_symmetric);
    m.def("enumerate_orbit", &enumerate_orbit);
    m.def("orbit_size", &orbit_size);
    m.def("hamming_distance", &hamming_distance);
    m.def("verify_preserving", &verify_preserving);

    py::class_<PolicyParams>(m, "PolicyParams")
        .def_readonly("task", &PolicyParams::task)
        .def_readonly("d", &PolicyParams::d)
        .def_readonly("seed", &PolicyParams::seed)
        .def_readwrite("values", &PolicyParams::values);

    py::class_<GradientBundle>(m, "GradientBundle")
        .def_readonly("loss", &GradientBundle::loss)
        .def_readonly("grad", &GradientBundle::grad);

    py::class_<SampleResult>(m, "SampleResult")
        .def_readonly("trajectory", &SampleResult::trajectory)
        .def_readonly("log_prob", &SampleResult::log_prob)
        .def_readonly("reward", &SampleResult::reward);

    m.def("param_count", &param_count, py::arg("task"), py::arg("d"),
          py::arg("machines_per_stage") = std::vector<int>());
    m.def("init_params", &init_params, py::arg("task"), py::arg("d"), py::arg("seed"),
          py::arg("machines_per_stage") = std::vector<int>());
    m.def("init_params_for", &init_params_for, py::arg("inst"), py::arg("d"), py::arg("seed"));
    m.def("uniform_params", &uniform_params, py::arg("task"), py::arg("d"),
          py::arg("machines_per_stage") = std::vector<int>());
    m.def("log_prob", &log_prob);
    m.def("sample_trajectory", &sample_trajectory);
    m.def("greedy_trajectory", &greedy_trajectory);
    m.def("critic_value", &critic_value);
    m.def("grad_reinforce", &grad_reinforce);
    m.def("grad_ssd", [](const PolicyParams& p, const ProblemInstance& i, const std::vector<Trajectory>& ts) {
        return grad_ssd(p, i, ts);
    });
    m.def("entropy_bonus_term", &entropy_bonus_term);
    m.def("grad_critic_mse", &grad_critic_mse);
    m.def("save_checkpoint", &save_checkpoint);
    m.def("load_checkpoint", &load_checkpoint);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("task", &TrainConfig::task)
        .def_readwrite("n", &TrainConfig::n)
        .def_readwrite("method", &TrainConfig::method)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("k_max", &TrainConfig::k_max)
        .def_readwrite("distill_scaler", &TrainConfig::distill_scaler)
        .def_readwrite("transform_width", &TrainConfig::transform_width)
        .def_readwrite("distill_period", &TrainConfig::distill_period)
        .def_readwrite("transform", &TrainConfig::transform)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("lr_milestones", &TrainConfig::lr_milestones)
        .def_readwrite("lr_gamma", &TrainConfig::lr_gamma)
        .def_readwrite("alpha", &TrainConfig::alpha)
        .def_readwrite("critic_coef", &TrainConfig::critic_coef)
        .def_readwrite("multistart_p", &TrainConfig::multistart_p)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("val_seed", &TrainConfig::val_seed)
        .def_readwrite("val_count", &TrainConfig::val_count)
        .def_readwrite("val_dataset", &TrainConfig::val_dataset)
        .def_readwrite("grid", &TrainConfig::grid)
        .def_readwrite("policy_dim", &TrainConfig::policy_dim)
        .def_readwrite("l1_instances", &TrainConfig::l1_instances)
        .def_readwrite("l1_draws", &TrainConfig::l1_draws)
        .def_readwrite("save_checkpoints", &TrainConfig::save_checkpoints)
        .def_readwrite("distill_target", &TrainConfig::distill_target);

    m.def("default_config", &default_config);
    m.def("parse_config_text", &parse_config_text);
    m.def("config_to_text", &config_to_text);

    py::class_<HistoryRecord>(m, "HistoryRecord")
        .def_readonly("k", &HistoryRecord::k)
        .def_readonly("val_cost", &HistoryRecord::val_cost)
        .def_readonly("train_mean_reward", &HistoryRecord::train_mean_reward)
        .def_readonly("ssd_loss", &HistoryRecord::ssd_loss)
        .def_readonly("l1_gap", &HistoryRecord::l1_gap)
        .def_readonly("wall_ms", &HistoryRecord::wall_ms);

    py::class_<TrainHistory>(m, "TrainHistory")
        .def_readonly("records", &TrainHistory::records)
        .def("same_results", &TrainHistory::same_results);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("history", &TrainResult::history)
        .def_readonly("params", &TrainResult::params)
        .def_readonly("reward_calls", &TrainResult::reward_calls)
        .def_readonly("rl_steps", &TrainResult::rl_steps)
        .def_readonly("ssd_steps", &TrainResult::ssd_steps);

    m.def("train", &train, py::arg("config"), py::arg("checkpoint_dir") = std::string(),
          py::call_guard<py::gil_scoped_release>());

    m.def("validate_cost",
          [](const PolicyParams& p, const Dataset& d) { return validate_cost(p, d); });
    m.def("l1_symmetry_gap",
          [](const PolicyParams& p, const std::vector<ProblemInstance>& insts, int samples, Rng& rng) {
              return l1_symmetry_gap(p, insts, samples, rng);
          });

    py::class_<EntropyDecomposition>(m, "EntropyDecomposition")
        .def_readonly("h_traj", &EntropyDecomposition::h_traj)
        .def_readonly("h_sol", &EntropyDecomposition::h_sol)
        .def_readonly("e_cond", &EntropyDecomposition::e_cond)
        .def_readonly("h_uniform_bound", &EntropyDecomposition::h_uniform_bound);

    m.def("entropy_decomposition_exact", &entropy_decomposition_exact);
    m.def("auc_topk", [](const std::vector<std::pair<double, double>>& curve, double k_max) {
        return auc_topk(curve, k_max);
    });
    m.def("optimality_gap", [](const PolicyParams& p, const std::vector<ProblemInstance>& insts) {
        return optimality_gap(p, insts);
    });

    py::class_<SuiteResult>(m, "SuiteResult")
        .def_readonly("name", &SuiteResult::name)
        .def_readonly("passed", &SuiteResult::passed)
        .def_readonly("checks", &SuiteResult::checks)
        .def_readonly("failures", &SuiteResult::failures)
        .def_readonly("detail", &SuiteResult::detail);

    m.def("run_verify", [](Task task, int n, int trials, std::uint64_t seed) {
        VerifyOptions opts;
        opts.task = task;
        opts.n = n;
        opts.trials = trials;
        opts.seed = seed;
        return run_verify(opts);
    });
}
