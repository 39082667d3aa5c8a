#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qoct/errors.hpp"
#include "qoct/krotov.hpp"
#include "qoct/lz.hpp"
#include "qoct/model.hpp"
#include "qoct/propagation.hpp"
#include "qoct/qsl.hpp"
#include "qoct/spin_chain.hpp"
#include "qoct/types.hpp"

namespace py = pybind11;
using namespace qoct;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quantum optimal control core: models, Krotov pulse optimization, "
              "and quantum-speed-limit estimators";
    m.attr("__version__") = "0.1.0";

    // Error hierarchy: everything derives from qoct.Error.
    const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);
    py::register_exception<DegenerateGroundStateError>(m, "DegenerateGroundStateError", base);
    py::register_exception<ZeroSpreadError>(m, "ZeroSpreadError", base);
    py::register_exception<UnbracketedError>(m, "UnbracketedError", base);
    py::register_exception<ScanFailedError>(m, "ScanFailedError", base);
    py::register_exception<UpdateError>(m, "UpdateError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<IoError>(m, "IoError", base);

    // ---- core types ----

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, Index>(), py::arg("total_time"), py::arg("steps"))
        .def_property_readonly("total_time", &TimeGrid::total_time)
        .def_property_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("dt", &TimeGrid::dt)
        .def_property_readonly("num_nodes", &TimeGrid::num_nodes)
        .def("node_time", &TimeGrid::node_time, py::arg("node"))
        .def("__repr__", [](const TimeGrid& g) {
            return "TimeGrid(total_time=" + std::to_string(g.total_time()) +
                   ", steps=" + std::to_string(g.steps()) + ")";
        });

    py::class_<QuantumState>(m, "QuantumState")
        .def(py::init<CVector, bool>(), py::arg("amplitudes"), py::arg("normalized") = true)
        .def_static("basis_state", &QuantumState::basis_state, py::arg("dim"), py::arg("index"))
        .def_property_readonly("dim", &QuantumState::dim)
        .def_property_readonly("amplitudes",
                               [](const QuantumState& s) { return s.amplitudes(); })
        .def_property_readonly("norm", &QuantumState::norm);

    py::class_<HermitianOperator>(m, "HermitianOperator")
        .def(py::init<CMatrix>(), py::arg("matrix"))
        .def_static("real_tridiagonal", &HermitianOperator::real_tridiagonal,
                    py::arg("diagonal"), py::arg("subdiagonal"))
        .def_property_readonly("dim", &HermitianOperator::dim)
        .def_property_readonly("matrix",
                               [](const HermitianOperator& h) { return h.matrix(); });

    py::class_<ControlPulse>(m, "ControlPulse")
        .def(py::init<std::vector<std::string>, RMatrix>(), py::arg("names"),
             py::arg("samples"))
        .def_static("constant", &ControlPulse::constant, py::arg("names"), py::arg("values"),
                    py::arg("grid"))
        .def_property_readonly("num_controls", &ControlPulse::num_controls)
        .def_property_readonly("num_nodes", &ControlPulse::num_nodes)
        .def_property_readonly("names",
                               [](const ControlPulse& p) { return p.names(); })
        .def_property(
            "samples", [](const ControlPulse& p) { return p.samples(); },
            [](ControlPulse& p, const RMatrix& values) {
                if (values.rows() != p.num_controls())
                    throw ValidationError("sample matrix must keep one row per control");
                p.samples() = values;
            })
        .def("value", &ControlPulse::value, py::arg("control"), py::arg("node"))
        .def("matches", &ControlPulse::matches, py::arg("grid"));

    // ---- propagation ----

    py::enum_<PropagatorBackend>(m, "PropagatorBackend")
        .value("automatic", PropagatorBackend::automatic)
        .value("dense_eigen", PropagatorBackend::dense_eigen)
        .value("analytic_2x2", PropagatorBackend::analytic_2x2)
        .value("chebyshev", PropagatorBackend::chebyshev);

    py::enum_<Direction>(m, "Direction")
        .value("forward", Direction::forward)
        .value("backward", Direction::backward);

    m.def("evolve_step", &evolve_step, py::arg("state"), py::arg("hamiltonian"), py::arg("dt"),
          py::arg("backend") = PropagatorBackend::automatic,
          "exp(-i H dt) applied to the state");

    m.def(
        "propagate",
        [](const QuantumState& initial, const HamiltonianSupplier& hamiltonian_at,
           const TimeGrid& grid, Direction direction, PropagatorBackend backend) {
            return propagate(initial, hamiltonian_at, grid, direction, nullptr, backend);
        },
        py::arg("initial"), py::arg("hamiltonian_at"), py::arg("grid"),
        py::arg("direction") = Direction::forward,
        py::arg("backend") = PropagatorBackend::automatic,
        "Piecewise-constant propagation; hamiltonian_at maps a node index to an operator");

    m.def(
        "propagate_with_pulse",
        [](const ControlledModel& model, const ControlPulse& pulse, const TimeGrid& grid,
           Direction direction) {
            return propagate(model_boundary_states(model).first,
                             pulse_node_supplier(model, pulse), grid, direction, nullptr,
                             model.backend());
        },
        py::arg("model"), py::arg("pulse"), py::arg("grid"),
        py::arg("direction") = Direction::forward,
        "Propagate the model's initial state under the given pulse");

    m.def(
        "trajectory_with_pulse",
        [](const ControlledModel& model, const ControlPulse& pulse, const TimeGrid& grid) {
            Trajectory trajectory;
            propagate(model.initial_state(), pulse_node_supplier(model, pulse), grid,
                      Direction::forward, &trajectory, model.backend());
            return trajectory.states;
        },
        py::arg("model"), py::arg("pulse"), py::arg("grid"),
        "Forward trajectory of the model's initial state: one amplitude vector per node");

    m.def("overlap", &overlap, py::arg("a"), py::arg("b"));
    m.def("infidelity", &infidelity, py::arg("final_state"), py::arg("goal"));
    m.def("ground_state", &ground_state, py::arg("hamiltonian"));

    py::class_<EnergyStats>(m, "EnergyStats")
        .def_readonly("mean", &EnergyStats::mean)
        .def_readonly("spread", &EnergyStats::spread);
    m.def("energy_stats", &energy_stats, py::arg("hamiltonian"), py::arg("phi"));

    // ---- models ----

    py::class_<ControlledModel>(m, "ControlledModel")
        .def_property_readonly("dim", &ControlledModel::dim)
        .def_property_readonly("num_controls", &ControlledModel::num_controls)
        .def_property_readonly("control_names",
                               [](const ControlledModel& mdl) { return mdl.control_names(); })
        .def("hamiltonian", &ControlledModel::hamiltonian, py::arg("controls"))
        .def("control_derivative", &ControlledModel::control_derivative, py::arg("k"),
             py::arg("controls"))
        .def("initial_state", &ControlledModel::initial_state)
        .def("goal_state", &ControlledModel::goal_state)
        .def("guess_pulse", &ControlledModel::guess_pulse, py::arg("grid"))
        .def_property_readonly("backend", &ControlledModel::backend);

    py::class_<LZModel, ControlledModel>(m, "LZModel")
        .def(py::init<double, double>(), py::arg("omega"), py::arg("gamma0"))
        .def_property_readonly("omega", &LZModel::omega)
        .def_property_readonly("gamma0", &LZModel::gamma0)
        .def_property_readonly("gamma_final", &LZModel::gamma_final)
        .def("gap", &LZModel::gap, py::arg("gamma"))
        .def("guess_rate", &LZModel::guess_rate, py::arg("total_time"))
        .def("hamiltonian_for", &LZModel::hamiltonian_for, py::arg("gamma"));

    py::class_<SpinChainModel, ControlledModel>(m, "SpinChainModel")
        .def(py::init<Index, double, std::optional<double>>(), py::arg("length"),
             py::arg("coupling"), py::arg("guess_trap_strength") = std::nullopt)
        .def_property_readonly("length", &SpinChainModel::length)
        .def_property_readonly("coupling", &SpinChainModel::coupling)
        .def_property_readonly("guess_trap_strength", &SpinChainModel::guess_trap_strength)
        .def("hamiltonian_for", &SpinChainModel::hamiltonian_for, py::arg("trap_strength"),
             py::arg("trap_center"));

    m.def("model_boundary_states", &model_boundary_states, py::arg("model"),
          "(initial, goal) pair of the model");
    m.def("hamiltonian_at_node", &hamiltonian_at_node, py::arg("model"), py::arg("pulse"),
          py::arg("node"));

    // ---- optimizer ----

    py::enum_<ShapeFunction>(m, "ShapeFunction")
        .value("sin_squared", ShapeFunction::sin_squared)
        .value("flat", ShapeFunction::flat);
    m.def("shape_value", &shape_value, py::arg("shape"), py::arg("t"), py::arg("total_time"));

    py::class_<ControlBounds>(m, "ControlBounds")
        .def(py::init([](RVector lower, RVector upper) {
                 ControlBounds b;
                 b.lower = std::move(lower);
                 b.upper = std::move(upper);
                 return b;
             }),
             py::arg("lower"), py::arg("upper"))
        .def_readwrite("lower", &ControlBounds::lower)
        .def_readwrite("upper", &ControlBounds::upper);

    py::class_<KrotovConfig>(m, "KrotovConfig")
        .def(py::init<>())
        .def_readwrite("step_weights", &KrotovConfig::step_weights)
        .def_readwrite("shape", &KrotovConfig::shape)
        .def_readwrite("max_iterations", &KrotovConfig::max_iterations)
        .def_readwrite("target_infidelity", &KrotovConfig::target_infidelity)
        .def_readwrite("stall_window", &KrotovConfig::stall_window)
        .def_readwrite("stall_threshold", &KrotovConfig::stall_threshold)
        .def_readwrite("max_weight_doublings", &KrotovConfig::max_weight_doublings)
        .def_readwrite("control_bounds", &KrotovConfig::control_bounds)
        .def_readwrite("backend", &KrotovConfig::backend);

    py::class_<OptimizationRecord>(m, "OptimizationRecord")
        .def_readonly("infidelity_trace", &OptimizationRecord::infidelity_trace)
        .def_readonly("final_pulse", &OptimizationRecord::final_pulse)
        .def_readonly("converged", &OptimizationRecord::converged)
        .def_readonly("iterations_used", &OptimizationRecord::iterations_used)
        .def_readonly("stop_reason", &OptimizationRecord::stop_reason)
        .def_readonly("final_step_weights", &OptimizationRecord::final_step_weights);

    m.def("default_step_weights", &default_step_weights, py::arg("guess"));
    m.def("krotov_sweep", &krotov_sweep, py::arg("model"), py::arg("pulse"), py::arg("grid"),
          py::arg("config"), "One sweep; returns (updated_pulse, infidelity)");
    m.def("optimize", &optimize, py::arg("model"), py::arg("guess"), py::arg("grid"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>(),
          "Krotov optimization loop with monotonicity enforcement");

    py::class_<GradientProbe>(m, "GradientProbe")
        .def_readonly("analytic", &GradientProbe::analytic)
        .def_readonly("numeric", &GradientProbe::numeric);
    m.def("gradient_check", &gradient_check, py::arg("model"), py::arg("pulse"),
          py::arg("grid"), py::arg("node"), py::arg("control"), py::arg("eps") = 1e-6,
          py::arg("backend") = PropagatorBackend::automatic);

    // ---- speed-limit estimators ----

    py::enum_<QSLMethod>(m, "QSLMethod")
        .value("bhattacharyya_static", QSLMethod::bhattacharyya_static)
        .value("curvature", QSLMethod::curvature)
        .value("threshold_scan", QSLMethod::threshold_scan)
        .value("mean_spread_bound_1", QSLMethod::mean_spread_bound_1)
        .value("mean_spread_bound_2", QSLMethod::mean_spread_bound_2);

    py::class_<QSLEstimate>(m, "QSLEstimate")
        .def_readonly("t_qsl", &QSLEstimate::t_qsl)
        .def_readonly("method", &QSLEstimate::method)
        .def_readonly("details", &QSLEstimate::details)
        .def_readonly("warnings", &QSLEstimate::warnings)
        .def("__repr__", [](const QSLEstimate& e) {
            return "QSLEstimate(t_qsl=" + std::to_string(e.t_qsl) +
                   ", method=" + to_string(e.method) + ")";
        });

    m.def("bhattacharyya_static_tqsl", &bhattacharyya_static_tqsl, py::arg("h0"),
          py::arg("psi0"), py::arg("psi_goal"),
          "Static bound arccos|<psi0|psi_goal>| / spread(h0, psi0)");

    py::enum_<SpreadReference>(m, "SpreadReference")
        .value("fixed_endpoint", SpreadReference::fixed_endpoint)
        .value("evolving", SpreadReference::evolving);
    py::enum_<FixedStateChoice>(m, "FixedStateChoice")
        .value("initial", FixedStateChoice::initial)
        .value("target", FixedStateChoice::target)
        .value("not_applicable", FixedStateChoice::not_applicable);

    py::class_<EnergySpreadProfile>(m, "EnergySpreadProfile")
        .def_readonly("times", &EnergySpreadProfile::times)
        .def_readonly("spread_values", &EnergySpreadProfile::spread_values)
        .def_readonly("mean", &EnergySpreadProfile::mean)
        .def_readonly("reference", &EnergySpreadProfile::reference)
        .def_readonly("fixed_state", &EnergySpreadProfile::fixed_state);

    m.def("mean_energy_spread", &mean_energy_spread, py::arg("model"), py::arg("pulse"),
          py::arg("grid"), py::arg("reference"),
          py::arg("backend") = PropagatorBackend::automatic,
          py::call_guard<py::gil_scoped_release>());
    m.def("per_site_bound", &per_site_bound, py::arg("profile1"), py::arg("profile2"),
          py::arg("n_sites"));

    py::class_<CurvatureSeries>(m, "CurvatureSeries")
        .def_readonly("log_n", &CurvatureSeries::log_n)
        .def_readonly("d2", &CurvatureSeries::d2)
        .def_readonly("clamped", &CurvatureSeries::clamped);
    m.def("loglog_second_derivative", &loglog_second_derivative,
          py::arg("infidelity_trace"));
    m.def("curvature_statistic", &curvature_statistic, py::arg("series"));

    py::class_<CurvaturePoint>(m, "CurvaturePoint")
        .def_readonly("total_time", &CurvaturePoint::total_time)
        .def_readonly("statistic", &CurvaturePoint::statistic);

    m.def(
        "detect_tqsl_curvature",
        [](const ControlledModel& model, const std::vector<double>& t_grid,
           const StepRule& steps_for, const KrotovConfig& config) {
            std::vector<CurvaturePoint> points;
            const QSLEstimate est =
                detect_tqsl_curvature(model, t_grid, steps_for, config, &points);
            return std::make_pair(est, points);
        },
        py::arg("model"), py::arg("t_grid"), py::arg("steps_for"), py::arg("config"),
        "Runs an optimization per duration and locates the curvature sign change; "
        "returns (estimate, per-duration statistics)");

    py::class_<ThresholdScanConfig>(m, "ThresholdScanConfig")
        .def(py::init<>())
        .def_readwrite("infidelity_target", &ThresholdScanConfig::infidelity_target)
        .def_readwrite("iteration_budget", &ThresholdScanConfig::iteration_budget)
        .def_readwrite("t_grid", &ThresholdScanConfig::t_grid)
        .def_readwrite("bisection_depth", &ThresholdScanConfig::bisection_depth);

    m.def("threshold_time_scan",
          py::overload_cast<const ControlledModel&, const ThresholdScanConfig&,
                            const StepRule&, const KrotovConfig&>(&threshold_time_scan),
          py::arg("model"), py::arg("config"), py::arg("steps_for"),
          py::arg("optimizer_config"),
          "Smallest duration whose optimization reaches the target infidelity");

    py::class_<LineFit>(m, "LineFit")
        .def_readonly("slope", &LineFit::slope)
        .def_readonly("intercept", &LineFit::intercept)
        .def_readonly("r_squared", &LineFit::r_squared);
    m.def("fit_line", &fit_line, py::arg("xs"), py::arg("ys"));
}
