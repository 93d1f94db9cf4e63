#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lyapsim/cli_io.hpp"
#include "lyapsim/control_law.hpp"
#include "lyapsim/delay.hpp"
#include "lyapsim/errors.hpp"
#include "lyapsim/experiments.hpp"
#include "lyapsim/shaping.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace lyapsim;

namespace {

using Matrix = std::vector<std::vector<Complex>>;

HermitianOperator to_operator(const Matrix& rows) {
    const std::size_t n = rows.size();
    std::vector<Complex> flat;
    flat.reserve(n * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw InputError("matrix must be square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return HermitianOperator(n, std::move(flat));
}

Matrix to_rows(const HermitianOperator& h) {
    Matrix rows(h.dim(), std::vector<Complex>(h.dim()));
    for (std::size_t r = 0; r < h.dim(); ++r)
        for (std::size_t c = 0; c < h.dim(); ++c) rows[r][c] = h(r, c);
    return rows;
}

std::vector<Complex> to_list(const QuantumState& s) { return {s.amplitudes().begin(), s.amplitudes().end()}; }

QuantumState to_state(const std::vector<Complex>& amps) { return QuantumState::normalized(amps); }

Trajectory run(const ControlSystem& sys, FieldLaw& law, const std::vector<Complex>& psi0, double horizon, double dt) {
    const auto start = to_state(psi0);
    py::gil_scoped_release release;
    return simulate(sys, law, start, horizon, dt);
}

py::dict sweep_row(const SweepRow& r) {
    return py::dict("parameter"_a = r.parameter, "mean_F"_a = r.mean_fidelity, "std_F"_a = r.std_fidelity,
                    "n"_a = r.trials);
}

py::list sweep_rows(const std::vector<SweepRow>& rows) {
    py::list out;
    for (const auto& r : rows) out.append(sweep_row(r));
    return out;
}

}  // namespace

PYBIND11_MODULE(_lyapsim, m) {
    m.doc() = "Lyapunov feedback control of closed quantum systems";
    m.attr("__version__") = std::string(kToolVersion);

    auto input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", input_error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ControlSystem>(m, "ControlSystem")
        .def(py::init([](const Matrix& h0, const Matrix& h1, const std::vector<Complex>& target, double gain_k) {
                 return ControlSystem(to_operator(h0), to_operator(h1), to_state(target), gain_k);
             }),
             "h0"_a, "h1"_a, "target"_a, "gain_k"_a = 1.0)
        .def_property_readonly("h0", [](const ControlSystem& s) { return to_rows(s.h0()); })
        .def_property_readonly("h1", [](const ControlSystem& s) { return to_rows(s.h1()); })
        .def_property_readonly("target", [](const ControlSystem& s) { return to_list(s.target()); })
        .def_property_readonly("gain_k", &ControlSystem::gain_k)
        .def_property_readonly("dim", &ControlSystem::dim)
        .def("with_gain", &ControlSystem::with_gain, "gain_k"_a);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("fields", &Trajectory::fields)
        .def_readonly("lyapunov", &Trajectory::lyapunov)
        .def_readonly("fidelity", &Trajectory::fidelity)
        .def_property_readonly("states",
                               [](const Trajectory& t) {
                                   std::vector<std::vector<Complex>> out;
                                   out.reserve(t.size());
                                   for (const auto& s : t.states) out.push_back(to_list(s));
                                   return out;
                               })
        .def_property_readonly("final_state", [](const Trajectory& t) { return to_list(t.final_state()); })
        .def_property_readonly("final_fidelity", &Trajectory::final_fidelity)
        .def("__len__", &Trajectory::size);

    py::class_<ConvergenceReport>(m, "ConvergenceReport")
        .def_readonly("spectrum_nondegenerate", &ConvergenceReport::spectrum_nondegenerate)
        .def_readonly("min_spectral_gap", &ConvergenceReport::min_spectral_gap)
        .def_readonly("couplings", &ConvergenceReport::couplings)
        .def_readonly("invariant_set_trivial", &ConvergenceReport::invariant_set_trivial)
        .def_readonly("target_index", &ConvergenceReport::target_index)
        .def_readonly("h0_eigenvalues", &ConvergenceReport::h0_eigenvalues)
        .def("__str__", [](const ConvergenceReport& r) { return format_report(r); });

    m.def("preset_5dim", &preset_5dim, "gain_k"_a = 1.0);
    m.def("bang_bang_demo_state",
          [] { return std::vector<double>(std::begin(kBangBangDemoState), std::end(kBangBangDemoState)); });

    m.def(
        "hermitian_eigen",
        [](const Matrix& h) {
            const auto eig = hermitian_eigen(to_operator(h));
            std::vector<std::vector<Complex>> vecs;
            for (const auto& v : eig.eigenvectors) vecs.emplace_back(v.entries().begin(), v.entries().end());
            return py::make_tuple(eig.eigenvalues, vecs);
        },
        "h"_a, "Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.");
    m.def(
        "expm_apply",
        [](const Matrix& h, double t, const std::vector<Complex>& v) {
            const auto out = expm_apply(to_operator(h), t, ComplexVector(v));
            return std::vector<Complex>(out.entries().begin(), out.entries().end());
        },
        "h"_a, "t"_a, "v"_a, "exp(-iHt) v");

    m.def(
        "fidelity", [](const std::vector<Complex>& psi, const ControlSystem& sys) { return fidelity(to_state(psi), sys.target()); },
        "psi"_a, "sys"_a);
    m.def(
        "lyapunov_value",
        [](const std::vector<Complex>& psi, const ControlSystem& sys) { return lyapunov_value(to_state(psi), sys.target()); },
        "psi"_a, "sys"_a);
    m.def(
        "control_field", [](const std::vector<Complex>& psi, const ControlSystem& sys) { return control_field(to_state(psi), sys); },
        "psi"_a, "sys"_a);
    m.def(
        "lyapunov_rate",
        [](const std::vector<Complex>& psi, const ControlSystem& sys, double f) { return lyapunov_rate(to_state(psi), sys, f); },
        "psi"_a, "sys"_a, "f"_a);
    m.def(
        "field_derivatives",
        [](const std::vector<Complex>& psi, const ControlSystem& sys) {
            const auto d = field_derivatives(to_state(psi), sys);
            return py::make_tuple(d.df_dt, d.d2f_dt2);
        },
        "psi"_a, "sys"_a, "(df/dt, d2f/dt2) along the closed loop.");
    m.def(
        "classify_critical_point",
        [](const std::vector<double>& a, std::size_t c) { return std::string(to_string(classify_critical_point(a, c))); },
        "a_eigenvalues"_a, "c"_a);
    m.def("check_convergence", &check_convergence, "sys"_a, "tol"_a = 1e-9);

    m.def(
        "simulate_feedback",
        [](const ControlSystem& sys, const std::vector<Complex>& psi0, double horizon, double dt) {
            FeedbackLaw law(sys);
            return run(sys, law, psi0, horizon, dt);
        },
        "sys"_a, "psi0"_a, "horizon"_a = 200.0, "dt"_a = 0.01);
    m.def(
        "simulate_law",
        [](const ControlSystem& sys, const std::function<double(double, const std::vector<Complex>&)>& law_fn,
           const std::vector<Complex>& psi0, double horizon, double dt) {
            FunctionLaw law([&](const StepContext& ctx) { return law_fn(ctx.time, to_list(ctx.state())); });
            return simulate(sys, law, to_state(psi0), horizon, dt);
        },
        "sys"_a, "law"_a, "psi0"_a, "horizon"_a = 200.0, "dt"_a = 0.01,
        "Closed loop with a Python field law law(t, psi) -> float, held over each step.");
    m.def(
        "simulate_delayed",
        [](const ControlSystem& sys, double tau, std::optional<std::string> mode, const std::vector<Complex>& psi0,
           double horizon, double dt) {
            const DelayMode dm = mode ? delay_mode_from_string(*mode) : default_delay_mode(tau);
            std::optional<Trajectory> reference;
            if (dm == DelayMode::replay) {
                FeedbackLaw raw(sys);
                reference = run(sys, raw, psi0, horizon, dt);
            }
            auto law = delayed_law(sys, DelaySpec{tau, dm}, horizon, reference ? &*reference : nullptr);
            return run(sys, *law, psi0, horizon, dt);
        },
        "sys"_a, "tau"_a, "mode"_a = py::none(), "psi0"_a, "horizon"_a = 200.0, "dt"_a = 0.01);
    m.def(
        "simulate_pulsed",
        [](const ControlSystem& sys, std::size_t n_pulses, const std::vector<Complex>& psi0, double horizon, double dt,
           const std::string& amplitude) {
            PulsedLaw law(sys, PulseTrainSpec{n_pulses, horizon, pulse_amplitude_from_string(amplitude)}, dt);
            auto traj = run(sys, law, psi0, horizon, dt);
            py::list pulses;
            for (const auto& p : law.train().pulses) pulses.append(py::make_tuple(p.start, p.duration, p.amplitude));
            return py::make_tuple(traj, pulses);
        },
        "sys"_a, "n_pulses"_a, "psi0"_a, "horizon"_a = 200.0, "dt"_a = 0.01, "amplitude"_a = "average",
        "Pulse-train run; returns (trajectory, [(start, duration, amplitude), ...]).");
    m.def(
        "simulate_bang_bang",
        [](const ControlSystem& sys, const std::vector<Complex>& psi0, double f0, double deadband, double horizon,
           double dt) {
            BangBangLaw law(sys, BangBangSpec{f0, deadband});
            return run(sys, law, psi0, horizon, dt);
        },
        "sys"_a, "psi0"_a, "f0"_a = 0.1, "deadband"_a = 1e-8, "horizon"_a = 200.0, "dt"_a = 0.01);
    m.def(
        "propagate_exact",
        [](const ControlSystem& sys, const std::vector<std::pair<double, double>>& segments,
           const std::vector<Complex>& psi0) {
            std::vector<FieldSegment> segs;
            for (const auto& [d, v] : segments) segs.push_back(FieldSegment{d, v});
            return propagate_exact(sys, segs, to_state(psi0));
        },
        "sys"_a, "segments"_a, "psi0"_a, "Exact propagation through (duration, field) segments.");

    m.def(
        "delay_sweep",
        [](const ControlSystem& sys, const std::vector<double>& taus, std::size_t n_states, std::uint64_t seed,
           std::optional<std::string> mode, double horizon, double dt) {
            std::optional<DelayMode> dm;
            if (mode) dm = delay_mode_from_string(*mode);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = delay_sweep(sys, taus, n_states, seed, dm, horizon, dt);
            }
            return sweep_rows(rows);
        },
        "sys"_a, "taus"_a, "n_states"_a = 10, "seed"_a = 0, "mode"_a = py::none(), "horizon"_a = 200.0, "dt"_a = 0.01);
    m.def(
        "pulse_count_sweep",
        [](const ControlSystem& sys, const std::vector<std::size_t>& counts, std::size_t n_states, std::uint64_t seed,
           double horizon, double dt, const std::string& amplitude) {
            const auto rule = pulse_amplitude_from_string(amplitude);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = pulse_count_sweep(sys, counts, n_states, seed, horizon, dt, rule);
            }
            return sweep_rows(rows);
        },
        "sys"_a, "counts"_a, "n_states"_a = 10, "seed"_a = 0, "horizon"_a = 200.0, "dt"_a = 0.01,
        "amplitude"_a = "average");
    m.def(
        "dimension_scaling",
        [](const std::string& config_json) {
            const auto cfg = parse_config(config_json);
            ScalingResult result;
            {
                py::gil_scoped_release release;
                result = run_dimension_scaling(cfg);
            }
            py::list out;
            for (const auto& r : result.rows)
                out.append(py::dict("dim"_a = r.dim, "mean_convergence_time"_a = r.mean_convergence_time,
                                    "n_nonconverged"_a = r.n_nonconverged,
                                    "mean_fidelity_at_time"_a = r.mean_fidelity_at_time, "trials"_a = r.trials,
                                    "generation_retries"_a = r.generation_retries));
            return out;
        },
        "config_json"_a, "Runs the dimension sweep described by a JSON config (preset fig5 defaults apply).");
    m.def(
        "sweep_initial_states",
        [](std::size_t dim, std::size_t n, std::uint64_t seed) {
            std::vector<std::vector<Complex>> out;
            for (const auto& s : sweep_initial_states(dim, n, seed)) out.push_back(to_list(s));
            return out;
        },
        "dim"_a, "n_states"_a, "seed"_a);

    m.def(
        "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); }, "text"_a,
        "Validates a JSON config and returns it with all defaults filled in.");
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> all = {"lyapsim"};
            all.insert(all.end(), args.begin(), args.end());
            std::vector<const char*> argv;
            for (const auto& a : all) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        "args"_a, "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
