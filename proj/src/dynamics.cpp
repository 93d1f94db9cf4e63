#include "lyapsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyapsim/control_law.hpp"
#include "lyapsim/errors.hpp"

namespace lyapsim {

namespace {

constexpr double kEigenvectorTolerance = 1e-9;
constexpr double kNormDriftLimit = 1e-6;

// out = −i·H·v
void minus_i_apply(const HermitianOperator& h, std::span<const Complex> v, std::span<Complex> out) {
    const std::size_t n = h.dim();
    for (std::size_t i = 0; i < n; ++i) {
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) s += h(i, j) * v[j];
        out[i] = Complex{s.imag(), -s.real()};
    }
}

void record(Trajectory& traj, double t, const QuantumState& psi, const QuantumState& target) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
    const double fid = fidelity(psi, target);
    traj.fidelity.push_back(fid);
    traj.lyapunov.push_back(1.0 - fid);
}

}  // namespace

ControlSystem::ControlSystem(HermitianOperator h0, HermitianOperator h1, QuantumState target, double gain_k)
    : h0_(std::move(h0)), h1_(std::move(h1)), target_(std::move(target)), gain_k_(gain_k) {
    if (h0_.dim() != h1_.dim() || h0_.dim() != target_.dim())
        throw InputError("ControlSystem: H0, H1 and target must share one dimension");
    if (!(gain_k_ > 0.0) || !std::isfinite(gain_k_)) throw InputError("ControlSystem: gain_k must be positive");

    const ComplexVector h0_target = apply(h0_, target_.vector());
    const Complex energy = inner(target_.vector(), h0_target);
    double residual = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) residual += std::norm(h0_target[i] - energy * target_[i]);
    if (std::sqrt(residual) > kEigenvectorTolerance)
        throw InputError("ControlSystem: target is not an eigenvector of H0");
}

ControlSystem ControlSystem::with_gain(double gain_k) const { return ControlSystem(h0_, h1_, target_, gain_k); }

StepResult rk4_step_checked(const ControlSystem& sys, const QuantumState& psi, double f, double dt) {
    if (!(dt > 0.0)) throw InputError("rk4_step: dt must be positive");
    const std::size_t n = sys.dim();
    if (psi.dim() != n) throw InputError("rk4_step: state dimension does not match the system");

    const HermitianOperator h = sys.h0().combined(1.0, sys.h1(), f);
    const auto y = psi.amplitudes();
    std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);

    minus_i_apply(h, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    minus_i_apply(h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    minus_i_apply(h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    minus_i_apply(h, tmp, k4);

    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = y[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        norm2 += std::norm(tmp[i]);
    }
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm) || norm == 0.0) throw NumericalError("rk4_step: non-finite state");
    for (auto& z : tmp) z /= norm;
    return StepResult{QuantumState(ComplexVector(std::move(tmp))), std::abs(norm - 1.0)};
}

QuantumState rk4_step(const ControlSystem& sys, const QuantumState& psi, double f, double dt) {
    return rk4_step_checked(sys, psi, f, dt).state;
}

std::size_t step_count(double horizon, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw InputError("horizon must be at least dt");
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

Trajectory simulate(const ControlSystem& sys, FieldLaw& law, const QuantumState& psi0, double horizon, double dt) {
    if (psi0.dim() != sys.dim()) throw InputError("simulate: initial state dimension does not match the system");
    const std::size_t steps = step_count(horizon, dt);

    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.fields.reserve(steps + 1);
    traj.lyapunov.reserve(steps + 1);
    traj.fidelity.reserve(steps + 1);

    record(traj, 0.0, psi0, sys.target());
    for (std::size_t i = 0;; ++i) {
        const StepContext ctx{i, traj.times.back(), dt, steps, traj.times, traj.states};
        const double f = law(ctx);
        if (!std::isfinite(f)) throw NumericalError("simulate: field law returned a non-finite value");
        traj.fields.push_back(f);
        if (i == steps) break;

        auto [next, drift] = rk4_step_checked(sys, traj.states.back(), f, dt);
        if (drift > kNormDriftLimit) {
            throw NumericalError("simulate: norm drift " + std::to_string(drift) + " at step " + std::to_string(i) +
                                 " exceeds 1e-6; reduce dt");
        }
        record(traj, static_cast<double>(i + 1) * dt, next, sys.target());
    }
    return traj;
}

Trajectory propagate_exact(const ControlSystem& sys, std::span<const FieldSegment> segments,
                           const QuantumState& psi0) {
    if (psi0.dim() != sys.dim()) throw InputError("propagate_exact: initial state dimension does not match");
    Trajectory traj;
    record(traj, 0.0, psi0, sys.target());
    double t = 0.0;
    for (const auto& seg : segments) {
        if (!(seg.duration > 0.0)) throw InputError("propagate_exact: segment durations must be positive");
        const HermitianOperator h = sys.h0().combined(1.0, sys.h1(), seg.value);
        traj.fields.push_back(seg.value);
        const ComplexVector next = expm_apply(h, seg.duration, traj.states.back().vector());
        t += seg.duration;
        record(traj, t, QuantumState::normalized(next), sys.target());
    }
    traj.fields.push_back(segments.empty() ? 0.0 : segments.back().value);
    return traj;
}

PiecewiseConstantLaw::PiecewiseConstantLaw(std::vector<FieldSegment> segments) : segments_(std::move(segments)) {
    double t = 0.0;
    for (const auto& seg : segments_) {
        if (!(seg.duration > 0.0)) throw InputError("PiecewiseConstantLaw: segment durations must be positive");
        t += seg.duration;
        ends_.push_back(t);
    }
}

double PiecewiseConstantLaw::operator()(const StepContext& ctx) {
    // boundaries are compared with a slack well below one step
    const double t = ctx.time + 1e-6 * ctx.dt;
    const auto it = std::upper_bound(ends_.begin(), ends_.end(), t);
    if (it == ends_.end()) return 0.0;
    return segments_[static_cast<std::size_t>(it - ends_.begin())].value;
}

}  // namespace lyapsim
