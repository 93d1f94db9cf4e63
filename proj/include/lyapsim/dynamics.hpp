#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lyapsim/linalg.hpp"

namespace lyapsim {

/// Control problem i·dψ/dt = (H₀ + f(t)·H₁)ψ steered toward `target`.
///
/// Invariants checked on construction: shared dimension, target is an
/// eigenvector of H₀ (residual ≤ 1e-9) and gain_k > 0.
class ControlSystem {
public:
    ControlSystem(HermitianOperator h0, HermitianOperator h1, QuantumState target, double gain_k);

    const HermitianOperator& h0() const noexcept { return h0_; }
    const HermitianOperator& h1() const noexcept { return h1_; }
    const QuantumState& target() const noexcept { return target_; }
    double gain_k() const noexcept { return gain_k_; }
    std::size_t dim() const noexcept { return h0_.dim(); }

    ControlSystem with_gain(double gain_k) const;

private:
    HermitianOperator h0_;
    HermitianOperator h1_;
    QuantumState target_;
    double gain_k_;
};

/// Sampled closed-loop run. fields[i] is the value applied on [times[i], times[i+1]);
/// the final entry is the law evaluated at the last sample.
struct Trajectory {
    std::vector<double> times;
    std::vector<QuantumState> states;
    std::vector<double> fields;
    std::vector<double> lyapunov;
    std::vector<double> fidelity;

    std::size_t size() const noexcept { return times.size(); }
    const QuantumState& final_state() const { return states.back(); }
    double final_fidelity() const { return fidelity.back(); }
};

/// What a field law sees when asked for the value at the start of step `step`.
/// `times` and `states` hold samples 0..step inclusive, so the current state is states.back().
struct StepContext {
    std::size_t step;
    double time;
    double dt;
    std::size_t total_steps;
    std::span<const double> times;
    std::span<const QuantumState> states;

    const QuantumState& state() const { return states.back(); }
};

/// Maps the simulation context to the real field applied over the next step.
/// Must be deterministic. Implementations may keep per-run state, so an
/// instance serves one simulation.
class FieldLaw {
public:
    virtual ~FieldLaw() = default;
    virtual double operator()(const StepContext& ctx) = 0;
};

/// Adapter for a plain callable.
class FunctionLaw final : public FieldLaw {
public:
    explicit FunctionLaw(std::function<double(const StepContext&)> fn) : fn_(std::move(fn)) {}
    double operator()(const StepContext& ctx) override { return fn_(ctx); }

private:
    std::function<double(const StepContext&)> fn_;
};

/// f ≡ 0
class ZeroLaw final : public FieldLaw {
public:
    double operator()(const StepContext&) override { return 0.0; }
};

struct StepResult {
    QuantumState state;
    double norm_drift;  // |‖ψ‖ − 1| before renormalization
};

/// One RK4 step of dψ/dt = −i(H₀ + f·H₁)ψ with f constant, renormalized.
QuantumState rk4_step(const ControlSystem& sys, const QuantumState& psi, double f, double dt);

/// As rk4_step, also reporting the pre-renormalization drift.
StepResult rk4_step_checked(const ControlSystem& sys, const QuantumState& psi, double f, double dt);

/// Number of fixed steps covering `horizon`; throws InputError unless horizon ≥ dt > 0.
std::size_t step_count(double horizon, double dt);

/// Fixed-step closed loop. The law is sampled at each step start and held
/// for the step. Throws NumericalError if the norm drifts by more than
/// 1e-6 within one step.
Trajectory simulate(const ControlSystem& sys, FieldLaw& law, const QuantumState& psi0, double horizon, double dt);

struct FieldSegment {
    double duration;
    double value;
};

/// Exact e^{−i(H₀+fH₁)Δt} per segment. Samples are the segment endpoints.
Trajectory propagate_exact(const ControlSystem& sys, std::span<const FieldSegment> segments,
                           const QuantumState& psi0);

/// Replays a piecewise-constant field on the simulate() grid (zero beyond the last segment).
class PiecewiseConstantLaw final : public FieldLaw {
public:
    explicit PiecewiseConstantLaw(std::vector<FieldSegment> segments);
    double operator()(const StepContext& ctx) override;

private:
    std::vector<FieldSegment> segments_;
    std::vector<double> ends_;
};

}  // namespace lyapsim
