#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lyapsim/dynamics.hpp"
#include "lyapsim/linalg.hpp"

namespace lyapsim {

/// V(ψ) = 1 − |⟨ψ|φg⟩|² = ⟨ψ|A|ψ⟩ with A = I − |φg⟩⟨φg|.
class LyapunovSpec {
public:
    LyapunovSpec(QuantumState target, double gain_k);
    explicit LyapunovSpec(const ControlSystem& sys) : LyapunovSpec(sys.target(), sys.gain_k()) {}

    const QuantumState& target() const noexcept { return target_; }
    double gain_k() const noexcept { return gain_k_; }

    /// A = I − |φg⟩⟨φg|
    HermitianOperator projector_complement() const;

private:
    QuantumState target_;
    double gain_k_;
};

double lyapunov_value(const QuantumState& psi, const LyapunovSpec& spec);
double lyapunov_value(const QuantumState& psi, const QuantumState& target);

/// F = |⟨φg|ψ⟩|²
double fidelity(const QuantumState& psi, const QuantumState& target);

/// f = −k·Im(⟨φg|ψ⟩⟨ψ|H₁|φg⟩)
double control_field(const QuantumState& psi, const ControlSystem& sys);

/// dV/dt = 2f·Im(⟨φg|ψ⟩⟨ψ|H₁|φg⟩) for an applied field f.
double lyapunov_rate(const QuantumState& psi, const ControlSystem& sys, double f);

/// Raw feedback law: control_field on the current state at each step.
class FeedbackLaw final : public FieldLaw {
public:
    explicit FeedbackLaw(ControlSystem sys) : sys_(std::move(sys)) {}
    double operator()(const StepContext& ctx) override { return control_field(ctx.state(), sys_); }

private:
    ControlSystem sys_;
};

struct FieldDerivatives {
    double df_dt;
    double d2f_dt2;
};

/// Time derivatives of the feedback field along the continuous closed loop
/// H(t) = H₀ + f(ψ(t))·H₁. The second derivative includes the term from
/// Ḣ = ḟ·H₁.
FieldDerivatives field_derivatives(const QuantumState& psi, const ControlSystem& sys);

enum class CriticalPoint { minimum, maximum, saddle, degenerate };

const char* to_string(CriticalPoint kind);

/// Local shape of V around the c-th eigenstate of A, from the ordering of
/// A's eigenvalues. Ties with A_c (within 1e-12) that leave no strictly
/// larger or no strictly smaller neighbour are reported as degenerate.
CriticalPoint classify_critical_point(std::span<const double> a_eigenvalues, std::size_t c);

struct ConvergenceReport {
    bool spectrum_nondegenerate = false;
    double min_spectral_gap = 0.0;
    std::vector<double> couplings;  // |⟨Φⱼ|H₁|φg⟩| for every H₀ eigenstate j ≠ target_index
    bool invariant_set_trivial = false;

    std::size_t target_index = 0;        // position of φg in the ascending H₀ spectrum
    std::vector<double> h0_eigenvalues;  // ascending
};

/// LaSalle preconditions: nondegenerate H₀ spectrum and nonzero coupling of
/// φg to every other H₀ eigenstate through H₁.
ConvergenceReport check_convergence(const ControlSystem& sys, double tol = 1e-9);

}  // namespace lyapsim
