#include "lyapsim/control_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lyapsim/errors.hpp"

namespace lyapsim {

namespace {

constexpr double kTieTolerance = 1e-12;

void require_dim(std::size_t a, std::size_t b, const char* where) {
    if (a != b) throw InputError(std::string(where) + ": dimension mismatch");
}

// ⟨φg|ψ⟩⟨ψ|H₁|φg⟩
Complex feedback_product(const QuantumState& psi, const ControlSystem& sys) {
    require_dim(psi.dim(), sys.dim(), "control_field");
    const ComplexVector& phi = sys.target().vector();
    return inner(phi, psi.vector()) * matrix_element(psi.vector(), sys.h1(), phi);
}

}  // namespace

LyapunovSpec::LyapunovSpec(QuantumState target, double gain_k) : target_(std::move(target)), gain_k_(gain_k) {
    if (!(gain_k_ > 0.0)) throw InputError("LyapunovSpec: gain_k must be positive");
}

HermitianOperator LyapunovSpec::projector_complement() const {
    return HermitianOperator::identity(target_.dim()).combined(1.0, HermitianOperator::projector(target_.vector()), -1.0);
}

double fidelity(const QuantumState& psi, const QuantumState& target) {
    require_dim(psi.dim(), target.dim(), "fidelity");
    return std::norm(inner(target.vector(), psi.vector()));
}

double lyapunov_value(const QuantumState& psi, const QuantumState& target) { return 1.0 - fidelity(psi, target); }

double lyapunov_value(const QuantumState& psi, const LyapunovSpec& spec) { return lyapunov_value(psi, spec.target()); }

double control_field(const QuantumState& psi, const ControlSystem& sys) {
    return -sys.gain_k() * feedback_product(psi, sys).imag();
}

double lyapunov_rate(const QuantumState& psi, const ControlSystem& sys, double f) {
    return 2.0 * f * feedback_product(psi, sys).imag();
}

FieldDerivatives field_derivatives(const QuantumState& psi, const ControlSystem& sys) {
    // With ρ = |ψ⟩⟨ψ|, g = ⟨φ|ρH₁|φ⟩ and dρ/dt = −i[H,ρ]:
    //   ġ = −i⟨φ|[H,ρ]H₁|φ⟩
    //   g̈ = −i·ḟ·⟨φ|[H₁,ρ]H₁|φ⟩ − ⟨φ|[H,[H,ρ]]H₁|φ⟩
    // and f = −k·Im g.
    const double k = sys.gain_k();
    const double f = control_field(psi, sys);
    const HermitianOperator h = sys.h0().combined(1.0, sys.h1(), f);
    const ComplexVector& phi = sys.target().vector();
    const ComplexVector& v = psi.vector();

    const ComplexVector h1_phi = apply(sys.h1(), phi);
    const ComplexVector h_h1_phi = apply(h, h1_phi);
    const ComplexVector hh_h1_phi = apply(h, h_h1_phi);
    const ComplexVector h1_h1_phi = apply(sys.h1(), h1_phi);
    const ComplexVector h_psi = apply(h, v);
    const ComplexVector hh_psi = apply(h, h_psi);
    const ComplexVector h1_psi = apply(sys.h1(), v);

    const Complex overlap = inner(phi, v);
    const Complex psi_h1_phi = inner(v, h1_phi);

    const Complex comm_h = inner(phi, h_psi) * psi_h1_phi - overlap * inner(v, h_h1_phi);
    const Complex g_dot = Complex{0.0, -1.0} * comm_h;
    const double df_dt = -k * g_dot.imag();

    const Complex comm_h1 = inner(phi, h1_psi) * psi_h1_phi - overlap * inner(v, h1_h1_phi);
    const Complex double_comm =
        inner(phi, hh_psi) * psi_h1_phi - 2.0 * inner(phi, h_psi) * inner(v, h_h1_phi) + overlap * inner(v, hh_h1_phi);
    const Complex g_ddot = Complex{0.0, -df_dt} * comm_h1 - double_comm;
    const double d2f_dt2 = -k * g_ddot.imag();

    return FieldDerivatives{df_dt, d2f_dt2};
}

const char* to_string(CriticalPoint kind) {
    switch (kind) {
        case CriticalPoint::minimum: return "minimum";
        case CriticalPoint::maximum: return "maximum";
        case CriticalPoint::saddle: return "saddle";
        case CriticalPoint::degenerate: return "degenerate";
    }
    return "unknown";
}

CriticalPoint classify_critical_point(std::span<const double> a_eigenvalues, std::size_t c) {
    if (c >= a_eigenvalues.size()) throw InputError("classify_critical_point: index out of range");
    const double ac = a_eigenvalues[c];
    bool lower = false;
    bool higher = false;
    bool tied = false;
    for (std::size_t j = 0; j < a_eigenvalues.size(); ++j) {
        if (j == c) continue;
        const double d = a_eigenvalues[j] - ac;
        if (d > kTieTolerance) {
            higher = true;
        } else if (d < -kTieTolerance) {
            lower = true;
        } else {
            tied = true;
        }
    }
    if (lower && higher) return CriticalPoint::saddle;
    if (tied) return CriticalPoint::degenerate;
    return lower ? CriticalPoint::maximum : CriticalPoint::minimum;
}

ConvergenceReport check_convergence(const ControlSystem& sys, double tol) {
    ConvergenceReport report;
    const EigenDecomposition eig = hermitian_eigen(sys.h0());
    const std::size_t n = eig.eigenvalues.size();
    report.h0_eigenvalues = eig.eigenvalues;

    report.min_spectral_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < n; ++j)
        report.min_spectral_gap = std::min(report.min_spectral_gap, eig.eigenvalues[j] - eig.eigenvalues[j - 1]);
    report.spectrum_nondegenerate = report.min_spectral_gap > tol;

    const ComplexVector& phi = sys.target().vector();
    double best = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double overlap = std::abs(inner(eig.eigenvectors[j], phi));
        if (overlap > best) {
            best = overlap;
            report.target_index = j;
        }
    }

    const ComplexVector h1_phi = apply(sys.h1(), phi);
    bool all_coupled = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == report.target_index) continue;
        const double coupling = std::abs(inner(eig.eigenvectors[j], h1_phi));
        report.couplings.push_back(coupling);
        all_coupled = all_coupled && coupling > tol;
    }
    report.invariant_set_trivial = report.spectrum_nondegenerate && all_coupled;
    return report;
}

}  // namespace lyapsim
