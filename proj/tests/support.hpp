#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lyapsim/control_law.hpp"
#include "lyapsim/linalg.hpp"

namespace lyapsim::test {

inline std::vector<Complex> random_hermitian_entries(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> m(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        m[r * n + r] = g(rng);
        for (std::size_t c = r + 1; c < n; ++c) {
            const Complex z(g(rng), g(rng));
            m[r * n + c] = z;
            m[c * n + r] = std::conj(z);
        }
    }
    return m;
}

inline HermitianOperator random_hermitian(std::size_t n, std::mt19937_64& rng) {
    return HermitianOperator(n, random_hermitian_entries(n, rng));
}

inline QuantumState random_complex_state(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> v(n);
    for (auto& z : v) z = Complex(g(rng), g(rng));
    return QuantumState::normalized(std::move(v));
}

// RK4 on the continuous closed loop, the field recomputed inside every stage.
inline QuantumState closed_loop_flow(const ControlSystem& sys, QuantumState psi, double t, int substeps) {
    const double h = t / substeps;
    const std::size_t n = sys.dim();
    auto rhs = [&](const std::vector<Complex>& v) {
        const auto state = QuantumState::normalized(v);
        const double f = control_field(state, sys);
        std::vector<Complex> out(n);
        for (std::size_t r = 0; r < n; ++r) {
            Complex s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += (sys.h0()(r, c) + f * sys.h1()(r, c)) * v[c];
            out[r] = Complex(0.0, -1.0) * s;
        }
        return out;
    };
    std::vector<Complex> v(psi.amplitudes().begin(), psi.amplitudes().end());
    for (int s = 0; s < substeps; ++s) {
        auto axpy = [&](const std::vector<Complex>& k, double a) {
            std::vector<Complex> w(v);
            for (std::size_t i = 0; i < n; ++i) w[i] += a * k[i];
            return w;
        };
        const auto k1 = rhs(v);
        const auto k2 = rhs(axpy(k1, h / 2));
        const auto k3 = rhs(axpy(k2, h / 2));
        const auto k4 = rhs(axpy(k3, h));
        for (std::size_t i = 0; i < n; ++i) v[i] += h / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return QuantumState::normalized(v);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::path(LYAPSIM_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lyapsim::test
