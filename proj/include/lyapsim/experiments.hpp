#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lyapsim/delay.hpp"
#include "lyapsim/dynamics.hpp"
#include "lyapsim/sampling.hpp"
#include "lyapsim/shaping.hpp"

namespace lyapsim {

enum class Preset { fig1, fig2, fig3, fig4, fig5, custom };

std::string_view to_string(Preset preset);
/// Throws InputError for an unknown name.
Preset preset_from_string(std::string_view name);

/// Fully resolved experiment settings. Fields not used by a preset keep their defaults.
struct ExperimentConfig {
    Preset preset = Preset::custom;
    std::uint64_t seed = 0;
    std::vector<std::size_t> dims;  // fig5
    std::size_t n_states = 10;
    double horizon = 200.0;
    double dt = 0.01;
    std::vector<double> taus;
    std::optional<DelayMode> delay_mode;  // empty: history for τ ≥ 0, taylor for τ < 0
    std::vector<std::size_t> pulse_counts;
    PulseAmplitude pulse_amplitude = PulseAmplitude::open_loop_average;
    BangBangSpec bang_bang;
    double gain_k = 1.0;
    double fidelity_time = 150.0;          // fig5 fidelity panel
    double convergence_threshold = 0.95;   // fig5 time panel
    std::vector<double> initial_state;     // real amplitudes; empty → seeded random state

    bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for each preset:
///  fig1  τ ∈ {−1, −0.5, −0.1, 0, 0.1, 0.5, 1}, 10 states, horizon 200
///  fig2  one 50-pulse train, horizon 200
///  fig3  pulse counts {10, 20, 30, 40, 50, 75, 100}, 10 states
///  fig4  bang-bang f0 = 0.1, ε = 1e-8, kBangBangDemoState, horizon 200
///  fig5  dims 4..16, 100 states, horizon 300, fidelity read at t = 150
///  custom raw feedback, horizon 200
ExperimentConfig default_config(Preset preset);

/// Real amplitudes of the bang-bang demonstration state (normalized on use).
inline constexpr double kBangBangDemoState[5] = {0.4314, 0.3627, 0.5948, 0.3991, 0.4114};

/// H₀ = diag(0.2, 1.0, 0.8, 0.5, 0.6), H₁ coupling level 1 to every other
/// level with strength 1, target (1,0,0,0,0)ᵀ.
ControlSystem preset_5dim(double gain_k = 1.0);

struct ScalingInstance {
    ControlSystem system;
    std::size_t retries;  // rejected H₀ draws (minimum gap < 1e-3)
};

/// Random diagonal H₀ with entries in (0,1], rescaled to max 1, sorted
/// ascending (ground level first); H₁ couples level 1 to all others with
/// strength 1; target e₁.
ScalingInstance random_scaling_instance(std::size_t dim, Rng& rng, double gain_k = 1.0);

/// Earliest sample time t with fidelity ≥ threshold at every sample in
/// [t, min(t + hold, end)]. Empty if never reached.
std::optional<double> convergence_time(const Trajectory& traj, double threshold = 0.95, double hold = 10.0);

struct ScalingRow {
    std::size_t dim;
    double mean_convergence_time;  // non-converged trials counted at the horizon
    std::size_t n_nonconverged;
    double mean_fidelity_at_time;  // fidelity sampled at cfg.fidelity_time
    std::size_t trials;
    std::size_t generation_retries;

    bool operator==(const ScalingRow&) const = default;
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
};

/// Per dimension, n_states trials each with a fresh random instance and
/// initial state drawn from trial_seed(seed, dim, trial).
ScalingResult run_dimension_scaling(const ExperimentConfig& cfg);

/// Raw feedback and initial-state helpers used by the CLI and bindings.
ControlSystem config_system(const ExperimentConfig& cfg);
QuantumState config_initial_state(const ExperimentConfig& cfg, std::size_t dim);

}  // namespace lyapsim
