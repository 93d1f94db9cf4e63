#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lyapsim/dynamics.hpp"
#include "lyapsim/stats.hpp"

namespace lyapsim {

/// How the delayed field f(t − τ) is produced.
///  - history: feedback on the stored state ψ(t − τ), zero before t = τ. Causal, τ ≥ 0 only.
///  - replay:  the delay-free closed-loop field, shifted by τ and applied open loop.
///  - taylor:  f(t) − ḟ(t)·τ + ½·f̈(t)·τ² on the current state; either sign of τ.
enum class DelayMode { history, replay, taylor };

std::string_view to_string(DelayMode mode);
/// Throws InputError for an unknown name.
DelayMode delay_mode_from_string(std::string_view name);

/// history for τ ≥ 0, taylor for τ < 0.
DelayMode default_delay_mode(double tau);

struct DelaySpec {
    double tau = 0.0;
    DelayMode mode = DelayMode::history;
};

/// Builds the delayed field law. `reference` is the delay-free closed-loop
/// trajectory and is required in replay mode. Throws InputError for τ < 0
/// in history mode, |τ| > horizon or a missing/short reference.
std::unique_ptr<FieldLaw> delayed_law(const ControlSystem& sys, const DelaySpec& spec, double horizon,
                                      const Trajectory* reference = nullptr);

/// For each τ, mean/std of the final fidelity over `n_states` seeded random
/// initial states. The same states are reused for every τ. When `mode` is
/// empty the per-τ default mode is used. Trials run in parallel; the table
/// is identical for any thread count.
std::vector<SweepRow> delay_sweep(const ControlSystem& sys, std::span<const double> taus, std::size_t n_states,
                                  std::uint64_t seed, std::optional<DelayMode> mode, double horizon, double dt);

/// The initial states used by the sweeps for a given seed (trial i ↔ trial_seed(seed, dim, i)).
std::vector<QuantumState> sweep_initial_states(std::size_t dim, std::size_t n_states, std::uint64_t seed);

}  // namespace lyapsim
