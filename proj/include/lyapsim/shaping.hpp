#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lyapsim/dynamics.hpp"
#include "lyapsim/stats.hpp"

namespace lyapsim {

/// How each pulse amplitude is chosen.
///  - open_loop_average: mean of the delay-free closed-loop field over the
///    pulse window. The closed loop is simulated once from the initial state
///    and the resulting train is applied open loop.
///  - sample_and_hold: feedback value on the current state at the pulse start.
enum class PulseAmplitude { open_loop_average, sample_and_hold };

std::string_view to_string(PulseAmplitude rule);
/// Accepts "average" / "sample" as well as the enumerator names.
PulseAmplitude pulse_amplitude_from_string(std::string_view name);

struct PulseTrainSpec {
    std::size_t n_pulses = 50;
    double horizon = 200.0;
    PulseAmplitude amplitude = PulseAmplitude::open_loop_average;
};

struct Pulse {
    double start;
    double duration;
    double amplitude;
};

/// Realized pulse sequence, contiguous from t = 0.
struct PulseTrain {
    std::vector<Pulse> pulses;

    std::vector<FieldSegment> segments() const;
};

/// Piecewise-constant field of equal-duration pulses; amplitudes per
/// PulseTrainSpec::amplitude.
///
/// Pulse p covers integrator steps [⌊p·N/n⌋, ⌊(p+1)·N/n⌋) where N is the
/// number of steps in the horizon, so the pulses tile the grid exactly.
class PulsedLaw final : public FieldLaw {
public:
    /// Throws InputError if a pulse would be shorter than one step.
    PulsedLaw(ControlSystem sys, PulseTrainSpec spec, double dt);

    double operator()(const StepContext& ctx) override;

    /// Pulses emitted so far.
    const PulseTrain& train() const noexcept { return train_; }
    std::size_t boundary_step(std::size_t pulse) const noexcept;

private:
    ControlSystem sys_;
    PulseTrainSpec spec_;
    double dt_;
    std::size_t total_steps_;
    PulseTrain train_;
    std::vector<double> planned_;  // open_loop_average amplitudes, filled at step 0
};

struct BangBangSpec {
    double f0 = 0.1;
    double deadband = 1e-8;

    bool operator==(const BangBangSpec&) const = default;
};

/// +f0 above the deadband, −f0 below its negative, 0 inside.
double bang_bang_quantize(double f_raw, const BangBangSpec& spec);

/// Three-level field keyed on the sign of the raw feedback, re-evaluated every step.
class BangBangLaw final : public FieldLaw {
public:
    /// Throws InputError unless f0 > 0 and deadband ≥ 0.
    BangBangLaw(ControlSystem sys, BangBangSpec spec);

    double operator()(const StepContext& ctx) override;

    /// Raw feedback value seen at each evaluated step.
    const std::vector<double>& raw_fields() const noexcept { return raw_; }

private:
    ControlSystem sys_;
    BangBangSpec spec_;
    std::vector<double> raw_;
};

/// Mean/std of final fidelity per pulse count, seeded initial states shared across counts.
std::vector<SweepRow> pulse_count_sweep(const ControlSystem& sys, std::span<const std::size_t> counts,
                                        std::size_t n_states, std::uint64_t seed, double horizon, double dt,
                                        PulseAmplitude amplitude = PulseAmplitude::open_loop_average);

}  // namespace lyapsim
