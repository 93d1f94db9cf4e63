#include "lyapsim/shaping.hpp"

#include <cmath>
#include <string>

#include "lyapsim/control_law.hpp"
#include "lyapsim/delay.hpp"
#include "lyapsim/errors.hpp"
#include "lyapsim/parallel.hpp"

namespace lyapsim {

std::string_view to_string(PulseAmplitude rule) {
    switch (rule) {
        case PulseAmplitude::open_loop_average: return "average";
        case PulseAmplitude::sample_and_hold: return "sample";
    }
    return "unknown";
}

PulseAmplitude pulse_amplitude_from_string(std::string_view name) {
    if (name == "average" || name == "open_loop_average") return PulseAmplitude::open_loop_average;
    if (name == "sample" || name == "sample_and_hold") return PulseAmplitude::sample_and_hold;
    throw InputError("unknown pulse amplitude rule '" + std::string(name) + "' (expected average or sample)");
}

std::vector<FieldSegment> PulseTrain::segments() const {
    std::vector<FieldSegment> out;
    out.reserve(pulses.size());
    for (const auto& p : pulses) out.push_back(FieldSegment{p.duration, p.amplitude});
    return out;
}

PulsedLaw::PulsedLaw(ControlSystem sys, PulseTrainSpec spec, double dt)
    : sys_(std::move(sys)), spec_(spec), dt_(dt), total_steps_(step_count(spec.horizon, dt)) {
    if (spec_.n_pulses < 1) throw InputError("PulsedLaw: n_pulses must be at least 1");
    if (spec_.n_pulses > total_steps_) {
        throw InputError("PulsedLaw: pulse duration " + std::to_string(spec_.horizon / double(spec_.n_pulses)) +
                         " is shorter than dt");
    }
    train_.pulses.reserve(spec_.n_pulses);
}

std::size_t PulsedLaw::boundary_step(std::size_t pulse) const noexcept {
    return pulse * total_steps_ / spec_.n_pulses;
}

double PulsedLaw::operator()(const StepContext& ctx) {
    if (ctx.total_steps != total_steps_ || ctx.dt != dt_)
        throw InputError("PulsedLaw: simulation grid does not match the pulse train spec");
    if (ctx.step == 0 && spec_.amplitude == PulseAmplitude::open_loop_average) {
        FeedbackLaw feedback(sys_);
        const Trajectory reference = simulate(sys_, feedback, ctx.state(), spec_.horizon, dt_);
        planned_.assign(spec_.n_pulses, 0.0);
        for (std::size_t p = 0; p < spec_.n_pulses; ++p) {
            const std::size_t begin = boundary_step(p);
            const std::size_t end = boundary_step(p + 1);
            double sum = 0.0;
            for (std::size_t i = begin; i < end; ++i) sum += reference.fields[i];
            planned_[p] = sum / static_cast<double>(end - begin);
        }
    }
    const std::size_t next = train_.pulses.size();
    if (next < spec_.n_pulses && ctx.step >= boundary_step(next)) {
        const std::size_t begin = boundary_step(next);
        const std::size_t end = boundary_step(next + 1);
        const double amplitude = spec_.amplitude == PulseAmplitude::open_loop_average
                                     ? planned_[next]
                                     : control_field(ctx.state(), sys_);
        train_.pulses.push_back(
            Pulse{static_cast<double>(begin) * dt_, static_cast<double>(end - begin) * dt_, amplitude});
    }
    return train_.pulses.empty() ? 0.0 : train_.pulses.back().amplitude;
}

double bang_bang_quantize(double f_raw, const BangBangSpec& spec) {
    if (f_raw > spec.deadband) return spec.f0;
    if (f_raw < -spec.deadband) return -spec.f0;
    return 0.0;
}

BangBangLaw::BangBangLaw(ControlSystem sys, BangBangSpec spec) : sys_(std::move(sys)), spec_(spec) {
    if (!(spec_.f0 > 0.0) || !std::isfinite(spec_.f0)) throw InputError("BangBangLaw: f0 must be positive");
    if (!(spec_.deadband >= 0.0)) throw InputError("BangBangLaw: deadband must be non-negative");
}

double BangBangLaw::operator()(const StepContext& ctx) {
    const double raw = control_field(ctx.state(), sys_);
    raw_.push_back(raw);
    return bang_bang_quantize(raw, spec_);
}

std::vector<SweepRow> pulse_count_sweep(const ControlSystem& sys, std::span<const std::size_t> counts,
                                        std::size_t n_states, std::uint64_t seed, double horizon, double dt,
                                        PulseAmplitude amplitude) {
    if (n_states < 1) throw InputError("pulse_count_sweep: n_states must be at least 1");
    // validate every count before launching trials
    for (std::size_t n : counts) PulsedLaw(sys, PulseTrainSpec{n, horizon, amplitude}, dt);

    const auto states = sweep_initial_states(sys.dim(), n_states, seed);
    const std::size_t jobs = counts.size() * n_states;
    std::vector<double> finals(jobs);
    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t c = job / n_states;
        PulsedLaw law(sys, PulseTrainSpec{counts[c], horizon, amplitude}, dt);
        finals[job] = simulate(sys, law, states[job % n_states], horizon, dt).final_fidelity();
    });

    std::vector<SweepRow> rows;
    rows.reserve(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        rows.push_back(summarize(static_cast<double>(counts[c]),
                                 std::span<const double>(finals).subspan(c * n_states, n_states)));
    return rows;
}

}  // namespace lyapsim
