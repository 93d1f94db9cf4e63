#include "lyapsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyapsim/control_law.hpp"
#include "lyapsim/errors.hpp"
#include "lyapsim/parallel.hpp"

namespace lyapsim {

namespace {

constexpr double kMinSpectralGap = 1e-3;

HermitianOperator star_coupling(std::size_t dim) {
    std::vector<Complex> m(dim * dim, Complex{0.0, 0.0});
    for (std::size_t j = 1; j < dim; ++j) {
        m[j] = 1.0;        // row 0
        m[j * dim] = 1.0;  // column 0
    }
    return HermitianOperator(dim, std::move(m));
}

}  // namespace

std::string_view to_string(Preset preset) {
    switch (preset) {
        case Preset::fig1: return "fig1";
        case Preset::fig2: return "fig2";
        case Preset::fig3: return "fig3";
        case Preset::fig4: return "fig4";
        case Preset::fig5: return "fig5";
        case Preset::custom: return "custom";
    }
    return "unknown";
}

Preset preset_from_string(std::string_view name) {
    for (Preset p : {Preset::fig1, Preset::fig2, Preset::fig3, Preset::fig4, Preset::fig5, Preset::custom})
        if (to_string(p) == name) return p;
    throw InputError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig default_config(Preset preset) {
    ExperimentConfig cfg;
    cfg.preset = preset;
    switch (preset) {
        case Preset::fig1:
            cfg.taus = {-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0};
            break;
        case Preset::fig2:
            cfg.pulse_counts = {50};
            break;
        case Preset::fig3:
            cfg.pulse_counts = {10, 20, 30, 40, 50, 75, 100};
            break;
        case Preset::fig4:
            cfg.initial_state.assign(std::begin(kBangBangDemoState), std::end(kBangBangDemoState));
            break;
        case Preset::fig5:
            for (std::size_t d = 4; d <= 16; ++d) cfg.dims.push_back(d);
            cfg.n_states = 100;
            cfg.horizon = 300.0;
            break;
        case Preset::custom:
            break;
    }
    return cfg;
}

ControlSystem preset_5dim(double gain_k) {
    const double diag[] = {0.2, 1.0, 0.8, 0.5, 0.6};
    return ControlSystem(HermitianOperator::diagonal(diag), star_coupling(5),
                         QuantumState(ComplexVector::basis(5, 0)), gain_k);
}

ScalingInstance random_scaling_instance(std::size_t dim, Rng& rng, double gain_k) {
    if (dim < 2) throw InputError("random_scaling_instance: dim must be at least 2");
    std::vector<double> levels(dim);
    std::size_t retries = 0;
    for (;;) {
        for (auto& e : levels) e = 1.0 - uniform01(rng);  // (0, 1]
        const double top = *std::max_element(levels.begin(), levels.end());
        for (auto& e : levels) e /= top;
        std::sort(levels.begin(), levels.end());
        levels.back() = 1.0;
        bool separated = true;
        for (std::size_t j = 1; j < dim; ++j) separated = separated && (levels[j] - levels[j - 1] >= kMinSpectralGap);
        if (separated) break;
        ++retries;
    }
    return ScalingInstance{ControlSystem(HermitianOperator::diagonal(levels), star_coupling(dim),
                                         QuantumState(ComplexVector::basis(dim, 0)), gain_k),
                           retries};
}

std::optional<double> convergence_time(const Trajectory& traj, double threshold, double hold) {
    const std::size_t n = traj.size();
    if (n == 0) return std::nullopt;
    // Walk backwards tracking the time of the next sample below threshold.
    std::optional<double> result;
    std::optional<double> next_below;
    for (std::size_t i = n; i-- > 0;) {
        if (traj.fidelity[i] < threshold) {
            next_below = traj.times[i];
            continue;
        }
        if (!next_below || *next_below > traj.times[i] + hold) result = traj.times[i];
    }
    return result;
}

ScalingResult run_dimension_scaling(const ExperimentConfig& cfg) {
    if (cfg.dims.empty()) throw InputError("run_dimension_scaling: dims must not be empty");
    if (!std::is_sorted(cfg.dims.begin(), cfg.dims.end())) throw InputError("run_dimension_scaling: dims must be ascending");
    if (cfg.n_states < 1) throw InputError("run_dimension_scaling: n_states must be at least 1");
    if (cfg.fidelity_time > cfg.horizon) throw InputError("run_dimension_scaling: fidelity_time exceeds the horizon");
    const std::size_t steps = step_count(cfg.horizon, cfg.dt);
    const auto fidelity_index = static_cast<std::size_t>(std::llround(cfg.fidelity_time / cfg.dt));
    if (fidelity_index > steps) throw InputError("run_dimension_scaling: fidelity_time exceeds the horizon");

    struct Trial {
        double conv_time;
        bool converged;
        double fidelity;
        std::size_t retries;
    };
    const std::size_t per_dim = cfg.n_states;
    std::vector<Trial> trials(cfg.dims.size() * per_dim);

    parallel_for(trials.size(), [&](std::size_t job) {
        const std::size_t dim = cfg.dims[job / per_dim];
        Rng rng(trial_seed(cfg.seed, dim, job % per_dim));
        ScalingInstance inst = random_scaling_instance(dim, rng, cfg.gain_k);
        if (!check_convergence(inst.system).invariant_set_trivial)
            throw NumericalError("run_dimension_scaling: generated instance fails the convergence check");
        const QuantumState psi0 = random_initial_state(dim, rng);
        FeedbackLaw law(inst.system);
        const Trajectory traj = simulate(inst.system, law, psi0, cfg.horizon, cfg.dt);
        const auto t = convergence_time(traj, cfg.convergence_threshold);
        trials[job] = Trial{t.value_or(traj.times.back()), t.has_value(), traj.fidelity[fidelity_index], inst.retries};
    });

    ScalingResult result;
    for (std::size_t d = 0; d < cfg.dims.size(); ++d) {
        ScalingRow row{cfg.dims[d], 0.0, 0, 0.0, per_dim, 0};
        std::vector<double> times, fids;
        for (std::size_t k = 0; k < per_dim; ++k) {
            const Trial& tr = trials[d * per_dim + k];
            times.push_back(tr.conv_time);
            fids.push_back(tr.fidelity);
            row.n_nonconverged += tr.converged ? 0 : 1;
            row.generation_retries += tr.retries;
        }
        row.mean_convergence_time = mean(times);
        row.mean_fidelity_at_time = mean(fids);
        result.rows.push_back(row);
    }
    return result;
}

ControlSystem config_system(const ExperimentConfig& cfg) { return preset_5dim(cfg.gain_k); }

QuantumState config_initial_state(const ExperimentConfig& cfg, std::size_t dim) {
    if (!cfg.initial_state.empty()) {
        if (cfg.initial_state.size() != dim)
            throw InputError("initial_state has " + std::to_string(cfg.initial_state.size()) +
                             " amplitudes, expected " + std::to_string(dim));
        std::vector<Complex> amps(cfg.initial_state.begin(), cfg.initial_state.end());
        return QuantumState::normalized(std::move(amps));
    }
    Rng rng(trial_seed(cfg.seed, dim, 0));
    return random_initial_state(dim, rng);
}

}  // namespace lyapsim
