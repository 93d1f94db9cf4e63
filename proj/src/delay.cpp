#include "lyapsim/delay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyapsim/control_law.hpp"
#include "lyapsim/errors.hpp"
#include "lyapsim/parallel.hpp"
#include "lyapsim/sampling.hpp"

namespace lyapsim {

namespace {

// Index of the latest sample with time ≤ t, or none if t precedes the first sample.
std::optional<std::size_t> sample_at_or_before(std::span<const double> times, double t, double slack) {
    const auto it = std::upper_bound(times.begin(), times.end(), t + slack);
    if (it == times.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

class HistoryLaw final : public FieldLaw {
public:
    HistoryLaw(ControlSystem sys, double tau) : sys_(std::move(sys)), tau_(tau) {}

    double operator()(const StepContext& ctx) override {
        if (tau_ == 0.0) return control_field(ctx.state(), sys_);
        const auto j = sample_at_or_before(ctx.times, ctx.time - tau_, 1e-9 * ctx.dt);
        if (!j) return 0.0;
        return control_field(ctx.states[*j], sys_);
    }

private:
    ControlSystem sys_;
    double tau_;
};

class ReplayLaw final : public FieldLaw {
public:
    ReplayLaw(const Trajectory& reference, double tau)
        : times_(reference.times), fields_(reference.fields), tau_(tau) {}

    double operator()(const StepContext& ctx) override {
        const double t = ctx.time - tau_;
        const double slack = 1e-9 * ctx.dt;
        if (t > times_.back() + slack) return 0.0;
        const auto j = sample_at_or_before(times_, t, slack);
        if (!j) return 0.0;
        return fields_[*j];
    }

private:
    std::vector<double> times_;
    std::vector<double> fields_;
    double tau_;
};

class TaylorLaw final : public FieldLaw {
public:
    TaylorLaw(ControlSystem sys, double tau) : sys_(std::move(sys)), tau_(tau) {}

    double operator()(const StepContext& ctx) override {
        const double f = control_field(ctx.state(), sys_);
        if (tau_ == 0.0) return f;
        const auto d = field_derivatives(ctx.state(), sys_);
        return f - d.df_dt * tau_ + 0.5 * d.d2f_dt2 * tau_ * tau_;
    }

private:
    ControlSystem sys_;
    double tau_;
};

}  // namespace

std::string_view to_string(DelayMode mode) {
    switch (mode) {
        case DelayMode::history: return "history";
        case DelayMode::replay: return "replay";
        case DelayMode::taylor: return "taylor";
    }
    return "unknown";
}

DelayMode delay_mode_from_string(std::string_view name) {
    if (name == "history") return DelayMode::history;
    if (name == "replay") return DelayMode::replay;
    if (name == "taylor") return DelayMode::taylor;
    throw InputError("unknown delay mode '" + std::string(name) + "' (expected history, replay or taylor)");
}

DelayMode default_delay_mode(double tau) { return tau >= 0.0 ? DelayMode::history : DelayMode::taylor; }

std::unique_ptr<FieldLaw> delayed_law(const ControlSystem& sys, const DelaySpec& spec, double horizon,
                                      const Trajectory* reference) {
    if (!std::isfinite(spec.tau)) throw InputError("delayed_law: tau must be finite");
    if (std::abs(spec.tau) > horizon) throw InputError("delayed_law: |tau| must not exceed the horizon");
    switch (spec.mode) {
        case DelayMode::history:
            if (spec.tau < 0.0) throw InputError("delayed_law: history mode requires tau >= 0");
            return std::make_unique<HistoryLaw>(sys, spec.tau);
        case DelayMode::replay:
            if (reference == nullptr || reference->size() < 2)
                throw InputError("delayed_law: replay mode requires a delay-free reference trajectory");
            if (reference->times.back() < horizon - 1e-9 * std::max(1.0, horizon))
                throw InputError("delayed_law: reference trajectory does not cover the horizon");
            return std::make_unique<ReplayLaw>(*reference, spec.tau);
        case DelayMode::taylor:
            return std::make_unique<TaylorLaw>(sys, spec.tau);
    }
    throw InputError("delayed_law: unknown mode");
}

std::vector<QuantumState> sweep_initial_states(std::size_t dim, std::size_t n_states, std::uint64_t seed) {
    std::vector<QuantumState> states;
    states.reserve(n_states);
    for (std::size_t i = 0; i < n_states; ++i) {
        Rng rng(trial_seed(seed, dim, i));
        states.push_back(random_initial_state(dim, rng));
    }
    return states;
}

std::vector<SweepRow> delay_sweep(const ControlSystem& sys, std::span<const double> taus, std::size_t n_states,
                                  std::uint64_t seed, std::optional<DelayMode> mode, double horizon, double dt) {
    if (n_states < 1) throw InputError("delay_sweep: n_states must be at least 1");
    step_count(horizon, dt);
    const auto states = sweep_initial_states(sys.dim(), n_states, seed);

    const bool needs_reference =
        std::any_of(taus.begin(), taus.end(), [&](double tau) { return mode.value_or(default_delay_mode(tau)) == DelayMode::replay; });
    std::vector<std::optional<Trajectory>> references(n_states);
    if (needs_reference) {
        parallel_for(n_states, [&](std::size_t i) {
            FeedbackLaw law(sys);
            references[i] = simulate(sys, law, states[i], horizon, dt);
        });
    }

    const std::size_t jobs = taus.size() * n_states;
    std::vector<double> finals(jobs);
    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t t_idx = job / n_states;
        const std::size_t s_idx = job % n_states;
        const DelaySpec spec{taus[t_idx], mode.value_or(default_delay_mode(taus[t_idx]))};
        const Trajectory* ref = references[s_idx] ? &*references[s_idx] : nullptr;
        auto law = delayed_law(sys, spec, horizon, ref);
        finals[job] = simulate(sys, *law, states[s_idx], horizon, dt).final_fidelity();
    });

    std::vector<SweepRow> rows;
    rows.reserve(taus.size());
    for (std::size_t t = 0; t < taus.size(); ++t)
        rows.push_back(summarize(taus[t], std::span<const double>(finals).subspan(t * n_states, n_states)));
    return rows;
}

}  // namespace lyapsim
