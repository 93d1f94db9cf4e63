// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lyapsim/cli_io.hpp"
#include "lyapsim/control_law.hpp"
#include "lyapsim/delay.hpp"
#include "lyapsim/experiments.hpp"
#include "lyapsim/shaping.hpp"
#include "lyapsim/stats.hpp"
#include "support.hpp"

using namespace lyapsim;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double x, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

QuantumState demo_state() {
    return QuantumState::normalized(std::vector<Complex>(std::begin(kBangBangDemoState), std::end(kBangBangDemoState)));
}

Outcome lyapunov_descent() {
    const auto sys = preset_5dim();
    double worst = -1.0;
    for (const auto& psi0 : sweep_initial_states(5, 100, kSeed)) {
        FeedbackLaw law(sys);
        const auto traj = simulate(sys, law, psi0, 200.0, 0.01);
        for (std::size_t i = 1; i < traj.size(); ++i) worst = std::max(worst, traj.lyapunov[i] - traj.lyapunov[i - 1]);
    }
    return {worst <= 1e-8, "max forward difference of V = " + fmt(worst)};
}

Outcome delay_free_convergence() {
    const auto sys = preset_5dim();
    const double taus[] = {0.0};
    const auto row = delay_sweep(sys, taus, 10, kSeed, std::nullopt, 200.0, 0.01).front();
    return {row.mean_fidelity >= 0.95, "mean final F = " + fmt(row.mean_fidelity)};
}

Outcome oracle_equivalence() {
    const auto sys = preset_5dim();
    const auto psi0 = sweep_initial_states(5, 1, kSeed).front();
    PulsedLaw law(sys, PulseTrainSpec{50, 200.0}, 0.01);
    const auto traj = simulate(sys, law, psi0, 200.0, 0.01);
    const auto exact = propagate_exact(sys, law.train().segments(), psi0);
    const double d = sup_distance(traj.final_state().vector(), exact.final_state().vector());
    return {d <= 1e-6, "sup-norm final-state difference = " + fmt(d)};
}

Outcome delay_degradation() {
    const auto sys = preset_5dim();
    const std::vector<double> taus = {-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0};
    const auto rows = delay_sweep(sys, taus, 10, kSeed, std::nullopt, 200.0, 0.01);
    auto at = [&](double tau) {
        for (const auto& r : rows)
            if (r.parameter == tau) return r.mean_fidelity;
        return std::nan("");
    };
    const double drop = at(0.0) - at(1.0);
    const double small = std::abs(at(0.1) - at(-0.1));
    const double large = std::abs(at(1.0) - at(-1.0));
    std::string detail = "F(0)-F(1) = " + fmt(drop) + ", |F(.1)-F(-.1)| = " + fmt(small) +
                         ", |F(1)-F(-1)| = " + fmt(large) + "; means:";
    for (const auto& r : rows) detail += " " + fmt(r.parameter) + "=" + fmt(r.mean_fidelity, 4);
    return {drop >= 0.01 && small <= 0.005 && large > 0.005, detail};
}

Outcome taylor_validity() {
    const auto sys = preset_5dim();
    const double h = 1e-3;
    double worst1 = 0.0, worst2 = 0.0;
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> when(1.0, 50.0);
    for (const auto& psi0 : sweep_initial_states(5, 100, kSeed)) {
        // sample a point along the closed loop; real initial amplitudes give f = 0 at t = 0
        const auto psi = test::closed_loop_flow(sys, psi0, when(rng), 2000);
        const double f0 = control_field(psi, sys);
        const double fp = control_field(test::closed_loop_flow(sys, psi, h, 10), sys);
        const double fm = control_field(test::closed_loop_flow(sys, psi, -h, 10), sys);
        const auto d = field_derivatives(psi, sys);
        const double fd1 = (fp - fm) / (2 * h), fd2 = (fp - 2 * f0 + fm) / (h * h);
        worst1 = std::max(worst1, std::abs(d.df_dt - fd1) / std::max(std::abs(fd1), 1e-6));
        worst2 = std::max(worst2, std::abs(d.d2f_dt2 - fd2) / std::max(std::abs(fd2), 1e-6));
    }
    return {worst1 <= 1e-3 && worst2 <= 1e-2,
            "max rel. err first = " + fmt(worst1) + ", second = " + fmt(worst2)};
}

Outcome pulse_adequacy() {
    const auto sys = preset_5dim();
    const std::vector<std::size_t> counts = {10, 20, 30, 40, 50, 75, 100};
    const auto rows = pulse_count_sweep(sys, counts, 10, kSeed, 200.0, 0.01);
    const double taus[] = {0.0};
    const double baseline = delay_sweep(sys, taus, 10, kSeed, std::nullopt, 200.0, 0.01).front().mean_fidelity;
    double m20 = 0.0, m50 = 0.0;
    std::string means;
    for (const auto& r : rows) {
        if (r.parameter == 20.0) m20 = r.mean_fidelity;
        if (r.parameter == 50.0) m50 = r.mean_fidelity;
        means += " " + fmt(r.parameter) + "=" + fmt(r.mean_fidelity, 4);
    }
    const double gap = std::abs(m50 - baseline);
    return {gap <= 0.05 && m50 > m20, "continuous = " + fmt(baseline) + ", |F(50)-continuous| = " + fmt(gap) +
                                          ", F(50) = " + fmt(m50) + " vs F(20) = " + fmt(m20) + "; means:" + means};
}

Outcome bang_bang_convergence() {
    const auto sys = preset_5dim();
    const BangBangSpec spec{0.1, 1e-8};
    BangBangLaw k1(sys, spec);
    const auto a = simulate(sys, k1, demo_state(), 200.0, 0.01);
    BangBangLaw k7(sys.with_gain(7.0), spec);
    const auto b = simulate(sys, k7, demo_state(), 200.0, 0.01);
    std::size_t mismatched = 0, compared = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(k1.raw_fields()[i]) <= spec.deadband || std::abs(k7.raw_fields()[i]) <= spec.deadband) continue;
        ++compared;
        mismatched += (std::signbit(a.fields[i]) != std::signbit(b.fields[i])) ? 1 : 0;
    }
    return {a.final_fidelity() >= 0.9 && mismatched == 0 && compared > 0,
            "final F = " + fmt(a.final_fidelity()) + ", sign mismatches k=1 vs k=7: " + std::to_string(mismatched) +
                " of " + std::to_string(compared)};
}

Outcome critical_points() {
    const auto sys = preset_5dim();
    const LyapunovSpec spec(sys);
    const auto eig = hermitian_eigen(spec.projector_complement());
    std::mt19937_64 rng(kSeed);
    bool ok = true;
    std::string labels;
    for (std::size_t c = 0; c < eig.eigenvalues.size(); ++c) {
        const auto kind = classify_critical_point(eig.eigenvalues, c);
        const auto& center = eig.eigenvectors[c];
        const double v0 = lyapunov_value(QuantumState::normalized(center), spec);
        double lo = 0.0, hi = 0.0;
        for (int p = 0; p < 1000; ++p) {
            const auto dir = test::random_complex_state(5, rng);
            std::vector<Complex> w(5);
            for (std::size_t i = 0; i < 5; ++i) w[i] = center[i] + 1e-3 * dir[i];
            const double dv = lyapunov_value(QuantumState::normalized(w), spec) - v0;
            lo = std::min(lo, dv);
            hi = std::max(hi, dv);
        }
        const bool is_target = std::abs(std::abs(inner(center, sys.target().vector())) - 1.0) < 1e-12;
        switch (kind) {
            case CriticalPoint::minimum: ok = ok && is_target && lo >= -1e-10; break;
            case CriticalPoint::maximum:
            case CriticalPoint::degenerate: ok = ok && !is_target && hi <= 1e-10; break;
            case CriticalPoint::saddle: ok = ok && lo < 0.0 && hi > 0.0; break;
        }
        labels += std::string(c ? ", " : "") + to_string(kind);
    }
    return {ok, "labels: " + labels};
}

Outcome dimension_scaling() {
    ExperimentConfig cfg = default_config(Preset::fig5);
    cfg.seed = kSeed;
    cfg.n_states = 30;
    const auto result = run_dimension_scaling(cfg);
    std::vector<double> dims, times, fids;
    std::string table;
    for (const auto& r : result.rows) {
        dims.push_back(static_cast<double>(r.dim));
        times.push_back(r.mean_convergence_time);
        fids.push_back(r.mean_fidelity_at_time);
        table += " " + std::to_string(r.dim) + ":" + fmt(r.mean_convergence_time, 4) + "/" + fmt(r.mean_fidelity_at_time, 3);
    }
    const double rho_t = spearman(dims, times), rho_f = spearman(dims, fids);
    return {rho_t >= 0.9 && rho_f <= -0.5,
            "Spearman time = " + fmt(rho_t) + ", fidelity = " + fmt(rho_f) + "; dim:time/F" + table};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome reproducibility() {
    const std::vector<std::vector<std::string>> runs = {
        {"simulate", "--preset", "custom"},
        {"simulate", "--preset", "fig1"},
        {"simulate", "--preset", "fig2"},
        {"bang-bang", "--preset", "fig4"},
        {"delay-sweep", "--preset", "fig1"},
        {"pulse-sweep", "--preset", "fig3", "--horizon", "50"},
        {"dim-scaling", "--preset", "fig5", "--n-states", "4"},
        {"check"},
    };
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        std::vector<fs::path> dirs;
        for (const char* threads : {"1", "4"}) {
            setenv("LYAPSIM_THREADS", threads, 1);
            const auto dir = test::scratch_dir("repro_" + std::to_string(r) + "_" + threads);
            std::vector<std::string> args = {"lyapsim"};
            args.insert(args.end(), runs[r].begin(), runs[r].end());
            for (const char* extra : {"--seed", "7", "-o"}) args.emplace_back(extra);
            args.push_back(dir.string());
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0)
                return {false, runs[r][0] + " failed: " + err.str()};
            dirs.push_back(dir);
        }
        unsetenv("LYAPSIM_THREADS");
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto name = entry.path().filename();
            ++compared;
            if (slurp(dirs[0] / name) != slurp(dirs[1] / name)) differing.push_back(runs[r][0] + "/" + name.string());
        }
    }
    std::string detail = std::to_string(compared) + " files compared (serial vs 4 threads)";
    for (const auto& d : differing) detail += ", differs: " + d;
    return {differing.empty() && compared > 0, detail};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "Lyapunov descent", 10, lyapunov_descent},
        {2, "delay-free convergence", 5, delay_free_convergence},
        {3, "oracle equivalence", 5, oracle_equivalence},
        {4, "delay degradation", 30, delay_degradation},
        {5, "Taylor-expansion validity", 5, taylor_validity},
        {6, "pulse-train adequacy", 60, pulse_adequacy},
        {7, "bang-bang convergence", 5, bang_bang_convergence},
        {8, "critical-point classification", 5, critical_points},
        {9, "dimension scaling", 300, dimension_scaling},
        {10, "reproducibility", 60, reproducibility},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
                  << fmt(secs, 3) << " s of " << c.budget_s << " s" << (in_time ? "" : ", over budget") << "]"
                  << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
