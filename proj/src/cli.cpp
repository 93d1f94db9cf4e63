#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lyapsim/cli_io.hpp"
#include "lyapsim/errors.hpp"

namespace lyapsim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Flags {
    std::string config_path;
    std::string out_dir = ".";
    bool full_state = false;
    bool record_timing = false;

    std::string preset;
    std::uint64_t seed = 0;
    std::size_t n_states = 0;
    double horizon = 0.0;
    double dt = 0.0;
    double gain = 0.0;
    std::vector<double> taus;
    std::string delay_mode;
    std::vector<std::size_t> counts;
    std::string pulse_amplitude;
    double f0 = 0.0;
    double deadband = 0.0;
    std::vector<std::size_t> dims;
    double fidelity_time = 0.0;
    double threshold = 0.0;
    std::vector<double> initial_state;
};

struct OptionRefs {
    CLI::Option* preset;
    CLI::Option* seed;
    CLI::Option* n_states;
    CLI::Option* horizon;
    CLI::Option* dt;
    CLI::Option* gain;
    CLI::Option* taus;
    CLI::Option* delay_mode;
    CLI::Option* counts;
    CLI::Option* pulse_amplitude;
    CLI::Option* f0;
    CLI::Option* deadband;
    CLI::Option* dims;
    CLI::Option* fidelity_time;
    CLI::Option* threshold;
    CLI::Option* initial_state;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Config file first, then every flag given on the command line on top.
ExperimentConfig resolve_config(const Flags& flags, const OptionRefs& opt) {
    json j = json::object();
    if (!flags.config_path.empty()) {
        try {
            j = json::parse(read_text(flags.config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError("$", std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("$", "config must be a JSON object");
    }
    auto set = [&](CLI::Option* o, const char* key, const auto& value) {
        if (o->count() > 0) j[key] = value;
    };
    set(opt.preset, "preset", flags.preset);
    set(opt.seed, "seed", flags.seed);
    set(opt.n_states, "n_states", flags.n_states);
    set(opt.horizon, "horizon", flags.horizon);
    set(opt.dt, "dt", flags.dt);
    set(opt.gain, "gain_k", flags.gain);
    set(opt.taus, "taus", flags.taus);
    set(opt.delay_mode, "delay_mode", flags.delay_mode);
    set(opt.counts, "pulse_counts", flags.counts);
    set(opt.pulse_amplitude, "pulse_amplitude", flags.pulse_amplitude);
    set(opt.f0, "f0", flags.f0);
    set(opt.deadband, "deadband", flags.deadband);
    set(opt.dims, "dims", flags.dims);
    set(opt.fidelity_time, "fidelity_time", flags.fidelity_time);
    set(opt.threshold, "convergence_threshold", flags.threshold);
    set(opt.initial_state, "initial_state", flags.initial_state);
    return parse_config(j.dump());
}

struct Outputs {
    std::vector<std::string> files;
    json notes = json::object();
    std::string summary;
};

Outputs run_simulate(const ExperimentConfig& cfg, const fs::path& dir, bool full_state, bool force_bang_bang) {
    const ControlSystem sys = config_system(cfg);
    const QuantumState psi0 = config_initial_state(cfg, sys.dim());
    Outputs o;

    std::unique_ptr<FieldLaw> law;
    PulsedLaw* pulsed = nullptr;
    std::string law_name = "feedback";
    if (force_bang_bang || cfg.preset == Preset::fig4) {
        law = std::make_unique<BangBangLaw>(sys, cfg.bang_bang);
        law_name = "bang-bang";
        o.notes["f0"] = cfg.bang_bang.f0;
        o.notes["deadband"] = cfg.bang_bang.deadband;
    } else if (cfg.preset == Preset::fig1) {
        const DelaySpec spec{cfg.taus.back(), cfg.delay_mode.value_or(default_delay_mode(cfg.taus.back()))};
        std::optional<Trajectory> reference;
        if (spec.mode == DelayMode::replay) {
            FeedbackLaw raw(sys);
            reference = simulate(sys, raw, psi0, cfg.horizon, cfg.dt);
        }
        law = delayed_law(sys, spec, cfg.horizon, reference ? &*reference : nullptr);
        law_name = "delay";
        o.notes["tau"] = spec.tau;
        o.notes["delay_mode"] = std::string(to_string(spec.mode));
    } else if (cfg.preset == Preset::fig2) {
        auto p = std::make_unique<PulsedLaw>(sys, PulseTrainSpec{cfg.pulse_counts.front(), cfg.horizon, cfg.pulse_amplitude}, cfg.dt);
        pulsed = p.get();
        law = std::move(p);
        law_name = "pulse-train";
        o.notes["n_pulses"] = cfg.pulse_counts.front();
        o.notes["pulse_amplitude"] = std::string(to_string(cfg.pulse_amplitude));
    } else {
        law = std::make_unique<FeedbackLaw>(sys);
    }
    o.notes["law"] = law_name;

    const Trajectory traj = simulate(sys, *law, psi0, cfg.horizon, cfg.dt);
    write_trajectory_csv(traj, dir / "trajectory.csv", full_state);
    o.files.push_back("trajectory.csv");
    if (pulsed != nullptr) {
        write_pulse_csv(pulsed->train(), dir / "pulses.csv");
        o.files.push_back("pulses.csv");
    }
    o.summary = "final_F=" + format_number(traj.final_fidelity());
    return o;
}

std::string sweep_summary(const char* name, std::span<const SweepRow> rows) {
    std::string s = std::string(name) + " mean_F:";
    for (const auto& r : rows) s += " " + format_number(r.parameter) + "=" + format_number(r.mean_fidelity);
    return s;
}

Outputs run_delay_sweep(ExperimentConfig& cfg, const fs::path& dir) {
    if (cfg.taus.empty()) cfg.taus = default_config(Preset::fig1).taus;
    const auto rows = delay_sweep(config_system(cfg), cfg.taus, cfg.n_states, cfg.seed, cfg.delay_mode, cfg.horizon, cfg.dt);
    write_sweep_csv(rows, dir / "sweep.csv");
    Outputs o;
    o.files.push_back("sweep.csv");
    o.notes["parameter"] = "tau";
    o.notes["initial_states"] = "shared across all taus (paired design)";
    o.summary = sweep_summary("tau", rows);
    return o;
}

Outputs run_pulse_sweep(ExperimentConfig& cfg, const fs::path& dir) {
    if (cfg.pulse_counts.empty()) cfg.pulse_counts = default_config(Preset::fig3).pulse_counts;
    const auto rows = pulse_count_sweep(config_system(cfg), cfg.pulse_counts, cfg.n_states, cfg.seed, cfg.horizon, cfg.dt,
                                        cfg.pulse_amplitude);
    write_sweep_csv(rows, dir / "sweep.csv");
    Outputs o;
    o.files.push_back("sweep.csv");
    o.notes["parameter"] = "n_pulses";
    o.notes["initial_states"] = "shared across all pulse counts (paired design)";
    o.summary = sweep_summary("n_pulses", rows);
    return o;
}

Outputs run_dim_scaling(ExperimentConfig& cfg, const fs::path& dir) {
    if (cfg.dims.empty()) cfg.dims = default_config(Preset::fig5).dims;
    const ScalingResult result = run_dimension_scaling(cfg);
    write_scaling_csv(result, cfg.fidelity_time, dir / "scaling.csv");
    Outputs o;
    o.files.push_back("scaling.csv");
    json retries = json::object();
    std::string s = "dim mean_convergence_time:";
    for (const auto& r : result.rows) {
        retries[std::to_string(r.dim)] = r.generation_retries;
        s += " " + std::to_string(r.dim) + "=" + format_number(r.mean_convergence_time);
    }
    o.notes["generation_retries"] = retries;
    o.notes["trials_per_dim"] = cfg.n_states;
    o.summary = s;
    return o;
}

Outputs run_check(const ExperimentConfig& cfg, std::ostream& out) {
    const ConvergenceReport report = check_convergence(config_system(cfg));
    out << format_report(report);
    Outputs o;
    o.notes["invariant_set_trivial"] = report.invariant_set_trivial;
    o.notes["spectrum_nondegenerate"] = report.spectrum_nondegenerate;
    o.summary = std::string("invariant_set_trivial=") + (report.invariant_set_trivial ? "true" : "false");
    return o;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"lyapsim: Lyapunov feedback control of closed quantum systems"};
    app.require_subcommand(1);

    Flags flags;
    OptionRefs opt{};
    app.add_option("-c,--config", flags.config_path, "JSON config file; flags override its values");
    app.add_option("-o,--out", flags.out_dir, "output directory")->capture_default_str();
    app.add_flag("--full-state", flags.full_state, "add re_psi_i,im_psi_i columns to trajectory.csv");
    app.add_flag("--record-timing", flags.record_timing, "record wall-clock start/end in manifest.json");
    opt.preset = app.add_option("--preset", flags.preset, "fig1|fig2|fig3|fig4|fig5|custom");
    opt.seed = app.add_option("--seed", flags.seed, "base seed");
    opt.n_states = app.add_option("--n-states", flags.n_states, "random initial states per setting");
    opt.horizon = app.add_option("--horizon", flags.horizon, "simulated time");
    opt.dt = app.add_option("--dt", flags.dt, "integrator step");
    opt.gain = app.add_option("--gain", flags.gain, "feedback gain k");
    opt.taus = app.add_option("--tau", flags.taus, "time delays (delay-sweep; simulate uses the last)");
    opt.delay_mode = app.add_option("--delay-mode", flags.delay_mode, "history|replay|taylor");
    opt.counts = app.add_option("--counts", flags.counts, "pulse counts");
    opt.pulse_amplitude = app.add_option("--pulse-amplitude", flags.pulse_amplitude, "average|sample");
    opt.f0 = app.add_option("--f0", flags.f0, "bang-bang amplitude");
    opt.deadband = app.add_option("--deadband", flags.deadband, "bang-bang deadband");
    opt.dims = app.add_option("--dims", flags.dims, "dimensions for dim-scaling");
    opt.fidelity_time = app.add_option("--fidelity-time", flags.fidelity_time, "time at which dim-scaling reads fidelity");
    opt.threshold = app.add_option("--threshold", flags.threshold, "convergence fidelity threshold");
    opt.initial_state = app.add_option("--initial-state", flags.initial_state, "real amplitudes of the initial state");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "single closed-loop trajectory with the preset's field law"},
        {"delay-sweep", "mean final fidelity versus time delay"},
        {"pulse-sweep", "mean final fidelity versus pulse count"},
        {"bang-bang", "single trajectory under the bang-bang field"},
        {"dim-scaling", "convergence time and fidelity versus dimension"},
        {"check", "convergence preconditions of the 5-level system"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        ExperimentConfig cfg = resolve_config(flags, opt);
        const fs::path dir(flags.out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

        RunManifest manifest;
        manifest.subcommand = command;
        const std::string start = utc_now();

        Outputs o;
        if (command == "simulate") {
            o = run_simulate(cfg, dir, flags.full_state, false);
        } else if (command == "bang-bang") {
            o = run_simulate(cfg, dir, flags.full_state, true);
        } else if (command == "delay-sweep") {
            o = run_delay_sweep(cfg, dir);
        } else if (command == "pulse-sweep") {
            o = run_pulse_sweep(cfg, dir);
        } else if (command == "dim-scaling") {
            o = run_dim_scaling(cfg, dir);
        } else {
            o = run_check(cfg, out);
        }

        manifest.config = cfg;
        manifest.outputs = o.files;
        manifest.notes_json = o.notes.dump();
        if (flags.record_timing) manifest.timing = ManifestTiming{start, utc_now()};
        write_manifest(manifest, dir);
        out << command << ": " << o.summary << '\n';
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const InputError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace lyapsim
