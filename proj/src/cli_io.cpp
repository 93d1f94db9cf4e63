#include "lyapsim/cli_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lyapsim/errors.hpp"

namespace lyapsim {

using json = nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "preset",       "seed",           "dims",          "n_states",
    "horizon",      "dt",             "taus",          "delay_mode",
    "pulse_counts", "pulse_amplitude", "f0",           "deadband",
    "gain_k",       "fidelity_time",  "convergence_threshold", "initial_state"};

double get_number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError(key, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    return v;
}

double get_positive(const json& j, const std::string& key) {
    const double v = get_number(j, key);
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
    return v;
}

std::size_t get_count(const json& j, const std::string& key, std::size_t min) {
    if (!j.is_number_integer()) throw ConfigError(key, "expected an integer");
    if (j.is_number_unsigned()) {
        const auto v = j.get<std::uint64_t>();
        if (v < min) throw ConfigError(key, "must be at least " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }
    const auto v = j.get<std::int64_t>();
    if (v < static_cast<std::int64_t>(min)) throw ConfigError(key, "must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

template <typename Fn>
auto get_list(const json& j, const std::string& key, Fn&& element) {
    if (!j.is_array()) throw ConfigError(key, "expected an array");
    std::vector<decltype(element(j, key))> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(element(j[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.horizon < cfg.dt) throw ConfigError("horizon", "must be at least dt");
    const std::size_t steps = step_count(cfg.horizon, cfg.dt);

    for (std::size_t i = 0; i < cfg.taus.size(); ++i) {
        const std::string key = "taus[" + std::to_string(i) + "]";
        if (std::abs(cfg.taus[i]) > cfg.horizon) throw ConfigError(key, "|tau| must not exceed the horizon");
        if (cfg.delay_mode == DelayMode::history && cfg.taus[i] < 0.0)
            throw ConfigError("delay_mode", "history mode requires non-negative taus");
    }
    for (std::size_t i = 0; i < cfg.pulse_counts.size(); ++i) {
        if (cfg.pulse_counts[i] > steps)
            throw ConfigError("pulse_counts[" + std::to_string(i) + "]", "pulse duration would be shorter than dt");
    }
    for (std::size_t i = 1; i < cfg.dims.size(); ++i) {
        if (cfg.dims[i] <= cfg.dims[i - 1]) throw ConfigError("dims", "must be strictly ascending");
    }
    if (cfg.convergence_threshold > 1.0) throw ConfigError("convergence_threshold", "must not exceed 1");
    if (!cfg.initial_state.empty()) {
        if (cfg.initial_state.size() != 5) throw ConfigError("initial_state", "expected 5 amplitudes");
        double n2 = 0.0;
        for (double a : cfg.initial_state) n2 += a * a;
        if (n2 < 1e-12) throw ConfigError("initial_state", "must not be the zero vector");
    }

    switch (cfg.preset) {
        case Preset::fig1:
            if (cfg.taus.empty()) throw ConfigError("taus", "required by preset fig1");
            break;
        case Preset::fig2:
        case Preset::fig3:
            if (cfg.pulse_counts.empty()) throw ConfigError("pulse_counts", "required by preset " + std::string(to_string(cfg.preset)));
            break;
        case Preset::fig5:
            if (cfg.dims.empty()) throw ConfigError("dims", "required by preset fig5");
            if (cfg.fidelity_time > cfg.horizon) throw ConfigError("fidelity_time", "must not exceed the horizon");
            break;
        default:
            break;
    }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("$", "config must be a JSON object");
    for (const auto& [key, _] : root.items())
        if (!kKnownKeys.contains(key)) throw ConfigError(key, "unknown key");

    Preset preset = Preset::custom;
    if (root.contains("preset")) {
        if (!root["preset"].is_string()) throw ConfigError("preset", "expected a string");
        try {
            preset = preset_from_string(root["preset"].get<std::string>());
        } catch (const InputError& e) {
            throw ConfigError("preset", e.what());
        }
    }
    ExperimentConfig cfg = default_config(preset);

    if (root.contains("seed")) {
        const json& s = root["seed"];
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
            throw ConfigError("seed", "expected a non-negative 64-bit integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (root.contains("dims"))
        cfg.dims = get_list(root["dims"], "dims", [](const json& j, const std::string& k) { return get_count(j, k, 2); });
    if (root.contains("n_states")) cfg.n_states = get_count(root["n_states"], "n_states", 1);
    if (root.contains("horizon")) cfg.horizon = get_positive(root["horizon"], "horizon");
    if (root.contains("dt")) cfg.dt = get_positive(root["dt"], "dt");
    if (root.contains("taus")) cfg.taus = get_list(root["taus"], "taus", get_number);
    if (root.contains("delay_mode")) {
        const json& m = root["delay_mode"];
        if (m.is_null()) {
            cfg.delay_mode.reset();
        } else if (!m.is_string()) {
            throw ConfigError("delay_mode", "expected a string or null");
        } else {
            try {
                cfg.delay_mode = delay_mode_from_string(m.get<std::string>());
            } catch (const InputError& e) {
                throw ConfigError("delay_mode", e.what());
            }
        }
    }
    if (root.contains("pulse_counts"))
        cfg.pulse_counts = get_list(root["pulse_counts"], "pulse_counts",
                                    [](const json& j, const std::string& k) { return get_count(j, k, 1); });
    if (root.contains("pulse_amplitude")) {
        if (!root["pulse_amplitude"].is_string()) throw ConfigError("pulse_amplitude", "expected a string");
        try {
            cfg.pulse_amplitude = pulse_amplitude_from_string(root["pulse_amplitude"].get<std::string>());
        } catch (const InputError& e) {
            throw ConfigError("pulse_amplitude", e.what());
        }
    }
    if (root.contains("f0")) cfg.bang_bang.f0 = get_positive(root["f0"], "f0");
    if (root.contains("deadband")) {
        cfg.bang_bang.deadband = get_number(root["deadband"], "deadband");
        if (cfg.bang_bang.deadband < 0.0) throw ConfigError("deadband", "must be non-negative");
    }
    if (root.contains("gain_k")) cfg.gain_k = get_positive(root["gain_k"], "gain_k");
    if (root.contains("fidelity_time")) cfg.fidelity_time = get_positive(root["fidelity_time"], "fidelity_time");
    if (root.contains("convergence_threshold"))
        cfg.convergence_threshold = get_positive(root["convergence_threshold"], "convergence_threshold");
    if (root.contains("initial_state")) cfg.initial_state = get_list(root["initial_state"], "initial_state", get_number);

    validate(cfg);
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j = json::object();
    j["preset"] = std::string(to_string(cfg.preset));
    j["seed"] = cfg.seed;
    j["dims"] = cfg.dims;
    j["n_states"] = cfg.n_states;
    j["horizon"] = cfg.horizon;
    j["dt"] = cfg.dt;
    j["taus"] = cfg.taus;
    j["delay_mode"] = cfg.delay_mode ? json(std::string(to_string(*cfg.delay_mode))) : json(nullptr);
    j["pulse_counts"] = cfg.pulse_counts;
    j["pulse_amplitude"] = std::string(to_string(cfg.pulse_amplitude));
    j["f0"] = cfg.bang_bang.f0;
    j["deadband"] = cfg.bang_bang.deadband;
    j["gain_k"] = cfg.gain_k;
    j["fidelity_time"] = cfg.fidelity_time;
    j["convergence_threshold"] = cfg.convergence_threshold;
    j["initial_state"] = cfg.initial_state;
    return j.dump(2);
}

std::string format_number(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out, bool full_state) {
    const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().dim();
    out << "t,f,V,F";
    if (full_state)
        for (std::size_t i = 1; i <= dim; ++i) out << ",re_psi_" << i << ",im_psi_" << i;
    out << '\n';
    for (std::size_t r = 0; r < traj.size(); ++r) {
        out << format_number(traj.times[r]) << ',' << format_number(traj.fields[r]) << ','
            << format_number(traj.lyapunov[r]) << ',' << format_number(traj.fidelity[r]);
        if (full_state) {
            for (const Complex& z : traj.states[r].amplitudes())
                out << ',' << format_number(z.real()) << ',' << format_number(z.imag());
        }
        out << '\n';
    }
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path, bool full_state) {
    write_file(path, [&](std::ostream& out) { write_trajectory_csv(traj, out, full_state); });
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
    write_file(path, [&](std::ostream& out) {
        out << "parameter,mean_F,std_F,n\n";
        for (const auto& r : rows)
            out << format_number(r.parameter) << ',' << format_number(r.mean_fidelity) << ','
                << format_number(r.std_fidelity) << ',' << r.trials << '\n';
    });
}

void write_scaling_csv(const ScalingResult& result, double fidelity_time, const std::filesystem::path& path) {
    write_file(path, [&](std::ostream& out) {
        out << "dim,mean_convergence_time,n_nonconverged,mean_F_at_" << format_number(fidelity_time) << '\n';
        for (const auto& r : result.rows)
            out << r.dim << ',' << format_number(r.mean_convergence_time) << ',' << r.n_nonconverged << ','
                << format_number(r.mean_fidelity_at_time) << '\n';
    });
}

void write_pulse_csv(const PulseTrain& train, const std::filesystem::path& path) {
    write_file(path, [&](std::ostream& out) {
        out << "start,duration,amplitude\n";
        for (const auto& p : train.pulses)
            out << format_number(p.start) << ',' << format_number(p.duration) << ',' << format_number(p.amplitude)
                << '\n';
    });
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256: digest init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) throw IoError("failed reading " + path.string());
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);

    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

std::filesystem::path write_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    json j = json::object();
    j["tool"] = "lyapsim";
    j["version"] = std::string(kToolVersion);
    j["subcommand"] = manifest.subcommand;
    j["seed"] = manifest.config.seed;
    j["config"] = json::parse(serialize_config(manifest.config));
    json files = json::array();
    for (const auto& name : manifest.outputs)
        files.push_back(json{{"file", name}, {"sha256", sha256_file(dir / name)}});
    j["outputs"] = files;
    j["notes"] = json::parse(manifest.notes_json);
    if (manifest.timing) j["timing"] = json{{"start", manifest.timing->start}, {"end", manifest.timing->end}};

    const auto path = dir / "manifest.json";
    write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    return path;
}

std::string format_report(const ConvergenceReport& report) {
    std::ostringstream out;
    out << "spectrum_nondegenerate: " << (report.spectrum_nondegenerate ? "true" : "false") << '\n';
    out << "min_spectral_gap: " << format_number(report.min_spectral_gap) << '\n';
    out << "target_index: " << report.target_index << '\n';
    out << "h0_eigenvalues:";
    for (double e : report.h0_eigenvalues) out << ' ' << format_number(e);
    out << '\n';
    out << "couplings:";
    for (double c : report.couplings) out << ' ' << format_number(c);
    out << '\n';
    out << "invariant_set_trivial: " << (report.invariant_set_trivial ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace lyapsim
