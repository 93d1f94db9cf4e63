#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lyapsim/control_law.hpp"
#include "lyapsim/experiments.hpp"
#include "lyapsim/shaping.hpp"
#include "lyapsim/stats.hpp"

namespace lyapsim {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Parses the JSON config schema, filling preset defaults. Unknown keys and
/// invalid values raise ConfigError carrying the key path.
///
/// Keys: preset, seed, dims, n_states, horizon, dt, taus, delay_mode,
/// pulse_counts, pulse_amplitude, f0, deadband, gain_k, fidelity_time,
/// convergence_threshold, initial_state.
ExperimentConfig parse_config(std::string_view text);

/// Canonical JSON text for a config; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Number format used by every CSV: 17 significant digits, %g style.
std::string format_number(double x);

/// t,f,V,F[,re_psi_1,im_psi_1,...] with LF line endings.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out, bool full_state = false);
/// Throws IoError when the file cannot be written.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path, bool full_state = false);

/// parameter,mean_F,std_F,n
void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

/// dim,mean_convergence_time,n_nonconverged,mean_F_at_<fidelity_time>
void write_scaling_csv(const ScalingResult& result, double fidelity_time, const std::filesystem::path& path);

/// start,duration,amplitude
void write_pulse_csv(const PulseTrain& train, const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestTiming {
    std::string start;  // ISO-8601 UTC
    std::string end;
};

/// Run manifest: tool version, resolved config, base seed, per-output checksums.
/// Wall-clock timing is included only when `timing` is given, so that
/// default manifests are reproducible byte for byte.
struct RunManifest {
    std::string subcommand;
    ExperimentConfig config;
    std::vector<std::string> outputs;  // file names relative to the output directory
    std::optional<ManifestTiming> timing;
    std::string notes_json = "{}";  // extra subcommand-specific JSON object
};

/// Writes manifest.json next to the outputs and returns its path.
std::filesystem::path write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

/// Human-readable convergence report, one field per line.
std::string format_report(const ConvergenceReport& report);

/// Command-line entry point. Exit codes: 0 success, 1 config/usage error,
/// 2 numerical failure, 3 I/O failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lyapsim
