#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lyapsim/cli_io.hpp"
#include "lyapsim/errors.hpp"
#include "support.hpp"

using namespace lyapsim;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "lyapsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string config_key_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.key_path();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("parse_config fills preset defaults") {
    const auto cfg = parse_config(R"({"preset":"fig4","seed":7})");
    CHECK(cfg.preset == Preset::fig4);
    CHECK(cfg.seed == 7);
    CHECK(cfg.bang_bang.f0 == 0.1);
    CHECK(cfg.horizon == 200.0);
    CHECK(cfg.initial_state.size() == 5);
    CHECK(parse_config("{}") == default_config(Preset::custom));
}

TEST_CASE("parse_config errors name the offending key") {
    CHECK(config_key_of(R"({"dt":-0.01})") == "dt");
    CHECK(config_key_of(R"({"dt":"fast"})") == "dt");
    CHECK(config_key_of(R"({"colour":1})") == "colour");
    CHECK(config_key_of(R"({"preset":"fig9"})") == "preset");
    CHECK(config_key_of(R"({"seed":-1})") == "seed");
    CHECK(config_key_of(R"({"n_states":0})") == "n_states");
    CHECK(config_key_of(R"({"taus":[0.1,"x"]})") == "taus[1]");
    CHECK(config_key_of(R"({"taus":[-0.5],"delay_mode":"history"})") == "delay_mode");
    CHECK(config_key_of(R"({"delay_mode":"pade"})") == "delay_mode");
    CHECK(config_key_of(R"({"preset":"fig5","dims":[5,4]})") == "dims");
    CHECK(config_key_of(R"({"pulse_counts":[100000]})") == "pulse_counts[0]");
    CHECK(config_key_of(R"({"deadband":-1})") == "deadband");
    CHECK(config_key_of(R"({"initial_state":[1,0]})") == "initial_state");
    CHECK(config_key_of(R"({"horizon":0.001})") == "horizon");
    CHECK(config_key_of(R"({"preset":"fig1","taus":[]})") == "taus");
    CHECK(config_key_of("[1,2]") == "$");
    CHECK(config_key_of("{not json") == "$");
}

TEST_CASE("serialize_config round-trips a fully specified config") {
    ExperimentConfig cfg = default_config(Preset::fig5);
    cfg.seed = 123456789012345ULL;
    cfg.dims = {4, 7, 9};
    cfg.n_states = 13;
    cfg.horizon = 250.5;
    cfg.dt = 0.02;
    cfg.taus = {-0.3, 0.1, 1.0 / 3.0};
    cfg.delay_mode = DelayMode::taylor;
    cfg.pulse_counts = {10, 40};
    cfg.pulse_amplitude = PulseAmplitude::sample_and_hold;
    cfg.bang_bang = {0.05, 1e-9};
    cfg.gain_k = 2.5;
    cfg.fidelity_time = 120.0;
    cfg.convergence_threshold = 0.9;
    cfg.initial_state = {0.1, 0.2, 0.3, 0.4, 0.5};
    const auto text = serialize_config(cfg);
    CHECK(parse_config(text) == cfg);
    CHECK(serialize_config(parse_config(text)) == text);
}

TEST_CASE("format_number keeps 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(200.0) == "200");
    const double x = 0.123456789012345678;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("trajectory CSV layout and re-parse fidelity") {
    const auto sys = preset_5dim();
    const auto psi0 = QuantumState::normalized(std::vector<Complex>{0.6, 0.3, 0.5, 0.2, 0.4});
    FeedbackLaw law(sys);
    const auto traj = simulate(sys, law, psi0, 1.0, 0.01);
    const auto dir = test::scratch_dir("csv");

    write_trajectory_csv(traj, dir / "t.csv");
    const auto rows = read_csv(dir / "t.csv");
    REQUIRE(rows.size() == traj.size() + 1);
    CHECK(rows[0] == std::vector<std::string>{"t", "f", "V", "F"});
    CHECK(std::stod(rows[1][0]) == 0.0);
    CHECK(std::stod(rows[1][3]) == traj.fidelity[0]);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(std::abs(std::stod(rows[i + 1][2]) - traj.lyapunov[i]) <= 1e-15);
        CHECK(std::abs(std::stod(rows[i + 1][3]) - traj.fidelity[i]) <= 1e-15);
    }
    CHECK(slurp(dir / "t.csv").find('\r') == std::string::npos);

    write_trajectory_csv(traj, dir / "full.csv", true);
    const auto full = read_csv(dir / "full.csv");
    REQUIRE(full[0].size() == 14);
    CHECK(full[0][4] == "re_psi_1");
    CHECK(full[0][13] == "im_psi_5");
    CHECK(std::stod(full[1][4]) == psi0[0].real());

    CHECK_THROWS_AS(write_trajectory_csv(traj, dir / "missing" / "t.csv"), IoError);
}

TEST_CASE("manifest checksums match the emitted files") {
    const auto dir = test::scratch_dir("manifest");
    {
        std::ofstream(dir / "a.csv") << "x\n1\n";
    }
    CHECK(sha256_file(dir / "a.csv") == "daff832f802000e645771a60983c76c963f6ee602a6230e45237bd360e91cc1a");
    {
        std::ofstream(dir / "empty.csv");
    }
    CHECK(sha256_file(dir / "empty.csv") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK_THROWS_AS(sha256_file(dir / "nope.csv"), IoError);

    RunManifest m;
    m.subcommand = "simulate";
    m.config = default_config(Preset::fig4);
    m.outputs = {"a.csv"};
    const auto path = write_manifest(m, dir);
    const auto j = nlohmann::json::parse(slurp(path));
    CHECK(j["tool"] == "lyapsim");
    CHECK(j["subcommand"] == "simulate");
    CHECK(j["outputs"][0]["file"] == "a.csv");
    CHECK(j["outputs"][0]["sha256"] == sha256_file(dir / "a.csv"));
    CHECK_FALSE(j.contains("timing"));
    CHECK(parse_config(j["config"].dump()) == m.config);
}

TEST_CASE("cli check prints the report") {
    const auto dir = test::scratch_dir("cli_check");
    const auto r = cli({"check", "-o", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("invariant_set_trivial") != std::string::npos);
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("cli exit codes") {
    const auto dir = test::scratch_dir("cli_codes");
    CHECK(cli({}).code == 1);
    const auto unknown = cli({"frobnicate"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("simulate") != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"simulate", "--dt", "-1", "-o", dir.string()}).code == 1);
    CHECK(cli({"simulate", "--preset", "fig9", "-o", dir.string()}).code == 1);
    CHECK(cli({"simulate", "-c", (dir / "absent.json").string(), "-o", dir.string()}).code == 3);
    {
        std::ofstream(dir / "bad.json") << R"({"horizon": 10, "speed": 3})";
    }
    const auto bad = cli({"simulate", "-c", (dir / "bad.json").string(), "-o", dir.string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("speed") != std::string::npos);
    CHECK(cli({"simulate", "--gain", "1000", "--dt", "1", "--horizon", "20", "-o", dir.string()}).code == 2);
    {
        std::ofstream(dir / "blocker") << "x";
    }
    CHECK(cli({"check", "-o", (dir / "blocker" / "sub").string()}).code == 3);
}

TEST_CASE("cli runs are byte-reproducible") {
    const auto a = test::scratch_dir("cli_rep_a");
    const auto b = test::scratch_dir("cli_rep_b");
    const auto ra = cli({"simulate", "--preset", "fig4", "--seed", "7", "--horizon", "20", "-o", a.string()});
    const auto rb = cli({"simulate", "--preset", "fig4", "--seed", "7", "--horizon", "20", "-o", b.string()});
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out == rb.out);
    CHECK(ra.out.rfind("simulate: final_F=", 0) == 0);
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("cli config file and flag overrides") {
    const auto dir = test::scratch_dir("cli_cfg");
    {
        std::ofstream(dir / "cfg.json") << R"({"preset":"fig3","pulse_counts":[5,10],"n_states":2,"horizon":10})";
    }
    const auto r = cli({"pulse-sweep", "-c", (dir / "cfg.json").string(), "--counts", "4", "8", "-o", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(dir / "sweep.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"parameter", "mean_F", "std_F", "n"});
    CHECK(rows[1][0] == "4");
    CHECK(rows[2][0] == "8");
    CHECK(rows[1][3] == "2");
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j["config"]["pulse_counts"] == nlohmann::json::array({4, 8}));

    const auto timed = cli({"check", "--record-timing", "-o", dir.string()});
    CHECK(timed.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "manifest.json")).contains("timing"));
}

TEST_CASE("cli delay, bang-bang, scaling and full-state outputs") {
    const auto dir = test::scratch_dir("cli_all");
    CHECK(cli({"delay-sweep", "--tau", "0", "0.5", "--n-states", "2", "--horizon", "5", "-o", dir.string()}).code == 0);
    CHECK(read_csv(dir / "sweep.csv").size() == 3);
    CHECK(cli({"bang-bang", "--horizon", "5", "--full-state", "-o", dir.string()}).code == 0);
    CHECK(read_csv(dir / "trajectory.csv")[0].size() == 14);
    CHECK(cli({"dim-scaling", "--dims", "3", "4", "--n-states", "2", "--horizon", "20", "--fidelity-time", "10", "-o",
               dir.string()})
              .code == 0);
    const auto rows = read_csv(dir / "scaling.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"dim", "mean_convergence_time", "n_nonconverged", "mean_F_at_10"});
    CHECK(cli({"simulate", "--preset", "fig2", "--horizon", "10", "-o", dir.string()}).code == 0);
    CHECK(read_csv(dir / "pulses.csv").size() == 51);
}
