#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spinbath/spinbath.hpp"

using namespace spinbath;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("no column " + name);
    }
};

Csv parse_csv(const std::string& text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    std::istringstream head(line);
    std::string cell;
    while (std::getline(head, cell, ',')) csv.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        REQUIRE(values.size() == csv.header.size());
        csv.rows.push_back(std::move(values));
    }
    return csv;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("spinbath_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::string kExponentialConfig = R"(
# reference scenario
[kernel]
type = exponential
gamma = 1.0
gamma0 = 2.0

[control]
mode = off
seed = 7

[grid]
t_max = 2.0
n_steps = 2000

[initial]
rho11 = 1.0
)";

} // namespace

TEST_CASE("config parse and round trip", "[cli]") {
    const auto cfg = parse_config(kExponentialConfig);
    CHECK(std::get<ExponentialKernel>(cfg.kernel).gamma0 == 2.0);
    CHECK(cfg.seed == 7);
    CHECK(cfg.grid.n_steps == 2000);
    CHECK(cfg.initial.rho11().real() == 1.0);

    const std::string once = serialize_config(cfg);
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);

    // round trip covers every kernel variant and optional section
    ScenarioConfig full;
    full.kernel = TabulatedKernel{0.5, {Complex(1.0, -0.25), Complex(0.0, 0.125)}};
    full.control = PulseSequence::random(0.02, 0.01, 0.2, 99);
    full.seed = 99;
    full.grid = TimeGrid(3.0, 300);
    full.initial = QubitState::from_elements(0.25, Complex(0.125, -0.0625));
    full.output_path = "out/run.csv";
    full.sweep = SweepAxis{"control.psi", {0.1, 0.2, 0.4}};
    const std::string s1 = serialize_config(full);
    const std::string s2 = serialize_config(parse_config(s1));
    CHECK(s1 == s2);
}

TEST_CASE("config errors carry diagnostics", "[cli]") {
    CHECK_THROWS_AS(parse_config("[kernel]\ntype = exponential\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[kernel]\ntype = warp\n"), std::invalid_argument);
    CHECK_THROWS_WITH(
        parse_config(kExponentialConfig + "\n[kernel]\nflux = 1\n"),
        Catch::Matchers::ContainsSubstring("unknown key 'flux'"));
    CHECK_THROWS_WITH(parse_config(kExponentialConfig + "\n[warp]\nx = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown section"));
    CHECK_THROWS_AS(parse_config(kExponentialConfig + "\n[sweep]\nparameter = kernel.gamma0\nvalues =\n"),
                    std::invalid_argument);
    // non-positive-semidefinite initial state
    CHECK_THROWS_AS(
        parse_config("[kernel]\ntype = exponential\ngamma = 1\ngamma0 = 2\n"
                     "[grid]\nt_max = 1\nn_steps = 10\n[initial]\nrho11 = 0.1\nre_rho10 = 0.5\n"),
        std::invalid_argument);
}

TEST_CASE("sweep overrides", "[cli]") {
    auto cfg = parse_config(kExponentialConfig);
    apply_override(cfg, "kernel.gamma0", 5.0);
    CHECK(std::get<ExponentialKernel>(cfg.kernel).gamma0 == 5.0);
    apply_override(cfg, "grid.n_steps", 500.0);
    CHECK(cfg.grid.n_steps == 500);
    CHECK_THROWS_AS(apply_override(cfg, "kernel.acal", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(cfg, "nonsense", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(cfg, "grid.n_steps", 2.5), std::invalid_argument);
}

TEST_CASE("scenario csv schema and anchor values", "[cli]") {
    const auto cfg = parse_config(kExponentialConfig);
    const std::string text = scenario_csv(cfg);
    CHECK(text.rfind("t,re_G,im_G,fidelity,gamma,S,rho11,rho00,re_rho10,im_rho10,valid\n", 0) ==
          0);
    const Csv csv = parse_csv(text);
    REQUIRE(csv.rows.size() == cfg.grid.n_nodes());

    const auto t_col = csv.col("t");
    const auto f_col = csv.col("fidelity");
    const auto g_col = csv.col("gamma");
    const auto v_col = csv.col("valid");
    const auto& row0 = csv.rows.front();
    CHECK(row0[f_col] == 1.0);
    CHECK(row0[csv.col("rho11")] == 1.0);

    // Gamma t = 1 lands on node 1000
    const auto& row = csv.rows[1000];
    CHECK(row[t_col] == Approx(1.0).margin(1e-12));
    CHECK(row[f_col] == Approx(2.0 / std::exp(1.0)).margin(1e-4));
    CHECK(row[g_col] == Approx(1.0).margin(1e-3));
    CHECK(row[v_col] == 1.0);
    CHECK(row[csv.col("rho11")] == Approx(4.0 / std::exp(2.0)).margin(1e-3));
}

TEST_CASE("zero kernel scenario keeps fidelity at one", "[cli]") {
    const std::string config = R"(
[kernel]
type = tabulated
dt = 10.0
values_re = 0 0
values_im = 0 0

[grid]
t_max = 10.0
n_steps = 100
)";
    const Csv csv = parse_csv(scenario_csv(parse_config(config)));
    for (const auto& row : csv.rows) CHECK(row[csv.col("fidelity")] == 1.0);
}

TEST_CASE("scenario output is deterministic", "[cli]") {
    auto cfg = parse_config(kExponentialConfig);
    cfg.control = PulseSequence::random(0.02, 0.01, 0.2, cfg.seed);
    const std::string a = scenario_csv(cfg);
    const std::string b = scenario_csv(cfg);
    CHECK(a == b);
    cfg.seed = 8; // a different pulse realization must change the output
    CHECK(a != scenario_csv(cfg));
}

TEST_CASE("run_scenario writes atomically to the configured path", "[cli]") {
    const fs::path dir = fresh_dir("run");
    auto cfg = parse_config(kExponentialConfig);
    cfg.output_path = (dir / "series.csv").string();
    const auto written = run_scenario(cfg);
    CHECK(fs::exists(written));
    CHECK_FALSE(fs::exists(written.string() + ".tmp"));
    CHECK(parse_csv(read_file(written)).rows.size() == cfg.grid.n_nodes());

    cfg.output_path.clear();
    CHECK_THROWS_AS(run_scenario(cfg), std::invalid_argument);
}

TEST_CASE("oracle-compare on a box bath is tight", "[cli]") {
    const fs::path dir = fresh_dir("oracle_box");
    const std::string config = R"(
[kernel]
type = box
acal = 4.0
n = 16
omega = 3.0

[grid]
t_max = 2.5
n_steps = 10000
)";
    const auto result = oracle_compare(parse_config(config), dir);
    CHECK(result.report.max_abs <= 1e-4);
    CHECK(fs::exists(result.reduced_csv));
    CHECK(fs::exists(result.oracle_csv));
    CHECK(fs::exists(result.report_txt));

    const Csv oracle = parse_csv(read_file(result.oracle_csv));
    const auto n_col = oracle.col("norm");
    for (const auto& row : oracle.rows) CHECK(row[n_col] == Approx(1.0).margin(1e-8));

    // reduced and oracle fidelity columns agree to the reported error
    const Csv reduced = parse_csv(read_file(result.reduced_csv));
    for (std::size_t k = 0; k < reduced.rows.size(); k += 500)
        CHECK(reduced.rows[k][reduced.col("fidelity")] ==
              Approx(oracle.rows[k][oracle.col("fidelity")]).margin(1e-4));
}

TEST_CASE("oracle-compare on a gaussian bath is informational", "[cli]") {
    const fs::path dir = fresh_dir("oracle_gauss");
    const std::string config = R"(
[kernel]
type = gaussian-bath
acal = 20.0
n = 10000
nu = 0.5

[control]
seed = 11

[grid]
t_max = 2.0
n_steps = 2600
)";
    const auto result = oracle_compare(parse_config(config), dir);
    // Eq.-(8) prefactor vs finite-N sum: a finite discrepancy is expected.
    CHECK(result.report.max_abs > 0.0);
    CHECK(std::isfinite(result.report.rms));
    const std::string report = read_file(result.report_txt);
    CHECK(report.find("max_abs") != std::string::npos);

    CHECK_THROWS_AS(
        oracle_compare(parse_config(kExponentialConfig), dir), std::invalid_argument);
}

TEST_CASE("sweep writes one deterministic file per value", "[cli]") {
    const fs::path dir = fresh_dir("sweep");
    auto cfg = parse_config(kExponentialConfig + std::string(R"(
[sweep]
parameter = kernel.gamma0
values = 0.5 2 5
)"));
    const auto paths = run_sweep(cfg, dir);
    REQUIRE(paths.size() == 3);
    CHECK(paths[0].filename() == "sweep_kernel.gamma0_0.5.csv");
    for (const auto& p : paths) CHECK(fs::exists(p));

    // value 2 reproduces the unswept scenario
    const Csv swept = parse_csv(read_file(paths[1]));
    const Csv direct = parse_csv(scenario_csv(parse_config(kExponentialConfig)));
    CHECK(swept.rows[1000][swept.col("fidelity")] ==
          Approx(direct.rows[1000][direct.col("fidelity")]).margin(1e-12));

    CHECK_THROWS_AS(run_sweep(parse_config(kExponentialConfig), dir), std::invalid_argument);
}

TEST_CASE("fig1 surface anchors", "[cli]") {
    const fs::path dir = fresh_dir("fig1");
    const Csv csv = parse_csv(read_file(fig1(dir)));
    const auto g_col = csv.col("gamma0_over_Gamma");
    const auto t_col = csv.col("Gamma_t");
    const auto f_col = csv.col("fidelity");

    int checked = 0;
    std::vector<double> slice02;
    for (const auto& row : csv.rows) {
        if (row[t_col] == 0.0) CHECK(row[f_col] == 1.0);
        if (std::abs(row[g_col] - 2.0) < 1e-12 && std::abs(row[t_col] - 1.0) < 1e-9) {
            CHECK(row[f_col] == Approx(2.0 / std::exp(1.0)).margin(1e-6));
            ++checked;
        }
        if (std::abs(row[g_col] - 0.2) < 1e-12) slice02.push_back(row[f_col]);
    }
    CHECK(checked == 1);

    // gamma0/Gamma = 0.2: the fidelity hits a zero and then revives
    REQUIRE(slice02.size() == 1001);
    const auto min_it = std::min_element(slice02.begin(), slice02.end());
    CHECK(*min_it < 5e-3);
    const double tail_max = *std::max_element(min_it, slice02.end());
    CHECK(tail_max > 0.05);
}

TEST_CASE("fig3 free slices match fig1", "[cli]") {
    const fs::path dir = fresh_dir("fig3");
    const Csv fig3_csv = parse_csv(read_file(fig3(dir)));
    const Csv fig1_csv = parse_csv(read_file(fig1(dir)));

    std::map<long long, double> fig1_gamma02; // keyed by round(100 t)
    for (const auto& row : fig1_csv.rows)
        if (std::abs(row[fig1_csv.col("gamma0_over_Gamma")] - 0.2) < 1e-12)
            fig1_gamma02[std::llround(100.0 * row[fig1_csv.col("Gamma_t")])] =
                row[fig1_csv.col("fidelity")];

    const auto g_col = fig3_csv.col("gamma0_over_Gamma");
    const auto c_col = fig3_csv.col("controlled");
    const auto t_col = fig3_csv.col("Gamma_t");
    const auto f_col = fig3_csv.col("fidelity");
    std::size_t matched = 0;
    bool control_differs = false;
    double free_end = -1.0, controlled_end = -1.0;
    for (const auto& row : fig3_csv.rows) {
        if (std::abs(row[g_col] - 0.2) >= 1e-12) continue;
        const auto key = std::llround(100.0 * row[t_col]);
        REQUIRE(fig1_gamma02.count(key) == 1);
        if (row[c_col] == 0.0) {
            CHECK(row[f_col] == Approx(fig1_gamma02[key]).margin(1e-6));
            ++matched;
        } else if (std::abs(row[f_col] - fig1_gamma02[key]) > 1e-3) {
            control_differs = true;
        }
        if (std::abs(row[t_col] - 5.0) < 1e-9)
            (row[c_col] == 0.0 ? free_end : controlled_end) = row[f_col];
    }
    CHECK(matched == 501);
    CHECK(control_differs);
    // the pulse train rescues the strongly non-Markovian curve at Gamma t = 5
    REQUIRE(free_end >= 0.0);
    REQUIRE(controlled_end >= 0.0);
    CHECK(controlled_end > free_end);
}

TEST_CASE("command line end to end", "[cli]") {
    const fs::path dir = fresh_dir("cli");
    const fs::path config = dir / "run.ini";
    write_file_atomic(config, kExponentialConfig);

    const std::string binary = SPINBATH_CLI_PATH;
    const fs::path out = dir / "series.csv";
    const std::string cmd =
        binary + " run " + config.string() + " --out " + out.string() + " >" +
        (dir / "stdout.txt").string() + " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    REQUIRE(fs::exists(out));
    const Csv csv = parse_csv(read_file(out));
    CHECK(csv.rows[1000][csv.col("fidelity")] == Approx(2.0 / std::exp(1.0)).margin(1e-4));

    // config errors exit nonzero with a diagnostic
    const fs::path bad = dir / "bad.ini";
    write_file_atomic(bad, "[kernel]\ntype = exponential\n");
    const std::string bad_cmd = binary + " run " + bad.string() + " >" +
                                (dir / "bad_out.txt").string() + " 2>" +
                                (dir / "bad_err.txt").string();
    CHECK(std::system(bad_cmd.c_str()) != 0);
    CHECK(read_file(dir / "bad_err.txt").find("error:") != std::string::npos);
}
