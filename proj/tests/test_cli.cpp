#include "helpers.hpp"

#include "commands.hpp"

#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

using namespace escflex;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(ESCFLEX_BIN) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::size_t manifests_under(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.path().filename() == "manifest.json";
    return n;
}

double renewable_pct(const fs::path& out) {
    std::ifstream in(out / "kpi.json");
    auto j = nlohmann::json::parse(in);
    return j["renewable_pct_of_demand"].get<double>();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve writes trajectories, KPIs and one manifest") {
    auto out = testing::scratch_dir("cli-solve");
    REQUIRE(run("solve " + testing::fixture("tiny_pair").string() + " --tax 0 --out " + out.string()) == 0);
    for (auto f : {"summary.json", "kpi.json", "cumulative_energy.csv", "manifest.json", "y.csv", "Yhat.csv"})
        CHECK(fs::exists(out / f));
    CHECK(manifests_under(out) == 1);
    std::ifstream in(out / "manifest.json");
    auto m = nlohmann::json::parse(in);
    CHECK(m["command"] == "solve");
    CHECK(m["scenario_hash"].get<std::string>().size() > 8);
    std::vector<std::string> listed = m["outputs"];
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(out)) files += e.path().filename() != "manifest.json";
    CHECK(listed.size() == files);
}

TEST_CASE("exit codes") {
    auto out = testing::scratch_dir("cli-codes");
    // demand far beyond the raw supply
    auto broken = testing::scratch_dir("cli-impossible");
    fs::copy(testing::fixture("tiny_pair"), broken, fs::copy_options::recursive);
    {
        std::ofstream f(broken / "demand.csv");
        f << "location,step,kg_signed\nB,5,-2000000\n";
    }
    CHECK(run("solve " + broken.string() + " --out " + (out / "impossible").string()) == cli::kExitInfeasible);
    CHECK(fs::exists(out / "impossible" / "infeasible.txt"));
    CHECK(manifests_under(out / "impossible") == 1);

    CHECK(run("solve " + (out / "no-such-dir").string() + " --out " + (out / "missing").string()) == cli::kExitError);
    CHECK(run("solve " + testing::fixture("tiny_pair").string()) == cli::kExitError);  // no --out
    CHECK(run("solve " + testing::fixture("tiny_pair").string() + " --clearing yearly --out " + out.string()) ==
          cli::kExitError);
    CHECK(run("frobnicate") == cli::kExitError);
}

TEST_CASE("stage named in diagnostics") {
    std::ostringstream log, err;
    cli::SolveArgs args;
    args.scenario_dir = "/nonexistent/scenario";
    args.out = testing::scratch_dir("cli-stage");
    CHECK(cli::cmd_solve(args, log, err) == cli::kExitError);
    CHECK(err.str().find("escflex: load failed") != std::string::npos);
}

TEST_CASE("a tax raises the renewable share") {
    auto zero = testing::scratch_dir("cli-tax0");
    auto fifty = testing::scratch_dir("cli-tax50");
    auto fixture = testing::fixture("southeast").string();
    REQUIRE(run("solve " + fixture + " --tax 0 --out " + zero.string()) == 0);
    REQUIRE(run("solve " + fixture + " --tax 50 --out " + fifty.string()) == 0);
    CHECK(renewable_pct(fifty) > renewable_pct(zero));
}

TEST_CASE("repeated runs give byte-identical CSVs") {
    auto a = testing::scratch_dir("cli-repeat-a");
    auto b = testing::scratch_dir("cli-repeat-b");
    auto fixture = testing::fixture("tiny_pair").string();
    REQUIRE(run("solve " + fixture + " --tax 50 --clearing monthly --out " + a.string()) == 0);
    REQUIRE(run("solve " + fixture + " --tax 50 --clearing monthly --out " + b.string()) == 0);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv") continue;
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
        ++compared;
    }
    CHECK(compared >= 12);
}

TEST_CASE("bess at zero tax changes nothing") {
    auto out = testing::scratch_dir("cli-bess0");
    REQUIRE(run("bess " + testing::fixture("tiny_pair").string() + " --tax 0 --out " + out.string()) == 0);
    auto rows = read_csv(out / "bess_comparison.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"tax_usd_per_tonne", "b_max_kwh", "proposed_renewable_pct",
                                              "bess_renewable_pct"});
    CHECK(std::stod(rows[1][1]) == 0.0);
    CHECK(std::stod(rows[1][2]) == doctest::Approx(std::stod(rows[1][3])));
    CHECK(manifests_under(out) == 1);
}

TEST_CASE("bess ladder") {
    auto out = testing::scratch_dir("cli-bess-ladder");
    REQUIRE(run("bess " + testing::fixture("tiny_pair").string() + " --tax 0,50,250,2000 --out " + out.string()) == 0);
    auto rows = read_csv(out / "bess_comparison.csv");
    REQUIRE(rows.size() == 5);
    double last = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double b = std::stod(rows[i][1]);
        CHECK(b >= last - 1e-9);
        last = b;
        CHECK(std::stod(rows[i][2]) >= std::stod(rows[i][3]) - 1e-9);
    }
}

TEST_CASE("sweep writes one row per grid point") {
    auto dir = testing::scratch_dir("cli-sweep");
    {
        std::ofstream f(dir / "grid.json");
        f << R"({"taxes": [0, 50], "truck_scales": [0.1, 1, 10], "mfg_scales": [0.1, 1, 10]})";
    }
    auto out = dir / "out";
    REQUIRE(run("sweep " + testing::fixture("tiny_pair").string() + " --grid " + (dir / "grid.json").string() +
                " --out " + out.string()) == 0);
    auto rows = read_csv(out / "sweep.csv");
    CHECK(rows.size() == 19);
    CHECK(manifests_under(out) == 1);
}

TEST_CASE("solver config files") {
    auto dir = testing::scratch_dir("cli-config");
    {
        std::ofstream f(dir / "solver.json");
        f << R"({"tie_break": "least_inventory", "time_limit_seconds": 60})";
    }
    auto cfg = cli::load_solver_config(dir / "solver.json");
    CHECK(cfg.tie_break == TieBreak::LeastInventory);
    CHECK(cfg.time_limit_seconds == 60.0);
    CHECK(cfg.backend == "simplex");
    {
        std::ofstream f(dir / "bad.json");
        f << R"({"feasibility_tol": -1})";
    }
    CHECK_THROWS(cli::load_solver_config(dir / "bad.json"));
    auto out = dir / "out";
    CHECK(run("solve " + testing::fixture("tiny_pair").string() + " --config " + (dir / "solver.json").string() +
              " --out " + out.string()) == 0);
    std::ifstream in(out / "summary.json");
    CHECK(nlohmann::json::parse(in)["solver"]["tie_break"] == "least_inventory");
}

TEST_CASE("bess csv shape") {
    auto text = cli::bess_csv({{0, 0, 50, 50}, {50, 12.5, 80, 60}});
    CHECK(text.find("tax_usd_per_tonne,b_max_kwh,proposed_renewable_pct,bess_renewable_pct\n") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

}  // TEST_SUITE
