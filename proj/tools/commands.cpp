#include "commands.hpp"

#include "escflex/bess.hpp"
#include "escflex/csv.hpp"
#include "escflex/errors.hpp"
#include "escflex/kpi.hpp"
#include "escflex/manifest.hpp"
#include "escflex/model.hpp"
#include "escflex/sweep.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace escflex::cli {

namespace fs = std::filesystem;

SolverConfig load_solver_config(const fs::path& file) {
    SolverConfig c;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(file));
        if (j.contains("backend")) c.backend = j["backend"].get<std::string>();
        if (j.contains("feasibility_tol")) c.feasibility_tol = j["feasibility_tol"].get<double>();
        if (j.contains("optimality_tol")) c.optimality_tol = j["optimality_tol"].get<double>();
        if (j.contains("time_limit_seconds")) c.time_limit_seconds = j["time_limit_seconds"].get<double>();
        if (j.contains("tie_break")) c.tie_break = parse_tie_break(j["tie_break"].get<std::string>());
        if (j.contains("tie_break_slack")) c.tie_break_slack = j["tie_break_slack"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(file.filename().string(), 0, "", e.what());
    }
    c.validate();
    return c;
}

namespace {

nlohmann::ordered_json config_json(const SolverConfig& c) {
    nlohmann::ordered_json j;
    j["backend"] = c.backend;
    j["feasibility_tol"] = c.feasibility_tol;
    j["optimality_tol"] = c.optimality_tol;
    j["time_limit_seconds"] = std::isfinite(c.time_limit_seconds) ? nlohmann::ordered_json(c.time_limit_seconds)
                                                                  : nlohmann::ordered_json(nullptr);
    j["tie_break"] = std::string(to_string(c.tie_break));
    j["tie_break_slack"] = c.tie_break_slack;
    return j;
}

nlohmann::ordered_json meta_json(const SolverMetadata& m) {
    return {{"backend", m.backend}, {"lp_status", m.lp_status}, {"tie_break", m.tie_break}, {"iterations", m.iterations},
            {"seconds", m.seconds}, {"rows", m.rows},             {"columns", m.columns},
            {"nonzeros", m.nonzeros}};
}

// Every file under dir except the manifest, sorted.
std::vector<std::string> listing(const fs::path& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            out.push_back(fs::relative(e.path(), dir).generic_string());
    std::sort(out.begin(), out.end());
    return out;
}

// Tracks which stage is running so failures can name it.
struct Stage {
    std::string name = "load";
};

int fail(std::ostream& err, const Stage& stage, const std::exception& e) {
    err << "escflex: " << stage.name << " failed: " << e.what() << "\n";
    return kExitError;
}

}  // namespace

int cmd_solve(const SolveArgs& args, std::ostream& log, std::ostream& err) {
    Stage stage;
    RunManifest manifest;
    manifest.command = "solve";
    manifest.started = std::chrono::system_clock::now();
    try {
        SolverConfig config = args.config ? load_solver_config(*args.config) : SolverConfig{};
        Scenario sc = load_scenario(args.scenario_dir);
        if (args.tax) {
            if (!(*args.tax >= 0.0)) throw std::invalid_argument("--tax must be >= 0");
            sc.costs.k_power = carbon_tax_to_penalty(*args.tax, sc.costs.emission_factor);
        }
        if (args.clearing) sc.clearing = *args.clearing;
        sc.validate();
        manifest.scenario_hash = scenario_hash(sc);
        manifest.config = {{"scenario_dir", args.scenario_dir.generic_string()},
                           {"tax_usd_per_tonne", args.tax ? nlohmann::ordered_json(*args.tax) : nullptr},
                           {"k_power_usd_per_kwh", sc.costs.k_power},
                           {"clearing", std::string(to_string(sc.clearing))},
                           {"solver", config_json(config)}};

        stage.name = "build";
        LinearProgram lp;
        try {
            lp = build_lp(sc);
        } catch (const InfeasibleScenarioError& e) {
            err << "escflex: build: scenario infeasible: " << e.what() << "\n";
            fs::create_directories(args.out);
            write_text_file(args.out / "infeasible.txt", std::string(e.what()) + "\n");
            manifest.solver = {{"lp_status", "not solved"}};
            manifest.outputs = listing(args.out);
            manifest.finished = std::chrono::system_clock::now();
            manifest.save(args.out);
            return kExitInfeasible;
        }

        stage.name = "solve";
        auto sol = solve(lp, config);
        manifest.solver = meta_json(sol.meta);

        stage.name = "write";
        fs::create_directories(args.out);
        if (sol.status == SolveStatus::Infeasible) {
            err << "escflex: solve: LP infeasible; rows in the proof:\n";
            std::string note;
            for (const auto& h : sol.infeasibility_hint) {
                err << "  " << h << "\n";
                note += h + "\n";
            }
            write_text_file(args.out / "infeasible.txt", note);
            write_text_file(args.out / "summary.json", solution_summary_json(sol) + "\n");
        } else if (sol.status == SolveStatus::TimeLimit) {
            err << "escflex: solve: time limit reached before an optimum\n";
            write_text_file(args.out / "summary.json", solution_summary_json(sol) + "\n");
        } else {
            save_solution(sol, sc, args.out);
            stage.name = "report";
            auto kpi = make_kpi_report(sol, sc);
            save_kpi(kpi, args.out);
            log << kpi_table({{fmt::format("k_power={}", sc.costs.k_power), kpi}});
        }
        manifest.outputs = listing(args.out);
        manifest.finished = std::chrono::system_clock::now();
        manifest.save(args.out);
        switch (sol.status) {
        case SolveStatus::Optimal: return kExitOk;
        case SolveStatus::Infeasible: return kExitInfeasible;
        case SolveStatus::TimeLimit: return kExitError;
        }
        return kExitError;
    } catch (const std::exception& e) {
        return fail(err, stage, e);
    }
}

std::string bess_csv(const std::vector<BessRow>& rows) {
    CsvWriter csv({"tax_usd_per_tonne", "b_max_kwh", "proposed_renewable_pct", "bess_renewable_pct"});
    for (const auto& r : rows)
        csv.row({format_number(r.tax), format_number(r.b_max_kwh), format_number(r.proposed_pct),
                 format_number(r.bess_pct)});
    return csv.str();
}

int cmd_bess(const BessArgs& args, std::ostream& log, std::ostream& err) {
    Stage stage;
    RunManifest manifest;
    manifest.command = "bess";
    manifest.started = std::chrono::system_clock::now();
    try {
        SolverConfig config = args.config ? load_solver_config(*args.config) : SolverConfig{};
        if (args.taxes.empty()) throw std::invalid_argument("--tax needs at least one value");
        for (double t : args.taxes)
            if (!(t >= 0.0)) throw std::invalid_argument("--tax values must be >= 0");
        Scenario base = load_scenario(args.scenario_dir);
        base.validate();
        manifest.config = {{"scenario_dir", args.scenario_dir.generic_string()},
                           {"taxes_usd_per_tonne", args.taxes},
                           {"k_batt_usd_per_kwh", base.costs.k_batt},
                           {"clearing", std::string(to_string(base.clearing))},
                           {"solver", config_json(config)}};

        auto at_tax = [&](double tax) {
            Scenario sc = base;
            sc.costs.k_power = carbon_tax_to_penalty(tax, sc.costs.emission_factor);
            return sc;
        };
        Scenario zero = at_tax(0.0);
        manifest.scenario_hash = scenario_hash(zero);

        stage.name = "solve";
        auto frozen = solve(build_lp(zero), config);
        manifest.solver = meta_json(frozen.meta);
        if (frozen.status == SolveStatus::Infeasible) {
            err << "escflex: solve: zero-tax plan infeasible\n";
            for (const auto& h : frozen.infeasibility_hint) err << "  " << h << "\n";
            return kExitInfeasible;
        }
        if (frozen.status != SolveStatus::Optimal) throw SolverError("zero-tax plan hit the time limit");
        auto profile = derive_fixed_profile(frozen, zero);

        std::vector<BessRow> rows;
        for (double tax : args.taxes) {
            Scenario sc = at_tax(tax);
            stage.name = fmt::format("solve (tax {})", tax);
            PlanSolution sol = tax == 0.0 ? frozen : solve(build_lp(sc), config);
            if (sol.status != SolveStatus::Optimal)
                throw SolverError(fmt::format("plan at tax {} is {}", tax, to_string(sol.status)));
            stage.name = fmt::format("bess (tax {})", tax);
            auto batt = size_battery(profile, sc.costs.k_batt, sc.costs.k_power, sc.costs.epsilon, config);
            BessRow row{tax, batt.b_max_kwh, renewable_fractions(sol, sc).pct_of_demand, batt.renewable_pct};
            rows.push_back(row);
            log << fmt::format("tax {:>8} $/tn  b_max {:>12.1f} kWh  proposed {:6.2f}%  bess {:6.2f}%\n", tax,
                               row.b_max_kwh, row.proposed_pct, row.bess_pct);
        }

        stage.name = "write";
        fs::create_directories(args.out);
        write_text_file(args.out / "bess_comparison.csv", bess_csv(rows));
        manifest.outputs = listing(args.out);
        manifest.finished = std::chrono::system_clock::now();
        manifest.save(args.out);
        return kExitOk;
    } catch (const InfeasibleScenarioError& e) {
        err << "escflex: " << stage.name << ": scenario infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        return fail(err, stage, e);
    }
}

int cmd_sweep(const SweepArgs& args, std::ostream& log, std::ostream& err) {
    Stage stage;
    RunManifest manifest;
    manifest.command = "sweep";
    manifest.started = std::chrono::system_clock::now();
    try {
        auto spec = load_sweep_spec(args.grid);
        if (args.config) spec.solver = load_solver_config(*args.config);
        Scenario base = load_scenario(args.scenario_dir);
        base.validate();
        manifest.scenario_hash = scenario_hash(base);
        std::vector<std::string> clearings;
        for (auto c : spec.clearings) clearings.emplace_back(to_string(c));
        manifest.config = {{"scenario_dir", args.scenario_dir.generic_string()},
                           {"grid", args.grid.generic_string()},
                           {"taxes_usd_per_tonne", spec.taxes},
                           {"truck_scales", spec.truck_scales},
                           {"mfg_scales", spec.mfg_scales},
                           {"clearings", clearings},
                           {"workers", spec.workers ? spec.workers : default_workers()},
                           {"solver", config_json(spec.solver)}};
        manifest.solver = {{"backend", spec.solver.backend}};

        stage.name = "sweep";
        auto result = run_sweep(base, spec);

        stage.name = "write";
        save_sweep(result, args.out);
        log << sweep_table(result);
        manifest.outputs = listing(args.out);
        manifest.finished = std::chrono::system_clock::now();
        manifest.save(args.out);
        bool all_ok = std::all_of(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return r.ok(); });
        bool any_infeasible = std::any_of(result.rows.begin(), result.rows.end(),
                                          [](const SweepRow& r) { return r.status == "infeasible"; });
        if (all_ok) return kExitOk;
        err << "escflex: sweep: some cells did not solve; see sweep.csv\n";
        return any_infeasible ? kExitInfeasible : kExitError;
    } catch (const std::exception& e) {
        return fail(err, stage, e);
    }
}

}  // namespace escflex::cli
