// Writes the LP of each fixture (at a few taxes) as MPS next to the embedded
// solver's objective, for an external solver to cross-check.
//   mps_dump <fixtures dir> <out dir>
// stdout: one line "<file> <status> <objective>" per LP.
#include "escflex/model.hpp"
#include "escflex/solve.hpp"

#include <fmt/core.h>

#include <filesystem>
#include <fstream>

int main(int argc, char** argv) {
    if (argc != 3) {
        fmt::print(stderr, "usage: mps_dump <fixtures dir> <out dir>\n");
        return 1;
    }
    const std::filesystem::path fixtures = argv[1], out = argv[2];
    std::filesystem::create_directories(out);
    for (const char* name : {"tiny_pair", "southeast"})
        for (double tax : {0.0, 50.0, 250.0}) {
            auto sc = escflex::load_scenario(fixtures / name);
            sc.costs.k_power = escflex::carbon_tax_to_penalty(tax, sc.costs.emission_factor);
            auto lp = escflex::build_lp(sc);
            auto file = fmt::format("{}_tax{}.mps", name, tax);
            std::ofstream(out / file) << lp.to_mps();
            auto sol = escflex::solve(lp);
            fmt::print("{} {} {:.12g}\n", file, escflex::to_string(sol.status), sol.objective);
        }
    return 0;
}
