#include "escflex/manifest.hpp"

#include "escflex/csv.hpp"

#include <fmt/chrono.h>
#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <unistd.h>

namespace escflex {

std::string scenario_hash(const Scenario& sc) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               fmt::format("escflex-hash-{}-{}", static_cast<long>(::getpid()), counter++);
    save_scenario(sc, dir);
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& f : files) {
        feed(f.filename().string());
        feed(std::string_view("\0", 1));
        feed(read_text_file(f));
    }
    std::filesystem::remove_all(dir);
    return fmt::format("{:016x}", h);
}

namespace {

std::string iso(std::chrono::system_clock::time_point t) {
    return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
}

}  // namespace

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["scenario_hash"] = scenario_hash;
    j["config"] = config;
    j["solver"] = solver;
    j["started"] = iso(started);
    j["finished"] = iso(finished);
    j["outputs"] = outputs;
    return j.dump(2);
}

void RunManifest::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "manifest.json", to_json() + "\n");
}

}  // namespace escflex
