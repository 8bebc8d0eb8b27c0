#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hybridwind/series.hpp"
#include "hybridwind/specs.hpp"

namespace toy {

inline hybridwind::series::Timestamp hour(std::size_t t) {
    using namespace std::chrono;
    return sys_days{year{2020} / 1 / 1} + hours{static_cast<long>(t)};
}

// Frame with only the channels that are passed non-empty.
inline hybridwind::series::SeriesFrame frame(std::vector<double> g, std::vector<double> p = {},
                                             std::vector<double> u = {}, std::vector<double> v = {}) {
    hybridwind::series::SeriesFrame f;
    for (std::size_t t = 0; t < g.size(); ++t) f.time.push_back(hour(t));
    f.g = std::move(g);
    if (!p.empty()) f.p = std::move(p);
    if (!u.empty()) f.u = std::move(u);
    if (!v.empty()) f.v = std::move(v);
    return f;
}

// The storage used in the worked Algorithm 1 traces.
inline hybridwind::FarmSpec hand_farm() {
    hybridwind::FarmSpec f;
    f.capacity_mw = 100.0;
    return f;
}

inline hybridwind::StorageSpec hand_storage() {
    hybridwind::StorageSpec s;
    s.rating_mw = 20.0;
    s.duration_h = 2.0;
    s.round_trip_efficiency = 0.8;
    return s;
}

inline std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "hybridwind_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace toy
