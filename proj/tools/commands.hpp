#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace nvmap::cli {

struct CommonArgs {
    std::string config;
    std::uint64_t seed = 1;
    std::string out = "out";
    unsigned threads = 0;
};

struct FitArgs {
    std::string data;
    std::string n_range;
    std::optional<int> restarts;
    std::optional<int> iters;
    bool no_polish = false;
};

struct BootstrapArgs {
    std::string data;
    std::string model;
    std::optional<int> resamples;
};

int cmd_simulate(const CommonArgs& a);
int cmd_fit(const CommonArgs& a, const FitArgs& f);
int cmd_localize(const CommonArgs& a, const std::string& input);
int cmd_bootstrap(const CommonArgs& a, const BootstrapArgs& b);
int cmd_slice(const CommonArgs& a, std::optional<int> grid);
int cmd_stats(const CommonArgs& a, const std::string& input, std::optional<int> grid);

}  // namespace nvmap::cli
