#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvmap/annealer.hpp"
#include "nvmap/sensitivity.hpp"
#include "nvmap/synthesizer.hpp"

namespace nvmap {

// Flat "key = value" text with [section] headers; '#' starts a comment.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");
    static ConfigFile load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& def) const;
    double get_double(const std::string& section, const std::string& key, double def) const;
    long long get_int(const std::string& section, const std::string& key, long long def) const;
    bool get_bool(const std::string& section, const std::string& key, bool def) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    // Throws ConfigError naming any key not in `allowed` (entries "section.key").
    void check_known(const std::vector<std::string>& allowed) const;
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::string origin_;
    const std::string* find(const std::string& section, const std::string& key) const;
};

enum class ClusterSource { Table, Lattice, Continuum };

struct RunConfig {
    std::filesystem::path base_dir;
    std::vector<ExperimentConfig> experiments;
    GlobalParams globals;
    std::optional<NoiseSpec> noise;
    ClusterSource cluster_source = ClusterSource::Table;
    std::filesystem::path cluster_table;
    ClusterSpec cluster;
    AnnealSchedule schedule;
    double f_k_hz = 4.5e3;
    double a_perp_max_hz = 80e3;
    std::vector<int> n_range{1};
    int restarts = 1;
    int resamples = 100;
    int mc_samples = 10000;
    SliceGrid slice;
    Grid3D grid;
    double density = kCarbon13Density;
    double resolution_hz = 0.0;  // 0: 1/(K t_s)
    int pair_trials = 10000;
    int azimuth_bins = 6;

    ParameterBounds bounds() const;
    double resolution() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from(const ConfigFile& cfg, const std::filesystem::path& base_dir);

// "3", "3-7", "3:7" or "3,5,8".
std::vector<int> parse_n_range(const std::string& text);

}  // namespace nvmap
