#include "nvmap/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "nvmap/errors.hpp"

namespace nvmap {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& what) {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
        throw ConfigError("invalid number for " + what + ": '" + v + "'");
    return x;
}

long long to_int(const std::string& v, const std::string& what) {
    char* end = nullptr;
    errno = 0;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("invalid integer for " + what + ": '" + v + "'");
    return x;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!cfg.values_[section].emplace(key, trim(line.substr(eq + 1))).second)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

const std::string* ConfigFile::find(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::string ConfigFile::get_string(const std::string& section, const std::string& key, const std::string& def) const {
    const auto* v = find(section, key);
    return v ? *v : def;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double def) const {
    const auto* v = find(section, key);
    return v ? to_double(*v, section + "." + key) : def;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key, long long def) const {
    const auto* v = find(section, key);
    return v ? to_int(*v, section + "." + key) : def;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool def) const {
    const auto* v = find(section, key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("invalid boolean for " + section + "." + key + ": '" + *v + "'");
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key) const {
    const auto* v = find(section, key);
    std::vector<double> out;
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), section + "." + key));
    return out;
}

void ConfigFile::check_known(const std::vector<std::string>& allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [sec, kv] : values_)
        for (const auto& [k, v] : kv)
            if (!ok.count(sec + "." + k)) throw ConfigError(origin_ + ": unknown key [" + sec + "] " + k);
}

std::vector<int> parse_n_range(const std::string& text) {
    std::vector<int> out;
    const std::string t = trim(text);
    auto num = [&](const std::string& s) {
        const long long v = to_int(trim(s), "n-range");
        if (v < 0 || v > 200) throw ConfigError("n-range value out of range: " + s);
        return static_cast<int>(v);
    };
    const auto sep = t.find_first_of("-:");
    if (t.find(',') != std::string::npos) {
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(num(item));
    } else if (sep != std::string::npos) {
        const int a = num(t.substr(0, sep)), b = num(t.substr(sep + 1));
        if (b < a) throw ConfigError("n-range is empty: " + text);
        for (int n = a; n <= b; ++n) out.push_back(n);
    } else {
        out.push_back(num(t));
    }
    if (out.empty()) throw ConfigError("n-range is empty");
    std::vector<int> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("n-range has duplicates");
    return out;
}

ParameterBounds RunConfig::bounds() const {
    if (experiments.empty()) throw ConfigError("no experiments configured");
    return ParameterBounds::defaults(f_k_hz, a_perp_max_hz, experiments.front().t_s);
}

double RunConfig::resolution() const {
    if (resolution_hz > 0.0) return resolution_hz;
    if (experiments.empty()) throw ConfigError("no experiments configured");
    return 1.0 / (experiments.front().k_samples * experiments.front().t_s);
}

RunConfig run_config_from(const ConfigFile& cfg, const std::filesystem::path& base_dir) {
    cfg.check_known({"experiment.b0_mT", "experiment.gamma_n_MHz_per_T", "experiment.t_s_us", "experiment.t_beta_us",
                     "experiment.k_samples", "experiment.t_pol_ms", "experiment.contrast", "experiment.counts",
                     "noise.enabled", "noise.repetitions",
                     "globals.p0", "globals.t2n_star_ms", "globals.t_ell_us",
                     "cluster.source", "cluster.table", "cluster.radius_nm", "cluster.abundance",
                     "cluster.density_nm3", "cluster.exclusion_nm",
                     "anneal.q_v", "anneal.q_a", "anneal.t_a_init", "anneal.max_iters", "anneal.visit_time_divisor",
                     "anneal.accept_time_divisor", "anneal.whole_vector", "anneal.restarts", "anneal.n_range",
                     "bounds.f_k_kHz", "bounds.a_perp_max_kHz",
                     "bootstrap.resamples", "bootstrap.mc_samples",
                     "slice.rho_max_nm", "slice.z_max_nm", "slice.n_rho", "slice.n_z",
                     "grid.half_width_nm", "grid.n",
                     "stats.density_nm3", "stats.resolution_hz", "stats.pair_trials", "stats.azimuth_bins"});
    RunConfig rc;
    rc.base_dir = base_dir;

    ExperimentConfig base;
    base.b0 = cfg.get_double("experiment", "b0_mT", base.b0 * 1e3) * 1e-3;
    base.gamma_n = cfg.get_double("experiment", "gamma_n_MHz_per_T", kConstants.gamma_n / kTwoPi * 1e-6) * kTwoPi * 1e6;
    base.t_s = cfg.get_double("experiment", "t_s_us", base.t_s * 1e6) * 1e-6;
    base.k_samples = static_cast<int>(cfg.get_int("experiment", "k_samples", base.k_samples));
    base.t_pol = cfg.get_double("experiment", "t_pol_ms", base.t_pol * 1e3) * 1e-3;
    base.contrast_eps = cfg.get_double("experiment", "contrast", base.contrast_eps);
    base.counts_c = cfg.get_double("experiment", "counts", base.counts_c);
    const auto tb = cfg.get_list("experiment", "t_beta_us");
    if (tb.empty()) throw ConfigError(cfg.origin() + ": [experiment] t_beta_us is required");
    for (double t : tb) {
        ExperimentConfig c = base;
        c.t_beta = t * 1e-6;
        try {
            c.validate();
        } catch (const DomainError& e) {
            throw ConfigError(cfg.origin() + ": " + e.what());
        }
        rc.experiments.push_back(c);
    }

    if (cfg.get_bool("noise", "enabled", cfg.has("noise", "repetitions"))) {
        NoiseSpec n;
        n.contrast_eps = base.contrast_eps;
        n.counts_c = base.counts_c;
        n.repetitions = cfg.get_double("noise", "repetitions", n.repetitions);
        if (!(n.repetitions > 0.0)) throw ConfigError("noise.repetitions must be positive");
        rc.noise = n;
    }

    rc.globals.p0 = cfg.get_double("globals", "p0", 1.0);
    const double t2 = cfg.get_double("globals", "t2n_star_ms", 0.0);
    rc.globals.t2n_star = t2 > 0.0 ? t2 * 1e-3 : std::numeric_limits<double>::infinity();
    rc.globals.t_ell = cfg.get_double("globals", "t_ell_us", 0.0) * 1e-6;
    try {
        rc.globals.validate();
    } catch (const DomainError& e) {
        throw ConfigError(cfg.origin() + ": " + e.what());
    }

    const std::string src = cfg.get_string("cluster", "source", "table");
    if (src == "table") rc.cluster_source = ClusterSource::Table;
    else if (src == "lattice") rc.cluster_source = ClusterSource::Lattice;
    else if (src == "continuum") rc.cluster_source = ClusterSource::Continuum;
    else throw ConfigError("cluster.source must be table, lattice or continuum");
    if (cfg.has("cluster", "table")) rc.cluster_table = base_dir / cfg.get_string("cluster", "table", "");
    else if (rc.cluster_source == ClusterSource::Table && cfg.has("cluster", "source"))
        throw ConfigError("cluster.table required when cluster.source = table");
    rc.cluster.mode = rc.cluster_source == ClusterSource::Continuum ? ClusterMode::Continuum : ClusterMode::Lattice;
    rc.cluster.radius = cfg.get_double("cluster", "radius_nm", rc.cluster.radius * 1e9) * 1e-9;
    rc.cluster.abundance = cfg.get_double("cluster", "abundance", rc.cluster.abundance);
    rc.cluster.density = cfg.get_double("cluster", "density_nm3", rc.cluster.density * 1e-27) * 1e27;
    rc.cluster.exclusion_radius = cfg.get_double("cluster", "exclusion_nm", rc.cluster.exclusion_radius * 1e9) * 1e-9;

    rc.schedule.q_v = cfg.get_double("anneal", "q_v", rc.schedule.q_v);
    rc.schedule.q_a = cfg.get_double("anneal", "q_a", rc.schedule.q_a);
    rc.schedule.t_a_init = cfg.get_double("anneal", "t_a_init", rc.schedule.t_a_init);
    rc.schedule.max_iters = static_cast<int>(cfg.get_int("anneal", "max_iters", rc.schedule.max_iters));
    rc.schedule.visit_time_divisor = static_cast<int>(cfg.get_int("anneal", "visit_time_divisor", rc.schedule.visit_time_divisor));
    rc.schedule.accept_time_divisor = static_cast<int>(cfg.get_int("anneal", "accept_time_divisor", rc.schedule.accept_time_divisor));
    rc.schedule.whole_vector = cfg.get_bool("anneal", "whole_vector", false);
    rc.restarts = static_cast<int>(cfg.get_int("anneal", "restarts", rc.restarts));
    if (cfg.has("anneal", "n_range")) rc.n_range = parse_n_range(cfg.get_string("anneal", "n_range", ""));
    if (rc.restarts < 1) throw ConfigError("anneal.restarts must be >= 1");

    rc.f_k_hz = cfg.get_double("bounds", "f_k_kHz", rc.f_k_hz * 1e-3) * 1e3;
    rc.a_perp_max_hz = cfg.get_double("bounds", "a_perp_max_kHz", rc.a_perp_max_hz * 1e-3) * 1e3;

    rc.resamples = static_cast<int>(cfg.get_int("bootstrap", "resamples", rc.resamples));
    rc.mc_samples = static_cast<int>(cfg.get_int("bootstrap", "mc_samples", rc.mc_samples));

    rc.slice.rho_max = cfg.get_double("slice", "rho_max_nm", rc.slice.rho_max * 1e9) * 1e-9;
    rc.slice.z_max = cfg.get_double("slice", "z_max_nm", rc.slice.z_max * 1e9) * 1e-9;
    rc.slice.n_rho = static_cast<int>(cfg.get_int("slice", "n_rho", rc.slice.n_rho));
    rc.slice.n_z = static_cast<int>(cfg.get_int("slice", "n_z", rc.slice.n_z));
    rc.grid.half_width = cfg.get_double("grid", "half_width_nm", rc.grid.half_width * 1e9) * 1e-9;
    rc.grid.n = static_cast<int>(cfg.get_int("grid", "n", rc.grid.n));

    rc.density = cfg.get_double("stats", "density_nm3", rc.density * 1e-27) * 1e27;
    rc.resolution_hz = cfg.get_double("stats", "resolution_hz", 0.0);
    rc.pair_trials = static_cast<int>(cfg.get_int("stats", "pair_trials", rc.pair_trials));
    rc.azimuth_bins = static_cast<int>(cfg.get_int("stats", "azimuth_bins", rc.azimuth_bins));

    try {
        rc.schedule.validate();
        rc.bounds().validate();
        rc.cluster.validate();
    } catch (const DomainError& e) {
        throw ConfigError(cfg.origin() + ": " + e.what());
    }
    if (rc.slice.n_rho < 2 || rc.slice.n_z < 2 || rc.grid.n < 2) throw ConfigError("grid resolution must be >= 2");
    if (rc.resamples < 2) throw ConfigError("bootstrap.resamples must be >= 2");
    if (rc.mc_samples < 100) throw ConfigError("bootstrap.mc_samples must be >= 100");
    if (rc.pair_trials < 100) throw ConfigError("stats.pair_trials must be >= 100");
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const ConfigFile cfg = ConfigFile::load(path);
    return run_config_from(cfg, path.parent_path());
}

}  // namespace nvmap
