#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include "nvmap/annealer.hpp"
#include "nvmap/cluster_stats.hpp"
#include "nvmap/config.hpp"
#include "nvmap/errors.hpp"
#include "nvmap/geometry.hpp"
#include "nvmap/io.hpp"
#include "nvmap/quantum_oracle.hpp"
#include "nvmap/reference.hpp"
#include "nvmap/sensitivity.hpp"
#include "nvmap/synthesizer.hpp"
#include "nvmap/uncertainty.hpp"

namespace nvmap::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "nvmap 1.0.0";

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string indexed(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%02zu%s", stem, i, ext);
    return buf;
}

// Records written files and emits a manifest with their digests (no timestamps).
class Outputs {
public:
    Outputs(const std::string& dir, const std::string& command) : dir_(dir), command_(command) {
        fs::create_directories(dir_);
    }
    void param(const std::string& k, const std::string& v) { params_.emplace_back(k, v); }
    void write(const std::string& name, const std::string& text) {
        write_text_file(dir_ / name, text);
        files_.push_back(name);
    }
    void finish() {
        std::ostringstream os;
        os << "command = " << command_ << "\n" << "version = " << kVersion << "\n";
        for (const auto& [k, v] : params_) os << k << " = " << v << "\n";
        os << "\n[files]\n";
        for (const auto& f : files_) os << f << " = " << file_digest(dir_ / f) << "\n";
        write_text_file(dir_ / "manifest.txt", os.str());
    }

private:
    fs::path dir_;
    std::string command_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<std::string> files_;
};

RunConfig config_or_default(const CommonArgs& a) {
    if (a.config.empty()) return RunConfig{};
    return load_run_config(a.config);
}

void common_params(Outputs& o, const CommonArgs& a) {
    o.param("config", a.config.empty() ? "(defaults)" : fs::path(a.config).filename().string());
    o.param("seed", std::to_string(a.seed));
}

std::string tbeta_list(const std::vector<ExperimentConfig>& e) {
    std::string s;
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? ", " : "") + fmt("%.3f", e[i].t_beta * 1e6);
    return s;
}

// Reference table, positions CSV (localize output) or model file.
std::vector<SpinParams> read_spins(const std::string& path, std::vector<double>* dv_m3) {
    const std::string text = read_text_file(path);
    const std::string first = text.substr(0, text.find('\n'));
    if (first.rfind("index,a_par_kHz,a_par_err_kHz", 0) == 0) {
        const ReferenceTable t = parse_reference_table(text, path);
        std::vector<SpinParams> s;
        for (const auto& r : t.rows) {
            s.push_back(r.spin());
            if (dv_m3) dv_m3->push_back(r.dv_a3 * 1e-30);
        }
        return s;
    }
    if (first.rfind("index,a_par_kHz,a_perp_kHz", 0) == 0) {
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        std::vector<SpinParams> s;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            int idx;
            double ap, at, r, th, ph;
            if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &idx, &ap, &at, &r, &th, &ph) != 6)
                throw DataError(path + ": malformed positions row");
            s.push_back({khz_to_rad(ap), khz_to_rad(at), deg_to_rad(ph)});
        }
        return s;
    }
    return parse_model(text, path).spins;
}

}  // namespace

int cmd_simulate(const CommonArgs& a) {
    const RunConfig rc = load_run_config(a.config);
    std::vector<SpinParams> spins;
    if (rc.cluster_source == ClusterSource::Table) {
        if (rc.cluster_table.empty()) throw ConfigError("simulate needs [cluster] table or a lattice/continuum source");
        for (const auto& r : load_reference_table(rc.cluster_table).rows) spins.push_back(r.spin());
    } else {
        for (const auto& p : sample_cluster(rc.cluster, a.seed)) {
            SpinParams s = hyperfine_from_position(p);
            if (s.phi >= kPhiHi) s.phi -= kTwoPi;
            spins.push_back(s);
        }
    }
    const SyntheticBundle syn = generate_bundle(spins, rc.globals, rc.experiments, rc.noise, a.seed);
    Outputs o(a.out, "simulate");
    common_params(o, a);
    o.param("t_beta_us", tbeta_list(rc.experiments));
    o.param("n_spins", std::to_string(spins.size()));
    o.param("noise_sigma", rc.noise ? fmt("%.9g", rc.noise->sigma()) : "none");
    for (std::size_t d = 0; d < syn.traces.size(); ++d) {
        o.write(indexed("trace", d, ".fid"), format_fid_trace(syn.traces[d]));
        o.write(indexed("spectrum", d, ".csv"), format_spectrum_csv(syn.bundle.datasets[d].spectrum));
    }
    o.write("truth.csv", format_positions_csv(spins));
    o.write("truth_model.txt", format_model(syn.truth));
    o.finish();
    std::printf("wrote %zu traces (%zu spins) to %s\n", syn.traces.size(), spins.size(), a.out.c_str());
    return 0;
}

int cmd_fit(const CommonArgs& a, const FitArgs& f) {
    RunConfig rc = config_or_default(a);
    if (!f.n_range.empty()) rc.n_range = parse_n_range(f.n_range);
    if (f.restarts) rc.restarts = *f.restarts;
    if (f.iters) rc.schedule.max_iters = *f.iters;
    if (rc.restarts < 1) throw ConfigError("--restarts must be >= 1");
    rc.schedule.validate();
    const DatasetBundle bundle = load_bundle_dir(f.data);
    const ParameterBounds bounds =
        ParameterBounds::defaults(rc.f_k_hz, rc.a_perp_max_hz, bundle.datasets.front().config.t_s);
    MultiStartOptions opt;
    opt.polish = !f.no_polish;
    opt.threads = a.threads;
    const MultiStartResult res = multi_start(bundle, rc.n_range, bounds, rc.schedule, rc.restarts, a.seed, opt);

    Outputs o(a.out, "fit");
    common_params(o, a);
    o.param("data", fs::path(f.data).filename().string());
    std::string nr;
    for (int n : rc.n_range) nr += (nr.empty() ? "" : ",") + std::to_string(n);
    o.param("n_range", nr);
    o.param("restarts", std::to_string(rc.restarts));
    o.param("iters", std::to_string(rc.schedule.max_iters));
    o.param("polish", opt.polish ? "true" : "false");

    std::ostringstream table;
    table << "n,ic,neg_log_likelihood,penalty,restart\n";
    for (std::size_t i = 0; i < res.best_per_n.size(); ++i) {
        const auto& r = res.best_per_n[i];
        char buf[256];
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%d\n", r.n, r.cost.ic_total, r.cost.neg_log_likelihood,
                      r.cost.penalty, r.restart);
        table << buf;
        o.write(indexed("model_n", static_cast<std::size_t>(r.n), ".txt"), format_model(r));
    }
    o.write("ic_vs_n.csv", table.str());
    const FitResult& best = res.best();
    o.write("winner.txt", format_model(best));
    o.write("winner_positions.csv", format_positions_csv(best.model.spins));
    o.write("cost_report.txt", format_cost_report(best.cost));
    for (std::size_t d = 0; d < bundle.datasets.size(); ++d)
        o.write(indexed("fit_spectrum", d, ".csv"),
                format_fit_spectrum_csv(bundle.datasets[d].spectrum, model_spectrum(best.model, bundle.datasets[d].config)));
    o.finish();
    std::printf("winner: n = %d, IC = %.6f\n", best.n, best.cost.ic_total);
    return 0;
}

int cmd_localize(const CommonArgs& a, const std::string& input) {
    const std::string text = read_text_file(input);
    Outputs o(a.out, "localize");
    o.param("input", fs::path(input).filename().string());
    if (text.rfind("index,a_par_kHz,a_par_err_kHz", 0) == 0) {
        const ReferenceTable t = parse_reference_table(text, input);
        std::vector<SpinParams> spins;
        std::ostringstream cmp;
        cmp << "index,r_nm_table,r_nm,theta_deg_table,theta_deg,dr_nm,dtheta_deg\n";
        for (const auto& r : t.rows) {
            spins.push_back(r.spin());
            const Position p = position_from_hyperfine(r.spin());
            char buf[256];
            std::snprintf(buf, sizeof buf, "%d,%.2f,%.4f,%.2f,%.3f,%.4f,%.3f\n", r.index, r.r_nm, p.r * 1e9,
                          r.theta_deg, rad_to_deg(p.theta), p.r * 1e9 - r.r_nm, rad_to_deg(p.theta) - r.theta_deg);
            cmp << buf;
        }
        o.write("positions.csv", format_positions_csv(spins));
        o.write("comparison.csv", cmp.str());
    } else {
        o.write("positions.csv", format_positions_csv(parse_model(text, input).spins));
    }
    o.finish();
    return 0;
}

int cmd_bootstrap(const CommonArgs& a, const BootstrapArgs& b) {
    const RunConfig rc = config_or_default(a);
    const int resamples = b.resamples.value_or(rc.resamples);
    if (resamples < 2) throw ConfigError("--resamples must be >= 2");
    const DatasetBundle bundle = load_bundle_dir(b.data);
    const FitResult fit = make_fit_result(read_model(b.model), bundle, PenaltyKind::WIC);
    BootstrapOptions opt;
    opt.mc_samples = rc.mc_samples;
    opt.threads = a.threads;
    const BootstrapResult res = bootstrap(fit, bundle, resamples, a.seed, opt);
    Outputs o(a.out, "bootstrap");
    common_params(o, a);
    o.param("model", fs::path(b.model).filename().string());
    o.param("resamples", std::to_string(resamples));
    o.param("mc_samples", std::to_string(opt.mc_samples));
    o.param("dv_definition", "surrogate (2 sigma_r)(2 r sigma_theta)(2 r sin(theta) sigma_phi)");
    o.write("uncertainty.csv", format_uncertainty_csv(res, fit.model.n()));
    std::ostringstream g;
    const std::size_t gi = 3 * static_cast<std::size_t>(fit.model.n());
    g << "p0 = " << fmt("%.6g", res.mean[gi]) << " +- " << fmt("%.3g", res.stderr_[gi]) << "\n";
    g << "inv_t2n_star_per_s = " << fmt("%.6g", res.mean[gi + 1]) << " +- " << fmt("%.3g", res.stderr_[gi + 1]) << "\n";
    g << "t_ell_us = " << fmt("%.6g", res.mean[gi + 2] * 1e6) << " +- " << fmt("%.3g", res.stderr_[gi + 2] * 1e6) << "\n";
    const auto cls = classify_uncertainty_volumes(res);
    g << "dv_below_atom_volume = " << cls.below << "\n" << "dv_at_or_above = " << cls.at_or_above << "\n";
    o.write("globals.txt", g.str());
    o.finish();
    return 0;
}

int cmd_slice(const CommonArgs& a, std::optional<int> grid) {
    RunConfig rc = load_run_config(a.config);
    if (grid) {
        if (*grid < 2) throw ConfigError("--grid must be >= 2");
        rc.grid.n = *grid;
    }
    GlobalParams g = rc.globals;
    Outputs o(a.out, "slice");
    common_params(o, a);
    o.param("t_beta_us", tbeta_list(rc.experiments));
    o.param("grid_n", std::to_string(rc.grid.n));
    // Maps and ridge radii follow the map convention (t_ell = 0); the volume uses the full globals.
    GlobalParams map_globals = g;
    map_globals.t_ell = 0.0;
    std::ostringstream ridge;
    ridge << "t_beta_us,ridge_radius_nm\n";
    for (std::size_t i = 0; i < rc.experiments.size(); ++i) {
        const auto& c = rc.experiments[i];
        o.write(indexed("slice", i, ".csv"), format_slice_csv(slice_map(c, map_globals, rc.slice)));
        ridge << fmt("%.3f", c.t_beta * 1e6) << "," << fmt("%.6f", ridge_radius(c, map_globals) * 1e9) << "\n";
    }
    o.write("ridge.csv", ridge.str());
    const double v = sensitive_volume(rc.experiments, g, rc.grid);
    std::ostringstream s;
    s << "sensitive_volume_nm3 = " << fmt("%.4f", v * 1e27) << "\n";
    s << "density_nm3 = " << fmt("%.4f", rc.density * 1e-27) << "\n";
    s << "expected_spin_count = " << fmt("%.4f", expected_spin_count(v, rc.density)) << "\n";
    o.write("volume.txt", s.str());
    o.finish();
    return 0;
}

int cmd_stats(const CommonArgs& a, const std::string& input, std::optional<int> grid) {
    RunConfig rc = config_or_default(a);
    if (grid) {
        if (*grid < 2) throw ConfigError("--grid must be >= 2");
        rc.grid.n = *grid;
    }
    std::vector<double> dv;
    const std::vector<SpinParams> spins = read_spins(input, &dv);
    if (spins.size() < 2) throw DataError(input + ": need at least two spins");
    std::vector<Position> pos;
    std::vector<double> phis;
    for (const auto& s : spins) {
        pos.push_back(position_from_hyperfine(s));
        phis.push_back(s.phi);
    }
    Outputs o(a.out, "stats");
    common_params(o, a);
    o.param("input", fs::path(input).filename().string());
    std::ostringstream r;
    r << "n_spins = " << spins.size() << "\n";
    r << "azimuth_bins = " << rc.azimuth_bins << "\n";
    r << "azimuth_chi2 = " << fmt("%.6f", chi_square_statistic(phis, rc.azimuth_bins)) << "\n";
    r << "azimuth_p_value = " << fmt("%.6f", chi_square_azimuth(phis, rc.azimuth_bins)) << "\n";
    const auto cp = closest_pair_report(pos, false);
    const auto ci = closest_pair_report(pos, true);
    r << "closest_pair_mean_nm = " << fmt("%.4f", cp.mean_distance * 1e9) << "\n";
    r << "closest_pair_mean_coupling_hz = " << fmt("%.3f", cp.mean_coupling_hz) << "\n";
    r << "closest_pair_mean_nm_with_inversion = " << fmt("%.4f", ci.mean_distance * 1e9) << "\n";
    if (!dv.empty()) {
        const auto c = classify_uncertainty_volumes(dv);
        r << "dv_below_atom_volume = " << c.below << "\n" << "dv_at_or_above = " << c.at_or_above << "\n";
    }
    if (!rc.experiments.empty()) {
        const SensitiveRegion region = upper_half(sensitive_region(rc.experiments, rc.globals, rc.grid));
        PairStats ps = pair_resolvability_mc(region, rc.density, rc.resolution(), rc.pair_trials, a.seed, a.threads);
        r << "pair_resolution_hz = " << fmt("%.3f", rc.resolution()) << "\n";
        r << "pair_trials = " << rc.pair_trials << "\n";
        r << "resolvable_pairs_mean = " << fmt("%.4f", ps.mean) << "\n";
        r << "resolvable_pairs_std = " << fmt("%.4f", ps.std) << "\n";
        r << "resolvable_pairs_p_ge1 = " << fmt("%.4f", ps.p_ge1) << "\n";
    }
    o.write("stats.txt", r.str());
    std::ostringstream nn;
    nn << "index,nearest_nm,coupling_hz\n";
    for (std::size_t i = 0; i < cp.nearest.size(); ++i)
        nn << i + 1 << "," << fmt("%.5f", cp.nearest[i] * 1e9) << "," << fmt("%.3f", cp.coupling_hz[i]) << "\n";
    o.write("nearest_pairs.csv", nn.str());
    o.finish();
    std::fputs(r.str().c_str(), stdout);
    return 0;
}

}  // namespace nvmap::cli
