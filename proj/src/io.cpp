#include "nvmap/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>

#include "nvmap/config.hpp"
#include "nvmap/errors.hpp"
#include "nvmap/geometry.hpp"

namespace nvmap {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* kFidKeys[] = {"b0_mT", "gamma_n_MHz_per_T", "t_s_us", "t_beta_us", "k_samples", "t_pol_ms", "contrast", "counts"};

}  // namespace

std::string format_fid_trace(const FidTrace& t) {
    std::ostringstream os;
    const auto& c = t.config;
    os << "b0_mT = " << g17(c.b0 * 1e3) << "\n";
    os << "gamma_n_MHz_per_T = " << g17(c.gamma_n / kTwoPi * 1e-6) << "\n";
    os << "t_s_us = " << g17(c.t_s * 1e6) << "\n";
    os << "t_beta_us = " << g17(c.t_beta * 1e6) << "\n";
    os << "k_samples = " << c.k_samples << "\n";
    os << "t_pol_ms = " << g17(c.t_pol * 1e3) << "\n";
    os << "contrast = " << g17(c.contrast_eps) << "\n";
    os << "counts = " << g17(c.counts_c) << "\n";
    os << "\n";
    for (double x : t.samples) os << g17(x) << "\n";
    return os.str();
}

FidTrace parse_fid_trace(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, header;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) break;
        header += line + "\n";
    }
    ConfigFile h;
    try {
        h = ConfigFile::parse(header, origin);
        std::vector<std::string> allowed;
        for (const char* k : kFidKeys) {
            allowed.push_back(std::string(".") + k);
            if (!h.has("", k)) throw DataError(origin + ": missing header key " + k);
        }
        h.check_known(allowed);
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    }
    FidTrace t;
    try {
        t.config.b0 = h.get_double("", "b0_mT", 0) / 1e3;
        t.config.gamma_n = h.get_double("", "gamma_n_MHz_per_T", 0) * kTwoPi * 1e6;
        t.config.t_s = h.get_double("", "t_s_us", 0) / 1e6;
        t.config.t_beta = h.get_double("", "t_beta_us", 0) / 1e6;
        t.config.k_samples = static_cast<int>(h.get_int("", "k_samples", 0));
        t.config.t_pol = h.get_double("", "t_pol_ms", 0) / 1e3;
        t.config.contrast_eps = h.get_double("", "contrast", 0);
        t.config.counts_c = h.get_double("", "counts", 0);
        t.config.validate();
    } catch (const std::exception& e) {
        throw DataError(origin + ": invalid header: " + e.what());
    }
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || !std::isfinite(v)) throw DataError(origin + ": bad sample '" + line + "'");
        t.samples.push_back(v);
    }
    if (static_cast<int>(t.samples.size()) != t.config.k_samples)
        throw DataError(origin + ": sample count " + std::to_string(t.samples.size()) + " != k_samples");
    return t;
}

FidTrace read_fid_trace(const fs::path& path) { return parse_fid_trace(read_text_file(path), path.string()); }

std::vector<fs::path> list_fid_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".fid") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .fid files in " + dir.string());
    return files;
}

DatasetBundle load_bundle_dir(const fs::path& dir) {
    std::vector<FidTrace> traces;
    for (const auto& f : list_fid_files(dir)) traces.push_back(read_fid_trace(f));
    return DatasetBundle::from_traces(traces);
}

std::string format_spectrum_csv(const ComplexSpectrum& s) {
    std::ostringstream os;
    os << "freq_hz,re,im,psd\n";
    for (std::size_t j = 0; j < s.size(); ++j)
        os << g17(s.freq_axis[j]) << "," << g17(s.re[j]) << "," << g17(s.im[j]) << "," << g17(s.psd[j]) << "\n";
    return os.str();
}

std::string format_fit_spectrum_csv(const ComplexSpectrum& d, const ComplexSpectrum& m) {
    std::ostringstream os;
    os << "freq_hz,re,im,psd,model_re,model_im,model_psd\n";
    for (std::size_t j = 0; j < d.size(); ++j)
        os << g17(d.freq_axis[j]) << "," << g17(d.re[j]) << "," << g17(d.im[j]) << "," << g17(d.psd[j]) << ","
           << g17(m.re[j]) << "," << g17(m.im[j]) << "," << g17(m.psd[j]) << "\n";
    return os.str();
}

std::string format_positions_csv(const std::vector<SpinParams>& spins) {
    std::ostringstream os;
    os << "index,a_par_kHz,a_perp_kHz,r_nm,theta_deg,phi_deg\n";
    char buf[256];
    for (std::size_t i = 0; i < spins.size(); ++i) {
        const auto& s = spins[i];
        double r = 0, th = 0;
        if (s.a_perp > 0.0 || s.a_par != 0.0) {
            const Position p = position_from_hyperfine(s);
            r = p.r * 1e9;
            th = rad_to_deg(p.theta);
        }
        std::snprintf(buf, sizeof buf, "%zu,%.4f,%.4f,%.4f,%.3f,%.3f\n", i + 1, rad_to_khz(s.a_par),
                      rad_to_khz(s.a_perp), r, th, rad_to_deg(s.phi));
        os << buf;
    }
    return os.str();
}

std::string format_model(const FitResult& fit) {
    std::ostringstream os;
    const auto& m = fit.model;
    os << "n = " << m.n() << "\n";
    os << "p0 = " << g17(m.globals.p0) << "\n";
    os << "t2n_star_s = " << g17(m.globals.t2n_star) << "\n";
    os << "t_ell_s = " << g17(m.globals.t_ell) << "\n";
    os << "ic = " << g17(fit.cost.ic_total) << "\n";
    os << "neg_log_likelihood = " << g17(fit.cost.neg_log_likelihood) << "\n";
    os << "penalty = " << g17(fit.cost.penalty) << "\n";
    os << "restart = " << fit.restart << "\n";
    os << "seed = " << fit.seed << "\n";
    os << "\n[spins]\n";
    for (int i = 0; i < m.n(); ++i) {
        const auto& s = m.spins[i];
        os << "spin" << i + 1 << " = " << g17(s.a_par) << ", " << g17(s.a_perp) << ", " << g17(s.phi) << "\n";
    }
    return os.str();
}

ClusterModel parse_model(const std::string& text, const std::string& origin) {
    ConfigFile c;
    ClusterModel m;
    try {
        c = ConfigFile::parse(text, origin);
        const long long n = c.get_int("", "n", -1);
        if (n < 0) throw DataError(origin + ": missing n");
        m.globals.p0 = c.get_double("", "p0", 1.0);
        const std::string t2 = c.get_string("", "t2n_star_s", "inf");
        m.globals.t2n_star = t2 == "inf" ? std::numeric_limits<double>::infinity() : c.get_double("", "t2n_star_s", 0);
        m.globals.t_ell = c.get_double("", "t_ell_s", 0.0);
        for (long long i = 0; i < n; ++i) {
            const auto v = c.get_list("spins", "spin" + std::to_string(i + 1));
            if (v.size() != 3) throw DataError(origin + ": spin" + std::to_string(i + 1) + " needs 3 values");
            m.spins.push_back({v[0], v[1], v[2]});
        }
        m.globals.validate();
    } catch (const ConfigError& e) {
        throw DataError(e.what());
    } catch (const DomainError& e) {
        throw DataError(origin + ": " + e.what());
    }
    return m;
}

ClusterModel read_model(const fs::path& path) { return parse_model(read_text_file(path), path.string()); }

std::string format_uncertainty_csv(const BootstrapResult& r, int n) {
    std::ostringstream os;
    os << "index,a_par_kHz,a_par_err_kHz,a_perp_kHz,a_perp_err_kHz,r_nm,r_err_nm,theta_deg,theta_err_deg,phi_deg,"
          "phi_err_deg,dV_A3\n";
    char buf[512];
    for (int i = 0; i < n; ++i) {
        const auto& p = r.positions.at(i);
        std::snprintf(buf, sizeof buf, "%d,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.3f,%.3f,%.3f,%.3f,%.4f\n", i + 1,
                      rad_to_khz(r.mean[3 * i]), rad_to_khz(r.stderr_[3 * i]), rad_to_khz(r.mean[3 * i + 1]),
                      rad_to_khz(r.stderr_[3 * i + 1]), p.r_mean * 1e9, p.sigma_r * 1e9, rad_to_deg(p.theta_mean),
                      rad_to_deg(p.sigma_theta), rad_to_deg(r.mean[3 * i + 2]), rad_to_deg(r.stderr_[3 * i + 2]),
                      p.dv * 1e30);
        os << buf;
    }
    return os.str();
}

std::string format_slice_csv(const SliceMap& map) {
    std::ostringstream os;
    os << "rho_nm,z_nm,sensitivity\n";
    char buf[128];
    for (std::size_t iz = 0; iz < map.z_axis.size(); ++iz)
        for (std::size_t ir = 0; ir < map.rho_axis.size(); ++ir) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.9g\n", map.rho_axis[ir] * 1e9, map.z_axis[iz] * 1e9,
                          map.values(static_cast<Eigen::Index>(iz), static_cast<Eigen::Index>(ir)));
            os << buf;
        }
    return os.str();
}

std::string file_digest(const fs::path& path) {
    const std::string data = read_text_file(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nvmap
