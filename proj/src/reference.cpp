#include "nvmap/reference.hpp"

#include <cstdio>
#include <sstream>

#include "nvmap/errors.hpp"
#include "nvmap/io.hpp"

namespace nvmap {

namespace {
const char* kHeader =
    "index,a_par_kHz,a_par_err_kHz,a_perp_kHz,a_perp_err_kHz,r_nm,r_err_nm,theta_deg,theta_err_deg,phi_deg,"
    "phi_err_deg,dV_A3,flagged";
}

SpinParams ReferenceRow::spin() const {
    return {khz_to_rad(a_par_khz), khz_to_rad(a_perp_khz), deg_to_rad(phi_deg)};
}

SpinParams ReferenceRow::sigma() const {
    return {khz_to_rad(a_par_err_khz), khz_to_rad(a_perp_err_khz), deg_to_rad(phi_err_deg)};
}

std::vector<double> ReferenceTable::phis() const {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(deg_to_rad(r.phi_deg));
    return out;
}

ReferenceTable parse_reference_table(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw DataError(origin + ": unexpected reference table header");
    ReferenceTable t;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ReferenceRow r;
        char tail = 0;
        const int got = std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d%c", &r.index,
                                    &r.a_par_khz, &r.a_par_err_khz, &r.a_perp_khz, &r.a_perp_err_khz, &r.r_nm,
                                    &r.r_err_nm, &r.theta_deg, &r.theta_err_deg, &r.phi_deg, &r.phi_err_deg, &r.dv_a3,
                                    &r.flagged, &tail);
        if (got != 13) throw DataError(origin + ":" + std::to_string(lineno) + ": malformed row");
        t.rows.push_back(r);
    }
    if (t.rows.empty()) throw DataError(origin + ": empty reference table");
    return t;
}

std::string format_reference_table(const ReferenceTable& table) {
    std::ostringstream os;
    os << kHeader << "\n";
    char buf[512];
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%d\n", r.index,
                      r.a_par_khz, r.a_par_err_khz, r.a_perp_khz, r.a_perp_err_khz, r.r_nm, r.r_err_nm, r.theta_deg,
                      r.theta_err_deg, r.phi_deg, r.phi_err_deg, r.dv_a3, r.flagged);
        os << buf;
    }
    return os.str();
}

ReferenceTable load_reference_table(const std::filesystem::path& path) {
    return parse_reference_table(read_text_file(path), path.string());
}

void save_reference_table(const std::filesystem::path& path, const ReferenceTable& table) {
    write_text_file(path, format_reference_table(table));
}

double ReferenceDataset::repetitions() const {
    const auto& c = experiments.front();
    return integration_time_per_tbeta / (c.t_pol + c.k_samples * c.t_s);
}

ReferenceDataset reference_nv1() {
    ReferenceDataset d;
    for (double tb : {0.930, 1.860, 2.790, 3.720}) {
        ExperimentConfig c;
        c.b0 = 201.29e-3;
        c.t_s = 8.0e-6;
        c.t_beta = tb * 1e-6;
        c.k_samples = 800;
        c.t_pol = 1200 * 30e-6;  // polarization repetitions x NOVEL pulse length
        d.experiments.push_back(c);
    }
    d.globals = {0.66, 11.69e-3, 1.65e-6};
    d.integration_time_per_tbeta = 2.5 * 3600.0;
    return d;
}

ReferenceDataset reference_nv2() {
    ReferenceDataset d;
    for (double tb : {2.966, 3.956, 4.944, 5.932}) {
        ExperimentConfig c;
        c.b0 = 188.89e-3;
        c.t_s = 11.48e-6;
        c.t_beta = tb * 1e-6;
        c.k_samples = 800;
        c.t_pol = 40e-3;
        d.experiments.push_back(c);
    }
    d.globals = {0.43, 8.4e-3, 1.86e-6};
    d.integration_time_per_tbeta = 11.43 * 3600.0;
    return d;
}

CoupledReference reference_coupled_triplet() {
    CoupledReference r;
    const double apar[3] = {10.056, 5.338, -5.593}, aperp[3] = {16.863, 13.990, 9.359};
    for (int i = 0; i < 3; ++i) r.system.nuclei.push_back({khz_to_rad(apar[i]), khz_to_rad(aperp[i]), 0.0});
    r.g_hz = {634.79, 1.17, 22.05};
    r.system.g = Eigen::MatrixXd::Zero(3, 3);
    r.system.g(0, 1) = r.system.g(1, 0) = kTwoPi * r.g_hz[0];
    r.system.g(0, 2) = r.system.g(2, 0) = kTwoPi * r.g_hz[1];
    r.system.g(1, 2) = r.system.g(2, 1) = kTwoPi * r.g_hz[2];
    r.system.b0 = 202e-3;
    r.config.b0 = 202e-3;
    r.config.t_s = 8e-6;
    r.config.t_beta = 0.465e-6;
    r.config.k_samples = 2000;
    return r;
}

}  // namespace nvmap
