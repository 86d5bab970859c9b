#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nvmap/quantum_oracle.hpp"
#include "nvmap/signal_model.hpp"

namespace nvmap {

// One row of the published localization tables (units as printed: kHz, nm, degrees, cubic Angstrom).
struct ReferenceRow {
    int index = 0;
    double a_par_khz = 0, a_par_err_khz = 0;
    double a_perp_khz = 0, a_perp_err_khz = 0;
    double r_nm = 0, r_err_nm = 0;
    double theta_deg = 0, theta_err_deg = 0;
    double phi_deg = 0, phi_err_deg = 0;
    double dv_a3 = 0;
    int flagged = 0;

    SpinParams spin() const;   // SI
    SpinParams sigma() const;  // SI standard errors
};

struct ReferenceTable {
    std::vector<ReferenceRow> rows;
    std::vector<double> phis() const;  // rad
};

ReferenceTable parse_reference_table(const std::string& text, const std::string& origin = "<string>");
std::string format_reference_table(const ReferenceTable& table);
ReferenceTable load_reference_table(const std::filesystem::path& path);
void save_reference_table(const std::filesystem::path& path, const ReferenceTable& table);

struct ReferenceDataset {
    std::vector<ExperimentConfig> experiments;
    GlobalParams globals;
    double integration_time_per_tbeta;  // s
    double repetitions() const;         // full sequences per integration time
};

// Measurement parameter tables for the two NV centers, with their fitted globals.
ReferenceDataset reference_nv1();
ReferenceDataset reference_nv2();

// Three coupled nuclei of the internuclear-coupling simulation.
struct CoupledReference {
    SpinSystem system;
    ExperimentConfig config;
    std::vector<double> g_hz;  // g12, g13, g23
};
CoupledReference reference_coupled_triplet();

}  // namespace nvmap
