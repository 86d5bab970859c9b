#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nvmap/annealer.hpp"
#include "nvmap/likelihood.hpp"
#include "nvmap/sensitivity.hpp"
#include "nvmap/uncertainty.hpp"

namespace nvmap {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string format_fid_trace(const FidTrace& trace);
FidTrace parse_fid_trace(const std::string& text, const std::string& origin = "<string>");
FidTrace read_fid_trace(const std::filesystem::path& path);

// Every *.fid file in the directory, in file-name order.
DatasetBundle load_bundle_dir(const std::filesystem::path& dir);
std::vector<std::filesystem::path> list_fid_files(const std::filesystem::path& dir);

std::string format_spectrum_csv(const ComplexSpectrum& spectrum);
// Data and model spectra side by side, for plotting fits.
std::string format_fit_spectrum_csv(const ComplexSpectrum& data, const ComplexSpectrum& model);

// index, a_par_kHz, a_perp_kHz, r_nm, theta_deg, phi_deg
std::string format_positions_csv(const std::vector<SpinParams>& spins);

std::string format_model(const FitResult& fit);
ClusterModel parse_model(const std::string& text, const std::string& origin = "<string>");
ClusterModel read_model(const std::filesystem::path& path);

std::string format_uncertainty_csv(const BootstrapResult& result, int n);
std::string format_slice_csv(const SliceMap& map);

// Deterministic 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace nvmap
