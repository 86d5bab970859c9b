#pragma once

#include <array>
#include <string>
#include <vector>

#include "nvmap/signal_model.hpp"

namespace nvmap {

enum class PenaltyKind { AIC, BIC, WIC };
enum Part : int { kRe = 0, kIm = 1, kPsd = 2 };
inline constexpr int kParts = 3;

struct ClusterModel {
    std::vector<SpinParams> spins;
    GlobalParams globals;
    int n() const { return static_cast<int>(spins.size()); }
    int m_params() const { return 3 * n() + 3; }
};

struct Dataset {
    ExperimentConfig config;
    ComplexSpectrum spectrum;
    std::vector<double> samples;  // time trace when available
};

struct DatasetBundle {
    std::vector<Dataset> datasets;
    void validate() const;
    int spectral_points() const;  // K/2, shared by all datasets
    static DatasetBundle from_traces(const std::vector<FidTrace>& traces);
};

using PartArray = std::array<std::vector<double>, kParts>;
using RssTable = std::vector<std::array<double, kParts>>;

std::vector<PartArray> model_residues(const ClusterModel& model, const DatasetBundle& bundle);
ComplexSpectrum model_spectrum(const ClusterModel& model, const ExperimentConfig& config);

// One spin's spectral contribution (Re, Im) for a config; spectra add linearly over spins.
void spin_spectrum(const SpinParams& spin, const GlobalParams& globals, const ExperimentConfig& config,
                   std::vector<double>& re, std::vector<double>& im);
// RSS per part between the data and a model spectrum given as summed Re/Im.
std::array<double, kParts> part_rss(const ComplexSpectrum& data, const std::vector<double>& model_re,
                                    const std::vector<double>& model_im);

inline constexpr double kRssFloor = 1e-300;

double neg_log_likelihood(const RssTable& rss, int k_points, int m_params);
double neg_log_likelihood(const std::vector<PartArray>& residues, int k_points, int m_params);
double penalty(int k_points, int m_params, PenaltyKind kind);

struct CostBreakdown {
    RssTable rss;
    double neg_log_likelihood = 0.0;
    double penalty = 0.0;
    double ic_total = 0.0;
    int k_points = 0;
    int m_params = 0;
};

CostBreakdown cost_from_rss(const RssTable& rss, int k_points, int m_params, PenaltyKind kind);
CostBreakdown ic_cost(const ClusterModel& model, const DatasetBundle& bundle, PenaltyKind kind = PenaltyKind::WIC);
std::string format_cost_report(const CostBreakdown& cost);

}  // namespace nvmap
