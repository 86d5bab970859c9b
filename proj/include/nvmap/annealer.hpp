#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nvmap/geometry.hpp"
#include "nvmap/likelihood.hpp"
#include "nvmap/rng.hpp"

namespace nvmap {

struct AnnealSchedule {
    double q_v = 2.7;
    double q_a = -1.0;
    std::vector<double> t_v_init;  // empty: derived from the bounds widths
    double t_a_init = 1e3;
    int max_iters = 5000;
    int visit_time_divisor = 400;
    int accept_time_divisor = 200;
    bool whole_vector = false;
    void validate() const;
};

// Ranges per parameter kind. The init_* ranges are used for starting values; the hard
// ranges clip every proposal.
struct ParameterBounds {
    double a_par_lo, a_par_hi;
    double a_perp_lo, a_perp_hi;
    double phi_lo, phi_hi;
    double p0_lo, p0_hi;
    double inv_t2_lo, inv_t2_hi;
    double t_ell_lo, t_ell_hi;
    double phi_init_lo, phi_init_hi;
    double inv_t2_init_lo, inv_t2_init_hi;

    static ParameterBounds defaults(double f_k_hz, double a_perp_max_hz, double t_s);
    void validate() const;
    std::vector<double> lo(int n) const;
    std::vector<double> hi(int n) const;
    std::vector<double> init_lo(int n) const;
    std::vector<double> init_hi(int n) const;
};

// theta = [a_par_0, a_perp_0, phi_0, ..., p0, 1/T2*, t_ell]
std::vector<double> encode_model(const ClusterModel& model);
ClusterModel decode_model(const std::vector<double>& theta, int n);

double visiting_temperature(double t, double q_v, double t_init);

// One-dimensional Tsallis visiting distribution; scale T^(1/(3 - q_v)).
double tsallis_sample(double temperature, double q_v, Rng& rng);
double tsallis_density(double x, double temperature, double q_v);
double tsallis_cdf(double x, double temperature, double q_v);
double tsallis_quantile(double p, double temperature, double q_v);

// Perturbs coordinate `coord` (or all, when coord < 0) and reflects into [lo, hi].
std::vector<double> tsallis_step(const std::vector<double>& current, const std::vector<double>& temps, double q_v,
                                 Rng& rng, const std::vector<double>& lo, const std::vector<double>& hi,
                                 int coord);
double reflect_into(double x, double lo, double hi);

double acceptance_probability(double delta_e, double t_a, double q_a);

inline constexpr double kBondLength = 0.154e-9;  // m
double min_pair_distance(const ClusterModel& model, const PhysicalConstants& c = kConstants);
double constrained_accept(const ClusterModel& proposal, double base_probability,
                          const PhysicalConstants& c = kConstants);

// Generic problem used by the annealing loop. trial() evaluates a proposal that differs from
// the current state in coordinate `changed` (or anywhere, changed < 0); accept() commits it.
class AnnealProblem {
public:
    virtual ~AnnealProblem() = default;
    virtual std::size_t dims() const = 0;
    virtual double reset(const std::vector<double>& x) = 0;
    virtual double trial(const std::vector<double>& x, int changed) = 0;
    virtual void accept() = 0;
    virtual bool feasible(const std::vector<double>& /*x*/, int /*changed*/) const { return true; }
};

struct AnnealTrace {
    std::vector<double> best_x;
    double best_cost = 0.0;
    int iterations = 0;
    int accepted = 0;
};

AnnealTrace anneal_problem(AnnealProblem& problem, const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<double>& init_lo, const std::vector<double>& init_hi,
                           const AnnealSchedule& schedule, std::uint64_t seed);

// Convenience wrapper for plain cost functions (test hook).
AnnealTrace anneal_function(const std::function<double(const std::vector<double>&)>& cost,
                            const std::vector<double>& lo, const std::vector<double>& hi,
                            const AnnealSchedule& schedule, std::uint64_t seed);

struct AnnealResult {
    ClusterModel best_model;
    double best_ic = 0.0;
    CostBreakdown cost;
    int iterations = 0;
    int accepted = 0;
    std::uint64_t seed = 0;
};

AnnealResult anneal(const DatasetBundle& bundle, int n_spins, const ParameterBounds& bounds,
                    const AnnealSchedule& schedule, std::uint64_t seed, PenaltyKind kind = PenaltyKind::WIC);

struct FitResult {
    ClusterModel model;
    CostBreakdown cost;
    int n = 0;
    int restart = 0;
    std::uint64_t seed = 0;
    std::vector<Position> positions;
};

struct MultiStartOptions {
    PenaltyKind kind = PenaltyKind::WIC;
    bool polish = true;   // deterministic local refinement of each restart's best state
    unsigned threads = 0;
    int polish_iters = 500;  // cap; slow descents belong to poor basins anyway
};

struct MultiStartResult {
    std::vector<FitResult> best_per_n;           // index-aligned with n_range
    std::vector<std::vector<double>> restart_ic; // [n][restart]
    std::size_t winner = 0;
    const FitResult& best() const { return best_per_n.at(winner); }
};

MultiStartResult multi_start(const DatasetBundle& bundle, const std::vector<int>& n_range,
                             const ParameterBounds& bounds, const AnnealSchedule& schedule, int restarts,
                             std::uint64_t master_seed, const MultiStartOptions& options = {});

FitResult make_fit_result(const ClusterModel& model, const DatasetBundle& bundle, PenaltyKind kind);

}  // namespace nvmap
