#include "nvmap/annealer.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "nvmap/errors.hpp"
#include "nvmap/parallel.hpp"
#include "nvmap/uncertainty.hpp"

namespace nvmap {

void AnnealSchedule::validate() const {
    if (!(q_v > 1.0 && q_v < 3.0)) throw DomainError("q_v must lie in (1, 3)");
    if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (visit_time_divisor < 1 || accept_time_divisor < 1) throw DomainError("time divisors must be >= 1");
    if (!(t_a_init > 0.0)) throw DomainError("t_a_init must be positive");
}

ParameterBounds ParameterBounds::defaults(double f_k_hz, double a_perp_max_hz, double t_s) {
    ParameterBounds b{};
    b.a_par_lo = -kTwoPi * 2.0 * f_k_hz;
    b.a_par_hi = kTwoPi * 2.0 * f_k_hz;
    b.a_perp_lo = 0.0;
    b.a_perp_hi = kTwoPi * a_perp_max_hz;
    b.phi_lo = kPhiLo;
    b.phi_hi = kPhiHi;
    b.phi_init_lo = 0.0;
    b.phi_init_hi = kTwoPi;
    b.p0_lo = 0.3;
    b.p0_hi = 1.0;
    b.inv_t2_init_lo = 0.0;
    b.inv_t2_init_hi = 1.0 / 12e-3;
    b.inv_t2_lo = 0.0;
    b.inv_t2_hi = 1.0 / 4e-3;
    b.t_ell_lo = 0.0;
    b.t_ell_hi = t_s;
    return b;
}

void ParameterBounds::validate() const {
    auto chk = [](double lo, double hi, const char* what) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw DomainError(std::string("invalid bounds for ") + what);
    };
    chk(a_par_lo, a_par_hi, "a_par");
    chk(a_perp_lo, a_perp_hi, "a_perp");
    chk(phi_lo, phi_hi, "phi");
    chk(p0_lo, p0_hi, "p0");
    chk(inv_t2_lo, inv_t2_hi, "1/T2*");
    chk(t_ell_lo, t_ell_hi, "t_ell");
    chk(phi_init_lo, phi_init_hi, "phi init");
    chk(inv_t2_init_lo, inv_t2_init_hi, "1/T2* init");
    if (a_perp_lo < 0.0) throw DomainError("a_perp lower bound must be >= 0");
    if (p0_lo <= 0.0 || p0_hi > 1.0) throw DomainError("p0 bounds must lie in (0, 1]");
    if (inv_t2_lo < 0.0 || t_ell_lo < 0.0) throw DomainError("decay bounds must be >= 0");
    if (phi_init_lo < phi_lo || phi_init_hi > phi_hi || inv_t2_init_lo < inv_t2_lo || inv_t2_init_hi > inv_t2_hi)
        throw DomainError("initialization intervals must lie inside the hard bounds");
}

namespace {

std::vector<double> layout(int n, double a, double b, double c, double p, double g, double t) {
    std::vector<double> v;
    v.reserve(3 * n + 3);
    for (int i = 0; i < n; ++i) {
        v.push_back(a);
        v.push_back(b);
        v.push_back(c);
    }
    v.push_back(p);
    v.push_back(g);
    v.push_back(t);
    return v;
}

}  // namespace

std::vector<double> ParameterBounds::lo(int n) const {
    return layout(n, a_par_lo, a_perp_lo, phi_lo, p0_lo, inv_t2_lo, t_ell_lo);
}
std::vector<double> ParameterBounds::hi(int n) const {
    return layout(n, a_par_hi, a_perp_hi, phi_hi, p0_hi, inv_t2_hi, t_ell_hi);
}
std::vector<double> ParameterBounds::init_lo(int n) const {
    return layout(n, a_par_lo, a_perp_lo, phi_init_lo, p0_lo, inv_t2_init_lo, t_ell_lo);
}
std::vector<double> ParameterBounds::init_hi(int n) const {
    return layout(n, a_par_hi, a_perp_hi, phi_init_hi, p0_hi, inv_t2_init_hi, t_ell_hi);
}

std::vector<double> encode_model(const ClusterModel& m) {
    std::vector<double> v;
    for (const auto& s : m.spins) {
        v.push_back(s.a_par);
        v.push_back(s.a_perp);
        v.push_back(s.phi);
    }
    v.push_back(m.globals.p0);
    v.push_back(std::isfinite(m.globals.t2n_star) ? 1.0 / m.globals.t2n_star : 0.0);
    v.push_back(m.globals.t_ell);
    return v;
}

ClusterModel decode_model(const std::vector<double>& x, int n) {
    if (static_cast<int>(x.size()) != 3 * n + 3) throw DomainError("decode_model: length mismatch");
    ClusterModel m;
    m.spins.resize(n);
    for (int i = 0; i < n; ++i) m.spins[i] = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
    m.globals.p0 = x[3 * n];
    m.globals.t2n_star = x[3 * n + 1] > 0.0 ? 1.0 / x[3 * n + 1] : std::numeric_limits<double>::infinity();
    m.globals.t_ell = x[3 * n + 2];
    return m;
}

double visiting_temperature(double t, double q_v, double t_init) {
    if (t < 1.0) throw DomainError("visiting_temperature: t must be >= 1");
    const double e = q_v - 1.0;
    return t_init * (std::pow(2.0, e) - 1.0) / (std::pow(1.0 + t, e) - 1.0);
}

// The 1-D Tsallis density is a scaled Student t with nu = (3 - q_v)/(q_v - 1) and
// sigma = s / sqrt(3 - q_v), s = T^(1/(3 - q_v)). Sampling: Gaussian over a chi radius.
namespace {

bool gaussian_limit(double q_v) { return q_v - 1.0 < 1e-9; }

struct TsallisShape {
    double nu, sigma;
};

TsallisShape shape(double temperature, double q_v) {
    const double s = std::pow(temperature, 1.0 / (3.0 - q_v));
    return {(3.0 - q_v) / (q_v - 1.0), s / std::sqrt(3.0 - q_v)};
}

}  // namespace

double tsallis_sample(double temperature, double q_v, Rng& rng) {
    if (!(temperature > 0.0)) throw DomainError("tsallis_sample: temperature must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    if (gaussian_limit(q_v)) return std::pow(temperature, 1.0 / (3.0 - q_v)) / std::sqrt(3.0 - q_v) * normal(rng);
    const TsallisShape sh = shape(temperature, q_v);
    std::gamma_distribution<double> chi2(0.5 * sh.nu, 2.0);
    for (;;) {
        const double z = normal(rng);
        const double w = chi2(rng);
        if (w > 0.0) {
            const double x = sh.sigma * z / std::sqrt(w / sh.nu);
            if (std::isfinite(x)) return x;
        }
    }
}

double tsallis_density(double x, double temperature, double q_v) {
    if (gaussian_limit(q_v)) {
        const double sig = std::pow(temperature, 1.0 / (3.0 - q_v)) / std::sqrt(3.0 - q_v);
        return std::exp(-0.5 * x * x / (sig * sig)) / (sig * std::sqrt(kTwoPi));
    }
    const TsallisShape sh = shape(temperature, q_v);
    boost::math::students_t_distribution<double> t(sh.nu);
    return boost::math::pdf(t, x / sh.sigma) / sh.sigma;
}

double tsallis_cdf(double x, double temperature, double q_v) {
    if (gaussian_limit(q_v)) {
        const double sig = std::pow(temperature, 1.0 / (3.0 - q_v)) / std::sqrt(3.0 - q_v);
        return 0.5 * std::erfc(-x / (sig * std::sqrt(2.0)));
    }
    const TsallisShape sh = shape(temperature, q_v);
    boost::math::students_t_distribution<double> t(sh.nu);
    return boost::math::cdf(t, x / sh.sigma);
}

double tsallis_quantile(double p, double temperature, double q_v) {
    if (gaussian_limit(q_v)) throw DomainError("tsallis_quantile: use the Gaussian quantile at q_v = 1");
    const TsallisShape sh = shape(temperature, q_v);
    boost::math::students_t_distribution<double> t(sh.nu);
    return sh.sigma * boost::math::quantile(t, p);
}

double reflect_into(double x, double lo, double hi) {
    const double w = hi - lo;
    double y = std::fmod(x - lo, 2.0 * w);
    if (y < 0.0) y += 2.0 * w;
    double r = lo + (y <= w ? y : 2.0 * w - y);
    if (r >= hi) r = std::nextafter(hi, lo);  // half-open windows such as phi
    return r;
}

std::vector<double> tsallis_step(const std::vector<double>& current, const std::vector<double>& temps, double q_v,
                                 Rng& rng, const std::vector<double>& lo, const std::vector<double>& hi,
                                 int coord) {
    std::vector<double> x = current;
    auto move = [&](std::size_t i) {
        if (!(temps[i] > 0.0)) throw DomainError("tsallis_step: temperatures must be positive");
        x[i] = reflect_into(x[i] + tsallis_sample(temps[i], q_v, rng), lo[i], hi[i]);
    };
    if (coord >= 0) {
        move(static_cast<std::size_t>(coord));
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) move(i);
    }
    return x;
}

double acceptance_probability(double delta_e, double t_a, double q_a) {
    if (!(t_a > 0.0)) throw DomainError("acceptance_probability: t_a must be positive");
    if (delta_e <= 0.0) return 1.0;
    if (q_a == 1.0) return std::exp(-delta_e / t_a);
    const double base = 1.0 - (1.0 - q_a) * delta_e / t_a;
    if (base <= 0.0) return 0.0;
    return std::clamp(std::pow(base, 1.0 / (1.0 - q_a)), 0.0, 1.0);
}

namespace {

bool has_position(const SpinParams& s) { return s.a_perp > 0.0 || s.a_par != 0.0; }

}  // namespace

double min_pair_distance(const ClusterModel& model, const PhysicalConstants& c) {
    std::vector<Eigen::Vector3d> xs;
    for (const auto& s : model.spins)
        if (has_position(s)) xs.push_back(position_from_hyperfine(s.a_par, std::max(0.0, s.a_perp), s.phi, c).cartesian());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) best = std::min(best, (xs[i] - xs[j]).norm());
    return best;
}

double constrained_accept(const ClusterModel& proposal, double base_probability, const PhysicalConstants& c) {
    return min_pair_distance(proposal, c) < kBondLength ? 0.0 : base_probability;
}

AnnealTrace anneal_problem(AnnealProblem& problem, const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<double>& init_lo, const std::vector<double>& init_hi,
                           const AnnealSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    const std::size_t D = problem.dims();
    if (lo.size() != D || hi.size() != D || init_lo.size() != D || init_hi.size() != D)
        throw DomainError("anneal: bounds dimension mismatch");
    for (std::size_t i = 0; i < D; ++i)
        if (!(lo[i] < hi[i]) || init_lo[i] < lo[i] || init_hi[i] > hi[i] || init_lo[i] > init_hi[i])
            throw DomainError("anneal: invalid bounds");

    std::vector<double> tv1 = schedule.t_v_init;
    if (tv1.empty()) {
        // scale T^(1/(3 - q_v)) equals the full interval width at t = 1
        tv1.resize(D);
        for (std::size_t i = 0; i < D; ++i) tv1[i] = std::pow(hi[i] - lo[i], 3.0 - schedule.q_v);
    }
    if (tv1.size() != D) throw DomainError("anneal: t_v_init has wrong length");

    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> x(D);
    for (int attempt = 0;; ++attempt) {
        for (std::size_t i = 0; i < D; ++i) x[i] = init_lo[i] + (init_hi[i] - init_lo[i]) * unif(rng);
        if (problem.feasible(x, -1)) break;
        if (attempt > 10000) throw NumericalError("anneal: no feasible starting point");
    }
    double e = problem.reset(x);
    AnnealTrace tr;
    tr.best_x = x;
    tr.best_cost = e;
    std::vector<double> temps(D);
    for (int t = 1; t <= schedule.max_iters; ++t) {
        const double tv = 1.0 + static_cast<double>(t - 1) / schedule.visit_time_divisor;
        const double ta = 1.0 + static_cast<double>(t - 1) / schedule.accept_time_divisor;
        for (std::size_t i = 0; i < D; ++i) temps[i] = visiting_temperature(tv, schedule.q_v, tv1[i]);
        const double t_acc = visiting_temperature(ta, schedule.q_v, schedule.t_a_init) / ta;
        const int coord = schedule.whole_vector ? -1 : static_cast<int>((t - 1) % D);
        std::vector<double> y = tsallis_step(x, temps, schedule.q_v, rng, lo, hi, coord);
        const double u = unif(rng);
        if (!problem.feasible(y, coord)) continue;
        const double ey = problem.trial(y, coord);
        if (!std::isfinite(ey)) continue;
        if (u < acceptance_probability(ey - e, t_acc, schedule.q_a)) {
            problem.accept();
            x.swap(y);
            e = ey;
            ++tr.accepted;
            if (e < tr.best_cost) {
                tr.best_cost = e;
                tr.best_x = x;
            }
        }
        tr.iterations = t;
    }
    return tr;
}

namespace {

class FunctionProblem : public AnnealProblem {
public:
    FunctionProblem(const std::function<double(const std::vector<double>&)>& f, std::size_t d) : f_(f), d_(d) {}
    std::size_t dims() const override { return d_; }
    double reset(const std::vector<double>& x) override { return f_(x); }
    double trial(const std::vector<double>& x, int) override { return f_(x); }
    void accept() override {}

private:
    const std::function<double(const std::vector<double>&)>& f_;
    std::size_t d_;
};

// Cost of a cluster model with per-spin spectra cached; a one-spin proposal recomputes
// only that spin's spectrum. Totals are always summed in spin order.
class BundleProblem : public AnnealProblem {
public:
    BundleProblem(const DatasetBundle& b, int n, PenaltyKind kind)
        : b_(b), n_(n), k_(b.spectral_points()), pen_(penalty(k_, 3 * n + 3, kind)) {
        const std::size_t D = b.datasets.size();
        cre_.assign(D, std::vector<std::vector<double>>(n));
        cim_ = cre_;
        tre_ = cre_;
        tim_ = cre_;
        sum_re_.resize(k_);
        sum_im_.resize(k_);
    }
    std::size_t dims() const override { return 3 * n_ + 3; }

    double reset(const std::vector<double>& x) override {
        compute_all(x, cre_, cim_);
        return cost_with(-1);
    }

    double trial(const std::vector<double>& x, int changed) override {
        if (changed >= 0 && changed < 3 * n_) {
            trial_spin_ = changed / 3;
            const ClusterModel m = decode_model(x, n_);
            for (std::size_t d = 0; d < b_.datasets.size(); ++d)
                spin_spectrum(m.spins[trial_spin_], m.globals, b_.datasets[d].config, tre_[d][0], tim_[d][0]);
            return cost_with(trial_spin_);
        }
        trial_spin_ = -2;
        compute_all(x, tre_, tim_);
        return cost_with(-2);
    }

    void accept() override {
        if (trial_spin_ >= 0) {
            for (std::size_t d = 0; d < b_.datasets.size(); ++d) {
                cre_[d][trial_spin_].swap(tre_[d][0]);
                cim_[d][trial_spin_].swap(tim_[d][0]);
            }
        } else if (trial_spin_ == -2) {
            cre_.swap(tre_);
            cim_.swap(tim_);
        }
        trial_spin_ = -1;
    }

    bool feasible(const std::vector<double>& x, int changed) const override {
        if (changed >= 3 * n_) return true;  // global parameter: positions unchanged
        const ClusterModel m = decode_model(x, n_);
        std::vector<Eigen::Vector3d> xs(n_);
        std::vector<bool> ok(n_);
        for (int i = 0; i < n_; ++i) {
            ok[i] = has_position(m.spins[i]);
            if (ok[i]) xs[i] = position_from_hyperfine(m.spins[i]).cartesian();
        }
        for (int i = 0; i < n_; ++i) {
            if (!ok[i]) continue;
            if (changed >= 0 && i != changed / 3) continue;
            for (int j = 0; j < n_; ++j)
                if (j != i && ok[j] && (xs[i] - xs[j]).norm() < kBondLength) return false;
        }
        return true;
    }

private:
    void compute_all(const std::vector<double>& x, std::vector<std::vector<std::vector<double>>>& re,
                     std::vector<std::vector<std::vector<double>>>& im) {
        const ClusterModel m = decode_model(x, n_);
        for (std::size_t d = 0; d < b_.datasets.size(); ++d)
            for (int i = 0; i < n_; ++i) spin_spectrum(m.spins[i], m.globals, b_.datasets[d].config, re[d][i], im[d][i]);
    }

    // mode: -1 current cache, -2 full trial cache, i >= 0 current with spin i from the trial
    double cost_with(int mode) {
        RssTable rss(b_.datasets.size());
        for (std::size_t d = 0; d < b_.datasets.size(); ++d) {
            std::fill(sum_re_.begin(), sum_re_.end(), 0.0);
            std::fill(sum_im_.begin(), sum_im_.end(), 0.0);
            for (int i = 0; i < n_; ++i) {
                const std::vector<double>* r;
                const std::vector<double>* im;
                if (mode == -2) {
                    r = &tre_[d][i];
                    im = &tim_[d][i];
                } else if (mode == i) {
                    r = &tre_[d][0];
                    im = &tim_[d][0];
                } else {
                    r = &cre_[d][i];
                    im = &cim_[d][i];
                }
                for (int j = 0; j < k_; ++j) {
                    sum_re_[j] += (*r)[j];
                    sum_im_[j] += (*im)[j];
                }
            }
            rss[d] = part_rss(b_.datasets[d].spectrum, sum_re_, sum_im_);
        }
        return neg_log_likelihood(rss, k_, 3 * n_ + 3) + pen_;
    }

    const DatasetBundle& b_;
    int n_, k_;
    double pen_;
    int trial_spin_ = -1;
    std::vector<std::vector<std::vector<double>>> cre_, cim_, tre_, tim_;
    std::vector<double> sum_re_, sum_im_;
};

}  // namespace

AnnealTrace anneal_function(const std::function<double(const std::vector<double>&)>& cost,
                            const std::vector<double>& lo, const std::vector<double>& hi,
                            const AnnealSchedule& schedule, std::uint64_t seed) {
    FunctionProblem p(cost, lo.size());
    return anneal_problem(p, lo, hi, lo, hi, schedule, seed);
}

AnnealResult anneal(const DatasetBundle& bundle, int n_spins, const ParameterBounds& bounds,
                    const AnnealSchedule& schedule, std::uint64_t seed, PenaltyKind kind) {
    bundle.validate();
    bounds.validate();
    if (n_spins < 0) throw DomainError("anneal: n_spins must be >= 0");
    BundleProblem problem(bundle, n_spins, kind);
    const AnnealTrace tr = anneal_problem(problem, bounds.lo(n_spins), bounds.hi(n_spins), bounds.init_lo(n_spins),
                                          bounds.init_hi(n_spins), schedule, seed);
    AnnealResult r;
    r.best_model = decode_model(tr.best_x, n_spins);
    r.cost = ic_cost(r.best_model, bundle, kind);
    r.best_ic = r.cost.ic_total;
    r.iterations = tr.iterations;
    r.accepted = tr.accepted;
    r.seed = seed;
    return r;
}

FitResult make_fit_result(const ClusterModel& model, const DatasetBundle& bundle, PenaltyKind kind) {
    FitResult f;
    f.model = model;
    f.n = model.n();
    f.cost = ic_cost(model, bundle, kind);
    for (const auto& s : model.spins)
        f.positions.push_back(has_position(s) ? position_from_hyperfine(s) : Position{});
    return f;
}

MultiStartResult multi_start(const DatasetBundle& bundle, const std::vector<int>& n_range,
                             const ParameterBounds& bounds, const AnnealSchedule& schedule, int restarts,
                             std::uint64_t master_seed, const MultiStartOptions& options) {
    if (n_range.empty()) throw DomainError("multi_start: empty n range");
    if (restarts < 1) throw DomainError("multi_start: restarts must be >= 1");
    bundle.validate();
    bounds.validate();
    const std::size_t tasks = n_range.size() * static_cast<std::size_t>(restarts);
    std::vector<FitResult> results(tasks);
    parallel_for(
        tasks,
        [&](std::size_t k) {
            const int n = n_range[k / restarts];
            const int r = static_cast<int>(k % restarts);
            const std::uint64_t seed = derive_seed(master_seed, {kTagAnneal, static_cast<std::uint64_t>(n),
                                                                 static_cast<std::uint64_t>(r)});
            AnnealResult a = anneal(bundle, n, bounds, schedule, seed, options.kind);
            ClusterModel best = a.best_model;
            if (options.polish && n > 0) {
                RefineOptions ro;
                ro.max_iters = options.polish_iters;
                ClusterModel refined = local_refine(best, bundle, &bounds, ro);
                if (min_pair_distance(refined) >= kBondLength &&
                    ic_cost(refined, bundle, options.kind).ic_total <= a.best_ic)
                    best = refined;
            }
            FitResult f = make_fit_result(best, bundle, options.kind);
            f.restart = r;
            f.seed = seed;
            results[k] = std::move(f);
        },
        options.threads);

    MultiStartResult out;
    out.restart_ic.resize(n_range.size());
    for (std::size_t i = 0; i < n_range.size(); ++i) {
        std::size_t best = i * restarts;
        for (int r = 0; r < restarts; ++r) {
            const std::size_t k = i * restarts + r;
            out.restart_ic[i].push_back(results[k].cost.ic_total);
            if (results[k].cost.ic_total < results[best].cost.ic_total) best = k;
        }
        out.best_per_n.push_back(results[best]);
    }
    for (std::size_t i = 1; i < out.best_per_n.size(); ++i) {
        const auto& a = out.best_per_n[i];
        const auto& w = out.best_per_n[out.winner];
        if (std::tie(a.cost.ic_total, a.n) < std::tie(w.cost.ic_total, w.n)) out.winner = i;
    }
    return out;
}

}  // namespace nvmap
