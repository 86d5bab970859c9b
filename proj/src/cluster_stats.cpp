#include "nvmap/cluster_stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvmap/errors.hpp"

namespace nvmap {

double chi_square_statistic(const std::vector<double>& phis, int bins) {
    if (bins < 2) throw DomainError("chi_square_azimuth: need >= 2 bins");
    if (phis.size() < static_cast<std::size_t>(bins)) throw DomainError("chi_square_azimuth: fewer samples than bins");
    std::vector<int> counts(bins, 0);
    for (double p : phis) {
        const double w = wrap_two_pi(p);
        int b = static_cast<int>(std::floor(w / kTwoPi * bins));
        counts[std::clamp(b, 0, bins - 1)]++;
    }
    const double e = static_cast<double>(phis.size()) / bins;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    return chi2;
}

double chi_square_azimuth(const std::vector<double>& phis, int bins) {
    const double chi2 = chi_square_statistic(phis, bins);
    if (chi2 == 0.0) return 1.0;
    boost::math::chi_squared dist(bins - 1);
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

VolumeClassCounts classify_uncertainty_volumes(const std::vector<double>& dv, double v_atom) {
    VolumeClassCounts c;
    for (double v : dv) {
        if (!(v >= 0.0)) throw DomainError("classify_uncertainty_volumes: negative or NaN volume");
        (v < v_atom ? c.below : c.at_or_above)++;
    }
    return c;
}

VolumeClassCounts classify_uncertainty_volumes(const BootstrapResult& result, double v_atom) {
    std::vector<double> dv;
    for (const auto& p : result.positions) dv.push_back(p.dv);
    return classify_uncertainty_volumes(dv, v_atom);
}

ClosestPairReport closest_pair_report(const std::vector<Position>& positions, bool use_inversion) {
    const std::size_t n = positions.size();
    if (n < 2) throw DomainError("closest_pair_report: need >= 2 positions");
    std::vector<Eigen::Vector3d> x;
    for (const auto& p : positions) x.push_back(p.cartesian());
    ClosestPairReport rep;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Vector3d partner = x[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (x[i] - x[j]).norm();
            if (d < best) { best = d; partner = x[j]; }
            if (use_inversion) {
                const double dm = (x[i] + x[j]).norm();
                if (dm < best) { best = dm; partner = -x[j]; }
            }
        }
        rep.nearest.push_back(best);
        rep.coupling_hz.push_back(best > 0.0 ? nuclear_pair_coupling(x[i], partner)
                                             : std::numeric_limits<double>::infinity());
    }
    long double sd = 0.0L, sg = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        sd += rep.nearest[i];
        sg += rep.coupling_hz[i];
    }
    rep.mean_distance = static_cast<double>(sd / n);
    rep.mean_coupling_hz = static_cast<double>(sg / n);
    return rep;
}

}  // namespace nvmap
