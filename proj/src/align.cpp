#include "landmatch/align.hpp"

#include <algorithm>
#include <cmath>

#include "landmatch/error.hpp"
#include "landmatch/loess.hpp"

namespace landmatch {

namespace {

// Pearson correlation of a[t] against b[t + lag] over their overlap.
// Returns false when the overlap is shorter than min_n.
bool correlation_at_lag(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int lag,
                        Eigen::Index min_n, double& ccf, Eigen::Index& t0, Eigen::Index& count) {
    const Eigen::Index na = a.size(), nb = b.size();
    t0 = std::max<Eigen::Index>(0, -lag);
    const Eigen::Index t1 = std::min<Eigen::Index>(na, nb - lag);
    count = t1 - t0;
    if (count < min_n || count < 2) return false;

    const double mean_a = a.segment(t0, count).mean();
    const double mean_b = b.segment(t0 + lag, count).mean();
    double saa = 0, sbb = 0, sab = 0;
    for (Eigen::Index t = t0; t < t1; ++t) {
        const double da = a[t] - mean_a;
        const double db = b[t + lag] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    // A flat overlap has no defined correlation; report 0 so flat stretches
    // never win the lag scan.
    ccf = (saa > 0 && sbb > 0) ? sab / std::sqrt(saa * sbb) : 0.0;
    return true;
}

}  // namespace

Signature smooth_signature(const Signature& sig, double span) {
    Signature out = sig;
    out.residuals = loess_fit(sig.ys, sig.residuals, span, 2);
    return out;
}

AlignedPair align_pair(const Signature& a, const Signature& b, int max_lag,
                       double min_overlap_frac) {
    const Eigen::Index na = a.residuals.size(), nb = b.residuals.size();
    if (na == 0 || nb == 0) fail("empty-signature", "cannot align an empty signature");
    const auto min_n = static_cast<Eigen::Index>(
        std::ceil(min_overlap_frac * static_cast<double>(std::min(na, nb))));

    bool found = false;
    int best_lag = 0;
    double best_ccf = 0;
    // Scan in tie-break priority order (|lag| ascending, negative first) and
    // replace only on a strictly better correlation.
    auto consider = [&](int lag) {
        double ccf;
        Eigen::Index t0, count;
        if (!correlation_at_lag(a.residuals, b.residuals, lag, min_n, ccf, t0, count)) return;
        if (!found || ccf > best_ccf) {
            found = true;
            best_ccf = ccf;
            best_lag = lag;
        }
    };
    consider(0);
    for (int m = 1; m <= max_lag; ++m) {
        consider(-m);
        consider(m);
    }
    if (!found) fail("insufficient-overlap", "no admissible lag between " + a.source_id + " and " +
                                                 b.source_id);

    AlignedPair pair;
    pair.lag = best_lag;
    pair.ccf = best_ccf;
    double unused;
    Eigen::Index t0, count;
    correlation_at_lag(a.residuals, b.residuals, best_lag, min_n, unused, t0, count);
    pair.overlap_n = count;
    pair.f = a.residuals.segment(t0, count);
    pair.g = b.residuals.segment(t0 + best_lag, count);
    pair.increment_y = a.increment_y;
    return pair;
}

}  // namespace landmatch
