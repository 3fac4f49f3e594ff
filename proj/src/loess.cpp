#include "landmatch/loess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "landmatch/error.hpp"

namespace landmatch {

namespace {

double tricube(double d) {
    if (d >= 1.0) return 0.0;
    const double t = 1.0 - d * d * d;
    return t * t * t;
}

}  // namespace

Eigen::VectorXd loess_fit(const Eigen::VectorXd& ys, const Eigen::VectorXd& values, double span,
                          int degree) {
    const Eigen::Index n = ys.size();
    if (values.size() != n) fail("window-rank-deficient", "ys/values length mismatch");
    if (!(span > 0.0) || span > 1.0) fail("window-rank-deficient", "span must be in (0, 1]");
    if (degree < 0 || degree > 2) fail("window-rank-deficient", "degree must be 0, 1 or 2");

    const auto k = static_cast<Eigen::Index>(std::ceil(span * static_cast<double>(n)));
    if (k < degree + 2)
        fail("window-rank-deficient", "span window of " + std::to_string(k) +
                                          " points cannot support degree " + std::to_string(degree));

    const int p = degree + 1;
    Eigen::VectorXd fitted(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // k nearest neighbours by two-sided expansion; ties take the lower index.
        Eigen::Index lo = i, hi = i;
        while (hi - lo + 1 < k) {
            const bool can_lo = lo > 0;
            const bool can_hi = hi < n - 1;
            if (can_lo && can_hi) {
                if (ys[i] - ys[lo - 1] <= ys[hi + 1] - ys[i])
                    --lo;
                else
                    ++hi;
            } else if (can_lo) {
                --lo;
            } else {
                ++hi;
            }
        }

        const double dmax = std::max(ys[i] - ys[lo], ys[hi] - ys[i]);
        if (!(dmax > 0)) fail("window-rank-deficient", "all window points coincide in y");

        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atv = Eigen::Vector3d::Zero();
        for (Eigen::Index j = lo; j <= hi; ++j) {
            const double u = (ys[j] - ys[i]) / dmax;  // scaled offset, |u| <= 1
            const double w = tricube(std::abs(u));
            if (w == 0.0) continue;
            Eigen::Vector3d row(1.0, u, u * u);
            ata.topLeftCorner(p, p) += w * row.head(p) * row.head(p).transpose();
            atv.head(p) += w * values[j] * row.head(p);
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(ata.topLeftCorner(p, p));
        lu.setThreshold(1e-12);
        if (lu.rank() < p) fail("window-rank-deficient", "local fit is rank deficient");
        fitted[i] = lu.solve(atv.head(p))[0];
    }
    return fitted;
}

Signature extract_signature(const Profile& profile, double span) {
    Signature sig;
    sig.x_height = profile.x_height;
    sig.increment_y = profile.increment_y;
    sig.ys = profile.ys;
    sig.residuals = profile.values - loess_fit(profile.ys, profile.values, span, 2);
    sig.source_id = profile.source_id;
    return sig;
}

CircleFit fit_circle(const Eigen::VectorXd& ys, const Eigen::VectorXd& values) {
    const Eigen::Index n = ys.size();
    if (values.size() != n) fail("collinear-points", "ys/values length mismatch");
    if (n < 3) fail("collinear-points", "need at least 3 points for a circle");

    const double mx = ys.mean();
    const double my = values.mean();
    const Eigen::VectorXd x = ys.array() - mx;
    const Eigen::VectorXd y = values.array() - my;

    const double s_xx = x.squaredNorm();
    const double s_yy = y.squaredNorm();
    const double s_xy = x.dot(y);
    const double c1 = (x.array().cube() + x.array() * y.array().square()).sum();
    const double c2 = (x.array().square() * y.array() + y.array().cube()).sum();

    const double det = s_xx * s_yy - s_xy * s_xy;
    if (!(det > 1e-12 * (s_xx + s_yy) * (s_xx + s_yy)))
        fail("collinear-points", "points are collinear within tolerance");

    const double a = (c1 * s_yy - c2 * s_xy) / (2.0 * det);
    const double b = (c2 * s_xx - c1 * s_xy) / (2.0 * det);
    const double nd = static_cast<double>(n);
    const double r2 = s_xx / nd + s_yy / nd + a * a + b * b;

    CircleFit fit;
    fit.a = a + mx;
    fit.b = b + my;
    fit.r = std::sqrt(r2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = std::hypot(x[i] - a, y[i] - b) - fit.r;
        fit.rss += d * d;
    }
    return fit;
}

Signature extract_signature_circle(const Profile& profile) {
    const CircleFit fit = fit_circle(profile.ys, profile.values);
    const bool upper = profile.values.mean() >= fit.b;

    Signature sig;
    sig.x_height = profile.x_height;
    sig.increment_y = profile.increment_y;
    sig.ys = profile.ys;
    sig.residuals.resize(profile.values.size());
    for (Eigen::Index i = 0; i < profile.values.size(); ++i) {
        const double dy = profile.ys[i] - fit.a;
        const double arg = std::max(0.0, fit.r * fit.r - dy * dy);
        const double trend = upper ? fit.b + std::sqrt(arg) : fit.b - std::sqrt(arg);
        sig.residuals[i] = profile.values[i] - trend;
    }
    sig.source_id = profile.source_id;
    return sig;
}

}  // namespace landmatch
