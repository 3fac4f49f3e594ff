#pragma once

#include <Eigen/Core>

#include "landmatch/profile.hpp"

namespace landmatch {

/// Locally weighted polynomial regression (tricubic weights, k-nearest
/// window with k = ceil(span * n)), evaluated at every grid point.
Eigen::VectorXd loess_fit(const Eigen::VectorXd& ys, const Eigen::VectorXd& values,
                          double span = 0.75, int degree = 2);

/// Signature of a trimmed profile: residuals after removing the loess trend.
Signature extract_signature(const Profile& profile, double span = 0.75);

/// Least-squares circle through (ys[i], values[i]) points, closed form.
struct CircleFit {
    double a = 0;    // center, first coordinate (µm)
    double b = 0;    // center, second coordinate (µm)
    double r = 0;    // radius (µm)
    double rss = 0;  // sum of squared radial residuals
};

CircleFit fit_circle(const Eigen::VectorXd& ys, const Eigen::VectorXd& values);

/// Signature via circle detrending instead of loess (diagnostic path).
Signature extract_signature_circle(const Profile& profile);

}  // namespace landmatch
