#pragma once

#include <Eigen/Core>

#include "landmatch/profile.hpp"

namespace landmatch {

/// Centered rolling mean with window s (odd). Near the edges the window
/// shrinks symmetrically to min(s, 2·distance-to-edge + 1), so the output has
/// the same length as the input.
Eigen::VectorXd rolling_mean(const Eigen::VectorXd& values, Eigen::Index s);

/// Rolling mean applied twice; the second pass triangle-weights the window.
Eigen::VectorXd double_smooth(const Eigen::VectorXd& values, Eigen::Index s);

/// Shoulder peak and valley positions flanking a land impression, in µm.
struct GrooveBounds {
    double p_left = 0;
    double v_left = 0;
    double v_right = 0;
    double p_right = 0;
    Eigen::Index i_v_left = 0;   // grid index of the left valley
    Eigen::Index i_v_right = 0;  // grid index of the right valley
    Eigen::Index s = 0;          // smoothing factor used
};

/// Locates the shoulder structure on a doubly-smoothed profile: scanning from
/// each edge, the first sample that is the maximum of its full centered
/// window is the shoulder peak, and the first subsequent windowed minimum is
/// the valley where trimming happens.
GrooveBounds find_grooves(const Profile& profile, Eigen::Index s = 35);

/// Restricts the profile to v_left <= y <= v_right.
Profile trim_to_land(const Profile& profile, const GrooveBounds& bounds);

}  // namespace landmatch
