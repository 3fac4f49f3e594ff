#pragma once

#include <Eigen/Core>
#include <string>

namespace landmatch {

/// Crosscut of a surface at a fixed height x: heights over the circumference
/// direction y. Gap-free on a constant grid (masked cells are interpolated or
/// trimmed before a Profile is built).
struct Profile {
    double x_height = 0;     // µm, snapped to the surface grid
    double increment_y = 0;  // µm between samples
    Eigen::VectorXd ys;      // µm positions, strictly increasing
    Eigen::VectorXd values;  // µm heights, all finite
    std::string source_id;
};

/// Residuals of a trend fit to a trimmed profile: the land's
/// individual-characteristic trace.
struct Signature {
    double x_height = 0;
    double increment_y = 0;
    Eigen::VectorXd ys;
    Eigen::VectorXd residuals;  // µm
    std::string source_id;
};

}  // namespace landmatch
