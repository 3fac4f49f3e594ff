#pragma once

#include <Eigen/Core>
#include <vector>

#include "landmatch/profile.hpp"

namespace landmatch {

enum class ExtremumKind { peak, valley };

/// A peak or valley of a signature, with the interval it claims: one third
/// of the gap toward each neighbouring extremum (or toward the signature end
/// for the outermost ones).
struct Extremum {
    ExtremumKind kind = ExtremumKind::peak;
    double location = 0;  // µm
    double height = 0;    // signed residual at the extremum, µm, unsmoothed
    double lo = 0;        // interval start, µm
    double hi = 0;        // interval end, µm
};

/// Extrema of the rolling-mean-smoothed residuals. Heights are read from the
/// unsmoothed residuals at the detected locations, since the matched-striae
/// depth sum must reflect physical depths.
std::vector<Extremum> find_extrema(const Signature& sig, Eigen::Index smooth_s = 25);

enum class MatchKind { peak, valley, mixed };

/// A maximal group of overlapping extremum intervals across a signature pair.
struct StriaMatch {
    double lo = 0;         // joint interval, µm
    double hi = 0;
    MatchKind kind = MatchKind::mixed;
    bool matched = false;  // exactly one extremum per signature, same kind
    std::vector<std::pair<int, Extremum>> members;  // (signature index 0/1, extremum)
};

/// Sweeps both interval lists together, merging overlapping-interval
/// components into joint intervals, sorted by position.
std::vector<StriaMatch> match_striae(const std::vector<Extremum>& ea,
                                     const std::vector<Extremum>& eb);

}  // namespace landmatch
