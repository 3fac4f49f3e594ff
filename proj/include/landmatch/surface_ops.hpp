#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "landmatch/profile.hpp"
#include "landmatch/x3p.hpp"

namespace landmatch {

/// Profile at the grid row nearest to height x (ties round down). Masked
/// runs touching either end are trimmed; interior masked cells are filled by
/// linear interpolation so downstream rolling windows see a gap-free grid.
Profile crosscut(const Surface& surface, double x);

/// Maps a profile to a signature ready for align_pair (extraction plus
/// alignment smoothing). Throwing Error marks the level as unusable.
using SignaturePipeline = std::function<Signature(const Profile&)>;

struct StabilityReport {
    std::optional<double> chosen_x;  // µm; absent when the scan never stabilized
    std::vector<std::pair<double, double>> ccf_trace;  // (x, ccf to next level); NaN = level unusable
    bool flagged = false;
};

struct StabilityOptions {
    double step = 25.0;        // µm between levels, snapped to the x grid
    double threshold = 0.95;   // ccf required between consecutive levels
    std::optional<double> start;  // default: lowest row with usable samples
    std::optional<double> max_x;  // default: 75% of the surface height
    int max_lag = 120;
    double min_overlap_frac = 0.5;
};

/// Scans upward in steps, returning the smallest x whose signature correlates
/// with the next level's at or above the threshold. Lands that never
/// stabilize come back flagged, mirroring damaged-land quality screening.
StabilityReport find_stable_region(const Surface& surface, const SignaturePipeline& pipeline,
                                   const StabilityOptions& opts = {});

/// Standard deviation of the signature the pipeline extracts at height x.
double sd_of_signature(const Surface& surface, const SignaturePipeline& pipeline, double x);

}  // namespace landmatch
