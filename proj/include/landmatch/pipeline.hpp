#pragma once

#include <cstdint>
#include <vector>

#include "landmatch/align.hpp"
#include "landmatch/features.hpp"
#include "landmatch/profile.hpp"
#include "landmatch/striae.hpp"
#include "landmatch/surface_ops.hpp"
#include "landmatch/x3p.hpp"

namespace landmatch {

/// Every tunable of the land-to-land comparison pipeline, with defaults.
struct Params {
    Eigen::Index groove_smooth = 35;   // samples, odd; shoulder location
    Eigen::Index striae_smooth = 25;   // samples, odd; extremum detection
    double loess_span = 0.75;          // curvature removal
    double smooth_span = 0.03;         // signature smoothing ahead of alignment
    double stability_step = 25.0;      // µm between stability levels
    double stability_threshold = 0.95; // ccf required between levels
    int max_lag = 120;                 // samples searched either side
    double min_overlap_frac = 0.5;
    double cutoff = 0.5;               // match probability threshold
    int min_lands = 2;                 // lands above cutoff for a bullet match
    int n_trees = 300;
    int mtry = 2;
    int min_leaf = 7;
    int max_depth = 30;
    std::uint64_t seed = 0;
};

/// crosscut -> shoulder trim -> loess detrend; the unsmoothed signature.
Signature land_signature(const Surface& surface, double x, const Params& p = {});

/// The pipeline closure find_stable_region expects: extraction plus
/// alignment smoothing.
SignaturePipeline signature_pipeline(const Params& p = {});

/// Stability scan with this parameter set.
StabilityReport stable_region(const Surface& surface, const Params& p = {});

struct ComparisonResult {
    AlignedPair aligned;
    std::vector<Extremum> extrema_a, extrema_b;  // on the aligned common axis
    std::vector<StriaMatch> matches;
    FeatureVector features;
};

/// Full signature-pair comparison: smooth, align, detect and match striae,
/// extract the seven features. Inputs are unsmoothed signatures.
ComparisonResult compare_signatures(const Signature& a, const Signature& b, const Params& p = {});

/// Same, with alignment smoothing already applied by the caller (batch runs
/// smooth each signature once and reuse it across pairs).
ComparisonResult compare_smoothed(const Signature& a_raw, const Signature& a_smooth,
                                  const Signature& b_raw, const Signature& b_smooth,
                                  const Params& p = {});

}  // namespace landmatch
