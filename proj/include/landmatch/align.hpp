#pragma once

#include <Eigen/Core>

#include "landmatch/profile.hpp"

namespace landmatch {

/// Small-span loess smoothing of a signature's residuals ahead of alignment.
Signature smooth_signature(const Signature& sig, double span = 0.03);

/// Two signatures on a common grid after lag alignment. lag is the offset of
/// the second signature relative to the first: b[t + lag] pairs a[t], so a
/// positive lag means the second signature sits shifted right. f and g hold
/// the paired samples over the overlap.
struct AlignedPair {
    int lag = 0;
    double ccf = 0;             // Pearson correlation over the overlap
    Eigen::Index overlap_n = 0;
    Eigen::VectorXd f;          // first-signature samples on the overlap
    Eigen::VectorXd g;          // second-signature samples on the overlap
    double increment_y = 0;
};

/// Exhaustive integer-lag scan maximizing the Pearson correlation over the
/// overlap, requiring overlap >= min_overlap_frac * min(len a, len b). Ties
/// prefer smaller |lag|, then the negative one.
AlignedPair align_pair(const Signature& a, const Signature& b, int max_lag = 120,
                       double min_overlap_frac = 0.5);

}  // namespace landmatch
