#include "landmatch/pipeline.hpp"

#include "landmatch/error.hpp"
#include "landmatch/grooves.hpp"
#include "landmatch/loess.hpp"

namespace landmatch {

namespace {

std::vector<Extremum> extrema_or_empty(const Signature& sig, Eigen::Index smooth_s) {
    try {
        return find_extrema(sig, smooth_s);
    } catch (const Error& e) {
        if (e.code() == "no-extrema") return {};
        throw;
    }
}

}  // namespace

Signature land_signature(const Surface& surface, double x, const Params& p) {
    const Profile profile = crosscut(surface, x);
    const GrooveBounds bounds = find_grooves(profile, p.groove_smooth);
    const Profile land = trim_to_land(profile, bounds);
    return extract_signature(land, p.loess_span);
}

SignaturePipeline signature_pipeline(const Params& p) {
    return [p](const Profile& profile) {
        const GrooveBounds bounds = find_grooves(profile, p.groove_smooth);
        const Profile land = trim_to_land(profile, bounds);
        return smooth_signature(extract_signature(land, p.loess_span), p.smooth_span);
    };
}

StabilityReport stable_region(const Surface& surface, const Params& p) {
    StabilityOptions opts;
    opts.step = p.stability_step;
    opts.threshold = p.stability_threshold;
    opts.max_lag = p.max_lag;
    opts.min_overlap_frac = p.min_overlap_frac;
    return find_stable_region(surface, signature_pipeline(p), opts);
}

ComparisonResult compare_smoothed(const Signature& a_raw, const Signature& a_smooth,
                                  const Signature& b_raw, const Signature& b_smooth,
                                  const Params& p) {
    ComparisonResult result;
    result.aligned = align_pair(a_smooth, b_smooth, p.max_lag, p.min_overlap_frac);

    // Striae work on the unsmoothed residuals, expressed on a common axis:
    // sample u of b sits at the position of sample u - lag of a's frame.
    Signature b_aligned = b_raw;
    const double origin = a_raw.ys.size() > 0 ? a_raw.ys[0] : 0.0;
    for (Eigen::Index u = 0; u < b_aligned.ys.size(); ++u)
        b_aligned.ys[u] = origin + static_cast<double>(u - result.aligned.lag) * a_raw.increment_y;

    result.extrema_a = extrema_or_empty(a_raw, p.striae_smooth);
    result.extrema_b = extrema_or_empty(b_aligned, p.striae_smooth);
    result.matches = match_striae(result.extrema_a, result.extrema_b);

    result.features = extract_features(result.aligned, result.matches);
    result.features.id_a = a_raw.source_id;
    result.features.id_b = b_raw.source_id;
    return result;
}

ComparisonResult compare_signatures(const Signature& a, const Signature& b, const Params& p) {
    return compare_smoothed(a, smooth_signature(a, p.smooth_span), b,
                            smooth_signature(b, p.smooth_span), p);
}

}  // namespace landmatch
