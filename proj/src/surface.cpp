#include "landmatch/surface_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "landmatch/align.hpp"
#include "landmatch/error.hpp"

namespace landmatch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Index snap_row(const Surface& surface, double x) {
    const double max_x = surface.x_at(surface.meta.size_x - 1);
    if (!(x >= 0) || x > max_x)
        fail("x-out-of-range", "x = " + std::to_string(x) + " µm outside [0, " +
                                   std::to_string(max_x) + "] on " + surface.meta.id);
    // Nearest row, ties toward the lower index.
    const auto idx = static_cast<Eigen::Index>(std::ceil(x / surface.meta.increment_x - 0.5));
    return std::clamp<Eigen::Index>(idx, 0, surface.meta.size_x - 1);
}

}  // namespace

Profile crosscut(const Surface& surface, double x) {
    const Eigen::Index row = snap_row(surface, x);
    const Eigen::Index ny = surface.meta.size_y;

    Eigen::Index lo = 0;
    while (lo < ny && Surface::masked(surface.heights(row, lo))) ++lo;
    Eigen::Index hi = ny - 1;
    while (hi >= 0 && Surface::masked(surface.heights(row, hi))) --hi;
    if (lo > hi) fail("row-entirely-masked", "row at x = " + std::to_string(surface.x_at(row)) +
                                                 " µm of " + surface.meta.id + " has no valid samples");

    const Eigen::Index n = hi - lo + 1;
    Profile profile;
    profile.x_height = surface.x_at(row);
    profile.increment_y = surface.meta.increment_y;
    profile.ys.resize(n);
    profile.values.resize(n);
    profile.source_id = surface.meta.id;

    for (Eigen::Index j = 0; j < n; ++j) {
        profile.ys[j] = surface.y_at(lo + j);
        profile.values[j] = surface.heights(row, lo + j);
    }
    // Interior dropouts: linear interpolation between the nearest valid
    // neighbours (both exist because the ends were trimmed).
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isnan(profile.values[j])) continue;
        Eigen::Index left = j - 1;
        Eigen::Index right = j + 1;
        while (std::isnan(profile.values[right])) ++right;
        const double t = static_cast<double>(j - left) / static_cast<double>(right - left);
        const double filled = profile.values[left] + t * (profile.values[right] - profile.values[left]);
        profile.values[j] = filled;
    }
    return profile;
}

StabilityReport find_stable_region(const Surface& surface, const SignaturePipeline& pipeline,
                                   const StabilityOptions& opts) {
    const double inc_x = surface.meta.increment_x;
    const double top = surface.x_at(surface.meta.size_x - 1);

    double step = std::max(1.0, std::round(opts.step / inc_x)) * inc_x;
    double start = opts.start.value_or(0.0);
    double max_x = opts.max_x.value_or(0.75 * top);
    max_x = std::min(max_x, top);

    std::vector<double> levels;
    for (double x = start; x <= max_x + 1e-9; x += step) levels.push_back(x);
    if (levels.size() < 2)
        fail("surface-too-short", "fewer than two stability levels on " + surface.meta.id);

    // One signature per level, extracted lazily; failures mark the level bad.
    std::vector<std::optional<Signature>> cache(levels.size());
    std::vector<bool> attempted(levels.size(), false);
    auto signature_at = [&](std::size_t k) -> const std::optional<Signature>& {
        if (!attempted[k]) {
            attempted[k] = true;
            try {
                cache[k] = pipeline(crosscut(surface, levels[k]));
            } catch (const Error&) {
                cache[k] = std::nullopt;
            }
        }
        return cache[k];
    };

    StabilityReport report;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        double ccf = kNaN;
        const auto& a = signature_at(k);
        const auto& b = signature_at(k + 1);
        if (a && b) {
            try {
                ccf = align_pair(*a, *b, opts.max_lag, opts.min_overlap_frac).ccf;
            } catch (const Error&) {
            }
        }
        report.ccf_trace.emplace_back(levels[k], ccf);
        if (!std::isnan(ccf) && ccf >= opts.threshold) {
            report.chosen_x = levels[k];
            break;
        }
    }
    report.flagged = !report.chosen_x.has_value();
    return report;
}

double sd_of_signature(const Surface& surface, const SignaturePipeline& pipeline, double x) {
    const Signature sig = pipeline(crosscut(surface, x));
    const Eigen::Index n = sig.residuals.size();
    if (n < 2) fail("too-short", "signature too short for a standard deviation");
    const double mean = sig.residuals.mean();
    return std::sqrt((sig.residuals.array() - mean).square().sum() / static_cast<double>(n - 1));
}

}  // namespace landmatch
