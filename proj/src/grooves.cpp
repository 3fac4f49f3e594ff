#include "landmatch/grooves.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "landmatch/error.hpp"

namespace landmatch {

namespace {

void check_window(Eigen::Index n, Eigen::Index s) {
    if (s < 1) fail("s-too-large", "smoothing factor must be a positive odd count");
    if (s % 2 == 0) fail("s-even", "smoothing factor must be odd, got " + std::to_string(s));
    if (s > n)
        fail("s-too-large", "smoothing factor " + std::to_string(s) + " exceeds sequence length " +
                                std::to_string(n));
}

// First index in [from, n-1-h] whose value is extremal within its full
// centered window of half-width h. sign = +1 for maxima, -1 for minima.
Eigen::Index first_windowed_extremum(const Eigen::VectorXd& v, Eigen::Index from, Eigen::Index h,
                                     int sign) {
    const Eigen::Index n = v.size();
    for (Eigen::Index i = std::max(from, h); i + h < n; ++i) {
        bool extremal = true;
        for (Eigen::Index j = i - h; j <= i + h; ++j) {
            if (sign * v[j] > sign * v[i]) {
                extremal = false;
                break;
            }
        }
        if (extremal) return i;
    }
    return -1;
}

}  // namespace

Eigen::VectorXd rolling_mean(const Eigen::VectorXd& values, Eigen::Index s) {
    const Eigen::Index n = values.size();
    check_window(n, s);
    Eigen::VectorXd prefix(n + 1);
    prefix[0] = 0;
    for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];

    const Eigen::Index half = s / 2;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index h = std::min({half, i, n - 1 - i});
        out[i] = (prefix[i + h + 1] - prefix[i - h]) / static_cast<double>(2 * h + 1);
    }
    return out;
}

Eigen::VectorXd double_smooth(const Eigen::VectorXd& values, Eigen::Index s) {
    return rolling_mean(rolling_mean(values, s), s);
}

GrooveBounds find_grooves(const Profile& profile, Eigen::Index s) {
    const Eigen::Index n = profile.values.size();
    check_window(n, s);
    if (n <= 2 * s)
        fail("s-too-large", "profile of " + std::to_string(n) +
                                " samples is too short for smoothing factor " + std::to_string(s));

    const Eigen::VectorXd sm = double_smooth(profile.values, s);
    const Eigen::Index h = s / 2;

    const Eigen::Index p_left = first_windowed_extremum(sm, h, h, +1);
    if (p_left < 0) fail("no-peak-found", "no left shoulder peak on " + profile.source_id);
    const Eigen::Index v_left = first_windowed_extremum(sm, p_left + 1, h, -1);
    if (v_left < 0) fail("no-valley-found", "no left valley on " + profile.source_id);

    const Eigen::VectorXd rev = sm.reverse();
    const Eigen::Index p_right_rev = first_windowed_extremum(rev, h, h, +1);
    if (p_right_rev < 0) fail("no-peak-found", "no right shoulder peak on " + profile.source_id);
    const Eigen::Index v_right_rev = first_windowed_extremum(rev, p_right_rev + 1, h, -1);
    if (v_right_rev < 0) fail("no-valley-found", "no right valley on " + profile.source_id);
    const Eigen::Index p_right = n - 1 - p_right_rev;
    const Eigen::Index v_right = n - 1 - v_right_rev;

    if (v_left >= v_right)
        fail("no-valley-found", "left and right valleys cross on " + profile.source_id);

    GrooveBounds bounds;
    bounds.p_left = profile.ys[p_left];
    bounds.v_left = profile.ys[v_left];
    bounds.v_right = profile.ys[v_right];
    bounds.p_right = profile.ys[p_right];
    bounds.i_v_left = v_left;
    bounds.i_v_right = v_right;
    bounds.s = s;
    return bounds;
}

Profile trim_to_land(const Profile& profile, const GrooveBounds& bounds) {
    const Eigen::Index n = profile.values.size();
    Eigen::Index lo = 0;
    while (lo < n && profile.ys[lo] < bounds.v_left) ++lo;
    Eigen::Index hi = n - 1;
    while (hi >= 0 && profile.ys[hi] > bounds.v_right) --hi;
    if (hi - lo + 1 < 2)
        fail("empty-after-trim", "no land samples between valleys on " + profile.source_id);

    Profile out;
    out.x_height = profile.x_height;
    out.increment_y = profile.increment_y;
    out.ys = profile.ys.segment(lo, hi - lo + 1);
    out.values = profile.values.segment(lo, hi - lo + 1);
    out.source_id = profile.source_id;
    return out;
}

}  // namespace landmatch
