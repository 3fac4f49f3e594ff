#include <doctest.h>

#include <cmath>

#include "landmatch/error.hpp"
#include "landmatch/grooves.hpp"
#include "landmatch/rng.hpp"
#include "oracles.hpp"

namespace lm = landmatch;

namespace {

lm::Profile profile_of(const Eigen::VectorXd& values, double inc = 1.0) {
    lm::Profile p;
    p.increment_y = inc;
    p.ys = Eigen::VectorXd::LinSpaced(values.size(), 0.0, inc * static_cast<double>(values.size() - 1));
    p.values = values;
    p.source_id = "test";
    return p;
}

// Raised shoulder ridges just outside the valleys plus a gentle central
// arc, the land shape the groove finder is built for.
Eigen::VectorXd shoulder_profile(int n, int valley_left, int valley_right, double depth) {
    Eigen::VectorXd v(n);
    const double center = 0.5 * (valley_left + valley_right);
    const double half = 0.5 * (valley_right - valley_left);
    const double ridge_l = valley_left - 45.0;
    const double ridge_r = valley_right + 45.0;
    for (int i = 0; i < n; ++i) {
        const double arc = depth * std::max(0.0, 1.0 - std::pow((i - center) / half, 2));
        const double ridges = 30.0 * (std::exp(-std::pow((i - ridge_l) / 18.0, 2)) +
                                      std::exp(-std::pow((i - ridge_r) / 18.0, 2)));
        v[i] = arc + ridges;
    }
    return v;
}

}  // namespace

TEST_CASE("rolling mean keeps constants") {
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(40, 3.25);
    CHECK((lm::rolling_mean(v, 7) - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rolling mean keeps a linear ramp at interior points") {
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(50, 0.0, 49.0);
    const Eigen::VectorXd out = lm::rolling_mean(v, 5);
    for (int i = 2; i < 48; ++i) CHECK(out[i] == doctest::Approx(v[i]).epsilon(1e-12));
}

TEST_CASE("rolling mean matches the brute-force oracle") {
    lm::Xoshiro256 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 10 + static_cast<int>(rng.below(60));
        const auto s = static_cast<Eigen::Index>(1 + 2 * rng.below(6));
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.uniform() * 10.0 - 5.0;
        const Eigen::VectorXd mine = lm::rolling_mean(v, s);
        const Eigen::VectorXd ref = oracle::rolling_mean(v, s);
        CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("double smoothing matches the brute-force oracle") {
    lm::Xoshiro256 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 12 + static_cast<int>(rng.below(80));
        const auto s = static_cast<Eigen::Index>(1 + 2 * rng.below(6));
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.uniform() * 4.0 - 2.0;
        const Eigen::VectorXd mine = lm::double_smooth(v, s);
        const Eigen::VectorXd ref = oracle::double_smooth(v, s);
        CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("even smoothing windows are rejected") {
    const Eigen::VectorXd v = Eigen::VectorXd::Zero(30);
    CHECK_THROWS_AS((void)lm::rolling_mean(v, 6), lm::Error);
    CHECK_THROWS_AS((void)lm::find_grooves(profile_of(v), 4), lm::Error);
}

TEST_CASE("grooves are found near the constructed valleys") {
    const int n = 600;
    const int valley_left = 90, valley_right = 510;
    const Eigen::Index s = 35;
    const lm::Profile p = profile_of(shoulder_profile(n, valley_left, valley_right, 4.0));
    const lm::GrooveBounds b = lm::find_grooves(p, s);

    CHECK(b.p_left <= b.v_left);
    CHECK(b.v_left < b.v_right);
    CHECK(b.v_right <= b.p_right);
    CHECK(std::abs(b.i_v_left - valley_left) <= s / 2);
    CHECK(std::abs(b.i_v_right - valley_right) <= s / 2);

    // independent check: the valleys sit at windowed minima of the
    // doubly-smoothed profile
    const Eigen::VectorXd sm = oracle::double_smooth(p.values, s);
    const Eigen::Index h = s / 2;
    for (const Eigen::Index idx : {b.i_v_left, b.i_v_right}) {
        for (Eigen::Index j = std::max<Eigen::Index>(0, idx - h);
             j <= std::min<Eigen::Index>(n - 1, idx + h); ++j)
            CHECK(sm[idx] <= sm[j] + 1e-12);
    }
}

TEST_CASE("monotone profiles have no shoulder peak") {
    const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(200, 0.0, 10.0);
    CHECK_THROWS_AS((void)lm::find_grooves(profile_of(ramp), 35), lm::Error);
}

TEST_CASE("trimming keeps the inclusive valley-to-valley segment") {
    const lm::Profile p = profile_of(shoulder_profile(600, 90, 510, 4.0));
    const lm::GrooveBounds b = lm::find_grooves(p, 35);
    const lm::Profile land = lm::trim_to_land(p, b);
    CHECK(land.ys.size() == b.i_v_right - b.i_v_left + 1);
    CHECK(land.ys[0] == doctest::Approx(b.v_left));
    CHECK(land.ys[land.ys.size() - 1] == doctest::Approx(b.v_right));
    CHECK(land.values[0] == p.values[b.i_v_left]);
}

TEST_CASE("degenerate trim bounds are rejected") {
    const lm::Profile p = profile_of(shoulder_profile(600, 90, 510, 4.0));
    lm::GrooveBounds b = lm::find_grooves(p, 35);
    b.i_v_right = b.i_v_left;
    b.v_right = b.v_left;
    CHECK_THROWS_AS((void)lm::trim_to_land(p, b), lm::Error);
}

TEST_CASE("whole-profile bounds trim to the identity") {
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(50, 1.0, 5.0);
    const lm::Profile p = profile_of(v);
    lm::GrooveBounds b;
    b.i_v_left = 0;
    b.i_v_right = 49;
    b.v_left = p.ys[0];
    b.v_right = p.ys[49];
    const lm::Profile out = lm::trim_to_land(p, b);
    CHECK(out.ys.size() == 50);
    CHECK((out.values - v).cwiseAbs().maxCoeff() == 0.0);
}
