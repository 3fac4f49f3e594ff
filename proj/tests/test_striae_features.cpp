#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "landmatch/error.hpp"
#include "landmatch/features.hpp"
#include "landmatch/rng.hpp"
#include "landmatch/striae.hpp"
#include "oracles.hpp"

namespace lm = landmatch;

namespace {

lm::Signature signature_of(const Eigen::VectorXd& residuals, double inc = 1.5625) {
    lm::Signature sig;
    sig.increment_y = inc;
    sig.ys = Eigen::VectorXd::LinSpaced(residuals.size(), 0.0,
                                        inc * static_cast<double>(residuals.size() - 1));
    sig.residuals = residuals;
    sig.source_id = "test";
    return sig;
}

lm::Extremum extremum(double lo, double hi, lm::ExtremumKind kind, double height = 1.0) {
    lm::Extremum e;
    e.kind = kind;
    e.location = 0.5 * (lo + hi);
    e.height = height;
    e.lo = lo;
    e.hi = hi;
    return e;
}

// Canonical form of a component list for comparing against the oracle.
std::vector<std::vector<std::tuple<int, double, double>>> canonical(
    const std::vector<lm::StriaMatch>& matches) {
    std::vector<std::vector<std::tuple<int, double, double>>> out;
    for (const lm::StriaMatch& m : matches) {
        std::vector<std::tuple<int, double, double>> members;
        for (const auto& [source, e] : m.members) members.emplace_back(source, e.lo, e.hi);
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("sinusoid extrema sit at the analytic turning points") {
    const int n = 1280;
    const double inc = 1.5625;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::sin(2.0 * M_PI * (inc * i) / 300.0);
    const auto extrema = lm::find_extrema(signature_of(v, inc), 25);

    CHECK(extrema.size() == 13);
    for (std::size_t j = 0; j < extrema.size(); ++j) {
        const double expected = 75.0 + 150.0 * static_cast<double>(j);
        CHECK(std::abs(extrema[j].location - expected) <= 12.0 * inc + 1e-9);
        CHECK((extrema[j].kind == lm::ExtremumKind::peak) == (j % 2 == 0));
        if (j > 0) CHECK(extrema[j].lo > extrema[j - 1].hi);  // thirds leave gaps
        CHECK(extrema[j].lo <= extrema[j].location);
        CHECK(extrema[j].location <= extrema[j].hi);
    }
}

TEST_CASE("monotone signatures have no extrema") {
    const Eigen::VectorXd ramp = Eigen::VectorXd::LinSpaced(200, 0.0, 5.0);
    CHECK_THROWS_AS((void)lm::find_extrema(signature_of(ramp), 25), lm::Error);
}

TEST_CASE("short signatures are rejected") {
    const Eigen::VectorXd v = Eigen::VectorXd::Zero(40);
    CHECK_THROWS_AS((void)lm::find_extrema(signature_of(v), 25), lm::Error);
}

TEST_CASE("plateaus give one extremum at the centre") {
    Eigen::VectorXd v(9);
    v << 0, 1, 2, 3, 3, 3, 2, 1, 0;
    const auto extrema = lm::find_extrema(signature_of(v, 1.0), 1);
    REQUIRE(extrema.size() == 1);
    CHECK(extrema[0].kind == lm::ExtremumKind::peak);
    CHECK(extrema[0].location == doctest::Approx(4.0));
    CHECK(extrema[0].height == 3.0);
}

TEST_CASE("heights come from the unsmoothed residuals") {
    const int n = 400;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = 2.0 * std::sin(2.0 * M_PI * i / 100.0);
    lm::Signature sig = signature_of(v, 1.0);
    sig.residuals[75] = 5.0;  // spike at the second peak's location
    const auto extrema = lm::find_extrema(sig, 5);
    bool found = false;
    for (const lm::Extremum& e : extrema)
        if (e.location == 75.0) {
            found = true;
            CHECK(e.height == 5.0);
        }
    CHECK(found);
}

TEST_CASE("more smoothing finds fewer extrema") {
    lm::Xoshiro256 rng(53);
    const int n = 1200;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = std::sin(2.0 * M_PI * i / 160.0) + 0.6 * rng.normal();
    const lm::Signature sig = signature_of(v);
    const auto n5 = lm::find_extrema(sig, 5).size();
    const auto n25 = lm::find_extrema(sig, 25).size();
    const auto n45 = lm::find_extrema(sig, 45).size();
    CHECK(n5 > n25);
    CHECK(n25 >= n45);
}

TEST_CASE("identical extrema lists match completely") {
    std::vector<lm::Extremum> ea = {extremum(0, 10, lm::ExtremumKind::peak),
                                    extremum(20, 30, lm::ExtremumKind::valley),
                                    extremum(40, 50, lm::ExtremumKind::peak)};
    const auto matches = lm::match_striae(ea, ea);
    REQUIRE(matches.size() == 3);
    for (const lm::StriaMatch& m : matches) {
        CHECK(m.matched);
        CHECK(m.members.size() == 2);
    }
    const lm::RunCounts runs = lm::feature_runs(matches);
    CHECK(runs.n_matches == 3);
    CHECK(runs.n_nonmatches == 0);
    CHECK(runs.cms == 3);
}

TEST_CASE("kind disagreement blocks a match") {
    std::vector<lm::Extremum> ea = {extremum(0, 10, lm::ExtremumKind::peak),
                                    extremum(20, 30, lm::ExtremumKind::peak)};
    std::vector<lm::Extremum> eb = {extremum(1, 9, lm::ExtremumKind::valley),
                                    extremum(21, 29, lm::ExtremumKind::valley)};
    const auto matches = lm::match_striae(ea, eb);
    REQUIRE(matches.size() == 2);
    for (const lm::StriaMatch& m : matches) {
        CHECK_FALSE(m.matched);
        CHECK(m.kind == lm::MatchKind::mixed);
    }
}

TEST_CASE("hand-built six-extremum case gives one match and two non-matches") {
    std::vector<lm::Extremum> ea = {extremum(0, 10, lm::ExtremumKind::peak),
                                    extremum(30, 40, lm::ExtremumKind::peak),
                                    extremum(60, 70, lm::ExtremumKind::valley)};
    std::vector<lm::Extremum> eb = {extremum(5, 15, lm::ExtremumKind::peak),
                                    extremum(35, 45, lm::ExtremumKind::valley),
                                    extremum(90, 100, lm::ExtremumKind::peak)};
    const auto matches = lm::match_striae(ea, eb);
    REQUIRE(matches.size() == 4);
    int matched = 0;
    for (const lm::StriaMatch& m : matches) matched += m.matched ? 1 : 0;
    CHECK(matched == 1);
    CHECK(matches[0].matched);          // peak/peak overlap at [0,15]
    CHECK_FALSE(matches[1].matched);    // peak/valley overlap at [30,45]
    CHECK_FALSE(matches[2].matched);    // isolated valley
    CHECK_FALSE(matches[3].matched);    // isolated peak
}

TEST_CASE("striae matching agrees with the transitive-closure oracle") {
    lm::Xoshiro256 rng(54);
    for (int trial = 0; trial < 100; ++trial) {
        const int na = 1 + static_cast<int>(rng.below(8));
        const int nb = 1 + static_cast<int>(rng.below(8));
        std::vector<lm::Extremum> ea, eb;
        std::vector<oracle::Interval> items;
        auto add = [&](int count, int source, std::vector<lm::Extremum>& list) {
            double cursor = 0;
            for (int i = 0; i < count; ++i) {
                cursor += rng.uniform() * 20.0;
                const double lo = cursor;
                const double hi = lo + 1.0 + rng.uniform() * 15.0;
                const auto kind =
                    rng.below(2) == 0 ? lm::ExtremumKind::peak : lm::ExtremumKind::valley;
                list.push_back(extremum(lo, hi, kind));
                items.push_back({lo, hi, source, kind});
                cursor = hi * (0.3 + 0.7 * rng.uniform());  // allow in-list overlap
            }
        };
        add(na, 0, ea);
        add(nb, 1, eb);

        const auto matches = lm::match_striae(ea, eb);
        const auto components = oracle::interval_components(items);
        REQUIRE(matches.size() == components.size());

        std::vector<std::vector<std::tuple<int, double, double>>> ref;
        std::vector<bool> ref_matched;
        for (const auto& members : components) {
            std::vector<std::tuple<int, double, double>> c;
            for (int m : members)
                c.emplace_back(items[static_cast<std::size_t>(m)].source,
                               items[static_cast<std::size_t>(m)].lo,
                               items[static_cast<std::size_t>(m)].hi);
            std::sort(c.begin(), c.end());
            ref.push_back(std::move(c));
        }
        std::sort(ref.begin(), ref.end());
        CHECK(canonical(matches) == ref);

        int matched_mine = 0, matched_ref = 0;
        for (const lm::StriaMatch& m : matches) matched_mine += m.matched ? 1 : 0;
        for (const auto& members : components)
            matched_ref += oracle::component_matched(items, members) ? 1 : 0;
        CHECK(matched_mine == matched_ref);
    }
}

TEST_CASE("run statistics match the direct-count oracle") {
    lm::Xoshiro256 rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(rng.below(30));
        std::vector<lm::StriaMatch> matches(static_cast<std::size_t>(n));
        std::vector<bool> flags(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            matches[static_cast<std::size_t>(i)].matched = rng.below(2) == 1;
            flags[static_cast<std::size_t>(i)] = matches[static_cast<std::size_t>(i)].matched;
        }
        const lm::RunCounts mine = lm::feature_runs(matches);
        const oracle::Runs ref = oracle::count_runs(flags);
        CHECK(mine.cms == ref.cms);
        CHECK(mine.cnms == ref.cnms);
        CHECK(mine.n_matches == ref.n_matches);
        CHECK(mine.n_nonmatches == ref.n_nonmatches);
    }
}

TEST_CASE("run sequence M M M N M M counts as expected") {
    std::vector<lm::StriaMatch> matches(6);
    for (std::size_t i = 0; i < 6; ++i) matches[i].matched = i != 3;
    const lm::RunCounts runs = lm::feature_runs(matches);
    CHECK(runs.cms == 3);
    CHECK(runs.cnms == 1);
    CHECK(runs.n_matches == 5);
    CHECK(runs.n_nonmatches == 1);
}

TEST_CASE("fifteen straight matches give cms fifteen") {
    std::vector<lm::StriaMatch> matches(15);
    for (auto& m : matches) m.matched = true;
    CHECK(lm::feature_runs(matches).cms == 15);
}

TEST_CASE("empty match lists count zero everywhere") {
    const lm::RunCounts runs = lm::feature_runs({});
    CHECK(runs.cms == 0);
    CHECK(runs.cnms == 0);
    CHECK(runs.n_matches == 0);
    CHECK(runs.n_nonmatches == 0);
}

TEST_CASE("depth sum S averages member heights of matched striae") {
    CHECK(lm::feature_S({}) == 0.0);

    std::vector<lm::Extremum> ea = {extremum(0, 10, lm::ExtremumKind::peak, 2.0)};
    std::vector<lm::Extremum> eb = {extremum(2, 8, lm::ExtremumKind::peak, -4.0)};
    auto matches = lm::match_striae(ea, eb);
    CHECK(lm::feature_S(matches) == doctest::Approx(3.0));

    ea = {extremum(0, 10, lm::ExtremumKind::peak, 1.0),
          extremum(20, 30, lm::ExtremumKind::valley, 2.0),
          extremum(40, 50, lm::ExtremumKind::peak, 0.0)};
    eb = {extremum(1, 9, lm::ExtremumKind::peak, 1.0),
          extremum(21, 29, lm::ExtremumKind::valley, 4.0),
          extremum(41, 49, lm::ExtremumKind::peak, 0.0)};
    matches = lm::match_striae(ea, eb);
    CHECK(lm::feature_S(matches) == doctest::Approx(4.0));
}

TEST_CASE("vertical distance D is the aligned RMS difference") {
    lm::AlignedPair pair;
    pair.overlap_n = 4;
    pair.f = Eigen::VectorXd::Zero(4);
    pair.g = Eigen::VectorXd::Zero(4);
    CHECK(lm::feature_D(pair) == 0.0);

    pair.g = Eigen::VectorXd::Constant(4, 3.0);
    CHECK(lm::feature_D(pair) == doctest::Approx(3.0));

    lm::Xoshiro256 rng(56);
    Eigen::VectorXd f(10), g(10);
    for (int i = 0; i < 10; ++i) {
        f[i] = rng.normal();
        g[i] = rng.normal();
    }
    pair.overlap_n = 10;
    pair.f = f;
    pair.g = g;
    double sum = 0;
    for (int i = 0; i < 10; ++i) sum += (f[i] - g[i]) * (f[i] - g[i]);
    CHECK(lm::feature_D(pair) == doctest::Approx(std::sqrt(sum / 10.0)).epsilon(1e-12));

    pair.overlap_n = 0;
    CHECK_THROWS_AS((void)lm::feature_D(pair), lm::Error);
}

TEST_CASE("feature vector order is frozen") {
    REQUIRE(lm::kFeatureNames.size() == 7);
    CHECK(std::string(lm::kFeatureNames[0]) == "ccf");
    CHECK(std::string(lm::kFeatureNames[1]) == "n_matches");
    CHECK(std::string(lm::kFeatureNames[2]) == "S");
    CHECK(std::string(lm::kFeatureNames[3]) == "n_nonmatches");
    CHECK(std::string(lm::kFeatureNames[4]) == "D");
    CHECK(std::string(lm::kFeatureNames[5]) == "cms");
    CHECK(std::string(lm::kFeatureNames[6]) == "cnms");

    lm::FeatureVector fv;
    fv.ccf = 1;
    fv.n_matches = 2;
    fv.S = 3;
    fv.n_nonmatches = 4;
    fv.D = 5;
    fv.cms = 6;
    fv.cnms = 7;
    const auto values = fv.values();
    for (int i = 0; i < 7; ++i) CHECK(values[static_cast<std::size_t>(i)] == i + 1);
}
