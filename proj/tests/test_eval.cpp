#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "landmatch/error.hpp"
#include "landmatch/eval.hpp"
#include "landmatch/rng.hpp"
#include "oracles.hpp"

namespace lm = landmatch;
namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::string code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const lm::Error& e) {
        return e.code();
    }
    return "no-error";
}

}  // namespace

TEST_CASE("roc area equals the pairwise ranking probability") {
    lm::Xoshiro256 rng(70);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(59));
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> labels(static_cast<std::size_t>(n));
        int pos = 0;
        for (int i = 0; i < n; ++i) {
            scores[static_cast<std::size_t>(i)] = trial % 2 == 0
                                                      ? static_cast<double>(rng.below(6))
                                                      : rng.normal();
            labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
            pos += labels[static_cast<std::size_t>(i)];
        }
        if (pos == 0 || pos == n) {
            labels[0] = 1 - labels[0];  // keep both classes present
        }
        const lm::RocCurve curve = lm::roc(scores, labels);
        CHECK(curve.auc == doctest::Approx(oracle::auc_pairwise(scores, labels)).epsilon(1e-9));
        CHECK(curve.eer >= 0.0);
        CHECK(curve.eer <= 1.0);

        // Points run threshold-descending from (0,0) to (1,1), monotone in both rates.
        REQUIRE(!curve.points.empty());
        CHECK(std::isinf(curve.points.front().threshold));
        CHECK(curve.points.front().fpr == 0.0);
        CHECK(curve.points.front().tpr == 0.0);
        CHECK(curve.points.back().fpr == 1.0);
        CHECK(curve.points.back().tpr == 1.0);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].threshold < curve.points[i - 1].threshold);
            CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
            CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
        }
    }
}

TEST_CASE("six-score reference curve") {
    const std::vector<double> scores = {0.9, 0.8, 0.7, 0.4, 0.3, 0.2};
    const std::vector<int> labels = {1, 1, 0, 1, 0, 0};
    const lm::RocCurve curve = lm::roc(scores, labels);
    CHECK(curve.auc == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    REQUIRE(curve.points.size() == 7);
    CHECK(curve.points[3].threshold == 0.7);
    CHECK(curve.points[3].fpr == doctest::Approx(1.0 / 3.0));
    CHECK(curve.points[3].tpr == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tied scores share one roc point") {
    const std::vector<double> scores = {0.5, 0.5, 0.9, 0.1};
    const std::vector<int> labels = {1, 0, 1, 0};
    const lm::RocCurve curve = lm::roc(scores, labels);
    REQUIRE(curve.points.size() == 4);  // inf plus three distinct thresholds
    CHECK(curve.auc == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(curve.points[2].threshold == 0.5);
    CHECK(curve.points[2].fpr == doctest::Approx(0.5));
    CHECK(curve.points[2].tpr == doctest::Approx(1.0));
}

TEST_CASE("separation quality shows in auc and eer") {
    const lm::RocCurve perfect = lm::roc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
    CHECK(perfect.auc == doctest::Approx(1.0));
    CHECK(perfect.eer == doctest::Approx(0.0));

    const lm::RocCurve inverted = lm::roc({0.9, 0.1}, {0, 1});
    CHECK(inverted.auc == doctest::Approx(0.0));
    CHECK(inverted.eer == doctest::Approx(1.0));

    const lm::RocCurve interleaved = lm::roc({4, 3, 2, 1}, {1, 0, 1, 0});
    CHECK(interleaved.eer == doctest::Approx(0.5));

    lm::Xoshiro256 rng(71);
    std::vector<double> scores(2000);
    std::vector<int> labels(2000);
    for (int i = 0; i < 2000; ++i) {
        scores[static_cast<std::size_t>(i)] = rng.uniform();
        labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
    }
    const lm::RocCurve random = lm::roc(scores, labels);
    CHECK(std::abs(random.auc - 0.5) < 0.05);
    CHECK(std::abs(random.eer - 0.5) < 0.05);
}

TEST_CASE("roc is invariant under increasing score transforms") {
    lm::Xoshiro256 rng(72);
    std::vector<double> scores(80);
    std::vector<int> labels(80);
    for (int i = 0; i < 80; ++i) {
        scores[static_cast<std::size_t>(i)] = rng.normal();
        labels[static_cast<std::size_t>(i)] = i % 3 == 0 ? 1 : 0;
    }
    std::vector<double> transformed = scores;
    for (double& s : transformed) s = std::exp(s);
    const lm::RocCurve a = lm::roc(scores, labels);
    const lm::RocCurve b = lm::roc(transformed, labels);
    CHECK(a.auc == b.auc);
    CHECK(a.eer == b.eer);
}

TEST_CASE("roc input validation") {
    CHECK(code_of([] { (void)lm::roc({1.0, 2.0}, {1, 1}); }) == "one-class-only");
    CHECK(code_of([] { (void)lm::roc({1.0, 2.0}, {0, 0}); }) == "one-class-only");
    CHECK(code_of([] { (void)lm::roc({1.0, 2.0, 3.0}, {1, 0}); }) == "length-mismatch");
}

TEST_CASE("histograms split counts by label over a shared range") {
    std::vector<double> values;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        values.push_back(static_cast<double>(i));
        labels.push_back(i % 2);
    }
    const lm::Histogram h = lm::histogram_by_label(values, labels, 10);
    CHECK(h.lo == 0.0);
    CHECK(h.hi == 9.0);
    REQUIRE(h.count_match.size() == 10);
    REQUIRE(h.count_nonmatch.size() == 10);
    int match_total = 0, nonmatch_total = 0;
    for (int c : h.count_match) match_total += c;
    for (int c : h.count_nonmatch) nonmatch_total += c;
    CHECK(match_total == 5);
    CHECK(nonmatch_total == 5);
    CHECK(h.count_match.back() == 1);  // the maximum lands in the last bin

    const lm::Histogram flat = lm::histogram_by_label({2.0, 2.0, 2.0}, {1, 0, 1}, 4);
    CHECK(flat.hi > flat.lo);
    CHECK(flat.count_match[0] == 2);
    CHECK(flat.count_nonmatch[0] == 1);
}

TEST_CASE("bullet decisions pick the best cyclic rotation") {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(6, 6, 1.0);
    lm::BulletDecision d = lm::bullet_decision(ones, {});
    CHECK(d.match);
    CHECK(d.rotation == 0);
    CHECK(d.lands_above == 6);

    d = lm::bullet_decision(Eigen::MatrixXd::Zero(6, 6), {});
    CHECK_FALSE(d.match);
    CHECK(d.lands_above == 0);

    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(4, 4);
    grid(0, 2) = 0.9;
    grid(1, 3) = 0.9;
    d = lm::bullet_decision(grid, {});
    CHECK(d.match);
    CHECK(d.rotation == 2);
    CHECK(d.lands_above == 2);

    grid(2, 0) = kNan;  // rotation 2 visits this cell; NaN is skipped
    d = lm::bullet_decision(grid, {});
    CHECK(d.match);
    CHECK(d.rotation == 2);
    CHECK(d.lands_above == 2);
}

TEST_CASE("bullet decision ties keep the smallest rotation") {
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(4, 4);
    grid(0, 0) = 0.9;
    grid(1, 1) = 0.9;
    grid(0, 2) = 0.9;
    grid(1, 3) = 0.9;
    const lm::BulletDecision d = lm::bullet_decision(grid, {});
    CHECK(d.rotation == 0);
    CHECK(d.lands_above == 2);
}

TEST_CASE("bullet decision counts probabilities at the cutoff") {
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(3, 3);
    grid(0, 0) = 0.5;
    lm::BulletRule rule;
    rule.min_lands = 1;
    const lm::BulletDecision d = lm::bullet_decision(grid, rule);
    CHECK(d.match);
    CHECK(d.lands_above == 1);

    rule.cutoff = 0.51;
    CHECK_FALSE(lm::bullet_decision(grid, rule).match);
}

TEST_CASE("manifests round-trip through csv") {
    std::vector<lm::ManifestEntry> entries(3);
    entries[0] = {"scans/b1-s1-l1.x3p", "demo", "known", "B1", "B1-S1", "1"};
    entries[1] = {"scans/b1-s2-l1.x3p", "demo", "unknown", "", "B1-S2", "1"};
    entries[2] = {"scans/b2-s1-l3.x3p", "demo", "known", "B2", "B2-S1", "3"};
    const fs::path path = write_temp("landmatch_manifest_rt.csv", lm::manifest_csv(entries));
    const auto loaded = lm::read_manifest(path);
    REQUIRE(loaded.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(loaded[i].path == entries[i].path);
        CHECK(loaded[i].study == entries[i].study);
        CHECK(loaded[i].role == entries[i].role);
        CHECK(loaded[i].barrel == entries[i].barrel);
        CHECK(loaded[i].bullet == entries[i].bullet);
        CHECK(loaded[i].land == entries[i].land);
    }
}

TEST_CASE("malformed manifests are rejected") {
    auto manifest_code = [](const std::string& name, const std::string& content) {
        const fs::path path = write_temp(name, content);
        return code_of([&] { (void)lm::read_manifest(path); });
    };
    const std::string header = "path,study,role,barrel,bullet,land\n";
    CHECK(manifest_code("m_bad_header.csv", "file,study,role,barrel,bullet,land\na,b,known,c,d,e\n") ==
          "malformed-manifest");
    CHECK(manifest_code("m_bad_cols.csv", header + "a,b,known,c,d\n") == "malformed-manifest");
    CHECK(manifest_code("m_bad_role.csv", header + "a,b,KNOWN,c,d,e\n") == "malformed-manifest");
    CHECK(manifest_code("m_no_path.csv", header + ",b,known,c,d,e\n") == "malformed-manifest");
    CHECK(manifest_code("m_no_bullet.csv", header + "a,b,known,c,,e\n") == "malformed-manifest");
    CHECK(manifest_code("m_no_land.csv", header + "a,b,known,c,d,\n") == "malformed-manifest");
}
