#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "landmatch/classify.hpp"
#include "landmatch/features.hpp"
#include "landmatch/pipeline.hpp"

namespace landmatch {

struct RocPoint {
    double threshold = 0;
    double fpr = 0;
    double tpr = 0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // threshold descending, (0,0) to (1,1)
    double auc = 0;                // trapezoid rule over the points
    double eer = 0;                // where fpr = 1 - tpr, linearly interpolated
};

/// ROC treating larger scores as more match-like. labels are 1 = match.
RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels);

struct Histogram {
    double lo = 0, hi = 0;  // value range covered
    std::vector<int> count_match, count_nonmatch;
};

Histogram histogram_by_label(const std::vector<double>& values, const std::vector<int>& labels,
                             int bins = 40);

/// Per-bullet-pair decision: lands are paired under the best cyclic rotation
/// of the second bullet's lands, and the bullets match when at least
/// min_lands pairs reach the cutoff. NaN cells (unscored pairs) are skipped.
struct BulletRule {
    double cutoff = 0.5;
    int min_lands = 2;
};

struct BulletDecision {
    bool match = false;
    int rotation = 0;     // chosen rotation of the second bullet's lands
    int lands_above = 0;  // pairs at or above the cutoff under that rotation
};

BulletDecision bullet_decision(const Eigen::MatrixXd& land_probs, const BulletRule& rule = {});

/// Ground-truth sidecar for a scan corpus. Paths are resolved relative to
/// the manifest's directory. barrel may be empty when truth is withheld.
struct ManifestEntry {
    std::string path;
    std::string study;
    std::string role;    // "known" or "unknown"
    std::string barrel;  // ground-truth barrel id, possibly empty
    std::string bullet;  // physical bullet id, unique within the manifest
    std::string land;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::string manifest_csv(const std::vector<ManifestEntry>& entries);

enum class PairMode { known_unknown, all };

struct StudyConfig {
    PairMode pairs = PairMode::all;
    Params params;
    std::string model_json;        // serialized forest; empty = train fresh
    int jobs = 1;
    std::optional<double> fixed_x; // extraction height; absent = stability scan
};

struct LandStatus {
    ManifestEntry entry;
    std::string id;                 // surface id, the pair-id component
    bool flagged = false;
    std::optional<double> chosen_x; // µm
};

struct BulletCall {
    std::string bullet_a, bullet_b;
    bool truth_known = false;
    bool truth_match = false;
    bool decided_match = false;
    int rotation = 0;
    int lands_above = 0;
};

struct StudyResult {
    std::vector<LandStatus> lands;        // manifest order
    std::vector<FeatureVector> features;  // sorted by (id_a, id_b)
    std::vector<double> probabilities;    // parallel to features
    Forest forest;
    bool trained = false;
    int tp = 0, fp = 0, tn = 0, fn = 0;   // at the cutoff, labeled pairs only
    std::optional<RocCurve> forest_roc;   // present when both classes occur
    std::vector<BulletCall> bullets;
    int bullet_errors = 0;
    Params params;
    PairMode pair_mode = PairMode::all;
};

/// Full corpus run: stability-flag each land, extract signatures at the
/// chosen heights, compare the configured pair set, score with the supplied
/// or freshly trained forest, and aggregate land- and bullet-level results.
StudyResult run_study(const std::vector<ManifestEntry>& manifest,
                      const std::filesystem::path& base_dir, const StudyConfig& cfg);

/// features.csv, predictions.csv, roc_/hist_ per feature, summary.json and
/// model.json (when trained) under out_dir. Byte-deterministic.
void write_study_outputs(const StudyResult& result, const std::filesystem::path& out_dir);

}  // namespace landmatch
