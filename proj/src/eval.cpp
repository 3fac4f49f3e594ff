#include "landmatch/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "landmatch/align.hpp"
#include "landmatch/csv.hpp"
#include "landmatch/error.hpp"
#include "landmatch/text.hpp"
#include "landmatch/x3p.hpp"

namespace landmatch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void run_indexed(int count, int jobs, const std::function<void(int)>& work) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const int n_workers = std::min(jobs, count);
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
        workers.emplace_back([&] {
            while (!failed.load()) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    for (auto& th : workers) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Lands within a bullet sort by land id, numerically when both parse.
bool land_id_less(const std::string& a, const std::string& b) {
    try {
        std::size_t pa = 0, pb = 0;
        const long va = std::stol(a, &pa);
        const long vb = std::stol(b, &pb);
        if (pa == a.size() && pb == b.size()) return va < vb;
    } catch (...) {
    }
    return a < b;
}

}  // namespace

RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) fail("length-mismatch", "scores/labels length mismatch");
    int n_pos = 0, n_neg = 0;
    for (int label : labels) (label == 1 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        fail("one-class-only", "ROC needs both classes present");

    std::vector<std::pair<double, int>> sorted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) sorted[i] = {scores[i], labels[i]};
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    int tp = 0, fp = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        (sorted[i].second == 1 ? tp : fp) += 1;
        if (i + 1 < sorted.size() && sorted[i + 1].first == sorted[i].first)
            continue;  // ties share one threshold point
        curve.points.push_back({sorted[i].first, static_cast<double>(fp) / n_neg,
                                static_cast<double>(tp) / n_pos});
    }

    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const RocPoint& p = curve.points[i];
        const RocPoint& q = curve.points[i + 1];
        curve.auc += (q.fpr - p.fpr) * (p.tpr + q.tpr) / 2.0;
    }

    // fpr + tpr - 1 rises monotonically from -1 to +1 along the curve; the
    // EER sits where it crosses zero.
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const RocPoint& p = curve.points[i];
        const RocPoint& q = curve.points[i + 1];
        if (q.fpr + q.tpr - 1.0 < 0) continue;
        const double den = (q.fpr - p.fpr) + (q.tpr - p.tpr);
        const double s = den > 0 ? (1.0 - p.tpr - p.fpr) / den : 0.0;
        curve.eer = p.fpr + s * (q.fpr - p.fpr);
        break;
    }
    return curve;
}

Histogram histogram_by_label(const std::vector<double>& values, const std::vector<int>& labels,
                             int bins) {
    Histogram hist;
    hist.count_match.assign(static_cast<std::size_t>(bins), 0);
    hist.count_nonmatch.assign(static_cast<std::size_t>(bins), 0);
    if (values.empty()) return hist;
    hist.lo = *std::min_element(values.begin(), values.end());
    hist.hi = *std::max_element(values.begin(), values.end());
    if (hist.hi <= hist.lo) hist.hi = hist.lo + 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bin = static_cast<int>((values[i] - hist.lo) / (hist.hi - hist.lo) *
                                    static_cast<double>(bins));
        bin = std::clamp(bin, 0, bins - 1);
        auto& counts = labels[i] == 1 ? hist.count_match : hist.count_nonmatch;
        counts[static_cast<std::size_t>(bin)] += 1;
    }
    return hist;
}

BulletDecision bullet_decision(const Eigen::MatrixXd& land_probs, const BulletRule& rule) {
    BulletDecision decision;
    const Eigen::Index rows = land_probs.rows();
    const Eigen::Index cols = land_probs.cols();
    if (rows == 0 || cols == 0) return decision;

    for (Eigen::Index r = 0; r < cols; ++r) {
        int above = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double p = land_probs(i, (i + r) % cols);
            if (!std::isnan(p) && p >= rule.cutoff) above += 1;
        }
        if (above > decision.lands_above) {
            decision.lands_above = above;
            decision.rotation = static_cast<int>(r);
        }
    }
    decision.match = decision.lands_above >= rule.min_lands;
    return decision;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    const auto rows = csv::read_table(path);
    const std::vector<std::string> header = {"path", "study", "role", "barrel", "bullet", "land"};
    if (rows.empty() || rows[0] != header)
        fail("malformed-manifest",
             path.string() + " must start with header path,study,role,barrel,bullet,land");
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 6) fail("malformed-manifest", "bad manifest row in " + path.string());
        ManifestEntry e{row[0], row[1], row[2], row[3], row[4], row[5]};
        if (e.role != "known" && e.role != "unknown")
            fail("malformed-manifest", "role must be known or unknown, got '" + e.role + "'");
        if (e.path.empty() || e.bullet.empty() || e.land.empty())
            fail("malformed-manifest", "path, bullet and land are required");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::string manifest_csv(const std::vector<ManifestEntry>& entries) {
    std::string out = "path,study,role,barrel,bullet,land\n";
    for (const ManifestEntry& e : entries)
        out += e.path + "," + e.study + "," + e.role + "," + e.barrel + "," + e.bullet + "," +
               e.land + "\n";
    return out;
}

namespace {

struct LandData {
    Signature raw;
    Signature smoothed;
    bool usable = false;
};

// Land-level truth: a pair matches only when both scans come from the same
// land of the same barrel. Same-barrel pairs across different lands carry
// different striation sources and count as non-matches.
PairLabel pair_label(const ManifestEntry& a, const ManifestEntry& b) {
    if (a.barrel.empty() || b.barrel.empty()) return PairLabel::unknown;
    if (a.barrel != b.barrel) return PairLabel::nonmatch;
    return a.land == b.land ? PairLabel::match : PairLabel::nonmatch;
}

}  // namespace

StudyResult run_study(const std::vector<ManifestEntry>& manifest,
                      const std::filesystem::path& base_dir, const StudyConfig& cfg) {
    if (manifest.size() < 2) fail("corpus-empty", "study needs at least two lands");

    StudyResult result;
    result.params = cfg.params;
    result.pair_mode = cfg.pairs;
    result.lands.resize(manifest.size());

    const int n_lands = static_cast<int>(manifest.size());
    std::vector<LandData> data(manifest.size());

    run_indexed(n_lands, cfg.jobs, [&](int i) {
        const ManifestEntry& entry = manifest[static_cast<std::size_t>(i)];
        LandStatus status;
        status.entry = entry;
        std::filesystem::path file = entry.path;
        if (file.is_relative()) file = base_dir / file;
        try {
            const Surface surface = read_x3p(file);
            status.id = surface.meta.id;
            if (cfg.fixed_x) {
                status.chosen_x = *cfg.fixed_x;
            } else {
                const StabilityReport report = stable_region(surface, cfg.params);
                status.flagged = report.flagged;
                status.chosen_x = report.chosen_x;
            }
            if (status.chosen_x) {
                LandData& d = data[static_cast<std::size_t>(i)];
                d.raw = land_signature(surface, *status.chosen_x, cfg.params);
                d.smoothed = smooth_signature(d.raw, cfg.params.smooth_span);
                d.usable = true;
            }
        } catch (const Error&) {
            status.flagged = true;
            status.chosen_x.reset();
            if (status.id.empty()) status.id = file.stem().string();
            data[static_cast<std::size_t>(i)].usable = false;
        }
        result.lands[static_cast<std::size_t>(i)] = std::move(status);
    });

    {
        std::set<std::string> seen;
        for (const LandStatus& s : result.lands)
            if (!seen.insert(s.id).second)
                fail("duplicate-land-id", "land id '" + s.id + "' appears twice in the corpus");
    }

    // Usable lands sorted by id fix the pair order, hence every downstream
    // output ordering.
    std::vector<int> usable;
    for (int i = 0; i < n_lands; ++i)
        if (data[static_cast<std::size_t>(i)].usable && !result.lands[static_cast<std::size_t>(i)].flagged)
            usable.push_back(i);
    std::sort(usable.begin(), usable.end(), [&](int a, int b) {
        return result.lands[static_cast<std::size_t>(a)].id < result.lands[static_cast<std::size_t>(b)].id;
    });

    std::vector<std::pair<int, int>> pair_indices;
    if (cfg.pairs == PairMode::all) {
        for (std::size_t a = 0; a < usable.size(); ++a)
            for (std::size_t b = a + 1; b < usable.size(); ++b)
                pair_indices.emplace_back(usable[a], usable[b]);
    } else {
        for (int u : usable) {
            if (result.lands[static_cast<std::size_t>(u)].entry.role != "unknown") continue;
            for (int k : usable) {
                if (result.lands[static_cast<std::size_t>(k)].entry.role != "known") continue;
                pair_indices.emplace_back(u, k);
            }
        }
    }
    if (pair_indices.empty()) fail("corpus-empty", "no comparable land pairs in the corpus");

    result.features.resize(pair_indices.size());
    run_indexed(static_cast<int>(pair_indices.size()), cfg.jobs, [&](int p) {
        const auto [ia, ib] = pair_indices[static_cast<std::size_t>(p)];
        const LandData& a = data[static_cast<std::size_t>(ia)];
        const LandData& b = data[static_cast<std::size_t>(ib)];
        ComparisonResult cmp = compare_smoothed(a.raw, a.smoothed, b.raw, b.smoothed, cfg.params);
        cmp.features.label = pair_label(result.lands[static_cast<std::size_t>(ia)].entry,
                                        result.lands[static_cast<std::size_t>(ib)].entry);
        result.features[static_cast<std::size_t>(p)] = std::move(cmp.features);
    });

    // Model: load, or train on the labeled rows.
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < result.features.size(); ++i)
        if (result.features[i].label != PairLabel::unknown) labeled.push_back(i);

    if (!cfg.model_json.empty()) {
        result.forest = forest_from_json(cfg.model_json);
        if (result.forest.feature_names !=
            std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()))
            fail("model-schema-mismatch", "model feature names do not match the pipeline's");
    } else {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(labeled.size()), 7);
        std::vector<int> y(labeled.size());
        for (std::size_t r = 0; r < labeled.size(); ++r) {
            const auto values = result.features[labeled[r]].values();
            for (int c = 0; c < 7; ++c) x(static_cast<Eigen::Index>(r), c) = values[static_cast<std::size_t>(c)];
            y[r] = result.features[labeled[r]].label == PairLabel::match ? 1 : 0;
        }
        if (labeled.empty() || std::count(y.begin(), y.end(), 1) == 0 ||
            std::count(y.begin(), y.end(), 0) == 0)
            fail("one-class-only", "training needs labeled pairs of both classes; supply a model instead");
        ForestOptions fopts;
        fopts.n_trees = cfg.params.n_trees;
        fopts.mtry = cfg.params.mtry;
        fopts.min_leaf = cfg.params.min_leaf;
        fopts.max_depth = cfg.params.max_depth;
        fopts.seed = cfg.params.seed;
        fopts.jobs = cfg.jobs;
        result.forest = fit_forest(x, y, {kFeatureNames.begin(), kFeatureNames.end()}, fopts);
        result.trained = true;
    }

    result.probabilities.resize(result.features.size());
    for (std::size_t i = 0; i < result.features.size(); ++i) {
        const auto values = result.features[i].values();
        Eigen::RowVectorXd row(7);
        for (int c = 0; c < 7; ++c) row[c] = values[static_cast<std::size_t>(c)];
        result.probabilities[i] = predict(result.forest, row);
    }

    std::vector<double> scores;
    std::vector<int> truth;
    for (std::size_t i : labeled) {
        scores.push_back(result.probabilities[i]);
        truth.push_back(result.features[i].label == PairLabel::match ? 1 : 0);
        const bool pred = result.probabilities[i] >= cfg.params.cutoff;
        const bool is_match = result.features[i].label == PairLabel::match;
        if (pred && is_match) result.tp += 1;
        if (pred && !is_match) result.fp += 1;
        if (!pred && is_match) result.fn += 1;
        if (!pred && !is_match) result.tn += 1;
    }
    const bool both_classes = std::count(truth.begin(), truth.end(), 1) > 0 &&
                              std::count(truth.begin(), truth.end(), 0) > 0;
    if (both_classes) result.forest_roc = roc(scores, truth);

    // Bullet level: probability matrix per bullet pair over land-sorted
    // indices, best cyclic rotation, then the min-lands rule.
    std::map<std::string, std::vector<int>> bullet_lands;  // bullet id -> usable land indices
    for (int u : usable) bullet_lands[result.lands[static_cast<std::size_t>(u)].entry.bullet].push_back(u);
    for (auto& [bullet, lands] : bullet_lands)
        std::sort(lands.begin(), lands.end(), [&](int a, int b) {
            return land_id_less(result.lands[static_cast<std::size_t>(a)].entry.land,
                                result.lands[static_cast<std::size_t>(b)].entry.land);
        });

    std::map<std::pair<std::string, std::string>, std::map<std::pair<int, int>, double>> pair_probs;
    for (std::size_t i = 0; i < result.features.size(); ++i) {
        const auto [ia, ib] = pair_indices[i];
        const std::string& bullet_a = result.lands[static_cast<std::size_t>(ia)].entry.bullet;
        const std::string& bullet_b = result.lands[static_cast<std::size_t>(ib)].entry.bullet;
        if (bullet_a == bullet_b) continue;
        if (bullet_a < bullet_b)
            pair_probs[{bullet_a, bullet_b}][{ia, ib}] = result.probabilities[i];
        else
            pair_probs[{bullet_b, bullet_a}][{ib, ia}] = result.probabilities[i];
    }

    BulletRule rule{cfg.params.cutoff, cfg.params.min_lands};
    for (const auto& [bullets, probs] : pair_probs) {
        const auto& lands_a = bullet_lands[bullets.first];
        const auto& lands_b = bullet_lands[bullets.second];
        Eigen::MatrixXd grid = Eigen::MatrixXd::Constant(
            static_cast<Eigen::Index>(lands_a.size()), static_cast<Eigen::Index>(lands_b.size()), kNaN);
        for (std::size_t r = 0; r < lands_a.size(); ++r)
            for (std::size_t c = 0; c < lands_b.size(); ++c) {
                const auto it = probs.find({lands_a[r], lands_b[c]});
                if (it != probs.end())
                    grid(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = it->second;
            }
        const BulletDecision decision = bullet_decision(grid, rule);

        BulletCall call;
        call.bullet_a = bullets.first;
        call.bullet_b = bullets.second;
        call.decided_match = decision.match;
        call.rotation = decision.rotation;
        call.lands_above = decision.lands_above;
        const ManifestEntry& ea = result.lands[static_cast<std::size_t>(bullet_lands[bullets.first][0])].entry;
        const ManifestEntry& eb = result.lands[static_cast<std::size_t>(bullet_lands[bullets.second][0])].entry;
        call.truth_known = !ea.barrel.empty() && !eb.barrel.empty();
        call.truth_match = call.truth_known && ea.barrel == eb.barrel;
        if (call.truth_known && call.truth_match != call.decided_match) result.bullet_errors += 1;
        result.bullets.push_back(std::move(call));
    }
    return result;
}

void write_study_outputs(const StudyResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    csv::write_file(out_dir / "features.csv", csv::features_csv(result.features));

    std::string pred = "id_a,id_b,label,prob,pred\n";
    for (std::size_t i = 0; i < result.features.size(); ++i) {
        const FeatureVector& fv = result.features[i];
        const double p = result.probabilities[i];
        pred += fv.id_a + "," + fv.id_b + "," + to_string(fv.label) + "," + format_double(p) + "," +
                (p >= result.params.cutoff ? "match" : "nonmatch") + "\n";
    }
    csv::write_file(out_dir / "predictions.csv", pred);

    std::vector<int> labels;
    std::vector<std::array<double, 7>> values;
    for (const FeatureVector& fv : result.features) {
        if (fv.label == PairLabel::unknown) continue;
        labels.push_back(fv.label == PairLabel::match ? 1 : 0);
        values.push_back(fv.values());
    }
    const bool both_classes = std::count(labels.begin(), labels.end(), 1) > 0 &&
                              std::count(labels.begin(), labels.end(), 0) > 0;

    nlohmann::json per_feature_auc;
    for (std::size_t f = 0; f < kFeatureNames.size(); ++f) {
        std::vector<double> feature_scores(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) feature_scores[i] = values[i][f];

        if (both_classes) {
            const RocCurve curve = roc(feature_scores, labels);
            std::string roc_csv = "threshold,fpr,tpr\n";
            for (const RocPoint& pt : curve.points)
                roc_csv += format_double(pt.threshold) + "," + format_double(pt.fpr) + "," +
                           format_double(pt.tpr) + "\n";
            csv::write_file(out_dir / ("roc_" + std::string(kFeatureNames[f]) + ".csv"), roc_csv);
            per_feature_auc[kFeatureNames[f]] = curve.auc;
        }

        const Histogram hist = histogram_by_label(feature_scores, labels);
        std::string hist_csv = "bin_lo,bin_hi,count_match,count_nonmatch\n";
        const double width = (hist.hi - hist.lo) / static_cast<double>(hist.count_match.size());
        for (std::size_t b = 0; b < hist.count_match.size(); ++b)
            hist_csv += format_double(hist.lo + width * static_cast<double>(b)) + "," +
                        format_double(hist.lo + width * static_cast<double>(b + 1)) + "," +
                        std::to_string(hist.count_match[b]) + "," +
                        std::to_string(hist.count_nonmatch[b]) + "\n";
        csv::write_file(out_dir / ("hist_" + std::string(kFeatureNames[f]) + ".csv"), hist_csv);
    }

    if (result.forest_roc) {
        std::string roc_csv = "threshold,fpr,tpr\n";
        for (const RocPoint& pt : result.forest_roc->points)
            roc_csv += format_double(pt.threshold) + "," + format_double(pt.fpr) + "," +
                       format_double(pt.tpr) + "\n";
        csv::write_file(out_dir / "roc_forest.csv", roc_csv);
    }

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["pair_mode"] = result.pair_mode == PairMode::all ? "all" : "known-unknown";
    summary["n_lands"] = result.lands.size();
    nlohmann::json flagged = nlohmann::json::array();
    for (const LandStatus& s : result.lands)
        if (s.flagged) flagged.push_back(s.id);
    summary["flagged_lands"] = flagged;
    summary["n_flagged"] = flagged.size();
    summary["n_pairs_scored"] = result.features.size();
    summary["n_labeled"] = labels.size();
    summary["confusion"] = {{"tp", result.tp},
                            {"fp", result.fp},
                            {"tn", result.tn},
                            {"fn", result.fn}};
    const int n_pos = result.tp + result.fn;
    const int n_neg = result.tn + result.fp;
    summary["error_rates"] = {
        {"false_positive", n_neg > 0 ? static_cast<double>(result.fp) / n_neg : 0.0},
        {"false_negative", n_pos > 0 ? static_cast<double>(result.fn) / n_pos : 0.0},
        {"weighted", n_pos + n_neg > 0
                         ? static_cast<double>(result.fp + result.fn) / (n_pos + n_neg)
                         : 0.0}};
    if (result.forest_roc) {
        summary["forest"] = {{"auc", result.forest_roc->auc}, {"eer", result.forest_roc->eer}};
    }
    summary["per_feature_auc"] = per_feature_auc;
    if (result.trained) {
        summary["oob"] = {{"weighted", result.forest.oob.weighted},
                          {"false_positive", result.forest.oob.false_positive},
                          {"false_negative", result.forest.oob.false_negative},
                          {"n_scored", result.forest.oob.n_scored},
                          {"n_excluded", result.forest.oob.n_excluded}};
        nlohmann::json importance = nlohmann::json::array();
        for (const auto& [name, value] : importance_table(result.forest))
            importance.push_back({{"feature", name}, {"mean_decrease_gini", value}});
        summary["importance"] = importance;
    }
    nlohmann::json bullets = nlohmann::json::array();
    for (const BulletCall& call : result.bullets) {
        nlohmann::json entry = {{"bullet_a", call.bullet_a},
                                {"bullet_b", call.bullet_b},
                                {"decision", call.decided_match ? "match" : "nonmatch"},
                                {"rotation", call.rotation},
                                {"lands_above_cutoff", call.lands_above}};
        if (call.truth_known) entry["truth"] = call.truth_match ? "match" : "nonmatch";
        bullets.push_back(std::move(entry));
    }
    summary["bullets"] = std::move(bullets);
    summary["bullet_errors"] = result.bullet_errors;
    summary["params"] = {{"groove_smooth", result.params.groove_smooth},
                         {"striae_smooth", result.params.striae_smooth},
                         {"loess_span", result.params.loess_span},
                         {"smooth_span", result.params.smooth_span},
                         {"stability_step", result.params.stability_step},
                         {"stability_threshold", result.params.stability_threshold},
                         {"max_lag", result.params.max_lag},
                         {"min_overlap_frac", result.params.min_overlap_frac},
                         {"cutoff", result.params.cutoff},
                         {"min_lands", result.params.min_lands},
                         {"n_trees", result.params.n_trees},
                         {"mtry", result.params.mtry},
                         {"min_leaf", result.params.min_leaf},
                         {"max_depth", result.params.max_depth},
                         {"seed", result.params.seed}};
    csv::write_file(out_dir / "summary.json", summary.dump(2) + "\n");

    if (result.trained) csv::write_file(out_dir / "model.json", forest_to_json(result.forest));
}

}  // namespace landmatch
