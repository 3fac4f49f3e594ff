// landmatch: bullet land-impression comparison over x3p scans.
// Exit 0 on success, 1 on data errors, 2 on usage errors.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "landmatch/align.hpp"
#include "landmatch/classify.hpp"
#include "landmatch/csv.hpp"
#include "landmatch/error.hpp"
#include "landmatch/eval.hpp"
#include "landmatch/features.hpp"
#include "landmatch/grooves.hpp"
#include "landmatch/loess.hpp"
#include "landmatch/pipeline.hpp"
#include "landmatch/rng.hpp"
#include "landmatch/surface_ops.hpp"
#include "landmatch/synth.hpp"
#include "landmatch/text.hpp"
#include "landmatch/x3p.hpp"

namespace lm = landmatch;
using nlohmann::json;

namespace {

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    lm::csv::write_file(out_path, content);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

lm::X3pReadOptions read_options(bool swap_axes) {
    lm::X3pReadOptions opts;
    opts.swap_axes = swap_axes;
    opts.warn = [](const std::string& message) { std::cerr << "warning: " << message << "\n"; };
    return opts;
}

bool is_csv(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".csv";
}

// x chosen explicitly or by the stability scan; flagged surfaces are refused.
double choose_x(const lm::Surface& surface, std::optional<double> x, const lm::Params& p) {
    if (x) return *x;
    const lm::StabilityReport report = lm::stable_region(surface, p);
    if (!report.chosen_x)
        lm::fail("no-stable-region",
                 "no stable extraction height found for '" + surface.meta.id + "'");
    return *report.chosen_x;
}

// Signature input: a signature CSV is taken as-is, an x3p goes through
// crosscut, trim and detrend at the chosen height.
lm::Signature load_signature(const std::filesystem::path& path, std::optional<double> x,
                             const lm::Params& p, bool swap_axes) {
    if (is_csv(path)) return lm::csv::read_signature(path);
    const lm::Surface surface = lm::read_x3p(path, read_options(swap_axes));
    return lm::land_signature(surface, choose_x(surface, x, p), p);
}

struct ParamFlags {
    lm::Params* params = nullptr;

    void add_extraction(CLI::App* cmd) {
        const CLI::Validator odd_window(
            [](std::string& value) -> std::string {
                long n = 0;
                try {
                    std::size_t pos = 0;
                    n = std::stol(value, &pos);
                    if (pos != value.size()) return "not an integer: " + value;
                } catch (...) {
                    return "not an integer: " + value;
                }
                if (n < 1 || n % 2 == 0) return "must be a positive odd integer, got " + value;
                return "";
            },
            "ODD");
        const CLI::Validator unit_span(
            [](std::string& value) -> std::string {
                double v = 0;
                try {
                    std::size_t pos = 0;
                    v = std::stod(value, &pos);
                    if (pos != value.size()) return "not a number: " + value;
                } catch (...) {
                    return "not a number: " + value;
                }
                if (!(v > 0.0) || v > 1.0) return "must be in (0, 1], got " + value;
                return "";
            },
            "SPAN");
        cmd->add_option("--groove-smooth", params->groove_smooth,
                        "groove-location smoothing window, odd samples")
            ->check(odd_window)
            ->capture_default_str();
        cmd->add_option("--striae-smooth", params->striae_smooth,
                        "extremum-detection smoothing window, odd samples")
            ->check(odd_window)
            ->capture_default_str();
        cmd->add_option("--loess-span", params->loess_span, "curvature-removal span")
            ->check(unit_span)
            ->capture_default_str();
        cmd->add_option("--smooth-span", params->smooth_span, "alignment smoothing span")
            ->check(unit_span)
            ->capture_default_str();
        cmd->add_option("--stability-step", params->stability_step,
                        "µm between stability scan levels")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--stability-threshold", params->stability_threshold,
                        "ccf two consecutive levels must reach")
            ->check(unit_span)
            ->capture_default_str();
        cmd->add_option("--max-lag", params->max_lag, "alignment search half-width, samples")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--min-overlap-frac", params->min_overlap_frac,
                        "minimum aligned overlap as a fraction of the shorter signature")
            ->check(unit_span)
            ->capture_default_str();
    }

    void add_model(CLI::App* cmd) {
        cmd->add_option("--n-trees", params->n_trees, "forest size")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--mtry", params->mtry, "features tried per split, 0 = all")
            ->check(CLI::Range(0, 7))
            ->capture_default_str();
        cmd->add_option("--min-leaf", params->min_leaf, "minimum rows per leaf")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--max-depth", params->max_depth, "maximum tree depth")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--seed", params->seed, "RNG seed; all randomness flows from it")
            ->capture_default_str();
    }

    void add_decision(CLI::App* cmd) {
        cmd->add_option("--cutoff", params->cutoff, "match probability threshold")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd->add_option("--min-lands", params->min_lands,
                        "land pairs at or above the cutoff required for a bullet match")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }
};

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) lm::fail("io-failure", "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json features_json(const lm::FeatureVector& fv) {
    const auto values = fv.values();
    json j;
    for (std::size_t i = 0; i < lm::kFeatureNames.size(); ++i) j[lm::kFeatureNames[i]] = values[i];
    return j;
}

// Labeled rows of a feature table as a design matrix; rows without truth are
// skipped.
std::pair<Eigen::MatrixXd, std::vector<int>> design_matrix(
    const std::vector<lm::FeatureVector>& rows) {
    std::vector<const lm::FeatureVector*> labeled;
    for (const lm::FeatureVector& fv : rows)
        if (fv.label != lm::PairLabel::unknown) labeled.push_back(&fv);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(labeled.size()), 7);
    std::vector<int> y(labeled.size());
    for (std::size_t r = 0; r < labeled.size(); ++r) {
        const auto values = labeled[r]->values();
        for (int c = 0; c < 7; ++c) x(static_cast<Eigen::Index>(r), c) = values[static_cast<std::size_t>(c)];
        y[r] = labeled[r]->label == lm::PairLabel::match ? 1 : 0;
    }
    return {std::move(x), std::move(y)};
}

lm::Forest load_model(const std::filesystem::path& path) {
    lm::Forest forest = lm::forest_from_json(read_text_file(path));
    if (forest.feature_names !=
        std::vector<std::string>(lm::kFeatureNames.begin(), lm::kFeatureNames.end()))
        lm::fail("model-schema-mismatch", "model feature names do not match the pipeline's");
    return forest;
}

std::string predictions_csv(const std::vector<lm::FeatureVector>& rows, const lm::Forest& forest,
                            double cutoff) {
    std::string out = "id_a,id_b,label,prob,pred\n";
    for (const lm::FeatureVector& fv : rows) {
        const auto values = fv.values();
        Eigen::RowVectorXd row(7);
        for (int c = 0; c < 7; ++c) row[c] = values[static_cast<std::size_t>(c)];
        const double p = lm::predict(forest, row);
        out += fv.id_a + "," + fv.id_b + "," + lm::to_string(fv.label) + "," +
               lm::format_double(p) + "," + (p >= cutoff ? "match" : "nonmatch") + "\n";
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bullet land-impression scan comparison"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags win");

    lm::Params params;
    ParamFlags flags{&params};

    std::string out_path;
    bool swap_axes = false;
    std::optional<double> x_um, x_a_um, x_b_um;
    std::string file_a, file_b;
    std::string detrend = "loess";
    bool smooth = false;
    std::string model_path, features_path, manifest_path, pairs_mode = "all";
    int jobs = 1;
    int barrels = 4, bullets_per_barrel = 3, damaged_lands = 0;
    double noise_sd = 0.1;

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print surface metadata as JSON");
    inspect->add_option("file", file_a, "x3p scan")->required();
    inspect->add_flag("--swap-axes", swap_axes, "transpose axes on read");
    inspect->add_option("--out", out_path, "write here instead of stdout");
    inspect->callback([&] {
        const lm::Surface s = lm::read_x3p(file_a, read_options(swap_axes));
        double lo = 0, hi = 0;
        long masked = 0, seen = 0;
        for (Eigen::Index i = 0; i < s.heights.size(); ++i) {
            const double v = s.heights.data()[i];
            if (lm::Surface::masked(v)) {
                masked += 1;
                continue;
            }
            if (seen == 0) lo = hi = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            seen += 1;
        }
        json j = {{"schema_version", 1},
                  {"id", s.meta.id},
                  {"size_x", s.meta.size_x},
                  {"size_y", s.meta.size_y},
                  {"increment_x_um", s.meta.increment_x},
                  {"increment_y_um", s.meta.increment_y},
                  {"extent_x_um", (static_cast<double>(s.meta.size_x) - 1) * s.meta.increment_x},
                  {"extent_y_um", (static_cast<double>(s.meta.size_y) - 1) * s.meta.increment_y},
                  {"masked_cells", masked}};
        if (seen > 0) {
            j["height_min_um"] = lo;
            j["height_max_um"] = hi;
        }
        json extra = json::object();
        for (const auto& [key, value] : s.meta.extra) extra[key] = value;
        j["metadata"] = std::move(extra);
        emit(out_path, dump(j));
    });

    // crosscut
    auto* cross = app.add_subcommand("crosscut", "profile at a fixed height as CSV");
    cross->add_option("file", file_a, "x3p scan")->required();
    cross->add_option("--x", x_um, "height in µm")->required();
    cross->add_flag("--swap-axes", swap_axes, "transpose axes on read");
    cross->add_option("--out", out_path, "write here instead of stdout");
    cross->callback([&] {
        const lm::Surface s = lm::read_x3p(file_a, read_options(swap_axes));
        emit(out_path, lm::csv::profile_csv(lm::crosscut(s, *x_um)));
    });

    // grooves
    auto* grooves = app.add_subcommand("grooves", "shoulder locations at a height as JSON");
    grooves->add_option("file", file_a, "x3p scan")->required();
    grooves->add_option("--x", x_um, "height in µm")->required();
    grooves->add_flag("--swap-axes", swap_axes, "transpose axes on read");
    grooves->add_option("--out", out_path, "write here instead of stdout");
    flags.add_extraction(grooves);
    grooves->callback([&] {
        const lm::Surface s = lm::read_x3p(file_a, read_options(swap_axes));
        const lm::GrooveBounds b =
            lm::find_grooves(lm::crosscut(s, *x_um), params.groove_smooth);
        emit(out_path, dump(json{{"schema_version", 1},
                                 {"p_left", b.p_left},
                                 {"v_left", b.v_left},
                                 {"v_right", b.v_right},
                                 {"p_right", b.p_right}}));
    });

    // signature
    auto* signature = app.add_subcommand("signature", "detrended land signature as CSV");
    signature->add_option("file", file_a, "x3p scan")->required();
    signature->add_option("--x", x_um, "height in µm; default scans for a stable region");
    signature->add_option("--detrend", detrend, "loess or circle")
        ->check(CLI::IsMember({"loess", "circle"}))
        ->capture_default_str();
    signature->add_flag("--smooth", smooth, "apply alignment smoothing to the residuals");
    signature->add_flag("--swap-axes", swap_axes, "transpose axes on read");
    signature->add_option("--out", out_path, "write here instead of stdout");
    flags.add_extraction(signature);
    signature->callback([&] {
        const lm::Surface s = lm::read_x3p(file_a, read_options(swap_axes));
        const double x = choose_x(s, x_um, params);
        const lm::Profile land =
            lm::trim_to_land(lm::crosscut(s, x), lm::find_grooves(lm::crosscut(s, x), params.groove_smooth));
        lm::Signature sig = detrend == "circle" ? lm::extract_signature_circle(land)
                                                : lm::extract_signature(land, params.loess_span);
        if (smooth) sig = lm::smooth_signature(sig, params.smooth_span);
        emit(out_path, lm::csv::signature_csv(sig));
    });

    // align
    auto* align = app.add_subcommand("align", "best lag between two signatures as JSON");
    align->add_option("a", file_a, "signature CSV (used as-is) or x3p (extracted and smoothed)")
        ->required();
    align->add_option("b", file_b, "second signature or scan")->required();
    align->add_option("--x", x_um, "extraction height for x3p inputs, µm");
    align->add_flag("--swap-axes", swap_axes, "transpose axes on x3p read");
    align->add_option("--out", out_path, "write here instead of stdout");
    flags.add_extraction(align);
    align->callback([&] {
        auto load = [&](const std::string& file) {
            lm::Signature sig = load_signature(file, x_um, params, swap_axes);
            if (!is_csv(file)) sig = lm::smooth_signature(sig, params.smooth_span);
            return sig;
        };
        const lm::AlignedPair pair =
            lm::align_pair(load(file_a), load(file_b), params.max_lag, params.min_overlap_frac);
        emit(out_path, dump(json{{"schema_version", 1},
                                 {"lag", pair.lag},
                                 {"ccf", pair.ccf},
                                 {"overlap_n", pair.overlap_n}}));
    });

    // striae
    auto* striae = app.add_subcommand("striae", "peaks and valleys of a signature as CSV");
    striae->add_option("file", file_a, "signature CSV or x3p scan")->required();
    striae->add_option("--x", x_um, "extraction height for x3p inputs, µm");
    striae->add_flag("--swap-axes", swap_axes, "transpose axes on x3p read");
    striae->add_option("--out", out_path, "write here instead of stdout");
    flags.add_extraction(striae);
    striae->callback([&] {
        const lm::Signature sig = load_signature(file_a, x_um, params, swap_axes);
        emit(out_path, lm::csv::extrema_csv(lm::find_extrema(sig, params.striae_smooth)));
    });

    // compare
    auto* compare = app.add_subcommand("compare", "seven match features for a pair as JSON");
    compare->add_option("a", file_a, "signature CSV or x3p scan")->required();
    compare->add_option("b", file_b, "second signature or scan")->required();
    compare->add_option("--x", x_um, "extraction height for both x3p inputs, µm");
    compare->add_option("--x-a", x_a_um, "extraction height for a, µm");
    compare->add_option("--x-b", x_b_um, "extraction height for b, µm");
    compare->add_option("--model", model_path, "forest JSON; adds a match probability");
    compare->add_flag("--swap-axes", swap_axes, "transpose axes on x3p read");
    compare->add_option("--out", out_path, "write here instead of stdout");
    flags.add_extraction(compare);
    flags.add_decision(compare);
    compare->callback([&] {
        const lm::Signature a =
            load_signature(file_a, x_a_um ? x_a_um : x_um, params, swap_axes);
        const lm::Signature b =
            load_signature(file_b, x_b_um ? x_b_um : x_um, params, swap_axes);
        const lm::ComparisonResult result = lm::compare_signatures(a, b, params);
        json j = {{"schema_version", 1},
                  {"id_a", result.features.id_a},
                  {"id_b", result.features.id_b},
                  {"lag", result.aligned.lag},
                  {"overlap_n", result.aligned.overlap_n},
                  {"features", features_json(result.features)}};
        if (!model_path.empty()) {
            const lm::Forest forest = load_model(model_path);
            const auto values = result.features.values();
            Eigen::RowVectorXd row(7);
            for (int c = 0; c < 7; ++c) row[c] = values[static_cast<std::size_t>(c)];
            const double p = lm::predict(forest, row);
            j["probability"] = p;
            j["prediction"] = p >= params.cutoff ? "match" : "nonmatch";
        }
        emit(out_path, dump(j));
    });

    // train
    auto* train = app.add_subcommand("train", "fit a random forest on a feature CSV");
    train->add_option("--features", features_path, "labeled feature CSV")->required();
    train->add_option("--out", out_path, "model JSON path")->required();
    flags.add_model(train);
    train->callback([&] {
        const auto rows = lm::csv::read_features(features_path);
        auto [x, y] = design_matrix(rows);
        if (y.empty() || std::count(y.begin(), y.end(), 1) == 0 ||
            std::count(y.begin(), y.end(), 0) == 0)
            lm::fail("one-class-only", "training needs labeled rows of both classes");
        lm::ForestOptions opts;
        opts.n_trees = params.n_trees;
        opts.mtry = params.mtry;
        opts.min_leaf = params.min_leaf;
        opts.max_depth = params.max_depth;
        opts.seed = params.seed;
        opts.jobs = jobs;
        const lm::Forest forest =
            lm::fit_forest(x, y, {lm::kFeatureNames.begin(), lm::kFeatureNames.end()}, opts);
        lm::csv::write_file(out_path, lm::forest_to_json(forest));
        json importance = json::array();
        for (const auto& [name, value] : lm::importance_table(forest))
            importance.push_back({{"feature", name}, {"mean_decrease_gini", value}});
        std::cout << dump(json{{"schema_version", 1},
                               {"n_rows", y.size()},
                               {"oob",
                                {{"weighted", forest.oob.weighted},
                                 {"false_positive", forest.oob.false_positive},
                                 {"false_negative", forest.oob.false_negative},
                                 {"n_scored", forest.oob.n_scored},
                                 {"n_excluded", forest.oob.n_excluded}}},
                               {"importance", importance}});
    });
    train->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "score a feature CSV with a model");
    predict_cmd->add_option("--model", model_path, "forest JSON")->required();
    predict_cmd->add_option("--features", features_path, "feature CSV")->required();
    predict_cmd->add_option("--out", out_path, "write here instead of stdout");
    flags.add_decision(predict_cmd);
    predict_cmd->callback([&] {
        const auto rows = lm::csv::read_features(features_path);
        emit(out_path, predictions_csv(rows, load_model(model_path), params.cutoff));
    });

    // study
    auto* study = app.add_subcommand("study", "run a manifest corpus end to end");
    study->add_option("--manifest", manifest_path, "path,study,role,barrel,bullet,land CSV")
        ->required();
    study->add_option("--pairs", pairs_mode, "all or known-unknown")
        ->check(CLI::IsMember({"all", "known-unknown"}))
        ->capture_default_str();
    study->add_option("--model", model_path, "forest JSON; default trains on the labeled pairs");
    study->add_option("--out", out_path, "output directory")->required();
    study->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    study->add_option("--x", x_um, "fixed extraction height, µm; default per-land stability scan");
    flags.add_extraction(study);
    flags.add_model(study);
    flags.add_decision(study);
    study->callback([&] {
        lm::StudyConfig cfg;
        cfg.pairs = pairs_mode == "all" ? lm::PairMode::all : lm::PairMode::known_unknown;
        cfg.params = params;
        cfg.jobs = jobs;
        cfg.fixed_x = x_um;
        if (!model_path.empty()) cfg.model_json = read_text_file(model_path);
        const auto manifest = lm::read_manifest(manifest_path);
        const auto base_dir = std::filesystem::path(manifest_path).parent_path();
        const lm::StudyResult result = lm::run_study(manifest, base_dir, cfg);
        lm::write_study_outputs(result, out_path);
        int flagged = 0;
        for (const lm::LandStatus& land : result.lands) flagged += land.flagged ? 1 : 0;
        std::cerr << "lands " << result.lands.size() << " (" << flagged << " flagged), pairs "
                  << result.features.size() << ", bullet errors " << result.bullet_errors << "\n";
    });

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with truth manifest");
    synth->add_option("--out", out_path, "output directory")->required();
    synth->add_option("--barrels", barrels, "number of barrels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--bullets-per-barrel", bullets_per_barrel, "shots per barrel")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--seed", params.seed, "RNG seed")->capture_default_str();
    synth->add_option("--noise-sd", noise_sd, "measurement noise, µm")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--damaged-lands", damaged_lands,
                      "this many lands, in generation order, get a scratch band")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->callback([&] {
        std::filesystem::create_directories(out_path);
        std::vector<lm::ManifestEntry> manifest;
        int written = 0;
        for (int b = 1; b <= barrels; ++b) {
            const std::string barrel_id = "B" + std::to_string(b);
            const lm::BarrelModel barrel = lm::make_barrel(
                barrel_id, lm::Xoshiro256::derive_seed(params.seed, static_cast<std::uint64_t>(b)));
            for (int k = 1; k <= bullets_per_barrel; ++k) {
                lm::ShotConfig cfg;
                cfg.shot_id = "S" + std::to_string(k);
                cfg.noise_sd = noise_sd;
                cfg.seed = lm::Xoshiro256::derive_seed(
                    params.seed,
                    1000 + static_cast<std::uint64_t>((b - 1) * bullets_per_barrel + (k - 1)));
                for (int land = 0; land < 6; ++land) {
                    lm::ShotConfig land_cfg = cfg;
                    land_cfg.damage = written < damaged_lands;
                    const lm::Surface surface = lm::fire_land(barrel, land_cfg, land);
                    const std::string name = surface.meta.id + ".x3p";
                    lm::write_x3p(surface, std::filesystem::path(out_path) / name);
                    manifest.push_back({name, "synth", k == 1 ? "known" : "unknown", barrel_id,
                                        barrel_id + "-S" + std::to_string(k),
                                        std::to_string(land + 1)});
                    written += 1;
                }
            }
        }
        lm::csv::write_file(std::filesystem::path(out_path) / "manifest.csv",
                            lm::manifest_csv(manifest));
        std::cerr << "wrote " << written << " surfaces and manifest.csv to " << out_path << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const lm::Error& e) {
        std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
