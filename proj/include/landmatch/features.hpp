#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "landmatch/align.hpp"
#include "landmatch/striae.hpp"

namespace landmatch {

enum class PairLabel { match, nonmatch, unknown };

/// Serialization order of the seven comparison features. This order is the
/// contract between the feature CSV, the classifier and the model files.
inline constexpr std::array<const char*, 7> kFeatureNames = {
    "ccf", "n_matches", "S", "n_nonmatches", "D", "cms", "cnms"};

struct FeatureVector {
    std::string id_a, id_b;
    PairLabel label = PairLabel::unknown;
    double ccf = 0;
    double n_matches = 0;
    double S = 0;
    double n_nonmatches = 0;
    double D = 0;
    double cms = 0;
    double cnms = 0;

    std::array<double, 7> values() const { return {ccf, n_matches, S, n_nonmatches, D, cms, cnms}; }
};

/// Root-mean-square vertical difference between the aligned smoothed
/// signatures over their overlap.
double feature_D(const AlignedPair& pair);

/// Sum over matched striae of the mean absolute member height.
double feature_S(const std::vector<StriaMatch>& matches);

struct RunCounts {
    int cms = 0;          // longest run of matched striae
    int cnms = 0;         // longest run of non-matched striae
    int n_matches = 0;
    int n_nonmatches = 0;
};

/// Run statistics over the position-sorted match list.
RunCounts feature_runs(const std::vector<StriaMatch>& matches);

FeatureVector extract_features(const AlignedPair& pair, const std::vector<StriaMatch>& matches);

std::string to_string(PairLabel label);
PairLabel pair_label_from_string(const std::string& text);

}  // namespace landmatch
