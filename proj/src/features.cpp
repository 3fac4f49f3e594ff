#include "landmatch/features.hpp"

#include <algorithm>
#include <cmath>

#include "landmatch/error.hpp"

namespace landmatch {

double feature_D(const AlignedPair& pair) {
    if (pair.overlap_n < 1) fail("insufficient-overlap", "no overlap to difference");
    return std::sqrt((pair.f - pair.g).squaredNorm() / static_cast<double>(pair.overlap_n));
}

double feature_S(const std::vector<StriaMatch>& matches) {
    double s = 0;
    for (const StriaMatch& m : matches) {
        if (!m.matched) continue;
        double sum = 0;
        for (const auto& [source, e] : m.members) sum += std::abs(e.height);
        s += sum / static_cast<double>(m.members.size());
    }
    return s;
}

RunCounts feature_runs(const std::vector<StriaMatch>& matches) {
    RunCounts counts;
    int run_m = 0, run_n = 0;
    for (const StriaMatch& m : matches) {
        if (m.matched) {
            counts.n_matches += 1;
            run_m += 1;
            run_n = 0;
        } else {
            counts.n_nonmatches += 1;
            run_n += 1;
            run_m = 0;
        }
        counts.cms = std::max(counts.cms, run_m);
        counts.cnms = std::max(counts.cnms, run_n);
    }
    return counts;
}

FeatureVector extract_features(const AlignedPair& pair, const std::vector<StriaMatch>& matches) {
    const RunCounts runs = feature_runs(matches);
    FeatureVector fv;
    fv.ccf = pair.ccf;
    fv.n_matches = runs.n_matches;
    fv.S = feature_S(matches);
    fv.n_nonmatches = runs.n_nonmatches;
    fv.D = feature_D(pair);
    fv.cms = runs.cms;
    fv.cnms = runs.cnms;
    return fv;
}

std::string to_string(PairLabel label) {
    switch (label) {
        case PairLabel::match: return "match";
        case PairLabel::nonmatch: return "nonmatch";
        default: return "unknown";
    }
}

PairLabel pair_label_from_string(const std::string& text) {
    if (text == "match") return PairLabel::match;
    if (text == "nonmatch") return PairLabel::nonmatch;
    if (text == "unknown" || text.empty()) return PairLabel::unknown;
    fail("malformed-label", "unknown pair label '" + text + "'");
}

}  // namespace landmatch
