#include "landmatch/striae.hpp"

#include <algorithm>
#include <string>

#include "landmatch/error.hpp"
#include "landmatch/grooves.hpp"

namespace landmatch {

std::vector<Extremum> find_extrema(const Signature& sig, Eigen::Index smooth_s) {
    const Eigen::Index n = sig.residuals.size();
    if (n <= 2 * smooth_s)
        fail("too-short", "signature of " + std::to_string(n) +
                              " samples is too short for smoothing factor " +
                              std::to_string(smooth_s));

    const Eigen::VectorXd sm = rolling_mean(sig.residuals, smooth_s);

    // Sign changes of the first difference; a plateau between opposite signs
    // yields one extremum at the plateau centre.
    std::vector<Eigen::Index> locations;
    std::vector<ExtremumKind> kinds;
    int prev_sign = 0;
    Eigen::Index prev_idx = 0;  // index where the previous nonzero difference ended
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double d = sm[i + 1] - sm[i];
        const int sign = d > 0 ? 1 : d < 0 ? -1 : 0;
        if (sign == 0) continue;
        if (prev_sign != 0 && sign != prev_sign) {
            locations.push_back((prev_idx + 1 + i) / 2);
            kinds.push_back(prev_sign > 0 ? ExtremumKind::peak : ExtremumKind::valley);
        }
        prev_sign = sign;
        prev_idx = i;
    }
    if (locations.empty()) fail("no-extrema", "signature " + sig.source_id + " has no extrema");

    std::vector<Extremum> out(locations.size());
    for (std::size_t j = 0; j < locations.size(); ++j) {
        const double loc = sig.ys[locations[j]];
        const double prev = j == 0 ? sig.ys[0] : sig.ys[locations[j - 1]];
        const double next = j + 1 == locations.size() ? sig.ys[n - 1] : sig.ys[locations[j + 1]];
        out[j].kind = kinds[j];
        out[j].location = loc;
        out[j].height = sig.residuals[locations[j]];
        out[j].lo = loc - (loc - prev) / 3.0;
        out[j].hi = loc + (next - loc) / 3.0;
    }
    return out;
}

std::vector<StriaMatch> match_striae(const std::vector<Extremum>& ea,
                                     const std::vector<Extremum>& eb) {
    std::vector<std::pair<int, Extremum>> items;
    items.reserve(ea.size() + eb.size());
    for (const Extremum& e : ea) items.emplace_back(0, e);
    for (const Extremum& e : eb) items.emplace_back(1, e);
    std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
        if (x.second.lo != y.second.lo) return x.second.lo < y.second.lo;
        if (x.second.hi != y.second.hi) return x.second.hi < y.second.hi;
        return x.first < y.first;
    });

    std::vector<StriaMatch> out;
    for (const auto& item : items) {
        if (out.empty() || item.second.lo > out.back().hi) {
            out.emplace_back();
            out.back().lo = item.second.lo;
            out.back().hi = item.second.hi;
        } else {
            out.back().hi = std::max(out.back().hi, item.second.hi);
        }
        out.back().members.push_back(item);
    }

    for (StriaMatch& m : out) {
        int from_a = 0, from_b = 0;
        bool peaks = false, valleys = false;
        for (const auto& [source, e] : m.members) {
            (source == 0 ? from_a : from_b) += 1;
            (e.kind == ExtremumKind::peak ? peaks : valleys) = true;
        }
        m.kind = peaks && valleys ? MatchKind::mixed
                                  : (peaks ? MatchKind::peak : MatchKind::valley);
        m.matched = from_a == 1 && from_b == 1 && m.kind != MatchKind::mixed;
    }
    return out;
}

}  // namespace landmatch
