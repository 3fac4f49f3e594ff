#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "landmatch/features.hpp"
#include "landmatch/profile.hpp"
#include "landmatch/striae.hpp"

namespace landmatch {

/// Minimal comma-separated tables: no quoting, values must not contain
/// commas or newlines. Numbers are written as shortest round-trip decimals.
namespace csv {

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path);
std::vector<std::string> split_line(const std::string& line);

void write_file(const std::filesystem::path& path, const std::string& content);

std::string profile_csv(const Profile& profile);
std::string signature_csv(const Signature& sig);
Signature read_signature(const std::filesystem::path& path);

std::string extrema_csv(const std::vector<Extremum>& extrema);

inline constexpr const char* kFeatureHeader = "id_a,id_b,label,ccf,n_matches,S,n_nonmatches,D,cms,cnms";
std::string feature_row(const FeatureVector& fv);
std::string features_csv(const std::vector<FeatureVector>& rows);
std::vector<FeatureVector> read_features(const std::filesystem::path& path);

}  // namespace csv

}  // namespace landmatch
