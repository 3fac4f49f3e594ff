#pragma once

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace landmatch {

// Metadata of an ISO5436-2 areal surface scan. Increments are stored in
// micrometers regardless of the unit declared by the file.
struct X3pMeta {
    Eigen::Index size_x = 0;  // samples along the bullet axis
    Eigen::Index size_y = 0;  // samples around the circumference
    double increment_x = 0;   // µm per sample along x
    double increment_y = 0;   // µm per sample along y
    std::string id;           // defaults to the file stem

    // Metadata leaves preserved verbatim for round-trip, keyed by slash path
    // under the document root (e.g. "Record2/Instrument/Model").
    std::vector<std::pair<std::string, std::string>> extra;
};

// Height grid in µm. heights(i, j) is the sample at x = i * increment_x,
// y = j * increment_y. Masked cells (scan dropouts) hold quiet NaN; every
// unmasked cell is finite.
struct Surface {
    X3pMeta meta;
    Eigen::MatrixXd heights;

    static bool masked(double v) { return std::isnan(v); }
    double x_at(Eigen::Index i) const { return static_cast<double>(i) * meta.increment_x; }
    double y_at(Eigen::Index j) const { return static_cast<double>(j) * meta.increment_y; }
};

struct X3pReadOptions {
    bool swap_axes = false;  // transpose for files whose axes are flipped
    std::function<void(const std::string&)> warn;  // checksum mismatches etc.
};

Surface read_x3p(const std::filesystem::path& path, const X3pReadOptions& opts = {});
Surface parse_x3p(const std::string& bytes, std::string id, const X3pReadOptions& opts = {});

void write_x3p(const Surface& surface, const std::filesystem::path& path);
std::string build_x3p(const Surface& surface);

}  // namespace landmatch
