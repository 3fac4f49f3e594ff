#include "landmatch/csv.hpp"

#include <fstream>
#include <sstream>

#include "landmatch/error.hpp"
#include "landmatch/text.hpp"

namespace landmatch::csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::string(trim(field)));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::string(trim(field)));
    return fields;
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("io-failure", "cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        rows.push_back(split_line(line));
    }
    return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("io-failure", "cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) fail("io-failure", "cannot write " + path.string());
}

std::string profile_csv(const Profile& profile) {
    std::string out = "y_um,value_um\n";
    for (Eigen::Index i = 0; i < profile.ys.size(); ++i)
        out += format_double(profile.ys[i]) + "," + format_double(profile.values[i]) + "\n";
    return out;
}

std::string signature_csv(const Signature& sig) {
    std::string out = "y_um,residual_um\n";
    for (Eigen::Index i = 0; i < sig.ys.size(); ++i)
        out += format_double(sig.ys[i]) + "," + format_double(sig.residuals[i]) + "\n";
    return out;
}

Signature read_signature(const std::filesystem::path& path) {
    const auto rows = read_table(path);
    if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "y_um")
        fail("malformed-csv", path.string() + " is not a signature CSV (want y_um,residual_um)");
    Signature sig;
    const auto n = static_cast<Eigen::Index>(rows.size()) - 1;
    if (n < 2) fail("malformed-csv", path.string() + " has fewer than 2 samples");
    sig.ys.resize(n);
    sig.residuals.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i) + 1];
        if (row.size() != 2) fail("malformed-csv", "bad row in " + path.string());
        sig.ys[i] = parse_double(row[0], "malformed-csv");
        sig.residuals[i] = parse_double(row[1], "malformed-csv");
    }
    for (Eigen::Index i = 1; i < n; ++i)
        if (!(sig.ys[i] > sig.ys[i - 1]))
            fail("malformed-csv", "y positions must be strictly increasing in " + path.string());
    sig.increment_y = n > 1 ? sig.ys[1] - sig.ys[0] : 0.0;
    sig.source_id = path.stem().string();
    return sig;
}

std::string extrema_csv(const std::vector<Extremum>& extrema) {
    std::string out = "kind,location_um,height_um,lo_um,hi_um\n";
    for (const Extremum& e : extrema) {
        out += e.kind == ExtremumKind::peak ? "peak" : "valley";
        out += "," + format_double(e.location) + "," + format_double(e.height) + "," +
               format_double(e.lo) + "," + format_double(e.hi) + "\n";
    }
    return out;
}

std::string feature_row(const FeatureVector& fv) {
    std::string out = fv.id_a + "," + fv.id_b + "," + to_string(fv.label);
    for (double v : fv.values()) out += "," + format_double(v);
    return out + "\n";
}

std::string features_csv(const std::vector<FeatureVector>& rows) {
    std::string out = std::string(kFeatureHeader) + "\n";
    for (const FeatureVector& fv : rows) out += feature_row(fv);
    return out;
}

std::vector<FeatureVector> read_features(const std::filesystem::path& path) {
    const auto rows = read_table(path);
    if (rows.empty() || rows[0] != split_line(kFeatureHeader))
        fail("malformed-csv", path.string() + " does not have the feature CSV header");
    std::vector<FeatureVector> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 10) fail("malformed-csv", "bad feature row in " + path.string());
        FeatureVector fv;
        fv.id_a = row[0];
        fv.id_b = row[1];
        fv.label = pair_label_from_string(row[2]);
        fv.ccf = parse_double(row[3], "malformed-csv");
        fv.n_matches = parse_double(row[4], "malformed-csv");
        fv.S = parse_double(row[5], "malformed-csv");
        fv.n_nonmatches = parse_double(row[6], "malformed-csv");
        fv.D = parse_double(row[7], "malformed-csv");
        fv.cms = parse_double(row[8], "malformed-csv");
        fv.cnms = parse_double(row[9], "malformed-csv");
        out.push_back(std::move(fv));
    }
    return out;
}

}  // namespace landmatch::csv
