#include "landmatch/x3p.hpp"

#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "landmatch/error.hpp"
#include "landmatch/md5.hpp"
#include "landmatch/text.hpp"
#include "landmatch/xml.hpp"
#include "landmatch/zip.hpp"

namespace landmatch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// µm per declared unit. ISO5436-2 prescribes meters; our own writer tags
// axes with unit="um" so µm grids round-trip bit for bit.
double unit_scale(const std::string* unit) {
    if (!unit || *unit == "m") return 1e6;
    if (*unit == "mm") return 1e3;
    if (*unit == "um" || *unit == "µm") return 1.0;
    if (*unit == "nm") return 1e-3;
    fail("malformed-metadata", "unknown axis unit '" + *unit + "'");
}

const xml::Node& require(const xml::Node& root, std::string_view path) {
    const xml::Node* n = root.find(path);
    if (!n) fail("malformed-metadata", "main.xml is missing " + std::string(path));
    return *n;
}

bool is_hex_digest(std::string_view s) {
    if (s.size() < 32) return false;
    for (int i = 0; i < 32; ++i) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

std::string lower32(std::string_view s) {
    std::string out;
    for (int i = 0; i < 32 && i < static_cast<int>(s.size()); ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
    return out;
}

void warn(const X3pReadOptions& opts, const std::string& message) {
    if (opts.warn) opts.warn(message);
}

// Collects leaf elements under `node` as (slash-path, text) pairs.
void collect_leaves(const xml::Node& node, const std::string& prefix,
                    std::vector<std::pair<std::string, std::string>>& out) {
    for (const xml::Node& child : node.children) {
        std::string path = prefix + "/" + child.name;
        if (child.children.empty())
            out.emplace_back(path, child.text);
        else
            collect_leaves(child, path, out);
    }
}

// Minimal ordered tree used to rebuild preserved Record2 nesting on write.
struct TreeNode {
    std::string name;
    std::string text;
    std::vector<TreeNode> kids;

    TreeNode& descend(std::string_view path) {
        auto slash = path.find('/');
        std::string_view head = path.substr(0, slash);
        for (TreeNode& k : kids)
            if (k.name == head) return slash == std::string_view::npos ? k : k.descend(path.substr(slash + 1));
        kids.push_back(TreeNode{std::string(head), "", {}});
        TreeNode& k = kids.back();
        return slash == std::string_view::npos ? k : k.descend(path.substr(slash + 1));
    }

    void serialize(std::string& out, int depth) const {
        out.append(static_cast<std::size_t>(2 * depth), ' ');
        out += "<" + name + ">";
        if (kids.empty()) {
            out += xml::escape(text);
        } else {
            out += "\n";
            for (const TreeNode& k : kids) k.serialize(out, depth + 1);
            out.append(static_cast<std::size_t>(2 * depth), ' ');
        }
        out += "</" + name + ">\n";
    }
};

}  // namespace

Surface parse_x3p(const std::string& bytes, std::string id, const X3pReadOptions& opts) {
    zip::Archive archive = zip::parse_archive(bytes);

    const std::string* main_xml = archive.find("main.xml");
    if (!main_xml) fail("archive-missing-member", "archive has no main.xml");

    if (const std::string* sum = archive.find("md5checksum.hex")) {
        if (is_hex_digest(*sum)) {
            if (lower32(*sum) != md5_hex(*main_xml))
                warn(opts, "md5checksum.hex does not match main.xml");
        } else {
            warn(opts, "md5checksum.hex is not a hex digest");
        }
    } else {
        warn(opts, "archive has no md5checksum.hex; skipping metadata checksum");
    }

    xml::Node root = xml::parse(*main_xml);

    const xml::Node& feature = require(root, "Record1/FeatureType");
    if (feature.text != "SUR")
        fail("malformed-metadata", "unsupported FeatureType '" + feature.text + "' (need SUR)");

    const xml::Node& cx = require(root, "Record1/Axes/CX/Increment");
    const xml::Node& cy = require(root, "Record1/Axes/CY/Increment");
    const xml::Node& cz = require(root, "Record1/Axes/CZ");
    double scale_x = unit_scale(cx.attr("unit"));
    double scale_y = unit_scale(cy.attr("unit"));
    const xml::Node* cz_inc = cz.child("Increment");
    double scale_z = unit_scale(cz_inc ? cz_inc->attr("unit") : nullptr);

    double increment_x = parse_double(cx.text, "malformed-metadata") * scale_x;
    double increment_y = parse_double(cy.text, "malformed-metadata") * scale_y;
    if (!(increment_x > 0) || !std::isfinite(increment_x) || !(increment_y > 0) ||
        !std::isfinite(increment_y))
        fail("malformed-metadata", "axis increments must be positive and finite");

    const std::string& sample_type = require(root, "Record1/Axes/CZ/DataType").text;
    if (sample_type != "D" && sample_type != "F")
        fail("unsupported-sample-type", "CZ DataType '" + sample_type + "' (need D or F)");
    const std::size_t sample_bytes = sample_type == "D" ? 8 : 4;

    auto size_x = static_cast<Eigen::Index>(
        parse_int(require(root, "Record3/MatrixDimension/SizeX").text, "malformed-metadata"));
    auto size_y = static_cast<Eigen::Index>(
        parse_int(require(root, "Record3/MatrixDimension/SizeY").text, "malformed-metadata"));
    auto size_z = static_cast<Eigen::Index>(
        parse_int(require(root, "Record3/MatrixDimension/SizeZ").text, "malformed-metadata"));
    if (size_z != 1) fail("malformed-metadata", "SizeZ must be 1 for areal scans");
    if (size_x < 2 || size_y < 2) fail("malformed-metadata", "grid must be at least 2x2");

    const std::string& data_name = require(root, "Record3/DataLink/PointDataLink").text;
    const std::string* data = archive.find(data_name);
    if (!data) fail("archive-missing-member", "archive has no " + data_name);

    if (const xml::Node* point_sum = root.find("Record3/DataLink/MD5ChecksumPointData")) {
        if (is_hex_digest(point_sum->text) && lower32(point_sum->text) != md5_hex(*data))
            warn(opts, "MD5ChecksumPointData does not match " + data_name);
    }

    const auto n = static_cast<std::size_t>(size_x) * static_cast<std::size_t>(size_y);
    if (data->size() != n * sample_bytes)
        fail("dimension-mismatch", "declared " + std::to_string(size_x) + "x" + std::to_string(size_y) +
                                       " grid needs " + std::to_string(n * sample_bytes) +
                                       " payload bytes, found " + std::to_string(data->size()));

    // Sample order is x fastest, matching Eigen's column-major (x, y) layout.
    Eigen::MatrixXd heights(size_x, size_y);
    const auto* raw = reinterpret_cast<const unsigned char*>(data->data());
    for (std::size_t k = 0; k < n; ++k) {
        double v;
        if (sample_bytes == 8) {
            std::uint64_t bits = 0;
            for (int b = 7; b >= 0; --b) bits = (bits << 8) | raw[k * 8 + static_cast<std::size_t>(b)];
            std::memcpy(&v, &bits, 8);
        } else {
            std::uint32_t bits = 0;
            for (int b = 3; b >= 0; --b) bits = (bits << 8) | raw[k * 4 + static_cast<std::size_t>(b)];
            float f;
            std::memcpy(&f, &bits, 4);
            v = f;
        }
        heights.data()[k] = std::isfinite(v) ? v * scale_z : kNaN;
    }

    if (const xml::Node* valid_link = root.find("Record3/DataLink/ValidPointsLink")) {
        const std::string* valid = archive.find(valid_link->text);
        if (!valid) fail("archive-missing-member", "archive has no " + valid_link->text);
        if (valid->size() * 8 < n)
            fail("dimension-mismatch", "valid-points bitmask too short for grid");
        const auto* bits = reinterpret_cast<const unsigned char*>(valid->data());
        for (std::size_t k = 0; k < n; ++k)
            if (!(bits[k / 8] >> (k % 8) & 1u)) heights.data()[k] = kNaN;
    }

    Surface surface;
    surface.meta.size_x = size_x;
    surface.meta.size_y = size_y;
    surface.meta.increment_x = increment_x;
    surface.meta.increment_y = increment_y;
    surface.meta.id = std::move(id);
    if (const xml::Node* r1 = root.child("Record1")) {
        if (const xml::Node* rev = r1->child("Revision"))
            surface.meta.extra.emplace_back("Record1/Revision", rev->text);
    }
    if (const xml::Node* r2 = root.child("Record2")) collect_leaves(*r2, "Record2", surface.meta.extra);
    surface.heights = std::move(heights);

    if (opts.swap_axes) {
        surface.heights = surface.heights.transpose().eval();
        std::swap(surface.meta.size_x, surface.meta.size_y);
        std::swap(surface.meta.increment_x, surface.meta.increment_y);
    }
    return surface;
}

Surface read_x3p(const std::filesystem::path& path, const X3pReadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-failure", "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) fail("io-failure", "cannot read " + path.string());
    return parse_x3p(buf.str(), path.stem().string(), opts);
}

std::string build_x3p(const Surface& surface) {
    const X3pMeta& meta = surface.meta;
    if (meta.size_x < 2 || meta.size_y < 2)
        fail("dimension-mismatch", "surface must be at least 2x2");
    if (surface.heights.rows() != meta.size_x || surface.heights.cols() != meta.size_y)
        fail("dimension-mismatch", "height grid does not match declared size");
    if (!(meta.increment_x > 0) || !(meta.increment_y > 0) || !std::isfinite(meta.increment_x) ||
        !std::isfinite(meta.increment_y))
        fail("malformed-metadata", "axis increments must be positive and finite");

    const auto n = static_cast<std::size_t>(meta.size_x) * static_cast<std::size_t>(meta.size_y);
    std::string data(n * 8, '\0');
    for (std::size_t k = 0; k < n; ++k) {
        double v = surface.heights.data()[k];
        if (!std::isnan(v) && !std::isfinite(v))
            fail("malformed-metadata", "unmasked heights must be finite");
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int b = 0; b < 8; ++b)
            data[k * 8 + static_cast<std::size_t>(b)] = static_cast<char>(bits >> (8 * b) & 0xff);
    }

    auto extra_text = [&meta](std::string_view path, const char* fallback) {
        for (const auto& [key, value] : meta.extra)
            if (key == path) return value;
        return std::string(fallback);
    };

    std::string xml_doc;
    xml_doc += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    xml_doc += "<p:ISO5436_2 xmlns:p=\"http://www.opengps.eu/2008/ISO5436_2\">\n";
    xml_doc += "  <Record1>\n";
    xml_doc += "    <Revision>" + xml::escape(extra_text("Record1/Revision", "ISO5436 - 2000")) +
               "</Revision>\n";
    xml_doc += "    <FeatureType>SUR</FeatureType>\n";
    xml_doc += "    <Axes>\n";
    auto axis = [](const char* name, const char* type, const std::string& increment) {
        return std::string("      <") + name + "><AxisType>" + type +
               "</AxisType><DataType>D</DataType><Increment unit=\"um\">" + increment +
               "</Increment><Offset unit=\"um\">0</Offset></" + name + ">\n";
    };
    xml_doc += axis("CX", "I", format_double(meta.increment_x));
    xml_doc += axis("CY", "I", format_double(meta.increment_y));
    xml_doc += axis("CZ", "A", "1");
    xml_doc += "    </Axes>\n";
    xml_doc += "  </Record1>\n";

    TreeNode record2{"Record2", "", {}};
    for (const auto& [key, value] : meta.extra) {
        if (key.rfind("Record2/", 0) != 0) continue;
        record2.descend(key.substr(8)).text = value;
    }
    if (!record2.kids.empty()) {
        std::string r2;
        record2.serialize(r2, 1);
        xml_doc += r2;
    }

    xml_doc += "  <Record3>\n";
    xml_doc += "    <MatrixDimension><SizeX>" + std::to_string(meta.size_x) + "</SizeX><SizeY>" +
               std::to_string(meta.size_y) + "</SizeY><SizeZ>1</SizeZ></MatrixDimension>\n";
    xml_doc += "    <DataLink><PointDataLink>bindata/data.bin</PointDataLink><MD5ChecksumPointData>" +
               md5_hex(data) + "</MD5ChecksumPointData></DataLink>\n";
    xml_doc += "  </Record3>\n";
    xml_doc += "  <Record4><ChecksumFile>md5checksum.hex</ChecksumFile></Record4>\n";
    xml_doc += "</p:ISO5436_2>\n";

    std::vector<zip::Entry> entries;
    entries.push_back({"main.xml", xml_doc});
    entries.push_back({"md5checksum.hex", md5_hex(xml_doc) + " *main.xml\n"});
    entries.push_back({"bindata/data.bin", std::move(data)});
    return zip::build_archive(entries);
}

void write_x3p(const Surface& surface, const std::filesystem::path& path) {
    std::string bytes = build_x3p(surface);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("io-failure", "cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out.good()) fail("io-failure", "cannot write " + path.string());
}

}  // namespace landmatch
