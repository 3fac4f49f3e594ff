#include "landmatch/zip.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "landmatch/error.hpp"

namespace landmatch::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

std::uint16_t rd16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t rd32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void wr16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void wr32(std::string& out, std::uint32_t v) {
    wr16(out, static_cast<std::uint16_t>(v & 0xffff));
    wr16(out, static_cast<std::uint16_t>((v >> 16) & 0xffff));
}

std::uint32_t crc_of(std::string_view data) {
    return static_cast<std::uint32_t>(
        ::crc32(0, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

std::string inflate_raw(std::string_view comp, std::size_t expected_size) {
    std::string out(expected_size, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) fail("archive-corrupt", "inflate init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(comp.data()));
    zs.avail_in = static_cast<uInt>(comp.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const std::size_t produced = out.size() - zs.avail_out;
    inflateEnd(&zs);
    if ((rc != Z_STREAM_END && rc != Z_OK) || produced != expected_size)
        fail("archive-corrupt", "deflate stream truncated or malformed");
    return out;
}

std::string deflate_raw(std::string_view data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        fail("io-failure", "deflate init failed");
    std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    out.resize(out.size() - zs.avail_out);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) fail("io-failure", "deflate failed");
    return out;
}

}  // namespace

const std::string* Archive::find(std::string_view name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e.data;
    return nullptr;
}

Archive parse_archive(std::string_view bytes) {
    const auto* base = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    if (n < 22) fail("archive-corrupt", "file too small for a ZIP archive");

    // End-of-central-directory record: scan backwards past any archive comment.
    std::size_t eocd = std::string_view::npos;
    const std::size_t scan_floor = n >= 22 + 65535 ? n - 22 - 65535 : 0;
    for (std::size_t pos = n - 22; ; --pos) {
        if (rd32(base + pos) == kEndSig) {
            eocd = pos;
            break;
        }
        if (pos == scan_floor) break;
    }
    if (eocd == std::string_view::npos)
        fail("archive-corrupt", "end-of-central-directory record not found");

    const std::uint16_t entry_count = rd16(base + eocd + 10);
    const std::uint32_t cd_size = rd32(base + eocd + 12);
    const std::uint32_t cd_offset = rd32(base + eocd + 16);
    if (static_cast<std::size_t>(cd_offset) + cd_size > n)
        fail("archive-corrupt", "central directory out of bounds");

    Archive ar;
    std::size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < entry_count; ++i) {
        if (pos + 46 > n || rd32(base + pos) != kCentralSig)
            fail("archive-corrupt", "bad central directory entry");
        const std::uint16_t method = rd16(base + pos + 10);
        const std::uint32_t crc = rd32(base + pos + 16);
        const std::uint32_t comp_size = rd32(base + pos + 20);
        const std::uint32_t uncomp_size = rd32(base + pos + 24);
        const std::uint16_t name_len = rd16(base + pos + 28);
        const std::uint16_t extra_len = rd16(base + pos + 30);
        const std::uint16_t comment_len = rd16(base + pos + 32);
        const std::uint32_t local_offset = rd32(base + pos + 42);
        if (pos + 46 + name_len > n) fail("archive-corrupt", "truncated entry name");
        std::string name(bytes.substr(pos + 46, name_len));
        pos += 46u + name_len + extra_len + comment_len;

        if (static_cast<std::size_t>(local_offset) + 30 > n || rd32(base + local_offset) != kLocalSig)
            fail("archive-corrupt", "bad local header for '" + name + "'");
        const std::uint16_t lname = rd16(base + local_offset + 26);
        const std::uint16_t lextra = rd16(base + local_offset + 28);
        const std::size_t data_start = static_cast<std::size_t>(local_offset) + 30 + lname + lextra;
        if (data_start + comp_size > n) fail("archive-corrupt", "truncated entry data");
        const std::string_view comp = bytes.substr(data_start, comp_size);

        std::string data;
        if (method == 0) {
            if (comp_size != uncomp_size) fail("archive-corrupt", "stored entry size mismatch");
            data.assign(comp);
        } else if (method == 8) {
            data = inflate_raw(comp, uncomp_size);
        } else {
            fail("archive-corrupt", "unsupported compression method for '" + name + "'");
        }
        if (crc_of(data) != crc) fail("archive-corrupt", "CRC mismatch for '" + name + "'");
        ar.entries.push_back({std::move(name), std::move(data)});
    }
    return ar;
}

Archive read_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-failure", "cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) fail("io-failure", "read error on '" + path + "'");
    return parse_archive(bytes);
}

std::string build_archive(const std::vector<Entry>& entries) {
    if (entries.size() > std::numeric_limits<std::uint16_t>::max())
        fail("io-failure", "too many archive entries");
    std::string out;
    struct Central {
        std::string name;
        std::uint32_t crc, comp_size, uncomp_size, offset;
        std::uint16_t method;
    };
    std::vector<Central> centrals;
    centrals.reserve(entries.size());

    for (const auto& e : entries) {
        std::string comp = deflate_raw(e.data);
        std::uint16_t method = 8;
        if (comp.size() >= e.data.size()) {  // incompressible: store
            comp = e.data;
            method = 0;
        }
        const auto offset = static_cast<std::uint32_t>(out.size());
        const std::uint32_t crc = crc_of(e.data);
        wr32(out, kLocalSig);
        wr16(out, 20);      // version needed
        wr16(out, 0);       // flags
        wr16(out, method);
        wr16(out, 0);       // mod time (fixed for determinism)
        wr16(out, 0x21);    // mod date: 1980-01-01
        wr32(out, crc);
        wr32(out, static_cast<std::uint32_t>(comp.size()));
        wr32(out, static_cast<std::uint32_t>(e.data.size()));
        wr16(out, static_cast<std::uint16_t>(e.name.size()));
        wr16(out, 0);       // extra length
        out += e.name;
        out += comp;
        centrals.push_back({e.name, crc, static_cast<std::uint32_t>(comp.size()),
                            static_cast<std::uint32_t>(e.data.size()), offset, method});
    }

    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    for (const auto& c : centrals) {
        wr32(out, kCentralSig);
        wr16(out, 20);  // version made by
        wr16(out, 20);  // version needed
        wr16(out, 0);   // flags
        wr16(out, c.method);
        wr16(out, 0);
        wr16(out, 0x21);
        wr32(out, c.crc);
        wr32(out, c.comp_size);
        wr32(out, c.uncomp_size);
        wr16(out, static_cast<std::uint16_t>(c.name.size()));
        wr16(out, 0);  // extra
        wr16(out, 0);  // comment
        wr16(out, 0);  // disk number
        wr16(out, 0);  // internal attrs
        wr32(out, 0);  // external attrs
        wr32(out, c.offset);
        out += c.name;
    }
    const auto cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;

    wr32(out, kEndSig);
    wr16(out, 0);
    wr16(out, 0);
    wr16(out, static_cast<std::uint16_t>(centrals.size()));
    wr16(out, static_cast<std::uint16_t>(centrals.size()));
    wr32(out, cd_size);
    wr32(out, cd_offset);
    wr16(out, 0);  // comment length
    return out;
}

void write_archive(const std::string& path, const std::vector<Entry>& entries) {
    const std::string bytes = build_archive(entries);
    std::ofstream outf(path, std::ios::binary | std::ios::trunc);
    if (!outf) fail("io-failure", "cannot create '" + path + "'");
    outf.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!outf.good()) fail("io-failure", "write error on '" + path + "'");
}

}  // namespace landmatch::zip
