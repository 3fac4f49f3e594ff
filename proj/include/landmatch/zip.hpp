#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace landmatch::zip {

struct Entry {
    std::string name;
    std::string data;
};

/// In-memory view of a ZIP archive. Entries keep archive order.
struct Archive {
    std::vector<Entry> entries;

    const std::string* find(std::string_view name) const;
};

/// Parses a ZIP archive (stored and deflate entries; no ZIP64). CRCs are
/// checked against the central directory. Throws Error("io-failure") or
/// Error("archive-corrupt").
Archive read_archive(const std::string& path);
Archive parse_archive(std::string_view bytes);

/// Writes a ZIP archive with deflate compression. Header timestamps are
/// fixed so identical inputs produce byte-identical archives.
void write_archive(const std::string& path, const std::vector<Entry>& entries);
std::string build_archive(const std::vector<Entry>& entries);

}  // namespace landmatch::zip
