#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace landmatch::xml {

/// Element tree produced by parse(). Names are local names: a namespace
/// prefix such as "p:" is stripped, so lookups work across x3p writers that
/// choose different prefixes.
struct Node {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::string text;  // concatenated character data, trimmed
    std::vector<Node> children;

    const Node* child(std::string_view name) const;
    /// Slash-separated descent, e.g. find("Record1/Axes/CX").
    const Node* find(std::string_view path) const;
    const std::string* attr(std::string_view name) const;
};

/// Parses an XML document with expat. Throws Error("malformed-metadata").
Node parse(std::string_view doc);

/// Escapes &, <, >, " for element/attribute content.
std::string escape(std::string_view raw);

}  // namespace landmatch::xml
