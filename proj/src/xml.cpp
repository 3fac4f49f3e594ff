#include "landmatch/xml.hpp"

#include <expat.h>

#include <cctype>
#include <cstring>

#include "landmatch/error.hpp"

namespace landmatch::xml {

namespace {

std::string local_name(const char* qualified) {
    const char* colon = std::strrchr(qualified, ':');
    return colon ? std::string(colon + 1) : std::string(qualified);
}

struct ParseState {
    Node root;
    std::vector<Node*> stack;
};

void XMLCALL on_start(void* user, const char* name, const char** attrs) {
    auto* st = static_cast<ParseState*>(user);
    Node* parent = st->stack.empty() ? nullptr : st->stack.back();
    Node node;
    node.name = local_name(name);
    for (const char** a = attrs; *a; a += 2)
        node.attrs.emplace_back(local_name(a[0]), a[1]);
    if (!parent) {
        st->root = std::move(node);
        st->stack.push_back(&st->root);
    } else {
        parent->children.push_back(std::move(node));
        st->stack.push_back(&parent->children.back());
    }
}

void XMLCALL on_end(void* user, const char*) {
    auto* st = static_cast<ParseState*>(user);
    if (!st->stack.empty()) st->stack.pop_back();
}

void XMLCALL on_text(void* user, const char* data, int len) {
    auto* st = static_cast<ParseState*>(user);
    if (!st->stack.empty()) st->stack.back()->text.append(data, static_cast<std::size_t>(len));
}

void trim_text(Node& node) {
    auto& t = node.text;
    std::size_t b = 0, e = t.size();
    while (b < e && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(t[e - 1]))) --e;
    t = t.substr(b, e - b);
    for (auto& c : node.children) trim_text(c);
}

}  // namespace

const Node* Node::child(std::string_view want) const {
    for (const auto& c : children)
        if (c.name == want) return &c;
    return nullptr;
}

const Node* Node::find(std::string_view path) const {
    const Node* cur = this;
    while (!path.empty() && cur) {
        const auto slash = path.find('/');
        const auto head = path.substr(0, slash);
        cur = cur->child(head);
        path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash + 1);
    }
    return cur;
}

const std::string* Node::attr(std::string_view want) const {
    for (const auto& [k, v] : attrs)
        if (k == want) return &v;
    return nullptr;
}

Node parse(std::string_view doc) {
    XML_Parser parser = XML_ParserCreate(nullptr);
    if (!parser) fail("malformed-metadata", "XML parser allocation failed");
    ParseState st;
    XML_SetUserData(parser, &st);
    XML_SetElementHandler(parser, on_start, on_end);
    XML_SetCharacterDataHandler(parser, on_text);
    const XML_Status status =
        XML_Parse(parser, doc.data(), static_cast<int>(doc.size()), /*isFinal=*/1);
    std::string err;
    if (status != XML_STATUS_OK)
        err = "XML parse error at line " + std::to_string(XML_GetCurrentLineNumber(parser)) +
              ": " + XML_ErrorString(XML_GetErrorCode(parser));
    XML_ParserFree(parser);
    if (!err.empty()) fail("malformed-metadata", err);
    if (st.root.name.empty()) fail("malformed-metadata", "empty XML document");
    trim_text(st.root);
    return std::move(st.root);
}

std::string escape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace landmatch::xml
