#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hazardchat::ingest::html {

/// Minimal DOM node. Text nodes have an empty tag.
struct Element {
    std::string tag;
    std::map<std::string, std::string> attributes;
    std::vector<Element> children;
    std::string text;

    bool is_text() const noexcept { return tag.empty(); }
    bool has_class(std::string_view cls) const;
    const std::string* attribute(std::string_view name) const;
};

/// Lenient HTML parser: tolerates unclosed elements, stray end tags, comments,
/// doctype and raw-text script/style blocks. Tags and attribute names are
/// lowercased; entities in text and attribute values are decoded.
Element parse(std::string_view document);

using Predicate = std::function<bool(const Element&)>;

const Element* find_first(const Element& root, const Predicate& pred);
std::vector<const Element*> find_all(const Element& root, const Predicate& pred);

Predicate tag_is(std::string tag);
Predicate class_is(std::string tag, std::string cls);

/// Concatenated descendant text with whitespace runs collapsed to one space, trimmed.
std::string text_content(const Element& element);

std::string decode_entities(std::string_view text);

}  // namespace hazardchat::ingest::html
