#include "hazardchat/html.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>

#include "hazardchat/model.hpp"

namespace hazardchat::ingest::html {

namespace {

const std::set<std::string, std::less<>> kVoid{"area", "base", "br", "col", "embed", "hr", "img", "input",
                                              "link", "meta", "source", "track", "wbr"};

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x110000) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Elements implicitly closed when a sibling of the same group opens.
bool closes_implicitly(std::string_view open, std::string_view incoming) {
    if (incoming == "li") return open == "li";
    if (incoming == "dt" || incoming == "dd") return open == "dt" || open == "dd";
    if (incoming == "td" || incoming == "th") return open == "td" || open == "th";
    if (incoming == "tr") return open == "tr" || open == "td" || open == "th";
    if (incoming == "p") return open == "p";
    return false;
}

class TreeBuilder {
public:
    explicit TreeBuilder(std::string_view doc) : doc_(doc) { root_.tag = "#document"; }

    Element build() {
        stack_.push_back(&root_);
        while (pos_ < doc_.size()) {
            if (doc_[pos_] == '<') {
                if (starts_with("<!--")) {
                    skip_past("-->");
                } else if (starts_with("<!") || starts_with("<?")) {
                    skip_past(">");
                } else if (pos_ + 1 < doc_.size() && doc_[pos_ + 1] == '/') {
                    end_tag();
                } else if (pos_ + 1 < doc_.size() && std::isalpha(static_cast<unsigned char>(doc_[pos_ + 1]))) {
                    start_tag();
                } else {
                    add_text(doc_.substr(pos_, 1));
                    ++pos_;
                }
            } else {
                const auto next = doc_.find('<', pos_);
                const auto end = next == std::string_view::npos ? doc_.size() : next;
                add_text(doc_.substr(pos_, end - pos_));
                pos_ = end;
            }
        }
        return std::move(root_);
    }

private:
    bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

    void skip_past(std::string_view terminator) {
        const auto at = doc_.find(terminator, pos_);
        pos_ = at == std::string_view::npos ? doc_.size() : at + terminator.size();
    }

    void add_text(std::string_view raw) {
        if (raw.empty()) return;
        Element t;
        t.text = decode_entities(raw);
        stack_.back()->children.push_back(std::move(t));
    }

    std::string read_name() {
        const auto start = pos_;
        while (pos_ < doc_.size()) {
            const char c = doc_[pos_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '>' || c == '/' || c == '=') break;
            ++pos_;
        }
        return to_lower_ascii(doc_.substr(start, pos_ - start));
    }

    void skip_space() {
        while (pos_ < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
    }

    void end_tag() {
        pos_ += 2;
        const std::string name = read_name();
        skip_past(">");
        // Pop to the matching open element; stray end tags are ignored.
        for (auto i = stack_.size(); i-- > 1;) {
            if (stack_[i]->tag == name) {
                stack_.resize(i);
                return;
            }
        }
    }

    void start_tag() {
        ++pos_;
        Element el;
        el.tag = read_name();
        bool self_closing = false;
        while (pos_ < doc_.size()) {
            skip_space();
            if (pos_ >= doc_.size()) break;
            if (doc_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (doc_[pos_] == '/') {
                self_closing = true;
                ++pos_;
                continue;
            }
            std::string attr = read_name();
            if (attr.empty()) {
                ++pos_;
                continue;
            }
            skip_space();
            std::string value;
            if (pos_ < doc_.size() && doc_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ < doc_.size() && (doc_[pos_] == '"' || doc_[pos_] == '\'')) {
                    const char quote = doc_[pos_++];
                    const auto close = doc_.find(quote, pos_);
                    const auto end = close == std::string_view::npos ? doc_.size() : close;
                    value = decode_entities(doc_.substr(pos_, end - pos_));
                    pos_ = end == doc_.size() ? end : end + 1;
                } else {
                    const auto start = pos_;
                    while (pos_ < doc_.size() && !std::isspace(static_cast<unsigned char>(doc_[pos_])) &&
                           doc_[pos_] != '>')
                        ++pos_;
                    value = decode_entities(doc_.substr(start, pos_ - start));
                }
            }
            el.attributes.emplace(std::move(attr), std::move(value));
        }

        while (stack_.size() > 1 && closes_implicitly(stack_.back()->tag, el.tag)) stack_.pop_back();

        const bool raw_text = el.tag == "script" || el.tag == "style";
        const bool is_void = kVoid.count(el.tag) != 0;
        auto& parent = *stack_.back();
        parent.children.push_back(std::move(el));
        Element* inserted = &parent.children.back();

        if (raw_text) {
            // Content is dropped; we never read script/style bodies.
            const std::string closing = "</" + inserted->tag;
            auto at = pos_;
            while (true) {
                at = doc_.find("</", at);
                if (at == std::string_view::npos) {
                    pos_ = doc_.size();
                    return;
                }
                if (to_lower_ascii(doc_.substr(at, closing.size())) == closing) break;
                at += 2;
            }
            pos_ = at;
            skip_past(">");
            return;
        }
        if (!is_void && !self_closing) stack_.push_back(inserted);
    }

    std::string_view doc_;
    std::size_t pos_ = 0;
    Element root_;
    // Pointers into parents' child vectors; only the back element of each
    // vector is ever pushed, and children are appended only to the back of the
    // stack, so earlier pointers stay valid.
    std::vector<Element*> stack_;
};

void collect_text(const Element& e, std::string& out) {
    if (e.is_text()) {
        out += e.text;
        return;
    }
    if (e.tag == "br") out += ' ';
    for (const auto& c : e.children) collect_text(c, out);
    // Block-ish boundaries separate words.
    if (e.tag == "td" || e.tag == "th" || e.tag == "li" || e.tag == "p" || e.tag == "div" || e.tag == "dd" ||
        e.tag == "dt")
        out += ' ';
}

void walk(const Element& e, const Predicate& pred, std::vector<const Element*>& out, bool first_only) {
    if (!e.is_text() && pred(e)) {
        out.push_back(&e);
        if (first_only) return;
    }
    for (const auto& c : e.children) {
        walk(c, pred, out, first_only);
        if (first_only && !out.empty()) return;
    }
}

}  // namespace

bool Element::has_class(std::string_view cls) const {
    const auto* value = attribute("class");
    if (!value) return false;
    std::size_t pos = 0;
    while (pos < value->size()) {
        while (pos < value->size() && std::isspace(static_cast<unsigned char>((*value)[pos]))) ++pos;
        auto end = pos;
        while (end < value->size() && !std::isspace(static_cast<unsigned char>((*value)[end]))) ++end;
        if (std::string_view(*value).substr(pos, end - pos) == cls) return true;
        pos = end;
    }
    return false;
}

const std::string* Element::attribute(std::string_view name) const {
    auto it = attributes.find(std::string(name));
    return it == attributes.end() ? nullptr : &it->second;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out.push_back(text[i]);
            continue;
        }
        const auto semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        const auto name = text.substr(i + 1, semi - i - 1);
        std::uint32_t cp = 0;
        bool ok = true;
        if (name == "amp") cp = '&';
        else if (name == "lt") cp = '<';
        else if (name == "gt") cp = '>';
        else if (name == "quot") cp = '"';
        else if (name == "apos") cp = '\'';
        else if (name == "nbsp") cp = 0xA0;
        else if (name.size() > 1 && name[0] == '#') {
            try {
                cp = (name[1] == 'x' || name[1] == 'X') ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                                                        : std::stoul(std::string(name.substr(1)), nullptr, 10);
            } catch (...) {
                ok = false;
            }
        } else {
            ok = false;
        }
        if (!ok) {
            out.push_back('&');
            continue;
        }
        append_utf8(out, cp);
        i = semi;
    }
    return out;
}

Element parse(std::string_view document) { return TreeBuilder(document).build(); }

const Element* find_first(const Element& root, const Predicate& pred) {
    std::vector<const Element*> out;
    walk(root, pred, out, true);
    return out.empty() ? nullptr : out.front();
}

std::vector<const Element*> find_all(const Element& root, const Predicate& pred) {
    std::vector<const Element*> out;
    walk(root, pred, out, false);
    return out;
}

Predicate tag_is(std::string tag) {
    return [tag = std::move(tag)](const Element& e) { return e.tag == tag; };
}

Predicate class_is(std::string tag, std::string cls) {
    return [tag = std::move(tag), cls = std::move(cls)](const Element& e) {
        return (tag.empty() || e.tag == tag) && e.has_class(cls);
    };
}

std::string text_content(const Element& element) {
    std::string raw;
    collect_text(element, raw);
    // U+00A0 counts as whitespace.
    for (std::size_t at = raw.find("\xC2\xA0"); at != std::string::npos; at = raw.find("\xC2\xA0", at))
        raw.replace(at, 2, " ");
    std::string out;
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

}  // namespace hazardchat::ingest::html
