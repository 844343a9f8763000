#include <fstream>
#include <sstream>

#include "hazardchat/llm.hpp"
#include "hazardchat/model.hpp"

namespace hazardchat::rag {

std::string user_input_of(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) return {};
    const std::string& text = messages.back().content;
    constexpr std::string_view kMarker = "User input:";
    const auto at = text.rfind(kMarker);
    if (at == std::string::npos) return trim(text);
    return trim(std::string_view(text).substr(at + kMarker.size()));
}

ScriptedLlmClient ScriptedLlmClient::parse(std::string_view text) {
    std::vector<Rule> rules;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    std::optional<Rule> pending;
    bool in_reply = false;
    std::vector<std::string> reply_lines;

    const auto fail = [&](const std::string& message) {
        throw RagError(RagErrorKind::BadStore, "stub script line " + std::to_string(line_no) + ": " + message);
    };
    const auto finish = [&] {
        std::string reply;
        for (std::size_t i = 0; i < reply_lines.size(); ++i) reply += (i ? "\n" : "") + reply_lines[i];
        pending->reply = trim(reply);
        rules.push_back(std::move(*pending));
        pending.reset();
        reply_lines.clear();
        in_reply = false;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (in_reply) {
            if (line == "---") finish();
            else reply_lines.push_back(raw);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) fail("expected `key: value`");
        const std::string key = to_lower_ascii(trim(line.substr(0, colon)));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "reply") {
            if (!pending) fail("reply without a matcher");
            in_reply = true;
            if (!value.empty()) reply_lines.push_back(value);
            continue;
        }
        if (pending) fail("matcher has no reply");
        Rule rule;
        if (key == "question") rule.match = Match::Question;
        else if (key == "contains") rule.match = Match::Contains;
        else if (key == "default") rule.match = Match::Default;
        else if (key == "unavailable") rule.match = Match::Unavailable;
        else fail("unknown key `" + key + "`");
        if (rule.match != Match::Default && value.empty()) fail("matcher needs a value");
        rule.pattern = value;
        if (rule.match == Match::Unavailable) {
            rules.push_back(std::move(rule));
            continue;
        }
        pending = std::move(rule);
    }
    if (in_reply) finish();
    if (pending) fail("matcher has no reply");
    return ScriptedLlmClient(std::move(rules));
}

ScriptedLlmClient ScriptedLlmClient::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RagError(RagErrorKind::BadStore, "cannot read stub script " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string ScriptedLlmClient::complete(const std::vector<ChatMessage>& messages) const {
    const std::string input = user_input_of(messages);
    const std::string lowered = to_lower_ascii(input);
    for (const auto& rule : rules_) {
        bool hit = false;
        switch (rule.match) {
            case Match::Question: hit = input == rule.pattern; break;
            case Match::Contains:
            case Match::Unavailable: hit = lowered.find(to_lower_ascii(rule.pattern)) != std::string::npos; break;
            case Match::Default: hit = true; break;
        }
        if (!hit) continue;
        if (rule.match == Match::Unavailable)
            throw RagError(RagErrorKind::BackendUnavailable, "scripted backend outage");
        return rule.reply;
    }
    return std::string(kRefusalAnswer);
}

}  // namespace hazardchat::rag
