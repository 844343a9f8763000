#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "hazardchat/model.hpp"
#include "hazardchat/service.hpp"

namespace hazardchat::service {

namespace {

[[noreturn]] void syntax(std::size_t line, const std::string& message) {
    throw ConfigError(ConfigErrorKind::Syntax,
                      line ? "config line " + std::to_string(line) + ": " + message : "config: " + message);
}

long long integer(const std::string& key, const std::string& value, std::size_t line, long long lo, long long hi) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size() || v < lo || v > hi)
        syntax(line, "`" + key + "` must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

}  // namespace

ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    std::map<std::string, std::pair<std::string, std::size_t>> kv;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) syntax(line_no, "expected `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) syntax(line_no, "empty key");
        if (!kv.emplace(key, std::make_pair(value, line_no)).second) syntax(line_no, "duplicate key `" + key + "`");
    }

    const auto path_of = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    const auto take = [&](const std::string& key) -> std::optional<std::pair<std::string, std::size_t>> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    const auto require = [&](const std::string& key) {
        auto v = take(key);
        if (!v || v->first.empty()) syntax(0, "missing required key `" + key + "`");
        return *v;
    };

    ServiceConfig c;
    if (auto v = take("listen.host")) c.host = v->first;
    if (auto v = take("listen.port")) c.port = static_cast<int>(integer("listen.port", v->first, v->second, 0, 65535));
    if (auto v = take("corpus.dir")) c.corpus_dir = path_of(v->first);
    c.snapshot = path_of(require("snapshot.path").first);
    c.exemplars = path_of(require("exemplars.path").first);

    const auto mode = require("llm.mode");
    auto stub_script = take("llm.stub_script");
    auto llm_endpoint = take("llm.endpoint");
    auto llm_model = take("llm.model");
    auto llm_key = take("llm.api_key_env");
    auto llm_timeout = take("llm.timeout_seconds");
    if (mode.first == "stub") {
        c.llm_mode = LlmMode::Stub;
        if (!stub_script) syntax(mode.second, "llm.mode = stub needs llm.stub_script");
        if (llm_endpoint || llm_model || llm_key || llm_timeout)
            syntax(mode.second, "remote llm keys are not allowed with llm.mode = stub");
        c.stub_script = path_of(stub_script->first);
    } else if (mode.first == "remote") {
        c.llm_mode = LlmMode::Remote;
        if (stub_script) syntax(stub_script->second, "llm.stub_script is not allowed with llm.mode = remote");
        if (!llm_endpoint || !llm_model) syntax(mode.second, "llm.mode = remote needs llm.endpoint and llm.model");
        c.llm.url = llm_endpoint->first;
        c.llm.model = llm_model->first;
        if (llm_key) c.llm.api_key_env = llm_key->first;
        if (llm_timeout)
            c.llm.timeout_seconds = static_cast<int>(integer("llm.timeout_seconds", llm_timeout->first, llm_timeout->second, 1, 600));
    } else {
        syntax(mode.second, "llm.mode must be `stub` or `remote`");
    }

    auto emb_mode = take("embedding.mode");
    auto emb_endpoint = take("embedding.endpoint");
    auto emb_model = take("embedding.model");
    auto emb_key = take("embedding.api_key_env");
    if (!emb_mode || emb_mode->first == "offline") {
        c.embedding_mode = EmbeddingMode::Offline;
        if (emb_endpoint || emb_model || emb_key) syntax(0, "remote embedding keys need embedding.mode = remote");
    } else if (emb_mode->first == "remote") {
        c.embedding_mode = EmbeddingMode::Remote;
        if (!emb_endpoint || !emb_model)
            syntax(emb_mode->second, "embedding.mode = remote needs embedding.endpoint and embedding.model");
        c.embedding.url = emb_endpoint->first;
        c.embedding.model = emb_model->first;
        if (emb_key) c.embedding.api_key_env = emb_key->first;
    } else {
        syntax(emb_mode->second, "embedding.mode must be `offline` or `remote`");
    }

    if (auto v = take("limits.max_rows"))
        c.max_rows = static_cast<std::size_t>(integer("limits.max_rows", v->first, v->second, 1, 10'000'000));
    if (auto v = take("limits.time_budget_ms"))
        c.time_budget = std::chrono::milliseconds(integer("limits.time_budget_ms", v->first, v->second, 1, 600'000));
    if (auto v = take("cors.allow")) {
        std::istringstream list(v->first);
        for (std::string item; std::getline(list, item, ',');)
            if (auto t = trim(item); !t.empty()) c.cors_allow.push_back(t);
    }
    if (auto v = take("log.path")) c.log_path = path_of(v->first);

    if (!kv.empty()) syntax(kv.begin()->second.second, "unknown key `" + kv.begin()->first + "`");
    return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ConfigErrorKind::MissingPath, "cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    ServiceConfig c = parse_config(buf.str(), path.parent_path());

    const auto must_exist = [](const std::filesystem::path& p, const char* what) {
        std::error_code ec;
        if (!std::filesystem::exists(p, ec))
            throw ConfigError(ConfigErrorKind::MissingPath, std::string(what) + " not found: " + p.string());
    };
    must_exist(c.snapshot, "snapshot");
    must_exist(c.exemplars, "exemplar store");
    if (c.llm_mode == LlmMode::Stub) must_exist(c.stub_script, "stub script");
    if (c.corpus_dir) must_exist(*c.corpus_dir, "corpus directory");
    return c;
}

}  // namespace hazardchat::service
