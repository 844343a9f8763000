#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/cypher/validator.hpp"
#include "hazardchat/model.hpp"
#include "hazardchat/rag.hpp"

namespace hazardchat::rag {

std::string_view to_string(RagErrorKind kind) noexcept {
    switch (kind) {
        case RagErrorKind::BackendUnavailable: return "BackendUnavailable";
        case RagErrorKind::NoQueryInReply: return "NoQueryInReply";
        case RagErrorKind::EmptyStore: return "EmptyStore";
        case RagErrorKind::InvalidInput: return "InvalidInput";
        case RagErrorKind::BadStore: return "BadStore";
    }
    return "?";
}

Embedding HashingEmbedder::embed(std::string_view text) const {
    std::string folded = " ";
    for (char c : to_lower_ascii(trim(text))) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (space && folded.back() == ' ') continue;
        folded.push_back(space ? ' ' : c);
    }
    if (folded.size() == 1) throw RagError(RagErrorKind::InvalidInput, "cannot embed blank text");
    folded.push_back(' ');

    Embedding v(kDimensions, 0.0);
    for (std::size_t i = 0; i + 3 <= folded.size(); ++i)
        v[fnv1a64(std::string_view(folded).substr(i, 3)) % kDimensions] += 1.0;
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) throw RagError(RagErrorKind::InvalidInput, "embedding dimensions differ");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

[[noreturn]] void bad_store(std::size_t line, const std::string& message) {
    throw RagError(RagErrorKind::BadStore, "exemplar store line " + std::to_string(line) + ": " + message);
}

struct Draft {
    Exemplar ex;
    std::size_t line = 0;
    std::set<std::string> seen;
};

}  // namespace

ExemplarStore ExemplarStore::parse(std::string_view text, const graph::GraphSchema& schema,
                                   const Embedder& embedder) {
    std::vector<Draft> drafts;
    std::optional<Draft> current;
    std::string* last_field = nullptr;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;

    const auto close = [&] {
        if (current) drafts.push_back(std::move(*current));
        current.reset();
        last_field = nullptr;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (line.empty()) {
            close();
            continue;
        }
        if (line[0] == '#') continue;
        if (std::isspace(static_cast<unsigned char>(raw[0]))) {
            if (!last_field) bad_store(line_no, "continuation line outside a field");
            *last_field += " " + line;
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) bad_store(line_no, "expected `field: value`");
        const std::string field = to_lower_ascii(trim(line.substr(0, colon)));
        const std::string value = trim(line.substr(colon + 1));
        if (!current) {
            current.emplace();
            current->line = line_no;
        }
        if (!current->seen.insert(field).second) bad_store(line_no, "duplicate field `" + field + "`");
        if (field == "id") last_field = &current->ex.id;
        else if (field == "question") last_field = &current->ex.question;
        else if (field == "cypher") last_field = &current->ex.cypher;
        else if (field == "result") last_field = &current->ex.result_digest;
        else bad_store(line_no, "unknown field `" + field + "`");
        *last_field = value;
    }
    close();

    std::vector<Exemplar> out;
    std::set<std::string> ids;
    for (auto& d : drafts) {
        for (const char* f : {"id", "question", "cypher", "result"})
            if (!d.seen.count(f)) bad_store(d.line, std::string("record is missing `") + f + "`");
        if (d.ex.id.empty() || d.ex.question.empty() || d.ex.cypher.empty())
            bad_store(d.line, "id, question and cypher must not be empty");
        if (!ids.insert(d.ex.id).second) bad_store(d.line, "duplicate id `" + d.ex.id + "`");
        try {
            const auto diags = cypher::validate(cypher::parse(d.ex.cypher), schema);
            if (!diags.empty())
                bad_store(d.line, "exemplar `" + d.ex.id + "`: " + std::string(cypher::to_string(diags[0].code)) +
                                      ": " + diags[0].message);
        } catch (const cypher::QueryError& e) {
            bad_store(d.line, "exemplar `" + d.ex.id + "`: " + e.what());
        }
        d.ex.embedding = embedder.embed(d.ex.question);
        out.push_back(std::move(d.ex));
    }
    return ExemplarStore(std::move(out));
}

ExemplarStore ExemplarStore::load(const std::filesystem::path& path, const graph::GraphSchema& schema,
                                  const Embedder& embedder) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RagError(RagErrorKind::BadStore, "cannot read exemplar store " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), schema, embedder);
}

std::vector<Exemplar> select_few_shots(const Embedding& question, const std::vector<Exemplar>& store,
                                       std::size_t k) {
    if (store.empty()) throw RagError(RagErrorKind::EmptyStore, "exemplar store is empty");
    if (k == 0) throw RagError(RagErrorKind::InvalidInput, "k must be at least 1");

    // Quantized cosine, ties by ascending id.
    std::vector<std::pair<long long, const Exemplar*>> ranked;
    for (const auto& ex : store) ranked.emplace_back(std::llround(cosine(question, ex.embedding) * 1e12), &ex);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });
    std::vector<Exemplar> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(*ranked[i].second);
    return out;
}

std::vector<Exemplar> select_few_shots(std::string_view question, const ExemplarStore& store,
                                       const Embedder& embedder, std::size_t k) {
    if (store.size() == 0) throw RagError(RagErrorKind::EmptyStore, "exemplar store is empty");
    return select_few_shots(embedder.embed(question), store.exemplars(), k);
}

}  // namespace hazardchat::rag
