#include <sstream>

#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/cypher/validator.hpp"
#include "hazardchat/model.hpp"
#include "hazardchat/rag.hpp"

namespace hazardchat::rag {

namespace {

constexpr std::string_view kPersona =
    "You are an expert on creating Cypher queries. You also have a deep knowledge in Healthcare and Toxicology. "
    "Think step-by-step to answer the question. First, given an input question, create a syntactically correct "
    "Cypher query to run.";

constexpr std::string_view kInstructions =
    "If the question matches one of the sample questions in the KG then just use the same query used to answer it.\n"
    "If the user asks to retrieve a property of an entity of the graph, given its name, then use a WHERE statement "
    "and a cypher regular expression matching without case sensitivity, and filter the results by the name of the "
    "entity.\n"
    "Ensure the generated query captures relevant information from the graph database without reducing the "
    "retrieved data due to variations or synonyms in user wording.\n"
    "Validate the query against the schema before showing it: use only the labels, relationship types, "
    "directions and properties listed above.\n"
    "Write the query inside a ```cypher fenced block.\n"
    "Use the outcome of the query to answer the user's question. If the question has several answers, list each "
    "of them and create a summary to explain the context of the list of the answers. If you do not know the "
    "answer, just say I don't know.";

constexpr std::string_view kExamplesHeader =
    "Below there are some examples of questions and their corresponding Cypher queries and results.";

const char* const kClauses[] = {"match",  "optional", "create", "merge", "delete", "detach", "set",
                                "remove", "drop",     "call",   "unwind", "with",  "return", "load",
                                "foreach", "use",     "show"};

bool starts_clause(std::string_view line) {
    const std::string lower = to_lower_ascii(line.substr(0, 8));
    for (const char* kw : kClauses) {
        const std::string_view k(kw);
        if (lower.size() < k.size() || lower.compare(0, k.size(), k) != 0) continue;
        if (line.size() == k.size()) return true;
        const char next = line[k.size()];
        if (next == ' ' || next == '\t' || next == '(') return true;
    }
    return false;
}

}  // namespace

PromptContext build_prompt(std::string_view question, const graph::GraphSchema& schema,
                           std::vector<Exemplar> exemplars) {
    PromptContext ctx;
    ctx.persona = std::string(kPersona);
    ctx.schema_text = schema.render();
    ctx.instructions = std::string(kInstructions);
    ctx.exemplars = std::move(exemplars);
    ctx.question = trim(question);
    return ctx;
}

std::string PromptContext::render() const {
    std::ostringstream out;
    out << persona << '\n';
    out << "Here is the graph schema:\n";
    out << schema_text;
    if (!schema_text.empty() && schema_text.back() != '\n') out << '\n';
    out << instructions << '\n';
    out << kExamplesHeader << '\n';
    for (const auto& ex : exemplars) {
        out << '\n';
        out << "Question: " << ex.question << '\n';
        out << "Cypher: " << ex.cypher << '\n';
        out << "Result: " << ex.result_digest << '\n';
    }
    out << '\n';
    out << "User input: " << question << '\n';
    return out.str();
}

std::string extract_query(std::string_view reply) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(reply)};
    for (std::string l; std::getline(in, l);) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        lines.push_back(std::move(l));
    }
    const auto join = [&](std::size_t from, std::size_t to) {
        std::string out;
        for (std::size_t i = from; i < to; ++i) {
            if (!out.empty()) out += '\n';
            out += lines[i];
        }
        return trim(out);
    };
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string t = trim(lines[i]);
        if (t.rfind("```", 0) == 0) {
            std::size_t end = i + 1;
            while (end < lines.size() && trim(lines[end]).rfind("```", 0) != 0) ++end;
            std::string body = join(i + 1, end);
            // Single-line fence: ```MATCH ...```
            if (end == i + 1 && t.size() > 6 && t.compare(t.size() - 3, 3, "```") == 0) body = trim(t.substr(3, t.size() - 6));
            if (!body.empty()) return body;
            i = end;
            continue;
        }
        if (starts_clause(t)) {
            std::size_t end = i + 1;
            while (end < lines.size() && !trim(lines[end]).empty() && trim(lines[end]).rfind("```", 0) != 0) ++end;
            return join(i, end);
        }
    }
    throw RagError(RagErrorKind::NoQueryInReply, "the model reply contains no query");
}

std::string generate_query(const PromptContext& context, const LlmClient& llm) {
    return extract_query(llm.complete({{"user", context.render()}}));
}

std::variant<ValidatedQuery, Refusal> validate_or_refuse(std::string_view candidate,
                                                         const graph::GraphSchema& schema) {
    const std::string text = trim(candidate);
    if (text.empty()) return Refusal{std::string(kRefusalAnswer), "empty query"};
    cypher::Query query;
    try {
        query = cypher::parse(text);
    } catch (const cypher::QueryError& e) {
        return Refusal{std::string(kRefusalAnswer), std::string(cypher::to_string(e.kind())) + ": " + e.what()};
    }
    const auto diags = cypher::validate(query, schema);
    if (!diags.empty()) {
        std::string reason;
        for (const auto& d : diags) {
            if (!reason.empty()) reason += "; ";
            reason += std::string(cypher::to_string(d.code)) + ": " + d.message;
        }
        return Refusal{std::string(kRefusalAnswer), reason};
    }
    return ValidatedQuery{text, std::move(query)};
}

}  // namespace hazardchat::rag
