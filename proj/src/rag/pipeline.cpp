#include <sstream>

#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/json_render.hpp"
#include "hazardchat/model.hpp"
#include "hazardchat/rag.hpp"

namespace hazardchat::rag {

namespace {

using cypher::Expr;

std::optional<std::string> string_literal(const Expr& e) {
    if (e.kind != Expr::Kind::Literal) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&e.literal.value)) return *s;
    return std::nullopt;
}

/// Regex literal reduced to plain text when it is just `(?i)` plus a name.
std::optional<std::string> plain_regex(const std::string& pattern) {
    std::string body = pattern.rfind("(?i)", 0) == 0 ? pattern.substr(4) : pattern;
    if (body.empty() || body.find_first_of(".*+?()[]{}|^$\\") != std::string::npos) return std::nullopt;
    return body;
}

struct Anchors {
    std::map<std::string, std::string> labels;  // variable -> label
    std::optional<std::string> substance;
    std::optional<std::string> organ;
};

void scan_where(const Expr& e, Anchors& a) {
    if (e.kind == Expr::Kind::And) {
        for (const auto& arg : e.args) scan_where(arg, a);
        return;
    }
    if (e.kind != Expr::Kind::Compare || (e.op != cypher::CompareOp::Eq && e.op != cypher::CompareOp::Regex)) return;
    const Expr* prop = &e.args[0];
    const Expr* lit = &e.args[1];
    if (prop->kind != Expr::Kind::Property) std::swap(prop, lit);
    if (prop->kind != Expr::Kind::Property) return;
    auto text = string_literal(*lit);
    if (!text) return;
    if (e.op == cypher::CompareOp::Regex) text = plain_regex(*text);
    if (!text) return;
    const auto label = a.labels.find(prop->name);
    if (label == a.labels.end()) return;
    if (label->second == "Substance" && prop->property == "name" && !a.substance) a.substance = *text;
    if (label->second == "Organ" && prop->property == "Organ" && !a.organ) a.organ = *text;
}

Anchors anchors_of(const cypher::Query& q) {
    Anchors a;
    for (const auto& path : q.patterns) {
        for (const auto& n : path.nodes) {
            if (!n.label) continue;
            if (!n.variable.empty()) a.labels.emplace(n.variable, *n.label);
            for (const auto& [key, lit] : n.properties) {
                const auto* s = std::get_if<std::string>(&lit.value);
                if (!s) continue;
                if (*n.label == "Substance" && key == "name" && !a.substance) a.substance = *s;
                if (*n.label == "Organ" && key == "Organ" && !a.organ) a.organ = *s;
            }
        }
    }
    if (q.where) scan_where(*q.where, a);
    return a;
}

std::string quoted_rows(const cypher::ResultTable& rows, const graph::PropertyGraph& graph) {
    std::string out;
    for (const auto& row : rows.rows) {
        if (!out.empty()) out += ", ";
        std::string cell;
        for (std::size_t c = 0; c < row.size(); ++c) cell += (c ? " / " : "") + cypher::render_value(row[c], graph);
        out += "\"" + cell + "\"";
    }
    return out;
}

}  // namespace

std::string TemplateSummarizer::summarize(std::string_view, const ValidatedQuery& query,
                                          const cypher::ResultTable& rows, const graph::PropertyGraph& graph) const {
    if (rows.rows.empty()) return "The query returned no results.";
    const Anchors a = anchors_of(query.query);
    bool disease_column = false;
    if (query.query.items.size() == 1) {
        const auto& e = query.query.items[0].expr;
        const auto label = a.labels.find(e.name);
        disease_column = e.kind == Expr::Kind::Property && label != a.labels.end() && label->second == "Disease";
    }
    const std::string list = quoted_rows(rows, graph);
    if (disease_column && a.substance && a.organ)
        return *a.substance + " can potentially impact the " + *a.organ +
               " by causing the following diseases: " + list + ".";
    if (disease_column && a.substance)
        return *a.substance + " is associated with the following diseases: " + list + ".";
    const std::size_t n = rows.rows.size();
    return "The query returned " + std::to_string(n) + (n == 1 ? " row: " : " rows: ") + list + ".";
}

std::string LlmSummarizer::summarize(std::string_view question, const ValidatedQuery& query,
                                     const cypher::ResultTable& rows, const graph::PropertyGraph& graph) const {
    std::ostringstream prompt;
    prompt << "Use the outcome of the query to answer the user's question. If the question has several answers, "
              "list each of them and create a summary to explain the context of the list of the answers. "
           << kRefusalSentence << '\n'
           << "Cypher query:\n"
           << query.text << '\n'
           << "Query results:\n"
           << cypher::render_table(rows, graph) << "User input: " << question << '\n';
    return trim(llm_.complete({{"user", prompt.str()}}));
}

std::size_t ChatResponse::executions() const {
    std::size_t n = 0;
    for (const auto& s : trace) n += s.step == "execute";
    return n;
}

ChatResponse answer_turn(std::string_view question, const Pipeline& p) {
    ChatResponse r;
    const auto log = [&](std::string step, std::string status, std::string detail) {
        r.trace.push_back({std::move(step), std::move(status), std::move(detail)});
    };
    const auto fail = [&](std::string step, std::string code, std::string message) {
        log(std::move(step), "failed", message);
        r.error = std::move(code);
        r.answer = std::move(message);
        return r;
    };
    const auto refuse = [&](std::string step, std::string reason) {
        log(std::move(step), "refused", std::move(reason));
        r.refused = true;
        r.answer = std::string(kRefusalAnswer);
        r.cypher.reset();
        return r;
    };

    const std::string q = trim(question);
    if (q.empty()) return fail("input", "InvalidInput", "The question is empty.");
    log("input", "ok", std::to_string(q.size()) + " bytes");

    std::vector<Exemplar> shots;
    try {
        const Embedding v = p.embedder.embed(q);
        log("embed", "ok", std::to_string(v.size()) + " dimensions");
        if (p.store.size() == 0) {
            log("select", "ok", "store is empty");
        } else {
            shots = select_few_shots(v, p.store.exemplars(), p.shots);
            std::string ids;
            for (const auto& ex : shots) ids += (ids.empty() ? "" : ",") + ex.id;
            log("select", "ok", ids);
        }
    } catch (const RagError& e) {
        return fail("embed", std::string(to_string(e.kind())), e.what());
    }

    const PromptContext ctx = build_prompt(q, p.graph.schema(), std::move(shots));
    const std::string prompt = ctx.render();
    log("prompt", "ok", "fnv1a64=" + hex16(fnv1a64(prompt)));

    std::string candidate;
    try {
        candidate = extract_query(p.llm.complete({{"user", prompt}}));
        log("generate", "ok", candidate);
    } catch (const RagError& e) {
        if (e.kind() == RagErrorKind::NoQueryInReply) return refuse("generate", e.what());
        return fail("generate", std::string(to_string(e.kind())), e.what());
    }

    auto checked = validate_or_refuse(candidate, p.graph.schema());
    if (auto* refusal = std::get_if<Refusal>(&checked)) return refuse("validate", refusal->reason);
    auto& valid = std::get<ValidatedQuery>(checked);
    log("validate", "ok", "");
    r.cypher = valid.text;

    try {
        r.rows = cypher::execute(valid.query, p.graph, p.limits);
        log("execute", "ok", std::to_string(r.rows->rows.size()) + " rows");
    } catch (const cypher::QueryError& e) {
        log("execute", "failed", e.what());
        r.error = std::string(cypher::to_string(e.kind()));
        r.answer = e.what();
        return r;
    }

    try {
        r.answer = p.summarizer.summarize(q, valid, *r.rows, p.graph);
        log("summarize", "ok", "");
    } catch (const RagError& e) {
        return fail("summarize", std::string(to_string(e.kind())), e.what());
    }
    return r;
}

std::string render_json(const ChatResponse& response, const graph::PropertyGraph& graph,
                        std::optional<std::string> trace_id) {
    return to_json(response, graph, trace_id).dump();
}

}  // namespace hazardchat::rag
