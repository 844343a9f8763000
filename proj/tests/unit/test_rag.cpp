#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "../support/generators.hpp"
#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/cypher/validator.hpp"
#include "hazardchat/ingest.hpp"
#include "hazardchat/llm.hpp"
#include "hazardchat/rag.hpp"

using namespace hazardchat;
using namespace hazardchat::rag;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot(HC_SOURCE_DIR);
const fs::path kRag = kRoot / "fixtures" / "rag";

const std::string kQuestion =
    "What are the potential health impacts, particularly on the heart, of exposure to Acrylaldehyde ?";
const std::string kHeartQuery =
    "MATCH (o:Organ {Organ: 'heart'})<-[:target_organ]-(sub:Substance {name: 'Acrylaldehyde'})"
    "-[:related_to_disease]->(d:Disease) where toLower(d.DiseaseName) contains 'heart' RETURN d.DiseaseName";

// Expected heart-related diseases of Acrylaldehyde.
const std::vector<std::string> kHeartDiseases{
    "heart block",
    "hypoplastic left heart syndrome",
    "neurodevelopmental disorder with or without anomalies of the brain, eye, or heart",
    "arterial occlusive disease, progressive, with hypertension, heart defects, bone fragility, and brachysyndactyly",
    "heart arrest",
    "heart valve disease",
    "heart septal defects, ventricular",
    "heart-hand syndrome, slovenian type",
    "heart failure",
    "heartburn",
    "heart defects, congenital",
    "heart injury",
    "heart failure, diastolic",
};

const graph::PropertyGraph& acrylaldehyde_graph() {
    static const graph::PropertyGraph g = graph::apply(ingest::ingest_corpus(kRoot / "fixtures" / "acrylaldehyde").plan);
    return g;
}

const graph::PropertyGraph& corpus_graph() {
    static const graph::PropertyGraph g = graph::apply(ingest::ingest_corpus(kRoot / "fixtures" / "corpus").plan);
    return g;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct FixedReply final : LlmClient {
    std::string reply;
    mutable int calls = 0;
    explicit FixedReply(std::string r) : reply(std::move(r)) {}
    std::string complete(const std::vector<ChatMessage>&) const override {
        ++calls;
        return reply;
    }
};

struct Unreachable final : LlmClient {
    std::string complete(const std::vector<ChatMessage>&) const override {
        throw RagError(RagErrorKind::BackendUnavailable, "connection refused");
    }
};

// No execute step may appear unless a validate step succeeded just before it.
void check_trace_safety(const ChatResponse& r, const graph::PropertyGraph& g) {
    bool validated = false;
    for (const auto& s : r.trace) {
        if (s.step == "validate") validated = s.status == "ok";
        if (s.step == "execute") CHECK(validated);
    }
    if (r.refused) {
        CHECK(r.executions() == 0);
        CHECK(r.answer == "I don't know.");
        CHECK_FALSE(r.cypher);
        CHECK_FALSE(r.rows);
    }
    if (!r.refused && !r.failed()) {
        REQUIRE(r.cypher);
        CHECK(r.rows);
        CHECK(r.executions() == 1);
        CHECK(cypher::validate(cypher::parse(*r.cypher), g.schema()).empty());
    }
}

const ExemplarStore& fixture_store() {
    static const ExemplarStore store =
        ExemplarStore::load(kRag / "exemplars.txt", graph::static_schema(), HashingEmbedder{});
    return store;
}

ChatResponse run_turn(const std::string& question, const LlmClient& llm,
                      const graph::PropertyGraph& g = acrylaldehyde_graph(), cypher::ExecutionLimits limits = {}) {
    static const HashingEmbedder embedder;
    static const TemplateSummarizer summarizer;
    Pipeline p{g, fixture_store(), embedder, llm, summarizer, kDefaultShots, limits};
    auto r = answer_turn(question, p);
    check_trace_safety(r, g);
    return r;
}

}  // namespace

TEST_SUITE("rag") {

TEST_CASE("offline embedding is deterministic and unit length") {
    HashingEmbedder e;
    for (const char* text : {"heart", "cardiac arrest exposure", "Acrylaldehyde", "a", "x  y\tz"}) {
        const auto a = e.embed(text);
        const auto b = e.embed(text);
        REQUIRE(a.size() == HashingEmbedder::kDimensions);
        CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
        double norm = 0;
        for (double x : a) norm += x * x;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(cosine(a, a) - 1.0) <= 1e-9);
    }
    CHECK(cosine(e.embed("heart"), e.embed("cardiac arrest exposure")) < cosine(e.embed("heart"), e.embed("heart")));
    CHECK(cosine(e.embed("Heart  Failure"), e.embed("heart failure")) == doctest::Approx(1.0));
}

TEST_CASE("blank text cannot be embedded") {
    HashingEmbedder e;
    for (const char* text : {"", "   ", "\n\t"}) {
        try {
            e.embed(text);
            FAIL("expected InvalidInput");
        } catch (const RagError& err) {
            CHECK(err.kind() == RagErrorKind::InvalidInput);
        }
    }
}

TEST_CASE("cosine is scale invariant and handles zero vectors") {
    const Embedding a{1, 2, 3}, b{-2, 0.5, 4};
    const Embedding a3{3, 6, 9};
    CHECK(cosine(a, b) == doctest::Approx(cosine(a3, b)).epsilon(1e-12));
    CHECK(cosine(a, Embedding{0, 0, 0}) == 0);
    CHECK_THROWS_AS(cosine(a, Embedding{1, 2}), RagError);
}

TEST_CASE("fixture exemplar store loads and validates") {
    const auto& store = fixture_store();
    REQUIRE(store.size() >= 4);
    std::set<std::string> ids;
    for (const auto& ex : store.exemplars()) {
        ids.insert(ex.id);
        CHECK(cypher::validate(cypher::parse(ex.cypher), graph::static_schema()).empty());
        CHECK(cypher::validate(cypher::parse(ex.cypher), corpus_graph().schema()).empty());
        CHECK(std::abs(cosine(ex.embedding, ex.embedding) - 1.0) <= 1e-9);
        CHECK_FALSE(ex.result_digest.empty());
    }
    CHECK(ids.size() == store.size());
    // Continuation lines join the cypher field with a single space.
    CHECK(store.exemplars()[0].cypher.find("(sub:Substance {name: 'Toluene'}) -[:related_to_disease]") !=
          std::string::npos);
}

TEST_CASE("malformed exemplar stores are rejected") {
    HashingEmbedder e;
    const auto schema = graph::static_schema();
    const auto rejects = [&](const std::string& text) {
        try {
            ExemplarStore::parse(text, schema, e);
            return false;
        } catch (const RagError& err) {
            return err.kind() == RagErrorKind::BadStore;
        }
    };
    const std::string good = "id: a\nquestion: q\ncypher: MATCH (o:Organ) RETURN o.Organ\nresult: r\n";
    CHECK_FALSE(rejects(good));
    CHECK(ExemplarStore::parse(good + "\n" + "# comment\n\n", schema, e).size() == 1);
    CHECK(rejects("id: a\nquestion: q\ncypher: MATCH (o:Organ) RETURN o.Organ\n"));
    CHECK(rejects(good + "\n" + good));
    CHECK(rejects(good + "colour: blue\n"));
    CHECK(rejects("id: a\nquestion: q\ncypher: MATCH (c:Chemical) RETURN c.name\nresult: r\n"));
    CHECK(rejects("id: a\nquestion: q\ncypher: DROP ALL\nresult: r\n"));
    CHECK(rejects("id: a\nquestion: q\ncypher: MATCH (o:Organ) RETURN o.Organ\nresult: r\nid: b\n"));
    CHECK(rejects("  dangling continuation\n"));
    CHECK(rejects("no colon here\n"));
    CHECK_THROWS_AS(ExemplarStore::load(kRag / "missing.txt", schema, e), RagError);
}

TEST_CASE("select_few_shots: four exemplars, k = 4, ordered by similarity") {
    HashingEmbedder e;
    std::vector<Exemplar> four(fixture_store().exemplars().begin(), fixture_store().exemplars().begin() + 4);
    const auto q = e.embed(kQuestion);
    const auto picked = select_few_shots(q, four, 4);
    REQUIRE(picked.size() == 4);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        ids.insert(picked[i].id);
        if (i) CHECK(cosine(q, picked[i - 1].embedding) >= cosine(q, picked[i].embedding));
    }
    CHECK(ids.size() == 4);
}

TEST_CASE("select_few_shots: an exemplar's own question ranks it first") {
    HashingEmbedder e;
    for (const auto& ex : fixture_store().exemplars()) {
        const auto picked = select_few_shots(ex.question, fixture_store(), e, 4);
        REQUIRE_FALSE(picked.empty());
        CHECK(picked.front().id == ex.id);
    }
}

TEST_CASE("select_few_shots: ties go to the lower id, small stores return everything") {
    HashingEmbedder e;
    Exemplar b{"b", "heart", "MATCH (o:Organ) RETURN o.Organ", "r", e.embed("heart")};
    Exemplar a = b;
    a.id = "a";
    Exemplar c{"c", "liver", "MATCH (o:Organ) RETURN o.Organ", "r", e.embed("liver")};
    const auto picked = select_few_shots(e.embed("heart"), {b, c, a}, 4);
    REQUIRE(picked.size() == 3);
    CHECK(picked[0].id == "a");
    CHECK(picked[1].id == "b");
    CHECK(picked[2].id == "c");
    CHECK(select_few_shots(e.embed("heart"), {b, c, a}, 1).size() == 1);
}

TEST_CASE("select_few_shots: empty store and k = 0 are errors") {
    HashingEmbedder e;
    try {
        select_few_shots("heart", ExemplarStore{}, e, 4);
        FAIL("expected EmptyStore");
    } catch (const RagError& err) {
        CHECK(err.kind() == RagErrorKind::EmptyStore);
    }
    CHECK_THROWS_AS(select_few_shots(e.embed("x"), fixture_store().exemplars(), 0), RagError);
}

TEST_CASE("select_few_shots: selection is invariant under positive scaling") {
    hctest::Rng rng(7);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 12, dims = 2 + rng() % 6;
        std::vector<Exemplar> store;
        for (std::size_t i = 0; i < n; ++i) {
            Exemplar ex;
            ex.id = "e" + std::to_string(rng() % 100);
            if (i && rng() % 4 == 0) ex.embedding = store[rng() % i].embedding;  // forced ties
            else
                for (std::size_t d = 0; d < dims; ++d) ex.embedding.push_back(normal(rng));
            store.push_back(ex);
        }
        Embedding q;
        for (std::size_t d = 0; d < dims; ++d) q.push_back(normal(rng));
        const std::size_t k = 1 + rng() % 5;
        const auto base = select_few_shots(q, store, k);

        auto scaled = store;
        for (auto& ex : scaled) {
            const double f = scale(rng);
            for (auto& x : ex.embedding) x *= f;
        }
        auto q_scaled = q;
        const double fq = scale(rng);
        for (auto& x : q_scaled) x *= fq;
        const auto again = select_few_shots(q_scaled, scaled, k);
        REQUIRE(base.size() == again.size());
        CHECK(base.size() == std::min(k, n));
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(base[i].id == again[i].id);
            if (i) CHECK(cosine(q, base[i - 1].embedding) >= cosine(q, base[i].embedding) - 1e-12);
        }
    }
}

TEST_CASE("prompt reproduces the template text and slots") {
    const auto ctx = build_prompt(kQuestion, graph::static_schema(), {});
    const auto text = ctx.render();
    const std::vector<std::string> fixed{
        "You are an expert on creating Cypher queries. You also have a deep knowledge in Healthcare and Toxicology. "
        "Think step-by-step to answer the question. First, given an input question, create a syntactically correct "
        "Cypher query to run.",
        "Here is the graph schema:",
        "If the question matches one of the sample questions in the KG then just use the same query used to answer it.",
        "If the user asks to retrieve a property of an entity of the graph, given its name, then use a WHERE "
        "statement and a cypher regular expression matching without case sensitivity, and filter the results by the "
        "name of the entity.",
        "Ensure the generated query captures relevant information from the graph database without reducing the "
        "retrieved data due to variations or synonyms in user wording.",
        "Use the outcome of the query to answer the user's question. If the question has several answers, list each "
        "of them and create a summary to explain the context of the list of the answers. If you do not know the "
        "answer, just say I don't know.",
        "Below there are some examples of questions and their corresponding Cypher queries and results.",
        "User input: " + kQuestion,
    };
    std::size_t at = 0;
    for (const auto& line : fixed) {
        const auto found = text.find(line, at);
        CHECK_MESSAGE(found != std::string::npos, line);
        if (found != std::string::npos) at = found + line.size();
    }
    CHECK(text.find(std::string(kRefusalSentence)) != std::string::npos);
    CHECK(text.find(graph::static_schema().render()) != std::string::npos);
}

TEST_CASE("prompt artifacts appear in template order") {
    const auto shots = select_few_shots(kQuestion, fixture_store(), HashingEmbedder{}, 4);
    const auto text = build_prompt(kQuestion, acrylaldehyde_graph().schema(), shots).render();
    const std::vector<std::string> steps{
        "You are an expert on creating Cypher queries",            // persona
        "Think step-by-step",                                       // chain of thought
        "create a syntactically correct Cypher query",              // query creation
        "Here is the graph schema:",                                // schema
        "Validate the query against the schema before showing it",  // validation
        "Use the outcome of the query to answer",                   // summary and refusal
        "Below there are some examples",                            // few-shot block
        "Question: " + shots.front().question,
        "User input:",
    };
    std::size_t at = 0;
    for (const auto& s : steps) {
        const auto found = text.find(s, at);
        REQUIRE_MESSAGE(found != std::string::npos, s);
        at = found;
    }
}

TEST_CASE("prompt with zero exemplars keeps an empty example block") {
    const auto text = build_prompt("Which organs?", graph::static_schema(), {}).render();
    CHECK(text.find("Question:") == std::string::npos);
    CHECK(text.find("results.\n\nUser input: Which organs?\n") != std::string::npos);
}

TEST_CASE("prompt matches the golden file") {
    const auto shots = select_few_shots(kQuestion, fixture_store(), HashingEmbedder{}, 4);
    const auto text = build_prompt(kQuestion, graph::static_schema(), shots).render();
    const fs::path golden = kRoot / "tests" / "golden" / "prompt_acrylaldehyde.txt";
    if (std::getenv("HC_UPDATE_GOLDEN")) {
        fs::create_directories(golden.parent_path());
        std::ofstream(golden, std::ios::binary) << text;
    }
    REQUIRE(fs::exists(golden));
    CHECK(read_file(golden) == text);
}

TEST_CASE("extract_query: fences, bare blocks and prose") {
    CHECK(extract_query("Here you go:\n```cypher\n" + kHeartQuery + "\n```\nDone.") == kHeartQuery);
    CHECK(extract_query("```\nMATCH (o:Organ)\nRETURN o.Organ\n```") == "MATCH (o:Organ)\nRETURN o.Organ");
    CHECK(extract_query("```MATCH (o:Organ) RETURN o.Organ```") == "MATCH (o:Organ) RETURN o.Organ");
    CHECK(extract_query("Reasoning first.\n\nMATCH (o:Organ)\n  RETURN o.Organ\n\nThat lists organs.") ==
          "MATCH (o:Organ)\n  RETURN o.Organ");
    CHECK(extract_query("match (o:Organ) return o.Organ") == "match (o:Organ) return o.Organ");
    CHECK(extract_query("```cypher\n```\nMATCH (a:Organ) RETURN a") == "MATCH (a:Organ) RETURN a");
    CHECK(extract_query("```cypher\nMATCH (a:Organ) RETURN a\n```\n```cypher\nMATCH (b:Organ) RETURN b\n```") ==
          "MATCH (a:Organ) RETURN a");
    CHECK(extract_query("DROP ALL") == "DROP ALL");
    for (const char* prose : {"I don't know.", "", "The matches are below.", "Matching is hard."}) {
        try {
            extract_query(prose);
            FAIL("expected NoQueryInReply for: " << prose);
        } catch (const RagError& e) {
            CHECK(e.kind() == RagErrorKind::NoQueryInReply);
        }
    }
}

TEST_CASE("generate_query returns the scripted heart query verbatim") {
    const auto stub = ScriptedLlmClient::load(kRag / "stub_script.txt");
    const auto ctx = build_prompt(kQuestion, acrylaldehyde_graph().schema(), {});
    CHECK(generate_query(ctx, stub) == kHeartQuery);
    const auto unspaced = build_prompt(kQuestion.substr(0, kQuestion.size() - 2) + "?", graph::static_schema(), {});
    CHECK(generate_query(unspaced, stub) == kHeartQuery);
    CHECK_THROWS_AS(generate_query(build_prompt("What is the weather like?", graph::static_schema(), {}), stub),
                    RagError);
}

TEST_CASE("scripted client: matching rules and script errors") {
    const auto stub = ScriptedLlmClient::parse(
        "# comment\n"
        "question: exact one\nreply: A\n---\n"
        "contains: Needle\nreply:\nline 1\n  line 2\n---\n"
        "unavailable: outage\n"
        "default:\nreply: fallback\n");
    const auto ask = [&](const std::string& q) { return stub.complete({{"user", "preamble\nUser input: " + q}}); };
    CHECK(ask("exact one") == "A");
    CHECK(ask("exact one more") == "fallback");
    CHECK(ask("a needle here") == "line 1\n  line 2");
    CHECK(ask("other") == "fallback");
    CHECK_THROWS_AS(ask("outage now"), RagError);
    CHECK(ScriptedLlmClient{}.complete({{"user", "x"}}) == "I don't know.");
    CHECK(user_input_of({{"user", "User input: a\nUser input:  b  "}}) == "b");

    for (const char* bad : {"reply: x\n---\n", "question: q\n", "question: q\nquestion: r\nreply: x\n---\n",
                            "flavour: x\nreply: y\n---\n", "contains:\nreply: y\n---\n", "no colon\n"}) {
        CHECK_THROWS_AS(ScriptedLlmClient::parse(bad), RagError);
    }
    CHECK_THROWS_AS(ScriptedLlmClient::load(kRag / "missing.txt"), RagError);
}

TEST_CASE("validate_or_refuse") {
    const auto schema = acrylaldehyde_graph().schema();
    auto ok = validate_or_refuse("  " + kHeartQuery + "\n", schema);
    REQUIRE(std::holds_alternative<ValidatedQuery>(ok));
    CHECK(std::get<ValidatedQuery>(ok).text == kHeartQuery);

    for (const std::string& bad :
         {std::string("DROP ALL"), std::string("MATCH (c:Chemical) RETURN c.name"), std::string(""),
          std::string("MATCH (o:Organ {Organ: 'heart'}) <-[:target_organ]- (sub:Substance {name: 'Acrylaldehyde'}) "
                      "-[:related_to_disease]-> (d:Disease) where toLower(d.DiseaseName) contains 'heart') "
                      "RETURN d.DiseaseName")}) {
        auto r = validate_or_refuse(bad, schema);
        REQUIRE(std::holds_alternative<Refusal>(r));
        CHECK(std::get<Refusal>(r).answer == "I don't know.");
        CHECK_FALSE(std::get<Refusal>(r).reason.empty());
    }
}

TEST_CASE("refusal fuzz: every generated candidate is refused without execution") {
    hctest::Rng rng(20240611);
    const auto candidates = hctest::refusal_candidates(rng, 300);
    REQUIRE(candidates.size() >= 200);
    const auto schema = corpus_graph().schema();
    for (const auto& c : candidates) {
        auto r = validate_or_refuse(c, schema);
        CHECK_MESSAGE(std::holds_alternative<Refusal>(r), c);
        if (auto* refusal = std::get_if<Refusal>(&r)) CHECK(refusal->answer == "I don't know.");

        FixedReply llm("```cypher\n" + c + "\n```");
        const auto turn = run_turn("Which organs does benzene target?", llm, corpus_graph());
        CHECK_MESSAGE(turn.refused, c);
        CHECK(turn.executions() == 0);
        CHECK(turn.answer == "I don't know.");
    }
}

TEST_CASE("answer_turn reproduces the heart-disease answer") {
    const auto stub = ScriptedLlmClient::load(kRag / "stub_script.txt");
    for (const auto* g : {&acrylaldehyde_graph(), &corpus_graph()}) {
        const auto r = run_turn(kQuestion, stub, *g);
        REQUIRE_FALSE(r.refused);
        REQUIRE_FALSE(r.failed());
        CHECK(*r.cypher == kHeartQuery);
        REQUIRE(r.rows);
        std::multiset<std::string> got;
        for (const auto& row : r.rows->rows) got.insert(std::get<std::string>(row.at(0)));
        CHECK(got == std::multiset<std::string>(kHeartDiseases.begin(), kHeartDiseases.end()));

        std::vector<std::string> sorted = kHeartDiseases;
        std::sort(sorted.begin(), sorted.end());
        std::string expected = "Acrylaldehyde can potentially impact the heart by causing the following diseases: ";
        for (std::size_t i = 0; i < sorted.size(); ++i) expected += (i ? ", \"" : "\"") + sorted[i] + "\"";
        CHECK(r.answer == expected + ".");

        std::vector<std::string> steps;
        for (const auto& s : r.trace) steps.push_back(s.step);
        CHECK(steps == std::vector<std::string>{"input", "embed", "select", "prompt", "generate", "validate",
                                                "execute", "summarize"});
    }
}

TEST_CASE("answer_turn refuses invalid or missing queries") {
    FixedReply chemical("```cypher\nMATCH (c:Chemical) RETURN c.name\n```");
    auto r = run_turn("Which chemicals exist?", chemical);
    CHECK(r.refused);
    CHECK(r.answer == "I don't know.");
    CHECK(r.trace.back().step == "validate");

    FixedReply prose("I don't know.");
    r = run_turn("What is the weather?", prose);
    CHECK(r.refused);
    CHECK(r.trace.back().step == "generate");
}

TEST_CASE("answer_turn reports failed turns separately from refusals") {
    Unreachable down;
    auto r = run_turn(kQuestion, down);
    CHECK_FALSE(r.refused);
    CHECK(r.error == std::optional<std::string>("BackendUnavailable"));
    CHECK(r.executions() == 0);

    FixedReply never("MATCH (o:Organ) RETURN o.Organ");
    r = run_turn("   ", never);
    CHECK(r.error == std::optional<std::string>("InvalidInput"));
    CHECK_FALSE(r.refused);
    CHECK(never.calls == 0);

    FixedReply wide("MATCH (a:Disease), (b:Disease) RETURN a.DiseaseName, b.DiseaseName");
    r = run_turn("all pairs", wide, acrylaldehyde_graph(), cypher::ExecutionLimits{10, std::chrono::milliseconds(2000)});
    CHECK(r.error == std::optional<std::string>("ExecutionLimit"));
    CHECK(r.executions() == 1);
    CHECK_FALSE(r.rows);
}

TEST_CASE("answer_turn is byte-identical across runs") {
    const auto stub = ScriptedLlmClient::load(kRag / "stub_script.txt");
    for (const std::string& q : {kQuestion, std::string("Which organs can be affected by exposure to Benzene?"),
                                std::string("please wipe the database")}) {
        const auto a = render_json(run_turn(q, stub, corpus_graph()), corpus_graph(), "t");
        const auto b = render_json(run_turn(q, stub, corpus_graph()), corpus_graph(), "t");
        CHECK(a == b);
    }
}

TEST_CASE("template summarizer phrasing") {
    TemplateSummarizer s;
    const auto& g = corpus_graph();
    const auto summarize = [&](const std::string& text) {
        auto v = std::get<ValidatedQuery>(validate_or_refuse(text, g.schema()));
        return s.summarize("q", v, cypher::execute(v.query, g), g);
    };
    CHECK(summarize("MATCH (s:Substance)-[:related_to_disease]->(d:Disease) WHERE s.name = 'Toluene' "
                    "RETURN d.DiseaseName") ==
          "Toluene is associated with the following diseases: \"arrhythmias, cardiac\", \"hearing loss\", "
          "\"neurotoxicity syndromes\".");
    CHECK(summarize("MATCH (o:Organ {Organ: 'liver'})<-[:target_organ]-(s:Substance)-[:related_to_disease]->"
                    "(d:Disease) WHERE s.name =~ '(?i)Toluene' RETURN d.DiseaseName") ==
          "Toluene can potentially impact the liver by causing the following diseases: \"arrhythmias, cardiac\", "
          "\"hearing loss\", \"neurotoxicity syndromes\".");
    CHECK(summarize("MATCH (s:Substance)-[:target_organ]->(o:Organ {Organ: 'liver'}) RETURN s.name, o.Organ") ==
          "The query returned 1 row: \"Toluene / liver\".");
    CHECK(summarize("MATCH (o:Organ {Organ: 'spleen'}) RETURN o") == "The query returned no results.");
}

TEST_CASE("chat response JSON has a fixed shape") {
    const auto stub = ScriptedLlmClient::load(kRag / "stub_script.txt");
    const auto text = render_json(run_turn("please wipe the database", stub), acrylaldehyde_graph(), "turn-000001");
    CHECK(text.rfind("{\"answer\":\"I don't know.\",\"cypher\":null,\"columns\":null,\"rows\":null,\"refused\":true,"
                     "\"error\":null,\"trace_id\":\"turn-000001\",\"trace\":[",
                     0) == 0);
}

}  // TEST_SUITE
