#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "../support/generators.hpp"
#include "hazardchat/cypher/executor.hpp"
#include "hazardchat/ingest.hpp"
#include "hazardchat/service.hpp"
#include "hazardchat/snapshot.hpp"

using namespace hazardchat;
using namespace hazardchat::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot(HC_SOURCE_DIR);
const fs::path kRag = kRoot / "fixtures" / "rag";
const std::string kQuestion =
    "What are the potential health impacts, particularly on the heart, of exposure to Acrylaldehyde ?";
const std::string kHeartQuery =
    "MATCH (o:Organ {Organ: 'heart'})<-[:target_organ]-(sub:Substance {name: 'Acrylaldehyde'})"
    "-[:related_to_disease]->(d:Disease) where toLower(d.DiseaseName) contains 'heart' RETURN d.DiseaseName";

struct Workspace {
    fs::path dir;
    fs::path snapshot;
    fs::path config;

    Workspace() {
        dir = fs::temp_directory_path() / ("hc_service_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        snapshot = dir / "corpus.snap";
        if (!fs::exists(snapshot))
            graph::save_snapshot(graph::apply(ingest::ingest_corpus(kRoot / "fixtures" / "corpus").plan), snapshot);
        config = write_config("stub.conf", "");
    }

    fs::path write_config(const std::string& name, const std::string& extra) const {
        const fs::path p = dir / name;
        std::ofstream(p) << "listen.host = 127.0.0.1\n"
                         << "listen.port = 0\n"
                         << "snapshot.path = " << snapshot.string() << "\n"
                         << "exemplars.path = " << (kRag / "exemplars.txt").string() << "\n"
                         << "llm.mode = stub\n"
                         << "llm.stub_script = " << (kRag / "stub_script.txt").string() << "\n"
                         << "cors.allow = http://localhost:5173\n"
                         << extra;
        return p;
    }
};

const Workspace& workspace() {
    static const Workspace w;
    return w;
}

std::unique_ptr<Service> make_service() { return Service::from_config(load_config(workspace().config)); }

json body_of(const HttpResult& r) { return json::parse(r.body); }

std::string chat_body(const std::string& q) { return json{{"question", q}}.dump(); }

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args, const std::string& input = "") {
    std::vector<const char*> argv{"hazardchat"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    std::istringstream in(input);
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, in);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parses a stub configuration") {
    const auto c = parse_config(
        "# comment\nlisten.port = 9000\nsnapshot.path = g.snap\nexemplars.path = /abs/ex.txt\n"
        "llm.mode = stub\nllm.stub_script = s.txt\nlimits.max_rows = 50\nlimits.time_budget_ms = 100\n"
        "cors.allow = http://a, http://b ,\n",
        "/base");
    CHECK(c.port == 9000);
    CHECK(c.snapshot == fs::path("/base/g.snap"));
    CHECK(c.exemplars == fs::path("/abs/ex.txt"));
    CHECK(c.llm_mode == LlmMode::Stub);
    CHECK(c.stub_script == fs::path("/base/s.txt"));
    CHECK(c.embedding_mode == EmbeddingMode::Offline);
    CHECK(c.max_rows == 50);
    CHECK(c.time_budget == std::chrono::milliseconds(100));
    CHECK(c.cors_allow == std::vector<std::string>{"http://a", "http://b"});
}

TEST_CASE("parses a remote configuration without any secret in the file") {
    const auto c = parse_config(
        "snapshot.path = g\nexemplars.path = e\nllm.mode = remote\nllm.endpoint = https://api.example.com\n"
        "llm.model = gpt-4o-mini\nllm.api_key_env = HC_TEST_KEY\nembedding.mode = remote\n"
        "embedding.endpoint = https://api.example.com\nembedding.model = text-embedding-3-small\n");
    CHECK(c.llm_mode == LlmMode::Remote);
    CHECK(c.llm.url == "https://api.example.com");
    CHECK(c.llm.api_key_env == "HC_TEST_KEY");
    CHECK(c.embedding_mode == EmbeddingMode::Remote);
    CHECK(c.embedding.api_key_env == "OPENAI_API_KEY");
}

TEST_CASE("rejects malformed configurations") {
    const std::string base = "snapshot.path = g\nexemplars.path = e\n";
    for (const std::string& bad : {
             base + "llm.mode = stub\n",                                           // no script
             base + "llm.mode = both\nllm.stub_script = s\n",                       // unknown mode
             base + "llm.mode = stub\nllm.stub_script = s\nllm.endpoint = http://x\n",  // two modes
             base + "llm.mode = remote\nllm.endpoint = http://x\n",                // no model
             base + "llm.mode = remote\nllm.endpoint = http://x\nllm.model = m\nllm.stub_script = s\n",
             base + "llm.mode = stub\nllm.stub_script = s\nlisten.port = 70000\n",
             base + "llm.mode = stub\nllm.stub_script = s\nlisten.port = eighty\n",
             base + "llm.mode = stub\nllm.stub_script = s\ncolour = blue\n",
             base + "llm.mode = stub\nllm.stub_script = s\nsnapshot.path = h\n",  // duplicate
             base + "llm.mode = stub\nllm.stub_script = s\nembedding.mode = psychic\n",
             base + "llm.mode = stub\nllm.stub_script = s\nembedding.model = m\n",
             base + "llm.mode = stub\nllm.stub_script = s\njust text\n",
             std::string("llm.mode = stub\nllm.stub_script = s\n"),  // no snapshot
         }) {
        try {
            parse_config(bad);
            FAIL("accepted: " << bad);
        } catch (const ConfigError& e) {
            CHECK(e.kind() == ConfigErrorKind::Syntax);
        }
    }
}

TEST_CASE("load_config fails fast on missing paths") {
    const auto& w = workspace();
    CHECK_NOTHROW(load_config(w.config));
    const auto p = w.dir / "missing.conf";
    std::ofstream(p) << "snapshot.path = nowhere.snap\nexemplars.path = " << (kRag / "exemplars.txt").string()
                     << "\nllm.mode = stub\nllm.stub_script = " << (kRag / "stub_script.txt").string() << "\n";
    try {
        load_config(p);
        FAIL("expected MissingPath");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigErrorKind::MissingPath);
    }
    CHECK_THROWS_AS(load_config(w.dir / "no-such.conf"), ConfigError);
}

TEST_CASE("the shipped example config parses") {
    std::ifstream in(kRag / "stub.conf");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto c = parse_config(buf.str(), kRag);
    CHECK(c.llm_mode == LlmMode::Stub);
    CHECK(c.exemplars == kRag / "exemplars.txt");
}

}  // TEST_SUITE

TEST_SUITE("service") {

TEST_CASE("chat answers the heart question") {
    auto s = make_service();
    const auto r = s->chat(chat_body(kQuestion));
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["refused"] == false);
    CHECK(j["cypher"] == kHeartQuery);
    CHECK(j["rows"].size() == 13);
    CHECK(j["trace_id"] == "turn-000001");
    CHECK(body_of(s->chat(chat_body(kQuestion)))["trace_id"] == "turn-000002");
}

TEST_CASE("chat status codes") {
    auto s = make_service();
    CHECK(s->chat("not json").status == 400);
    CHECK(s->chat("[1,2]").status == 400);
    CHECK(s->chat("{\"question\": 3}").status == 400);
    CHECK(s->chat("{}").status == 400);
    const auto empty = s->chat(chat_body("  "));
    CHECK(empty.status == 400);
    CHECK(body_of(empty)["code"] == "InvalidInput");
    const auto outage = s->chat(chat_body("simulate an outage please"));
    CHECK(outage.status == 502);
    CHECK(body_of(outage)["code"] == "BackendUnavailable");
    CHECK(body_of(outage)["message"].is_string());
    const auto refused = s->chat(chat_body("Which registered chemicals exist?"));
    CHECK(refused.status == 200);
    CHECK(body_of(refused)["refused"] == true);
    CHECK(body_of(refused)["answer"] == "I don't know.");
}

TEST_CASE("query endpoint returns rows or diagnostics") {
    auto s = make_service();
    auto ok = s->query(json{{"cypher", kHeartQuery}}.dump());
    REQUIRE(ok.status == 200);
    CHECK(body_of(ok)["rows"].size() == 13);
    CHECK(body_of(ok)["columns"] == json::array({"d.DiseaseName"}));

    const auto create = s->query(json{{"cypher", "CREATE (n)"}}.dump());
    CHECK(create.status == 422);
    CHECK(body_of(create)["code"] == "UnsupportedFeature");
    CHECK(body_of(create)["diagnostics"][0]["code"] == "UnsupportedFeature");

    const auto chem = s->query(json{{"cypher", "MATCH (c:Chemical) RETURN c"}}.dump());
    CHECK(chem.status == 422);
    CHECK(body_of(chem)["diagnostics"][0]["code"] == "UnknownLabel");

    const auto syntax = s->query(json{{"cypher", "MATCH (n RETURN n"}}.dump());
    CHECK(syntax.status == 422);
    CHECK(body_of(syntax)["code"] == "SyntaxError");
    CHECK(body_of(syntax)["position"].is_number());

    CHECK(s->query("{\"query\": \"x\"}").status == 400);
}

TEST_CASE("non-refused chat rows equal a re-run through the query endpoint") {
    auto s = make_service();
    for (const std::string& q : {kQuestion, std::string("Which organs can be affected by exposure to Benzene?"),
                                std::string("In which product categories is Acrylaldehyde used?")}) {
        const auto chat = body_of(s->chat(chat_body(q)));
        REQUIRE(chat["refused"] == false);
        const auto rerun = body_of(s->query(json{{"cypher", chat["cypher"]}}.dump()));
        CHECK(rerun["rows"] == chat["rows"]);
        CHECK(rerun["columns"] == chat["columns"]);
    }
}

TEST_CASE("query never mutates the graph") {
    auto s = make_service();
    const auto before = graph::canonical_form(s->graph());
    const auto stats_before = s->graph().stats();
    const auto health_before = s->healthz().body;
    hctest::Rng rng(99);
    for (int i = 0; i < 150; ++i) {
        const auto q = hctest::random_query(rng, s->graph(), 3);
        const auto r = s->query(json{{"cypher", cypher::to_cypher(q)}}.dump());
        CHECK((r.status == 200 || r.status == 422));
    }
    for (const char* q : {"CREATE (n)", "MATCH (n) DETACH DELETE n", "MATCH (s:Substance) SET s.name = 'x' RETURN s"})
        CHECK(s->query(json{{"cypher", q}}.dump()).status == 422);
    CHECK(s->graph().stats() == stats_before);
    CHECK(graph::canonical_form(s->graph()) == before);
    CHECK(s->healthz().body == health_before);
}

TEST_CASE("substance lookup") {
    auto s = make_service();
    const auto missing = s->substance("EC:231-791-2");
    CHECK(missing.status == 404);
    CHECK(body_of(missing)["code"] == "NotFound");

    const auto found = s->substance("EC:203-453-4");
    REQUIRE(found.status == 200);
    const auto j = body_of(found);
    CHECK(j["properties"]["name"] == "Acrylaldehyde");
    CHECK(j["neighbors"]["related_to_disease"].size() == 15);
    CHECK(j["neighbors"]["target_organ"].size() == 4);
    CHECK(j["neighbors"]["has_hazard_class"].size() == 7);
    CHECK(j["neighbors"]["in_product_category"].size() == 2);
    CHECK(j["neighbors"]["has_hazard_class"][0]["edge_properties"].contains("hazard_phrase"));
}

TEST_CASE("schema and health") {
    auto s = make_service();
    const auto schema = body_of(s->schema());
    CHECK(schema["labels"].size() == 5);
    CHECK(schema["labels"]["Organ"] == json::array({"Organ"}));
    CHECK(schema["relationships"].size() == 4);
    CHECK(schema["text"].get<std::string>().find("(:Substance)-[:target_organ]->(:Organ)") != std::string::npos);

    const auto health = body_of(s->healthz());
    CHECK(health["status"] == "ok");
    CHECK(health["snapshot_checksum"] == graph::snapshot_checksum(graph::load_snapshot(workspace().snapshot)));
}

TEST_CASE("startup refuses a corrupt snapshot") {
    const auto& w = workspace();
    const auto bad = w.dir / "bad.snap";
    {
        std::ifstream in(w.snapshot, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        std::ofstream(bad, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    }
    auto conf = w.dir / "bad.conf";
    {
        std::ifstream in(w.config);
        std::string text((std::istreambuf_iterator<char>(in)), {});
        const auto at = text.find(w.snapshot.string());
        text.replace(at, w.snapshot.string().size(), bad.string());
        std::ofstream(conf) << text;
    }
    CHECK_THROWS_AS(Service::from_config(load_config(conf)), graph::CorruptSnapshot);
}

TEST_CASE("chat log lines are JSON with the trace id") {
    std::ostringstream sink;
    JsonlLogger logger(&sink);
    auto s = Service::from_config(load_config(workspace().config), &logger);
    s->chat(chat_body(kQuestion));
    std::istringstream lines(sink.str());
    int n = 0;
    for (std::string line; std::getline(lines, line); ++n) {
        const auto j = json::parse(line);
        CHECK(j["trace_id"] == "turn-000001");
        CHECK(j["event"] == "chat_step");
    }
    CHECK(n == 8);
}

TEST_CASE("HTTP server end to end") {
    std::ostringstream sink;
    JsonlLogger logger(&sink);
    auto s = Service::from_config(load_config(workspace().config), &logger);
    HttpServer server(*s, {"http://localhost:5173"}, &logger);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.listen(); });
    server.wait_until_ready();

    httplib::Client c("127.0.0.1", port);
    auto chat = c.Post("/api/chat", chat_body(kQuestion), "application/json");
    REQUIRE(chat);
    CHECK(chat->status == 200);
    CHECK(chat->get_header_value("Content-Type") == "application/json");
    CHECK(json::parse(chat->body)["rows"].size() == 13);

    auto bad = c.Post("/api/chat", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body)["code"] == "BadRequest");

    auto q = c.Post("/api/query", json{{"cypher", "CREATE (n)"}}.dump(), "application/json");
    REQUIRE(q);
    CHECK(q->status == 422);

    auto sub = c.Get("/api/substances/EC%3A203-453-4");
    REQUIRE(sub);
    CHECK(sub->status == 200);
    auto none = c.Get("/api/substances/EC:231-791-2");
    REQUIRE(none);
    CHECK(none->status == 404);

    auto nowhere = c.Get("/api/nothing");
    REQUIRE(nowhere);
    CHECK(nowhere->status == 404);
    CHECK(json::parse(nowhere->body)["code"] == "NotFound");

    auto health = c.Get("/healthz", {{"Origin", "http://localhost:5173"}});
    REQUIRE(health);
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
    auto foreign = c.Get("/api/schema", {{"Origin", "http://evil.example"}});
    REQUIRE(foreign);
    CHECK(foreign->status == 200);
    CHECK_FALSE(foreign->has_header("Access-Control-Allow-Origin"));

    auto preflight = c.Options("/api/chat", {{"Origin", "http://localhost:5173"}});
    REQUIRE(preflight);
    CHECK(preflight->status == 204);
    CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
    auto denied = c.Options("/api/chat", {{"Origin", "http://evil.example"}});
    REQUIRE(denied);
    CHECK(denied->status == 403);

    server.stop();
    t.join();

    bool saw_request = false;
    std::istringstream lines(sink.str());
    for (std::string line; std::getline(lines, line);) {
        const auto j = json::parse(line);
        if (j["event"] == "request" && j["path"] == "/api/chat" && j["status"] == 200) saw_request = true;
    }
    CHECK(saw_request);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("ingest, stats and query") {
    const auto& w = workspace();
    const auto snap = w.dir / "cli.snap";
    auto r = cli({"ingest", (kRoot / "fixtures" / "corpus").string(), "--out", snap.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"record\":\"skipped\"") != std::string::npos);
    CHECK(fs::exists(snap));

    r = cli({"stats", "--snapshot", snap.string(), "--format", "json"});
    REQUIRE(r.code == 0);
    const auto stats = json::parse(r.out);
    CHECK(stats["nodes"]["Substance"] == 6);
    CHECK(stats["edges"]["related_to_disease"] == 27);

    r = cli({"stats", "--snapshot", snap.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("nodes.Disease 24\n") != std::string::npos);

    r = cli({"query", "--snapshot", snap.string()}, kHeartQuery);
    REQUIRE(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 13);
    CHECK(r.out.find("heartburn\n") != std::string::npos);

    r = cli({"query", "--snapshot", snap.string(), "--format", "json"}, kHeartQuery);
    CHECK(json::parse(r.out)["rows"].size() == 13);
    r = cli({"query", "--snapshot", snap.string(), "--format", "table"}, kHeartQuery);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 15);
}

TEST_CASE("exit codes") {
    const auto& w = workspace();
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"query"}).code == 1);
    CHECK(cli({"query", "--snapshot", w.snapshot.string(), "--format", "xml"}).code == 1);
    CHECK(cli({"stats", "--snapshot", (w.dir / "absent.snap").string()}).code == 2);
    CHECK(cli({"ingest", (w.dir / "no-corpus").string(), "--out", (w.dir / "x.snap").string()}).code == 2);

    const auto missing = w.write_config("missing-snap.conf", "");
    {
        std::ifstream in(missing);
        std::string text((std::istreambuf_iterator<char>(in)), {});
        text.replace(text.find(w.snapshot.string()), w.snapshot.string().size(), (w.dir / "gone.snap").string());
        std::ofstream(missing) << text;
    }
    const auto serve = cli({"serve", "--config", missing.string()});
    CHECK(serve.code == 2);
    CHECK(serve.err.find("snapshot not found") != std::string::npos);

    const auto garbage = w.dir / "garbage.snap";
    std::ofstream(garbage) << "not a snapshot\n";
    CHECK(cli({"stats", "--snapshot", garbage.string()}).code == 3);
    CHECK(cli({"query", "--snapshot", w.snapshot.string()}, "MATCH (c:Chemical) RETURN c").code == 3);
    CHECK(cli({"query", "--snapshot", w.snapshot.string()}, "DROP ALL").code == 3);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("ask runs one chat turn") {
    const auto r = cli({"ask", "--config", workspace().config.string(), kQuestion});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["rows"].size() == 13);
    CHECK(cli({"ask", "--config", workspace().config.string(), "simulate an outage"}).code == 2);
}

}  // TEST_SUITE
