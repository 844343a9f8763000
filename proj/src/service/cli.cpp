#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "hazardchat/cypher/parser.hpp"
#include "hazardchat/cypher/validator.hpp"
#include "hazardchat/ingest.hpp"
#include "hazardchat/json_render.hpp"
#include "hazardchat/service.hpp"
#include "hazardchat/snapshot.hpp"

namespace hazardchat::service {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kIo = 2;
constexpr int kData = 3;

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

struct Failure {
    int code;
    std::string message;
};

/// Runs `body`, mapping library exceptions to exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ConfigErrorKind::MissingPath ? kIo : kUsage;
    } catch (const graph::IoFailure& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const graph::CorruptSnapshot& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const ingest::IngestError& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ingest::IngestErrorKind::Io ? kIo : kData;
    } catch (const rag::RagError& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
}

Json stats_json(const graph::PropertyGraph& g) {
    const auto s = g.stats();
    Json nodes = Json::object(), edges = Json::object();
    for (auto label : graph::kAllLabels) nodes[std::string(graph::to_string(label))] = s.count(label);
    for (auto type : graph::kAllEdgeTypes) edges[std::string(graph::to_string(type))] = s.count(type);
    return Json{{"nodes", nodes}, {"edges", edges}, {"checksum", graph::snapshot_checksum(g)}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
    CLI::App app{"HazardChat: hazardous-substance knowledge graph and chat service", "hazardchat"};
    app.require_subcommand(1);

    std::string corpus, snapshot_out, report_path;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse and reconcile a corpus, then save a snapshot");
    ingest_cmd->add_option("corpus-dir", corpus, "Directory with reach/, ctd/ and niosh/")->required();
    ingest_cmd->add_option("--out", snapshot_out, "Snapshot file to write")->required();
    ingest_cmd->add_option("--report", report_path, "Also write the JSONL report to this file");

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "Load a snapshot and serve the HTTP API");
    serve_cmd->add_option("--config", config_path, "Service config file")->required();

    std::string snapshot_path, format = "lines";
    auto* query_cmd = app.add_subcommand("query", "Run one query read from stdin");
    query_cmd->add_option("--snapshot", snapshot_path, "Snapshot file")->required();
    query_cmd->add_option("--format", format, "lines, table or json")
        ->check(CLI::IsMember({"lines", "table", "json"}));

    std::string stats_snapshot, stats_format = "text";
    auto* stats_cmd = app.add_subcommand("stats", "Print node and edge counts of a snapshot");
    stats_cmd->add_option("--snapshot", stats_snapshot, "Snapshot file")->required();
    stats_cmd->add_option("--format", stats_format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::string ask_config, question;
    auto* ask_cmd = app.add_subcommand("ask", "Answer one question through the chat pipeline");
    ask_cmd->add_option("--config", ask_config, "Service config file")->required();
    ask_cmd->add_option("question", question, "Question text")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return kUsage;
    }

    if (*ingest_cmd) {
        return guarded(err, [&] {
            auto built = ingest::ingest_corpus(corpus);
            auto graph = graph::apply(built.plan);
            graph::save_snapshot(graph, snapshot_out);
            built.report.write_jsonl(out);
            if (!report_path.empty()) {
                std::ofstream file(report_path, std::ios::binary);
                if (!file) throw Failure{kIo, "cannot write report " + report_path};
                built.report.write_jsonl(file);
            }
            return kOk;
        });
    }

    if (*serve_cmd) {
        return guarded(err, [&] {
            const auto config = load_config(config_path);
            std::ofstream log_file;
            std::ostream* log_stream = &err;
            if (config.log_path) {
                log_file.open(*config.log_path, std::ios::app);
                if (!log_file) throw Failure{kIo, "cannot open log file " + config.log_path->string()};
                log_stream = &log_file;
            }
            JsonlLogger logger(log_stream);
            auto service = Service::from_config(config, &logger);
            HttpServer server(*service, config.cors_allow, &logger);
            const int port = server.bind(config.host, config.port);
            if (port < 0) throw Failure{kIo, "cannot bind " + config.host + ":" + std::to_string(config.port)};
            logger.write(Json{{"event", "listening"},
                              {"host", config.host},
                              {"port", port},
                              {"nodes", service->graph().node_count()},
                              {"edges", service->graph().edge_count()}}
                             .dump());
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.listen();
            g_server = nullptr;
            return kOk;
        });
    }

    if (*query_cmd) {
        return guarded(err, [&] {
            const auto graph = graph::load_snapshot(snapshot_path);
            const std::string text(std::istreambuf_iterator<char>(in), {});
            cypher::Query q;
            try {
                q = cypher::parse(text);
            } catch (const cypher::QueryError& e) {
                throw Failure{kData, std::string(cypher::to_string(e.kind())) + " at offset " +
                                         std::to_string(e.position()) + ": " + e.what()};
            }
            const auto diags = cypher::validate(q, graph.schema());
            if (!diags.empty()) {
                for (const auto& d : diags) err << cypher::to_string(d.code) << ": " << d.message << '\n';
                throw Failure{kData, "query does not match the schema"};
            }
            cypher::ResultTable table;
            try {
                table = cypher::execute(q, graph);
            } catch (const cypher::QueryError& e) {
                throw Failure{kData, e.what()};
            }
            if (format == "json") {
                out << to_json(table, graph).dump() << '\n';
            } else if (format == "table") {
                out << cypher::render_table(table, graph);
            } else {
                for (const auto& row : table.rows) {
                    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << cypher::render_value(row[c], graph);
                    out << '\n';
                }
            }
            return kOk;
        });
    }

    if (*stats_cmd) {
        return guarded(err, [&] {
            const auto graph = graph::load_snapshot(stats_snapshot);
            const Json s = stats_json(graph);
            if (stats_format == "json") {
                out << s.dump(1) << '\n';
                return kOk;
            }
            for (const auto& [k, v] : s["nodes"].items()) out << "nodes." << k << ' ' << v << '\n';
            for (const auto& [k, v] : s["edges"].items()) out << "edges." << k << ' ' << v << '\n';
            out << "nodes.total " << graph.node_count() << '\n';
            out << "edges.total " << graph.edge_count() << '\n';
            out << "checksum " << s["checksum"].get<std::string>() << '\n';
            return kOk;
        });
    }

    return guarded(err, [&] {
        const auto config = load_config(ask_config);
        auto service = Service::from_config(config);
        const auto result = service->chat(Json{{"question", question}}.dump());
        out << Json::parse(result.body).dump(1) << '\n';
        if (result.status == 502) return kIo;
        return result.status == 200 ? kOk : kData;
    });
}

}  // namespace hazardchat::service
