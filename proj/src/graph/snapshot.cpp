#include "hazardchat/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hazardchat/model.hpp"

namespace hazardchat::graph {

namespace {

using json = nlohmann::json;

json properties_json(const Properties& props) {
    json out = json::object();
    for (const auto& [k, v] : props) out[k] = v;
    return out;
}

Properties properties_from(const json& j) {
    if (!j.is_object()) throw CorruptSnapshot("record properties are not an object");
    Properties out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw CorruptSnapshot("property '" + k + "' is not a string");
        out.emplace(k, v.get<std::string>());
    }
    return out;
}

std::string body_of(const PropertyGraph& graph) {
    std::string body;
    for (const auto& n : graph.nodes()) {
        json rec = {{"kind", "node"},
                    {"id", n.id},
                    {"label", std::string(to_string(n.label))},
                    {"key", n.key},
                    {"props", properties_json(n.properties)}};
        body += rec.dump(-1, ' ', false);
        body += '\n';
    }
    for (const auto& e : graph.edges()) {
        json rec = {{"kind", "edge"},
                    {"from", e.from},
                    {"to", e.to},
                    {"type", std::string(to_string(e.type))},
                    {"props", properties_json(e.properties)}};
        body += rec.dump(-1, ' ', false);
        body += '\n';
    }
    return body;
}

// Parses "name=<unsigned>" fields of the header.
std::size_t header_count(std::string_view token, std::string_view name) {
    if (token.substr(0, name.size()) != name || token.size() <= name.size() || token[name.size()] != '=')
        throw CorruptSnapshot("bad snapshot header field, expected " + std::string(name));
    std::size_t value = 0;
    const auto digits = token.substr(name.size() + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
        throw CorruptSnapshot("bad snapshot header count " + std::string(name));
    return value;
}

}  // namespace

std::string snapshot_checksum(const PropertyGraph& graph) { return hex16(fnv1a64(body_of(graph))); }

std::string serialize_snapshot(const PropertyGraph& graph) {
    const std::string body = body_of(graph);
    std::ostringstream out;
    out << kSnapshotMagic << ' ' << kSnapshotVersion << " nodes=" << graph.node_count()
        << " edges=" << graph.edge_count() << " fnv1a64=" << hex16(fnv1a64(body)) << '\n'
        << body;
    return out.str();
}

PropertyGraph parse_snapshot(std::string_view bytes) {
    const auto eol = bytes.find('\n');
    if (eol == std::string_view::npos) throw CorruptSnapshot("snapshot has no header line");
    const std::string header(bytes.substr(0, eol));
    const std::string_view body = bytes.substr(eol + 1);

    std::istringstream hs(header);
    std::string magic, version, nodes_tok, edges_tok, sum_tok, extra;
    hs >> magic >> version >> nodes_tok >> edges_tok >> sum_tok;
    if (magic != kSnapshotMagic) throw CorruptSnapshot("not a snapshot file");
    if (version != std::to_string(kSnapshotVersion)) throw CorruptSnapshot("unsupported snapshot version " + version);
    if (hs >> extra) throw CorruptSnapshot("trailing header fields");
    const auto node_total = header_count(nodes_tok, "nodes");
    const auto edge_total = header_count(edges_tok, "edges");
    if (sum_tok.rfind("fnv1a64=", 0) != 0) throw CorruptSnapshot("missing checksum");
    if (sum_tok.substr(8) != hex16(fnv1a64(body))) throw CorruptSnapshot("snapshot checksum mismatch");

    PropertyGraph g;
    std::size_t nodes_seen = 0;
    std::size_t edges_seen = 0;
    std::size_t pos = 0;
    while (pos < body.size()) {
        const auto end = body.find('\n', pos);
        if (end == std::string_view::npos) throw CorruptSnapshot("unterminated record");
        const auto line = body.substr(pos, end - pos);
        pos = end + 1;
        json rec;
        try {
            rec = json::parse(line);
            const auto kind = rec.at("kind").get<std::string>();
            if (kind == "node") {
                if (edges_seen != 0) throw CorruptSnapshot("node record after edge records");
                const auto label = parse_label(rec.at("label").get<std::string>());
                if (!label) throw CorruptSnapshot("unknown label");
                const auto key = rec.at("key").get<std::string>();
                if (rec.at("id").get<std::size_t>() != nodes_seen) throw CorruptSnapshot("node ids out of sequence");
                if (g.find(*label, key)) throw CorruptSnapshot("duplicate node key " + key);
                g.add_node(*label, key, properties_from(rec.at("props")));
                ++nodes_seen;
            } else if (kind == "edge") {
                const auto type = parse_edge_type(rec.at("type").get<std::string>());
                if (!type) throw CorruptSnapshot("unknown edge type");
                g.add_edge(rec.at("from").get<NodeId>(), rec.at("to").get<NodeId>(), *type,
                           properties_from(rec.at("props")));
                ++edges_seen;
            } else {
                throw CorruptSnapshot("unknown record kind " + kind);
            }
        } catch (const json::exception& ex) {
            throw CorruptSnapshot(std::string("malformed record: ") + ex.what());
        } catch (const SchemaViolation& ex) {
            throw CorruptSnapshot(std::string("invalid edge record: ") + ex.what());
        }
    }
    if (nodes_seen != node_total || edges_seen != edge_total) throw CorruptSnapshot("record count mismatch");
    return g;
}

void save_snapshot(const PropertyGraph& graph, const std::filesystem::path& path) {
    const std::string bytes = serialize_snapshot(graph);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoFailure("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoFailure("cannot move snapshot into " + path.string() + ": " + ec.message());
}

PropertyGraph load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open snapshot " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoFailure("read failed for " + path.string());
    return parse_snapshot(buf.str());
}

}  // namespace hazardchat::graph
