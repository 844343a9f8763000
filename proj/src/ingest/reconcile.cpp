#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hazardchat/ingest.hpp"

namespace hazardchat::ingest {

namespace {

using graph::EdgeType;
using graph::Label;
using graph::NodeRef;

class PlanBuilder {
public:
    explicit PlanBuilder(IngestReport& report) : report_(report) {}

    // Returns false when the key already exists.
    bool add_node(Label label, const std::string& key, graph::Properties props) {
        return nodes_.emplace(NodeRef{label, key}, std::move(props)).second;
    }

    const graph::Properties* node(Label label, const std::string& key) const {
        auto it = nodes_.find(NodeRef{label, key});
        return it == nodes_.end() ? nullptr : &it->second;
    }

    bool add_edge(EdgeType type, NodeRef from, NodeRef to, graph::Properties props = {}) {
        return edges_.insert(graph::PlanEdge{type, std::move(from), std::move(to), std::move(props)}).second;
    }

    graph::GraphBuildPlan finish() {
        graph::GraphBuildPlan plan;
        for (auto& [ref, props] : nodes_) plan.nodes.push_back({ref.label, ref.key, props});
        plan.edges.assign(edges_.begin(), edges_.end());
        for (auto label : graph::kAllLabels) report_.counts.nodes[label] = 0;
        for (auto type : graph::kAllEdgeTypes) report_.counts.edges[type] = 0;
        for (const auto& n : plan.nodes) ++report_.counts.nodes[n.label];
        for (const auto& e : plan.edges) ++report_.counts.edges[e.type];
        return plan;
    }

private:
    IngestReport& report_;
    std::map<NodeRef, graph::Properties> nodes_;
    std::set<graph::PlanEdge> edges_;
};

}  // namespace

void IngestReport::add(IngestIssue issue) {
    (issue.kind == IngestIssue::Kind::Conflict ? conflicts : skipped).push_back(std::move(issue));
}

void IngestReport::write_jsonl(std::ostream& out) const {
    using json = nlohmann::json;
    for (const auto& [label, n] : counts.nodes)
        out << json{{"record", "count"}, {"kind", "node"}, {"name", graph::to_string(label)}, {"value", n}}.dump()
            << '\n';
    for (const auto& [type, n] : counts.edges)
        out << json{{"record", "count"}, {"kind", "edge"}, {"name", graph::to_string(type)}, {"value", n}}.dump()
            << '\n';
    const auto issue_line = [&](const char* record, const IngestIssue& i) {
        out << json{{"record", record}, {"source", i.source}, {"line", i.line}, {"reason", i.reason}}.dump() << '\n';
    };
    for (const auto& i : skipped) issue_line("skipped", i);
    for (const auto& i : conflicts) issue_line("conflict", i);
}

BuildResult reconcile_and_build(const std::vector<SubstanceRecord>& reach,
                                const std::vector<ChemicalDiseaseLink>& ctd,
                                const std::vector<OrganTargetRecord>& niosh) {
    BuildResult result;
    auto& report = result.report;
    PlanBuilder plan(report);
    const auto conflict = [&](std::string source, std::size_t line, std::string reason) {
        report.add({IngestIssue::Kind::Conflict, std::move(source), line, std::move(reason)});
    };
    const auto skip = [&](std::string source, std::size_t line, std::string reason) {
        report.add({IngestIssue::Kind::Skipped, std::move(source), line, std::move(reason)});
    };

    // CAS -> substance keys carrying it. CAS numbers are not unique across
    // substances, so several may share one.
    std::map<std::string, std::vector<std::string>> by_cas;

    for (const auto& record : reach) {
        const auto key = canonical_key(record).str();
        graph::Properties props{{"name", record.name}, {"key", key}};
        if (record.ec) props.emplace("EC", record.ec->str());
        if (record.cas) props.emplace("CAS", record.cas->str());
        if (!plan.add_node(Label::Substance, key, std::move(props))) {
            conflict("reach", 0, "duplicate substance key " + key + " ('" + record.name + "'); kept the first");
            continue;
        }
        if (record.cas) {
            auto& holders = by_cas[record.cas->str()];
            if (!holders.empty())
                conflict("reach", 0, "CAS " + record.cas->str() + " shared by " + holders.front() + " and " + key);
            holders.push_back(key);
        }
        const NodeRef substance{Label::Substance, key};
        for (const auto& hc : record.hazard_classes) {
            plan.add_node(Label::HazardClass, hc.class_name, {{"HazardClass", hc.class_name}});
            plan.add_edge(EdgeType::has_hazard_class, substance, {Label::HazardClass, hc.class_name},
                          {{"hazard_phrase", hc.hazard_phrase}});
        }
        for (const auto& category : record.product_categories) {
            plan.add_node(Label::ProductCategory, category, {{"ProductCategory", category}});
            plan.add_edge(EdgeType::in_product_category, substance, {Label::ProductCategory, category});
        }
    }

    for (const auto& link : ctd) {
        if (!link.cas) {
            skip(link.origin, link.line, "ChemicalID " + link.chemical_id + " has no CAS; cannot join to REACH");
            continue;
        }
        auto holders = by_cas.find(link.cas->str());
        if (holders == by_cas.end()) {
            skip(link.origin, link.line, "CAS " + link.cas->str() + " matches no REACH substance");
            continue;
        }
        const std::string disease_key = link.disease.str();
        if (!plan.add_node(Label::Disease, disease_key,
                           {{"DiseaseName", link.disease_name}, {"DiseaseID", disease_key}})) {
            const auto* existing = plan.node(Label::Disease, disease_key);
            const auto& kept = existing->at("DiseaseName");
            if (kept != link.disease_name)
                conflict(link.origin, link.line,
                         "disease " + disease_key + " named '" + link.disease_name + "', kept '" + kept + "'");
        }
        for (const auto& key : holders->second) {
            if (!plan.add_edge(EdgeType::related_to_disease, {Label::Substance, key}, {Label::Disease, disease_key}))
                skip(link.origin, link.line, "duplicate link " + key + " -> " + disease_key);
        }
    }

    for (const auto& record : niosh) {
        auto holders = by_cas.find(record.cas.str());
        if (holders == by_cas.end()) {
            skip(record.origin, 0, "CAS " + record.cas.str() + " matches no REACH substance");
            continue;
        }
        for (const auto& organ : record.organs) {
            plan.add_node(Label::Organ, organ, {{"Organ", organ}});
            for (const auto& key : holders->second) {
                if (!plan.add_edge(EdgeType::target_organ, {Label::Substance, key}, {Label::Organ, organ}))
                    skip(record.origin, 0, "duplicate target organ " + key + " -> " + organ);
            }
        }
    }

    result.plan = plan.finish();
    return result;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError(IngestErrorKind::Io, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir, std::string_view extension) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == extension) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

std::string relative_name(const std::filesystem::path& file, const std::filesystem::path& root) {
    return file.lexically_relative(root).generic_string();
}

}  // namespace

CorpusInputs load_corpus(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IngestError(IngestErrorKind::Io, "corpus directory " + dir.string() + " does not exist");
    if (!std::filesystem::is_directory(dir / "reach"))
        throw IngestError(IngestErrorKind::Io, "corpus directory " + dir.string() + " has no reach/ folder");

    CorpusInputs in;
    const auto issue = [&](IngestIssue::Kind kind, std::string source, std::string reason) {
        in.issues.push_back({kind, std::move(source), 0, std::move(reason)});
    };

    for (const auto& file : sorted_files(dir / "reach", ".html")) {
        const auto name = relative_name(file, dir);
        std::vector<std::string> warnings;
        try {
            in.reach.push_back(parse_reach_factsheet(read_file(file), &warnings));
        } catch (const IngestError& ex) {
            const auto kind = ex.kind() == IngestErrorKind::InvalidIdentifier ? IngestIssue::Kind::Conflict
                                                                               : IngestIssue::Kind::Skipped;
            issue(kind, name, std::string(to_string(ex.kind())) + ": " + ex.what());
        }
        for (auto& w : warnings) issue(IngestIssue::Kind::Conflict, name, std::move(w));
    }

    for (const char* ctd_name : {"ctd/links.csv", "ctd/links.xml"}) {
        const auto file = dir / ctd_name;
        if (!std::filesystem::exists(file)) continue;
        try {
            auto parsed = parse_ctd_links(read_file(file), ctd_name);
            in.ctd.insert(in.ctd.end(), std::make_move_iterator(parsed.links.begin()),
                          std::make_move_iterator(parsed.links.end()));
            in.issues.insert(in.issues.end(), parsed.issues.begin(), parsed.issues.end());
        } catch (const IngestError& ex) {
            issue(IngestIssue::Kind::Skipped, ctd_name, std::string(to_string(ex.kind())) + ": " + ex.what());
        }
    }

    for (const auto& file : sorted_files(dir / "niosh", ".html")) {
        const auto name = relative_name(file, dir);
        try {
            in.niosh.push_back(parse_niosh_page(read_file(file), name));
        } catch (const IngestError& ex) {
            const auto kind = ex.kind() == IngestErrorKind::MissingCas ? IngestIssue::Kind::Conflict
                                                                        : IngestIssue::Kind::Skipped;
            issue(kind, name, std::string(to_string(ex.kind())) + ": " + ex.what());
        }
    }
    return in;
}

BuildResult ingest_corpus(const std::filesystem::path& dir) {
    auto inputs = load_corpus(dir);
    auto result = reconcile_and_build(inputs.reach, inputs.ctd, inputs.niosh);
    IngestReport merged;
    merged.counts = result.report.counts;
    for (auto& i : inputs.issues) merged.add(std::move(i));
    for (auto& i : result.report.skipped) merged.add(std::move(i));
    for (auto& i : result.report.conflicts) merged.add(std::move(i));
    result.report = std::move(merged);
    return result;
}

}  // namespace hazardchat::ingest
