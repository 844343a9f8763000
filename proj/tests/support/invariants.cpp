#include "invariants.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace hazardchat;
using namespace hazardchat::ingest;
using graph::EdgeType;
using graph::Label;

namespace hctest {

graph::GraphStats plan_stats(const graph::GraphBuildPlan& plan) {
    graph::GraphStats s;
    for (const auto& n : plan.nodes) ++s.nodes[n.label];
    for (const auto& e : plan.edges) ++s.edges[e.type];
    return s;
}

std::vector<std::string> ingestion_violations(const CorpusInputs& in) {
    std::vector<std::string> bad;
    const auto first = reconcile_and_build(in.reach, in.ctd, in.niosh);
    const auto second = reconcile_and_build(in.reach, in.ctd, in.niosh);
    if (!(graph::canonical_form(first.plan) == graph::canonical_form(second.plan)))
        bad.push_back("rebuilding the same inputs gave a different graph");

    std::set<std::string> reach_keys, reach_cas;
    for (const auto& r : in.reach) {
        reach_keys.insert(canonical_key(r).str());
        if (r.cas) reach_cas.insert(r.cas->str());
    }
    std::map<std::string, std::string> substance_cas;
    for (const auto& n : first.plan.nodes) {
        if (n.label != Label::Substance) continue;
        if (!reach_keys.count(n.key)) bad.push_back("substance " + n.key + " does not come from a REACH record");
        if (auto it = n.properties.find("CAS"); it != n.properties.end()) substance_cas[n.key] = it->second;
    }
    for (const auto& e : first.plan.edges) {
        const auto sig = graph::signature(e.type);
        if (e.from.label != sig.from || e.to.label != sig.to)
            bad.push_back(std::string("edge of type ") + std::string(graph::to_string(e.type)) + " breaks its signature");
        if (!reach_keys.count(e.from.key)) bad.push_back("edge from unknown substance " + e.from.key);
        if (e.type == EdgeType::related_to_disease || e.type == EdgeType::target_organ) {
            auto it = substance_cas.find(e.from.key);
            if (it == substance_cas.end()) bad.push_back("CAS-joined edge from substance without CAS " + e.from.key);
            else if (!reach_cas.count(it->second)) bad.push_back("CAS-joined edge on a CAS absent from REACH");
        }
    }
    for (const auto& l : in.ctd) {
        if (!l.cas || reach_cas.count(l.cas->str())) continue;
        for (const auto& e : first.plan.edges)
            if (e.type == EdgeType::related_to_disease && substance_cas[e.from.key] == l.cas->str())
                bad.push_back("unmatched CTD CAS " + l.cas->str() + " produced an edge");
    }
    if (!(first.report.counts == plan_stats(first.plan))) bad.push_back("report counts differ from the plan");
    if (!(first.report.counts == graph::stats(graph::apply(first.plan))))
        bad.push_back("report counts differ from the built graph");
    return bad;
}

CorpusInputs mutate_corpus(const CorpusInputs& base, Rng& rng) {
    CorpusInputs out = base;
    const auto roll = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    for (int step = 0; step < 4; ++step) {
        switch (roll(7)) {
            case 0:
                if (!out.reach.empty()) out.reach.erase(out.reach.begin() + static_cast<long>(roll(out.reach.size())));
                break;
            case 1:
                if (!out.reach.empty()) out.reach.push_back(out.reach[roll(out.reach.size())]);
                break;
            case 2:
                if (!out.reach.empty()) out.reach[roll(out.reach.size())].cas = CasNumber::parse(random_valid_cas(rng));
                break;
            case 3:
                if (!out.ctd.empty()) out.ctd[roll(out.ctd.size())].cas = CasNumber::parse(random_valid_cas(rng));
                break;
            case 4:
                if (!out.ctd.empty()) out.ctd.push_back(out.ctd[roll(out.ctd.size())]);
                break;
            case 5:
                std::shuffle(out.ctd.begin(), out.ctd.end(), rng);
                std::shuffle(out.niosh.begin(), out.niosh.end(), rng);
                break;
            case 6:
                if (!out.niosh.empty()) {
                    auto& rec = out.niosh[roll(out.niosh.size())];
                    if (!out.reach.empty()) {
                        const auto& donor = out.reach[roll(out.reach.size())];
                        if (donor.cas) rec.cas = *donor.cas;
                    }
                    rec.organs.push_back("organ " + std::to_string(roll(5)));
                }
                break;
        }
    }
    return out;
}

}  // namespace hctest
