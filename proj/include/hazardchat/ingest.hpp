#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hazardchat/graph.hpp"
#include "hazardchat/model.hpp"

namespace hazardchat::ingest {

enum class IngestErrorKind {
    TemplateMismatch,
    NotHazardous,
    InvalidIdentifier,
    MissingCas,
    MalformedRow,
    EmptyAfterNormalization,
    Io,
};

std::string_view to_string(IngestErrorKind kind) noexcept;

class IngestError : public std::runtime_error {
public:
    IngestError(IngestErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    IngestErrorKind kind() const noexcept { return kind_; }

private:
    IngestErrorKind kind_;
};

struct ChemicalDiseaseLink {
    std::string chemical_id;
    std::optional<CasNumber> cas;
    DiseaseId disease;
    std::string disease_name;
    std::string origin;    // file the link came from
    std::size_t line = 0;  // CSV line, or 1-based row ordinal for XML
};

struct OrganTargetRecord {
    CasNumber cas;
    std::string name;
    std::vector<std::string> organs;
    std::string origin;
};

struct IngestIssue {
    enum class Kind { Skipped, Conflict };
    Kind kind = Kind::Skipped;
    std::string source;
    std::size_t line = 0;
    std::string reason;

    friend bool operator==(const IngestIssue&, const IngestIssue&) = default;
};

struct IngestReport {
    graph::GraphStats counts;
    std::vector<IngestIssue> skipped;
    std::vector<IngestIssue> conflicts;

    void add(IngestIssue issue);

    /// One JSON object per line: count records, then skipped rows, then conflicts.
    void write_jsonl(std::ostream& out) const;
};

struct CtdParseResult {
    std::vector<ChemicalDiseaseLink> links;
    std::vector<IngestIssue> issues;
};

/// Reads one recorded substance factsheet. `warnings` collects non-fatal
/// problems such as an unusable CAS field.
SubstanceRecord parse_reach_factsheet(std::string_view document, std::vector<std::string>* warnings = nullptr);

/// Accepts CSV or XML (detected from the first non-blank character). Malformed
/// rows are reported in `issues` and skipped.
CtdParseResult parse_ctd_links(std::string_view document, std::string_view origin = "ctd");

OrganTargetRecord parse_niosh_page(std::string_view document, std::string_view origin = "niosh");

/// Lowercase, parenthetical segments removed, whitespace collapsed.
/// Throws IngestError(EmptyAfterNormalization).
std::string normalize_organ(std::string_view label);

struct BuildResult {
    graph::GraphBuildPlan plan;
    IngestReport report;
};

/// Joins the three sources on CAS number. Substances come from REACH only;
/// every dropped row or conflict ends up in the report.
BuildResult reconcile_and_build(const std::vector<SubstanceRecord>& reach,
                                const std::vector<ChemicalDiseaseLink>& ctd,
                                const std::vector<OrganTargetRecord>& niosh);

struct CorpusInputs {
    std::vector<SubstanceRecord> reach;
    std::vector<ChemicalDiseaseLink> ctd;
    std::vector<OrganTargetRecord> niosh;
    std::vector<IngestIssue> issues;
};

/// Parses `reach/*.html`, `ctd/links.csv` and/or `ctd/links.xml`, `niosh/*.html`.
/// Throws IngestError(Io) when the directory layout is missing.
CorpusInputs load_corpus(const std::filesystem::path& dir);

/// load_corpus followed by reconcile_and_build, with parse-stage issues merged
/// into the report.
BuildResult ingest_corpus(const std::filesystem::path& dir);

}  // namespace hazardchat::ingest
