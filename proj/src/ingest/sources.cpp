// Parsers for the three recorded source formats. The supported markup is
// documented in docs/fixture_templates.md.
#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <variant>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "hazardchat/html.hpp"
#include "hazardchat/ingest.hpp"

namespace hazardchat::ingest {

namespace {

[[noreturn]] void fail(IngestErrorKind kind, const std::string& what) { throw IngestError(kind, what); }

bool is_placeholder(std::string_view value) {
    return value.empty() || value == "-" || value == "--" || value == "n/a" || value == "N/A";
}

// Splits on commas and semicolons that are not inside parentheses.
std::vector<std::string> split_top_level(std::string_view text) {
    std::vector<std::string> parts;
    std::string current;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')' && depth > 0) --depth;
        if ((c == ',' || c == ';') && depth == 0) {
            parts.push_back(current);
            current.clear();
            continue;
        }
        current.push_back(c);
    }
    parts.push_back(current);
    return parts;
}

// --- CSV (RFC 4180 quoting) ---

struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
    bool unterminated = false;
};

std::vector<CsvRow> read_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    std::size_t line = 1;
    std::size_t pos = 0;
    while (pos < text.size()) {
        CsvRow row;
        row.line = line;
        std::string field;
        bool in_quotes = false;
        bool done = false;
        while (!done) {
            if (pos >= text.size()) {
                row.unterminated = in_quotes;
                row.fields.push_back(std::move(field));
                break;
            }
            const char c = text[pos++];
            if (in_quotes) {
                if (c == '"') {
                    if (pos < text.size() && text[pos] == '"') {
                        field.push_back('"');
                        ++pos;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                }
            } else if (c == '"') {
                in_quotes = true;
            } else if (c == ',') {
                row.fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
                ++line;
                row.fields.push_back(std::move(field));
                done = true;
            } else {
                field.push_back(c);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct CtdColumns {
    std::string chemical_id;
    std::string cas;
    std::string disease_id;
    std::string disease_name;
    std::string omim_ids;
};

// Builds a link from one row of named values, or explains why it cannot.
std::variant<ChemicalDiseaseLink, IngestIssue> link_from_row(const CtdColumns& row, std::string_view origin,
                                                             std::size_t line) {
    const auto skipped = [&](std::string reason, IngestIssue::Kind kind = IngestIssue::Kind::Skipped) {
        return IngestIssue{kind, std::string(origin), line, std::move(reason)};
    };
    ChemicalDiseaseLink link;
    link.origin = origin;
    link.line = line;
    link.chemical_id = trim(row.chemical_id);
    link.disease_name = trim(row.disease_name);
    if (link.disease_name.empty()) return skipped("malformed row: empty DiseaseName");

    const std::string cas = trim(row.cas);
    if (!is_placeholder(cas)) {
        try {
            link.cas = validate_cas(cas);
        } catch (const IdentifierError& ex) {
            return skipped(std::string("CAS rejected: ") + ex.what(), IngestIssue::Kind::Conflict);
        }
    }
    if (link.chemical_id.empty() && !link.cas) return skipped("malformed row: neither ChemicalID nor CAS");

    std::string mesh, omim;
    std::string id_field = row.disease_id;
    std::replace(id_field.begin(), id_field.end(), '|', ',');
    for (const auto& raw : split_top_level(id_field)) {
        const std::string id = trim(raw);
        if (id.empty()) continue;
        try {
            const auto parsed = DiseaseId::parse(id);
            auto& slot = parsed.scheme == DiseaseScheme::MESH ? mesh : omim;
            if (slot.empty()) slot = parsed.code;
        } catch (const std::invalid_argument& ex) {
            return skipped(std::string("malformed row: ") + ex.what());
        }
    }
    std::string omim_field = row.omim_ids;
    std::replace(omim_field.begin(), omim_field.end(), '|', ',');
    for (const auto& raw : split_top_level(omim_field)) {
        std::string id = trim(raw);
        if (id.rfind("OMIM:", 0) == 0) id = id.substr(5);
        if (!id.empty() && omim.empty()) omim = id;
    }
    try {
        link.disease = DiseaseId::prefer(mesh, omim);
    } catch (const std::invalid_argument&) {
        return skipped("malformed row: no disease identifier");
    }
    return link;
}

enum class CtdField { ChemicalId, Cas, DiseaseId, DiseaseName, OmimIds };

const std::map<std::string, CtdField> kColumnNames{
    {"chemicalid", CtdField::ChemicalId}, {"cas", CtdField::Cas},
    {"casrn", CtdField::Cas},             {"diseaseid", CtdField::DiseaseId},
    {"diseasename", CtdField::DiseaseName}, {"omimids", CtdField::OmimIds},
};

std::string& field_of(CtdColumns& cols, CtdField f) {
    switch (f) {
        case CtdField::ChemicalId: return cols.chemical_id;
        case CtdField::Cas: return cols.cas;
        case CtdField::DiseaseId: return cols.disease_id;
        case CtdField::DiseaseName: return cols.disease_name;
        case CtdField::OmimIds: return cols.omim_ids;
    }
    return cols.omim_ids;
}

void require_columns(const std::map<CtdField, std::size_t>& have) {
    for (auto f : {CtdField::ChemicalId, CtdField::Cas, CtdField::DiseaseId, CtdField::DiseaseName}) {
        if (!have.count(f))
            fail(IngestErrorKind::TemplateMismatch,
                 "CTD header lacks one of ChemicalID, CAS, DiseaseID, DiseaseName");
    }
}

CtdParseResult parse_ctd_csv(std::string_view document, std::string_view origin) {
    CtdParseResult out;
    std::map<CtdField, std::size_t> column_of;
    std::size_t width = 0;
    bool have_header = false;
    for (auto& row : read_csv(document)) {
        const bool blank = row.fields.size() == 1 && trim(row.fields[0]).empty();
        if (blank) continue;
        if (!row.fields.empty() && !row.fields[0].empty() && row.fields[0][0] == '#') continue;
        if (!have_header) {
            for (std::size_t i = 0; i < row.fields.size(); ++i) {
                auto it = kColumnNames.find(to_lower_ascii(trim(row.fields[i])));
                if (it != kColumnNames.end()) column_of.emplace(it->second, i);
            }
            require_columns(column_of);
            width = row.fields.size();
            have_header = true;
            continue;
        }
        if (row.unterminated || row.fields.size() != width) {
            out.issues.push_back({IngestIssue::Kind::Skipped, std::string(origin), row.line,
                                  "malformed row: expected " + std::to_string(width) + " fields, got " +
                                      std::to_string(row.fields.size())});
            continue;
        }
        CtdColumns cols;
        for (const auto& [f, index] : column_of) field_of(cols, f) = row.fields[index];
        auto result = link_from_row(cols, origin, row.line);
        if (auto* link = std::get_if<ChemicalDiseaseLink>(&result)) out.links.push_back(std::move(*link));
        else out.issues.push_back(std::get<IngestIssue>(std::move(result)));
    }
    return out;
}

CtdParseResult parse_ctd_xml(std::string_view document, std::string_view origin) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(document)};
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& ex) {
        fail(IngestErrorKind::TemplateMismatch, std::string("CTD XML unreadable: ") + ex.what());
    }
    const pt::ptree* root_ptr = nullptr;
    for (const auto& [tag, child] : tree) {
        if (tag == "<xmlcomment>" || tag == "<xmlattr>") continue;
        root_ptr = &child;
        break;
    }
    if (!root_ptr) return {};
    CtdParseResult out;
    const auto& root = *root_ptr;
    std::size_t ordinal = 0;
    for (const auto& [tag, row] : root) {
        if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
        ++ordinal;
        CtdColumns cols;
        for (const auto& [field, value] : row) {
            auto it = kColumnNames.find(to_lower_ascii(field));
            if (it != kColumnNames.end()) field_of(cols, it->second) = value.get_value<std::string>();
        }
        auto result = link_from_row(cols, origin, ordinal);
        if (auto* link = std::get_if<ChemicalDiseaseLink>(&result)) out.links.push_back(std::move(*link));
        else out.issues.push_back(std::get<IngestIssue>(std::move(result)));
    }
    return out;
}

}  // namespace

std::string_view to_string(IngestErrorKind kind) noexcept {
    switch (kind) {
        case IngestErrorKind::TemplateMismatch: return "TemplateMismatch";
        case IngestErrorKind::NotHazardous: return "NotHazardous";
        case IngestErrorKind::InvalidIdentifier: return "InvalidIdentifier";
        case IngestErrorKind::MissingCas: return "MissingCas";
        case IngestErrorKind::MalformedRow: return "MalformedRow";
        case IngestErrorKind::EmptyAfterNormalization: return "EmptyAfterNormalization";
        case IngestErrorKind::Io: return "Io";
    }
    return "?";
}

std::string normalize_organ(std::string_view label) {
    std::string kept;
    int depth = 0;
    for (char c : label) {
        if (c == '(') {
            ++depth;
            continue;
        }
        if (c == ')') {
            if (depth > 0) --depth;
            continue;
        }
        if (depth == 0) kept.push_back(c);
    }
    std::string out;
    bool pending_space = false;
    for (unsigned char c : kept) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (out.empty())
        throw IngestError(IngestErrorKind::EmptyAfterNormalization,
                          "organ label '" + std::string(label) + "' is empty after normalization");
    return out;
}

SubstanceRecord parse_reach_factsheet(std::string_view document, std::vector<std::string>* warnings) {
    namespace h = html;
    const auto root = h::parse(document);
    const auto warn = [&](std::string message) {
        if (warnings) warnings->push_back(std::move(message));
    };

    const auto* name_el = h::find_first(root, h::class_is("", "substance-name"));
    if (!name_el) fail(IngestErrorKind::TemplateMismatch, "factsheet has no substance-name element");
    SubstanceRecord record;
    record.source = Source::REACH;
    record.name = h::text_content(*name_el);
    if (record.name.empty()) fail(IngestErrorKind::TemplateMismatch, "factsheet substance name is empty");

    const auto* ids = h::find_first(root, h::class_is("dl", "identifiers"));
    if (!ids) fail(IngestErrorKind::TemplateMismatch, "factsheet has no identifiers list");
    std::string pending_label;
    for (const auto* item : h::find_all(*ids, [](const h::Element& e) { return e.tag == "dt" || e.tag == "dd"; })) {
        if (item->tag == "dt") {
            pending_label = to_lower_ascii(h::text_content(*item));
            continue;
        }
        const std::string value = h::text_content(*item);
        const bool is_ec = pending_label.rfind("ec", 0) == 0;
        const bool is_cas = pending_label.find("cas") != std::string::npos;
        pending_label.clear();
        if (is_placeholder(value)) continue;
        if (is_ec) {
            if (record.ec) {
                warn("additional EC number " + value + " ignored; kept " + record.ec->str());
                continue;
            }
            try {
                record.ec = validate_ec(value);
            } catch (const IdentifierError& ex) {
                fail(IngestErrorKind::InvalidIdentifier, std::string("factsheet EC rejected: ") + ex.what());
            }
        } else if (is_cas) {
            if (record.cas) {
                warn("additional CAS number " + value + " ignored; kept " + record.cas->str());
                continue;
            }
            try {
                record.cas = validate_cas(value);
            } catch (const IdentifierError& ex) {
                warn(std::string("CAS dropped: ") + ex.what());
            }
        }
    }

    const auto* hazards = h::find_first(root, h::class_is("", "hazard-classification"));
    if (hazards) {
        for (const auto* row : h::find_all(*hazards, h::tag_is("tr"))) {
            const auto cells = h::find_all(*row, h::tag_is("td"));
            if (cells.empty()) continue;  // header row
            if (cells.size() < 2)
                fail(IngestErrorKind::TemplateMismatch, "hazard row needs class and statement cells");
            HazardClassification hc{h::text_content(*cells[0]), h::text_content(*cells[1])};
            if (hc.class_name.empty()) fail(IngestErrorKind::TemplateMismatch, "hazard row has an empty class");
            if (std::find(record.hazard_classes.begin(), record.hazard_classes.end(), hc) ==
                record.hazard_classes.end())
                record.hazard_classes.push_back(std::move(hc));
        }
    }
    if (record.hazard_classes.empty())
        fail(IngestErrorKind::NotHazardous, "substance '" + record.name + "' has no hazard classification");

    if (const auto* products = h::find_first(root, h::class_is("", "product-categories"))) {
        for (const auto* li : h::find_all(*products, h::tag_is("li"))) {
            std::string category = h::text_content(*li);
            if (category.empty()) continue;
            if (std::find(record.product_categories.begin(), record.product_categories.end(), category) ==
                record.product_categories.end())
                record.product_categories.push_back(std::move(category));
        }
    }

    record.key = canonical_key(record);
    return record;
}

OrganTargetRecord parse_niosh_page(std::string_view document, std::string_view origin) {
    namespace h = html;
    const auto root = h::parse(document);
    const auto* table = h::find_first(root, h::class_is("table", "npg-data"));
    if (!table) fail(IngestErrorKind::TemplateMismatch, "pocket-guide page has no npg-data table");

    std::string name;
    if (const auto* title = h::find_first(root, h::class_is("", "chemical-name"))) name = h::text_content(*title);

    std::optional<std::string> cas_text;
    std::optional<std::string> organs_text;
    for (const auto* row : h::find_all(*table, h::tag_is("tr"))) {
        const auto* th = h::find_first(*row, h::tag_is("th"));
        const auto* td = h::find_first(*row, h::tag_is("td"));
        if (!th || !td) continue;
        const std::string label = to_lower_ascii(h::text_content(*th));
        if (label.rfind("cas", 0) == 0) cas_text = h::text_content(*td);
        else if (label.rfind("target organ", 0) == 0) organs_text = h::text_content(*td);
    }
    if (!cas_text || is_placeholder(*cas_text)) fail(IngestErrorKind::MissingCas, "pocket-guide page has no CAS");
    std::optional<CasNumber> cas;
    try {
        cas = validate_cas(*cas_text);
    } catch (const IdentifierError& ex) {
        fail(IngestErrorKind::MissingCas, std::string("pocket-guide CAS unusable: ") + ex.what());
    }
    OrganTargetRecord record{*cas, std::move(name), {}, std::string(origin)};
    if (!organs_text) fail(IngestErrorKind::TemplateMismatch, "pocket-guide page has no Target Organs row");

    std::string list = trim(*organs_text);
    while (!list.empty() && list.back() == '.') list.pop_back();
    for (const auto& part : split_top_level(list)) {
        std::string organ;
        try {
            organ = normalize_organ(part);
        } catch (const IngestError&) {
            continue;
        }
        if (std::find(record.organs.begin(), record.organs.end(), organ) == record.organs.end())
            record.organs.push_back(std::move(organ));
    }
    return record;
}

CtdParseResult parse_ctd_links(std::string_view document, std::string_view origin) {
    const auto first = std::find_if(document.begin(), document.end(),
                                    [](unsigned char c) { return !std::isspace(c); });
    if (first == document.end()) return {};
    if (*first == '<') return parse_ctd_xml(document, origin);
    return parse_ctd_csv(document, origin);
}

}  // namespace hazardchat::ingest
