#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hazardchat {

enum class IdentifierErrorKind { MalformedFormat, ChecksumMismatch };

class IdentifierError : public std::runtime_error {
public:
    IdentifierError(IdentifierErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    IdentifierErrorKind kind() const noexcept { return kind_; }

private:
    IdentifierErrorKind kind_;
};

/// European Community number, canonical `NNN-NNN-N` with a mod-11 check digit.
class EcNumber {
public:
    /// Throws IdentifierError on a bad layout or check digit.
    static EcNumber parse(std::string_view text);

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const EcNumber&, const EcNumber&) = default;
    friend auto operator<=>(const EcNumber&, const EcNumber&) = default;

private:
    explicit EcNumber(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

/// CAS registry number, canonical `N{2,7}-NN-N` with a weighted mod-10 check digit.
class CasNumber {
public:
    static CasNumber parse(std::string_view text);

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const CasNumber&, const CasNumber&) = default;
    friend auto operator<=>(const CasNumber&, const CasNumber&) = default;

private:
    explicit CasNumber(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

CasNumber validate_cas(std::string_view text);
EcNumber validate_ec(std::string_view text);

bool is_valid_cas(std::string_view text) noexcept;
bool is_valid_ec(std::string_view text) noexcept;

enum class DiseaseScheme { MESH, OMIM };

struct DiseaseId {
    DiseaseScheme scheme = DiseaseScheme::MESH;
    std::string code;

    /// Picks MESH whenever a MESH code is available. Both empty is an error.
    static DiseaseId prefer(std::string_view mesh, std::string_view omim);

    /// Parses `MESH:D006327` / `OMIM:140450`.
    static DiseaseId parse(std::string_view text);

    /// `MESH:<code>` or `OMIM:<code>`.
    std::string str() const;

    friend bool operator==(const DiseaseId&, const DiseaseId&) = default;
    friend auto operator<=>(const DiseaseId&, const DiseaseId&) = default;
};

enum class Source { REACH, CTD, NIOSH };

std::string_view to_string(Source source) noexcept;

enum class KeyKind { EC, CAS, SYNTHETIC };

struct SubstanceKey {
    KeyKind kind = KeyKind::SYNTHETIC;
    std::string value;

    /// `EC:231-791-2`, `CAS:7732-18-5` or `SYN:<16 hex digits>`.
    std::string str() const;

    /// Inverse of str(). Throws std::invalid_argument.
    static SubstanceKey parse(std::string_view text);

    friend bool operator==(const SubstanceKey&, const SubstanceKey&) = default;
    friend auto operator<=>(const SubstanceKey&, const SubstanceKey&) = default;
};

struct HazardClassification {
    std::string class_name;
    std::string hazard_phrase;

    friend bool operator==(const HazardClassification&, const HazardClassification&) = default;
    friend auto operator<=>(const HazardClassification&, const HazardClassification&) = default;
};

struct SubstanceRecord {
    SubstanceKey key;
    std::string name;
    std::optional<EcNumber> ec;
    std::optional<CasNumber> cas;
    std::vector<HazardClassification> hazard_classes;
    std::vector<std::string> product_categories;
    Source source = Source::REACH;

    friend bool operator==(const SubstanceRecord&, const SubstanceRecord&) = default;
};

/// EC, else CAS, else a synthetic hash of the normalized name and source tag.
/// Throws std::invalid_argument when the name is blank.
SubstanceKey canonical_key(const SubstanceRecord& record);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string hex16(std::uint64_t value);

std::string to_lower_ascii(std::string_view text);
std::string trim(std::string_view text);

}  // namespace hazardchat
