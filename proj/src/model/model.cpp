#include "hazardchat/model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace hazardchat {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

// Splits `a-b-c` into exactly three groups; returns false otherwise.
bool split3(std::string_view text, std::string_view& a, std::string_view& b, std::string_view& c) {
    const auto first = text.find('-');
    if (first == std::string_view::npos) return false;
    const auto second = text.find('-', first + 1);
    if (second == std::string_view::npos) return false;
    if (text.find('-', second + 1) != std::string_view::npos) return false;
    a = text.substr(0, first);
    b = text.substr(first + 1, second - first - 1);
    c = text.substr(second + 1);
    return true;
}

[[noreturn]] void malformed(std::string_view what, std::string_view text) {
    throw IdentifierError(IdentifierErrorKind::MalformedFormat,
                          std::string("malformed ") + std::string(what) + " '" + std::string(text) + "'");
}

[[noreturn]] void checksum(std::string_view what, std::string_view text) {
    throw IdentifierError(IdentifierErrorKind::ChecksumMismatch,
                          std::string(what) + " check digit mismatch in '" + std::string(text) + "'");
}

}  // namespace

std::string trim(std::string_view text) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto begin = std::find_if_not(text.begin(), text.end(), is_space);
    auto end = std::find_if_not(text.rbegin(), std::string_view::reverse_iterator(begin), is_space).base();
    return std::string(begin, end);
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

CasNumber CasNumber::parse(std::string_view text) {
    const std::string t = trim(text);
    std::string_view head, mid, check;
    if (!split3(t, head, mid, check)) malformed("CAS number", text);
    if (!all_digits(head) || head.size() < 2 || head.size() > 7) malformed("CAS number", text);
    if (!all_digits(mid) || mid.size() != 2) malformed("CAS number", text);
    if (!all_digits(check) || check.size() != 1) malformed("CAS number", text);

    // Rightmost non-check digit has weight 1.
    const std::string body = std::string(head) + std::string(mid);
    int sum = 0;
    int weight = 1;
    for (auto it = body.rbegin(); it != body.rend(); ++it, ++weight) sum += (*it - '0') * weight;
    if (sum % 10 != check[0] - '0') checksum("CAS number", text);
    return CasNumber(t);
}

EcNumber EcNumber::parse(std::string_view text) {
    const std::string t = trim(text);
    std::string_view a, b, check;
    if (!split3(t, a, b, check)) malformed("EC number", text);
    if (!all_digits(a) || a.size() != 3 || !all_digits(b) || b.size() != 3) malformed("EC number", text);
    if (!all_digits(check) || check.size() != 1) malformed("EC number", text);

    const std::string body = std::string(a) + std::string(b);
    int sum = 0;
    for (std::size_t i = 0; i < body.size(); ++i) sum += (body[i] - '0') * static_cast<int>(i + 1);
    const int remainder = sum % 11;
    // A remainder of 10 has no single-digit representation: no valid EC exists for the stem.
    if (remainder == 10 || remainder != check[0] - '0') checksum("EC number", text);
    return EcNumber(t);
}

CasNumber validate_cas(std::string_view text) { return CasNumber::parse(text); }
EcNumber validate_ec(std::string_view text) { return EcNumber::parse(text); }

bool is_valid_cas(std::string_view text) noexcept {
    try {
        (void)CasNumber::parse(text);
        return true;
    } catch (...) {
        return false;
    }
}

bool is_valid_ec(std::string_view text) noexcept {
    try {
        (void)EcNumber::parse(text);
        return true;
    } catch (...) {
        return false;
    }
}

DiseaseId DiseaseId::prefer(std::string_view mesh, std::string_view omim) {
    const std::string m = trim(mesh);
    if (!m.empty()) return DiseaseId{DiseaseScheme::MESH, m};
    const std::string o = trim(omim);
    if (!o.empty()) return DiseaseId{DiseaseScheme::OMIM, o};
    throw std::invalid_argument("disease id needs a MESH or OMIM code");
}

DiseaseId DiseaseId::parse(std::string_view text) {
    const std::string t = trim(text);
    const auto colon = t.find(':');
    if (colon == std::string::npos || colon + 1 >= t.size())
        throw std::invalid_argument("malformed disease id '" + t + "'");
    const std::string scheme = to_lower_ascii(t.substr(0, colon));
    const std::string code = trim(t.substr(colon + 1));
    if (code.empty()) throw std::invalid_argument("malformed disease id '" + t + "'");
    if (scheme == "mesh") return DiseaseId{DiseaseScheme::MESH, code};
    if (scheme == "omim") return DiseaseId{DiseaseScheme::OMIM, code};
    throw std::invalid_argument("unknown disease vocabulary in '" + t + "'");
}

std::string DiseaseId::str() const {
    return (scheme == DiseaseScheme::MESH ? "MESH:" : "OMIM:") + code;
}

std::string_view to_string(Source source) noexcept {
    switch (source) {
        case Source::REACH: return "REACH";
        case Source::CTD: return "CTD";
        case Source::NIOSH: return "NIOSH";
    }
    return "?";
}

std::string SubstanceKey::str() const {
    switch (kind) {
        case KeyKind::EC: return "EC:" + value;
        case KeyKind::CAS: return "CAS:" + value;
        case KeyKind::SYNTHETIC: return "SYN:" + value;
    }
    return value;
}

SubstanceKey SubstanceKey::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("substance key needs a kind prefix");
    const auto kind = text.substr(0, colon);
    std::string value(text.substr(colon + 1));
    if (value.empty()) throw std::invalid_argument("empty substance key");
    if (kind == "EC") return {KeyKind::EC, validate_ec(value).str()};
    if (kind == "CAS") return {KeyKind::CAS, validate_cas(value).str()};
    if (kind == "SYN") return {KeyKind::SYNTHETIC, std::move(value)};
    throw std::invalid_argument("unknown substance key kind '" + std::string(kind) + "'");
}

SubstanceKey canonical_key(const SubstanceRecord& record) {
    if (record.ec) return {KeyKind::EC, record.ec->str()};
    if (record.cas) return {KeyKind::CAS, record.cas->str()};
    const std::string normalized = to_lower_ascii(trim(record.name));
    if (normalized.empty()) throw std::invalid_argument("substance record has no name");
    std::string material = normalized;
    material.push_back('\x1f');
    material += to_string(record.source);
    return {KeyKind::SYNTHETIC, hex16(fnv1a64(material))};
}

}  // namespace hazardchat
