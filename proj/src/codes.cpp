#include "nephra/codes.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nephra::codes {

std::string to_string(CodeSystem s) {
    switch (s) {
        case CodeSystem::ICD10: return "ICD10";
        case CodeSystem::CPT: return "CPT";
        case CodeSystem::LOINC: return "LOINC";
    }
    return "?";
}

CodeSystem code_system_from_string(std::string_view s) {
    if (s == "ICD10") return CodeSystem::ICD10;
    if (s == "CPT") return CodeSystem::CPT;
    if (s == "LOINC") return CodeSystem::LOINC;
    throw std::invalid_argument("unknown code system: '" + std::string(s) + "'");
}

std::string normalize_code(std::string_view raw) {
    size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string out;
    out.reserve(e - b);
    for (size_t i = b; i < e; ++i) {
        const char c = raw[i];
        if (c == '.') continue;
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-') {
            out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        } else {
            throw std::invalid_argument("illegal character in code token '" + std::string(raw.substr(b, e - b)) + "'");
        }
    }
    return out;
}

CodeSet parse_code_list(std::string_view text, CodeSystem system, std::string name) {
    CodeSet set;
    set.name = std::move(name);
    set.system = system;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            set.codes.insert(normalize_code(token));
            token.clear();
        }
    };
    for (char c : text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) flush();
        else token.push_back(c);
    }
    flush();
    if (set.codes.empty()) throw std::invalid_argument("empty code set");
    return set;
}

bool matches(const CodeSet& set, CodeSystem system, std::string_view code) {
    if (system != set.system) return false;
    try {
        return set.codes.count(normalize_code(code)) > 0;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

const BuiltinSets& builtin_sets() {
    static const BuiltinSets sets = [] {
        BuiltinSets b;
        b.rf_icd10 = parse_code_list(
            "I953, R880, T81502A, T81502D, T81502S, T81512A, T81512D, T81512S, "
            "T81522A, T81522D, T81522S, T81532A, T81532D, T81532S, T81592A, "
            "T81592D, T81592S, T8241XA, T8241XD, T8241XS, T8242XA, T8242XD, "
            "T8242XS, T8243XA, T8243XD, T8243XS, T8249XA, T8249XD, T8249XS, "
            "T85611A, T85611D, T85611S, T85621A, T85621D, T85621S, T85631A, "
            "T85631D, T85631S, T85691A, T85691D, T85691S, T8571XA, T8571XD, "
            "T8571XS, Y622, Y841, Z4901, Z4902, Z4931, Z4932, Z9115, Z940, Z992",
            CodeSystem::ICD10, "RF_ICD10");
        b.rf_cpt = parse_code_list(
            "G0257, 36902, 36903, 36904, 36905, 36906, 90940, 99512, 90918, 90945",
            CodeSystem::CPT, "RF_CPT");
        b.egfr_loinc = parse_code_list(
            "33914-3, 48642-3, 48643-1, 50210-4, 50384-7, 62238-1, 69405-9",
            CodeSystem::LOINC, "EGFR_LOINC");
        b.acr_loinc = parse_code_list(
            "32294-1, 14585-4, 30000-4, 30001-2, 32294-1, 59159-4, 76401-9, "
            "77253-3, 77254-1, 9318-7, 44292-1, 14959-1, 14958-3, 13705-9, "
            "9318-7, 58447-4",
            CodeSystem::LOINC, "ACR_LOINC");
        return b;
    }();
    return sets;
}

CodeSet load_code_set_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open code-set file: " + path);
    std::string line;
    std::string body;
    std::string name;
    bool have_header = false;
    CodeSystem system = CodeSystem::ICD10;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first.rfind("system=", 0) == 0) {
            system = code_system_from_string(first.substr(7));
            std::string second;
            if (ls >> second && second.rfind("name=", 0) == 0) name = second.substr(5);
            have_header = true;
            continue;
        }
        body += line;
        body += '\n';
    }
    if (!have_header) throw std::runtime_error("code-set file missing 'system=... name=...' header: " + path);
    if (name.empty()) throw std::runtime_error("code-set file missing name= in header: " + path);
    return parse_code_list(body, system, name);
}

std::string serialize_code_set(const CodeSet& set) {
    std::ostringstream out;
    out << "system=" << to_string(set.system) << " name=" << set.name << "\n";
    for (const auto& c : set.codes) out << c << "\n";
    return out.str();
}

}  // namespace nephra::codes
