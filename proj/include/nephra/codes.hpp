#pragma once

#include <set>
#include <string>
#include <string_view>

namespace nephra::codes {

enum class CodeSystem { ICD10, CPT, LOINC };

std::string to_string(CodeSystem s);
CodeSystem code_system_from_string(std::string_view s);

// Uppercase, strip '.', trim surrounding whitespace. LOINC dashes are kept.
// Throws std::invalid_argument on illegal characters, naming the token.
std::string normalize_code(std::string_view raw);

struct CodeSet {
    std::string name;
    CodeSystem system = CodeSystem::ICD10;
    std::set<std::string> codes;

    bool operator==(const CodeSet&) const = default;
};

// Splits on commas, whitespace, and newlines; normalizes every token.
// Throws std::invalid_argument on an empty token list or an illegal token.
CodeSet parse_code_list(std::string_view text, CodeSystem system, std::string name);

bool matches(const CodeSet& set, CodeSystem system, std::string_view code);

struct BuiltinSets {
    CodeSet rf_icd10;    // renal-failure diagnosis codes
    CodeSet rf_cpt;      // dialysis / transplant procedure codes
    CodeSet egfr_loinc;  // eGFR lab codes
    CodeSet acr_loinc;   // albumin/creatinine ratio lab codes
};

const BuiltinSets& builtin_sets();

// Code-set file: optional '#' comments, header line "system=<ICD10|CPT|LOINC>
// name=<id>", then codes one per line or comma-separated.
CodeSet load_code_set_file(const std::string& path);
std::string serialize_code_set(const CodeSet& set);

}  // namespace nephra::codes
