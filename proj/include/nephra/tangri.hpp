#pragma once

#include <map>
#include <optional>
#include <string>

#include "nephra/cohort.hpp"

namespace nephra::tangri {

// 4-variable kidney failure risk equation, original North American
// calibration. Constants are exact; do not re-derive.
struct TangriCoefficients {
    static constexpr double base = 0.9751;
    static constexpr double c_age = -0.2201;
    static constexpr double m_age = 7.036;
    static constexpr double c_male = 0.2467;
    static constexpr double m_male = 0.5642;
    static constexpr double c_egfr = -0.5567;
    static constexpr double m_egfr = 7.222;
    static constexpr double c_acr = 0.4510;
    static constexpr double m_logacr = 5.137;  // natural log, ACR in mg/g
};

struct TangriInputs {
    double age_years;  // > 0
    double male;       // 1 = male, 0 = female
    double egfr;       // mL/min/1.73m2, > 0
    double acr;        // mg/g, > 0
};

// P(renal failure) = 1 - base^S. Throws std::domain_error for egfr <= 0 or
// acr <= 0.
double tangri_score(const TangriInputs& in);

// Unit comparability for lab extraction. Observations in the canonical unit
// (or a unit with a configured conversion factor to it) form the canonical
// group; any other unit string forms its own group. Missing/empty units are
// treated as canonical.
struct UnitRules {
    std::string canonical;
    std::map<std::string, double> to_canonical;  // unit -> multiplicative factor
};

UnitRules egfr_unit_rules();  // canonical mL/min/1.73m2, no conversions
UnitRules acr_unit_rules();   // canonical mg/g; mg/mmol x 8.84

struct LabMax {
    double value = 0.0;       // in canonical unit when from the canonical group
    std::string unit;         // unit of the group the max was taken over
    bool mixed_units = false; // true when incomparable unit groups were present
};

// Max over in-window observations matching `set`, grouped by comparable unit.
// With multiple incomparable groups, the majority group wins (ties prefer the
// canonical group, then the lexicographically smallest unit) and mixed_units
// is set.
std::optional<LabMax> extract_lab_max(const cohort::Patient& p, const codes::CodeSet& set,
                                      const cohort::CohortSpec& spec, const UnitRules& rules);

// Eligible iff both eGFR and ACR were observed in the observation window.
bool tangri_eligible(const cohort::Patient& p, const cohort::CohortSpec& spec);

struct TangriResult {
    bool eligible = false;
    std::optional<double> egfr;
    std::optional<double> acr_mg_g;
    std::optional<double> probability;
};

TangriResult score_patient(const cohort::Patient& p, const cohort::CohortSpec& spec);

}  // namespace nephra::tangri
