#include "nephra/tangri.hpp"

#include <cmath>
#include <stdexcept>

namespace nephra::tangri {

double tangri_score(const TangriInputs& in) {
    if (in.egfr <= 0.0) throw std::domain_error("tangri_score: egfr must be > 0");
    if (in.acr <= 0.0) throw std::domain_error("tangri_score: acr must be > 0");
    using C = TangriCoefficients;
    const double s = std::exp(C::c_age * (in.age_years / 10.0 - C::m_age) +
                              C::c_male * (in.male - C::m_male) +
                              C::c_egfr * (in.egfr / 5.0 - C::m_egfr) +
                              C::c_acr * (std::log(in.acr) - C::m_logacr));
    return 1.0 - std::pow(C::base, s);
}

UnitRules egfr_unit_rules() { return {"mL/min/1.73m2", {}}; }

UnitRules acr_unit_rules() { return {"mg/g", {{"mg/mmol", 8.84}}}; }

std::optional<LabMax> extract_lab_max(const cohort::Patient& p, const codes::CodeSet& set,
                                      const cohort::CohortSpec& spec, const UnitRules& rules) {
    // group key "" = canonical-comparable; otherwise the raw unit string
    std::map<std::string, std::pair<double, int>> groups;  // key -> (max canonical-or-raw value, count)
    for (const auto& o : p.observations) {
        if (o.date < spec.obs_start || o.date >= spec.obs_end) continue;
        if (!codes::matches(set, o.system, o.code)) continue;
        if (!o.value) continue;
        std::string key;
        double v = *o.value;
        if (o.unit && !o.unit->empty() && *o.unit != rules.canonical) {
            const auto it = rules.to_canonical.find(*o.unit);
            if (it != rules.to_canonical.end()) v *= it->second;
            else key = *o.unit;
        }
        auto [it, inserted] = groups.emplace(key, std::make_pair(v, 1));
        if (!inserted) {
            it->second.first = std::max(it->second.first, v);
            it->second.second += 1;
        }
    }
    if (groups.empty()) return std::nullopt;
    // majority group; ties prefer canonical (key "", which sorts first), then
    // lexicographically smallest unit
    auto best = groups.begin();
    for (auto it = std::next(groups.begin()); it != groups.end(); ++it)
        if (it->second.second > best->second.second) best = it;
    LabMax out;
    out.value = best->second.first;
    out.unit = best->first.empty() ? rules.canonical : best->first;
    out.mixed_units = groups.size() > 1;
    return out;
}

bool tangri_eligible(const cohort::Patient& p, const cohort::CohortSpec& spec) {
    const auto& b = codes::builtin_sets();
    return extract_lab_max(p, b.egfr_loinc, spec, egfr_unit_rules()).has_value() &&
           extract_lab_max(p, b.acr_loinc, spec, acr_unit_rules()).has_value();
}

TangriResult score_patient(const cohort::Patient& p, const cohort::CohortSpec& spec) {
    const auto& b = codes::builtin_sets();
    TangriResult r;
    const auto egfr = extract_lab_max(p, b.egfr_loinc, spec, egfr_unit_rules());
    const auto acr = extract_lab_max(p, b.acr_loinc, spec, acr_unit_rules());
    if (egfr) r.egfr = egfr->value;
    if (acr) r.acr_mg_g = acr->value;
    if (!egfr || !acr) return r;
    r.eligible = true;
    const double age = static_cast<double>(spec.obs_end - p.birth_date) / 365.25;
    if (egfr->value > 0.0 && acr->value > 0.0) {
        r.probability = tangri_score({age, p.sex == cohort::Sex::Male ? 1.0 : 0.0,
                                      egfr->value, acr->value});
    }
    return r;
}

}  // namespace nephra::tangri
