#include "nephra/cohort.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "nephra/rng.hpp"

namespace nephra::cohort {

using nlohmann::json;

std::string to_string(Sex s) { return s == Sex::Male ? "male" : "female"; }

std::string to_string(Race r) {
    switch (r) {
        case Race::AfricanAmerican: return "AfricanAmerican";
        case Race::Asian: return "Asian";
        case Race::White: return "White";
        case Race::OtherUnknown: return "OtherUnknown";
    }
    return "?";
}

Sex sex_from_string(std::string_view s) {
    if (s == "male") return Sex::Male;
    if (s == "female") return Sex::Female;
    throw std::invalid_argument("unknown sex: '" + std::string(s) + "'");
}

Race race_from_string(std::string_view s) {
    if (s == "AfricanAmerican") return Race::AfricanAmerican;
    if (s == "Asian") return Race::Asian;
    if (s == "White") return Race::White;
    if (s == "OtherUnknown" || s == "Other/Unknown") return Race::OtherUnknown;
    throw std::invalid_argument("unknown race: '" + std::string(s) + "'");
}

void CohortSpec::validate() const {
    if (!(obs_start < obs_end && obs_end <= label_start && label_start < label_end))
        throw std::invalid_argument("cohort spec windows must satisfy obs_start < obs_end <= label_start < label_end");
}

CohortSpec default_cohort_spec() {
    return {days_from_civil(2015, 1, 1), days_from_civil(2016, 1, 1),
            days_from_civil(2016, 4, 1), days_from_civil(2017, 4, 1)};
}

std::string to_string(Status s) {
    switch (s) {
        case Status::ExcludedPrevalent: return "excluded_prevalent";
        case Status::Negative: return "negative";
        case Status::Positive: return "positive";
    }
    return "?";
}

Status status_from_string(std::string_view s) {
    if (s == "excluded_prevalent") return Status::ExcludedPrevalent;
    if (s == "negative") return Status::Negative;
    if (s == "positive") return Status::Positive;
    throw std::invalid_argument("unknown status: '" + std::string(s) + "'");
}

namespace {

const std::unordered_set<std::string> kPatientKeys = {"id", "birth_date", "sex", "race", "observations"};
const std::unordered_set<std::string> kObsKeys = {"system", "code", "date", "value", "unit"};
const std::unordered_set<std::string> kLabeledExtraKeys = {"status", "age_years", "split"};

Observation parse_observation(const json& j, bool strict) {
    if (!j.is_object()) throw std::runtime_error("observation is not an object");
    if (strict) {
        for (const auto& [k, v] : j.items())
            if (!kObsKeys.count(k)) throw std::runtime_error("unknown observation field '" + k + "'");
    }
    Observation o;
    o.system = codes::code_system_from_string(j.at("system").get<std::string>());
    o.code = codes::normalize_code(j.at("code").get<std::string>());
    o.date = parse_date(j.at("date").get<std::string>());
    if (j.contains("value")) o.value = j.at("value").get<double>();
    if (j.contains("unit")) o.unit = j.at("unit").get<std::string>();
    return o;
}

Patient parse_patient(const json& j, bool strict, bool allow_labeled_fields) {
    if (!j.is_object()) throw std::runtime_error("record is not an object");
    if (strict) {
        for (const auto& [k, v] : j.items()) {
            if (kPatientKeys.count(k)) continue;
            if (allow_labeled_fields && kLabeledExtraKeys.count(k)) continue;
            throw std::runtime_error("unknown field '" + k + "'");
        }
    }
    Patient p;
    p.id = j.at("id").get<std::string>();
    if (p.id.empty()) throw std::runtime_error("empty patient id");
    p.birth_date = parse_date(j.at("birth_date").get<std::string>());
    p.sex = sex_from_string(j.at("sex").get<std::string>());
    p.race = race_from_string(j.at("race").get<std::string>());
    if (j.contains("observations")) {
        for (const auto& jo : j.at("observations")) p.observations.push_back(parse_observation(jo, strict));
    }
    return p;
}

json observation_to_json(const Observation& o) {
    json j{{"system", codes::to_string(o.system)}, {"code", o.code}, {"date", format_date(o.date)}};
    if (o.value) j["value"] = *o.value;
    if (o.unit) j["unit"] = *o.unit;
    return j;
}

json patient_to_json(const Patient& p) {
    json obs = json::array();
    for (const auto& o : p.observations) obs.push_back(observation_to_json(o));
    return json{{"id", p.id}, {"birth_date", format_date(p.birth_date)},
                {"sex", to_string(p.sex)}, {"race", to_string(p.race)}, {"observations", std::move(obs)}};
}

}  // namespace

std::vector<Patient> ingest(std::istream& in, const IngestOptions& opts) {
    std::vector<Patient> patients;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            Patient p = parse_patient(j, opts.strict, /*allow_labeled_fields=*/false);
            if (!seen.insert(p.id).second)
                throw std::runtime_error("duplicate patient id '" + p.id + "'");
            patients.push_back(std::move(p));
        } catch (const IngestError&) {
            throw;
        } catch (const std::exception& e) {
            throw IngestError(lineno, e.what());
        }
    }
    return patients;
}

std::vector<Patient> ingest_file(const std::string& path, const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open patient file: " + path);
    return ingest(in, opts);
}

std::string serialize_patient(const Patient& p) { return patient_to_json(p).dump(); }

bool outcome_in_window(const Patient& p, const codes::CodeSet& icd_set,
                       const codes::CodeSet& cpt_set, Date start, Date end,
                       const OutcomeThresholds& th) {
    int icd_hits = 0, cpt_hits = 0;
    for (const auto& o : p.observations) {
        if (o.date < start || o.date >= end) continue;
        if (o.system == codes::CodeSystem::ICD10 && icd_set.codes.count(o.code)) ++icd_hits;
        else if (o.system == codes::CodeSystem::CPT && cpt_set.codes.count(o.code)) ++cpt_hits;
    }
    return icd_hits >= th.icd_min || cpt_hits >= th.cpt_min;
}

std::vector<LabeledPatient> build_cohort(std::vector<Patient> patients, const CohortSpec& spec,
                                         const codes::CodeSet& icd_set, const codes::CodeSet& cpt_set,
                                         const OutcomeThresholds& th) {
    spec.validate();
    std::vector<LabeledPatient> out;
    out.reserve(patients.size());
    constexpr Date kDistantPast = days_from_civil(1800, 1, 1);
    for (auto& p : patients) {
        LabeledPatient lp;
        lp.age_years = static_cast<double>(spec.obs_end - p.birth_date) / 365.25;
        if (outcome_in_window(p, icd_set, cpt_set, kDistantPast, spec.label_start, th))
            lp.status = Status::ExcludedPrevalent;
        else if (outcome_in_window(p, icd_set, cpt_set, spec.label_start, spec.label_end, th))
            lp.status = Status::Positive;
        else
            lp.status = Status::Negative;
        lp.patient = std::move(p);
        out.push_back(std::move(lp));
    }
    return out;
}

void split(std::vector<LabeledPatient>& cohort, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must be in (0, 1)");
    std::vector<size_t> eligible;
    for (size_t i = 0; i < cohort.size(); ++i)
        if (cohort[i].status != Status::ExcludedPrevalent) eligible.push_back(i);
    Rng rng(seed);
    rng.shuffle(eligible);
    const size_t n_train = static_cast<size_t>(static_cast<double>(eligible.size()) * train_fraction);
    for (size_t k = 0; k < eligible.size(); ++k)
        cohort[eligible[k]].split = k < n_train ? SplitSide::Train : SplitSide::Validation;
}

std::string serialize_labeled(const LabeledPatient& lp) {
    json j = patient_to_json(lp.patient);
    j["status"] = to_string(lp.status);
    j["age_years"] = lp.age_years;
    if (lp.split) j["split"] = (*lp.split == SplitSide::Train) ? "train" : "validation";
    return j.dump();
}

std::vector<LabeledPatient> read_labeled_cohort(std::istream& in) {
    std::vector<LabeledPatient> out;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            LabeledPatient lp;
            lp.patient = parse_patient(j, /*strict=*/false, /*allow_labeled_fields=*/true);
            lp.status = status_from_string(j.at("status").get<std::string>());
            lp.age_years = j.at("age_years").get<double>();
            if (j.contains("split")) {
                const std::string s = j.at("split").get<std::string>();
                if (s == "train") lp.split = SplitSide::Train;
                else if (s == "validation") lp.split = SplitSide::Validation;
                else throw std::runtime_error("unknown split '" + s + "'");
            }
            if (!seen.insert(lp.patient.id).second)
                throw std::runtime_error("duplicate patient id '" + lp.patient.id + "'");
            out.push_back(std::move(lp));
        } catch (const std::exception& e) {
            throw IngestError(lineno, e.what());
        }
    }
    return out;
}

std::vector<LabeledPatient> read_labeled_cohort_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cohort file: " + path);
    return read_labeled_cohort(in);
}

}  // namespace nephra::cohort
