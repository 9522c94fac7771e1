#include "nephra/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nephra/rng.hpp"

namespace nephra::synth {

void SynthConfig::validate() const {
    auto in01 = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("synth config: ") + name + " must be in [0,1]");
    };
    if (n_patients <= 0) throw std::invalid_argument("synth config: n_patients must be > 0");
    in01(female_frac, "female_frac");
    in01(race_african_american, "race_african_american");
    in01(race_asian, "race_asian");
    in01(race_white, "race_white");
    if (race_african_american + race_asian + race_white > 1.0)
        throw std::invalid_argument("synth config: race fractions sum above 1");
    if (!(age_min > 0.0 && age_max > age_min)) throw std::invalid_argument("synth config: bad age range");
    in01(rf_base_rate, "rf_base_rate");
    in01(prevalent_rate, "prevalent_rate");
    in01(eligibility_rate, "eligibility_rate");
    in01(egfr_only_rate, "egfr_only_rate");
    in01(acr_mmol_frac, "acr_mmol_frac");
    if (n_marker_codes < 0 || n_noise_icd < 0 || n_noise_cpt < 0 || n_noise_loinc < 0)
        throw std::invalid_argument("synth config: negative vocabulary size");
}

SynthConfig parse_synth_config(const std::string& text) {
    SynthConfig c;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kv;
        while (ls >> kv) {
            const size_t eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("synth config line " + std::to_string(lineno) + ": expected key=value, got '" + kv + "'");
            const std::string k = kv.substr(0, eq);
            const std::string v = kv.substr(eq + 1);
            try {
                if (k == "n_patients") c.n_patients = std::stol(v);
                else if (k == "female_frac") c.female_frac = std::stod(v);
                else if (k == "race_african_american") c.race_african_american = std::stod(v);
                else if (k == "race_asian") c.race_asian = std::stod(v);
                else if (k == "race_white") c.race_white = std::stod(v);
                else if (k == "age_min") c.age_min = std::stod(v);
                else if (k == "age_max") c.age_max = std::stod(v);
                else if (k == "rf_base_rate") c.rf_base_rate = std::stod(v);
                else if (k == "prevalent_rate") c.prevalent_rate = std::stod(v);
                else if (k == "outcome_gain") c.outcome_gain = std::stod(v);
                else if (k == "risk_age_coef") c.risk_age_coef = std::stod(v);
                else if (k == "risk_renal_coef") c.risk_renal_coef = std::stod(v);
                else if (k == "risk_comorbid_coef") c.risk_comorbid_coef = std::stod(v);
                else if (k == "risk_access_coef") c.risk_access_coef = std::stod(v);
                else if (k == "marker_gain") c.marker_gain = std::stod(v);
                else if (k == "eligibility_rate") c.eligibility_rate = std::stod(v);
                else if (k == "elig_mult_female") c.elig_mult_female = std::stod(v);
                else if (k == "elig_mult_male") c.elig_mult_male = std::stod(v);
                else if (k == "elig_mult_race_african_american") c.elig_mult_race_african_american = std::stod(v);
                else if (k == "elig_mult_race_asian") c.elig_mult_race_asian = std::stod(v);
                else if (k == "elig_mult_race_white") c.elig_mult_race_white = std::stod(v);
                else if (k == "elig_mult_race_other") c.elig_mult_race_other = std::stod(v);
                else if (k == "elig_risk_coef") c.elig_risk_coef = std::stod(v);
                else if (k == "egfr_only_rate") c.egfr_only_rate = std::stod(v);
                else if (k == "acr_mmol_frac") c.acr_mmol_frac = std::stod(v);
                else if (k == "n_marker_codes") c.n_marker_codes = std::stoi(v);
                else if (k == "n_noise_icd") c.n_noise_icd = std::stoi(v);
                else if (k == "n_noise_cpt") c.n_noise_cpt = std::stoi(v);
                else if (k == "n_noise_loinc") c.n_noise_loinc = std::stoi(v);
                else if (k == "noise_obs_mean") c.noise_obs_mean = std::stod(v);
                else throw std::runtime_error("unknown key '" + k + "'");
            } catch (const std::invalid_argument&) {
                throw std::runtime_error("synth config line " + std::to_string(lineno) + ": bad value for " + k);
            }
        }
    }
    c.validate();
    return c;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synth config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_synth_config(ss.str());
}

namespace {

struct Latents {
    cohort::Sex sex;
    cohort::Race race;
    double age;
    double z_renal;
    double comorbid;
    double access;
    double risk;
    double avail_weight;
    double outcome_weight;
};

double round_to(double v, double unit) { return std::round(v / unit) * unit; }

double group_mult(const SynthConfig& c, cohort::Sex sex, cohort::Race race) {
    const double ms = sex == cohort::Sex::Female ? c.elig_mult_female : c.elig_mult_male;
    double mr = c.elig_mult_race_other;
    switch (race) {
        case cohort::Race::AfricanAmerican: mr = c.elig_mult_race_african_american; break;
        case cohort::Race::Asian: mr = c.elig_mult_race_asian; break;
        case cohort::Race::White: mr = c.elig_mult_race_white; break;
        case cohort::Race::OtherUnknown: break;
    }
    return ms * mr;
}

Latents draw_latents(const SynthConfig& c, Rng& rng) {
    Latents l;
    l.sex = rng.next_double() < c.female_frac ? cohort::Sex::Female : cohort::Sex::Male;
    const double r = rng.next_double();
    if (r < c.race_african_american) l.race = cohort::Race::AfricanAmerican;
    else if (r < c.race_african_american + c.race_asian) l.race = cohort::Race::Asian;
    else if (r < c.race_african_american + c.race_asian + c.race_white) l.race = cohort::Race::White;
    else l.race = cohort::Race::OtherUnknown;
    l.age = c.age_min + rng.next_double() * (c.age_max - c.age_min);
    l.z_renal = rng.next_normal();
    l.comorbid = rng.next_normal();
    l.access = rng.next_normal();
    l.risk = c.risk_age_coef * (l.age - 55.0) / 10.0 + c.risk_renal_coef * l.z_renal +
             c.risk_comorbid_coef * l.comorbid + c.risk_access_coef * l.access;
    l.avail_weight = group_mult(c, l.sex, l.race) * std::exp(c.elig_risk_coef * l.z_renal);
    l.outcome_weight = std::exp(c.outcome_gain * l.risk);
    return l;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

GenerateSummary generate(const SynthConfig& config, uint64_t seed, std::ostream& out,
                         std::ostream& truth_out, const cohort::CohortSpec& spec) {
    config.validate();
    spec.validate();
    const long n = config.n_patients;

    // pass 1: latents + normalizers so mean outcome / availability hit targets
    std::vector<Latents> latents;
    latents.reserve(static_cast<size_t>(n));
    double sum_avail = 0.0, sum_outcome = 0.0;
    for (long i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, static_cast<uint64_t>(i), 0);
        latents.push_back(draw_latents(config, rng));
        sum_avail += latents.back().avail_weight;
        sum_outcome += latents.back().outcome_weight;
    }
    const double avail_scale = config.eligibility_rate * static_cast<double>(n) / sum_avail;
    const double outcome_scale = config.rf_base_rate * static_cast<double>(n) / sum_outcome;
    double clipped_avail = 0.0, clipped_outcome = 0.0;
    for (const auto& l : latents) {
        clipped_avail += std::max(0.0, l.avail_weight * avail_scale - 1.0);
        clipped_outcome += std::max(0.0, l.outcome_weight * outcome_scale - 1.0);
    }
    if (config.eligibility_rate > 0.0 && clipped_avail > 0.1 * config.eligibility_rate * static_cast<double>(n))
        throw std::runtime_error("infeasible eligibility_rate target: availability skew pushes per-patient probabilities above 1");
    if (config.rf_base_rate > 0.0 && clipped_outcome > 0.1 * config.rf_base_rate * static_cast<double>(n))
        throw std::runtime_error("infeasible rf_base_rate target: outcome gain pushes per-patient probabilities above 1");

    const auto& sets = codes::builtin_sets();
    const std::vector<std::string> rf_icd(sets.rf_icd10.codes.begin(), sets.rf_icd10.codes.end());
    const std::vector<std::string> rf_cpt(sets.rf_cpt.codes.begin(), sets.rf_cpt.codes.end());
    const std::vector<std::string> egfr_codes(sets.egfr_loinc.codes.begin(), sets.egfr_loinc.codes.end());
    const std::vector<std::string> acr_codes(sets.acr_loinc.codes.begin(), sets.acr_loinc.codes.end());

    const long obs_span = spec.obs_end - spec.obs_start;
    const long label_span = spec.label_end - spec.label_start;

    GenerateSummary summary;
    summary.n_patients = n;
    truth_out << "id\trisk\tp_outcome\tp_avail\tz_renal\n";
    char buf[64];

    // pass 2: record emission, one substream per patient
    for (long i = 0; i < n; ++i) {
        const Latents& l = latents[static_cast<size_t>(i)];
        Rng rng = Rng::substream(seed, static_cast<uint64_t>(i), 1);
        cohort::Patient p;
        std::snprintf(buf, sizeof(buf), "p%07ld", i);
        p.id = buf;
        p.sex = l.sex;
        p.race = l.race;
        p.birth_date = spec.obs_end - static_cast<Date>(std::lround(l.age * 365.25));

        auto obs_date = [&] { return spec.obs_start + static_cast<Date>(rng.bounded(static_cast<uint64_t>(obs_span))); };

        // noise diagnoses
        const int n_noise = 1 + static_cast<int>(rng.bounded(static_cast<uint64_t>(2.0 * config.noise_obs_mean)));
        for (int k = 0; k < n_noise && config.n_noise_icd > 0; ++k) {
            std::snprintf(buf, sizeof(buf), "Q9%03d", static_cast<int>(rng.bounded(config.n_noise_icd)));
            p.observations.push_back({codes::CodeSystem::ICD10, buf, obs_date(), {}, {}});
        }
        if (config.n_noise_cpt > 0 && rng.next_double() < 0.3) {
            std::snprintf(buf, sizeof(buf), "X%04d", static_cast<int>(rng.bounded(config.n_noise_cpt)));
            p.observations.push_back({codes::CodeSystem::CPT, buf, obs_date(), {}, {}});
        }
        if (config.n_noise_loinc > 0 && rng.next_double() < 0.5) {
            std::snprintf(buf, sizeof(buf), "900%02d-1", static_cast<int>(rng.bounded(config.n_noise_loinc)));
            p.observations.push_back({codes::CodeSystem::LOINC, buf, obs_date(),
                                      round_to(rng.next_normal() * 10.0 + 50.0, 0.1), std::string("U/L")});
        }

        // marker codes carry the planted risk signal
        for (int j = 0; j < config.n_marker_codes; ++j) {
            const double offset = 0.5 + 3.0 * static_cast<double>(j) /
                                            std::max(1, config.n_marker_codes - 1);
            const double p_marker = sigmoid(config.marker_gain * l.risk - offset);
            if (rng.next_double() >= p_marker) continue;
            std::snprintf(buf, sizeof(buf), "K8%03d", j);
            const int extra = static_cast<int>(rng.next_double() * (2.0 + 3.0 * std::max(0.0, l.risk)));
            for (int k = 0; k < 1 + extra; ++k)
                p.observations.push_back({codes::CodeSystem::ICD10, buf, obs_date(), {}, {}});
        }

        // labs
        const double p_avail = std::min(1.0, l.avail_weight * avail_scale);
        const bool labs_available = rng.next_double() < p_avail;
        const bool egfr_only = !labs_available && rng.next_double() < config.egfr_only_rate;
        if (labs_available || egfr_only) {
            const double egfr = std::clamp(round_to(90.0 * std::exp(-0.35 * l.z_renal + 0.1 * rng.next_normal()), 0.1), 3.0, 150.0);
            const std::string& ecode = egfr_codes[rng.bounded(egfr_codes.size())];
            p.observations.push_back({codes::CodeSystem::LOINC, ecode, obs_date(), egfr, std::string("mL/min/1.73m2")});
            if (rng.next_double() < 0.3) {  // repeat measurement, exercises max-of-labs
                const double egfr2 = std::clamp(round_to(egfr * std::exp(0.05 * rng.next_normal()), 0.1), 3.0, 150.0);
                p.observations.push_back({codes::CodeSystem::LOINC, ecode, obs_date(), egfr2, std::string("mL/min/1.73m2")});
            }
        }
        if (labs_available) {
            const double acr = std::clamp(round_to(std::exp(3.4 + 1.1 * l.z_renal + 0.5 * rng.next_normal()), 0.01), 1.0, 5000.0);
            const std::string& acode = acr_codes[rng.bounded(acr_codes.size())];
            if (rng.next_double() < config.acr_mmol_frac) {
                p.observations.push_back({codes::CodeSystem::LOINC, acode, obs_date(),
                                          round_to(acr / 8.84, 0.01), std::string("mg/mmol")});
            } else {
                p.observations.push_back({codes::CodeSystem::LOINC, acode, obs_date(), acr, std::string("mg/g")});
            }
            summary.n_labs_available += 1;
        }

        // outcome placement
        const double p_outcome = std::min(1.0, l.outcome_weight * outcome_scale);
        const bool prevalent = rng.next_double() < config.prevalent_rate;
        const bool positive = rng.next_double() < p_outcome;
        auto place_rf = [&](Date start, long span) {
            const Date d1 = start + static_cast<Date>(rng.bounded(static_cast<uint64_t>(span)));
            if (rng.next_double() < 0.3) {
                p.observations.push_back({codes::CodeSystem::CPT, rf_cpt[rng.bounded(rf_cpt.size())], d1, {}, {}});
            } else {
                const Date d2 = start + static_cast<Date>(rng.bounded(static_cast<uint64_t>(span)));
                p.observations.push_back({codes::CodeSystem::ICD10, rf_icd[rng.bounded(rf_icd.size())], d1, {}, {}});
                p.observations.push_back({codes::CodeSystem::ICD10, rf_icd[rng.bounded(rf_icd.size())], d2, {}, {}});
            }
        };
        if (prevalent) {
            place_rf(spec.obs_start, obs_span);
            summary.n_prevalent += 1;
        } else if (positive) {
            place_rf(spec.label_start, label_span);
            summary.n_positive += 1;
        }

        out << cohort::serialize_patient(p) << "\n";
        char r1[32], r2[32], r3[32], r4[32];
        std::snprintf(r1, sizeof(r1), "%.17g", l.risk);
        std::snprintf(r2, sizeof(r2), "%.17g", prevalent ? 0.0 : p_outcome);
        std::snprintf(r3, sizeof(r3), "%.17g", p_avail);
        std::snprintf(r4, sizeof(r4), "%.17g", l.z_renal);
        truth_out << p.id << '\t' << r1 << '\t' << r2 << '\t' << r3 << '\t' << r4 << '\n';
    }
    return summary;
}

GenerateSummary generate_files(const SynthConfig& config, uint64_t seed, const std::string& out_path,
                               const std::string& truth_path, const cohort::CohortSpec& spec) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write patient stream: " + out_path);
    std::ofstream truth(truth_path, std::ios::binary);
    if (!truth) throw std::runtime_error("cannot write truth sidecar: " + truth_path);
    return generate(config, seed, out, truth, spec);
}

}  // namespace nephra::synth
