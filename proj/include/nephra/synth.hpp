#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nephra/cohort.hpp"

namespace nephra::synth {

// Generator knobs. Latent per-patient structure: z_renal (kidney function),
// comorbidity burden, care access. Outcome probability follows
// exp(outcome_gain * risk); marker-code presence follows the same risk, so
// planted signal is learnable from non-lab features. Lab availability is
// skewed both by subgroup membership and (optionally) by z_renal.
struct SynthConfig {
    long n_patients = 0;

    // demographics
    double female_frac = 0.611;
    double race_african_american = 0.093;
    double race_asian = 0.014;
    double race_white = 0.615;  // remainder -> Other/Unknown
    double age_min = 20.0;
    double age_max = 90.0;

    // outcome
    double rf_base_rate = 5.11e-4;  // mean positive probability
    double prevalent_rate = 0.002;  // pre-window kidney failure (excluded downstream)
    double outcome_gain = 1.0;      // risk -> outcome odds gain

    // risk model (latent logistic)
    double risk_age_coef = 0.4;
    double risk_renal_coef = 1.0;
    double risk_comorbid_coef = 1.0;
    double risk_access_coef = 0.5;
    double marker_gain = 1.5;  // risk -> marker-code presence

    // lab availability
    double eligibility_rate = 0.024;  // mean P(eGFR and ACR both observed)
    double elig_mult_female = 0.75;
    double elig_mult_male = 1.0;
    double elig_mult_race_african_american = 1.7;
    double elig_mult_race_asian = 1.1;
    double elig_mult_race_white = 0.9;
    double elig_mult_race_other = 1.0;
    double elig_risk_coef = 0.8;  // availability skew with z_renal
    double egfr_only_rate = 0.01;
    double acr_mmol_frac = 0.1;  // fraction of ACR labs emitted in mg/mmol

    // vocabulary
    int n_marker_codes = 30;
    int n_noise_icd = 150;
    int n_noise_cpt = 20;
    int n_noise_loinc = 8;
    double noise_obs_mean = 4.0;

    void validate() const;
};

// Documented key=value text format, '#' comments. Unknown keys are errors.
SynthConfig load_synth_config(const std::string& path);
SynthConfig parse_synth_config(const std::string& text);

struct GenerateSummary {
    long n_patients = 0;
    long n_positive = 0;
    long n_prevalent = 0;
    long n_labs_available = 0;  // both eGFR and ACR emitted
};

// Emits NDJSON patient records to `out` and a ground-truth sidecar
// (id, risk, p_outcome, p_avail, z_renal) to `truth_out`. Byte-identical per
// (config, seed). Throws std::runtime_error naming the violated constraint
// when a rate target is infeasible.
GenerateSummary generate(const SynthConfig& config, uint64_t seed, std::ostream& out,
                         std::ostream& truth_out, const cohort::CohortSpec& spec);

GenerateSummary generate_files(const SynthConfig& config, uint64_t seed, const std::string& out_path,
                               const std::string& truth_path, const cohort::CohortSpec& spec);

}  // namespace nephra::synth
