#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nephra/cohort.hpp"

namespace nephra::metrics {

// Mann-Whitney AUC with midrank tie handling, O(n log n). Returns nullopt
// (N/A) when either class has fewer than min_class_count members. Throws
// std::invalid_argument on length mismatch.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels,
                              int min_class_count = 1);

struct Slice {
    std::string name;
    std::function<bool(const cohort::LabeledPatient&)> predicate;
};

// Full set, gender, race (African American / Asian / White), age decades 20-90.
std::vector<Slice> standard_slices();

struct EligibilityRow {
    std::string slice;
    long n_patients = 0;
    long n_rf = 0;
    long n_eligible = 0;
    long n_eligible_rf = 0;
    double pct_eligible = 0.0;  // unrounded, percent
    long n_noneligible = 0;
    long n_noneligible_rf = 0;
};

struct AucRow {
    std::string slice;
    std::optional<double> model_all;
    std::optional<double> tangri_eligible;
    std::optional<double> model_eligible;
    std::optional<double> model_noneligible;
};

// Inputs are parallel to `cohort`; excluded patients must not be present.
std::vector<EligibilityRow> eligibility_report(const std::vector<cohort::LabeledPatient>& cohort,
                                               const std::vector<char>& eligibility,
                                               const std::vector<Slice>& slices);

// tangri_scores entries are only read where eligibility is set.
std::vector<AucRow> auc_report(const std::vector<cohort::LabeledPatient>& cohort,
                               const std::vector<double>& model_scores,
                               const std::vector<std::optional<double>>& tangri_scores,
                               const std::vector<char>& eligibility,
                               const std::vector<Slice>& slices,
                               int min_class_count = 1);

// CSV carries unrounded values; text rendering rounds (pct to 1 decimal, AUC
// to 3) in the published table layouts.
std::string eligibility_csv(const std::vector<EligibilityRow>& rows);
std::string eligibility_text(const std::vector<EligibilityRow>& rows);
std::string auc_csv(const std::vector<AucRow>& rows);
std::string auc_text(const std::vector<AucRow>& rows);

}  // namespace nephra::metrics
