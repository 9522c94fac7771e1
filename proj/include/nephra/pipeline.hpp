#pragma once

#include <optional>
#include <vector>

#include "nephra/cohort.hpp"
#include "nephra/features.hpp"
#include "nephra/metrics.hpp"
#include "nephra/optimizer.hpp"
#include "nephra/tangri.hpp"

namespace nephra::pipeline {

// Indices of non-excluded patients, optionally restricted to one split side.
std::vector<size_t> select(const std::vector<cohort::LabeledPatient>& cohort,
                           std::optional<cohort::SplitSide> side = std::nullopt);

// Fits the feature space on the cohort's training rows (split == Train).
features::FeatureSpace fit_space(const std::vector<cohort::LabeledPatient>& cohort,
                                 const cohort::CohortSpec& spec, const features::FeatureConfig& config);

optimizer::Dataset encode_subset(const std::vector<cohort::LabeledPatient>& cohort,
                                 const std::vector<size_t>& indices, const cohort::CohortSpec& spec,
                                 const features::FeatureSpace& space);

struct AuditResult {
    std::vector<size_t> indices;  // audited rows (validation side when present)
    std::vector<char> eligibility;
    std::vector<double> model_scores;
    std::vector<std::optional<double>> tangri_scores;
    std::vector<metrics::EligibilityRow> eligibility_rows;
    std::vector<metrics::AucRow> auc_rows;
};

// Eligibility plus subgroup-AUC audit over the cohort's validation rows (or all
// non-excluded rows when the cohort carries no split). Throws if the model
// was trained against a different feature-space version.
AuditResult audit(const std::vector<cohort::LabeledPatient>& cohort, const optimizer::Model& model,
                  const features::FeatureSpace& space, const cohort::CohortSpec& spec,
                  int min_class_count = 1);

}  // namespace nephra::pipeline
