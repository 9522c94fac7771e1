#include "nephra/pipeline.hpp"

#include <stdexcept>

namespace nephra::pipeline {

std::vector<size_t> select(const std::vector<cohort::LabeledPatient>& cohort,
                           std::optional<cohort::SplitSide> side) {
    std::vector<size_t> out;
    for (size_t i = 0; i < cohort.size(); ++i) {
        const auto& lp = cohort[i];
        if (lp.status == cohort::Status::ExcludedPrevalent) continue;
        if (side && lp.split != side) continue;
        out.push_back(i);
    }
    return out;
}

features::FeatureSpace fit_space(const std::vector<cohort::LabeledPatient>& cohort,
                                 const cohort::CohortSpec& spec, const features::FeatureConfig& config) {
    const auto train_idx = select(cohort, cohort::SplitSide::Train);
    if (train_idx.empty()) throw std::runtime_error("no training rows in cohort (missing split?)");
    std::vector<features::AggregateRecord> aggs;
    aggs.reserve(train_idx.size());
    for (size_t i : train_idx) aggs.push_back(features::aggregate(cohort[i], spec));
    return features::fit_feature_space(aggs, config);
}

optimizer::Dataset encode_subset(const std::vector<cohort::LabeledPatient>& cohort,
                                 const std::vector<size_t>& indices, const cohort::CohortSpec& spec,
                                 const features::FeatureSpace& space) {
    optimizer::Dataset ds;
    ds.dims = space.dims;
    ds.x.reserve(indices.size());
    ds.y.reserve(indices.size());
    for (size_t i : indices) {
        ds.x.push_back(features::encode(features::aggregate(cohort[i], spec), space));
        ds.y.push_back(cohort[i].status == cohort::Status::Positive ? 1 : 0);
    }
    return ds;
}

AuditResult audit(const std::vector<cohort::LabeledPatient>& cohort, const optimizer::Model& model,
                  const features::FeatureSpace& space, const cohort::CohortSpec& spec,
                  int min_class_count) {
    if (!model.feature_space_version.empty() && model.feature_space_version != space.version)
        throw std::runtime_error("model was trained against feature-space version " +
                                 model.feature_space_version + ", got " + space.version);
    AuditResult r;
    r.indices = select(cohort, cohort::SplitSide::Validation);
    if (r.indices.empty()) r.indices = select(cohort);

    std::vector<cohort::LabeledPatient> subset;
    subset.reserve(r.indices.size());
    for (size_t i : r.indices) {
        const auto& lp = cohort[i];
        subset.push_back(lp);
        r.model_scores.push_back(
            optimizer::predict(model, features::encode(features::aggregate(lp, spec), space)));
        const auto t = tangri::score_patient(lp.patient, spec);
        r.eligibility.push_back(t.eligible ? 1 : 0);
        r.tangri_scores.push_back(t.probability);
    }
    const auto slices = metrics::standard_slices();
    r.eligibility_rows = metrics::eligibility_report(subset, r.eligibility, slices);
    r.auc_rows = metrics::auc_report(subset, r.model_scores, r.tangri_scores, r.eligibility,
                                     slices, min_class_count);
    return r;
}

}  // namespace nephra::pipeline
