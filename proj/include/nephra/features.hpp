#pragma once

#include <map>
#include <string>
#include <vector>

#include "nephra/cohort.hpp"

namespace nephra::features {

// One year of EHR data rolled up per patient: disease/procedure counts and the
// in-window maximum of each lab.
struct AggregateRecord {
    std::string patient_id;
    double age_years = 0.0;
    cohort::Sex sex = cohort::Sex::Female;
    cohort::Race race = cohort::Race::OtherUnknown;
    // keyed by "<system>:<code>" for diseases/procedures, plain LOINC code for labs
    std::map<std::string, int> counts;
    std::map<std::string, std::pair<double, std::string>> lab_max;  // code -> (max value, unit)
};

struct FeatureConfig {
    int min_support = 10;
    std::vector<int> count_thresholds = {0, 2, 10};
    std::vector<double> lab_z_edges = {-2.0, -1.0, 1.0, 2.0};
    int age_bin_width = 10;
    bool include_demographics = false;
};

struct LabStats {
    double mean = 0.0;
    double stddev = 0.0;  // population std over patients observing the lab
};

struct FeatureSpace {
    FeatureConfig config;
    std::map<std::string, LabStats> lab_stats;
    std::map<std::string, int> feature_index;  // feature key -> column, lexicographic
    int dims = 0;
    std::string version;  // digest of the serialized space, set on save/load
};

// Binary one-hot vector; active column ids sorted ascending.
struct SparseVector {
    int dims = 0;
    std::vector<int> active;
};

AggregateRecord aggregate(const cohort::LabeledPatient& lp, const cohort::CohortSpec& spec);

// z-bin index for edges [e0..e3]: (-inf,e0], (e0,e1], (e1,e2), [e2,e3), [e3,inf).
// Edges at or below zero close on the right, edges above zero close on the
// left, so the wide central bin is open on both sides.
int z_bin(double z, const std::vector<double>& edges);

// Fits lab stats, enumerates candidate features over the training aggregates,
// drops those supported by fewer than min_support patients, and indexes the
// survivors lexicographically. Throws std::runtime_error("empty feature
// space") when nothing survives.
FeatureSpace fit_feature_space(const std::vector<AggregateRecord>& train, const FeatureConfig& config);

SparseVector encode(const AggregateRecord& agg, const FeatureSpace& space);

// Versioned text artifact; round-trips bit-exactly.
std::string serialize_feature_space(const FeatureSpace& space);
FeatureSpace parse_feature_space(const std::string& text);
void save_feature_space(const FeatureSpace& space, const std::string& path);
FeatureSpace load_feature_space(const std::string& path);

}  // namespace nephra::features
