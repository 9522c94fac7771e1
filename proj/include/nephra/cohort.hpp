#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nephra/codes.hpp"
#include "nephra/date.hpp"

namespace nephra::cohort {

struct Observation {
    codes::CodeSystem system = codes::CodeSystem::ICD10;
    std::string code;
    Date date = 0;
    std::optional<double> value;
    std::optional<std::string> unit;
};

enum class Sex { Male, Female };
enum class Race { AfricanAmerican, Asian, White, OtherUnknown };

std::string to_string(Sex s);
std::string to_string(Race r);
Sex sex_from_string(std::string_view s);
Race race_from_string(std::string_view s);

struct Patient {
    std::string id;
    Date birth_date = 0;
    Sex sex = Sex::Female;
    Race race = Race::OtherUnknown;
    std::vector<Observation> observations;
};

// Study windows: features come from [obs_start, obs_end), outcome labels from
// [label_start, label_end).
struct CohortSpec {
    Date obs_start;
    Date obs_end;
    Date label_start;
    Date label_end;

    void validate() const;  // obs_start < obs_end <= label_start < label_end
};

// Study-window defaults: observe 2015, label 2016-04-01..2017-04-01.
CohortSpec default_cohort_spec();

enum class Status { ExcludedPrevalent, Negative, Positive };

std::string to_string(Status s);
Status status_from_string(std::string_view s);

enum class SplitSide { Train, Validation };

struct LabeledPatient {
    Patient patient;
    Status status = Status::Negative;
    double age_years = 0.0;                 // at obs_end
    std::optional<SplitSide> split;         // absent for excluded patients
};

struct IngestOptions {
    bool strict = false;  // reject unknown record fields
};

class IngestError : public std::runtime_error {
public:
    IngestError(size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

// NDJSON patient records, one per line. Throws IngestError with the offending
// line number on malformed records, duplicate ids, invalid dates, or unknown
// code systems.
std::vector<Patient> ingest(std::istream& in, const IngestOptions& opts = {});
std::vector<Patient> ingest_file(const std::string& path, const IngestOptions& opts = {});

std::string serialize_patient(const Patient& p);

// Detection thresholds for outcome evidence (see D1): pooled ICD-10 instance
// count >= icd_min, or CPT instance count >= cpt_min.
struct OutcomeThresholds {
    int icd_min = 2;
    int cpt_min = 1;
};

bool outcome_in_window(const Patient& p, const codes::CodeSet& icd_set,
                       const codes::CodeSet& cpt_set, Date start, Date end,
                       const OutcomeThresholds& th = {});

std::vector<LabeledPatient> build_cohort(std::vector<Patient> patients, const CohortSpec& spec,
                                         const codes::CodeSet& icd_set, const codes::CodeSet& cpt_set,
                                         const OutcomeThresholds& th = {});

// Seeded shuffle + floor split over non-excluded patients; assigns
// LabeledPatient::split in place. Default fraction matches the study's
// train/validation ratio. Throws std::invalid_argument if fraction is outside
// (0, 1).
constexpr double kDefaultTrainFraction = 0.361;
void split(std::vector<LabeledPatient>& cohort, double train_fraction, uint64_t seed);

// Labeled-cohort NDJSON: patient fields plus status / age_years / split.
std::string serialize_labeled(const LabeledPatient& lp);
std::vector<LabeledPatient> read_labeled_cohort(std::istream& in);
std::vector<LabeledPatient> read_labeled_cohort_file(const std::string& path);

}  // namespace nephra::cohort
