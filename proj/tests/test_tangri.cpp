#include <doctest.h>

#include <cmath>

#include "nephra/rng.hpp"
#include "nephra/tangri.hpp"

using namespace nephra;
using namespace nephra::tangri;

namespace {

cohort::CohortSpec spec() { return cohort::default_cohort_spec(); }

cohort::Observation lab(const std::string& code, const std::string& date, double value,
                        const std::string& unit) {
    return {codes::CodeSystem::LOINC, code, parse_date(date), value, unit};
}

cohort::Patient base_patient() {
    cohort::Patient p;
    p.id = "t1";
    p.birth_date = parse_date("1950-06-15");
    p.sex = cohort::Sex::Female;
    return p;
}

}  // namespace

TEST_CASE("tangri_score: centered inputs give 1 - base exactly") {
    const double p = tangri_score({70.36, 0.5642, 36.11, std::exp(5.137)});
    CHECK(std::fabs(p - 0.0249) < 1e-9);
}

TEST_CASE("tangri_score: frozen high-precision evaluations") {
    // independently evaluated at 40-digit precision
    CHECK(std::fabs(tangri_score({70.0, 1.0, 36.11, std::exp(5.137)}) - 0.027903927462265508) < 1e-6);
    CHECK(std::fabs(tangri_score({50.0, 0.0, 60.0, 30.0}) - 0.0010975449169055254) < 1e-6);
}

TEST_CASE("tangri_score: domain errors and range") {
    CHECK_THROWS_AS(tangri_score({50, 0, 0.0, 30}), std::domain_error);
    CHECK_THROWS_AS(tangri_score({50, 0, 60, -1.0}), std::domain_error);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double p = tangri_score({20 + 70 * rng.next_double(), rng.next_double() < 0.5 ? 0.0 : 1.0,
                                       3 + 120 * rng.next_double(), std::exp(rng.next_normal() * 2 + 4)});
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("tangri_score: sign monotonicity by finite differences") {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        const TangriInputs in{30 + 50 * rng.next_double(), 0.0, 20 + 80 * rng.next_double(),
                              std::exp(rng.next_normal() + 4.5)};
        const double p = tangri_score(in);
        CHECK(tangri_score({in.age_years + 1, in.male, in.egfr, in.acr}) < p);  // older -> lower (as published)
        CHECK(tangri_score({in.age_years, in.male, in.egfr + 1, in.acr}) < p);
        CHECK(tangri_score({in.age_years, in.male, in.egfr, in.acr * 1.1}) > p);
        CHECK(tangri_score({in.age_years, 1.0, in.egfr, in.acr}) > p);
    }
}

TEST_CASE("extract_lab_max: max over comparable units") {
    auto p = base_patient();
    p.observations = {lab("32294-1", "2015-03-01", 30.0, "mg/g"),
                      lab("9318-7", "2015-07-01", 50.0, "mg/g")};
    const auto r = extract_lab_max(p, codes::builtin_sets().acr_loinc, spec(), acr_unit_rules());
    REQUIRE(r.has_value());
    CHECK(r->value == doctest::Approx(50.0));
    CHECK_FALSE(r->mixed_units);
}

TEST_CASE("extract_lab_max: unit conversion and absence") {
    auto p = base_patient();
    p.observations = {lab("32294-1", "2015-03-01", 5.0, "mg/mmol")};
    const auto r = extract_lab_max(p, codes::builtin_sets().acr_loinc, spec(), acr_unit_rules());
    REQUIRE(r.has_value());
    CHECK(r->value == doctest::Approx(44.2));  // 5 x 8.84

    const auto none = extract_lab_max(base_patient(), codes::builtin_sets().acr_loinc, spec(), acr_unit_rules());
    CHECK_FALSE(none.has_value());
}

TEST_CASE("extract_lab_max: incomparable unit groups -> majority wins, flagged") {
    auto p = base_patient();
    p.observations = {lab("32294-1", "2015-02-01", 7.0, "furlongs"),
                      lab("32294-1", "2015-03-01", 9.0, "furlongs"),
                      lab("9318-7", "2015-04-01", 80.0, "mg/g")};
    const auto r = extract_lab_max(p, codes::builtin_sets().acr_loinc, spec(), acr_unit_rules());
    REQUIRE(r.has_value());
    CHECK(r->unit == "furlongs");
    CHECK(r->value == doctest::Approx(9.0));
    CHECK(r->mixed_units);
}

TEST_CASE("extract_lab_max: window filter and permutation invariance") {
    auto p = base_patient();
    p.observations = {lab("33914-3", "2015-05-01", 55.0, "mL/min/1.73m2"),
                      lab("33914-3", "2016-02-15", 99.0, "mL/min/1.73m2")};  // out of window
    const auto r = extract_lab_max(p, codes::builtin_sets().egfr_loinc, spec(), egfr_unit_rules());
    REQUIRE(r.has_value());
    CHECK(r->value == doctest::Approx(55.0));

    std::reverse(p.observations.begin(), p.observations.end());
    const auto r2 = extract_lab_max(p, codes::builtin_sets().egfr_loinc, spec(), egfr_unit_rules());
    CHECK(r2->value == r->value);
}

TEST_CASE("tangri_eligible requires both labs") {
    auto p = base_patient();
    p.observations = {lab("33914-3", "2015-05-01", 55.0, "mL/min/1.73m2")};
    CHECK_FALSE(tangri_eligible(p, spec()));  // eGFR only
    CHECK_FALSE(tangri_eligible(base_patient(), spec()));  // neither
    p.observations.push_back(lab("9318-7", "2015-06-01", 40.0, "mg/g"));
    CHECK(tangri_eligible(p, spec()));
}

TEST_CASE("score_patient: ineligible patients never get a default score") {
    auto p = base_patient();
    p.observations = {lab("33914-3", "2015-05-01", 55.0, "mL/min/1.73m2")};
    const auto r = score_patient(p, spec());
    CHECK_FALSE(r.eligible);
    CHECK_FALSE(r.probability.has_value());
    CHECK(r.egfr.has_value());
    CHECK_FALSE(r.acr_mg_g.has_value());
}
