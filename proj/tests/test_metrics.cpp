#include <doctest.h>

#include <cmath>

#include "nephra/metrics.hpp"
#include "nephra/rng.hpp"

using namespace nephra;
using namespace nephra::metrics;

namespace {

// O(n^2) pairwise oracle, independent of the rank-sum implementation
std::optional<double> auc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels) {
    long n_pos = 0;
    for (int y : labels) n_pos += y;
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    double num = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j]) num += 1.0;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    }
    return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

cohort::LabeledPatient lp(cohort::Sex sex, cohort::Race race, double age, bool positive) {
    cohort::LabeledPatient p;
    p.patient.sex = sex;
    p.patient.race = race;
    p.age_years = age;
    p.status = positive ? cohort::Status::Positive : cohort::Status::Negative;
    return p;
}

}  // namespace

TEST_CASE("roc_auc: frozen examples") {
    const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y = {0, 0, 1, 1};
    CHECK(*roc_auc(s, y) == doctest::Approx(0.75));  // 3 of 4 pairs ordered

    const std::vector<double> ties = {0.5, 0.5, 0.5, 0.5};
    const std::vector<int> my = {0, 1, 0, 1};
    CHECK(*roc_auc(ties, my) == doctest::Approx(0.5));

    const std::vector<int> all0 = {0, 0, 0, 0};
    CHECK_FALSE(roc_auc(ties, all0).has_value());

    CHECK_THROWS_AS(roc_auc(std::vector<double>{1.0}, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST_CASE("roc_auc equals the pairwise oracle on random tied instances") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 2 + rng.bounded(499);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.bounded(20)) / 10.0;  // heavy ties
            y[i] = rng.next_double() < 0.3;
        }
        const auto fast = roc_auc(s, y);
        const auto slow = auc_pairwise(s, y);
        REQUIRE(fast.has_value() == slow.has_value());
        if (fast) CHECK(std::fabs(*fast - *slow) < 1e-12);
    }
}

TEST_CASE("roc_auc invariances: monotone transform and negation") {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 5 + rng.bounded(100);
        std::vector<double> s(n), s_mono(n), s_neg(n);
        std::vector<int> y(n);
        bool has_pos = false, has_neg = false;
        for (size_t i = 0; i < n; ++i) {
            s[i] = rng.next_normal();
            s_mono[i] = std::exp(2.0 * s[i]) + 3.0;  // strictly increasing
            s_neg[i] = -s[i];
            y[i] = rng.next_double() < 0.4;
            (y[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(*roc_auc(s_mono, y) == *roc_auc(s, y));
        CHECK(*roc_auc(s_neg, y) == doctest::Approx(1.0 - *roc_auc(s, y)).epsilon(1e-12));
    }
}

TEST_CASE("min_class_count knob") {
    const std::vector<double> s = {0.1, 0.9, 0.2, 0.3};
    const std::vector<int> y = {0, 1, 0, 0};
    CHECK(roc_auc(s, y, 1).has_value());
    CHECK_FALSE(roc_auc(s, y, 2).has_value());
}

TEST_CASE("eligibility_report: frozen full-set row and identities") {
    // shrunk-proportions analog of the published full-set row
    std::vector<cohort::LabeledPatient> cohort;
    std::vector<char> elig;
    // 1000 patients: 5 RF; 24 eligible of whom 1 RF
    for (int i = 0; i < 1000; ++i) {
        const bool rf = i < 5;
        const bool el = (i >= 4 && i < 28);  // patient 4 is RF and eligible
        cohort.push_back(lp(cohort::Sex::Female, cohort::Race::White, 50, rf));
        elig.push_back(el);
    }
    const std::vector<Slice> slices = {{"Full validation set", [](const cohort::LabeledPatient&) { return true; }}};
    const auto rows = eligibility_report(cohort, elig, slices);
    REQUIRE(rows.size() == 1);
    const auto& r = rows[0];
    CHECK(r.n_patients == 1000);
    CHECK(r.n_rf == 5);
    CHECK(r.n_eligible == 24);
    CHECK(r.n_eligible_rf == 1);
    CHECK(r.pct_eligible == doctest::Approx(2.4));
    CHECK(r.n_eligible + r.n_noneligible == r.n_patients);
    CHECK(r.n_eligible_rf + r.n_noneligible_rf == r.n_rf);
}

TEST_CASE("eligibility_report: empty and all-eligible slices") {
    std::vector<cohort::LabeledPatient> cohort = {lp(cohort::Sex::Male, cohort::Race::Asian, 30, false)};
    std::vector<char> elig = {1};
    const std::vector<Slice> slices = {
        {"Empty", [](const cohort::LabeledPatient&) { return false; }},
        {"All", [](const cohort::LabeledPatient&) { return true; }}};
    const auto rows = eligibility_report(cohort, elig, slices);
    CHECK(rows[0].n_patients == 0);
    CHECK(rows[0].pct_eligible == 0.0);
    CHECK(rows[1].n_noneligible == 0);
}

TEST_CASE("eligibility identities hold on random cohorts (property)") {
    Rng rng(77);
    const auto slices = standard_slices();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cohort::LabeledPatient> cohort;
        std::vector<char> elig;
        const size_t n = 50 + rng.bounded(300);
        for (size_t i = 0; i < n; ++i) {
            cohort.push_back(lp(rng.next_double() < 0.5 ? cohort::Sex::Male : cohort::Sex::Female,
                                static_cast<cohort::Race>(rng.bounded(4)),
                                10 + 90 * rng.next_double(), rng.next_double() < 0.1));
            elig.push_back(rng.next_double() < 0.3);
        }
        for (const auto& r : eligibility_report(cohort, elig, slices)) {
            CHECK(r.n_eligible + r.n_noneligible == r.n_patients);
            CHECK(r.n_eligible_rf + r.n_noneligible_rf == r.n_rf);
            if (r.n_patients > 0)
                CHECK(r.pct_eligible == doctest::Approx(100.0 * r.n_eligible / r.n_patients));
        }
    }
}

TEST_CASE("auc_report: N/A rule, perfect model, rank invariance") {
    Rng rng(31);
    std::vector<cohort::LabeledPatient> cohort;
    std::vector<double> model;
    std::vector<std::optional<double>> tangri;
    std::vector<char> elig;
    for (int i = 0; i < 200; ++i) {
        const bool positive = rng.next_double() < 0.2;
        const bool eligible = rng.next_double() < 0.2 && !positive;  // no eligible positives
        cohort.push_back(lp(cohort::Sex::Female, cohort::Race::Asian, 40, positive));
        model.push_back(positive ? 1.0 : 0.0);  // perfect separation
        tangri.push_back(eligible ? std::optional<double>(rng.next_double()) : std::nullopt);
        elig.push_back(eligible);
    }
    const std::vector<Slice> slices = {{"All", [](const cohort::LabeledPatient&) { return true; }}};
    const auto rows = auc_report(cohort, model, tangri, elig, slices);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].tangri_eligible.has_value());  // zero eligible positives
    CHECK(*rows[0].model_all == doctest::Approx(1.0));

    // rank-preserving transform leaves every cell unchanged
    auto cubed = model;
    for (auto& v : cubed) v = v * v * v;
    const auto rows2 = auc_report(cohort, cubed, tangri, elig, slices);
    CHECK(rows2[0].model_all == rows[0].model_all);
    CHECK(rows2[0].model_eligible == rows[0].model_eligible);
    CHECK(rows2[0].model_noneligible == rows[0].model_noneligible);
}

TEST_CASE("standard slices: full set present, age rows are decades 20-90") {
    const auto slices = standard_slices();
    CHECK(slices.front().name == "Full validation set");
    int age_rows = 0;
    for (const auto& s : slices) age_rows += s.name.rfind("Age: ", 0) == 0;
    CHECK(age_rows == 7);
    // a 95-year-old falls in no age row (full set + gender + race only)
    const auto old_p = lp(cohort::Sex::Male, cohort::Race::White, 95, false);
    int memberships = 0;
    for (const auto& s : slices) memberships += s.predicate(old_p);
    CHECK(memberships == 3);
}
