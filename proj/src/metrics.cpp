#include "nephra/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nephra::metrics {

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels,
                              int min_class_count) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
    const size_t n = scores.size();
    long n_pos = 0;
    for (size_t i = 0; i < n; ++i) n_pos += labels[i] ? 1 : 0;
    const long n_neg = static_cast<long>(n) - n_pos;
    if (n_pos < min_class_count || n_neg < min_class_count) return std::nullopt;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // rank sum of positives with midranks over tie runs
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (size_t k = i; k <= j; ++k)
            if (labels[order[k]]) pos_rank_sum += midrank;
        i = j + 1;
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<Slice> standard_slices() {
    using cohort::LabeledPatient;
    using cohort::Race;
    using cohort::Sex;
    std::vector<Slice> slices;
    slices.push_back({"Full validation set", [](const LabeledPatient&) { return true; }});
    slices.push_back({"Gender: Female", [](const LabeledPatient& p) { return p.patient.sex == Sex::Female; }});
    slices.push_back({"Gender: Male", [](const LabeledPatient& p) { return p.patient.sex == Sex::Male; }});
    slices.push_back({"Race: African American",
                      [](const LabeledPatient& p) { return p.patient.race == Race::AfricanAmerican; }});
    slices.push_back({"Race: Asian", [](const LabeledPatient& p) { return p.patient.race == Race::Asian; }});
    slices.push_back({"Race: White", [](const LabeledPatient& p) { return p.patient.race == Race::White; }});
    for (int lo = 20; lo < 90; lo += 10) {
        const int hi = lo + 10;
        slices.push_back({"Age: " + std::to_string(lo) + "-" + std::to_string(hi),
                          [lo, hi](const LabeledPatient& p) {
                              return p.age_years >= lo && p.age_years < hi;
                          }});
    }
    return slices;
}

std::vector<EligibilityRow> eligibility_report(const std::vector<cohort::LabeledPatient>& cohort,
                                               const std::vector<char>& eligibility,
                                               const std::vector<Slice>& slices) {
    if (cohort.size() != eligibility.size())
        throw std::invalid_argument("eligibility_report: length mismatch");
    std::vector<EligibilityRow> rows;
    rows.reserve(slices.size());
    for (const auto& slice : slices) {
        EligibilityRow r;
        r.slice = slice.name;
        for (size_t i = 0; i < cohort.size(); ++i) {
            if (!slice.predicate(cohort[i])) continue;
            const bool rf = cohort[i].status == cohort::Status::Positive;
            const bool el = eligibility[i] != 0;
            r.n_patients += 1;
            r.n_rf += rf;
            r.n_eligible += el;
            r.n_eligible_rf += el && rf;
        }
        r.n_noneligible = r.n_patients - r.n_eligible;
        r.n_noneligible_rf = r.n_rf - r.n_eligible_rf;
        r.pct_eligible = r.n_patients > 0 ? 100.0 * static_cast<double>(r.n_eligible) / static_cast<double>(r.n_patients) : 0.0;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<AucRow> auc_report(const std::vector<cohort::LabeledPatient>& cohort,
                               const std::vector<double>& model_scores,
                               const std::vector<std::optional<double>>& tangri_scores,
                               const std::vector<char>& eligibility,
                               const std::vector<Slice>& slices,
                               int min_class_count) {
    const size_t n = cohort.size();
    if (model_scores.size() != n || tangri_scores.size() != n || eligibility.size() != n)
        throw std::invalid_argument("auc_report: length mismatch");
    std::vector<AucRow> rows;
    rows.reserve(slices.size());
    for (const auto& slice : slices) {
        std::vector<double> s_all, s_el_model, s_el_tangri, s_nonel;
        std::vector<int> y_all, y_el, y_nonel;
        for (size_t i = 0; i < n; ++i) {
            if (!slice.predicate(cohort[i])) continue;
            const int y = cohort[i].status == cohort::Status::Positive ? 1 : 0;
            s_all.push_back(model_scores[i]);
            y_all.push_back(y);
            if (eligibility[i]) {
                s_el_model.push_back(model_scores[i]);
                s_el_tangri.push_back(tangri_scores[i].value_or(0.0));
                y_el.push_back(y);
            } else {
                s_nonel.push_back(model_scores[i]);
                y_nonel.push_back(y);
            }
        }
        AucRow r;
        r.slice = slice.name;
        r.model_all = roc_auc(s_all, y_all, min_class_count);
        r.tangri_eligible = roc_auc(s_el_tangri, y_el, min_class_count);
        r.model_eligible = roc_auc(s_el_model, y_el, min_class_count);
        r.model_noneligible = roc_auc(s_nonel, y_nonel, min_class_count);
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

std::string fmt_auc(const std::optional<double>& v, bool rounded) {
    if (!v) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof(buf), rounded ? "%.3f" : "%.17g", *v);
    return buf;
}

}  // namespace

std::string eligibility_csv(const std::vector<EligibilityRow>& rows) {
    std::ostringstream out;
    out << "slice,n_patients,n_rf,n_eligible,n_eligible_rf,pct_eligible,n_noneligible,n_noneligible_rf\n";
    char pct[32];
    for (const auto& r : rows) {
        std::snprintf(pct, sizeof(pct), "%.17g", r.pct_eligible);
        out << '"' << r.slice << "\"," << r.n_patients << ',' << r.n_rf << ',' << r.n_eligible << ','
            << r.n_eligible_rf << ',' << pct << ',' << r.n_noneligible << ',' << r.n_noneligible_rf << '\n';
    }
    return out.str();
}

std::string eligibility_text(const std::vector<EligibilityRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %18s %24s %10s %20s\n", "Cohort", "Patients (had RF)",
                  "Tangri Eligibles (had RF)", "Elig %", "Non-Elig (had RF)");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%-24s %11ld (%ld) %17ld (%ld) %9.1f%% %13ld (%ld)\n",
                      r.slice.c_str(), r.n_patients, r.n_rf, r.n_eligible, r.n_eligible_rf,
                      r.pct_eligible, r.n_noneligible, r.n_noneligible_rf);
        out << line;
    }
    return out.str();
}

std::string auc_csv(const std::vector<AucRow>& rows) {
    std::ostringstream out;
    out << "slice,auc_model_all,auc_tangri_eligible,auc_model_eligible,auc_model_noneligible\n";
    for (const auto& r : rows) {
        out << '"' << r.slice << "\"," << fmt_auc(r.model_all, false) << ',' << fmt_auc(r.tangri_eligible, false)
            << ',' << fmt_auc(r.model_eligible, false) << ',' << fmt_auc(r.model_noneligible, false) << '\n';
    }
    return out.str();
}

std::string auc_text(const std::vector<AucRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %10s %18s %18s %22s\n", "Cohort", "AUC model",
                  "AUC Tangri (elig)", "AUC model (elig)", "AUC model (non-elig)");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%-24s %10s %18s %18s %22s\n", r.slice.c_str(),
                      fmt_auc(r.model_all, true).c_str(), fmt_auc(r.tangri_eligible, true).c_str(),
                      fmt_auc(r.model_eligible, true).c_str(), fmt_auc(r.model_noneligible, true).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace nephra::metrics
