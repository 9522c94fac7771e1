// nephra: bias-audit pipeline for clinical kidney-failure risk models.
// Subcommands chain: generate -> build-cohort -> featurize -> train ->
// score-tangri -> audit; every stage writes a run manifest.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nephra/cohort.hpp"
#include "nephra/digest.hpp"
#include "nephra/manifest.hpp"
#include "nephra/metrics.hpp"
#include "nephra/optimizer.hpp"
#include "nephra/pipeline.hpp"
#include "nephra/synth.hpp"
#include "nephra/tangri.hpp"

namespace {

using namespace nephra;

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("NEPHRA_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // modules treat 0 as all cores
}

std::string flags_digest(const std::vector<std::string>& parts) {
    std::string joined;
    for (const auto& p : parts) {
        joined += p;
        joined += '\x1f';
    }
    return hex64(fnv1a64(joined));
}

struct WindowFlags {
    std::string obs_start = "2015-01-01";
    std::string obs_end = "2016-01-01";
    std::string label_start = "2016-04-01";
    std::string label_end = "2017-04-01";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--obs-start", obs_start, "Observation window start (YYYY-MM-DD)");
        cmd->add_option("--obs-end", obs_end, "Observation window end, exclusive");
        cmd->add_option("--label-start", label_start, "Label window start");
        cmd->add_option("--label-end", label_end, "Label window end, exclusive");
    }

    cohort::CohortSpec spec() const {
        cohort::CohortSpec s{parse_date(obs_start), parse_date(obs_end),
                             parse_date(label_start), parse_date(label_end)};
        s.validate();
        return s;
    }
};

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw std::runtime_error("empty list: '" + s + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw std::runtime_error("empty list: '" + s + "'");
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nephra: clinical risk model bias-audit pipeline"};
    app.require_subcommand(1);

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "Generate a seeded synthetic patient stream");
    std::string gen_config, gen_out, gen_truth;
    uint64_t gen_seed = 0;
    WindowFlags gen_windows;
    gen->add_option("--config", gen_config, "Synth config file (key=value)")->required();
    gen->add_option("--seed", gen_seed, "Generator seed")->required();
    gen->add_option("--out", gen_out, "Output patient NDJSON path")->required();
    gen->add_option("--truth-out", gen_truth, "Ground-truth sidecar path")->required();
    gen_windows.add_to(gen);

    // ---- build-cohort ----
    auto* bc = app.add_subcommand("build-cohort", "Label patients and assign train/validation split");
    std::string bc_in, bc_out;
    bool bc_strict = false;
    double bc_fraction = cohort::kDefaultTrainFraction;
    uint64_t bc_seed = 0;
    int bc_icd_min = 2, bc_cpt_min = 1;
    WindowFlags bc_windows;
    bc->add_option("--in", bc_in, "Patient NDJSON stream")->required();
    bc->add_option("--out", bc_out, "Labeled cohort NDJSON path")->required();
    bc->add_flag("--strict", bc_strict, "Reject records with unknown fields");
    bc->add_option("--train-fraction", bc_fraction, "Train fraction of non-excluded patients");
    bc->add_option("--seed", bc_seed, "Split shuffle seed");
    bc->add_option("--icd-min-instances", bc_icd_min, "ICD-10 instance threshold for outcome evidence");
    bc->add_option("--cpt-min-instances", bc_cpt_min, "CPT instance threshold for outcome evidence");
    bc_windows.add_to(bc);

    // ---- featurize ----
    auto* fz = app.add_subcommand("featurize", "Fit the binned feature space on the training split");
    std::string fz_cohort, fz_space_out;
    int fz_min_support = 10, fz_age_bin = 10, fz_threads = 0;
    std::string fz_thresholds = "0,2,10", fz_z_edges = "-2,-1,1,2";
    bool fz_demographics = false;
    WindowFlags fz_windows;
    fz->add_option("--cohort", fz_cohort, "Labeled cohort NDJSON")->required();
    fz->add_option("--space-out", fz_space_out, "Feature-space artifact path")->required();
    fz->add_option("--min-support", fz_min_support, "Minimum training patients per kept feature");
    fz->add_option("--count-thresholds", fz_thresholds, "Count bin thresholds, comma-separated");
    fz->add_option("--lab-z-edges", fz_z_edges, "Lab z-score bin edges, comma-separated");
    fz->add_option("--age-bin-width", fz_age_bin, "Age bin width in years");
    fz->add_flag("--include-demographics", fz_demographics, "Add sex/race as model features");
    fz->add_option("--threads", fz_threads, "Worker threads (0 = all cores)");
    fz_windows.add_to(fz);

    // ---- train ----
    auto* tr = app.add_subcommand("train", "Sweep the L1 grid and keep the best validation model");
    std::string tr_cohort, tr_space, tr_out;
    std::string tr_grid = "0.0001,0.001,0.002,0.005,0.007,0.01";
    std::string tr_class_weights = "balanced";
    int tr_max_iters = 2000, tr_threads = 0;
    double tr_tol = 1e-7;
    uint64_t tr_seed = 0;
    WindowFlags tr_windows;
    tr->add_option("--cohort", tr_cohort, "Labeled cohort NDJSON")->required();
    tr->add_option("--space", tr_space, "Feature-space artifact")->required();
    tr->add_option("--out", tr_out, "Model artifact path")->required();
    tr->add_option("--lambda-grid", tr_grid, "L1 strengths, comma-separated");
    tr->add_option("--max-iters", tr_max_iters, "Iteration cap per lambda");
    tr->add_option("--tol", tr_tol, "Relative objective-change tolerance");
    tr->add_option("--class-weights", tr_class_weights, "'balanced' or '<w_pos>,<w_neg>'");
    tr->add_option("--seed", tr_seed, "Run seed (recorded in the manifest)");
    tr->add_option("--threads", tr_threads, "Worker threads (0 = all cores)");
    tr_windows.add_to(tr);

    // ---- score-tangri ----
    auto* st = app.add_subcommand("score-tangri", "Per-patient Tangri eligibility and probability CSV");
    std::string st_in, st_out;
    WindowFlags st_windows;
    st->add_option("--in", st_in, "Patient or cohort NDJSON stream")->required();
    st->add_option("--out", st_out, "Output CSV path")->required();
    st_windows.add_to(st);

    // ---- audit ----
    auto* au = app.add_subcommand("audit", "Eligibility and subgroup-AUC reports with a run manifest");
    std::string au_cohort, au_model, au_space, au_out;
    int au_min_class = 1, au_threads = 0;
    WindowFlags au_windows;
    au->add_option("--cohort", au_cohort, "Labeled cohort NDJSON")->required();
    au->add_option("--model", au_model, "Trained model artifact")->required();
    au->add_option("--space", au_space, "Feature-space artifact")->required();
    au->add_option("--out", au_out, "Output directory")->required();
    au->add_option("--min-class-count", au_min_class, "Minimum per-class count before an AUC is reported");
    au->add_option("--threads", au_threads, "Worker threads (0 = all cores)");
    au_windows.add_to(au);

    // ---- report ----
    auto* rp = app.add_subcommand("report", "Render audit CSVs as aligned text tables");
    std::string rp_dir;
    rp->add_option("--dir", rp_dir, "Audit output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*gen) {
            const auto config = synth::load_synth_config(gen_config);
            const auto spec = gen_windows.spec();
            const auto summary = synth::generate_files(config, gen_seed, gen_out, gen_truth, spec);
            manifest::RunManifest m;
            m.subcommand = "generate";
            m.seed = gen_seed;
            m.config_digest = hex64(digest_file(gen_config));
            m.inputs = {gen_config};
            m.outputs = {gen_out, gen_truth};
            manifest::write_manifest(m, gen_out + ".manifest.json");
            std::cerr << "generated " << summary.n_patients << " patients (" << summary.n_positive
                      << " positive, " << summary.n_prevalent << " prevalent, "
                      << summary.n_labs_available << " with both labs)\n";
        } else if (*bc) {
            const auto spec = bc_windows.spec();
            auto patients = cohort::ingest_file(bc_in, {bc_strict});
            const auto& sets = codes::builtin_sets();
            auto labeled = cohort::build_cohort(std::move(patients), spec, sets.rf_icd10, sets.rf_cpt,
                                                {bc_icd_min, bc_cpt_min});
            cohort::split(labeled, bc_fraction, bc_seed);
            {
                std::ofstream out(bc_out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + bc_out);
                for (const auto& lp : labeled) out << cohort::serialize_labeled(lp) << "\n";
            }
            manifest::RunManifest m;
            m.subcommand = "build-cohort";
            m.seed = bc_seed;
            m.config_digest = flags_digest({std::to_string(bc_fraction), std::to_string(bc_icd_min),
                                            std::to_string(bc_cpt_min), bc_windows.obs_start,
                                            bc_windows.obs_end, bc_windows.label_start, bc_windows.label_end});
            m.inputs = {bc_in};
            m.outputs = {bc_out};
            manifest::write_manifest(m, bc_out + ".manifest.json");
        } else if (*fz) {
            const auto spec = fz_windows.spec();
            const auto labeled = cohort::read_labeled_cohort_file(fz_cohort);
            features::FeatureConfig config;
            config.min_support = fz_min_support;
            config.count_thresholds = parse_int_list(fz_thresholds);
            config.lab_z_edges = parse_double_list(fz_z_edges);
            config.age_bin_width = fz_age_bin;
            config.include_demographics = fz_demographics;
            const auto space = pipeline::fit_space(labeled, spec, config);
            features::save_feature_space(space, fz_space_out);
            manifest::RunManifest m;
            m.subcommand = "featurize";
            m.config_digest = flags_digest({std::to_string(fz_min_support), fz_thresholds, fz_z_edges,
                                            std::to_string(fz_age_bin), std::to_string(fz_demographics)});
            m.inputs = {fz_cohort};
            m.outputs = {fz_space_out};
            manifest::write_manifest(m, fz_space_out + ".manifest.json");
            std::cerr << "feature space: " << space.dims << " columns (version " << space.version << ")\n";
        } else if (*tr) {
            const auto spec = tr_windows.spec();
            const auto labeled = cohort::read_labeled_cohort_file(tr_cohort);
            const auto space = features::load_feature_space(tr_space);
            optimizer::TrainConfig config;
            config.lambda_grid = parse_double_list(tr_grid);
            config.max_iters = tr_max_iters;
            config.tolerance = tr_tol;
            config.seed = tr_seed;
            config.threads = resolve_threads(tr_threads);
            if (tr_class_weights == "balanced") {
                config.weight_mode = optimizer::ClassWeightMode::Balanced;
            } else {
                const auto w = parse_double_list(tr_class_weights);
                if (w.size() != 2) throw std::runtime_error("--class-weights wants 'balanced' or '<w_pos>,<w_neg>'");
                config.weight_mode = optimizer::ClassWeightMode::Explicit;
                config.explicit_weights = {w[0], w[1]};
            }
            const auto train_ds = pipeline::encode_subset(
                labeled, pipeline::select(labeled, cohort::SplitSide::Train), spec, space);
            const auto valid_ds = pipeline::encode_subset(
                labeled, pipeline::select(labeled, cohort::SplitSide::Validation), spec, space);
            auto result = optimizer::sweep(train_ds, valid_ds, config);
            result.best.feature_space_version = space.version;
            optimizer::save_model(result.best, tr_out);
            write_text_file(tr_out + ".sweep.csv", optimizer::sweep_csv(result.rows));
            manifest::RunManifest m;
            m.subcommand = "train";
            m.seed = tr_seed;
            m.config_digest = flags_digest({tr_grid, std::to_string(tr_max_iters), std::to_string(tr_tol),
                                            tr_class_weights});
            m.inputs = {tr_cohort, tr_space};
            m.outputs = {tr_out, tr_out + ".sweep.csv"};
            manifest::write_manifest(m, tr_out + ".manifest.json");
            std::cerr << "best lambda " << result.best.lambda << " (" << result.best.nonzeros()
                      << " nonzero weights)\n";
        } else if (*st) {
            const auto spec = st_windows.spec();
            const auto patients = cohort::ingest_file(st_in, {});
            std::ostringstream csv;
            csv << "id,eligible,egfr,acr_mg_g,tangri_p\n";
            char num[40];
            for (const auto& p : patients) {
                const auto r = tangri::score_patient(p, spec);
                csv << p.id << ',' << (r.eligible ? 1 : 0) << ',';
                if (r.egfr) { std::snprintf(num, sizeof(num), "%.17g", *r.egfr); csv << num; }
                csv << ',';
                if (r.acr_mg_g) { std::snprintf(num, sizeof(num), "%.17g", *r.acr_mg_g); csv << num; }
                csv << ',';
                if (r.probability) { std::snprintf(num, sizeof(num), "%.17g", *r.probability); csv << num; }
                csv << '\n';
            }
            write_text_file(st_out, csv.str());
            manifest::RunManifest m;
            m.subcommand = "score-tangri";
            m.inputs = {st_in};
            m.outputs = {st_out};
            manifest::write_manifest(m, st_out + ".manifest.json");
        } else if (*au) {
            const auto spec = au_windows.spec();
            const auto labeled = cohort::read_labeled_cohort_file(au_cohort);
            const auto model = optimizer::load_model(au_model);
            const auto space = features::load_feature_space(au_space);
            const auto result = pipeline::audit(labeled, model, space, spec, au_min_class);
            std::filesystem::create_directories(au_out);
            const std::string base = au_out + "/";
            write_text_file(base + "eligibility.csv", metrics::eligibility_csv(result.eligibility_rows));
            write_text_file(base + "eligibility.txt", metrics::eligibility_text(result.eligibility_rows));
            write_text_file(base + "auc.csv", metrics::auc_csv(result.auc_rows));
            write_text_file(base + "auc.txt", metrics::auc_text(result.auc_rows));
            manifest::RunManifest m;
            m.subcommand = "audit";
            m.config_digest = flags_digest({std::to_string(au_min_class)});
            m.inputs = {au_cohort, au_model, au_space};
            m.outputs = {base + "eligibility.csv", base + "eligibility.txt", base + "auc.csv", base + "auc.txt"};
            manifest::write_manifest(m, base + "manifest.json");
        } else if (*rp) {
            std::cout << read_text_file(rp_dir + "/eligibility.txt") << "\n"
                      << read_text_file(rp_dir + "/auc.txt");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
