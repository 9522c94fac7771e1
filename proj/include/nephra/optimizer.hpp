#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nephra/features.hpp"

namespace nephra::optimizer {

struct Dataset {
    int dims = 0;
    std::vector<features::SparseVector> x;
    std::vector<int> y;  // 0/1
};

struct ClassWeights {
    double w_pos = 1.0;
    double w_neg = 1.0;
};

// w_pos = N/(2*N_pos), w_neg = N/(2*N_neg)
ClassWeights balanced_weights(std::span<const int> labels);

enum class ClassWeightMode { Balanced, Explicit };

struct TrainConfig {
    std::vector<double> lambda_grid = {0.0001, 0.001, 0.002, 0.005, 0.007, 0.01};
    int max_iters = 2000;
    double tolerance = 1e-7;  // relative objective change
    double init_step = 1.0;
    double backtrack_factor = 0.5;
    int max_backtracks = 60;
    ClassWeightMode weight_mode = ClassWeightMode::Balanced;
    ClassWeights explicit_weights;
    bool fit_intercept = true;
    uint64_t seed = 0;
    int threads = 0;  // 0 = all cores; never changes numeric results
};

struct Model {
    int dims = 0;
    std::vector<double> weights;  // dense internally, sparse on disk
    double intercept = 0.0;
    double lambda = 0.0;
    ClassWeights class_weights;
    int iterations = 0;
    double final_objective = 0.0;
    std::vector<double> objective_trace;  // value after each iteration
    std::string feature_space_version;

    int nonzeros() const;
};

// Mean weighted log loss + lambda * ||w||_1 (intercept unpenalized).
double weighted_objective(std::span<const double> weights, double intercept, const Dataset& data,
                          const ClassWeights& cw, double lambda, int threads = 1);

// Gradient of the smooth (unpenalized) part.
struct Gradient {
    std::vector<double> w;
    double b = 0.0;
};
Gradient smooth_gradient(std::span<const double> weights, double intercept, const Dataset& data,
                         const ClassWeights& cw, int threads = 1);

double soft_threshold(double x, double t);

// Monotone proximal gradient (ISTA) with backtracking line search; zero
// initialization; stops on relative objective change < tolerance. Throws
// std::runtime_error("degenerate labels") on single-class data.
Model train(const Dataset& data, double lambda, const TrainConfig& config);

struct SweepRow {
    double lambda = 0.0;
    int nonzeros = 0;
    double train_objective = 0.0;
    std::optional<double> valid_auc;
};

struct SweepResult {
    Model best;
    std::vector<SweepRow> rows;
};

// One model per grid value; argmax validation AUC, ties to the larger lambda.
SweepResult sweep(const Dataset& train_data, const Dataset& valid_data, const TrainConfig& config);

double predict(const Model& model, const features::SparseVector& x);

std::string serialize_model(const Model& m);
Model parse_model(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace nephra::optimizer
