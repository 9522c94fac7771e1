#include "nephra/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nephra/kernels.hpp"
#include "nephra/metrics.hpp"

namespace nephra::optimizer {

namespace {

constexpr size_t kBlock = 4096;

double softplus(double x) {  // log(1 + e^x), stable
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(block) for every block; partial results land in per-block slots and
// are merged by the caller in block order, so thread count never changes the
// numeric result.
template <typename Fn>
void for_blocks(size_t n_blocks, int threads, Fn&& fn) {
    threads = std::min<size_t>(resolve_threads(threads), n_blocks);
    if (threads <= 1) {
        for (size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            for (size_t b = static_cast<size_t>(t); b < n_blocks; b += threads) fn(b);
        });
    }
    for (auto& w : workers) w.join();
}

void check_dims(std::span<const double> weights, const Dataset& data) {
    if (static_cast<int>(weights.size()) != data.dims)
        throw std::invalid_argument("weights/dataset dimension mismatch");
    if (data.x.size() != data.y.size())
        throw std::invalid_argument("dataset x/y length mismatch");
}

double margin_of(std::span<const double> weights, double intercept, const features::SparseVector& x) {
    double m = intercept;
    for (int j : x.active) m += weights[j];
    return m;
}

}  // namespace

ClassWeights balanced_weights(std::span<const int> labels) {
    long n_pos = 0;
    for (int y : labels) n_pos += y ? 1 : 0;
    const long n = static_cast<long>(labels.size());
    const long n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::runtime_error("degenerate labels");
    return {static_cast<double>(n) / (2.0 * static_cast<double>(n_pos)),
            static_cast<double>(n) / (2.0 * static_cast<double>(n_neg))};
}

int Model::nonzeros() const {
    int nz = 0;
    for (double w : weights) nz += w != 0.0;
    return nz;
}

double weighted_objective(std::span<const double> weights, double intercept, const Dataset& data,
                          const ClassWeights& cw, double lambda, int threads) {
    check_dims(weights, data);
    const size_t n = data.x.size();
    const size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(n_blocks, 0.0);
    for_blocks(n_blocks, threads, [&](size_t b) {
        double acc = 0.0;
        const size_t end = std::min(n, (b + 1) * kBlock);
        for (size_t i = b * kBlock; i < end; ++i) {
            const double m = margin_of(weights, intercept, data.x[i]);
            // -y log p - (1-y) log(1-p) = softplus(m) - y*m
            const double loss = data.y[i] ? softplus(-m) : softplus(m);
            acc += (data.y[i] ? cw.w_pos : cw.w_neg) * loss;
        }
        partial[b] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(n) + lambda * kernels::l1_norm(weights.data(), weights.size());
}

Gradient smooth_gradient(std::span<const double> weights, double intercept, const Dataset& data,
                         const ClassWeights& cw, int threads) {
    check_dims(weights, data);
    const size_t n = data.x.size();
    const size_t n_blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> gw(n_blocks);
    std::vector<double> gb(n_blocks, 0.0);
    for_blocks(n_blocks, threads, [&](size_t b) {
        std::vector<double> g(weights.size(), 0.0);
        double acc_b = 0.0;
        const size_t end = std::min(n, (b + 1) * kBlock);
        for (size_t i = b * kBlock; i < end; ++i) {
            const double p = sigmoid(margin_of(weights, intercept, data.x[i]));
            const double c = (data.y[i] ? cw.w_pos : cw.w_neg) * (p - static_cast<double>(data.y[i]));
            for (int j : data.x[i].active) g[j] += c;
            acc_b += c;
        }
        gw[b] = std::move(g);
        gb[b] = acc_b;
    });
    Gradient out;
    out.w.assign(weights.size(), 0.0);
    for (size_t b = 0; b < n_blocks; ++b) {
        for (size_t j = 0; j < out.w.size(); ++j) out.w[j] += gw[b][j];
        out.b += gb[b];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& g : out.w) g *= inv_n;
    out.b *= inv_n;
    return out;
}

double soft_threshold(double x, double t) {
    const double mag = std::fabs(x) - t;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
}

Model train(const Dataset& data, double lambda, const TrainConfig& config) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (data.x.empty()) throw std::invalid_argument("empty dataset");
    const ClassWeights cw = config.weight_mode == ClassWeightMode::Balanced
                                ? balanced_weights(data.y)
                                : config.explicit_weights;
    {
        long n_pos = 0;
        for (int y : data.y) n_pos += y ? 1 : 0;
        if (n_pos == 0 || n_pos == static_cast<long>(data.y.size()))
            throw std::runtime_error("degenerate labels");
    }

    Model m;
    m.dims = data.dims;
    m.weights.assign(static_cast<size_t>(data.dims), 0.0);
    m.lambda = lambda;
    m.class_weights = cw;

    const int threads = config.threads;
    auto smooth_value = [&](std::span<const double> w, double b) {
        return weighted_objective(w, b, data, cw, 0.0, threads);
    };

    double f = smooth_value(m.weights, m.intercept);
    double objective = f + lambda * kernels::l1_norm(m.weights.data(), m.weights.size());
    double step = config.init_step;
    std::vector<double> w_next(m.weights.size());

    for (int it = 0; it < config.max_iters; ++it) {
        Gradient g = smooth_gradient(m.weights, m.intercept, data, cw, threads);
        if (!config.fit_intercept) g.b = 0.0;

        double f_next = 0.0, b_next = 0.0, obj_next = 0.0;
        bool accepted = false;
        for (int bt = 0; bt <= config.max_backtracks; ++bt) {
            w_next = m.weights;
            kernels::prox_step(w_next.data(), g.w.data(), step, step * lambda, w_next.size());
            b_next = m.intercept - step * g.b;
            f_next = smooth_value(w_next, b_next);

            // quadratic majorization check: f(w+) <= f(w) + <g, dw> + ||dw||^2/(2t)
            double lin = g.b * (b_next - m.intercept);
            double quad = (b_next - m.intercept) * (b_next - m.intercept);
            for (size_t j = 0; j < w_next.size(); ++j) {
                const double d = w_next[j] - m.weights[j];
                lin += g.w[j] * d;
                quad += d * d;
            }
            obj_next = f_next + lambda * kernels::l1_norm(w_next.data(), w_next.size());
            if (f_next <= f + lin + quad / (2.0 * step) && obj_next <= objective) {
                accepted = true;
                break;
            }
            step *= config.backtrack_factor;
        }
        if (!accepted) break;  // step underflow: treat as converged

        const double delta = objective - obj_next;
        m.weights.swap(w_next);
        m.intercept = b_next;
        f = f_next;
        objective = obj_next;
        m.iterations = it + 1;
        m.objective_trace.push_back(objective);
        if (delta <= config.tolerance * std::max(1.0, std::fabs(objective))) break;
        step *= 1.25;  // gentle growth; backtracking re-shrinks if needed
    }
    m.final_objective = objective;
    return m;
}

SweepResult sweep(const Dataset& train_data, const Dataset& valid_data, const TrainConfig& config) {
    if (config.lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");
    std::vector<double> grid = config.lambda_grid;
    std::sort(grid.begin(), grid.end());
    SweepResult result;
    bool have_best = false;
    double best_auc = -1.0;
    for (double lambda : grid) {
        Model m = train(train_data, lambda, config);
        std::vector<double> scores;
        scores.reserve(valid_data.x.size());
        for (const auto& x : valid_data.x) scores.push_back(predict(m, x));
        const auto auc = metrics::roc_auc(scores, valid_data.y);
        result.rows.push_back({lambda, m.nonzeros(), m.final_objective, auc});
        const double a = auc.value_or(-1.0);
        if (!have_best || a >= best_auc) {  // >= : ties go to the larger lambda
            best_auc = a;
            result.best = std::move(m);
            have_best = true;
        }
    }
    return result;
}

double predict(const Model& model, const features::SparseVector& x) {
    if (x.dims != model.dims) throw std::invalid_argument("predict: dimension mismatch");
    return sigmoid(margin_of(model.weights, model.intercept, x));
}

std::string serialize_model(const Model& m) {
    std::ostringstream out;
    char num[40];
    out << "nephra-model v1\n";
    out << "feature_space " << (m.feature_space_version.empty() ? "-" : m.feature_space_version) << "\n";
    std::snprintf(num, sizeof(num), "%.17g", m.lambda);
    out << "lambda " << num << "\n";
    std::snprintf(num, sizeof(num), "%.17g", m.intercept);
    out << "intercept " << num << "\n";
    char num2[40];
    std::snprintf(num, sizeof(num), "%.17g", m.class_weights.w_pos);
    std::snprintf(num2, sizeof(num2), "%.17g", m.class_weights.w_neg);
    out << "class_weights " << num << " " << num2 << "\n";
    out << "iterations " << m.iterations << "\n";
    std::snprintf(num, sizeof(num), "%.17g", m.final_objective);
    out << "final_objective " << num << "\n";
    out << "dims " << m.dims << "\n";
    for (int j = 0; j < m.dims; ++j) {
        if (m.weights[j] == 0.0) continue;
        std::snprintf(num, sizeof(num), "%.17g", m.weights[j]);
        out << "weight " << j << " " << num << "\n";
    }
    return out.str();
}

Model parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "nephra-model v1")
        throw std::runtime_error("not a nephra model artifact (bad header)");
    Model m;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "feature_space") {
            ls >> m.feature_space_version;
            if (m.feature_space_version == "-") m.feature_space_version.clear();
        } else if (kind == "lambda") ls >> m.lambda;
        else if (kind == "intercept") ls >> m.intercept;
        else if (kind == "class_weights") ls >> m.class_weights.w_pos >> m.class_weights.w_neg;
        else if (kind == "iterations") ls >> m.iterations;
        else if (kind == "final_objective") ls >> m.final_objective;
        else if (kind == "dims") {
            ls >> m.dims;
            m.weights.assign(static_cast<size_t>(m.dims), 0.0);
        } else if (kind == "weight") {
            int j;
            double w;
            if (!(ls >> j >> w) || j < 0 || j >= m.dims)
                throw std::runtime_error("bad weight line: " + line);
            m.weights[j] = w;
        } else {
            throw std::runtime_error("unknown model line: " + line);
        }
        if (ls.fail()) throw std::runtime_error("bad model line: " + line);
    }
    return m;
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    out << serialize_model(m);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "lambda,nonzeros,train_objective,valid_auc\n";
    char a[40], b[40];
    for (const auto& r : rows) {
        std::snprintf(a, sizeof(a), "%.17g", r.lambda);
        std::snprintf(b, sizeof(b), "%.17g", r.train_objective);
        out << a << ',' << r.nonzeros << ',' << b << ',';
        if (r.valid_auc) {
            std::snprintf(a, sizeof(a), "%.17g", *r.valid_auc);
            out << a;
        } else {
            out << "N/A";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace nephra::optimizer
