#include <doctest.h>

#include <cmath>

#include "nephra/optimizer.hpp"
#include "nephra/rng.hpp"

using namespace nephra;
using namespace nephra::optimizer;
using features::SparseVector;

namespace {

Dataset two_point() {
    // x=+1 (y=1), x=-1 (y=0); encoded as binary features this is
    // feature 0 active for the positive, feature absent for the negative
    Dataset ds;
    ds.dims = 1;
    ds.x = {SparseVector{1, {0}}, SparseVector{1, {}}};
    ds.y = {1, 0};
    return ds;
}

Dataset random_dataset(Rng& rng, int dims, size_t n, double pos_rate = 0.4) {
    Dataset ds;
    ds.dims = dims;
    for (size_t i = 0; i < n; ++i) {
        SparseVector x{dims, {}};
        for (int j = 0; j < dims; ++j)
            if (rng.next_double() < 0.3) x.active.push_back(j);
        ds.x.push_back(std::move(x));
        ds.y.push_back(rng.next_double() < pos_rate);
    }
    // guarantee both classes
    ds.y[0] = 1;
    ds.y[n - 1] = 0;
    return ds;
}

}  // namespace

TEST_CASE("balanced weights and the ln2 identity at p = 0.5") {
    for (long ratio : {1L, 99L, 1999L}) {
        Dataset ds;
        ds.dims = 2;
        for (long i = 0; i < 1 + ratio; ++i) {
            ds.x.push_back(SparseVector{2, {}});
            ds.y.push_back(i == 0 ? 1 : 0);
        }
        const auto cw = balanced_weights(ds.y);
        const std::vector<double> w = {0.0, 0.0};
        // zero model: every p_i = 0.5; balanced weighting makes the mean ln 2
        CHECK(std::fabs(weighted_objective(w, 0.0, ds, cw, 0.0) - std::log(2.0)) < 1e-12);
        // zero weights mean a lambda of 0.01 contributes nothing
        CHECK(std::fabs(weighted_objective(w, 0.0, ds, cw, 0.01) - std::log(2.0)) < 1e-12);
    }
    CHECK_THROWS_WITH_AS(balanced_weights(std::vector<int>{1, 1}), "degenerate labels", std::runtime_error);
}

TEST_CASE("objective on the 2-point problem matches a hand evaluation") {
    const auto ds = two_point();
    const double w = std::log(9.0);
    // positive point: margin ln9, loss = ln(1 + e^-ln9) = ln(10/9)
    // negative point: margin 0, loss = ln 2
    const double expect = 0.5 * (std::log(10.0 / 9.0) + std::log(2.0));
    const std::vector<double> weights = {w};
    CHECK(std::fabs(weighted_objective(weights, 0.0, ds, {1.0, 1.0}, 0.0) - expect) < 1e-12);
}

TEST_CASE("smooth_gradient: trivial cases") {
    Dataset one;
    one.dims = 1;
    one.x = {SparseVector{1, {}}};
    one.y = {0};
    const std::vector<double> w = {0.0};
    const auto g = smooth_gradient(w, 0.0, one, {1.0, 1.0});
    CHECK(g.b == doctest::Approx(0.5));

    // symmetric pair: (x active, y=1) and (x inactive, y=0) at w=0 gives grad_b = 0
    const auto ds = two_point();
    const auto g2 = smooth_gradient(w, 0.0, ds, {1.0, 1.0});
    CHECK(g2.b == doctest::Approx(0.0));
}

TEST_CASE("smooth_gradient matches central finite differences") {
    Rng rng(404);
    for (int trial = 0; trial < 5; ++trial) {
        const int dims = 20;
        const auto ds = random_dataset(rng, dims, 60);
        std::vector<double> w(dims);
        for (auto& x : w) x = rng.next_normal() * 0.5;
        const double b = rng.next_normal() * 0.5;
        const auto cw = balanced_weights(ds.y);
        const auto g = smooth_gradient(w, b, ds, cw);

        const double h = 1e-6;
        double max_err = 0.0;
        for (int j = 0; j < dims; ++j) {
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (weighted_objective(wp, b, ds, cw, 0.0) -
                               weighted_objective(wm, b, ds, cw, 0.0)) / (2 * h);
            max_err = std::max(max_err, std::fabs(fd - g.w[j]));
        }
        const double fdb = (weighted_objective(w, b + h, ds, cw, 0.0) -
                            weighted_objective(w, b - h, ds, cw, 0.0)) / (2 * h);
        max_err = std::max(max_err, std::fabs(fdb - g.b));
        CHECK(max_err < 1e-5);
    }
}

TEST_CASE("soft_threshold definition") {
    CHECK(soft_threshold(1.5, 1.0) == doctest::Approx(0.5));
    CHECK(soft_threshold(-0.3, 1.0) == 0.0);
    CHECK(soft_threshold(-1.5, 1.0) == doctest::Approx(-0.5));
    CHECK(soft_threshold(0.42, 0.0) == doctest::Approx(0.42));
}

TEST_CASE("train: 1-feature problem converges to w* = ln 9 (grid oracle)") {
    // positive point activates the feature, negative point is empty; with no
    // intercept and equal class weights (2, 2) the stationarity condition at
    // lambda 0.1 is sigma(-w) = 0.1, i.e. w* = ln 9
    auto ds = two_point();
    TrainConfig config;
    config.weight_mode = ClassWeightMode::Explicit;
    config.explicit_weights = {2.0, 2.0};
    config.fit_intercept = false;
    config.tolerance = 1e-14;
    config.max_iters = 50000;
    const auto m = train(ds, 0.1, config);
    CHECK(std::fabs(m.weights[0] - std::log(9.0)) < 1e-4);
    CHECK(m.intercept == 0.0);

    // brute-force 1-D grid oracle agrees
    double best_w = 0.0, best_f = 1e300;
    for (double w = 0.0; w <= 4.0; w += 1e-4) {
        const std::vector<double> wv = {w};
        const double f = weighted_objective(wv, 0.0, ds, {2.0, 2.0}, 0.1);
        if (f < best_f) {
            best_f = f;
            best_w = w;
        }
    }
    CHECK(std::fabs(best_w - std::log(9.0)) < 1e-3);
    CHECK(m.final_objective <= best_f + 1e-10);
}

TEST_CASE("train: lambda at or above lambda_max annihilates all weights") {
    Rng rng(7);
    const auto ds = random_dataset(rng, 10, 80);
    TrainConfig config;
    config.tolerance = 1e-10;
    // intercept-only optimum: train with a huge lambda, then measure the
    // gradient's max-abs there
    const auto pinned = train(ds, 1e6, config);
    REQUIRE(pinned.nonzeros() == 0);
    const auto cw = balanced_weights(ds.y);
    const auto g = smooth_gradient(pinned.weights, pinned.intercept, ds, cw);
    double lambda_max = 0.0;
    for (double v : g.w) lambda_max = std::max(lambda_max, std::fabs(v));

    const auto m = train(ds, lambda_max * 1.0001, config);
    CHECK(m.nonzeros() == 0);
    const auto m2 = train(ds, lambda_max * 0.5, config);
    CHECK(m2.nonzeros() > 0);
}

TEST_CASE("train: determinism and degenerate labels") {
    Rng rng(12);
    const auto ds = random_dataset(rng, 8, 50);
    TrainConfig config;
    const auto a = train(ds, 0.01, config);
    const auto b = train(ds, 0.01, config);
    CHECK(serialize_model(a) == serialize_model(b));
    CHECK(a.intercept == b.intercept);

    Dataset degenerate;
    degenerate.dims = 1;
    degenerate.x = {SparseVector{1, {0}}, SparseVector{1, {}}};
    degenerate.y = {1, 1};
    CHECK_THROWS_WITH_AS(train(degenerate, 0.01, config), "degenerate labels", std::runtime_error);
}

TEST_CASE("train: per-iteration objective monotonicity") {
    Rng rng(23);
    for (int trial = 0; trial < 3; ++trial) {
        const auto ds = random_dataset(rng, 12, 100);
        const auto m = train(ds, 0.003, {});
        REQUIRE(!m.objective_trace.empty());
        for (size_t k = 1; k < m.objective_trace.size(); ++k)
            CHECK(m.objective_trace[k] <= m.objective_trace[k - 1]);
    }
}

TEST_CASE("train matches exhaustive grid search on tiny instances") {
    Rng rng(3);
    for (int trial = 0; trial < 3; ++trial) {
        const auto ds = random_dataset(rng, 3, 30);
        TrainConfig config;
        config.tolerance = 1e-12;
        config.max_iters = 30000;
        config.weight_mode = ClassWeightMode::Explicit;
        config.explicit_weights = {1.0, 1.0};
        const double lambda = 0.05;
        const auto m = train(ds, lambda, config);

        double best = 1e300;
        for (double w0 = -2.0; w0 <= 2.0; w0 += 1e-1)
            for (double w1 = -2.0; w1 <= 2.0; w1 += 1e-1)
                for (double w2 = -2.0; w2 <= 2.0; w2 += 1e-1)
                    for (double b = -2.0; b <= 2.0; b += 1e-1) {
                        const std::vector<double> w = {w0, w1, w2};
                        best = std::min(best, weighted_objective(w, b, ds, {1.0, 1.0}, lambda));
                    }
        // coarse grid refined around the trained point
        for (double w0 = m.weights[0] - 0.1; w0 <= m.weights[0] + 0.1; w0 += 1e-3)
            best = std::min(best, weighted_objective(std::vector<double>{w0, m.weights[1], m.weights[2]},
                                                     m.intercept, ds, {1.0, 1.0}, lambda));
        CHECK(m.final_objective <= best + 1e-4);
    }
}

TEST_CASE("sweep: grid table, tie rule, lambda path sparsity") {
    Rng rng(40);
    const auto train_ds = random_dataset(rng, 15, 300);
    const auto valid_ds = random_dataset(rng, 15, 150);
    TrainConfig config;
    config.max_iters = 3000;
    const auto result = sweep(train_ds, valid_ds, config);
    REQUIRE(result.rows.size() == 6);

    // ||w(lambda)||_1 non-increasing along the sorted grid
    double prev_l1 = 1e300;
    for (double lambda : config.lambda_grid) {
        const auto m = train(train_ds, lambda, config);
        double l1 = 0.0;
        for (double w : m.weights) l1 += std::fabs(w);
        CHECK(l1 <= prev_l1 + 1e-6);
        prev_l1 = l1;
    }
    CHECK(result.best.lambda >= config.lambda_grid.front());

    // equal validation AUCs tie-break to the larger lambda: degenerate valid
    // set where every model scores identically (empty vectors only)
    Dataset flat_valid;
    flat_valid.dims = 15;
    for (int i = 0; i < 40; ++i) {
        flat_valid.x.push_back(SparseVector{15, {}});
        flat_valid.y.push_back(i % 2);
    }
    const auto tied = sweep(train_ds, flat_valid, config);
    CHECK(tied.best.lambda == doctest::Approx(config.lambda_grid.back()));
}

TEST_CASE("sweep: planted signal gets selected with high validation AUC") {
    Rng rng(90);
    // feature 0 drives the label; rest is noise
    auto make = [&](size_t n) {
        Dataset ds;
        ds.dims = 6;
        for (size_t i = 0; i < n; ++i) {
            const bool y = rng.next_double() < 0.5;
            SparseVector x{6, {}};
            if (y && rng.next_double() < 0.9) x.active.push_back(0);
            if (!y && rng.next_double() < 0.05) x.active.push_back(0);
            for (int j = 1; j < 6; ++j)
                if (rng.next_double() < 0.3) x.active.push_back(j);
            ds.x.push_back(std::move(x));
            ds.y.push_back(y);
        }
        ds.y[0] = 1;
        ds.y[n - 1] = 0;
        return ds;
    };
    const auto tr = make(600);
    const auto va = make(300);
    const auto result = sweep(tr, va, {});
    double best_auc = -1.0;
    for (const auto& row : result.rows) best_auc = std::max(best_auc, row.valid_auc.value_or(-1.0));
    CHECK(best_auc > 0.95);
}

TEST_CASE("predict: trivial and hand-checked values") {
    Model zero;
    zero.dims = 3;
    zero.weights = {0, 0, 0};
    CHECK(predict(zero, SparseVector{3, {1}}) == doctest::Approx(0.5));

    Model m;
    m.dims = 1;
    m.weights = {std::log(9.0)};
    CHECK(predict(m, SparseVector{1, {}}) == doctest::Approx(0.5));
    CHECK(predict(m, SparseVector{1, {0}}) == doctest::Approx(0.9));

    m.intercept = 500.0;  // saturation stays inside (0,1]
    CHECK(predict(m, SparseVector{1, {0}}) <= 1.0);
    CHECK(predict(m, SparseVector{1, {0}}) > 0.999);

    CHECK_THROWS_AS(predict(m, SparseVector{2, {0}}), std::invalid_argument);
}

TEST_CASE("model serialization round trip") {
    Rng rng(66);
    const auto ds = random_dataset(rng, 10, 60);
    auto m = train(ds, 0.005, {});
    m.feature_space_version = "cafebabe01234567";
    const auto text = serialize_model(m);
    const auto reread = parse_model(text);
    CHECK(serialize_model(reread) == text);
    CHECK(reread.intercept == m.intercept);
    CHECK(reread.lambda == m.lambda);
    CHECK(reread.feature_space_version == m.feature_space_version);
    for (int j = 0; j < m.dims; ++j) CHECK(reread.weights[j] == m.weights[j]);
}
