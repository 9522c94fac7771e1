#include <doctest.h>

#include <cmath>
#include <vector>

#include "nephra/kernels.hpp"
#include "nephra/rng.hpp"

using namespace nephra;
namespace k = nephra::kernels;

namespace {

struct BackendGuard {
    ~BackendGuard() { k::set_backend(k::Backend::Auto); }
};

std::vector<double> random_vec(Rng& rng, size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.next_normal() * std::exp(rng.next_normal());
    return v;
}

}  // namespace

TEST_CASE("scalar reference values") {
    BackendGuard guard;
    k::set_backend(k::Backend::Scalar);
    double w[3] = {1.5, -0.3, 0.0};
    const double g[3] = {0.0, 0.0, 0.0};
    k::prox_step(w, g, 1.0, 1.0, 3);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == 0.0);
    CHECK(w[2] == 0.0);

    const double v[5] = {1.0, -2.0, 3.0, -4.0, 0.5};
    CHECK(k::l1_norm(v, 5) == doctest::Approx(10.5));
    CHECK(k::max_abs(v, 5) == doctest::Approx(4.0));
    CHECK(k::l1_norm(v, 0) == 0.0);
    CHECK(k::max_abs(v, 0) == 0.0);
}

TEST_CASE("avx2 and scalar backends agree bit-for-bit") {
    BackendGuard guard;
    if (k::active_backend() != k::Backend::Avx2) {
        MESSAGE("AVX2 not available; equivalence covered by scalar-only run");
        return;
    }
    Rng rng(2024);
    for (size_t n : {0UL, 1UL, 3UL, 4UL, 5UL, 7UL, 64UL, 257UL, 4096UL}) {
        auto w = random_vec(rng, n);
        const auto g = random_vec(rng, n);
        const double step = std::exp(rng.next_normal());
        const double thresh = std::fabs(rng.next_normal()) * 0.1;

        auto w_scalar = w;
        k::set_backend(k::Backend::Scalar);
        k::prox_step(w_scalar.data(), g.data(), step, thresh, n);
        const double l1_s = k::l1_norm(w.data(), n);
        const double mx_s = k::max_abs(w.data(), n);

        auto w_avx = w;
        k::set_backend(k::Backend::Avx2);
        k::prox_step(w_avx.data(), g.data(), step, thresh, n);
        const double l1_v = k::l1_norm(w.data(), n);
        const double mx_v = k::max_abs(w.data(), n);

        for (size_t i = 0; i < n; ++i) CHECK(w_scalar[i] == w_avx[i]);
        CHECK(l1_s == l1_v);
        CHECK(mx_s == mx_v);
    }
}

TEST_CASE("prox_step matches elementwise soft threshold definition") {
    BackendGuard guard;
    Rng rng(7);
    const size_t n = 100;
    auto w = random_vec(rng, n);
    const auto g = random_vec(rng, n);
    const double step = 0.37, thresh = 0.2;
    auto expect = w;
    for (size_t i = 0; i < n; ++i) {
        const double x = expect[i] - step * g[i];
        const double mag = std::fabs(x) - thresh;
        expect[i] = mag > 0.0 ? (x > 0 ? mag : -mag) : 0.0;
    }
    k::prox_step(w.data(), g.data(), step, thresh, n);
    for (size_t i = 0; i < n; ++i) CHECK(w[i] == expect[i]);
}
