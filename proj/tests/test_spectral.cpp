#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rr/numvec.hpp"
#include "rr/spectral.hpp"

using namespace rr;

namespace {

SymMatrix random_symmetric(std::size_t n, Rng& rng, double scale = 1.0) {
    SymMatrix H(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) H.set(i, j, rng.uniform(-scale, scale));
    return H;
}

// Characteristic-polynomial oracle: det(H - x I) via LU with partial
// pivoting, roots bracketed on a grid inside the Gershgorin interval and
// polished by bisection. Independent of the Jacobi path it checks.
double det_shifted(const SymMatrix& H, double x) {
    const std::size_t n = H.dim();
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = H.at(i, j) - (i == j ? x : 0.0);
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            det = -det;
        }
        double p = a[k * n + k];
        if (p == 0.0) return 0.0;
        det *= p;
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = a[i * n + k] / p;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return det;
}

std::vector<double> eigenvalues_by_bisection(const SymMatrix& H) {
    const std::size_t n = H.dim();
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) radius += std::abs(H.at(i, j));
        lo = std::min(lo, H.at(i, i) - radius);
        hi = std::max(hi, H.at(i, i) + radius);
    }
    lo -= 1e-3;
    hi += 1e-3;
    const int grid = 20000;
    std::vector<double> roots;
    double prev_x = lo, prev_f = det_shifted(H, lo);
    for (int g = 1; g <= grid; ++g) {
        double x = lo + (hi - lo) * g / grid;
        double f = det_shifted(H, x);
        if ((prev_f < 0.0 && f > 0.0) || (prev_f > 0.0 && f < 0.0)) {
            double a = prev_x, b = x, fa = prev_f;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (a + b);
                double fm = det_shifted(H, mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        } else if (f == 0.0) {
            roots.push_back(x);
        }
        prev_x = x;
        prev_f = f;
    }
    std::sort(roots.begin(), roots.end(), std::greater<double>());
    return roots;
}

void check_spectrum_invariants(const SymMatrix& H, const Spectrum& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        ParamVector r = H.apply(s.vectors[i]).minus(s.vectors[i].scaled(s.values[i]));
        CHECK(norm(r) <= 1e-8 * std::max(1.0, std::abs(s.values[i])));
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            CHECK(std::abs(dot(s.vectors[i], s.vectors[j])) <= 1e-8);
        }
        if (i + 1 < s.size()) CHECK(s.values[i] >= s.values[i + 1]);
    }
}

}  // namespace

TEST_CASE("jacobi on the identity") {
    Spectrum s = jacobi_eigh(SymMatrix::identity(3));
    for (double v : s.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("jacobi on the 2x2 swap matrix") {
    SymMatrix H(2);
    H.set(0, 1, 1.0);
    Spectrum s = jacobi_eigh(H);
    CHECK(s.values[0] == doctest::Approx(1.0));
    CHECK(s.values[1] == doctest::Approx(-1.0));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(s.vectors[0][0]) - inv_sqrt2) <= 1e-12);
    CHECK(std::abs(s.vectors[0][0] - s.vectors[0][1]) <= 1e-12);       // (1,1)/sqrt(2) up to sign
    CHECK(std::abs(s.vectors[1][0] + s.vectors[1][1]) <= 1e-12);       // (1,-1)/sqrt(2) up to sign
}

TEST_CASE("jacobi matches the characteristic-polynomial oracle") {
    Rng rng(2024);
    SymMatrix H = random_symmetric(8, rng);
    Spectrum s = jacobi_eigh(H);
    check_spectrum_invariants(H, s);

    std::vector<double> oracle = eigenvalues_by_bisection(H);
    REQUIRE(oracle.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(std::abs(s.values[i] - oracle[i]) <= 1e-6);
    }

    // Reconstruction error.
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            double rec = 0.0;
            for (std::size_t k = 0; k < 8; ++k)
                rec += s.values[k] * s.vectors[k][i] * s.vectors[k][j];
            double d = rec - H.at(i, j);
            err += d * d;
            ref += H.at(i, j) * H.at(i, j);
        }
    }
    CHECK(std::sqrt(err) <= 1e-8 * std::sqrt(ref));
}

TEST_CASE("hvp by finite differences on a constant-Hessian loss") {
    auto grad = [](const ParamVector& t) {
        return ParamVector({2.0 * t[0], 5.0 * t[1]});
    };
    ParamVector theta({0.3, -0.7});
    ParamVector h = hvp_fd(grad, theta, ParamVector({1, 0}));
    CHECK(std::abs(h[0] - 2.0) <= 1e-9);
    CHECK(std::abs(h[1]) <= 1e-9);

    // Linearity in v.
    ParamVector v({0.4, -1.1});
    ParamVector h1 = hvp_fd(grad, theta, v);
    ParamVector h2 = hvp_fd(grad, theta, v.scaled(2.0));
    CHECK(distance(h2, h1.scaled(2.0)) <= 1e-8);

    CHECK_THROWS_AS(hvp_fd(grad, theta, ParamVector(2, 0.0)), std::invalid_argument);
}

TEST_CASE("hvp on a pure quadratic is exact for any epsilon in range") {
    Rng rng(11);
    SymMatrix A = random_symmetric(6, rng);
    auto grad = [&](const ParamVector& t) { return A.apply(t); };
    ParamVector theta = rng.normal_vector(6);
    ParamVector v = rng.normal_vector(6);
    ParamVector want = A.apply(v);
    for (double eps : {1e-6, 1e-5, 1e-4, 1e-3}) {
        ParamVector got = hvp_fd(grad, theta, v, eps);
        CHECK(distance(got, want) <= 1e-8 * std::max(1.0, norm(want)));
    }
}

TEST_CASE("most negative eigenpairs on a diagonal matrix") {
    SymMatrix H(3);
    H.set(0, 0, -3.0);
    H.set(1, 1, -1.0);
    H.set(2, 2, 2.0);
    auto op = [&](const ParamVector& v) { return H.apply(v); };

    Rng rng(3);
    auto one = most_negative_eigenpairs(op, 3, 1, rng);
    REQUIRE(one.size() == 1);
    CHECK(one[0].value == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(std::abs(std::abs(one[0].vector[0]) - 1.0) <= 1e-4);

    auto two = most_negative_eigenpairs(op, 3, 2, rng);
    REQUIRE(two.size() == 2);
    CHECK(two[0].value == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(two[1].value == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(two[0].index == 1);
    CHECK(two[1].index == 2);
}

TEST_CASE("power method agrees with jacobi on a random 20x20") {
    Rng rng(77);
    SymMatrix H = random_symmetric(20, rng);
    Spectrum s = jacobi_eigh(H);
    auto op = [&](const ParamVector& v) { return H.apply(v); };
    auto pairs = most_negative_eigenpairs(op, 20, 3, rng);
    REQUIRE(pairs.size() == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(pairs[k].value - s.values[19 - k]) <= 1e-5 * std::max(1.0, std::abs(pairs[k].value)));
    }
    // Deflation keeps the pairs orthogonal.
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            CHECK(std::abs(dot(pairs[i].vector, pairs[j].vector)) <= 1e-5);
}

TEST_CASE("gradient descent near a quadratic saddle amplifies negative directions") {
    SymMatrix H(2);
    H.set(0, 0, -2.0);
    H.set(1, 1, -1.0);
    ParamVector theta0({1.0, 1.0});

    auto coeffs = gd_saddle_amplification(H, theta0, 0.1, 5);
    // Eigen order is descending: -1 first (factor 1.1), then -2 (factor 1.2).
    CHECK(std::abs(std::abs(coeffs[0]) - std::pow(1.1, 5)) <= 1e-12);
    CHECK(std::abs(std::abs(coeffs[1]) - std::pow(1.2, 5)) <= 1e-12);

    auto unchanged = gd_saddle_amplification(H, theta0, 0.1, 0);
    CHECK(std::abs(std::abs(unchanged[0]) - 1.0) <= 1e-12);
    CHECK(std::abs(std::abs(unchanged[1]) - 1.0) <= 1e-12);
}

TEST_CASE("amplification matches the closed form on a random indefinite matrix") {
    Rng rng(5);
    SymMatrix H = random_symmetric(4, rng);
    ParamVector theta0 = rng.normal_vector(4, 0.01);
    const double alpha = 0.05;
    for (int T : {1, 3, 10, 50}) {
        auto got = gd_saddle_amplification(H, theta0, alpha, T);
        Spectrum s = jacobi_eigh(H);
        for (std::size_t i = 0; i < 4; ++i) {
            double a0 = dot(s.vectors[i], theta0);
            double want = a0 * std::pow(1.0 - alpha * s.values[i], T);
            CHECK(std::abs(got[i] - want) <= 1e-10);
        }
    }
}

TEST_CASE("eigenvalue clustering tolerance") {
    auto clusters = cluster_eigenvalues({3.0, 3.0 + 5e-7, 1.0, -2.0, -2.0 - 1e-7});
    REQUIRE(clusters.size() == 3);
    CHECK(clusters[0] == std::make_pair<std::size_t, std::size_t>(0, 2));
    CHECK(clusters[1] == std::make_pair<std::size_t, std::size_t>(2, 3));
    CHECK(clusters[2] == std::make_pair<std::size_t, std::size_t>(3, 5));
}
