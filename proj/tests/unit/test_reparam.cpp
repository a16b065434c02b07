#include <doctest.h>

#include "mptbf/oracle.hpp"
#include "mptbf/random.hpp"
#include "mptbf/reparam.hpp"
#include "support/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace mptbf;

namespace {

std::vector<double> sorted_uniform(std::mt19937_64& rng, std::size_t P) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> t(P);
    for (auto& x : t) x = u(rng);
    std::sort(t.begin(), t.end());
    return t;
}

}  // namespace

TEST_CASE("forward examples") {
    const std::vector<double> theta{0.2, 0.5};
    const auto a = to_auxiliary(Method::A, theta);
    CHECK(a[0] == doctest::Approx(0.4));
    CHECK(a[1] == doctest::Approx(0.5));
    const auto b = to_auxiliary(Method::B, theta);
    CHECK(b[0] == doctest::Approx(0.2));
    CHECK(b[1] == doctest::Approx(0.375));
    CHECK(to_auxiliary(Method::A, std::vector<double>{0.7}) == std::vector<double>{0.7});
}

TEST_CASE("inverse examples") {
    const auto a = from_auxiliary(Method::A, std::vector<double>{0.4, 0.5});
    CHECK(a[0] == doctest::Approx(0.2));
    CHECK(a[1] == doctest::Approx(0.5));
    const auto b = from_auxiliary(Method::B, std::vector<double>{0.2, 0.375});
    CHECK(b[0] == doctest::Approx(0.2));
    CHECK(b[1] == doctest::Approx(0.5));
    CHECK(from_auxiliary(Method::A, std::vector<double>(5, 1.0)) == std::vector<double>(5, 1.0));
}

TEST_CASE("boundary convention") {
    // A: zero successor gives eta = 1, and the inverse recovers theta.
    const std::vector<double> zeros{0.0, 0.0, 0.3};
    const auto ea = to_auxiliary(Method::A, zeros);
    CHECK(ea == std::vector<double>{1.0, 0.0, 0.3});
    CHECK(from_auxiliary(Method::A, ea) == zeros);
    // B: predecessor equal to one gives eta = 0.
    const std::vector<double> ones{0.4, 1.0, 1.0};
    const auto eb = to_auxiliary(Method::B, ones);
    CHECK(eb[2] == 0.0);
    const auto back = from_auxiliary(Method::B, eb);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(ones[i]));
}

TEST_CASE("invalid input") {
    CHECK_THROWS_AS(to_auxiliary(Method::A, std::vector<double>{0.6, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(to_auxiliary(Method::B, std::vector<double>{0.2, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(from_auxiliary(Method::A, std::vector<double>{-0.1}), std::invalid_argument);
    CHECK_THROWS_AS(OrderChain({}), std::invalid_argument);
    CHECK_THROWS_AS(OrderChain({"a", "a"}), std::invalid_argument);
    CHECK_THROWS_AS(method_from_string("C"), std::invalid_argument);
    CHECK(method_from_string("B") == Method::B);
    const OrderChain chain({"a", "b"}, Method::B);
    CHECK_THROWS_AS(to_auxiliary(chain, std::vector<double>{0.1}), std::invalid_argument);
}

TEST_CASE("log Jacobian examples") {
    const std::vector<double> half{0.5, 0.5, 0.5};
    CHECK(log_jacobian_det(Method::A, half) == doctest::Approx(std::log(0.125)).epsilon(1e-14));
    CHECK(log_jacobian_det(Method::A, half) == doctest::Approx(-2.079442).epsilon(1e-6));
    CHECK(log_jacobian_det(Method::B, half) == doctest::Approx(std::log(0.125)).epsilon(1e-14));
    CHECK(log_jacobian_det(Method::A, std::vector<double>{0.3}) == 0.0);
    CHECK(log_jacobian_det(Method::B, std::vector<double>{0.3}) == 0.0);
    const double a = log_jacobian_det(Method::A, std::vector<double>{0.5, 0.0});
    CHECK((std::isinf(a) && a < 0));
    const double b = log_jacobian_det(Method::B, std::vector<double>{1.0, 0.5});
    CHECK((std::isinf(b) && b < 0));
}

TEST_CASE("adjusted prior shapes") {
    CHECK(adjusted_prior(Method::A, 3) == std::vector<BetaShape>{{1, 1}, {2, 1}, {3, 1}});
    CHECK(adjusted_prior(Method::B, 3) == std::vector<BetaShape>{{1, 3}, {1, 2}, {1, 1}});
    CHECK(adjusted_prior(Method::A, 1) == std::vector<BetaShape>{{1, 1}});
    CHECK(adjusted_prior(Method::B, 1) == std::vector<BetaShape>{{1, 1}});
}

TEST_CASE("property: roundtrip on the ordered region and on the cube") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Method m : {Method::A, Method::B}) {
        for (std::size_t P = 1; P <= 6; ++P) {
            double worst_theta = 0.0, worst_eta = 0.0;
            for (int k = 0; k < 1000; ++k) {
                const auto theta = sorted_uniform(rng, P);
                const auto back = from_auxiliary(m, to_auxiliary(m, theta));
                for (std::size_t i = 0; i < P; ++i) worst_theta = std::max(worst_theta, std::abs(back[i] - theta[i]));

                std::vector<double> eta(P);
                for (auto& e : eta) e = u(rng);
                const auto mid = from_auxiliary(m, eta);
                const auto again = to_auxiliary(m, mid);
                // Under B, theta_{i-1} near one carries only absolute precision,
                // so eta_i is recoverable to eps / (1 - theta_{i-1}); the error
                // is measured on that scale.
                for (std::size_t i = 0; i < P; ++i) {
                    const double scale = (m == Method::B && i > 0) ? 1.0 - mid[i - 1] : 1.0;
                    worst_eta = std::max(worst_eta, std::abs(again[i] - eta[i]) * scale);
                }
            }
            INFO("method " << to_char(m) << " P=" << P);
            CHECK(worst_theta <= 1e-12);
            CHECK(worst_eta <= 1e-12);
        }
    }
}

TEST_CASE("property: inverse output is ordered") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Method m : {Method::A, Method::B})
        for (int k = 0; k < 500; ++k) {
            std::vector<double> eta(1 + k % 6);
            for (auto& e : eta) e = u(rng);
            const auto theta = from_auxiliary(m, eta);
            CHECK(std::is_sorted(theta.begin(), theta.end()));
        }
}

TEST_CASE("property: log Jacobian matches a finite-difference determinant") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (Method m : {Method::A, Method::B})
        for (std::size_t P = 1; P <= 6; ++P)
            for (int k = 0; k < 100; ++k) {
                std::vector<double> eta(P);
                for (auto& e : eta) e = u(rng);
                const double analytic = log_jacobian_det(m, eta);
                const double fd = testing::log_abs_det_fd(
                    [m](const std::vector<double>& x) { return from_auxiliary(m, x); }, eta);
                REQUIRE(std::abs(fd - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
            }
}

TEST_CASE("property: adjusted pushforward is uniform on the ordered region") {
    constexpr std::size_t n = 100000;
    for (std::size_t P : {2u, 3u, 4u}) {
        const auto reference = oracle::rejection_sample_cone(P, n * 30, 999);
        REQUIRE(reference.draws.rows() >= static_cast<Eigen::Index>(n / 10));
        Eigen::MatrixXd by_method[2];
        for (Method m : {Method::A, Method::B}) {
            auto rng = make_rng(derive_seed(41, static_cast<std::uint64_t>(P) * 2 + (m == Method::A ? 0 : 1)));
            const auto shapes = adjusted_prior(m, P);
            Eigen::MatrixXd draws(n, static_cast<Eigen::Index>(P));
            std::vector<double> eta(P);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t i = 0; i < P; ++i) eta[i] = sample_beta(rng, shapes[i]);
                const auto theta = from_auxiliary(m, eta);
                for (std::size_t i = 0; i < P; ++i) draws(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = theta[i];
            }
            for (std::size_t i = 0; i < P; ++i) {
                const auto a = testing::column(draws, static_cast<Eigen::Index>(i));
                const auto b = testing::column(reference.draws, static_cast<Eigen::Index>(i));
                const double d = testing::ks_two_sample(a, b);
                INFO("method " << to_char(m) << " P=" << P << " i=" << i + 1 << " D=" << d);
                CHECK(testing::ks_two_sample_pvalue(a.size(), b.size(), d) > 0.001);
                // And against the closed-form Beta(i, P - i + 1) marginal.
                const double ai = static_cast<double>(i + 1), bi = static_cast<double>(P - i);
                const double d1 = testing::ks_statistic(a, [&](double x) { return testing::beta_cdf(x, ai, bi); });
                CHECK(testing::ks_pvalue(a.size(), d1) > 0.001);
            }
            by_method[m == Method::A ? 0 : 1] = draws;
        }
        // Method equivalence.
        for (std::size_t i = 0; i < P; ++i) {
            const auto a = testing::column(by_method[0], static_cast<Eigen::Index>(i));
            const auto b = testing::column(by_method[1], static_cast<Eigen::Index>(i));
            CHECK(testing::ks_two_sample_pvalue(n, n, testing::ks_two_sample(a, b)) > 0.001);
        }
    }
}

TEST_CASE("property: uniform eta reproduces the unbalanced marginal density") {
    constexpr std::size_t n = 1000000;
    constexpr int bins = 100;
    for (std::size_t P : {2u, 4u}) {
        auto rng = make_rng(2024 + P);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<std::vector<double>> hist(P, std::vector<double>(bins, 0.0));
        std::vector<double> eta(P);
        for (std::size_t r = 0; r < n; ++r) {
            for (auto& e : eta) e = u(rng);
            const auto theta = from_auxiliary(Method::A, eta);
            for (std::size_t i = 0; i < P; ++i) hist[i][std::min(bins - 1, static_cast<int>(theta[i] * bins))] += 1.0;
        }
        for (std::size_t i = 0; i < P; ++i) {
            const int m = static_cast<int>(P - i - 1);
            // Bin averages of the closed-form density (exact CDF differences)
            // against the density histogram. Each bin's sampling sd is
            // sqrt(density * bins / n); the bound is the larger of 0.02 and 5 sd.
            double worst = 0.0;
            for (int k = 0; k < bins; ++k) {
                const double lo = static_cast<double>(k) / bins, hi = static_cast<double>(k + 1) / bins;
                const double expected = (testing::uniform_product_cdf(hi, m) - testing::uniform_product_cdf(lo, m)) * bins;
                const double empirical = hist[i][k] / static_cast<double>(n) * bins;
                const double tol = std::max(0.02, 5.0 * std::sqrt(expected * bins / static_cast<double>(n)));
                worst = std::max(worst, std::abs(empirical - expected) / tol);
            }
            INFO("P=" << P << " i=" << i + 1);
            CHECK(worst <= 1.0);
        }
    }
}
