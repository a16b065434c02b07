#include <doctest.h>

#include "mptbf/priors.hpp"
#include "mptbf/random.hpp"
#include "support/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <random>

using namespace mptbf;

TEST_CASE("balanced density") {
    const auto spec = PriorSpec::balanced(OrderChain({"a", "b"}));
    CHECK(log_prior_density(spec, std::vector<double>{0.2, 0.5}) == doctest::Approx(std::log(2.0)));
    const double out = log_prior_density(spec, std::vector<double>{0.6, 0.5});
    CHECK((std::isinf(out) && out < 0));
    CHECK_THROWS_AS(log_prior_density(spec, std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("adjusted and unbalanced densities") {
    const OrderChain chain({"a", "b", "c"});
    const auto adjusted = PriorSpec::reparameterized(chain, true);
    CHECK(log_prior_density(adjusted, std::vector<double>{0.5, 0.5, 0.5}) ==
          doctest::Approx(std::log(0.75)).epsilon(1e-14));
    const auto uniform = PriorSpec::reparameterized(chain, false);
    CHECK(log_prior_density(uniform, std::vector<double>{0.1, 0.7, 0.3}) == 0.0);
    const auto full = PriorSpec::full_uniform({"a", "b", "c"});
    CHECK(log_prior_density(full, std::vector<double>{0.9, 0.2, 0.3}) == 0.0);
    CHECK(std::isinf(log_prior_density(full, std::vector<double>{1.2, 0.2, 0.3})));
}

TEST_CASE("products over disjoint chains and free coordinates") {
    const auto spec = PriorSpec::balanced({"a", "b", "x", "c", "d", "e"},
                                          {OrderChain({"a", "b"}), OrderChain({"c", "d", "e"})}, {{"x", {2.0, 2.0}}});
    const std::vector<double> theta{0.1, 0.4, 0.5, 0.2, 0.3, 0.9};
    CHECK(log_prior_density(spec, theta) == doctest::Approx(std::log(2.0) + std::log(6.0) + std::log(1.5)));
    CHECK(spec.coordinate_marginal(4) == BetaShape{2.0, 2.0});
    CHECK(spec.coordinate_marginal(2) == BetaShape{2.0, 2.0});
}

TEST_CASE("spec invariants") {
    CHECK_THROWS_AS(PriorSpec::balanced({"a"}, {}), std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec::reparameterized({"a"}, {}, true), std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec::balanced({"a", "b"}, {OrderChain({"a", "z"})}), std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec::balanced({"a", "b", "c"}, {OrderChain({"a", "b"}), OrderChain({"b", "c"})}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec::custom_beta({"a"}, {{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PriorSpec::custom_beta({"a", "b"}, {{1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("coordinates roundtrip through theta") {
    const auto spec = PriorSpec::reparameterized({"x", "a", "b"}, {OrderChain({"a", "b"}, Method::B)}, true);
    const std::vector<double> theta{0.9, 0.2, 0.5};
    const auto coords = spec.to_coordinates(theta);
    CHECK(coords[0] == 0.9);
    CHECK(coords[1] == doctest::Approx(0.2));
    CHECK(coords[2] == doctest::Approx(0.375));
    const auto back = spec.to_theta(coords);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(theta[i]));
    CHECK(spec.label() == "reparam(B,adjusted)");
}

TEST_CASE("marginal examples") {
    CHECK(marginal_balanced(1, 2, 0.5) == doctest::Approx(1.0));
    CHECK(marginal_balanced(2, 4, 0.5) == doctest::Approx(1.5));
    CHECK(marginal_balanced(1, 1, 0.3) == doctest::Approx(1.0));
    CHECK(marginal_unbalanced(3, 3, 0.2) == 1.0);
    CHECK(marginal_unbalanced(1, 2, std::exp(-1.0)) == doctest::Approx(1.0));
    CHECK(marginal_unbalanced(1, 3, 1.0) == 0.0);
    CHECK(std::isinf(marginal_unbalanced(1, 3, 0.0)));
    CHECK_THROWS_AS(marginal_balanced(0, 2, 0.5), std::out_of_range);
    CHECK_THROWS_AS(marginal_unbalanced(3, 2, 0.5), std::out_of_range);
    CHECK_THROWS_AS(marginal_balanced(1, 2, 1.5), std::domain_error);
}

TEST_CASE("property: unbalanced marginals integrate to one") {
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (int P = 1; P <= 6; ++P)
        for (int i = 1; i <= P; ++i) {
            const double v = integrator.integrate([&](double x) { return marginal_unbalanced(i, P, x); }, 0.0, 1.0);
            INFO("i=" << i << " P=" << P);
            CHECK(std::abs(v - 1.0) <= 1e-8);
        }
}

TEST_CASE("property: balanced marginals are mirror images") {
    // Exact on dyadic points, where 1 - x is representable.
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<long> k(0, 1L << 30);
    for (int P = 1; P <= 7; ++P)
        for (int i = 1; i <= P; ++i)
            for (int rep = 0; rep < 50; ++rep) {
                const double x = std::ldexp(static_cast<double>(k(rng)), -30);
                REQUIRE(marginal_balanced(i, P, x) == marginal_balanced(P - i + 1, P, 1.0 - x));
            }
    // Anywhere else equal up to the rounding of 1 - x.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double x = u(rng);
        CHECK(marginal_balanced(2, 6, x) == doctest::Approx(marginal_balanced(5, 6, 1.0 - x)).epsilon(1e-12));
    }
}

TEST_CASE("property: adjusted minus uniform-eta density is log P! plus the log Jacobian") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Method m : {Method::A, Method::B})
        for (std::size_t P = 1; P <= 6; ++P) {
            std::vector<std::string> names;
            for (std::size_t k = 0; k < P; ++k) names.push_back("p" + std::to_string(k));
            const OrderChain chain(names, m);
            const auto adjusted = PriorSpec::reparameterized(chain, true);
            const auto uniform = PriorSpec::reparameterized(chain, false);
            for (int k = 0; k < 100; ++k) {
                std::vector<double> eta(P);
                for (auto& e : eta) e = u(rng);
                const double lhs = log_prior_density(adjusted, eta) - log_prior_density(uniform, eta);
                const double rhs = std::lgamma(static_cast<double>(P) + 1.0) + log_jacobian_det(chain, eta);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            }
        }
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto spec = PriorSpec::balanced(OrderChain({"a", "b", "c"}));
    const auto x = sample_prior(spec, 1, 77);
    const auto y = sample_prior(spec, 1, 77);
    CHECK(x == y);
    CHECK(sample_prior(spec, 5, 77) != sample_prior(spec, 5, 78));
}

TEST_CASE("balanced P=2 draws are ordered with Beta(2,1) on the larger parameter") {
    const auto spec = PriorSpec::balanced(OrderChain({"a", "b"}));
    const auto draws = sample_prior(spec, 100000, 5);
    for (Eigen::Index r = 0; r < draws.rows(); ++r) REQUIRE(draws(r, 0) <= draws(r, 1));
    const auto b = testing::column(draws, 1);
    CHECK(testing::ks_pvalue(b.size(), testing::ks_statistic(b, [](double x) { return x * x; })) > 0.001);
}

TEST_CASE("unbalanced P=2: uniform larger parameter, -log density on the smaller") {
    const auto spec = PriorSpec::reparameterized(OrderChain({"a", "b"}), false);
    const auto draws = sample_prior(spec, 100000, 6);
    const auto a = testing::column(draws, 0);
    const auto b = testing::column(draws, 1);
    CHECK(testing::ks_pvalue(b.size(), testing::ks_statistic(b, [](double x) { return x; })) > 0.001);
    CHECK(testing::ks_pvalue(a.size(), testing::ks_statistic(a, [](double x) {
              return testing::uniform_product_cdf(x, 1);
          })) > 0.001);
}

TEST_CASE("property: sampled marginals match the closed forms") {
    constexpr std::size_t n = 100000;
    for (std::size_t P : {2u, 3u, 4u, 6u}) {
        std::vector<std::string> names;
        for (std::size_t k = 0; k < P; ++k) names.push_back("p" + std::to_string(k));
        const auto balanced = sample_prior(PriorSpec::balanced(OrderChain(names)), n, 100 + P);
        const auto balanced_b = sample_prior(PriorSpec::balanced(OrderChain(names, Method::B)), n, 200 + P);
        const auto unbalanced = sample_prior(PriorSpec::reparameterized(OrderChain(names), false), n, 300 + P);
        for (std::size_t i = 0; i < P; ++i) {
            const double a = static_cast<double>(i + 1), b = static_cast<double>(P - i);
            const int m = static_cast<int>(P - i - 1);
            const auto beta_cdf = [&](double x) { return testing::beta_cdf(x, a, b); };
            const auto prod_cdf = [&](double x) { return testing::uniform_product_cdf(x, m); };
            INFO("P=" << P << " i=" << i + 1);
            const auto col = static_cast<Eigen::Index>(i);
            CHECK(testing::ks_pvalue(n, testing::ks_statistic(testing::column(balanced, col), beta_cdf)) > 0.001);
            CHECK(testing::ks_pvalue(n, testing::ks_statistic(testing::column(balanced_b, col), beta_cdf)) > 0.001);
            CHECK(testing::ks_pvalue(n, testing::ks_statistic(testing::column(unbalanced, col), prod_cdf)) > 0.001);
        }
    }
}

TEST_CASE("beta sampler and density agree") {
    for (BetaShape s : {BetaShape{1, 1}, BetaShape{0.5, 0.5}, BetaShape{3, 1}, BetaShape{1, 4}, BetaShape{31, 31}}) {
        auto rng = make_rng(derive_seed(3, static_cast<std::uint64_t>(s.a * 100 + s.b)));
        std::vector<double> x(50000);
        for (auto& v : x) v = sample_beta(rng, s);
        const double d = testing::ks_statistic(x, [&](double t) { return testing::beta_cdf(t, s.a, s.b); });
        CHECK(testing::ks_pvalue(x.size(), d) > 0.001);
        // Density integrates to the CDF increment.
        boost::math::quadrature::gauss_kronrod<double, 31> gk;
        const double mass = gk.integrate([&](double t) { return std::exp(log_beta_pdf(t, s)); }, 0.2, 0.6);
        CHECK(mass == doctest::Approx(testing::beta_cdf(0.6, s.a, s.b) - testing::beta_cdf(0.2, s.a, s.b)).epsilon(1e-9));
    }
}

TEST_CASE("seed derivation separates streams") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}
