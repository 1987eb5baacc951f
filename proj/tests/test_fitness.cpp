#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pani/fitness.hpp"

using namespace pani;

TEST_CASE("g_tilde: canonical forms") {
    auto u = WeightLaw::uniform(1.0);
    auto pa = FitnessModel::classic_pa(1.0);
    for (double x : {0.0, 0.3, 1.0}) CHECK(g_tilde(pa, u, x) == doctest::Approx(1.0));

    auto bb = FitnessModel::bianconi_barabasi(1.0);
    for (double x : {0.0, 0.3, 1.0}) CHECK(g_tilde(bb, u, x) == doctest::Approx(x));

    auto prod = FitnessModel::product(Phi::identity(), Phi::identity(),
                                      Phi::identity(), 1.0);
    CHECK(g_tilde(prod, u, 0.8) == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("g_tilde_star: canonical forms") {
    auto u = WeightLaw::uniform(1.0);
    CHECK(g_tilde_star(FitnessModel::bianconi_barabasi(1.0), u) == doctest::Approx(1.0));
    CHECK(g_tilde_star(FitnessModel::random_recursive(), u) == 0.0);
    auto prod = FitnessModel::product(Phi::power(2.0), Phi::identity(),
                                      Phi::identity(), 1.0);
    CHECK(g_tilde_star(prod, u) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("g_tilde_star dominates the pointwise sup of g_tilde") {
    auto u = WeightLaw::uniform(1.0);
    auto models = {FitnessModel::bianconi_barabasi(1.0),
                   FitnessModel::additive(1.0),
                   FitnessModel::product(Phi::power(2.0), Phi::identity(),
                                         Phi::identity(), 1.0),
                   FitnessModel::separable_sum(0.7, 0.3, Phi::identity(),
                                               Phi::power(3.0), Phi::identity(), 1.0)};
    for (const auto& m : models) {
        double star = g_tilde_star(m, u);
        GTilde gt(m, u);
        for (int i = 0; i <= 256; ++i) {
            double x = i / 256.0;
            CHECK(star >= gt(x) - 1e-8);
        }
    }
}

TEST_CASE("table forms: quadrature path equals exact sums") {
    auto law = WeightLaw::atoms({0.5, 1.0}, {0.5, 0.5});
    Eigen::MatrixXd G(2, 2);
    G << 0.5, 0.5, 1.0, 1.0;  // g(x,y) = x on the atoms
    Eigen::VectorXd H(2);
    H << 0.5, 1.0;
    auto tab = FitnessModel::table(G, H, {0.5, 1.0});
    // generic expectation path over the atomic law
    for (double x : {0.5, 1.0}) {
        double generic = expect(law, [&](double y) { return tab.g(x, y); });
        CHECK(std::fabs(generic - g_tilde(tab, law, x)) < 1e-12);
    }
    double star_generic = expect(law, [&](double y) { return tab.sup_g_col(y); });
    CHECK(std::fabs(star_generic - g_tilde_star(tab, law)) < 1e-12);
}

TEST_CASE("m_epsilon: product form sublevel sets") {
    auto u = WeightLaw::uniform(1.0);
    auto bb = FitnessModel::bianconi_barabasi(1.0);
    auto dom = make_dominating(bb, u);
    CHECK(dom.x_star == 1.0);
    CHECK(dom.phi1_max == 1.0);

    auto s = m_epsilon(dom, bb, 0.1);
    REQUIRE(s.parts().size() == 1);
    CHECK(s.parts()[0].lo == doctest::Approx(0.9));
    CHECK(s.parts()[0].hi == 1.0);
    CHECK(s.parts()[0].lo_open);
    CHECK_FALSE(s.contains(0.9));
    CHECK(s.contains(0.95));

    // eps beyond the range of phi1 covers the whole support
    auto all = m_epsilon(dom, bb, 1.5);
    CHECK(all.contains(0.0));
    CHECK(all.contains(1.0));
}

TEST_CASE("m_epsilon: table form atom subset") {
    auto law = WeightLaw::atoms({0.2, 0.6, 1.0}, {0.3, 0.3, 0.4});
    Eigen::MatrixXd G(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) G(i, j) = law.atom_values()[i];  // phi1 = id
    Eigen::VectorXd H = Eigen::VectorXd::Ones(3);
    auto tab = FitnessModel::table(G, H, law.atom_values());
    auto dom = make_dominating(tab, law);
    CHECK(dom.x_star == 1.0);
    auto s = m_epsilon(dom, tab, 0.5);
    CHECK_FALSE(s.contains(0.2));
    CHECK(s.contains(0.6));
    CHECK(s.contains(1.0));
}

TEST_CASE("m_epsilon nesting and vanishing measure") {
    auto law = WeightLaw::beta_poly(2.0);
    auto bb = FitnessModel::bianconi_barabasi(1.0);
    auto dom = make_dominating(bb, law);
    double prev_measure = 2.0;
    for (double eps : {0.4, 0.2, 0.1, 0.05, 0.01, 0.001}) {
        auto s = m_epsilon(dom, bb, eps);
        double m = law.measure(s);
        CHECK(m > 0.0);          // D4: mu(M_eps) > 0
        CHECK(m < prev_measure);  // nested, shrinking
        prev_measure = m;
        auto finer = m_epsilon(dom, bb, eps / 2.0);
        for (double x : {0.97, 0.995, 0.9995})
            if (finer.contains(x)) CHECK(s.contains(x));
    }
    CHECK(prev_measure < 1e-8);  // maximizer set has mu-measure 0
}

TEST_CASE("bounds hold on probes and degenerate laws are rejected") {
    auto u = WeightLaw::uniform(1.0);
    auto bb = FitnessModel::bianconi_barabasi(1.0);
    CHECK_NOTHROW(bb.validate(u));
    auto zero = FitnessModel::random_recursive(0.0);  // h == 0 everywhere
    CHECK_THROWS_AS(zero.validate(u), DegenerateLawError);
}

TEST_CASE("decomposition witnesses stay within their stated bound") {
    auto u = WeightLaw::uniform(1.0);
    auto models = {FitnessModel::product(Phi::power(2.0), Phi::identity(),
                                         Phi::identity(), 1.0),
                   FitnessModel::separable_sum(0.7, 0.3, Phi::identity(),
                                               Phi::power(3.0), Phi::identity(), 1.0),
                   FitnessModel::bianconi_barabasi(1.0)};
    Rng rng(77);
    for (const auto& m : models) {
        double j_bound = m.c2_bound();
        for (int i = 0; i < 200; ++i) {
            double x = rng.uniform01();
            CHECK(m.phi1()(x) <= j_bound + 1e-12);
            CHECK(m.phi2()(x) <= j_bound + 1e-12);
        }
    }
}

TEST_CASE("separable forms have no sublevel construction") {
    auto u = WeightLaw::uniform(1.0);
    auto sep = FitnessModel::separable_sum(0.5, 0.5, Phi::identity(), Phi::identity(),
                                           Phi::identity(), 1.0);
    CHECK_THROWS_AS(make_dominating(sep, u), UnsupportedFormError);
}

TEST_CASE("non-rank-one tables have no dominating construction") {
    auto law = WeightLaw::atoms({0.2, 0.8}, {0.5, 0.5});
    Eigen::MatrixXd G(2, 2);
    G << 1.0, 0.0, 0.0, 1.0;
    Eigen::VectorXd H = Eigen::VectorXd::Ones(2);
    auto tab = FitnessModel::table(G, H, law.atom_values());
    CHECK_THROWS_AS(make_dominating(tab, law), UnsupportedFormError);
}

TEST_CASE("regularized models: pointwise values") {
    auto u = WeightLaw::uniform(1.0);
    auto bb = FitnessModel::bianconi_barabasi(1.0);  // product: phi1=id, phi2=1
    auto dom = make_dominating(bb, u);
    Regularization plus{std::make_shared<FitnessModel>(bb), m_epsilon(dom, bb, 0.1),
                        dom.x_star, 0.1, +1, dom.u_phi, {}};
    auto g_eps = FitnessModel::regularize(plus);
    CHECK(g_eps.g(0.5, 0.3) == doctest::Approx(0.5));   // untouched off m_eps
    CHECK(g_eps.g(0.95, 0.3) == doctest::Approx(1.0));  // row of x* on m_eps

    Regularization minus{std::make_shared<FitnessModel>(bb), m_epsilon(dom, bb, 0.1),
                         dom.x_star, 0.1, -1, dom.u_phi, {}};
    auto g_meps = FitnessModel::regularize(minus);
    CHECK(g_meps.g(0.95, 0.3) == doctest::Approx(0.9));  // 1 - eps*phi2
    CHECK(g_meps.g(0.5, 0.3) == doctest::Approx(0.5));
    CHECK(g_meps.h(0.7) == doctest::Approx(0.7));  // h unchanged

    // eps -> 0 pointwise off the maximizer set
    for (double eps : {0.1, 0.01, 0.001}) {
        Regularization r{std::make_shared<FitnessModel>(bb), m_epsilon(dom, bb, eps),
                         dom.x_star, eps, +1, dom.u_phi, {}};
        auto m = FitnessModel::regularize(r);
        CHECK(std::fabs(m.g(0.5, 0.4) - bb.g(0.5, 0.4)) == 0.0);
    }
}
