#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pani/theory.hpp"

using namespace pani;

// root of lambda*log(lambda/(lambda-1)) = 2, solved to 28 digits with an
// independent high-precision root finder before this module was written
static constexpr double kLambdaBBUniform = 1.2550009749159753;
// -1/2 + lambda*log(lambda/(lambda-1/2)) at the root above
static constexpr double kPsiHalfBBUniform = 0.13775709319418175;
// (9/4 + sqrt(17/16))/2, the atomic two-point analogue
static constexpr double kLambdaTwoAtomBB = 1.6403882032022076;

namespace {
WeightLaw uniform01() { return WeightLaw::uniform(1.0); }
FitnessModel bb() { return FitnessModel::bianconi_barabasi(1.0); }
}  // namespace

TEST_CASE("regime classification") {
    SUBCASE("beta_poly(alpha)/BB criterion is 1/alpha") {
        for (double alpha : {0.5, 2.0, 4.0}) {
            auto rep = classify_regime(bb(), WeightLaw::beta_poly(alpha));
            CHECK(std::fabs(rep.criterion_value - 1.0 / alpha) < 1e-6);
            CHECK(rep.regime == (alpha > 1.0 ? Regime::condensation
                                             : Regime::non_condensation));
        }
        auto boundary = classify_regime(bb(), WeightLaw::beta_poly(1.0));
        CHECK(boundary.regime == Regime::boundary);
    }
    SUBCASE("uniform/BB diverges: no condensation") {
        auto rep = classify_regime(bb(), uniform01());
        CHECK(std::isinf(rep.criterion_value));
        CHECK(rep.regime == Regime::non_condensation);
    }
    SUBCASE("classic PA: denominator vanishes on full measure") {
        auto rep = classify_regime(FitnessModel::classic_pa(1.0), uniform01());
        CHECK(std::isinf(rep.criterion_value));
        CHECK(rep.regime == Regime::non_condensation);
    }
}

TEST_CASE("malthusian parameter") {
    CHECK(malthusian(FitnessModel::classic_pa(1.0), uniform01()) == 2.0);
    CHECK(malthusian(FitnessModel::classic_pa(2.5), uniform01()) == 5.0);
    CHECK(malthusian(FitnessModel::random_recursive(1.0), uniform01()) == 1.0);
    double lam = malthusian(bb(), uniform01(), 1e-10);
    CHECK(std::fabs(lam - kLambdaBBUniform) < 1e-6);

    auto two = WeightLaw::atoms({0.5, 1.0}, {0.5, 0.5});
    Eigen::MatrixXd G(2, 2);
    G << 0.5, 0.5, 1.0, 1.0;
    Eigen::VectorXd H(2);
    H << 0.5, 1.0;
    auto tab = FitnessModel::table(G, H, two.atom_values());
    CHECK(std::fabs(malthusian(tab, two) - kLambdaTwoAtomBB) < 1e-10);

    CHECK_THROWS_AS(malthusian(bb(), WeightLaw::beta_poly(2.0)), PreconditionError);
}

TEST_CASE("monotonicity of the root integral in lambda") {
    GTilde gt(bb(), uniform01());
    double prev = 1e300;
    for (double lam = 1.05; lam < 3.0; lam += 0.1) {
        double v = psi_mass(bb(), uniform01(), WeightSet::full(1.0), lam);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("psi mass") {
    SUBCASE("normalization at the malthusian point") {
        double lam = malthusian(bb(), uniform01());
        CHECK(psi_mass(bb(), uniform01(), WeightSet::full(1.0), lam) ==
              doctest::Approx(1.0).epsilon(1e-7));
        CHECK(psi_mass(FitnessModel::classic_pa(1.0), uniform01(),
                       WeightSet::full(1.0), 2.0) == doctest::Approx(1.0));
    }
    SUBCASE("frozen quadrature value at [0, 1/2]") {
        double v = psi_mass(bb(), uniform01(), WeightSet::interval(0.0, 0.5),
                            kLambdaBBUniform);
        CHECK(std::fabs(v - kPsiHalfBBUniform) < 1e-7);
    }
    SUBCASE("integrable singularity at lambda = g~*") {
        double v = psi_mass(bb(), WeightLaw::beta_poly(2.0), WeightSet::full(1.0), 1.0);
        CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("additivity over disjoint pieces") {
        double lam = 2.0;
        double whole = psi_mass(bb(), uniform01(), WeightSet::full(1.0), lam);
        double a = psi_mass(bb(), uniform01(), WeightSet::interval(0.0, 0.3), lam);
        double b =
            psi_mass(bb(), uniform01(), WeightSet::interval(0.3, 1.0, true, false), lam);
        CHECK(whole == doctest::Approx(a + b).epsilon(1e-8));
    }
}

TEST_CASE("predicted_edge2") {
    CHECK(predicted_edge2(bb(), uniform01(), WeightSet::full(1.0),
                          WeightSet::full(1.0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(predicted_edge2(FitnessModel::classic_pa(1.0), uniform01(),
                          WeightSet::full(1.0), WeightSet::interval(0.0, 0.5)) ==
          doctest::Approx(0.5).epsilon(1e-9));
    double v = predicted_edge2(bb(), uniform01(), WeightSet::interval(0.0, 0.5),
                               WeightSet::interval(0.0, 0.5));
    CHECK(std::fabs(v - kPsiHalfBBUniform * 0.5) < 1e-6);
}

TEST_CASE("condensate mass") {
    CHECK(condensate_mass(bb(), WeightLaw::beta_poly(2.0)) ==
          doctest::Approx(0.5).epsilon(1e-6));
    CHECK(condensate_mass(bb(), WeightLaw::beta_poly(4.0)) ==
          doctest::Approx(0.75).epsilon(1e-6));
    CHECK_THROWS_AS(condensate_mass(bb(), WeightLaw::beta_poly(0.5)),
                    PreconditionError);
}

TEST_CASE("companion paths") {
    Rng rng(11);
    auto rr = companion_sample(FitnessModel::random_recursive(1.0), uniform01(), 0.4,
                               5, rng);
    for (double v : rr.values) CHECK(v == 1.0);

    auto pa = companion_sample(FitnessModel::classic_pa(1.0), uniform01(), 0.4, 5, rng);
    for (std::size_t i = 0; i < pa.values.size(); ++i)
        CHECK(pa.values[i] == doctest::Approx(double(i) + 1.0));

    // BB: E[S_k] = w + w k
    const int reps = 10000, k = 6;
    double sum = 0.0;
    for (int r = 0; r < reps; ++r)
        sum += companion_sample(bb(), uniform01(), 0.5, k, rng).values.back();
    double mean = sum / reps;
    CHECK(std::fabs(mean - (0.5 + 0.5 * k)) < 3.0 * 0.0 + 1e-12);  // deterministic path
}

TEST_CASE("degree limit functional: MC against closed forms") {
    Rng rng(21);
    auto full = WeightSet::full(1.0);
    CHECK(degree_limit_mc(bb(), uniform01(), 0, full, 1.0, 100, rng).value == 1.0);
    auto rr = degree_limit_mc(FitnessModel::random_recursive(1.0), uniform01(), 3,
                              full, 1.0, 2000, rng);
    CHECK(rr.value == doctest::Approx(0.125));  // deterministic path
    auto pa = degree_limit_mc(FitnessModel::classic_pa(1.0), uniform01(), 2, full,
                              2.0, 2000, rng);
    CHECK(pa.value == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("degree limit functional: exact DP") {
    auto one = WeightLaw::atoms({1.0}, {1.0});
    auto full = WeightSet::full(1.0);
    for (int k = 0; k <= 10; ++k) {
        double v =
            degree_limit_exact(FitnessModel::classic_pa(1.0), one, k, full, 2.0);
        CHECK(std::fabs(v - 2.0 / ((k + 1.0) * (k + 2.0))) < 1e-12);
        double r =
            degree_limit_exact(FitnessModel::random_recursive(1.0), one, k, full, 1.0);
        CHECK(std::fabs(r - std::pow(2.0, -k)) < 1e-12);
    }
}

TEST_CASE("degree limit: exact DP agrees with MC on a two-atom model") {
    auto two = WeightLaw::atoms({0.5, 1.0}, {0.5, 0.5});
    Eigen::MatrixXd G(2, 2);
    G << 0.5, 0.5, 1.0, 1.0;
    Eigen::VectorXd H(2);
    H << 0.5, 1.0;
    auto tab = FitnessModel::table(G, H, two.atom_values());
    double lam = malthusian(tab, two);
    auto full = WeightSet::full(1.0);
    Rng rng(31);
    for (int k : {1, 2, 5}) {
        double exact = degree_limit_exact(tab, two, k, full, lam);
        auto mc = degree_limit_mc(tab, two, k, full, lam, 200000, rng);
        CHECK(std::fabs(mc.value - exact) < 3.0 * mc.std_error + 1e-12);
    }
}

TEST_CASE("consistency chain: summed degree functional equals psi mass") {
    // h large relative to g so the product series decays fast
    auto two = WeightLaw::atoms({0.5, 1.0}, {0.5, 0.5});
    Eigen::MatrixXd G(2, 2);
    G << 0.5, 0.5, 1.0, 1.0;
    Eigen::VectorXd H(2);
    H << 4.0, 4.0;
    auto tab = FitnessModel::table(G, H, two.atom_values());
    double lam = malthusian(tab, two);
    const int K = 600;
    double sum = 0.0;
    auto full = WeightSet::full(1.0);
    for (int k = 1; k <= K; ++k) sum += degree_limit_exact(tab, two, k, full, lam);
    double tail = 0.5 * companion_tail_bound(tab, 0.5, lam, K) +
                  0.5 * companion_tail_bound(tab, 1.0, lam, K);
    CHECK(tail < 1e-6);
    CHECK(std::fabs(sum - 1.0) < 1e-6 + tail);
}

TEST_CASE("companion series: truncated sum plus tail meets the resolvent") {
    Rng rng(41);
    SUBCASE("random recursive: geometric series") {
        auto one = WeightLaw::atoms({1.0}, {1.0});
        auto res = companion_series_check(FitnessModel::random_recursive(1.0), one, 1.0, 1.0,
                                 40, 0, rng);
        CHECK(res.exact_path);
        CHECK(res.rhs == doctest::Approx(1.0));
        CHECK(std::fabs(res.lhs_partial + res.tail_bound - 1.0) < 1e-9);
        CHECK(res.gap <= res.tail_bound + 1e-12);
    }
    SUBCASE("classic PA: telescoping series") {
        auto one = WeightLaw::atoms({1.0}, {1.0});
        auto res =
            companion_series_check(FitnessModel::classic_pa(1.0), one, 1.0, 2.0, 3000, 0, rng);
        CHECK(res.rhs == doctest::Approx(1.0));
        CHECK(std::fabs(res.lhs_partial - (1.0 - 2.0 / 3002.0)) < 1e-12);
        CHECK(res.gap <= res.tail_bound + 1e-12);
    }
    SUBCASE("BB at w = 1/2") {
        int K = companion_series_pick_k(bb(), 0.5, kLambdaBBUniform, 1e-3);
        auto res = companion_series_check(bb(), uniform01(), 0.5, kLambdaBBUniform, K, 100000,
                                 rng);
        CHECK(res.tail_bound < 1e-3);
        CHECK(res.rhs == doctest::Approx(0.66225080047829799).epsilon(1e-9));
        CHECK(res.gap <= res.tail_bound + 3.0 * res.mc_std_error + 1e-9);
    }
}

TEST_CASE("power law exponent") {
    CHECK(power_law_exponent(FitnessModel::classic_pa(1.0), uniform01(), 0.3, 2.0) ==
          doctest::Approx(3.0));
    CHECK(std::isinf(
        power_law_exponent(FitnessModel::random_recursive(1.0), uniform01(), 0.3, 1.0)));
    CHECK(power_law_exponent(bb(), uniform01(), 1.0, kLambdaBBUniform) ==
          doctest::Approx(1.0 + kLambdaBBUniform).epsilon(1e-6));
}

TEST_CASE("growth exponent") {
    CHECK(growth_exponent(FitnessModel::classic_pa(1.0), uniform01(), 0.5) ==
          doctest::Approx(0.5));
    CHECK(growth_exponent(FitnessModel::random_recursive(1.0), uniform01(), 0.5) ==
          0.0);
    auto beta2 = WeightLaw::beta_poly(2.0);
    for (double w : {0.2, 0.7, 0.99})
        CHECK(growth_exponent(bb(), beta2, w) == doctest::Approx(w).epsilon(1e-9));
}

TEST_CASE("continuous-time oracle") {
    Rng rng(51);
    SUBCASE("pure birth: Poisson mean") {
        auto res = ct_oracle_fixed(FitnessModel::random_recursive(1.0), uniform01(),
                                   0.5, 2.0, 20000, rng);
        CHECK(res.predicted == doctest::Approx(2.0));
        CHECK(std::fabs(res.mean_y - 2.0) < 3.0 * res.std_error + 1e-9);
    }
    SUBCASE("exponential horizon matches the resolvent value") {
        auto res = ct_oracle_exponential(FitnessModel::classic_pa(1.0), uniform01(),
                                         0.5, 2.0, 50000, rng);
        CHECK(res.predicted == doctest::Approx(1.0));
        CHECK(std::fabs(res.mean_y - 1.0) < 3.0 * res.std_error);
    }
    SUBCASE("small g~ t expansion") {
        double t = 0.05;
        auto res = ct_oracle_fixed(bb(), uniform01(), 0.5, t, 200000, rng);
        double series = 0.5 * t + 0.5 * 0.5 * t * t / 2.0;
        CHECK(std::fabs(res.predicted - series) < 1e-5);
        CHECK(std::fabs(res.mean_y - res.predicted) < 3.0 * res.std_error + 1e-6);
    }
    SUBCASE("rate at or below sup g~ is rejected") {
        CHECK_THROWS_AS(
            ct_oracle_exponential(bb(), uniform01(), 0.5, 0.9, 10, rng),
            PreconditionError);
    }
}

TEST_CASE("ct oracle reproduces the resolvent value across configurations") {
    Rng rng(61);
    struct Cfg {
        FitnessModel model;
        double w, lambda;
    };
    Cfg cfgs[] = {{FitnessModel::random_recursive(1.0), 0.3, 1.0},
                  {FitnessModel::classic_pa(1.0), 0.9, 2.0},
                  {bb(), 0.5, kLambdaBBUniform}};
    for (const auto& c : cfgs) {
        auto ct = ct_oracle_exponential(c.model, uniform01(), c.w, c.lambda, 60000, rng);
        GTilde gt(c.model, uniform01());
        double rhs = c.model.h(c.w) / (c.lambda - gt(c.w));
        CHECK(std::fabs(ct.mean_y - rhs) < 3.0 * ct.std_error + 1e-6);
    }
}

TEST_CASE("full report fields") {
    auto rep = full_report(FitnessModel::classic_pa(1.0), uniform01());
    CHECK(rep.regime == Regime::non_condensation);
    REQUIRE(rep.lambda_star.has_value());
    CHECK(*rep.lambda_star == 2.0);
    CHECK(rep.condensate_mass == 0.0);

    auto cond = full_report(bb(), WeightLaw::beta_poly(2.0));
    CHECK(cond.regime == Regime::condensation);
    CHECK_FALSE(cond.lambda_star.has_value());
    CHECK(cond.condensate_mass == doctest::Approx(0.5).epsilon(1e-6));
}
