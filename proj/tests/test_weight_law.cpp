#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pani/weight_law.hpp"

using namespace pani;

TEST_CASE("single atom sampling is deterministic") {
    auto law = WeightLaw::atoms({0.5}, {1.0});
    Rng rng(1);
    for (int i = 0; i < 100; ++i) CHECK(law.sample(rng) == 0.5);
}

TEST_CASE("uniform sample mean") {
    auto law = WeightLaw::uniform(1.0);
    Rng rng(42);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += law.sample(rng);
    CHECK(std::fabs(sum / n - 0.5) < 0.005);  // 3 sigma = 3/(sqrt(12) sqrt(n))
}

TEST_CASE("beta_poly(2) sample mean is 1/4") {
    auto law = WeightLaw::beta_poly(2.0);
    Rng rng(7);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += law.sample(rng);
    CHECK(std::fabs(sum / n - 0.25) < 0.005);
}

TEST_CASE("expect: identity") {
    CHECK(expect(WeightLaw::uniform(1.0), [](double w) { return w; }) ==
          doctest::Approx(0.5).epsilon(1e-8));
    auto two = WeightLaw::atoms({0.3, 0.9}, {0.5, 0.5});
    CHECK(expect(two, [](double w) { return w; }) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("expect: beta_poly E[w/(1-w)] = 1/alpha") {
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        auto law = WeightLaw::beta_poly(alpha);
        double v = expect(law, [](double w) { return w / (1.0 - w); });
        CHECK(std::fabs(v - 1.0 / alpha) < 1e-6);
    }
}

TEST_CASE("expect: divergence detector fires for uniform w/(1-w)") {
    auto law = WeightLaw::uniform(1.0);
    double v = expect(law, [](double w) { return w / (1.0 - w); });
    CHECK(std::isinf(v));
    CHECK(v > 0.0);
}

TEST_CASE("measure basics") {
    auto u = WeightLaw::uniform(1.0);
    CHECK(u.measure(WeightSet::interval(0.0, 0.25)) == doctest::Approx(0.25));
    CHECK(u.measure(WeightSet::full(1.0)) == doctest::Approx(1.0));
    auto b = WeightLaw::beta_poly(2.0);
    CHECK(b.measure(WeightSet::interval(0.9, 1.0)) == doctest::Approx(0.001).epsilon(1e-10));
    CHECK(b.measure(WeightSet::full(1.0)) == doctest::Approx(1.0));
    auto a = WeightLaw::atoms({0.2, 0.6, 1.0}, {0.2, 0.3, 0.5});
    CHECK(a.measure(WeightSet::full(1.0)) == doctest::Approx(1.0));
    CHECK(a.measure(WeightSet::interval(0.5, 1.0, true, false)) == doctest::Approx(0.8));
    CHECK_THROWS_AS(u.measure(WeightSet::interval(0.5, 1.5)), DomainError);
}

TEST_CASE("measure additivity over disjoint families") {
    auto laws = {WeightLaw::uniform(1.0), WeightLaw::beta_poly(1.5),
                 WeightLaw::piecewise({0.0, 0.25, 1.0}, {2.0, 2.0 / 3.0})};
    Rng rng(99);
    for (const auto& law : laws) {
        for (int trial = 0; trial < 50; ++trial) {
            // random partition of [0,1] into <=6 half-open pieces
            std::vector<double> cuts{0.0, 1.0};
            int k = 1 + static_cast<int>(rng.uniform01() * 5);
            for (int i = 0; i < k; ++i) cuts.push_back(rng.uniform01());
            std::sort(cuts.begin(), cuts.end());
            double total = 0.0;
            WeightSet whole;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] <= cuts[i]) continue;
                Interval iv{cuts[i], cuts[i + 1], i > 0, false};
                total += law.measure(WeightSet().add(iv));
                whole.add(iv);
            }
            CHECK(std::fabs(total - law.measure(whole)) < 1e-12);
        }
    }
}

TEST_CASE("empirical cdf matches measure at grid points") {
    auto law = WeightLaw::beta_poly(2.0);
    Rng rng(123);
    const int n = 100000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = law.sample(rng);
    std::sort(xs.begin(), xs.end());
    for (int g = 1; g <= 20; ++g) {
        double t = g / 20.0;
        double ecdf =
            std::lower_bound(xs.begin(), xs.end(), std::nextafter(t, 2.0)) - xs.begin();
        ecdf /= n;
        CHECK(std::fabs(ecdf - law.measure(WeightSet::interval(0.0, t))) <
              2.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("atoms validation") {
    CHECK_THROWS_AS(WeightLaw::atoms({0.5, 0.5}, {0.5, 0.5}), DomainError);
    CHECK_THROWS_AS(WeightLaw::atoms({0.5}, {0.9}), DomainError);
    // sub-1e-9 drift is normalized away
    auto law = WeightLaw::atoms({0.25, 0.75}, {0.5, 0.5 + 1e-10});
    CHECK(law.atom_probs()[0] + law.atom_probs()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dyadic cells") {
    auto p = dyadic_cells(1, 1.0);
    CHECK(p.cell_count() == 2);
    CHECK(p.cell(0).lo == 0.0);
    CHECK(p.cell(0).hi == 0.5);
    CHECK_FALSE(p.cell(0).lo_open);
    CHECK(p.cell(1).lo == 0.5);
    CHECK(p.cell(1).lo_open);
    CHECK(p.cell(1).hi == 1.0);

    auto single = dyadic_cells(0, 3.0);
    CHECK(single.cell_count() == 1);
    CHECK(single.cell(0).hi == 3.0);

    auto q = dyadic_cells(2, 1.0);
    int idx = q.locate(0.3);
    CHECK(q.cell(idx).lo == doctest::Approx(0.25));
    CHECK(q.cell(idx).hi == doctest::Approx(0.5));
    CHECK(q.locate(0.0) == 0);
    CHECK(q.locate(0.25) == 0);   // upper-closed cells
    CHECK(q.locate(1.0) == 3);
    CHECK_THROWS_AS(q.locate(1.5), DomainError);
    CHECK_THROWS_AS(q.locate(-0.1), DomainError);
}

TEST_CASE("dyadic refinement: finer cells nest in coarser ones") {
    for (int m = 0; m < 5; ++m) {
        auto coarse = dyadic_cells(m, 2.0);
        auto fine = dyadic_cells(m + 1, 2.0);
        for (int i = 0; i < fine.cell_count(); ++i) {
            auto c = fine.cell(i);
            int owners = 0;
            for (int j = 0; j < coarse.cell_count(); ++j) {
                auto big = coarse.cell(j);
                if (big.lo <= c.lo && c.hi <= big.hi) ++owners;
            }
            CHECK(owners == 1);
        }
    }
}

TEST_CASE("piecewise law sampling and cdf agree") {
    auto law = WeightLaw::piecewise({0.0, 0.5, 2.0}, {1.0, 1.0 / 3.0});
    CHECK(law.w_star() == 2.0);
    CHECK(law.cdf(0.5) == doctest::Approx(0.5));
    CHECK(law.cdf(2.0) == doctest::Approx(1.0));
    Rng rng(5);
    int below = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i)
        if (law.sample(rng) <= 0.5) ++below;
    CHECK(std::fabs(below / double(n) - 0.5) < 0.01);
}
