#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qsbs/distribution.hpp"
#include "qsbs/smn.hpp"

#include <algorithm>
#include <cmath>

using qsbs::MixtureFamily;
using qsbs::QsbsDistribution;

namespace {

std::vector<MixtureFamily> family_grid() {
    return {MixtureFamily::normal(),
            MixtureFamily::contaminated_normal(0.1, 0.3),
            MixtureFamily::contaminated_normal(0.2, 0.2),
            MixtureFamily::slash(2.0),
            MixtureFamily::slash(4.0),
            MixtureFamily::student_t(2.0),
            MixtureFamily::student_t(11.0)};
}

}  // namespace

TEST_CASE("gamma_alpha closed forms") {
    CHECK(qsbs::gamma_alpha(1.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(qsbs::gamma_alpha(0.5, 1.0) == doctest::Approx(0.5 + std::sqrt(4.25)).epsilon(1e-15));
    CHECK(qsbs::gamma_alpha(2.0, -1.0) == doctest::Approx(-2.0 + std::sqrt(8.0)).epsilon(1e-15));
    CHECK(qsbs::gamma_alpha(2.0, -1.0) > 0.0);
    // Strictly increasing in y_q.
    double prev = qsbs::gamma_alpha(0.7, -3.0);
    for (double y = -2.5; y <= 3.0; y += 0.5) {
        const double g = qsbs::gamma_alpha(0.7, y);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("gamma_alpha_prime is the alpha derivative") {
    CHECK(qsbs::gamma_alpha_prime(1.0, 0.0) == 0.0);
    CHECK(qsbs::gamma_alpha_prime(0.5, 1.0) ==
          doctest::Approx(1.0 + 0.5 / std::sqrt(4.25)).epsilon(1e-15));
    for (double y_q : {-0.3, 0.9, 1.7}) {
        for (double alpha : {0.2, 0.7, 1.6}) {
            const double fd = oracles::central_difference(
                [&](double a) { return qsbs::gamma_alpha(a, y_q); }, alpha, 1e-6);
            CHECK(qsbs::gamma_alpha_prime(alpha, y_q) == doctest::Approx(fd).epsilon(1e-8));
        }
    }
}

TEST_CASE("standardizing transform and its derivative") {
    const QsbsDistribution dist(0.5, 1.0, 0.5, MixtureFamily::normal());
    const double g2 = dist.gamma_alpha() * dist.gamma_alpha();
    CHECK(dist.a_of_t(4.0 * dist.quantile_value() / g2) == doctest::Approx(0.0).epsilon(1e-14));
    // Symmetric family at the median: gamma = 2 and a(t) collapses to the
    // two-root form; at t = Q it vanishes.
    CHECK(dist.gamma_alpha() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dist.a_of_t(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(dist.a_of_t(2.0) ==
          doctest::Approx((std::sqrt(2.0) - std::sqrt(0.5)) / 0.5).epsilon(1e-12));

    const QsbsDistribution skewed(0.7, 2.5, 0.25, MixtureFamily::student_t(11.0));
    for (double t : {0.4, 1.0, 2.5, 6.0}) {
        const double fd = oracles::central_difference(
            [&](double v) { return skewed.a_of_t(v); }, t, 1e-6);
        CHECK(skewed.a_deriv(t) == doctest::Approx(fd).epsilon(1e-6));
        CHECK(skewed.a_deriv(t) > 0.0);
    }
    // a is strictly increasing in t.
    CHECK(skewed.a_of_t(0.5) < skewed.a_of_t(1.0));
    CHECK(skewed.a_of_t(1.0) < skewed.a_of_t(3.0));
    CHECK_THROWS(skewed.a_of_t(0.0));
    CHECK_THROWS(skewed.a_of_t(-1.0));
}

TEST_CASE("density point value and unit mass") {
    const QsbsDistribution unit(1.0, 1.0, 0.5, MixtureFamily::normal());
    CHECK(unit.pdf(1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-10));

    for (const auto& family : family_grid()) {
        const QsbsDistribution dist(0.5, 1.0, 0.5, family);
        const double mass = oracles::integrate_positive_line(
            [&](double t) { return dist.pdf(t); }, 1e-10);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("small shape concentrates the density at the quantile parameter") {
    auto mode_of = [](const QsbsDistribution& dist) {
        double best_t = 0.0, best = -1.0;
        for (double t = 0.05; t <= 5.0; t += 0.002) {
            const double v = dist.pdf(t);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        return best_t;
    };
    const double mode_tight = mode_of(QsbsDistribution(0.1, 1.0, 0.5, MixtureFamily::normal()));
    const double mode_wide = mode_of(QsbsDistribution(1.0, 1.0, 0.5, MixtureFamily::normal()));
    CHECK(std::abs(mode_tight - 1.0) < std::abs(mode_wide - 1.0));
    CHECK(std::abs(mode_tight - 1.0) < 0.02);
}

TEST_CASE("CDF pins the quantile parameter at its level") {
    for (const auto& family : family_grid()) {
        for (double q : {0.25, 0.5, 0.75}) {
            for (double alpha : {0.2, 0.5, 1.0}) {
                const QsbsDistribution dist(alpha, 3.0, q, family);
                const double tol = family.kind == qsbs::Kind::Slash ? 1e-6 : 1e-8;
                CHECK(std::abs(dist.cdf(3.0) - q) < tol);
            }
        }
    }
    const QsbsDistribution dist(0.2, 3.0, 0.25, MixtureFamily::student_t(11.0));
    CHECK(dist.cdf(3.0) == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(dist.cdf(1e-9) < 1e-12);
    CHECK(dist.cdf(1e9) > 1.0 - 1e-12);
    CHECK_THROWS(dist.cdf(0.0));
}

TEST_CASE("quantile function closed form") {
    const QsbsDistribution dist(0.5, 1.0, 0.25, MixtureFamily::student_t(11.0));
    CHECK(dist.quantile(0.25) == doctest::Approx(1.0).epsilon(1e-12));

    const QsbsDistribution median_param(0.8, 2.0, 0.5, MixtureFamily::slash(4.0));
    CHECK(median_param.quantile(0.5) == doctest::Approx(2.0).epsilon(1e-9));

    const double t75 = dist.quantile(0.75);
    CHECK(dist.cdf(t75) == doctest::Approx(0.75).epsilon(1e-8));
}

TEST_CASE("quantile round-trips through the CDF") {
    for (const auto& family : family_grid()) {
        const QsbsDistribution dist(0.5, 2.0, 0.25, family);
        for (double t : {0.3, 1.0, 2.0, 4.0, 9.0}) {
            const double p = dist.cdf(t);
            CHECK(dist.quantile(p) == doctest::Approx(t).epsilon(1e-6));
        }
    }
}

TEST_CASE("scaling identity") {
    for (const auto& family : family_grid()) {
        const QsbsDistribution base(0.5, 1.5, 0.25, family);
        for (double c : {0.3, 2.0, 7.5}) {
            const QsbsDistribution scaled(0.5, c * 1.5, 0.25, family);
            for (double t : {0.5, 1.5, 4.0}) {
                const double tol = family.kind == qsbs::Kind::Slash ? 1e-10 : 1e-12;
                CHECK(std::abs(base.cdf(t) - scaled.cdf(c * t)) < tol);
            }
        }
    }
}

TEST_CASE("reciprocal identity") {
    for (const auto& family : family_grid()) {
        const QsbsDistribution base(0.7, 1.5, 0.3, family);
        const QsbsDistribution inverse(0.7, 1.0 / 1.5, 0.7, family);
        // 1/T has quantile parameter 1/Q at the mirrored level; comparing
        // survival functions keeps the level fixed at 0.3.
        for (double t : {0.4, 1.0, 2.2, 5.0}) {
            const double lhs = base.cdf(t);
            const double rhs = 1.0 - inverse.cdf(1.0 / t);
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
    }
}

TEST_CASE("sampling is positive, deterministic, and matches the law") {
    const QsbsDistribution dist(0.5, 2.0, 0.25, MixtureFamily::student_t(11.0));
    const auto draws = qsbs::qsbs_sample(100000, dist, 42);
    CHECK(*std::min_element(draws.begin(), draws.end()) > 0.0);

    const auto again = qsbs::qsbs_sample(100000, dist, 42);
    CHECK(draws == again);
    const auto other = qsbs::qsbs_sample(100000, dist, 43);
    CHECK(draws != other);

    // Count below the quantile parameter ~ Binomial(n, q): 99% band.
    const double n = static_cast<double>(draws.size());
    double below = 0.0;
    for (double t : draws) below += t < 2.0 ? 1.0 : 0.0;
    const double half_width = 2.5758 * std::sqrt(n * 0.25 * 0.75);
    CHECK(std::abs(below - 0.25 * n) < half_width);
}

TEST_CASE("Kolmogorov-Smirnov agreement between sampler and CDF") {
    for (const auto& family :
         {MixtureFamily::normal(), MixtureFamily::contaminated_normal(0.1, 0.3),
          MixtureFamily::slash(4.0), MixtureFamily::student_t(11.0)}) {
        const QsbsDistribution dist(0.5, 2.0, 0.25, family);
        auto draws = qsbs_sample(10000, dist, 7);
        std::sort(draws.begin(), draws.end());
        const double ks =
            oracles::ks_statistic(draws, [&](double t) { return dist.cdf(t); });
        CHECK(ks < 1.63 / std::sqrt(10000.0));  // 1% critical value
    }
}

TEST_CASE("mixing moments match direct integration") {
    CHECK(qsbs::mixing_moment(MixtureFamily::student_t(11.0), 1) ==
          doctest::Approx(11.0 / 9.0).epsilon(1e-12));
    for (const auto& family : family_grid()) {
        for (int r = 1; r <= 4; ++r) {
            const bool exists =
                (family.kind != qsbs::Kind::Slash || family.nu > r) &&
                (family.kind != qsbs::Kind::StudentT || family.nu > 2.0 * r);
            if (!exists) {
                CHECK_THROWS(qsbs::mixing_moment(family, r));
                continue;
            }
            CHECK(qsbs::mixing_moment(family, r) ==
                  doctest::Approx(oracles::mixing_moment(family, r)).epsilon(1e-8));
        }
    }
}

TEST_CASE("closed-form moments equal quadrature of the density") {
    // Families whose first four inflation moments all exist.
    for (const auto& family :
         {MixtureFamily::normal(), MixtureFamily::contaminated_normal(0.1, 0.3),
          MixtureFamily::student_t(11.0)}) {
        for (double alpha : {0.2, 0.8}) {
            const QsbsDistribution dist(alpha, 2.0, 0.25, family);
            const auto m = qsbs_moments(dist);
            for (int k = 1; k <= 4; ++k) {
                const double numeric = oracles::integrate_positive_line(
                    [&](double t) { return std::pow(t, k) * dist.pdf(t); }, 1e-12);
                CHECK(m.raw[k - 1] == doctest::Approx(numeric).epsilon(1e-6));
            }
            const double mean_numeric = oracles::integrate_positive_line(
                [&](double t) { return t * dist.pdf(t); }, 1e-12);
            CHECK(m.mean == doctest::Approx(mean_numeric).epsilon(1e-8));
            CHECK(m.variance > 0.0);
            CHECK(m.cv == doctest::Approx(std::sqrt(m.variance) / m.mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("normal-kernel mean closed form") {
    for (double alpha : {0.2, 0.5, 1.0}) {
        for (double q : {0.25, 0.5}) {
            const QsbsDistribution dist(alpha, 2.0, q, MixtureFamily::normal());
            const double g2 = dist.gamma_alpha() * dist.gamma_alpha();
            CHECK(qsbs_moments(dist).mean ==
                  doctest::Approx(2.0 * 2.0 * (2.0 + alpha * alpha) / g2).epsilon(1e-12));
        }
    }
}

TEST_CASE("sampling oracle for the mean") {
    for (const auto& family :
         {MixtureFamily::contaminated_normal(0.1, 0.3), MixtureFamily::student_t(11.0),
          MixtureFamily::slash(4.0)}) {
        const QsbsDistribution dist(0.5, 2.0, 0.5, family);
        const auto draws = qsbs_sample(1000000, dist, 11);
        double sum = 0.0, sum2 = 0.0;
        for (double t : draws) {
            sum += t;
            sum2 += t * t;
        }
        const double n = static_cast<double>(draws.size());
        const double mc_mean = sum / n;
        const double mc_se = std::sqrt((sum2 / n - mc_mean * mc_mean) / n);
        CHECK(std::abs(qsbs_raw_moment(dist, 1) - mc_mean) < 4.0 * mc_se);
    }
}

TEST_CASE("moment existence errors name the offending order") {
    const QsbsDistribution t2(0.5, 1.0, 0.5, MixtureFamily::student_t(2.0));
    CHECK_THROWS_WITH_AS(qsbs_moments(t2), doctest::Contains("requires nu > 2"),
                         std::domain_error);
    const QsbsDistribution sl4(0.5, 1.0, 0.5, MixtureFamily::slash(4.0));
    CHECK_THROWS_WITH_AS(qsbs_moments(sl4), doctest::Contains("requires nu > 4"),
                         std::domain_error);
    // Mean and variance of the slash(4) case still exist.
    CHECK(qsbs_raw_moment(sl4, 1) > 0.0);
    CHECK(qsbs_raw_moment(sl4, 2) > 0.0);
}

TEST_CASE("constructor validation") {
    CHECK_THROWS(QsbsDistribution(-1.0, 1.0, 0.5, MixtureFamily::normal()));
    CHECK_THROWS(QsbsDistribution(1.0, 0.0, 0.5, MixtureFamily::normal()));
    CHECK_THROWS(QsbsDistribution(1.0, 1.0, 1.5, MixtureFamily::normal()));
}
