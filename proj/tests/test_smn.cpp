#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qsbs/smn.hpp"

#include <cmath>
#include <vector>

using qsbs::MixtureFamily;

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

double tol_for(const MixtureFamily& f, double base, double slash_tol) {
    return f.kind == qsbs::Kind::Slash ? slash_tol : base;
}

}  // namespace

TEST_CASE("density values at the mode") {
    CHECK(qsbs::smn_pdf(0.0, MixtureFamily::normal()) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(qsbs::smn_pdf(0.0, MixtureFamily::student_t(1.0)) ==
          doctest::Approx(1.0 / M_PI).epsilon(1e-12));
}

TEST_CASE("slash density matches a high-resolution independent quadrature") {
    const double nu = 4.0;
    for (double y : {0.0, 0.3, 1.5, 3.0, 7.0}) {
        auto integrand = [&](double u) {
            return nu * std::pow(u, nu - 0.5) * qsbs::normal_pdf(y * std::sqrt(u));
        };
        const double expected = oracles::adaptive_simpson(integrand, 0.0, 1.0, 1e-15);
        CHECK(qsbs::smn_pdf(y, MixtureFamily::slash(nu)) ==
              doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::exp(qsbs::smn_log_pdf(y, MixtureFamily::slash(nu))) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("log density stays finite far into the tails") {
    for (const auto& family : family_grid()) {
        const double lp = qsbs::smn_log_pdf(40.0, family);
        CHECK(std::isfinite(lp));
        CHECK(lp < -10.0);
        CHECK(qsbs::smn_log_pdf(-40.0, family) == doctest::Approx(lp).epsilon(1e-10));
    }
}

TEST_CASE("CDF values") {
    for (const auto& family : family_grid())
        CHECK(qsbs::smn_cdf(0.0, family) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(qsbs::smn_cdf(40.0, MixtureFamily::normal()) == doctest::Approx(1.0).epsilon(1e-15));

    // Mixture of two normal CDFs, each evaluated by integrating the density.
    auto phi_oracle = [](double y) {
        return 0.5 + oracles::adaptive_simpson(qsbs::normal_pdf, 0.0, y, 1e-15);
    };
    const double expected = 0.1 * phi_oracle(std::sqrt(0.3)) + 0.9 * phi_oracle(1.0);
    CHECK(qsbs::smn_cdf(1.0, MixtureFamily::contaminated_normal(0.1, 0.3)) ==
          doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("densities are the derivative of the CDFs") {
    for (const auto& family : family_grid()) {
        for (double y : {-4.0, -2.0, -0.7, 0.0, 0.4, 1.3, 3.5}) {
            const double fd = oracles::central_difference(
                [&](double v) { return qsbs::smn_cdf(v, family); }, y, 1e-5);
            const double pdf = qsbs::smn_pdf(y, family);
            CHECK(std::abs(fd - pdf) / pdf < 1e-4);
        }
    }
}

TEST_CASE("densities integrate to one") {
    for (const auto& family : family_grid()) {
        const double mass = oracles::integrate_real_line(
            [&](double y) { return qsbs::smn_pdf(y, family); }, 1e-10);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("symmetry about zero") {
    for (const auto& family : family_grid()) {
        const double tol = tol_for(family, 1e-12, 1e-8);
        for (double y : {0.3, 1.1, 2.7, 5.0}) {
            CHECK(std::abs(qsbs::smn_pdf(y, family) - qsbs::smn_pdf(-y, family)) < tol);
            CHECK(std::abs(qsbs::smn_cdf(-y, family) - (1.0 - qsbs::smn_cdf(y, family))) < tol);
        }
    }
}

TEST_CASE("quantile examples") {
    for (const auto& family : family_grid())
        CHECK(std::abs(qsbs::smn_quantile(0.5, family)) < tol_for(family, 1e-10, 1e-8));
    CHECK(qsbs::smn_quantile(0.975, MixtureFamily::normal()) ==
          doctest::Approx(1.959964).epsilon(1e-6));

    // Contaminated-normal upper decile against a pure-bisection oracle.
    const MixtureFamily cn = MixtureFamily::contaminated_normal(0.1, 0.3);
    const double expected = oracles::bisect(
        [&](double y) { return qsbs::smn_cdf(y, cn); }, 0.9, -50.0, 50.0, 1e-12);
    CHECK(qsbs::smn_quantile(0.9, cn) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("quantile inverts the CDF on [-6, 6]") {
    // The inversion contract lives in CDF-value space: cdf(quantile(p)) = p
    // to 1e-10 (1e-8 slash). Near p = 1 the double spacing alone already
    // costs ~1e-8 in y, so the y-space check uses a slope-aware bound.
    for (const auto& family : family_grid()) {
        const double tol = tol_for(family, 1e-10, 1e-8);
        for (double y = -6.0; y <= 6.0; y += 1.5) {
            const double p = qsbs::smn_cdf(y, family);
            const double back = qsbs::smn_quantile(p, family);
            CHECK(std::abs(qsbs::smn_cdf(back, family) - p) < tol);
            const double slope = qsbs::smn_pdf(y, family);
            CHECK(std::abs(back - y) < std::max(tol, 4e-16 / slope) + 1e-9);
        }
    }
}

TEST_CASE("quantile rejects levels outside (0,1)") {
    CHECK_THROWS(qsbs::smn_quantile(0.0, MixtureFamily::normal()));
    CHECK_THROWS(qsbs::smn_quantile(1.0, MixtureFamily::normal()));
    CHECK_THROWS(qsbs::smn_quantile(-0.2, MixtureFamily::slash(2.0)));
}

TEST_CASE("non-finite arguments are rejected") {
    CHECK_THROWS(qsbs::smn_pdf(std::nan(""), MixtureFamily::normal()));
    CHECK_THROWS(qsbs::smn_cdf(std::numeric_limits<double>::infinity(),
                               MixtureFamily::slash(2.0)));
}

TEST_CASE("family parameter validation") {
    CHECK_THROWS(MixtureFamily::contaminated_normal(0.0, 0.3));
    CHECK_THROWS(MixtureFamily::contaminated_normal(0.4, 1.2));
    CHECK_THROWS(MixtureFamily::slash(0.0));
    CHECK_THROWS(MixtureFamily::student_t(-3.0));
}

TEST_CASE("regularized gamma CDF") {
    CHECK(qsbs::regularized_gamma_cdf(0.0, 2.3, 1.7) == 0.0);
    CHECK(qsbs::regularized_gamma_cdf(1e8, 2.3, 1.7) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(qsbs::regularized_gamma_cdf(1.0, 1.0, 2.0) ==
          doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
    // Monotone in x.
    double prev = 0.0;
    for (double x = 0.1; x < 4.0; x += 0.3) {
        const double v = qsbs::regularized_gamma_cdf(x, 2.5, 0.8);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS(qsbs::regularized_gamma_cdf(1.0, -1.0, 1.0));
    CHECK_THROWS(qsbs::regularized_gamma_cdf(-1.0, 1.0, 1.0));
}
