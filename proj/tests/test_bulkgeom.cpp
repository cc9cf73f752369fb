#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "planeparts/bulkgeom.hpp"

using namespace planeparts;

namespace {
constexpr double kPi = std::numbers::pi;

// chi-extent of A at fixed tau != 0: e^{-chi} in (2cosh(tau/2)-2, 2cosh(tau/2)+2).
double chi_upper(double tau) { return -std::log(2.0 * std::cosh(tau / 2.0) - 2.0); }
double chi_lower(double tau) { return -std::log(2.0 * std::cosh(tau / 2.0) + 2.0); }
}  // namespace

TEST_CASE("lattice parity predicates") {
    CHECK(occupancy_valid({0, 1}));     // (0, 1/2)
    CHECK(occupancy_valid({0, -1}));
    CHECK(occupancy_valid({1, 0}));     // (1, 0)
    CHECK(occupancy_valid({-1, 2}));    // (-1, 1)
    CHECK_FALSE(occupancy_valid({0, 0}));
    CHECK_FALSE(occupancy_valid({1, 1}));

    CHECK(translation_admissible({0, 0}));
    CHECK(translation_admissible({1, 1}));
    CHECK(translation_admissible({-1, 1}));
    CHECK(translation_admissible({2, -4}));
    CHECK_FALSE(translation_admissible({0, 1}));
    CHECK_FALSE(translation_admissible({1, 0}));

    // A translation-admissible shift keeps occupancy-validity.
    const LatticePoint base{3, -5};
    REQUIRE(translation_admissible(base));
    for (const LatticePoint off : {LatticePoint{0, 1}, {1, 0}, {-2, 3}}) {
        REQUIRE(occupancy_valid(off));
        CHECK(occupancy_valid({base.t + off.t, base.h2 + off.h2}));
    }
}

TEST_CASE("pattern validation and sup norm") {
    CHECK(Pattern{}.empty());
    CHECK(Pattern{}.sup_norm() == 0.0);

    const Pattern m({{0, 1}, {2, -3}});
    CHECK(m.size() == 2);
    CHECK(m.sup_norm() == 2.0);
    CHECK(Pattern({{0, 1}}).sup_norm() == 0.5);

    CHECK_THROWS_AS(Pattern({{0, 0}}), std::invalid_argument);       // parity
    CHECK_THROWS_AS(Pattern({{0, 1}, {0, 1}}), std::invalid_argument);  // dup
}

TEST_CASE("region A membership") {
    CHECK(in_region_A(0.0, 0.0));
    CHECK_FALSE(in_region_A(0.0, -std::log(4.0)));  // boundary excluded
    CHECK_FALSE(in_region_A(10.0, 0.0));
    CHECK(in_region_A(0.0, 10.0));  // at tau = 0 the region is unbounded above
    CHECK(in_region_A(-1.0, -0.5));
}

TEST_CASE("saddle point closed form") {
    const Complex z0 = saddle_z(0.0, 0.0);
    CHECK(std::abs(z0 - Complex{0.5, std::sqrt(3.0) / 2.0}) < 1e-14);
    // Root of z^2 - z + 1 = 0.
    CHECK(std::abs(z0 * z0 - z0 + 1.0) < 1e-14);

    const Complex z1 = saddle_z(2.0 * std::log(2.0), -std::log(2.0));
    CHECK(std::abs(z1 - Complex{1.0 / 8.0, std::sqrt(15.0) / 8.0}) < 1e-14);

    CHECK_THROWS_AS(saddle_z(0.0, -std::log(4.0)), std::domain_error);
}

TEST_CASE("saddle modulus and membership agree on a grid straddling the boundary") {
    const double delta = 1e-3;
    int n_checked = 0;
    for (int i = 0; i < 50; ++i) {
        const double tau = -2.0 + 4.0 * (i + 0.5) / 50.0;
        if (std::abs(tau) < 0.05) continue;
        const double lo = chi_lower(tau), hi = chi_upper(tau);
        REQUIRE(hi - lo > 4.0 * delta);
        for (double chi : {lo + delta, hi - delta}) {  // just inside
            REQUIRE(in_region_A(tau, chi));
            const Complex z = saddle_z(tau, chi);
            CHECK(std::abs(std::abs(z) - std::exp(-tau / 2.0)) < 1e-12);
            CHECK(z.imag() > 1e-12 * std::abs(z));
            ++n_checked;
        }
        for (double chi : {lo - delta, hi + delta}) {  // just outside
            REQUIRE_FALSE(in_region_A(tau, chi));
            CHECK_THROWS_AS(saddle_z(tau, chi), std::domain_error);
            ++n_checked;
        }
    }
    CHECK(n_checked >= 180);
}

TEST_CASE("density values and symmetry") {
    CHECK(density(0.0, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(density(0.0, 8.0) < 0.02);                       // chi -> +inf empties
    CHECK(density(0.0, -std::log(4.0) + 1e-3) > 0.95);     // frozen full corner

    for (double tau : {0.3, 0.7, 1.2, 1.8}) {
        for (double chi : {-0.3, 0.0, 0.4}) {
            if (!in_region_A(tau, chi)) continue;
            REQUIRE(in_region_A(-tau, chi));
            CHECK(density(tau, chi) == doctest::Approx(density(-tau, chi)).epsilon(1e-12));
            // z(-tau, chi) = e^tau z(tau, chi).
            CHECK(std::abs(saddle_z(-tau, chi) - std::exp(tau) * saddle_z(tau, chi)) < 1e-12);
        }
    }
}

TEST_CASE("bulk point caches consistent data") {
    const BulkPoint bp = BulkPoint::at(0.8, -0.2);
    CHECK(bp.tau == 0.8);
    CHECK(bp.chi == -0.2);
    CHECK(std::abs(std::abs(bp.z) - std::exp(-0.4)) < 1e-13);
    CHECK(bp.phi > 0.0);
    CHECK(bp.phi < kPi);
    CHECK(std::abs(bp.z - std::polar(std::exp(-0.4), bp.phi)) < 1e-13);
    CHECK_THROWS_AS(BulkPoint::at(10.0, 0.0), std::domain_error);
}

TEST_CASE("shifted saddle solves the critical quadratic") {
    CHECK(critical_quadratic_residual(0.0, 0.0) < 1e-14);
    CHECK(critical_quadratic_residual(2.0 * std::log(2.0), -std::log(2.0)) < 1e-14);

    int n_inside = 0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 8; ++j) {
            const double tau = -1.6 + 0.8 * i;
            const double chi = -1.2 + 0.35 * j;
            if (!in_region_A(tau, chi)) continue;
            CHECK(critical_quadratic_residual(tau, chi) < 1e-10);
            ++n_inside;
        }
    }
    CHECK(n_inside >= 20);
}

TEST_CASE("translate enumeration") {
    const Pattern empty{};

    SUBCASE("single candidate at the origin") {
        const auto pts = enumerate_translates({-0.1, 0.1, -0.1, 0.1}, 1.0, empty);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0] == LatticePoint{0, 0});
    }

    SUBCASE("window disjoint from A is empty") {
        const auto pts = enumerate_translates({5.0, 6.0, 0.0, 1.0}, 0.5, empty);
        CHECK(pts.empty());
    }

    SUBCASE("lexicographic order and parity") {
        const auto pts = enumerate_translates({-1.0, 1.0, -1.0, 1.0}, 0.25, empty);
        CHECK(std::is_sorted(pts.begin(), pts.end()));
        for (const LatticePoint& p : pts) {
            CHECK(translation_admissible(p));
            CHECK(in_region_A(0.25 * p.t, 0.25 * p.h2 / 2.0));
        }
    }

    SUBCASE("count matches area of A within the window") {
        // Midpoint quadrature of the A-indicator over [-1,1]^2.
        const int n = 1200;
        const double step = 2.0 / n;
        long long hits = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double tau = -1.0 + (i + 0.5) * step;
                const double chi = -1.0 + (j + 0.5) * step;
                if (in_region_A(tau, chi)) ++hits;
            }
        }
        const double area = hits * step * step;
        const double r = 0.05;
        const auto pts = enumerate_translates({-1.0, 1.0, -1.0, 1.0}, r, empty);
        CHECK(std::abs(pts.size() * r * r - area) < 0.05 * area);
    }
}
