#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cornerflow/wall_profile.hpp"

using namespace cornerflow;

TEST_CASE("flat profile is identically zero at every order") {
    const WallProfile w = WallProfile::flat();
    REQUIRE(w.is_flat());
    for (int k = 0; k <= WallProfile::kMaxOrder; ++k) {
        CHECK(w.eval(0.0, k) == 0.0);
        CHECK(w.eval(0.37, k) == 0.0);
        CHECK(w.eval(-0.2, k) == 0.0);
    }
}

TEST_CASE("monomial profile has the closed-form values inside the flat cutoff region") {
    const double eps = 1e-3;
    const WallProfile w(eps, {1.0}, 1.0);  // W = eps s^4 on [0, 1/2]
    CHECK(w.eval(0.1, 0) == Catch::Approx(eps * 1e-4).margin(1e-18));
    CHECK(w.eval(0.1, 1) == Catch::Approx(4.0 * eps * 1e-3).margin(1e-18));
    CHECK(w.eval(0.1, 2) == Catch::Approx(12.0 * eps * 1e-2).margin(1e-15));
    // corner pinning: W and first three derivatives vanish at s = 0
    for (int k = 0; k <= 3; ++k) CHECK(w.eval(0.0, k) == 0.0);
    CHECK(w.eval(0.0, 4) == Catch::Approx(24.0 * eps));
}

TEST_CASE("derivative order out of range is rejected") {
    const WallProfile w(1e-3, {1.0}, 1.0);
    CHECK_THROWS_AS(w.eval(0.1, 7), std::out_of_range);
    CHECK_THROWS_AS(w.eval(0.1, -1), std::out_of_range);
}

TEST_CASE("analytic derivatives agree with central differences across the cutoff seam") {
    const WallProfile w(1e-3, {1.0, -0.7, 0.3}, 0.9);
    const double h = 1e-5;
    for (int k = 0; k + 1 <= WallProfile::kMaxOrder; ++k) {
        double worst = 0.0;
        for (double s = 0.05; s < 1.0; s += 0.0317) {
            const double fd = (w.eval(s + h, k) - w.eval(s - h, k)) / (2.0 * h);
            worst = std::max(worst, std::fabs(fd - w.eval(s, k + 1)));
        }
        // FD error ~ h^2 |W^(k+3)|; derivative magnitudes grow with order
        CHECK(worst < 1e-4 * std::max(1.0, w.sup_deriv_bound() / w.epsilon()));
    }
}

TEST_CASE("support is compact: profile and six derivatives vanish beyond the cutoff") {
    const WallProfile w(1e-2, {0.5, 1.5}, 0.6);
    for (int k = 0; k <= 6; ++k) {
        CHECK(w.eval(0.6, k) == 0.0);
        CHECK(w.eval(0.75, k) == 0.0);
        CHECK(w.eval(5.0, k) == 0.0);
    }
}

TEST_CASE("sixth derivative is continuous at both cutoff seams") {
    const WallProfile w(1e-3, {1.0}, 0.8);
    const double d = 1e-9;
    for (double seam : {0.4, 0.8}) {
        // a C^5-only cutoff would jump by O(|W^(6)|) here; continuity shows up
        // as O(d * |W^(7)|), far smaller than the local derivative scale
        const double scale = std::max(1.0, std::fabs(w.eval(seam - 1e-3, 6)));
        const double jump = std::fabs(w.eval(seam + d, 6) - w.eval(seam - d, 6));
        CHECK(jump < 0.05 * scale);
    }
}

TEST_CASE("negative arguments use the even cutoff and the raw polynomial part") {
    const WallProfile w(1e-3, {1.0}, 1.0);
    // inside the chi == 1 region the profile is exactly eps s^4
    CHECK(w.eval(-0.1, 0) == Catch::Approx(1e-3 * 1e-4).margin(1e-18));
    CHECK(w.eval(-0.1, 1) == Catch::Approx(-4e-3 * 1e-3).margin(1e-18));
}

TEST_CASE("measured derivative bound scales linearly with epsilon") {
    const WallProfile w1(1e-3, {1.0, 0.4}, 0.7);
    const WallProfile w2(2e-3, {1.0, 0.4}, 0.7);
    CHECK(w2.sup_deriv_bound(512) == Catch::Approx(2.0 * w1.sup_deriv_bound(512)).epsilon(1e-12));
    CHECK(w1.sup_deriv_bound(512) > 0.0);
}
