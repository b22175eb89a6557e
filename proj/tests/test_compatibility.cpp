#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "cornerflow/compatibility.hpp"
#include "oracles.hpp"

using namespace cornerflow;

namespace {

Grid make_grid(int n, double h) {
    Grid g;
    g.n1 = g.n2 = n;
    g.h = h;
    g.dt = 0.25 * h;
    g.levels = 2;
    return g;
}

CornerDomain curved_dom() {
    return {WallProfile(1e-3, {1.0, -0.4}, 0.8), WallProfile(1e-3, {0.7, 0.5}, 0.9)};
}

std::vector<double> trace1(const CornerDomain& dom, const Grid& g, bool second) {
    std::vector<double> out(g.n2 + 1);
    for (int j = 0; j <= g.n2; ++j) {
        const BoundaryCoeffs bc = boundary_coeffs(dom, g.z2(j));
        out[j] = second ? bc.b2 : bc.b1;
    }
    return out;
}

}  // namespace

TEST_CASE("flat-corner jet matches the closed-form quadratic oracle at machine precision") {
    const oracles::FlatJet fj;
    const GasState gas{fj.gamma, fj.b0};
    const Grid g = make_grid(16, 1.0 / 16.0);
    const Field2 phi0 = sample_field(g, [&](double a, double b) { return fj.phi0(a, b); });
    const Field2 phi1 = sample_field(g, [&](double a, double b) { return fj.phi1(a, b); });

    const auto jet = build_jet(CornerDomain::flat(), gas, g, phi0, phi1, 3);
    REQUIRE(jet.size() == 4);

    // quadratic data: every stencil in the builder is exact, so phi2 and phi3
    // agree with the oracle up to roundoff through the coefficient chain
    double e2 = 0.0, e3 = 0.0;
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) {
            e2 = std::max(e2, std::fabs(jet[2].at(i, j) - fj.phi2(g.z1(i), g.z2(j))));
            e3 = std::max(e3, std::fabs(jet[3].at(i, j) - fj.phi3(g.z1(i), g.z2(j))));
        }
    CHECK(e2 <= 1e-12);
    CHECK(e3 <= 1e-10);  // roundoff only: the 1/h^2-scaled sums and the
                         // Jacobian chain accumulate a few hundred ulps
}

TEST_CASE("curved-corner jet converges at second order to the analytic-state reference") {
    const CornerDomain dom = curved_dom();
    const GasState gas{1.4, 2.0};
    const double z = 0.8;
    const auto f0 = [](double a, double b) { return 0.2 * std::cos(1.1 * a + 0.3) * std::cos(0.7 * b - 0.2); };
    const auto f0_1 = [](double a, double b) { return -0.22 * std::sin(1.1 * a + 0.3) * std::cos(0.7 * b - 0.2); };
    const auto f0_2 = [](double a, double b) { return -0.14 * std::cos(1.1 * a + 0.3) * std::sin(0.7 * b - 0.2); };
    const auto f0_11 = [&](double a, double b) { return -1.21 * f0(a, b); };
    const auto f0_22 = [&](double a, double b) { return -0.49 * f0(a, b); };
    const auto f0_12 = [](double a, double b) { return 0.154 * std::sin(1.1 * a + 0.3) * std::sin(0.7 * b - 0.2); };
    const auto f1 = [](double a, double b) { return 0.15 * std::sin(0.9 * a + 0.1) * std::cos(1.3 * b + 0.4); };
    const auto f1_1 = [](double a, double b) { return 0.135 * std::cos(0.9 * a + 0.1) * std::cos(1.3 * b + 0.4); };
    const auto f1_2 = [](double a, double b) { return -0.195 * std::sin(0.9 * a + 0.1) * std::sin(1.3 * b + 0.4); };
    const auto f1_11 = [&](double a, double b) { return -0.81 * f1(a, b); };
    const auto f1_22 = [&](double a, double b) { return -1.69 * f1(a, b); };
    const auto f1_12 = [](double a, double b) { return -0.1755 * std::cos(0.9 * a + 0.1) * std::sin(1.3 * b + 0.4); };

    // continuum phi2 from analytic data derivatives; phi3 on top of it with
    // the first derivatives of phi2 taken by tight finite differences of this
    // closed form (far below the h^2 scales being measured)
    const auto phi2_ref = [&](double z1, double z2) {
        const GeomFrame fr = frame_at(dom, {z1, z2});
        const Vec3 sz{f1(z1, z2), f0_1(z1, z2), f0_2(z1, z2)};
        const AlphaSet al = alpha_coeffs(gas, fr, sz);
        return -(2.0 * (al.second.m[0][1] * f1_1(z1, z2) + al.second.m[0][2] * f1_2(z1, z2)) +
                 al.second.m[1][1] * f0_11(z1, z2) + 2.0 * al.second.m[1][2] * f0_12(z1, z2) +
                 al.second.m[2][2] * f0_22(z1, z2) + al.lower[1] * f0_1(z1, z2) +
                 al.lower[2] * f0_2(z1, z2));
    };
    const auto phi3_ref = [&](double z1, double z2) {
        const GeomFrame fr = frame_at(dom, {z1, z2});
        const Vec3 sz{f1(z1, z2), f0_1(z1, z2), f0_2(z1, z2)};
        const Vec3 szdot{phi2_ref(z1, z2), f1_1(z1, z2), f1_2(z1, z2)};
        const AlphaSet al = alpha_coeffs(gas, fr, sz);
        const AlphaJac jac = alpha_state_jac(gas, fr, sz);
        Sym3 ad{};
        Vec3 ld{0.0, 0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) ad.m[a][b] += jac.second[k].m[a][b] * szdot[k];
            for (int a = 0; a < 3; ++a) ld[a] += jac.lower[k][a] * szdot[k];
        }
        const double dq = 1e-5;
        const double p2d1 = (phi2_ref(z1 + dq, z2) - phi2_ref(z1 - dq, z2)) / (2.0 * dq);
        const double p2d2 = (phi2_ref(z1, z2 + dq) - phi2_ref(z1, z2 - dq)) / (2.0 * dq);
        return -(2.0 * (al.second.m[0][1] * p2d1 + al.second.m[0][2] * p2d2) +
                 al.second.m[1][1] * f1_11(z1, z2) + 2.0 * al.second.m[1][2] * f1_12(z1, z2) +
                 al.second.m[2][2] * f1_22(z1, z2) + al.lower[1] * f1_1(z1, z2) +
                 al.lower[2] * f1_2(z1, z2) +
                 2.0 * (ad.m[0][1] * f1_1(z1, z2) + ad.m[0][2] * f1_2(z1, z2)) +
                 ad.m[1][1] * f0_11(z1, z2) + 2.0 * ad.m[1][2] * f0_12(z1, z2) +
                 ad.m[2][2] * f0_22(z1, z2) + ld[1] * f0_1(z1, z2) + ld[2] * f0_2(z1, z2));
    };

    // error-matched edge stencils keep the truncation field smooth across the
    // edge rows, so the sup norm over ALL nodes is second order for phi3 too,
    // even though it differentiates the discrete phi2 field
    const auto errs = [&](int n) {
        const Grid g = make_grid(n, z / n);
        const Field2 phi0 = sample_field(g, f0);
        const Field2 phi1 = sample_field(g, f1);
        const auto jet = build_jet(dom, gas, g, phi0, phi1, 3);
        double e2 = 0.0, e3 = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                e2 = std::max(e2, std::fabs(jet[2].at(i, j) - phi2_ref(g.z1(i), g.z2(j))));
                e3 = std::max(e3, std::fabs(jet[3].at(i, j) - phi3_ref(g.z1(i), g.z2(j))));
            }
        return std::array<double, 2>{e2, e3};
    };

    const auto c = errs(16), m = errs(32), f = errs(64);
    CAPTURE(c[0], m[0], f[0], c[1], m[1], f[1]);
    CHECK(c[0] / m[0] == Catch::Approx(4.0).margin(0.8));
    CHECK(m[0] / f[0] == Catch::Approx(4.0).margin(0.8));
    // phi3's sup sits at the far corner where h^2 and h^3 pieces are
    // comparable on these grids; single octaves wobble (4.4, 3.1, ...), the
    // two-octave drop is the stable second-order signature
    CHECK(c[1] / f[1] == Catch::Approx(16.0).margin(4.0));
}

TEST_CASE("interior data is compatible to machine zero on curved walls") {
    const CornerDomain dom = curved_dom();
    const GasState gas{1.4, 2.0};
    const Grid g = make_grid(16, 0.05);
    // gentle bumps (steep ones reach vacuum), with support clearing the
    // five-node one-sided windows of the jet builder: first nonzero node at
    // z = 0.3 = 6h, so every stencil the walls can see sums exact zeros
    const Field2 phi0 = data_interior_bump(g, 0.50, 0.50, 0.25, 0.05);
    const Field2 phi1 = data_interior_bump(g, 0.50, 0.50, 0.24, -0.04);

    const auto jet = build_jet(dom, gas, g, phi0, phi1, 3);
    const auto rep =
        check_compatibility(jet, g, trace1(dom, g, false), trace1(dom, g, true), 2);
    CHECK(rep.worst == 0.0);
}

TEST_CASE("near-static jet linearizes to the five-point Laplacian") {
    const GasState gas{1.4, 2.0};
    const double c0sq = 1.0 + (gas.gamma - 1.0) * gas.b0;
    const Grid g = make_grid(24, 1.0 / 24.0);
    const Field2 phi0 = data_interior_bump(g, 0.5, 0.5, 0.35, 1e-3);
    Field2 phi1(g.n1, g.n2);

    const auto jet = build_jet(CornerDomain::flat(), gas, g, phi0, phi1, 2);
    // phi2 = c0^2 (discrete Laplacian of phi0) + corrections cubic in the amplitude
    double lead = 0.0, dev = 0.0;
    const double ih2 = 1.0 / (g.h * g.h);
    for (int i = 1; i < g.n1; ++i)
        for (int j = 1; j < g.n2; ++j) {
            const double lap = (phi0.at(i + 1, j) + phi0.at(i - 1, j) + phi0.at(i, j + 1) +
                                phi0.at(i, j - 1) - 4.0 * phi0.at(i, j)) * ih2;
            lead = std::max(lead, std::fabs(c0sq * lap));
            dev = std::max(dev, std::fabs(jet[2].at(i, j) - c0sq * lap));
        }
    CAPTURE(lead, dev);
    CHECK(lead > 0.1);
    // corrections are quadratic in the data: |grad phi0|^2 / c0^2 ~ 3e-5 here
    CHECK(dev <= 1e-4 * lead);

    // zero data stays zero through both derived orders, walls curved or not
    const Field2 zero(g.n1, g.n2);
    const auto zjet = build_jet(curved_dom(), gas, g, zero, zero, 3);
    CHECK(zjet[2].max_abs() == 0.0);
    CHECK(zjet[3].max_abs() == 0.0);
    // a static constant has zero Laplacian: phi2 vanishes exactly (0.75 keeps
    // every stencil product representable, so the cancellation is bitwise)
    Field2 cst(g.n1, g.n2);
    cst.fill(0.75);
    const auto cjet = build_jet(CornerDomain::flat(), gas, g, cst, zero, 2);
    CHECK(cjet[2].max_abs() == 0.0);
}

TEST_CASE("symmetrized data on a flat corner: residuals vanish at second order") {
    const CornerDomain dom = CornerDomain::flat();
    const GasState gas{1.4, 2.0};
    const auto raw0 = [](double a, double b) { return 0.3 * std::cos(1.2 * a + 0.4) * std::cos(0.9 * b - 0.3); };
    const auto raw1 = [](double a, double b) { return 0.2 * std::cos(0.8 * a - 0.5) * std::cos(1.4 * b + 0.2); };

    const auto worst = [&](int n) {
        const Grid g = make_grid(n, 0.8 / n);
        const Field2 phi0 = data_symmetrized(g, raw0);
        const Field2 phi1 = data_symmetrized(g, raw1);
        const auto jet = build_jet(dom, gas, g, phi0, phi1, 3);
        const std::vector<double> b1(g.n2 + 1, -1.0), b2(g.n2 + 1, 0.0);
        return check_compatibility(jet, g, b1, b2, 2).worst;
    };

    const double wc = worst(16), wm = worst(32), wf = worst(64);
    CAPTURE(wc, wm, wf);
    CHECK(wc > 1e-6);  // residuals are genuinely discrete, not identically zero
    // at least second order; measured ~8x per octave, because parity kills
    // the matched error constants right at the wall rows
    CHECK(wc / wm >= 3.2);
    CHECK(wm / wf >= 3.2);
}

TEST_CASE("oblique projection repairs the order-zero wall-1 trace exactly") {
    const CornerDomain dom = curved_dom();
    const Grid g = make_grid(32, 0.025);
    const Field2 raw =
        sample_field(g, [](double a, double b) { return 0.4 * std::cos(0.8 * a - 0.2) * std::cos(1.1 * b + 0.5); });
    const auto b1 = trace1(dom, g, false), b2 = trace1(dom, g, true);

    const auto res1 = [&](const Field2& d) {
        return check_compatibility({d}, g, b1, b2, 0).wall1[0][0];
    };
    CHECK(res1(raw) > 1e-2);
    const Field2 fixed = data_oblique_projected(raw, g, b1, b2, 0.4);
    CHECK(res1(fixed) <= 1e-13);
}

TEST_CASE("injected wall slope is detected at its exact size") {
    const CornerDomain dom = curved_dom();
    const Grid g = make_grid(32, 0.025);
    const Field2 base = data_interior_bump(g, 0.45, 0.40, 0.30, 0.05);
    const auto b1 = trace1(dom, g, false), b2 = trace1(dom, g, true);

    const auto res2 = [&](double eps) {
        const Field2 bad = data_injected_slope(base, g, eps, 0.4);
        return check_compatibility({bad}, g, b1, b2, 0).wall2[0][0];
    };
    CHECK(res2(1e-3) == Catch::Approx(1e-3).epsilon(1e-12));
    CHECK(res2(1e-4) == Catch::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("taylor evaluation reproduces the jet polynomial and its derivatives") {
    const Grid g = make_grid(4, 0.25);
    const double c[4] = {1.0, 2.0, -3.0, 5.0};
    Field2 shape(g.n1, g.n2);
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) shape.at(i, j) = 1.0 + 0.1 * i - 0.07 * j;
    std::vector<Field2> jet;
    for (int k = 0; k < 4; ++k) {
        Field2 f = shape;
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) f.at(i, j) *= c[k];
        jet.push_back(f);
    }

    const double t = 0.3;
    const double v0 = c[0] + c[1] * t + c[2] * t * t / 2.0 + c[3] * t * t * t / 6.0;
    const double v1 = c[1] + c[2] * t + c[3] * t * t / 2.0;
    const double v2 = c[2] + c[3] * t;
    for (int d = 0; d < 3; ++d) {
        const Field2 out = taylor_psi(jet, t, d);
        const double want = d == 0 ? v0 : (d == 1 ? v1 : v2);
        double err = 0.0;
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j)
                err = std::max(err, std::fabs(out.at(i, j) - want * shape.at(i, j)));
        CHECK(err <= 1e-14);
    }

    // at t = 0 the evaluation is the jet entry itself, bitwise
    const Field2 at0 = taylor_psi(jet, 0.0, 1);
    for (int i = 0; i <= g.n1; ++i)
        for (int j = 0; j <= g.n2; ++j) REQUIRE(at0.at(i, j) == jet[1].at(i, j));

    // derivatives past the jet order vanish identically
    CHECK(taylor_psi(jet, t, 4).max_abs() == 0.0);
    CHECK_THROWS_AS(taylor_psi({}, 0.0, 0), ConfigError);
}

TEST_CASE("jet and compatibility argument validation") {
    const GasState gas{1.4, 2.0};
    const Grid g = make_grid(8, 0.1);
    const Field2 ok(g.n1, g.n2);
    const Field2 bad(g.n1 + 1, g.n2);

    CHECK_THROWS_AS(build_jet(CornerDomain::flat(), gas, g, ok, ok, 1), ConfigError);
    CHECK_THROWS_AS(build_jet(CornerDomain::flat(), gas, g, ok, ok, 4), ConfigError);
    CHECK_THROWS_AS(build_jet(CornerDomain::flat(), gas, g, ok, bad, 3), ConfigError);
    const Grid tiny = make_grid(3, 0.1);
    const Field2 tf(3, 3);
    CHECK_THROWS_AS(build_jet(CornerDomain::flat(), gas, tiny, tf, tf, 2), ConfigError);

    const std::vector<double> b1(g.n2 + 1, -1.0), b2(g.n2 + 1, 0.0);
    CHECK_THROWS_AS(check_compatibility({ok, ok}, g, b1, b2, 2), ConfigError);
    CHECK_THROWS_AS(check_compatibility({bad}, g, b1, b2, 0), ConfigError);
    const std::vector<double> shrt(g.n2, -1.0);
    CHECK_THROWS_AS(check_compatibility({ok}, g, shrt, shrt, 0), ConfigError);
}
