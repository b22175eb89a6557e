#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "cornerflow/extension.hpp"
#include "cornerflow/linear_solver.hpp"
#include "oracles.hpp"

using namespace cornerflow;

namespace {

Grid make_grid(int n1, int n2, double h, double dt, int levels, double orig = 0.0) {
    Grid g;
    g.n1 = n1;
    g.n2 = n2;
    g.h = h;
    g.dt = dt;
    g.levels = levels;
    g.z2_origin = orig;
    return g;
}

// C^6 compactly supported bump of unit radius.
double bump(double u) {
    const double s = 1.0 - u * u;
    return s > 0.0 ? s * s * s * s * s * s * s : 0.0;
}

LinearIBVP base_problem(const Grid& g) {
    LinearIBVP p;
    p.phi0 = Field2(g.n1, g.n2);
    p.phi1 = Field2(g.n1, g.n2);
    p.b1.assign(g.n2 + 1, -1.0);
    p.b2.assign(g.n2 + 1, 0.0);
    return p;
}

}  // namespace

TEST_CASE("assumption validation reports margins and rejects violations") {
    const Grid g = make_grid(8, 8, 0.1, 0.02, 10);
    LinearIBVP p = base_problem(g);
    p.r11 = CoeffField::constant(-1.3);
    p.r22 = CoeffField::constant(-0.8);
    p.r12 = CoeffField::constant(0.2);

    const AssumptionReport rep = validate_assumptions(p, g);
    CHECK(rep.min_m1 == Catch::Approx(1.3));
    CHECK(rep.min_det == Catch::Approx(1.3 * 0.8 - 0.04));
    CHECK(rep.cmax == Catch::Approx(std::sqrt(0.5 * (2.1 + std::sqrt(0.25 + 0.16)))));
    CHECK(rep.cfl < 1.0);

    LinearIBVP bad = p;
    bad.r11 = CoeffField::constant(0.5);
    CHECK_THROWS_AS(validate_assumptions(bad, g), NotHyperbolic);
    bad = p;
    bad.r12 = CoeffField::constant(1.2);
    bad.r11 = CoeffField::constant(-1.0);
    bad.r22 = CoeffField::constant(-1.0);
    CHECK_THROWS_AS(validate_assumptions(bad, g), NotHyperbolic);

    Grid gfast = g;
    gfast.dt = 0.2;
    CHECK_THROWS_AS(validate_assumptions(p, gfast), CFLViolation);

    bad = p;
    bad.r01 = CoeffField::constant(5.0);
    CHECK_THROWS_AS(validate_assumptions(bad, g), CFLViolation);

    bad = p;
    bad.b1.assign(g.n2 + 1, 1.0);
    CHECK_THROWS_AS(validate_assumptions(bad, g), PreconditionViolated);
    bad = p;
    bad.b1.resize(3);
    CHECK_THROWS_AS(validate_assumptions(bad, g), ConfigError);
    bad = p;
    bad.phi0 = Field2(2, 2);
    CHECK_THROWS_AS(validate_assumptions(bad, g), ConfigError);
}

TEST_CASE("zero data and zero forcing evolve to exact zero") {
    const Grid g = make_grid(12, 12, 1.0 / 12.0, 1.0 / 48.0, 30);
    LinearIBVP p = base_problem(g);
    p.r01 = CoeffField::constant(0.1);  // exercise the sweep path too
    const SolveResult r = solve(p, g);
    CHECK(r.u.max_abs() == 0.0);
    for (double a : r.stats.amp) CHECK(a == 0.0);
}

namespace {

// Forced problem with every term active whose exact solution is a separable
// trig product; mirror closures are exact because d1 and the odd z-derivatives
// of the solution vanish on every edge.
struct Manufactured {
    oracles::TrigProduct w{1.7, M_PI, M_PI};
    double r01 = 0.12, r02 = -0.08, r11 = -1.2, r12 = 0.15, r22 = -0.9;
    double r0 = 0.05, r1 = 0.3, r2 = -0.2;

    double forcing(double t, double a, double b) const {
        return w.d00(t, a, b) + 2.0 * (r01 * w.d01(t, a, b) + r02 * w.d02(t, a, b)) +
               r11 * w.d11(t, a, b) + 2.0 * r12 * w.d12(t, a, b) + r22 * w.d22(t, a, b) +
               r0 * w.d0(t, a, b) + r1 * w.d1(t, a, b) + r2 * w.d2(t, a, b);
    }

    LinearIBVP problem(const Grid& g) const {
        LinearIBVP p;
        p.r01 = CoeffField::constant(r01);
        p.r02 = CoeffField::constant(r02);
        p.r11 = CoeffField::constant(r11);
        p.r12 = CoeffField::constant(r12);
        p.r22 = CoeffField::constant(r22);
        p.r0 = CoeffField::constant(r0);
        p.r1 = CoeffField::constant(r1);
        p.r2 = CoeffField::constant(r2);
        p.b1.assign(g.n2 + 1, -1.0);
        p.b2.assign(g.n2 + 1, 0.0);
        p.phi0 = Field2(g.n1, g.n2);
        p.phi1 = Field2(g.n1, g.n2);
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                p.phi0.at(i, j) = w.value(0.0, g.z1(i), g.z2(j));
                p.phi1.at(i, j) = w.d0(0.0, g.z1(i), g.z2(j));
            }
        std::vector<Field2> slabs(g.levels, Field2(g.n1, g.n2));
        for (int n = 0; n < g.levels; ++n)
            for (int i = 0; i <= g.n1; ++i)
                for (int j = 0; j <= g.n2; ++j)
                    slabs[n].at(i, j) = forcing(g.t(n), g.z1(i), g.z2(j));
        p.f = CoeffField::history(std::move(slabs));
        return p;
    }

    double final_error(int n) const {
        const double h = 1.0 / n;
        const Grid g = make_grid(n, n, h, 0.25 * h, 2 * n + 1);  // T = 0.5 exactly
        const FinalResult r = solve_final(problem(g), g);
        double err = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                err = std::max(err,
                               std::fabs(r.u.at(i, j) - w.value(g.t_final(), g.z1(i), g.z2(j))));
        return err;
    }
};

}  // namespace

TEST_CASE("manufactured solution converges at second order") {
    const Manufactured m;
    const double e16 = m.final_error(16);
    const double e32 = m.final_error(32);
    const double e64 = m.final_error(64);
    CHECK(e64 < 0.01);
    CHECK(e16 / e32 > 3.2);
    CHECK(e16 / e32 < 4.8);
    CHECK(e32 / e64 > 3.2);
    CHECK(e32 / e64 < 4.8);
}

TEST_CASE("computed history satisfies the discrete equations to sweep tolerance") {
    const Manufactured m;
    const int n = 24;
    const double h = 1.0 / n;
    const Grid g = make_grid(n, n, h, 0.25 * h, n + 1);
    const LinearIBVP p = m.problem(g);
    const SolveResult r = solve(p, g);
    // far below the O(h^2) truncation scale, which is ~1e-1 here
    CHECK(scheme_residual(p, g, r.u) < 1e-7);
}

TEST_CASE("homogenized problem superposes back to the original solution") {
    const int n = 32;
    const double h = 1.0 / n;
    const Grid g = make_grid(n, n, h, 0.25 * h, n + 1);
    LinearIBVP p = base_problem(g);
    p.r01 = CoeffField::constant(0.1);
    p.r1 = CoeffField::constant(0.2);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            const double z1 = g.z1(i), z2 = g.z2(j);
            p.phi0.at(i, j) = bump((z1 - 0.5) / 0.25) * bump((z2 - 0.5) / 0.25);
            p.phi1.at(i, j) = 0.6 * bump((z1 - 0.45) / 0.2) * bump((z2 - 0.55) / 0.2);
        }

    const LinearIBVP q = homogenize(p, g);
    const SolveResult up = solve(p, g);
    const SolveResult uq = solve(q, g);
    double worst = 0.0;
    for (int lev = 0; lev < g.levels; ++lev)
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double lift = p.phi0.at(i, j) + g.t(lev) * p.phi1.at(i, j);
                worst = std::max(worst,
                                 std::fabs(up.u.lv[lev].at(i, j) - (uq.u.lv[lev].at(i, j) + lift)));
            }
    CHECK(worst < 1e-9);

    LinearIBVP bad = p;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) bad.phi0.at(i, j) = g.z2(j);
    CHECK_THROWS_AS(homogenize(bad, g), PreconditionViolated);
}

TEST_CASE("even extension evolves mirror-exactly and matches the quarter run") {
    const int n1 = 24, n2 = 24;
    const double h = 1.0 / 24.0;
    const Grid g = make_grid(n1, n2, h, h / 5.0, 41);
    LinearIBVP p = base_problem(g);

    Field2 c11(n1, n2), c12(n1, n2), c22(n1, n2), c01(n1, n2), c02(n1, n2), c1(n1, n2),
        c2(n1, n2);
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            const double z1 = g.z1(i), z2 = g.z2(j);
            c11.at(i, j) = -1.0 - 0.1 * std::cos(1.3 * z1) * std::cos(0.9 * z2);
            c22.at(i, j) = -0.9 - 0.05 * std::cos(0.7 * z2);
            c12.at(i, j) = 0.1 * std::sin(0.8 * z2) * std::cos(z1);
            c01.at(i, j) = 0.06 * std::cos(0.5 * z2) * std::cos(0.4 * z1);
            c02.at(i, j) = 0.07 * std::sin(0.9 * z2);
            c1.at(i, j) = 0.08 * std::cos(z2);
            c2.at(i, j) = 0.1 * std::sin(0.5 * z2);
            p.phi0.at(i, j) = bump((z1 - 0.5) / 0.25) * bump((z2 - 0.3) / 0.25);
        }
    p.r11 = CoeffField::of(c11);
    p.r22 = CoeffField::of(c22);
    p.r12 = CoeffField::of(c12);
    p.r01 = CoeffField::of(c01);
    p.r02 = CoeffField::of(c02);
    p.r1 = CoeffField::of(c1);
    p.r2 = CoeffField::of(c2);
    for (int j = 0; j <= n2; ++j) {
        p.b1[j] = -1.0 - 0.1 * std::cos(g.z2(j));
        p.b2[j] = 0.15 * std::sin(g.z2(j));
    }

    const auto [pe, ge] = extend_problem(p, g);
    const SolveResult uq = solve(p, g);
    const SolveResult ue = solve(pe, ge);
    const int axis = ge.axis_j();

    for (int lev : {1, g.levels / 2, g.levels - 1}) {
        const Field2& s = ue.u.lv[lev];
        CHECK(parity_residual(s, axis, Parity::Even) == 0.0);
        bool match = true;
        for (int i = 0; i <= n1 && match; ++i)
            for (int k = 0; k <= n2 && match; ++k)
                match = (s.at(i, axis + k) == uq.u.lv[lev].at(i, k));
        CHECK(match);
    }
}

TEST_CASE("disturbances stay inside the characteristic cone") {
    const int n1 = 40, n2 = 80;
    const double h = 1.0 / 40.0;
    const Grid g = make_grid(n1, n2, h, 0.25 * h, 41, -1.0);  // T = 0.25
    LinearIBVP p = base_problem(g);
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            const double d = std::hypot(g.z1(i) - 0.5, g.z2(j));
            p.phi0.at(i, j) = bump(d / 0.2);
        }
    const FinalResult r = solve_final(p, g);
    const double ct = g.t_final();  // unit wave speed
    double beyond_small = 0.0, beyond_far = 0.0;
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            const double d = std::hypot(g.z1(i) - 0.5, g.z2(j));
            if (d > 0.2 + ct + 0.2) beyond_small = std::max(beyond_small, std::fabs(r.u.at(i, j)));
            if (d > 0.2 + ct + 0.35) beyond_far = std::max(beyond_far, std::fabs(r.u.at(i, j)));
        }
    CHECK(beyond_small < 1e-6);
    CHECK(beyond_far < 1e-10);
}

TEST_CASE("discrete wave energy drifts below one percent") {
    const int n = 48;
    const double h = 1.0 / n;
    const Grid g = make_grid(n, n, h, 0.25 * h, 2 * n + 1);
    LinearIBVP p = base_problem(g);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            p.phi0.at(i, j) = std::cos(M_PI * g.z1(i)) * std::cos(M_PI * g.z2(j));
    const SolveResult r = solve(p, g);

    auto energy = [&](int lev) {
        const Field2 &a = r.u.lv[lev], &b = r.u.lv[lev + 1];
        double kin = 0.0, pot = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double v = (b.at(i, j) - a.at(i, j)) / g.dt;
                kin += trap_w(i, n) * trap_w(j, n) * v * v;
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= n; ++j)
                pot += trap_w(j, n) * (b.at(i + 1, j) - b.at(i, j)) * (a.at(i + 1, j) - a.at(i, j)) /
                       (h * h);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j < n; ++j)
                pot += trap_w(i, n) * (b.at(i, j + 1) - b.at(i, j)) * (a.at(i, j + 1) - a.at(i, j)) /
                       (h * h);
        return (kin + pot) * h * h;
    };
    const double e0 = energy(0);
    double drift = 0.0;
    for (int lev = 0; lev + 1 < g.levels; ++lev)
        drift = std::max(drift, std::fabs(energy(lev) - e0) / e0);
    CHECK(drift < 0.01);
}

TEST_CASE("odd coefficients with a nonzero constant cannot be extended") {
    const Grid g = make_grid(8, 8, 0.1, 0.02, 5);
    LinearIBVP p = base_problem(g);
    p.r12 = CoeffField::constant(0.15);
    CHECK_THROWS_AS(extend_problem(p, g), ConfigError);
}

TEST_CASE("anti-damped growth trips the instability guard") {
    const int n = 16;
    const double h = 1.0 / n;
    const Grid g = make_grid(n, n, h, 0.25 * h, 150);
    LinearIBVP p = base_problem(g);
    p.r0 = CoeffField::constant(-40.0);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            p.phi0.at(i, j) = bump((g.z1(i) - 0.5) / 0.3) * bump((g.z2(j) - 0.5) / 0.3);
    CHECK_THROWS_AS(solve(p, g), InstabilityDetected);
}
