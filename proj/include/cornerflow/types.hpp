#pragma once

#include <array>
#include <cmath>

namespace cornerflow {

// Index convention throughout: 0 = time (z0), 1 = z1, 2 = z2.

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

// Symmetric 3x3 coefficient matrix stored densely; fill both triangles.
struct Sym3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    void set_sym(int i, int j, double v) {
        m[i][j] = v;
        m[j][i] = v;
    }

    static Sym3 diag(double d0, double d1, double d2) {
        Sym3 s;
        s.m[0][0] = d0;
        s.m[1][1] = d1;
        s.m[2][2] = d2;
        return s;
    }
};

// Congruence transform A~ = J^T A J for a full 3x3 Jacobian J (J[k][i] = dy_k/dx_i).
inline Sym3 congruence(const double J[3][3], const Sym3& a) {
    Sym3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) s += J[k][i] * a.m[k][l] * J[l][j];
            out.m[i][j] = s;
        }
    return out;
}

inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double quad_form(const Sym3& a, const Vec3& x) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a.m[i][j] * x[i] * x[j];
    return s;
}

inline double sup_abs(const Sym3& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s = std::max(s, std::fabs(a.m[i][j]));
    return s;
}

}  // namespace cornerflow
