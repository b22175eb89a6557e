#pragma once

// Scenario: the run description the command-line driver consumes.  Plain
// data plus the assembly helpers that turn it into run inputs; parsing and
// artifact serialization stay with the driver.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/compatibility.hpp"

namespace cornerflow {

// One compactly supported C^6 bump.  Symmetrized bumps are reflected evenly
// across both walls so every odd-order wall trace cancels; plain bumps must
// keep their support inside the open quadrant.
struct BumpSpec {
    double c1 = 0.0, c2 = 0.0;
    double radius = 0.0;
    double amplitude = 0.0;
    bool symmetrize = false;
    bool velocity = false;  // contributes to the initial rate, not the position
};

struct GridSpec {
    int n = 32;            // intervals per axis (n + 1 nodes)
    double extent = 1.28;  // box side in straightened coordinates
    double cfl = 0.35;     // dt = cfl * h
    double t_final = 0.16;
    std::vector<double> etas{4.0, 8.0, 16.0};  // weights for energy reports
};

enum class RunMode { CheckIdentities, Linear, Nonlinear, ConvergenceStudy };

struct Scenario {
    WallProfile wall1, wall2;
    GasState gas{1.4, 2.0};
    std::vector<BumpSpec> bumps;
    GridSpec grid;
    RunMode mode = RunMode::Nonlinear;
    int m_max = 8;
    double tol_h1 = 1e-10;
    unsigned long long seed = 1;  // identity-check point sampling
};

// Envelope inside which the iteration diagnostics are calibrated; scenarios
// outside it are rejected up front rather than run into vacuum or divergence.
constexpr double kMaxAmplitude = 0.05;
constexpr double kMaxWallEpsilon = 5e-3;

inline Grid scenario_grid(const GridSpec& gs) {
    if (gs.n < 8) throw ConfigError("grid.n: need at least 8 intervals per axis");
    if (!(gs.extent > 0.0)) throw ConfigError("grid.extent must be positive");
    if (!(gs.cfl > 0.0) || gs.cfl >= 1.0) throw ConfigError("grid.cfl must lie in (0, 1)");
    if (!(gs.t_final > 0.0)) throw ConfigError("grid.t_final must be positive");
    if (gs.etas.empty()) throw ConfigError("grid.eta: need at least one weight");
    for (double e : gs.etas)
        if (!(e > 0.0)) throw ConfigError("grid.eta: weights must be positive");
    Grid g;
    g.n1 = g.n2 = gs.n;
    g.h = gs.extent / gs.n;
    g.dt = gs.cfl * g.h;
    g.levels = static_cast<int>(std::lround(gs.t_final / g.dt)) + 1;
    if (g.levels < 3) throw ConfigError("grid.t_final: too short for three time levels");
    g.eta = gs.etas.front();
    return g;
}

inline CornerDomain scenario_domain(const Scenario& sc) { return {sc.wall1, sc.wall2}; }

inline void validate_scenario(const Scenario& sc) {
    if (!(sc.gas.gamma > 1.0)) throw ConfigError("gas.gamma must exceed 1");
    if (!(sc.gas.b0 > 0.0)) throw ConfigError("gas.b0 must be positive");
    if (std::max(sc.wall1.epsilon(), sc.wall2.epsilon()) > kMaxWallEpsilon)
        throw ConfigError("walls.epsilon exceeds the calibrated envelope");
    if (sc.m_max < 1) throw ConfigError("run.m_max must be at least 1");
    if (sc.tol_h1 < 0.0) throw ConfigError("run.tol_h1 must be nonnegative");
    const double Z = sc.grid.extent;
    for (std::size_t k = 0; k < sc.bumps.size(); ++k) {
        const BumpSpec& b = sc.bumps[k];
        const std::string at = "initial_data[" + std::to_string(k) + "]";
        if (!(b.radius > 0.0)) throw ConfigError(at + ": radius must be positive");
        if (std::fabs(b.amplitude) > kMaxAmplitude)
            throw ConfigError(at + ": amplitude exceeds the calibrated envelope");
        if (std::fabs(b.c1) + b.radius > Z || std::fabs(b.c2) + b.radius > Z)
            throw ConfigError(at + ": support leaves the box");
        if (!b.symmetrize && (b.c1 - b.radius < 0.0 || b.c2 - b.radius < 0.0))
            throw ConfigError(at + ": support crosses a wall; symmetrize it instead");
    }
    (void)scenario_grid(sc.grid);
}

// Sums the bump list into the initial pair (position, rate).
inline std::pair<Field2, Field2> scenario_data(const Scenario& sc, const Grid& g) {
    Field2 phi0(g.n1, g.n2), phi1(g.n1, g.n2);
    for (const BumpSpec& b : sc.bumps) {
        auto raw = [&](double z1, double z2) {
            return b.amplitude * detail::bump_c6(std::hypot(z1 - b.c1, z2 - b.c2) / b.radius);
        };
        const Field2 f = b.symmetrize ? data_symmetrized(g, raw) : sample_field(g, raw);
        Field2& dst = b.velocity ? phi1 : phi0;
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) dst.at(i, j) += f.at(i, j);
    }
    return {phi0, phi1};
}

}  // namespace cornerflow
