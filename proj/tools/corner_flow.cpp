// Scenario-driven entry point: loads a JSON run description, executes one of
// the check / solve / study modes, and writes deterministic JSON, CSV, and
// raw-field artifacts into the output directory.
//
// Exit codes: 0 ok, 2 bad config, 3 nonconvergence, 4 instability (CFL or
// blow-up), 5 vacuum, 1 anything else.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cornerflow/nonlinear.hpp"
#include "cornerflow/scenario.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cornerflow;

namespace {

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string config_hash(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64 over the raw bytes
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char b[32];
    std::snprintf(b, sizeof b, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return b;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// config parsing: strict keys, every complaint names the offending field

void expect_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known) throw ConfigError(where + "." + it.key() + ": unknown key");
    }
}

template <class T>
T get_or(const json& sec, const char* key, T def, const std::string& where) {
    if (!sec.contains(key)) return def;
    try {
        return sec[key].get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

RunMode mode_from_string(const std::string& s) {
    if (s == "check-identities") return RunMode::CheckIdentities;
    if (s == "linear") return RunMode::Linear;
    if (s == "nonlinear") return RunMode::Nonlinear;
    if (s == "convergence-study") return RunMode::ConvergenceStudy;
    throw ConfigError("run.mode: unknown mode '" + s + "'");
}

const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::CheckIdentities: return "check-identities";
        case RunMode::Linear: return "linear";
        case RunMode::Nonlinear: return "nonlinear";
        case RunMode::ConvergenceStudy: return "convergence-study";
    }
    return "?";
}

WallProfile wall_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    expect_keys(j, {"epsilon", "poly_coeffs", "cutoff_radius"}, where);
    const double eps = get_or<double>(j, "epsilon", 0.0, where);
    const auto poly = get_or<std::vector<double>>(j, "poly_coeffs", {}, where);
    const double cutoff = get_or<double>(j, "cutoff_radius", 1.0, where);
    return WallProfile(eps, poly, cutoff);
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    expect_keys(j, {"walls", "gas", "initial_data", "grid", "run"}, "config");
    Scenario sc;
    if (j.contains("walls")) {
        const json& w = j["walls"];
        if (!w.is_array() || w.size() != 2)
            throw ConfigError("walls: need exactly two profiles [wall1, wall2]");
        sc.wall1 = wall_from_json(w[0], "walls[0]");
        sc.wall2 = wall_from_json(w[1], "walls[1]");
    }
    if (j.contains("gas")) {
        expect_keys(j["gas"], {"gamma", "b0"}, "gas");
        sc.gas.gamma = get_or<double>(j["gas"], "gamma", sc.gas.gamma, "gas");
        sc.gas.b0 = get_or<double>(j["gas"], "b0", sc.gas.b0, "gas");
    }
    if (j.contains("initial_data")) {
        const json& arr = j["initial_data"];
        if (!arr.is_array()) throw ConfigError("initial_data must be an array of bumps");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string where = "initial_data[" + std::to_string(k) + "]";
            const json& b = arr[k];
            if (!b.is_object()) throw ConfigError(where + " must be an object");
            expect_keys(b, {"center", "radius", "amplitude", "symmetrize", "velocity"}, where);
            BumpSpec bs;
            const auto center = get_or<std::vector<double>>(b, "center", {}, where);
            if (center.size() != 2) throw ConfigError(where + ".center: need [c1, c2]");
            bs.c1 = center[0];
            bs.c2 = center[1];
            bs.radius = get_or<double>(b, "radius", 0.0, where);
            bs.amplitude = get_or<double>(b, "amplitude", 0.0, where);
            bs.symmetrize = get_or<bool>(b, "symmetrize", false, where);
            bs.velocity = get_or<bool>(b, "velocity", false, where);
            sc.bumps.push_back(bs);
        }
    }
    if (j.contains("grid")) {
        const json& gr = j["grid"];
        expect_keys(gr, {"n", "extent", "cfl", "t_final", "eta"}, "grid");
        sc.grid.n = get_or<int>(gr, "n", sc.grid.n, "grid");
        sc.grid.extent = get_or<double>(gr, "extent", sc.grid.extent, "grid");
        sc.grid.cfl = get_or<double>(gr, "cfl", sc.grid.cfl, "grid");
        sc.grid.t_final = get_or<double>(gr, "t_final", sc.grid.t_final, "grid");
        sc.grid.etas = get_or<std::vector<double>>(gr, "eta", sc.grid.etas, "grid");
    }
    if (j.contains("run")) {
        const json& r = j["run"];
        expect_keys(r, {"mode", "m_max", "tol_h1", "seed"}, "run");
        sc.mode = mode_from_string(get_or<std::string>(r, "mode", mode_name(sc.mode), "run"));
        sc.m_max = get_or<int>(r, "m_max", sc.m_max, "run");
        sc.tol_h1 = get_or<double>(r, "tol_h1", sc.tol_h1, "run");
        sc.seed = get_or<unsigned long long>(r, "seed", sc.seed, "run");
    }
    return sc;
}

// ---------------------------------------------------------------------------
// artifact emitters: fixed formats and traversal orders, byte-stable per build

json meta_json(const std::string& hash, const Grid& g) {
    json m;
    m["config_hash"] = hash;
    m["grid"] = {{"n1", g.n1},         {"n2", g.n2},           {"h", g.h},  {"dt", g.dt},
                 {"levels", g.levels}, {"extent", g.extent1()}, {"eta", g.eta}};
    return m;
}

void write_json_file(const fs::path& p, const json& j) {
    std::ofstream f(p);
    f << j.dump(2) << '\n';
}

void csv_meta(std::ofstream& f, const json& meta) {
    const json& gr = meta["grid"];
    f << "# config_hash " << meta["config_hash"].get<std::string>() << '\n';
    f << "# grid n1=" << gr["n1"].get<int>() << " n2=" << gr["n2"].get<int>() << " h="
      << num(gr["h"].get<double>()) << " dt=" << num(gr["dt"].get<double>())
      << " levels=" << gr["levels"].get<int>() << " extent=" << num(gr["extent"].get<double>())
      << " eta=" << num(gr["eta"].get<double>()) << '\n';
}

// raw little-endian f64 grid, level-major then row-major, plus a JSON sidecar
void dump_field3(const fs::path& out, const std::string& stem, const Field3& u, const Grid& g,
                 const json& meta) {
    std::ofstream f(out / (stem + ".f64"), std::ios::binary);
    for (const Field2& s : u.lv)
        for (int i = 0; i <= g.n1; ++i)
            for (int j = 0; j <= g.n2; ++j) {
                const double v = s.at(i, j);
                f.write(reinterpret_cast<const char*>(&v), sizeof v);
            }
    json side;
    side["h"] = g.h;
    side["dt"] = g.dt;
    side["Z"] = g.extent1();
    side["T"] = g.t_final();
    side["shape"] = {g.levels, g.n1 + 1, g.n2 + 1};
    side["eta"] = g.eta;
    side["config"] = meta;
    write_json_file(out / (stem + ".json"), side);
}

// ---------------------------------------------------------------------------
// mode runners

int run_check_identities(const Scenario& sc, const Grid& g, const fs::path& out,
                         const json& meta) {
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> C(-1.0, 1.0), R(0.5, 0.9), E(1e-4, 1e-3);

    json trials = json::array();
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        auto draw = [&]() {
            const double eps = E(rng);
            const std::vector<double> c{C(rng), C(rng), C(rng)};
            const double cut = R(rng);
            return std::make_pair(
                WallProfile(eps, c, cut),
                json{{"epsilon", eps}, {"poly_coeffs", c}, {"cutoff_radius", cut}});
        };
        auto [w1, j1] = draw();
        auto [w2, j2] = draw();
        const CornerDomain dom{w1, w2};
        const SlipCandidate cand(dom);
        const BoundaryIdentityReport rep = check_boundary_identities(dom, sc.gas, cand, 1.0, 9, 0.02);
        worst = std::max(worst, rep.max_residual());
        trials.push_back({{"wall1", j1},
                          {"wall2", j2},
                          {"slip_residual", rep.slip_residual},
                          {"wall2_a02", rep.wall2_a02},
                          {"wall2_a12", rep.wall2_a12},
                          {"wall1_conormal", rep.wall1_conormal},
                          {"wall1_a01", rep.wall1_a01},
                          {"corner_b2", {rep.corner_b2[0], rep.corner_b2[1], rep.corner_b2[2]}},
                          {"max_residual", rep.max_residual()}});
    }

    // extension/mollification identities on the scenario's own walls, with
    // coefficient ratio fields taken along a slip-compliant candidate state
    const CornerDomain dom = scenario_domain(sc);
    const SlipCandidate cand(dom);
    const double hd = 1e-3;
    auto grad_z = [&](double z1, double z2) -> Vec3 {
        const bool os1 = z1 < 2.0 * hd, os2 = z2 < 2.0 * hd;
        return {stencil::d1_order4([&](double o) { return cand(o * hd, z1, z2); }, hd, false),
                stencil::d1_order4([&](double o) { return cand(0.0, z1 + o * hd, z2); }, hd, os1),
                stencil::d1_order4([&](double o) { return cand(0.0, z1, z2 + o * hd); }, hd, os2)};
    };
    const int n1 = 12, n2 = 16;
    const double h = 1.0 / 16.0;
    Field2 r01(n1, n2), r02(n1, n2), r12(n1, n2), r22(n1, n2);
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            const double z1 = i * h, z2 = j * h;
            const AlphaSet al = alpha_coeffs(sc.gas, frame_at(dom, {z1, z2}), grad_z(z1, z2));
            const double r11 = al.second.m[1][1];
            r01.at(i, j) = al.second.m[0][1] / r11;
            r02.at(i, j) = al.second.m[0][2] / r11;
            r12.at(i, j) = al.second.m[1][2] / r11;
            r22.at(i, j) = al.second.m[2][2] / r11;
        }
    std::vector<RatioField> fields;
    fields.push_back({"r01", r01, Parity::Even, 0.0});
    fields.push_back({"r02", r02, Parity::Odd, 0.0});
    fields.push_back({"r12", r12, Parity::Odd, 0.0});
    fields.push_back({"r22", r22, Parity::Even, 1.0});
    const int nb = 3200;
    const double hb = 0.4 / nb;
    std::vector<double> b_fine(nb + 1), b_coarse(n2 + 1);
    for (int k = 0; k <= nb; ++k) {
        const BoundaryCoeffs bc = boundary_coeffs(dom, k * hb);
        b_fine[k] = bc.b2 / bc.b1;
    }
    for (int j = 0; j <= n2; ++j) {
        const BoundaryCoeffs bc = boundary_coeffs(dom, j * h);
        b_coarse[j] = bc.b2 / bc.b1;
    }
    // envelope sized for the candidate amplitude and the wall size
    const double delta = 50.0 * std::max({sc.wall1.epsilon(), sc.wall2.epsilon(), 1e-3});
    const ExtensionIdentityReport er =
        check_extension_identities(fields, h, 4.0 * h, b_fine, hb, 1e-3, b_coarse, delta);

    json rep;
    rep["config"] = meta;
    rep["mode"] = "check-identities";
    rep["boundary"] = {{"trials", trials}, {"worst", worst}};
    rep["extension"] = {{"parity_worst", er.parity_worst},
                        {"sup_inflation", er.sup_inflation},
                        {"envelope_excess", er.envelope_excess},
                        {"constant_drift", er.constant_drift},
                        {"corner_value", er.corner_value},
                        {"corner_slope", er.corner_slope},
                        {"conormal_residual", er.conormal_residual}};
    write_json_file(out / "report.json", rep);
    return 0;
}

int run_linear(const Scenario& sc, const Grid& g, const fs::path& out, const json& meta) {
    const CornerDomain dom = scenario_domain(sc);
    const auto data = scenario_data(sc, g);
    const auto jet = build_jet(dom, sc.gas, g, data.first, data.second, 3);
    const LinearIBVP p = assemble_frozen(dom, sc.gas, g, jet, Field3(g));
    const AssumptionReport ar = validate_assumptions(p, g);
    const SolveResult sr = solve(p, g);
    dump_field3(out, "field", sr.u, g, meta);

    const int s = std::min(4, std::min({g.n1 + 1, g.n2 + 1, g.levels}) - 4);
    if (s >= 0) {
        std::ofstream f(out / "energy.csv");
        csv_meta(f, meta);
        f << "eta,order,lhs,rhs,chat\n";
        for (double eta : sc.grid.etas) {
            const EnergyReport er = weighted_energy(p, sr.u, g, eta, s);
            for (int k = 0; k <= s; ++k)
                f << num(eta) << ',' << k << ',' << num(er.lhs[k]) << ',' << num(er.rhs[k]) << ','
                  << num(er.chat[k]) << '\n';
        }
    }

    json rep;
    rep["config"] = meta;
    rep["mode"] = "linear";
    rep["assumptions"] = {{"cmax", ar.cmax},
                          {"min_m1", ar.min_m1},
                          {"min_det", ar.min_det},
                          {"max_coupling", ar.max_coupling},
                          {"cfl", ar.cfl}};
    rep["sweeps_max"] = sr.stats.sweeps_max;
    rep["final_amplitude"] = sr.stats.amp.back();
    rep["energy_order"] = s >= 0 ? json(s) : json(nullptr);
    write_json_file(out / "report.json", rep);
    return 0;
}

int run_nonlinear(const Scenario& sc, const Grid& g, const fs::path& out, const json& meta) {
    const CornerDomain dom = scenario_domain(sc);
    const auto data = scenario_data(sc, g);
    const auto jet = build_jet(dom, sc.gas, g, data.first, data.second, 3);

    std::vector<double> b1(g.n2 + 1), b2(g.n2 + 1);
    for (int j = 0; j <= g.n2; ++j) {
        const BoundaryCoeffs bc = boundary_coeffs(dom, g.z2(j));
        b1[j] = bc.b1;
        b2[j] = bc.b2;
    }
    const CompatReport cr = check_compatibility(jet, g, b1, b2, 2);
    {
        json cj;
        cj["config"] = meta;
        cj["order"] = cr.order;
        json w1 = json::array(), w2 = json::array();
        for (int k = 0; k < 3; ++k) {
            w1.push_back({cr.wall1[k][0], cr.wall1[k][1], cr.wall1[k][2]});
            w2.push_back({cr.wall2[k][0], cr.wall2[k][1], cr.wall2[k][2]});
        }
        cj["wall1"] = w1;
        cj["wall2"] = w2;
        cj["worst"] = cr.worst;
        write_json_file(out / "compat.json", cj);
    }

    const NonlinearResult r = iterate(dom, sc.gas, g, data.first, data.second, sc.m_max, sc.tol_h1);

    {
        std::ofstream f(out / "trace.csv");
        csv_meta(f, meta);
        f << "m,high_norm,v_h1,ratio\n";
        for (std::size_t m = 0; m < r.trace.rows.size(); ++m)
            f << (m + 1) << ',' << num(r.trace.rows[m].high_norm) << ','
              << num(r.trace.rows[m].v_h1) << ',' << num(r.trace.rows[m].ratio) << '\n';
    }
    dump_field3(out, "phi_hat", r.phi_hat, g, meta);

    json rep;
    rep["config"] = meta;
    rep["mode"] = "nonlinear";
    rep["converged"] = r.trace.converged;
    rep["iterations"] = r.trace.iterations();
    rep["final_v_h1"] = r.trace.rows.back().v_h1;
    rep["sigma"] = r.trace.rows.size() >= 3 ? json(contraction_ratio(r.trace)) : json(nullptr);
    rep["nonlinear_residual"] =
        g.levels >= 5 ? json(nonlinear_residual(dom, sc.gas, g, r.phi_hat)) : json(nullptr);
    rep["corner_gradient_max"] = corner_gradient_max(r.phi_hat, g);
    rep["weighted_h4"] = std::min({g.n1 + 1, g.n2 + 1, g.levels}) >= 5
                             ? json(weighted_hs_norm(r.phi_hat, g, g.eta, 4))
                             : json(nullptr);
    rep["compatibility_worst"] = cr.worst;
    write_json_file(out / "report.json", rep);
    return r.trace.converged ? 0 : 3;
}

int run_convergence(const Scenario& sc, const Grid& g0, const fs::path& out, int refine,
                    const json& meta) {
    // background standing wave on the flat quarter plane: the one case with a
    // closed-form solution, so the error and its decay order are exact
    const double Z = sc.grid.extent, c2 = sc.gas.c0sq();
    const double k = M_PI / Z;
    const double om = std::sqrt(2.0 * c2) * k;
    const int steps0 = g0.levels - 1;  // halving dt doubles steps: same final time

    std::ofstream f(out / "convergence.csv");
    csv_meta(f, meta);
    f << "n,h,dt,levels,error,order\n";
    json rows = json::array();
    double prev = 0.0, last_order = 0.0;
    for (int l = 0; l < refine; ++l) {
        const int n = sc.grid.n << l;
        Grid g;
        g.n1 = g.n2 = n;
        g.h = Z / n;
        g.dt = sc.grid.cfl * g.h;
        g.levels = (steps0 << l) + 1;
        g.eta = g0.eta;
        LinearIBVP p;
        p.r11 = CoeffField::constant(-c2);
        p.r22 = CoeffField::constant(-c2);
        p.phi0 = sample_field(g, [&](double z1, double z2) {
            return std::cos(k * z1) * std::cos(k * z2);
        });
        p.phi1 = Field2(n, n);
        p.b1.assign(n + 1, -1.0);
        p.b2.assign(n + 1, 0.0);
        const FinalResult fr = solve_final(p, g);
        const double T = g.t_final();
        double err = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                err = std::max(err, std::fabs(fr.u.at(i, j) - std::cos(om * T) *
                                                                  std::cos(k * g.z1(i)) *
                                                                  std::cos(k * g.z2(j))));
        json row = {{"n", n}, {"h", g.h}, {"dt", g.dt}, {"levels", g.levels}, {"error", err}};
        f << n << ',' << num(g.h) << ',' << num(g.dt) << ',' << g.levels << ',' << num(err) << ',';
        if (l > 0) {
            last_order = std::log2(prev / err);
            row["order"] = last_order;
            f << num(last_order);
        } else {
            row["order"] = nullptr;
        }
        f << '\n';
        rows.push_back(row);
        prev = err;
    }
    json rep;
    rep["config"] = meta;
    rep["mode"] = "convergence-study";
    rep["rows"] = rows;
    rep["observed_order"] = refine > 1 ? json(last_order) : json(nullptr);
    write_json_file(out / "report.json", rep);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corner-flow: potential flow near a straightened right-angle corner"};
    app.require_subcommand(1);
    auto* run = app.add_subcommand("run", "execute a scenario file");
    std::string config_path, out_dir = "out", mode_override;
    std::vector<double> eta_override;
    int refine = 3;
    unsigned long long seed_override = 0;
    run->add_option("config", config_path, "scenario JSON file")->required();
    run->add_option("--mode", mode_override,
                    "check-identities | linear | nonlinear | convergence-study");
    run->add_option("--out", out_dir, "artifact directory (created if absent)");
    run->add_option("--eta", eta_override, "override the weight list")->delimiter(',');
    run->add_option("--refine", refine, "refinement levels for the convergence study")
        ->check(CLI::Range(1, 6));
    auto* seed_opt = run->add_option("--seed", seed_override, "identity-check sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const std::string text = read_file(config_path);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse: ") + e.what());
        }
        Scenario sc = scenario_from_json(j);
        if (!mode_override.empty()) sc.mode = mode_from_string(mode_override);
        if (!eta_override.empty()) sc.grid.etas = eta_override;
        if (seed_opt->count() > 0) sc.seed = seed_override;
        validate_scenario(sc);

        const Grid g = scenario_grid(sc.grid);
        const fs::path out(out_dir);
        fs::create_directories(out);
        const json meta = meta_json(config_hash(text), g);

        switch (sc.mode) {
            case RunMode::CheckIdentities: return run_check_identities(sc, g, out, meta);
            case RunMode::Linear: return run_linear(sc, g, out, meta);
            case RunMode::Nonlinear: return run_nonlinear(sc, g, out, meta);
            case RunMode::ConvergenceStudy: return run_convergence(sc, g, out, refine, meta);
        }
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "corner-flow: config: %s\n", e.what());
        return 2;
    } catch (const NonConvergence& e) {
        std::fprintf(stderr, "corner-flow: nonconvergence: %s\n", e.what());
        return 3;
    } catch (const CFLViolation& e) {
        std::fprintf(stderr, "corner-flow: instability: %s\n", e.what());
        return 4;
    } catch (const InstabilityDetected& e) {
        std::fprintf(stderr, "corner-flow: instability: %s\n", e.what());
        return 4;
    } catch (const VacuumReached& e) {
        std::fprintf(stderr, "corner-flow: vacuum: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "corner-flow: %s\n", e.what());
        return 1;
    }
}
