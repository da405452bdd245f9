#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "amink/content.hpp"
#include "amink/convex.hpp"
#include "amink/errors.hpp"
#include "amink/quadrature.hpp"
#include "amink/rectifiable.hpp"
#include "amink/rng.hpp"
#include "amink/scene.hpp"

namespace amink {

struct Claim {
    std::string desc;
    double expected = 0.0;
    double observed = 0.0;
    double tol = 0.0;
    bool pass = false;
};

inline Claim make_claim(std::string desc, double expected, double observed,
                        double tol) {
    Claim c{std::move(desc), expected, observed, tol, false};
    c.pass = std::isfinite(observed) && std::abs(observed - expected) <= tol;
    return c;
}

inline Claim make_flag_claim(std::string desc, bool satisfied) {
    return Claim{std::move(desc), 1.0, satisfied ? 1.0 : 0.0, 0.0, satisfied};
}

struct ScenarioReport {
    std::string name;
    std::vector<Claim> claims;
    std::vector<std::string> artifacts;
    double runtime_seconds = 0.0;

    bool all_pass() const {
        for (const auto& c : claims)
            if (!c.pass) return false;
        return true;
    }
};

struct ScenarioOptions {
    std::map<std::string, double> overrides;  // h, h_over_r, seed, order, ...
    std::string out_dir;
    int threads = 0;
};

inline Json report_json(const ScenarioReport& r) {
    Json j;
    j["name"] = r.name;
    j["claims"] = Json::array();
    for (const auto& c : r.claims) {
        Json cj;
        cj["desc"] = c.desc;
        cj["expected"] = json_real(c.expected);
        cj["observed"] = json_real(c.observed);
        cj["tol"] = c.tol;
        cj["pass"] = c.pass;
        j["claims"].push_back(cj);
    }
    j["artifacts"] = r.artifacts;
    j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

inline std::vector<std::string> scenario_catalog() {
    return {"federer_circle", "convex_k_body",   "square_gauge_circle",
            "hc_identity",    "mixed_volume_rep", "continuity_bound",
            "e1_flat",        "e1_fattened",      "slicing_circle",
            "vanishing_codim", "c_dependence",    "afp_segment"};
}

namespace detail {

inline double ov(const ScenarioOptions& opt, const std::string& key, double dflt) {
    auto it = opt.overrides.find(key);
    return it == opt.overrides.end() ? dflt : it->second;
}

inline std::vector<double> dyadic_schedule(double r0, int count) {
    std::vector<double> s;
    for (int j = 0; j < count; ++j) s.push_back(r0 * std::pow(2.0, -j));
    return s;
}

inline ConvexBody square_body(double half = 1.0) {
    Mat v(2, 4);
    v << half, half, -half, -half, half, -half, half, -half;
    return make_body(v, 2, false);
}

inline ConvexBody hexagon_body(double circumradius = 1.0) {
    Mat v(2, 6);
    for (int i = 0; i < 6; ++i) {
        double th = i * std::numbers::pi / 3.0;
        v(0, i) = circumradius * std::cos(th);
        v(1, i) = circumradius * std::sin(th);
    }
    return make_body(v, 2, false);
}

inline ConvexBody segment_body(const Vec& a, const Vec& b) {
    Mat v(a.size(), 2);
    v.col(0) = a;
    v.col(1) = b;
    return make_body(v, static_cast<int>(a.size()), false);
}

inline RectifiableSet unit_segment_set() {
    Vec a = Vec::Zero(2), b(2);
    b << 1, 0;
    return make_set({Patch::segment(a, b)});
}

inline std::string write_artifact(const ScenarioOptions& opt,
                                  const std::string& file,
                                  const std::string& payload) {
    if (opt.out_dir.empty()) return {};
    std::string path = opt.out_dir + "/" + file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write artifact: " + path);
    out << payload;
    return path;
}

inline void add_content_artifact(ScenarioReport& rep, const ScenarioOptions& opt,
                                 const std::string& file, const ContentEstimate& ce) {
    std::string path = write_artifact(opt, file, content_csv(ce));
    if (!path.empty()) rep.artifacts.push_back(path);
}

// Deterministic random polytope in [-1,1]^n, recentered.
inline ConvexBody random_body(int n, int points, uint64_t seed, uint64_t trial) {
    Mat pts(n, points);
    for (int i = 0; i < points; ++i)
        for (int a = 0; a < n; ++a)
            pts(a, i) =
                2.0 * counter_uniform(seed, trial * 1000 + i, static_cast<uint64_t>(a)) -
                1.0;
    return make_body(pts, n, true);
}

inline Vec random_unit(int n, uint64_t seed, uint64_t trial) {
    Vec v(n);
    for (int a = 0; a < n; ++a) {
        double u = counter_uniform(seed, trial, 100 + static_cast<uint64_t>(a));
        v(a) = inverse_normal_cdf(std::min(std::max(u, 1e-12), 1.0 - 1e-12));
    }
    double nn = v.norm();
    return nn > 1e-12 ? Vec(v / nn) : Vec(Vec::Unit(n, 0));
}

inline ScenarioReport scenario_federer_circle(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "federer_circle";
    auto s = unit_circle();
    auto ball = make_ball_polytope(2, 1.0, static_cast<int>(ov(opt, "facets", 256)));
    EstimatorParams ep;
    ep.h = ov(opt, "h", 1.0 / 512);
    ep.threads = opt.threads;
    auto sched = dyadic_schedule(0.1, 6);
    auto ce = content_estimate(s, ball, 1, sched, ep);
    double target = 2.0 * std::numbers::pi;
    rep.claims.push_back(make_claim("extrapolated content = 2*pi (2%)", target,
                                    ce.extrapolated, 0.02 * target));
    add_content_artifact(rep, opt, "federer_circle.csv", ce);
    return rep;
}

inline ScenarioReport scenario_convex_k_body(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "convex_k_body";
    auto s = unit_segment_set();
    auto c = square_body();
    EstimatorParams ep;
    ep.h_over_r = ov(opt, "h_over_r", 64.0);
    ep.threads = opt.threads;
    auto sched = dyadic_schedule(0.1, 5);
    auto ce = content_estimate(s, c, 1, sched, ep);
    for (size_t i = 0; i < sched.size(); ++i) {
        double law = 1.0 + 2.0 * sched[i];
        rep.claims.push_back(make_claim(
            "M(r=" + std::to_string(sched[i]) + ") = 1 + 2r (2%)", law,
            ce.values[i], 0.02 * law));
    }
    rep.claims.push_back(
        make_claim("extrapolated content = 1 (1%)", 1.0, ce.extrapolated, 0.01));
    add_content_artifact(rep, opt, "convex_k_body.csv", ce);
    return rep;
}

inline ScenarioReport scenario_square_gauge_circle(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "square_gauge_circle";
    auto s = unit_circle();
    auto c = square_body();
    int order = static_cast<int>(ov(opt, "order", 32));
    double phi = phi_functional(s, c, 1, order);
    rep.claims.push_back(make_claim("phi_functional = 8 (1e-6)", 8.0, phi, 1e-6));
    EstimatorParams ep;
    ep.h = ov(opt, "h", 1.0 / 512);
    ep.threads = opt.threads;
    auto ce = content_estimate(s, c, 1, dyadic_schedule(0.1, 6), ep);
    rep.claims.push_back(
        make_claim("extrapolated content = 8 (2%)", 8.0, ce.extrapolated, 0.16));
    add_content_artifact(rep, opt, "square_gauge_circle.csv", ce);
    return rep;
}

inline ScenarioReport scenario_hc_identity(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "hc_identity";
    uint64_t seed = static_cast<uint64_t>(ov(opt, "seed", 2026));
    int trials = static_cast<int>(ov(opt, "trials", 100));
    double max_err = 0.0;
    for (int t = 0; t < trials; ++t) {
        ConvexBody c = random_body(3, 12, seed, static_cast<uint64_t>(t));
        Vec nu = random_unit(3, seed, static_cast<uint64_t>(t));
        Mat row = nu.transpose();
        Subspace line = Subspace::from_rows(row, 3);
        double rho = radial(project_body(c, line), nu);
        double h = support(c, nu);
        max_err = std::max(max_err, std::abs(rho - h));
    }
    rep.claims.push_back(make_claim(
        "max |rho_{P(C)}(nu) - h_C(nu)| over 100 trials <= 1e-9", 0.0, max_err, 1e-9));
    return rep;
}

inline ScenarioReport scenario_mixed_volume_rep(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "mixed_volume_rep";
    Vec a(2), b(2);
    a << -1, 0;
    b << 1, 0;
    auto kbody = segment_body(a, b);
    auto c = square_body();
    auto mv = mixed_volumes(kbody, c);
    double lhs = binomial(2, 1) * mv[1] / unit_ball_volume(1);
    auto s = make_set({Patch::segment(a, b)});
    double rhs = phi_functional(s, c, 1, static_cast<int>(ov(opt, "order", 16)));
    rep.claims.push_back(make_claim(
        "binom(n,k) V(K[k],C[n-k]) / omega_{n-k} = phi_functional (1e-9)", rhs, lhs,
        1e-9));
    rep.claims.push_back(make_claim("V(K,K) = lambda^2(segment) = 0", 0.0, mv[2], 1e-12));
    rep.claims.push_back(make_claim("V(C,C) = lambda^2(square) = 4", 4.0, mv[0], 1e-9));
    return rep;
}

inline ScenarioReport scenario_continuity_bound(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "continuity_bound";
    auto s = unit_circle();
    int order = static_cast<int>(ov(opt, "order", 32));
    double hk = hausdorff_measure(s, order);
    uint64_t seed = static_cast<uint64_t>(ov(opt, "seed", 7));
    int pairs = static_cast<int>(ov(opt, "pairs", 50));
    int violations = 0;
    for (int t = 0; t < pairs; ++t) {
        ConvexBody c = random_body(2, 4 + t % 7, seed, 2 * static_cast<uint64_t>(t));
        ConvexBody k = random_body(2, 4 + (t + 3) % 7, seed, 2 * static_cast<uint64_t>(t) + 1);
        double dh = hausdorff_distance(c, k);
        double phic = phi_functional(s, c, 1, order);
        double phik = phi_functional(s, k, 1, order);
        // n - k = 1: the diameter sum enters only through the j = 0 term.
        double factor = 0.0;
        int codim = 1;
        for (int j = 0; j < codim; ++j)
            factor += binomial(codim, j) *
                      std::pow(c.diameter() + k.diameter(), j);
        double bound = dh * hk * factor;
        if (std::abs(phik - phic) > bound + 1e-9) ++violations;
    }
    rep.claims.push_back(
        make_claim("continuity bound violations over 50 random pairs", 0.0,
                   static_cast<double>(violations), 0.0));
    return rep;
}

inline ScenarioReport scenario_e1_flat(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "e1_flat";
    int m = static_cast<int>(ov(opt, "M", 64));
    auto s = e1_family(m);
    Vec a(2), b(2);
    a << -0.5, 0;
    b << 0.5, 0;
    auto c = segment_body(a, b);
    EstimatorParams ep;
    ep.h = ov(opt, "h", 1.0 / 256);
    ep.threads = opt.threads;
    auto sched = dyadic_schedule(0.1, 4);
    auto ce = content_estimate(s, c, 1, sched, ep);
    for (size_t i = 0; i < sched.size(); ++i)
        rep.claims.push_back(make_claim(
            "normalized content at r=" + std::to_string(sched[i]) + " is exactly 0",
            0.0, ce.values[i], 0.0));
    rep.claims.push_back(
        make_claim("extrapolated content is exactly 0", 0.0, ce.extrapolated, 0.0));
    add_content_artifact(rep, opt, "e1_flat.csv", ce);
    return rep;
}

inline ScenarioReport scenario_e1_fattened(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "e1_fattened";
    int m = static_cast<int>(ov(opt, "M", 64));
    // eps small enough that the 64 fattened tubes stay disjoint over the
    // whole schedule (2 eps r < min gap 1/(64*65)), where the schedule
    // values sit strictly above the partial-sum bound by 65*eps*r.
    double eps = ov(opt, "epsilon", 0.01);
    auto s = e1_family(m);
    Mat v(2, 4);
    v << 0.5, 0.5, -0.5, -0.5, eps, -eps, eps, -eps;
    auto c = make_body(v, 2, false);

    double harmonic = 0.0;
    for (int n = 1; n <= m; ++n) harmonic += 1.0 / n;
    double bound = 2.0 * harmonic * (2.0 * eps) / unit_ball_volume(1);

    EstimatorParams ep;
    ep.h_over_r = ov(opt, "h_over_r", 300.0);
    ep.threads = opt.threads;
    std::vector<double> sched{0.01, 0.009, 0.008, 0.007};
    auto ce = content_estimate(s, c, 1, sched, ep);
    bool ok = ce.divergence_flag || ce.lower_tail > bound;
    rep.claims.push_back(make_flag_claim(
        "lower tail exceeds the partial-sum bound (or divergence flagged)", ok));
    add_content_artifact(rep, opt, "e1_fattened.csv", ce);
    return rep;
}

inline ScenarioReport scenario_slicing_circle(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "slicing_circle";
    auto s = unit_circle();
    Vec a(2), b(2);
    a << 0, 1;
    b << 0, -1;
    auto c = segment_body(a, b);
    SlicingParams sp;
    sp.cells = static_cast<int>(ov(opt, "cells", 4096));
    double observed = slicing_content(s, c, sp);
    rep.claims.push_back(
        make_claim("slicing content circle + vertical segment = 4 (2%)", 4.0,
                   observed, 0.08));
    return rep;
}

inline ScenarioReport scenario_vanishing_codim(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "vanishing_codim";
    auto s = make_set({Patch::helix(1.0, 0.5, {0.0, 1.5 * std::numbers::pi})});
    Vec a(3), b(3);
    a << 0, 0, 0.5;
    b << 0, 0, -0.5;
    auto c = segment_body(a, b);
    double phi = phi_functional(s, c, 1, static_cast<int>(ov(opt, "order", 16)));
    rep.claims.push_back(
        make_claim("phi vanishes exactly for k + dim C < n", 0.0, phi, 0.0));
    EstimatorParams ep;
    ep.h_over_r = ov(opt, "h_over_r", 8.0);
    ep.threads = opt.threads;
    auto sched = dyadic_schedule(0.1, 4);
    auto ce = content_estimate(s, c, 1, sched, ep);
    for (size_t i = sched.size() - 3; i < sched.size(); ++i) {
        bool decays = 1.8 * ce.values[i] <= ce.values[i - 1] + 1e-12;
        rep.claims.push_back(make_flag_claim(
            "normalized content decays by >= 1.8x into r=" + std::to_string(sched[i]),
            decays));
    }
    add_content_artifact(rep, opt, "vanishing_codim.csv", ce);
    return rep;
}

inline ScenarioReport scenario_c_dependence(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "c_dependence";
    auto s = unit_circle();
    struct Entry {
        std::string label;
        ConvexBody body;
    };
    std::vector<Entry> bodies;
    bodies.push_back({"square", square_body()});
    bodies.push_back({"hexagon", hexagon_body()});
    bodies.push_back({"ball256", make_ball_polytope(2, 1.0, 256)});
    EstimatorParams ep;
    ep.h = ov(opt, "h", 1.0 / 512);
    ep.threads = opt.threads;
    int order = static_cast<int>(ov(opt, "order", 32));
    auto sched = dyadic_schedule(0.1, 6);
    for (auto& e : bodies) {
        auto ce = content_estimate(s, e.body, 1, sched, ep);
        double phi = phi_functional(s, e.body, 1, order);
        double gap = std::abs(ce.extrapolated - phi) / phi;
        rep.claims.push_back(make_claim(
            "relative gap |content - phi| / phi for " + e.label + " (<= 2%)", 0.0,
            gap, 0.02));
        add_content_artifact(rep, opt, "c_dependence_" + e.label + ".csv", ce);
    }
    return rep;
}

inline ScenarioReport scenario_afp_segment(const ScenarioOptions& opt) {
    ScenarioReport rep;
    rep.name = "afp_segment";
    auto s = unit_segment_set();
    AfpParams ap;
    ap.radii = {0.5, 0.25, 0.1};
    ap.cloud_eps = ov(opt, "eps", 1e-3);
    ap.max_centers = static_cast<int>(ov(opt, "centers", 512));
    auto report = afp_gamma(s, 1, ap);
    rep.claims.push_back(make_claim(
        "AFP gamma for the unit segment = 1 (endpoint witness, 5%)", 1.0,
        report.gamma, 0.05));
    bool witness_at_end = report.argmin_center.size() == 2 &&
                          (report.argmin_center.norm() < 0.02 ||
                           (report.argmin_center - Vec(unit_segment_set()
                                                           .patches[0]
                                                           .position(Vec::Ones(1))))
                                   .norm() < 0.02);
    rep.claims.push_back(
        make_flag_claim("minimizing witness lies at a segment endpoint", witness_at_end));
    return rep;
}

}  // namespace detail

inline ScenarioReport run_scenario(const std::string& name,
                                   const ScenarioOptions& opt = {}) {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioReport rep;
    if (name == "federer_circle") rep = detail::scenario_federer_circle(opt);
    else if (name == "convex_k_body") rep = detail::scenario_convex_k_body(opt);
    else if (name == "square_gauge_circle") rep = detail::scenario_square_gauge_circle(opt);
    else if (name == "hc_identity") rep = detail::scenario_hc_identity(opt);
    else if (name == "mixed_volume_rep") rep = detail::scenario_mixed_volume_rep(opt);
    else if (name == "continuity_bound") rep = detail::scenario_continuity_bound(opt);
    else if (name == "e1_flat") rep = detail::scenario_e1_flat(opt);
    else if (name == "e1_fattened") rep = detail::scenario_e1_fattened(opt);
    else if (name == "slicing_circle") rep = detail::scenario_slicing_circle(opt);
    else if (name == "vanishing_codim") rep = detail::scenario_vanishing_codim(opt);
    else if (name == "c_dependence") rep = detail::scenario_c_dependence(opt);
    else if (name == "afp_segment") rep = detail::scenario_afp_segment(opt);
    else throw UnknownScenario("unknown scenario: " + name);
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace amink
