#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "amink/content.hpp"
#include "amink/convex.hpp"
#include "amink/errors.hpp"
#include "amink/rectifiable.hpp"

namespace amink {

using Json = nlohmann::json;

// One scene = one (S, C, k) triple plus estimator knobs. UTF-8 JSON.
struct Scene {
    int ambient_dim = 0;
    int k = 0;
    RectifiableSet set;
    ConvexBody body;
    std::vector<double> schedule;
    EstimatorParams estimator;
    int quadrature_order = 16;
};

inline Vec parse_vector(const Json& j, int expect_dim = -1) {
    if (!j.is_array()) throw Error("expected a coordinate array");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    if (expect_dim >= 0 && v.size() != expect_dim)
        throw Error("coordinate dimension mismatch");
    return v;
}

inline ConvexBody parse_body(const Json& j, int ambient_dim) {
    if (j.contains("ball")) {
        const Json& b = j["ball"];
        int dim = b.value("dim", ambient_dim);
        if (dim != ambient_dim) throw Error("ball dim must match ambient_dim");
        double radius = b.value("radius", 1.0);
        int facets = b.value("facets", 256);
        return make_ball_polytope(dim, radius, facets);
    }
    if (!j.contains("vertices")) throw Error("body needs \"vertices\" or \"ball\"");
    const Json& vs = j["vertices"];
    if (!vs.is_array() || vs.empty()) throw Error("body vertices empty");
    Mat pts(ambient_dim, vs.size());
    for (size_t i = 0; i < vs.size(); ++i) pts.col(i) = parse_vector(vs[i], ambient_dim);
    bool recenter = j.value("recenter", false);
    return make_body(pts, ambient_dim, recenter);
}

inline std::vector<Patch> parse_patch(const Json& j) {
    std::string kind = j.value("kind", "");
    if (kind == "segment") {
        return {Patch::segment(parse_vector(j.at("a")), parse_vector(j.at("b")))};
    }
    if (kind == "polyline") {
        const Json& pts = j.at("points");
        if (!pts.is_array() || pts.size() < 2) throw Error("polyline needs >= 2 points");
        std::vector<Patch> out;
        for (size_t i = 0; i + 1 < pts.size(); ++i)
            out.push_back(Patch::polyline_piece(parse_vector(pts[i]),
                                                parse_vector(pts[i + 1])));
        return out;
    }
    if (kind == "circle_arc") {
        Vec c = parse_vector(j.at("center"));
        double r = j.at("radius").get<double>();
        auto th = j.at("theta");
        return {Patch::circle_arc(c, r, th[0].get<double>(), th[1].get<double>())};
    }
    if (kind == "circle") {
        double r = j.value("radius", 1.0);
        double off = j.value("offset", 0.0);
        return unit_circle(r, off).patches;
    }
    if (kind == "graph_surface") {
        std::map<std::string, double> coeffs;
        for (auto& [key, val] : j.at("coeffs").items()) coeffs[key] = val.get<double>();
        auto d = j.at("domain");
        std::array<std::array<double, 2>, 2> dom{
            {{d[0][0].get<double>(), d[0][1].get<double>()},
             {d[1][0].get<double>(), d[1][1].get<double>()}}};
        return {Patch::graph_surface(coeffs, dom)};
    }
    if (kind == "sphere_patch") {
        Vec c = parse_vector(j.at("center"));
        double r = j.at("radius").get<double>();
        auto th = j.at("theta");
        auto ph = j.at("phi");
        return {Patch::sphere_patch(c, r,
                                    {th[0].get<double>(), th[1].get<double>()},
                                    {ph[0].get<double>(), ph[1].get<double>()})};
    }
    if (kind == "triangle") {
        return {Patch::triangle(parse_vector(j.at("a")), parse_vector(j.at("b")),
                                parse_vector(j.at("c")))};
    }
    if (kind == "helix") {
        auto th = j.at("theta");
        return {Patch::helix(j.value("radius", 1.0), j.value("pitch", 0.5),
                             {th[0].get<double>(), th[1].get<double>()})};
    }
    if (kind == "slab") {
        const Json& b = j.at("box");
        std::vector<std::array<double, 2>> box;
        for (const auto& side : b)
            box.push_back({side[0].get<double>(), side[1].get<double>()});
        return {Patch::slab(box)};
    }
    if (kind == "point") {
        return {Patch::point(parse_vector(j.at("p")))};
    }
    if (kind == "e1_family") {
        return e1_family(j.value("M", 64)).patches;
    }
    throw Error("unknown patch kind: " + kind);
}

inline RectifiableSet parse_set(const Json& j) {
    if (!j.contains("patches")) throw Error("set needs \"patches\"");
    std::vector<Patch> patches;
    for (const auto& pj : j["patches"]) {
        auto ps = parse_patch(pj);
        patches.insert(patches.end(), ps.begin(), ps.end());
    }
    return make_set(std::move(patches));
}

inline Scene parse_scene(const Json& j) {
    Scene s;
    if (!j.contains("ambient_dim")) throw Error("scene needs ambient_dim");
    s.ambient_dim = j["ambient_dim"].get<int>();
    s.set = parse_set(j.at("set"));
    if (s.set.ambient_dim != s.ambient_dim) throw Error("set ambient_dim mismatch");
    s.k = j.value("k", s.set.k);
    s.body = parse_body(j.at("body"), s.ambient_dim);
    if (j.contains("schedule")) {
        for (const auto& r : j["schedule"]) s.schedule.push_back(r.get<double>());
        for (size_t i = 1; i < s.schedule.size(); ++i)
            if (!(s.schedule[i] < s.schedule[i - 1]))
                throw Error("schedule not decreasing");
    }
    if (j.contains("estimator")) {
        const Json& e = j["estimator"];
        std::string method = e.value("method", "grid");
        if (method == "grid") {
            s.estimator.method = TubeVolumeEstimate::Method::Grid;
        } else if (method == "mc") {
            s.estimator.method = TubeVolumeEstimate::Method::Mc;
            if (!e.contains("seed")) throw Error("mc estimator needs a seed");
        } else {
            throw Error("estimator method must be grid or mc");
        }
        s.estimator.h = e.value("h", 0.0);
        s.estimator.h_over_r = e.value("h_over_r", 0.0);
        s.estimator.mc_samples = e.value("N", int64_t{200000});
        s.estimator.seed = e.value("seed", uint64_t{1});
        if (s.estimator.method == TubeVolumeEstimate::Method::Grid &&
            s.estimator.h <= 0 && s.estimator.h_over_r <= 0)
            throw Error("grid estimator needs h or h_over_r");
    }
    s.estimator.cloud_eps = j.value("cloud_eps", 0.0);
    s.quadrature_order = j.value("quadrature_order", 16);
    return s;
}

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// CSV rows: r, volume, stderr, normalized, method, resolution, seed.
inline std::string content_csv(const ContentEstimate& ce) {
    std::string out = "r,volume,stderr,normalized,method,resolution,seed\n";
    for (size_t i = 0; i < ce.estimates.size(); ++i) {
        const auto& est = ce.estimates[i];
        out += detail::fmt17(est.r);
        out += ',';
        out += detail::fmt17(est.volume);
        out += ',';
        out += detail::fmt17(est.stderr_);
        out += ',';
        out += detail::fmt17(ce.values[i]);
        out += ',';
        out += est.method == TubeVolumeEstimate::Method::Grid ? "grid" : "mc";
        out += ',';
        out += detail::fmt17(est.resolution);
        out += ',';
        out += std::to_string(est.seed);
        out += '\n';
    }
    return out;
}

inline Json json_real(double v) {
    if (std::isinf(v) || std::isnan(v)) return nullptr;  // JSON has no inf
    return v;
}

// Stable summary keys for the content pipeline.
inline Json content_summary(const ContentEstimate& ce, double phi) {
    Json j;
    j["extrapolated"] = json_real(ce.extrapolated);
    j["residual"] = json_real(ce.residual);
    j["lower_tail"] = json_real(ce.lower_tail);
    j["upper_tail"] = json_real(ce.upper_tail);
    j["divergence_flag"] = ce.divergence_flag;
    j["phi"] = json_real(phi);
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (phi != 0.0 && std::isfinite(ce.extrapolated))
        gap = std::abs(ce.extrapolated - phi) / std::abs(phi);
    j["relative_gap"] = json_real(gap);
    return j;
}

}  // namespace amink
