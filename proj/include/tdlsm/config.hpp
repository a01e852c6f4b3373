#pragma once

// Run configuration: one nested key-value document (JSON) describing an
// experiment end to end. Defaults reproduce the reference experiment:
// ellipse scatterer near (1,1), 30 stations on a ring of radius 2.5, 80
// random emitters on a far ring of radius 20, records on [0, 40] with step
// 0.1, retention ratio 0.005, sampling disk of radius 2.2.
//
// Parsing is strict: unknown keys anywhere in the document are errors, and
// parse(serialize(config)) reproduces the config exactly.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdlsm/correlation.hpp"
#include "tdlsm/geometry.hpp"
#include "tdlsm/io.hpp"
#include "tdlsm/operators.hpp"
#include "tdlsm/pulse.hpp"
#include "tdlsm/synthesis.hpp"

namespace tdlsm {

// A buildable obstacle description. Parameter slots by type:
//   ellipse: a = semi-axis x, b = semi-axis y
//   disk:    a = radius
//   kite:    a = horizontal scale, b = bend coefficient, c = vertical scale
struct ShapeSpec {
    std::string type;
    Vec2 center{};
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

inline ShapeSpec ellipse_spec(Vec2 center, double rx, double ry) { return {"ellipse", center, rx, ry, 0.0}; }
inline ShapeSpec disk_spec(Vec2 center, double radius) { return {"disk", center, radius, 0.0, 0.0}; }
inline ShapeSpec kite_spec(Vec2 center, double rx, double coeff, double ry) { return {"kite", center, rx, coeff, ry}; }

inline BoundaryCurve build_shape(const ShapeSpec& s) {
    if (s.type == "ellipse") return make_ellipse(s.center, s.a, s.b);
    if (s.type == "disk") return make_disk(s.center, s.a);
    if (s.type == "kite") return make_kite(s.center, s.a, s.b, s.c);
    throw std::invalid_argument("build_shape: unknown shape type '" + s.type + "'");
}

inline std::string kernel_scaling_name(KernelScaling s) {
    switch (s) {
        case KernelScaling::Unnormalized: return "unnormalized";
        case KernelScaling::PerLagStep: return "per-lag-step";
        case KernelScaling::Matched: return "matched";
    }
    throw std::logic_error("kernel_scaling_name: bad enum");
}

inline KernelScaling parse_kernel_scaling(const std::string& name) {
    for (KernelScaling s : {KernelScaling::Unnormalized, KernelScaling::PerLagStep, KernelScaling::Matched})
        if (kernel_scaling_name(s) == name) return s;
    throw std::runtime_error("config: unknown kernel scaling '" + name + "'");
}

inline OperatorKind parse_operator_kind(const std::string& name) {
    for (OperatorKind k : {OperatorKind::Correlation, OperatorKind::Antisymmetrized, OperatorKind::NearField})
        if (operator_kind_name(k) == name) return k;
    throw std::runtime_error("config: unknown operator kind '" + name + "'");
}

struct RunConfig {
    std::vector<ShapeSpec> shapes{ellipse_spec({1.0, 1.0}, 0.25, 0.5)};
    MeasurementSpec measurement{};
    Pulse pulse{};
    double dt = 0.1;
    int steps = 200; // records span [0, 2 * steps * dt]
    int source_count = 80;
    double source_radius = 20.0;
    double source_beta = 0.1;
    std::uint64_t seed = 7;
    double noise_delta = 0.0;
    std::uint64_t noise_seed = 1;
    OperatorKind kind = OperatorKind::Correlation;
    double tau = 0.0;
    double rho = 0.005;
    KernelScaling scaling = KernelScaling::Matched;
    double pad = 2.0;
    int bie_nodes = 128;
    Vec2 sampling_center{1.0, 1.0};
    double sampling_radius = 2.2;
    double sampling_spacing = 0.04;
    std::string output_dir = "out";
    int threads = 1;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace cfg_detail {

inline void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw std::runtime_error(std::string("config: ") + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
    }
}

inline nlohmann::json vec2_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

inline Vec2 vec2_from(const nlohmann::json& j, const char* where) {
    if (!j.is_array() || j.size() != 2)
        throw std::runtime_error(std::string("config: ") + where + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace cfg_detail

inline nlohmann::json shape_to_json(const ShapeSpec& s) {
    nlohmann::json j{{"type", s.type}, {"center", cfg_detail::vec2_json(s.center)}};
    if (s.type == "ellipse") {
        j["rx"] = s.a;
        j["ry"] = s.b;
    } else if (s.type == "disk") {
        j["radius"] = s.a;
    } else if (s.type == "kite") {
        j["rx"] = s.a;
        j["coeff"] = s.b;
        j["ry"] = s.c;
    } else {
        throw std::invalid_argument("shape_to_json: unknown shape type '" + s.type + "'");
    }
    return j;
}

inline ShapeSpec shape_from_json(const nlohmann::json& j) {
    ShapeSpec s;
    s.type = j.at("type").get<std::string>();
    s.center = cfg_detail::vec2_from(j.at("center"), "shape center");
    if (s.type == "ellipse") {
        cfg_detail::expect_keys(j, {"type", "center", "rx", "ry"}, "ellipse shape");
        s.a = j.at("rx").get<double>();
        s.b = j.at("ry").get<double>();
    } else if (s.type == "disk") {
        cfg_detail::expect_keys(j, {"type", "center", "radius"}, "disk shape");
        s.a = j.at("radius").get<double>();
    } else if (s.type == "kite") {
        cfg_detail::expect_keys(j, {"type", "center", "rx", "coeff", "ry"}, "kite shape");
        s.a = j.at("rx").get<double>();
        s.b = j.at("coeff").get<double>();
        s.c = j.at("ry").get<double>();
    } else {
        throw std::runtime_error("config: unknown shape type '" + s.type + "'");
    }
    return s;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const ShapeSpec& s : c.shapes) shapes.push_back(shape_to_json(s));

    nlohmann::json meas{{"center", cfg_detail::vec2_json(c.measurement.center)},
                        {"ring_radii", c.measurement.ring_radii},
                        {"count", c.measurement.count}};
    meas["aperture"] = c.measurement.aperture
                           ? nlohmann::json::array({c.measurement.aperture->first, c.measurement.aperture->second})
                           : nlohmann::json();

    return nlohmann::json{
        {"scene", {{"shapes", shapes}, {"measurement", meas}}},
        {"pulse", {{"omega", c.pulse.omega}, {"alpha", c.pulse.alpha}, {"t0", c.pulse.t0}}},
        {"time", {{"dt", c.dt}, {"steps", c.steps}}},
        {"sources",
         {{"count", c.source_count}, {"radius", c.source_radius}, {"beta", c.source_beta}, {"seed", c.seed}}},
        {"noise", {{"delta", c.noise_delta}, {"seed", c.noise_seed}}},
        {"operator",
         {{"kind", operator_kind_name(c.kind)},
          {"tau", c.tau},
          {"rho", c.rho},
          {"scaling", kernel_scaling_name(c.scaling)}}},
        {"synthesis", {{"pad", c.pad}, {"bie_nodes", c.bie_nodes}}},
        {"sampling",
         {{"center", cfg_detail::vec2_json(c.sampling_center)},
          {"radius", c.sampling_radius},
          {"spacing", c.sampling_spacing}}},
        {"output", c.output_dir},
        {"threads", c.threads},
    };
}

// Strict parse: starts from the defaults, overrides the keys present,
// rejects anything unknown.
inline RunConfig config_from_json(const nlohmann::json& j) {
    using cfg_detail::expect_keys;
    using cfg_detail::vec2_from;
    expect_keys(j,
                {"scene", "pulse", "time", "sources", "noise", "operator", "synthesis", "sampling", "output",
                 "threads"},
                "config root");
    RunConfig c;
    if (j.contains("scene")) {
        const nlohmann::json& sc = j["scene"];
        expect_keys(sc, {"shapes", "measurement"}, "scene");
        if (sc.contains("shapes")) {
            if (!sc["shapes"].is_array()) throw std::runtime_error("config: scene.shapes must be an array");
            c.shapes.clear();
            for (const nlohmann::json& s : sc["shapes"]) c.shapes.push_back(shape_from_json(s));
        }
        if (sc.contains("measurement")) {
            const nlohmann::json& m = sc["measurement"];
            expect_keys(m, {"center", "ring_radii", "count", "aperture"}, "scene.measurement");
            if (m.contains("center")) c.measurement.center = vec2_from(m["center"], "measurement center");
            if (m.contains("ring_radii")) c.measurement.ring_radii = m["ring_radii"].get<std::vector<double>>();
            if (m.contains("count")) c.measurement.count = m["count"].get<int>();
            if (m.contains("aperture")) {
                if (m["aperture"].is_null()) {
                    c.measurement.aperture.reset();
                } else {
                    if (!m["aperture"].is_array() || m["aperture"].size() != 2)
                        throw std::runtime_error("config: measurement aperture must be null or [lo, hi]");
                    c.measurement.aperture = {m["aperture"][0].get<double>(), m["aperture"][1].get<double>()};
                }
            }
        }
    }
    if (j.contains("pulse")) {
        const nlohmann::json& p = j["pulse"];
        expect_keys(p, {"omega", "alpha", "t0"}, "pulse");
        if (p.contains("omega")) c.pulse.omega = p["omega"].get<double>();
        if (p.contains("alpha")) c.pulse.alpha = p["alpha"].get<double>();
        if (p.contains("t0")) c.pulse.t0 = p["t0"].get<double>();
    }
    if (j.contains("time")) {
        const nlohmann::json& t = j["time"];
        expect_keys(t, {"dt", "steps"}, "time");
        if (t.contains("dt")) c.dt = t["dt"].get<double>();
        if (t.contains("steps")) c.steps = t["steps"].get<int>();
    }
    if (j.contains("sources")) {
        const nlohmann::json& s = j["sources"];
        expect_keys(s, {"count", "radius", "beta", "seed"}, "sources");
        if (s.contains("count")) c.source_count = s["count"].get<int>();
        if (s.contains("radius")) c.source_radius = s["radius"].get<double>();
        if (s.contains("beta")) c.source_beta = s["beta"].get<double>();
        if (s.contains("seed")) c.seed = s["seed"].get<std::uint64_t>();
    }
    if (j.contains("noise")) {
        const nlohmann::json& n = j["noise"];
        expect_keys(n, {"delta", "seed"}, "noise");
        if (n.contains("delta")) c.noise_delta = n["delta"].get<double>();
        if (n.contains("seed")) c.noise_seed = n["seed"].get<std::uint64_t>();
    }
    if (j.contains("operator")) {
        const nlohmann::json& o = j["operator"];
        expect_keys(o, {"kind", "tau", "rho", "scaling"}, "operator");
        if (o.contains("kind")) c.kind = parse_operator_kind(o["kind"].get<std::string>());
        if (o.contains("tau")) c.tau = o["tau"].get<double>();
        if (o.contains("rho")) c.rho = o["rho"].get<double>();
        if (o.contains("scaling")) c.scaling = parse_kernel_scaling(o["scaling"].get<std::string>());
    }
    if (j.contains("synthesis")) {
        const nlohmann::json& s = j["synthesis"];
        expect_keys(s, {"pad", "bie_nodes"}, "synthesis");
        if (s.contains("pad")) c.pad = s["pad"].get<double>();
        if (s.contains("bie_nodes")) c.bie_nodes = s["bie_nodes"].get<int>();
    }
    if (j.contains("sampling")) {
        const nlohmann::json& s = j["sampling"];
        expect_keys(s, {"center", "radius", "spacing"}, "sampling");
        if (s.contains("center")) c.sampling_center = vec2_from(s["center"], "sampling center");
        if (s.contains("radius")) c.sampling_radius = s["radius"].get<double>();
        if (s.contains("spacing")) c.sampling_spacing = s["spacing"].get<double>();
    }
    if (j.contains("output")) c.output_dir = j["output"].get<std::string>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    return c;
}

// Content hash of the canonical serialized form; the cache key for every
// derived artifact.
inline std::string config_hash(const RunConfig& c) { return hash_string(json_canonical(config_to_json(c))); }

// ---------------------------------------------------------------------------
// Derived objects.

inline Scene scene_from_config(const RunConfig& c) {
    std::vector<BoundaryCurve> curves;
    curves.reserve(c.shapes.size());
    for (const ShapeSpec& s : c.shapes) curves.push_back(build_shape(s));
    return build_scene(std::move(curves), c.measurement);
}

inline TimeGrid time_grid_from_config(const RunConfig& c) { return make_time_grid(c.dt, c.steps); }

inline SamplingGrid sampling_grid_from_config(const RunConfig& c) {
    return make_sampling_grid(c.sampling_center, c.sampling_radius, c.sampling_spacing);
}

// Quadrature weight for the test-source ring: mean arc spacing of the y
// stations (2 pi r / M on a single ring of radius r).
inline double station_spacing(const MeasurementSet& ms, Vec2 center) {
    if (ms.y.empty()) throw std::invalid_argument("station_spacing: no test-source stations");
    double mean_r = 0.0;
    for (const Vec2& q : ms.y) mean_r += dist(q, center);
    mean_r /= static_cast<double>(ms.y.size());
    return 2.0 * pi * mean_r / static_cast<double>(ms.y.size());
}

// Parameter sanity checks that are not already enforced by the builders the
// config feeds (time grid, scenes, grids validate themselves).
inline void validate_config(const RunConfig& c) {
    if (c.source_count < 1) throw std::runtime_error("config: sources.count must be at least 1");
    if (!(c.source_radius > 0.0)) throw std::runtime_error("config: sources.radius must be positive");
    if (!(c.source_beta >= 0.0 && c.source_beta <= 1.0)) throw std::runtime_error("config: sources.beta out of [0, 1]");
    if (!(c.noise_delta >= 0.0)) throw std::runtime_error("config: noise.delta must be nonnegative");
    if (!(c.rho > 0.0 && c.rho <= 1.0)) throw std::runtime_error("config: operator.rho out of (0, 1]");
    if (!(c.tau >= 0.0)) throw std::runtime_error("config: operator.tau must be nonnegative");
    if (c.bie_nodes < 8) throw std::runtime_error("config: synthesis.bie_nodes must be at least 8");
    if (c.threads < 1) throw std::runtime_error("config: threads must be at least 1");
    if (c.output_dir.empty()) throw std::runtime_error("config: output directory must be set");
}

} // namespace tdlsm
