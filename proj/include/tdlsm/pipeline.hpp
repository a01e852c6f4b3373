#pragma once

// Run-directory pipeline: simulate -> assemble -> invert -> render, plus the
// validation battery. Stages communicate only through files, so any
// intermediate can be deleted and regenerated bit-identically. manifest.json
// records the config, its hash, and for every stage the hash of the inputs it
// consumed and the outputs it produced; a stage reruns only when its recorded
// input hash or any output file on disk no longer matches.
//
// Layout of a run directory:
//   manifest.json      config + stage records (no timestamps; reruns are
//                      byte-identical under a fixed config)
//   passive_x.f64      total-field records at imaging stations   (2N+1, J, L)
//   passive_y.f64      total-field records at test stations      (2N+1, M, L)
//   active.f64         scattered autocorrelation-pulsed records  (2N+1, J, M)
//   incident.f64       background correlation term on lag grid   (2N+1, J, M)
//   operator_<K>.f64   imaging operator matrix, row-major
//   map_<K>.f64        indicator values on the sampling grid, row-major by iy
//   map_<K>.csv        x,y,value rows (render stage)
//   map_<K>.pgm        grayscale heatmap; *_overlay.pgm adds true boundaries

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tdlsm/config.hpp"
#include "tdlsm/correlation.hpp"
#include "tdlsm/inversion.hpp"
#include "tdlsm/io.hpp"
#include "tdlsm/operators.hpp"
#include "tdlsm/synthesis.hpp"
#include "tdlsm/validation.hpp"

namespace tdlsm {

inline std::filesystem::path manifest_path(const std::filesystem::path& dir) { return dir / "manifest.json"; }

// Loads the run-directory manifest, carrying forward recorded stages, and
// stamps it with the current config. Unreadable manifests start fresh.
inline nlohmann::json load_manifest(const RunConfig& cfg, const std::filesystem::path& dir) {
    nlohmann::json m;
    const std::filesystem::path mp = manifest_path(dir);
    if (std::filesystem::exists(mp)) {
        try {
            m = load_json(mp);
        } catch (const std::exception&) {
            m = nlohmann::json::object();
        }
    }
    if (!m.is_object()) m = nlohmann::json::object();
    if (!m.contains("stages") || !m["stages"].is_object()) m["stages"] = nlohmann::json::object();
    m["config"] = config_to_json(cfg);
    m["config_hash"] = config_hash(cfg);
    m["seed"] = cfg.seed;
    m["threads"] = cfg.threads;
    return m;
}

inline void save_manifest(const nlohmann::json& m, const std::filesystem::path& dir) {
    save_json(manifest_path(dir), m);
}

// ---------------------------------------------------------------------------
// Stage input fingerprints. Each stage hashes only the config groups and
// input-file hashes it actually consumes, so e.g. changing the operator kind
// never invalidates the simulated dataset.

inline std::string inputs_fingerprint(const nlohmann::json& inputs) { return hash_string(json_canonical(inputs)); }

inline nlohmann::json simulate_inputs(const RunConfig& c) {
    const nlohmann::json j = config_to_json(c);
    return nlohmann::json{{"scene", j["scene"]},
                          {"pulse", j["pulse"]},
                          {"time", j["time"]},
                          {"sources", j["sources"]},
                          {"synthesis", j["synthesis"]}};
}

namespace pipe_detail {

// Hash of a file previously produced by `stage`, as recorded in the manifest.
inline std::string recorded_hash(const nlohmann::json& manifest, const std::string& stage, const std::string& file) {
    const nlohmann::json& stages = manifest.at("stages");
    if (!stages.contains(stage) || !stages[stage]["files"].contains(file))
        throw std::runtime_error("pipeline: " + file + " is not in the manifest; run the " + stage +
                                 " stage first");
    return stages[stage]["files"][file].at("hash").get<std::string>();
}

inline std::vector<std::string> assemble_input_files(OperatorKind kind) {
    if (kind == OperatorKind::Correlation) return {"passive_x.f64", "passive_y.f64", "incident.f64"};
    return {"active.f64"};
}

} // namespace pipe_detail

inline nlohmann::json assemble_inputs(const RunConfig& c, const nlohmann::json& manifest) {
    const nlohmann::json j = config_to_json(c);
    nlohmann::json files = nlohmann::json::object();
    for (const std::string& f : pipe_detail::assemble_input_files(c.kind))
        files[f] = pipe_detail::recorded_hash(manifest, "simulate", f);
    return nlohmann::json{{"files", files},
                          {"measurement", j["scene"]["measurement"]},
                          {"time", j["time"]},
                          {"source_radius", c.source_radius},
                          {"noise", j["noise"]},
                          {"kind", operator_kind_name(c.kind)},
                          {"scaling", kernel_scaling_name(c.scaling)}};
}

inline std::string operator_file_name(OperatorKind kind) {
    return std::string("operator_") + operator_kind_name(kind) + ".f64";
}

inline std::string map_file_name(OperatorKind kind, const char* suffix) {
    return std::string("map_") + operator_kind_name(kind) + suffix;
}

inline nlohmann::json invert_inputs(const RunConfig& c, const nlohmann::json& manifest) {
    const nlohmann::json j = config_to_json(c);
    return nlohmann::json{{"operator", pipe_detail::recorded_hash(manifest, "assemble", operator_file_name(c.kind))},
                          {"kind", operator_kind_name(c.kind)},
                          {"tau", c.tau},
                          {"rho", c.rho},
                          {"pulse", j["pulse"]},
                          {"time", j["time"]},
                          {"measurement", j["scene"]["measurement"]},
                          {"sampling", j["sampling"]}};
}

inline nlohmann::json render_inputs(const RunConfig& c, const nlohmann::json& manifest) {
    const nlohmann::json j = config_to_json(c);
    return nlohmann::json{{"map", pipe_detail::recorded_hash(manifest, "invert", map_file_name(c.kind, ".f64"))},
                          {"kind", operator_kind_name(c.kind)},
                          {"sampling", j["sampling"]},
                          {"shapes", j["scene"]["shapes"]}};
}

// A stage is current when its recorded input fingerprint matches and every
// recorded output file still exists with its recorded content hash.
inline bool stage_cached(const nlohmann::json& manifest, const std::filesystem::path& dir, const std::string& stage,
                         const std::string& fingerprint) {
    const nlohmann::json& stages = manifest.at("stages");
    if (!stages.contains(stage)) return false;
    const nlohmann::json& entry = stages[stage];
    if (!entry.contains("inputs_hash") || entry["inputs_hash"].get<std::string>() != fingerprint) return false;
    if (!entry.contains("files") || !entry["files"].is_object()) return false;
    for (auto it = entry["files"].begin(); it != entry["files"].end(); ++it) {
        const std::filesystem::path p = dir / it.key();
        if (!std::filesystem::exists(p)) return false;
        if (hash_file(p) != it.value().at("hash").get<std::string>()) return false;
    }
    return true;
}

struct StageResult {
    std::string stage;
    bool recomputed = false;
    std::vector<std::string> files;
};

// ---------------------------------------------------------------------------
// Array file helpers.

namespace pipe_detail {

inline void record_file(nlohmann::json& entry, const std::string& name, const std::string& hash,
                        std::vector<std::size_t> shape = {}) {
    nlohmann::json f{{"hash", hash}};
    if (!shape.empty()) f["shape"] = shape;
    entry["files"][name] = std::move(f);
}

inline std::vector<double> read_array(const std::filesystem::path& dir, const std::string& name,
                                      std::size_t expected) {
    std::vector<double> v = read_f64(dir / name);
    if (v.size() != expected)
        throw std::runtime_error("pipeline: " + name + " holds " + std::to_string(v.size()) +
                                 " values where the config implies " + std::to_string(expected) +
                                 "; re-run the earlier stages");
    return v;
}

inline PulsedFieldSet slice_receivers(const PulsedFieldSet& all, std::size_t offset, std::size_t count) {
    PulsedFieldSet out{all.kind, all.times, Tensor3(all.data.nt, count, all.data.ns), all.noise_level,
                       all.noise_seed};
    for (std::size_t t = 0; t < all.data.nt; ++t)
        for (std::size_t r = 0; r < count; ++r)
            for (std::size_t s = 0; s < all.data.ns; ++s) out.data.at(t, r, s) = all.data.at(t, offset + r, s);
    return out;
}

} // namespace pipe_detail

// ---------------------------------------------------------------------------
// simulate: synthesize the measurement campaign. Passive total-field records
// at both station rings share one pass over the frequency sweep; active
// scattered records and the background correlation term live on the lag grid.
inline StageResult run_simulate(const RunConfig& cfg, const std::filesystem::path& dir, bool force = false) {
    validate_config(cfg);
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = load_manifest(cfg, dir);
    const std::string fp = inputs_fingerprint(simulate_inputs(cfg));
    StageResult res{"simulate", false, {"passive_x.f64", "passive_y.f64", "active.f64", "incident.f64"}};
    if (!force && stage_cached(manifest, dir, "simulate", fp)) {
        save_manifest(manifest, dir);
        return res;
    }

    const Scene scene = scene_from_config(cfg);
    const MeasurementSet ms = make_receivers(scene.measurement);
    const TimeGrid grid = time_grid_from_config(cfg);
    const FrequencyPlan plan = plan_frequencies(make_spectrum(cfg.pulse), grid, cfg.pad);
    const RandomSourceSet sources = draw_sources(cfg.source_count, cfg.source_radius, cfg.source_beta, cfg.seed);

    std::vector<Vec2> stations = ms.x;
    stations.insert(stations.end(), ms.y.begin(), ms.y.end());
    const PulsedFieldSet both = synthesize_dataset(scene, plan, stations, sources.points, grid.record_times(),
                                                   FieldKind::TotalChi, cfg.bie_nodes, cfg.threads);
    const PulsedFieldSet at_x = pipe_detail::slice_receivers(both, 0, ms.x.size());
    const PulsedFieldSet at_y = pipe_detail::slice_receivers(both, ms.x.size(), ms.y.size());
    const PulsedFieldSet active = synthesize_dataset(scene, plan, ms.x, ms.y, grid.lag_times(),
                                                     FieldKind::ScatteredChiTilde, cfg.bie_nodes, cfg.threads);
    const IncidentCorrelationTerm incident = incident_correlation(plan, ms.x, ms.y, grid.lag_times(), cfg.threads);

    const std::size_t nt = static_cast<std::size_t>(grid.samples());
    const std::size_t J = ms.x.size(), M = ms.y.size(), L = sources.points.size();
    nlohmann::json entry{{"inputs_hash", fp}, {"files", nlohmann::json::object()}};
    pipe_detail::record_file(entry, "passive_x.f64", write_f64(dir / "passive_x.f64", at_x.data.v), {nt, J, L});
    pipe_detail::record_file(entry, "passive_y.f64", write_f64(dir / "passive_y.f64", at_y.data.v), {nt, M, L});
    pipe_detail::record_file(entry, "active.f64", write_f64(dir / "active.f64", active.data.v), {nt, J, M});
    pipe_detail::record_file(entry, "incident.f64", write_f64(dir / "incident.f64", incident.phi.v), {nt, J, M});
    manifest["stages"]["simulate"] = entry;
    save_manifest(manifest, dir);
    res.recomputed = true;
    return res;
}

// ---------------------------------------------------------------------------
// assemble: build the imaging operator the config asks for. Noise, when
// configured, perturbs exactly the inputs this operator kind consumes: the
// passive records for kind C, the active records for kinds N and I.
inline StageResult run_assemble(const RunConfig& cfg, const std::filesystem::path& dir, bool force = false) {
    validate_config(cfg);
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = load_manifest(cfg, dir);
    const std::string fp = inputs_fingerprint(assemble_inputs(cfg, manifest));
    const std::string op_file = operator_file_name(cfg.kind);
    StageResult res{"assemble", false, {op_file}};
    if (!force && stage_cached(manifest, dir, "assemble", fp)) {
        save_manifest(manifest, dir);
        return res;
    }

    const MeasurementSet ms = make_receivers(cfg.measurement);
    const TimeGrid grid = time_grid_from_config(cfg);
    const std::size_t nt = static_cast<std::size_t>(grid.samples());
    const std::size_t J = ms.x.size(), M = ms.y.size(), L = static_cast<std::size_t>(cfg.source_count);
    const double dy = station_spacing(ms, cfg.measurement.center);

    ImagingOperator op;
    if (cfg.kind == OperatorKind::Correlation) {
        PulsedFieldSet at_x{FieldKind::TotalChi, grid.record_times(), Tensor3(nt, J, L), 0.0, 0};
        at_x.data.v = pipe_detail::read_array(dir, "passive_x.f64", nt * J * L);
        PulsedFieldSet at_y{FieldKind::TotalChi, grid.record_times(), Tensor3(nt, M, L), 0.0, 0};
        at_y.data.v = pipe_detail::read_array(dir, "passive_y.f64", nt * M * L);
        if (cfg.noise_delta > 0.0) {
            at_x = add_noise(at_x, cfg.noise_delta, cfg.noise_seed, "noise:passive:x");
            at_y = add_noise(at_y, cfg.noise_delta, cfg.noise_seed, "noise:passive:y");
        }
        IncidentCorrelationTerm incident;
        incident.lags = grid.lag_times();
        incident.phi = Tensor3(nt, J, M);
        incident.phi.v = pipe_detail::read_array(dir, "incident.f64", nt * J * M);

        const CrossCorrelation corr = cross_correlate(at_x, at_y, grid, CorrelationPath::Fft, cfg.threads);
        const CorrelationKernel kernel = assemble_kernel(corr, incident, cfg.source_radius, cfg.scaling);
        op = assemble_operator(kernel, dy, cfg.threads);
    } else {
        PulsedFieldSet active{FieldKind::ScatteredChiTilde, grid.lag_times(), Tensor3(nt, J, M), 0.0, 0};
        active.data.v = pipe_detail::read_array(dir, "active.f64", nt * J * M);
        if (cfg.noise_delta > 0.0) active = add_noise(active, cfg.noise_delta, cfg.noise_seed, "noise:active");
        op = assemble_operator(active, grid, cfg.kind, dy, cfg.threads);
    }

    std::vector<double> flat(static_cast<std::size_t>(op.A.rows()) * static_cast<std::size_t>(op.A.cols()));
    for (Eigen::Index r = 0; r < op.A.rows(); ++r)
        for (Eigen::Index c = 0; c < op.A.cols(); ++c)
            flat[static_cast<std::size_t>(r) * static_cast<std::size_t>(op.A.cols()) +
                 static_cast<std::size_t>(c)] = op.A(r, c);

    nlohmann::json entry{{"inputs_hash", fp}, {"files", nlohmann::json::object()}};
    pipe_detail::record_file(entry, op_file, write_f64(dir / op_file, flat),
                             {static_cast<std::size_t>(op.A.rows()), static_cast<std::size_t>(op.A.cols())});
    manifest["stages"]["assemble"] = entry;
    save_manifest(manifest, dir);
    res.recomputed = true;
    return res;
}

// ---------------------------------------------------------------------------
// Indicator summary statistics, appended to the manifest by the invert stage.
// Means are taken over the normalized map (max = 1), so the inside/outside
// contrast is invariant under operator rescaling.

struct IndicatorStats {
    double max = 0.0;
    Vec2 argmax{};
    double mean = 0.0;         // over all unmasked points
    double inside_mean = 0.0;  // over points inside an obstacle
    double outside_mean = 0.0; // over points farther than the margin from every obstacle
    double contrast = 0.0;     // inside_mean / outside_mean
    bool has_contrast = false;
};

inline double distance_to_curve(Vec2 p, const BoundaryCurve& c, int samples = 512) {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) d = std::min(d, dist(p, c.point(2.0 * pi * i / samples)));
    return d;
}

inline IndicatorStats compute_stats(const IndicatorMap& map, const std::vector<BoundaryCurve>& obstacles,
                                    double outside_margin = 0.5) {
    IndicatorStats st;
    if (!(map.max_value > 0.0)) return st;
    double sum = 0.0, inside = 0.0, outside = 0.0;
    std::size_t n = 0, n_in = 0, n_out = 0;
    for (int iy = 0; iy < map.grid.ny; ++iy)
        for (int ix = 0; ix < map.grid.nx; ++ix) {
            if (!map.grid.unmasked(ix, iy)) continue;
            const double v = map.at(ix, iy) / map.max_value;
            const Vec2 z = map.grid.point(ix, iy);
            sum += v;
            ++n;
            if (v > st.max) {
                st.max = v;
                st.argmax = z;
            }
            if (obstacles.empty()) continue;
            bool in = false;
            double d = std::numeric_limits<double>::infinity();
            for (const BoundaryCurve& c : obstacles) {
                in = in || c.contains(z);
                d = std::min(d, distance_to_curve(z, c));
            }
            if (in) {
                inside += v;
                ++n_in;
            } else if (d > outside_margin) {
                outside += v;
                ++n_out;
            }
        }
    st.max *= map.max_value; // report the unnormalized peak
    if (n > 0) st.mean = sum / static_cast<double>(n);
    if (n_in > 0) st.inside_mean = inside / static_cast<double>(n_in);
    if (n_out > 0) st.outside_mean = outside / static_cast<double>(n_out);
    if (n_in > 0 && n_out > 0 && st.outside_mean > 0.0) {
        st.contrast = st.inside_mean / st.outside_mean;
        st.has_contrast = true;
    }
    return st;
}

inline nlohmann::json stats_to_json(const IndicatorStats& st) {
    nlohmann::json j{{"max", st.max}, {"argmax", {st.argmax.x, st.argmax.y}}, {"mean", st.mean}};
    if (st.has_contrast) {
        j["inside_mean"] = st.inside_mean;
        j["outside_mean"] = st.outside_mean;
        j["contrast"] = st.contrast;
    }
    return j;
}

// ---------------------------------------------------------------------------
// invert: truncated SVD of the persisted operator, indicator over the
// sampling grid, raw map written, stats appended to the manifest.
inline StageResult run_invert(const RunConfig& cfg, const std::filesystem::path& dir, bool force = false) {
    validate_config(cfg);
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = load_manifest(cfg, dir);
    const std::string fp = inputs_fingerprint(invert_inputs(cfg, manifest));
    const std::string map_file = map_file_name(cfg.kind, ".f64");
    StageResult res{"invert", false, {map_file}};
    if (!force && stage_cached(manifest, dir, "invert", fp)) {
        save_manifest(manifest, dir);
        return res;
    }

    const MeasurementSet ms = make_receivers(cfg.measurement);
    const TimeGrid grid = time_grid_from_config(cfg);
    const std::size_t steps = 2 * static_cast<std::size_t>(grid.N) + 1;
    const std::size_t rows = steps * ms.x.size(), cols = steps * ms.y.size();

    ImagingOperator op;
    op.kind = cfg.kind;
    op.N = grid.N;
    op.nx = ms.x.size();
    op.ny = ms.y.size();
    op.dt = grid.dt;
    op.dy = station_spacing(ms, cfg.measurement.center);
    const std::vector<double> flat = pipe_detail::read_array(dir, operator_file_name(cfg.kind), rows * cols);
    op.A.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            op.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * cols + c];

    const TruncatedSvd svd = truncated_svd(op, cfg.rho);
    const SamplingGrid sgrid = sampling_grid_from_config(cfg);
    const Autocorrelation ac = make_autocorrelation(cfg.pulse);
    const IndicatorMap map = indicator_map(svd, sgrid, cfg.tau, ac, ms.x, grid, cfg.threads);

    std::vector<BoundaryCurve> obstacles;
    for (const ShapeSpec& s : cfg.shapes) obstacles.push_back(build_shape(s));
    const IndicatorStats st = compute_stats(map, obstacles);

    nlohmann::json entry{{"inputs_hash", fp}, {"files", nlohmann::json::object()}};
    pipe_detail::record_file(entry, map_file, write_f64(dir / map_file, map.values),
                             {static_cast<std::size_t>(sgrid.ny), static_cast<std::size_t>(sgrid.nx)});
    entry["stats"] = stats_to_json(st);
    entry["retained_singular_values"] = svd.keep;
    manifest["stages"]["invert"] = entry;
    save_manifest(manifest, dir);
    res.recomputed = true;
    return res;
}

// ---------------------------------------------------------------------------
// render: CSV and grayscale heatmaps from the raw map file; pure re-rendering
// with no numerics, so it is cheap to redo after deleting any image.
inline StageResult run_render(const RunConfig& cfg, const std::filesystem::path& dir, bool force = false) {
    validate_config(cfg);
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = load_manifest(cfg, dir);
    const std::string fp = inputs_fingerprint(render_inputs(cfg, manifest));
    StageResult res{"render", false, {map_file_name(cfg.kind, ".csv"), map_file_name(cfg.kind, ".pgm")}};
    if (!cfg.shapes.empty()) res.files.push_back(map_file_name(cfg.kind, "_overlay.pgm"));
    if (!force && stage_cached(manifest, dir, "render", fp)) {
        save_manifest(manifest, dir);
        return res;
    }

    const SamplingGrid sgrid = sampling_grid_from_config(cfg);
    IndicatorMap map;
    map.grid = sgrid;
    map.kind = cfg.kind;
    map.tau = cfg.tau;
    map.values = pipe_detail::read_array(dir, map_file_name(cfg.kind, ".f64"),
                                         static_cast<std::size_t>(sgrid.nx) * static_cast<std::size_t>(sgrid.ny));
    map.max_value = max_abs(map.values);

    nlohmann::json entry{{"inputs_hash", fp}, {"files", nlohmann::json::object()}};
    pipe_detail::record_file(entry, res.files[0], write_map_csv(dir / res.files[0], map));
    pipe_detail::record_file(entry, res.files[1], write_pgm(dir / res.files[1], rasterize_indicator(map)));
    if (!cfg.shapes.empty()) {
        std::vector<BoundaryCurve> obstacles;
        for (const ShapeSpec& s : cfg.shapes) obstacles.push_back(build_shape(s));
        pipe_detail::record_file(entry, res.files[2],
                                 write_pgm(dir / res.files[2], rasterize_indicator(map, obstacles)));
    }
    manifest["stages"]["render"] = entry;
    save_manifest(manifest, dir);
    res.recomputed = true;
    return res;
}

// Full chain with per-stage caching.
inline std::vector<StageResult> run_pipeline(const RunConfig& cfg, const std::filesystem::path& dir,
                                             bool force = false) {
    std::vector<StageResult> out;
    out.push_back(run_simulate(cfg, dir, force));
    out.push_back(run_assemble(cfg, dir, force));
    out.push_back(run_invert(cfg, dir, force));
    out.push_back(run_render(cfg, dir, force));
    return out;
}

// ---------------------------------------------------------------------------
// validate: the standard identity battery for a config. Fixed-frequency
// checks run at the pulse center frequency with a dense (L = 512) reference
// ring; the broadband checks use the config's own source ensemble. The
// time-domain checks always use the identity-consistent kernel scale,
// whatever the config selects for imaging.

struct ValidationRun {
    std::vector<IdentityReport> reports;
    bool all_pass = true;
};

inline ValidationRun run_validate(const RunConfig& cfg, const ValidationBaselines& base = {}) {
    validate_config(cfg);
    const Scene scene = scene_from_config(cfg);
    const MeasurementSet ms = make_receivers(scene.measurement);
    const double k0 = cfg.pulse.omega;
    const int dense_ring = 512;

    ValidationRun out;
    auto push = [&](IdentityReport r) {
        out.all_pass = out.all_pass && r.pass;
        out.reports.push_back(std::move(r));
    };

    // Coincident-pair limit at the first imaging station.
    push(check_hk_free(k0, ms.x[0], ms.x[0], cfg.source_radius, dense_ring, base.hk_free));

    // Unit-separation pair across ring doublings, plus the decay summary.
    const Vec2 p0 = ms.x[0];
    const Vec2 q0 = p0 + Vec2{1.0, 0.0};
    std::vector<IdentityReport> seq;
    for (const double R : {10.0, 20.0, 40.0, 80.0}) {
        IdentityReport r = check_hk_free(k0, p0, q0, R, dense_ring, base.hk_free);
        push(r);
        seq.push_back(std::move(r));
    }
    push(decay_report(seq));

    // Worst station pair at the band edges and center.
    for (const double k : {0.5 * k0, k0, 1.5 * k0}) {
        IdentityReport worst;
        worst.relative_error = -1.0;
        for (const Vec2& p : ms.x)
            for (const Vec2& q : ms.y) {
                if (dist(p, q) < 0.3) continue;
                IdentityReport r = check_hk_free(k, p, q, cfg.source_radius, dense_ring, base.hk_free);
                if (r.relative_error > worst.relative_error) worst = r;
            }
        worst.detail = "background field identity, worst station pair";
        push(worst);
    }

    if (!scene.obstacles.empty()) {
        const std::vector<std::pair<Vec2, Vec2>> pairs = {{ms.x[0], ms.y[0]},
                                                          {ms.x[ms.x.size() / 2], ms.y[ms.y.size() / 2]},
                                                          {ms.x[0], ms.x[0]}};
        for (const auto& [p, q] : pairs)
            push(check_hk_total(k0, p, q, scene, cfg.source_radius, cfg.source_count, base.hk_total,
                                cfg.bie_nodes));
        for (std::size_t i = 0; i + 1 < pairs.size(); ++i)
            push(check_hk_scattered(k0, pairs[i].first, pairs[i].second, scene, cfg.source_radius,
                                    cfg.source_count, base.hk_scattered, cfg.bie_nodes));
        std::vector<IdentityReport> tseq;
        for (const double R : {10.0, 20.0, 40.0, 80.0}) {
            IdentityReport r =
                check_hk_total(k0, pairs[0].first, pairs[0].second, scene, R, dense_ring, base.hk_total,
                               cfg.bie_nodes);
            push(r);
            tseq.push_back(std::move(r));
        }
        push(decay_report(tseq));
    }

    TimeCheckConfig tc;
    tc.grid = time_grid_from_config(cfg);
    tc.pad = cfg.pad;
    tc.bie_nodes = cfg.bie_nodes;
    tc.threads = cfg.threads;
    tc.scaling = KernelScaling::Matched;
    tc.threshold_free = base.hk_time_free;
    tc.threshold_obstacle = base.hk_time_scene;

    Scene background = scene;
    background.obstacles.clear();
    push(check_hk_time(background, cfg.pulse, cfg.source_radius, cfg.source_count, 0.0, cfg.seed, tc));
    if (!scene.obstacles.empty())
        push(check_hk_time(scene, cfg.pulse, cfg.source_radius, cfg.source_count, cfg.source_beta, cfg.seed, tc));
    return out;
}

} // namespace tdlsm
