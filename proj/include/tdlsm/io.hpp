#pragma once

// Persistence and rendering primitives: little-endian float64 raw arrays,
// 64-bit FNV-1a content hashes, JSON manifests, CSV export of indicator
// maps, and binary (P5) PGM heatmaps with an optional boundary overlay.
//
// Every writer is deterministic: identical inputs produce identical bytes,
// so content hashes recorded in manifests double as cache keys.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdlsm/geometry.hpp"
#include "tdlsm/inversion.hpp"

namespace tdlsm {

// ---------------------------------------------------------------------------
// Content hashing (64-bit FNV-1a).

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string hash_bytes(const void* data, std::size_t n) { return hash_hex(fnv1a64(data, n)); }

inline std::string hash_string(const std::string& s) { return hash_bytes(s.data(), s.size()); }

inline std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("hash_file: cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return hash_hex(h);
}

// ---------------------------------------------------------------------------
// Raw arrays: contiguous float64 values, little-endian byte order regardless
// of host endianness. Shape lives in the manifest, not in the file.

inline std::vector<unsigned char> encode_f64(const double* v, std::size_t n) {
    std::vector<unsigned char> bytes(8 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t u = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) bytes[8 * i + b] = static_cast<unsigned char>(u >> (8 * b));
    }
    return bytes;
}

// Writes the array and returns the content hash of the written bytes.
inline std::string write_f64(const std::filesystem::path& path, const double* v, std::size_t n) {
    const std::vector<unsigned char> bytes = encode_f64(v, n);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_f64: cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write_f64: short write to " + path.string());
    return hash_bytes(bytes.data(), bytes.size());
}

inline std::string write_f64(const std::filesystem::path& path, const std::vector<double>& v) {
    return write_f64(path, v.data(), v.size());
}

inline std::vector<double> read_f64(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_f64: cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0)
        throw std::runtime_error("read_f64: " + path.string() + " is not a whole number of float64 values");
    std::vector<double> v(bytes.size() / 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t u = 0;
        for (int b = 7; b >= 0; --b) u = (u << 8) | bytes[8 * i + b];
        v[i] = std::bit_cast<double>(u);
    }
    return v;
}

// ---------------------------------------------------------------------------
// JSON documents (manifests, configs, baselines).

inline nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_json: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_json: " + path.string() + ": " + e.what());
    }
    return j;
}

// Two-space indent, sorted keys (nlohmann objects are ordered maps), one
// trailing newline: the canonical byte form used for hashing and caching.
inline std::string json_canonical(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string save_json(const std::filesystem::path& path, const nlohmann::json& j) {
    const std::string text = json_canonical(j);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_json: cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("save_json: short write to " + path.string());
    return hash_string(text);
}

// ---------------------------------------------------------------------------
// CSV export of an indicator map: header "x,y,value", one row per grid cell
// (masked cells carry value 0), y-major to match the map's storage order.

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string map_csv_text(const IndicatorMap& map) {
    std::string text = "x,y,value\n";
    for (int iy = 0; iy < map.grid.ny; ++iy)
        for (int ix = 0; ix < map.grid.nx; ++ix) {
            const Vec2 p = map.grid.point(ix, iy);
            text += format_g17(p.x);
            text += ',';
            text += format_g17(p.y);
            text += ',';
            text += format_g17(map.at(ix, iy));
            text += '\n';
        }
    return text;
}

inline std::string write_map_csv(const std::filesystem::path& path, const IndicatorMap& map) {
    const std::string text = map_csv_text(map);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_map_csv: cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write_map_csv: short write to " + path.string());
    return hash_string(text);
}

// ---------------------------------------------------------------------------
// Grayscale heatmap. Pixel (col, row) maps to grid cell (col, ny-1-row), so
// row 0 is the top of the picture (largest y). Unmasked cells render as
// round(255 * value / max); masked cells are 0. An optional overlay paints
// the true boundary curves white for reference figures.

struct HeatmapImage {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> pixels; // row-major, top row first
    // World-to-pixel transform: x = origin.x + col * spacing,
    // y = origin.y - row * spacing, with origin at pixel (0, 0).
    Vec2 origin{};
    double spacing = 0.0;

    unsigned char at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

inline HeatmapImage rasterize_indicator(const IndicatorMap& map, const std::vector<BoundaryCurve>& overlay = {}) {
    const SamplingGrid& g = map.grid;
    HeatmapImage img;
    img.width = g.nx;
    img.height = g.ny;
    img.spacing = g.h;
    img.origin = g.point(0, g.ny - 1);
    img.pixels.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
    const double scale = map.max_value > 0.0 ? 255.0 / map.max_value : 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            if (!g.unmasked(ix, iy)) continue;
            const int row = g.ny - 1 - iy;
            const double v = std::lround(scale * map.at(ix, iy));
            img.pixels[static_cast<std::size_t>(row) * g.nx + ix] =
                static_cast<unsigned char>(std::min(255.0, std::max(0.0, v)));
        }
    const Vec2 lo = g.point(0, 0);
    for (const BoundaryCurve& curve : overlay) {
        const int samples = 4096;
        for (int s = 0; s < samples; ++s) {
            const Vec2 p = curve.point(2.0 * pi * s / samples);
            const int ix = static_cast<int>(std::lround((p.x - lo.x) / g.h));
            const int iy = static_cast<int>(std::lround((p.y - lo.y) / g.h));
            if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny) continue;
            const int row = g.ny - 1 - iy;
            img.pixels[static_cast<std::size_t>(row) * g.nx + ix] = 255;
        }
    }
    return img;
}

inline std::string write_pgm(const std::filesystem::path& path, const HeatmapImage& img) {
    if (img.width < 1 || img.height < 1) throw std::invalid_argument("write_pgm: empty image");
    std::string text = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    text.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write_pgm: short write to " + path.string());
    return hash_string(text);
}

} // namespace tdlsm
