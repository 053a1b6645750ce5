#include "vli/tensorops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace vli::tensorops {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

void TokenGrid::check() const {
    if (h < 1 || w < 1 || d < 1) {
        throw ValidationError("token grid dims must be positive");
    }
    if (data.size() != static_cast<std::size_t>(h * w * d)) {
        throw ValidationError("token grid data length != h*w*d");
    }
}

void PosTable::check() const {
    if (side < 1 || d < 1) {
        throw ValidationError("positional table dims must be positive");
    }
    if (data.size() != static_cast<std::size_t>(side * side * d)) {
        throw ValidationError("positional table data length != side*side*d");
    }
    if (cls && cls->size() != static_cast<std::size_t>(d)) {
        throw ValidationError("class-token vector dimension mismatch");
    }
}

TokenGrid group_tokens(const TokenGrid& g, GroupMode mode) {
    g.check();
    const std::int64_t n = g.h * g.w;
    if (mode == GroupMode::RowMajor4) {
        if (n % 4 != 0) {
            throw ValidationError("row-major-4 grouping needs h*w divisible by 4");
        }
    } else {
        if (g.h % 2 != 0 || g.w % 2 != 0) {
            throw ValidationError("block-2x2 grouping needs even h and w");
        }
    }

    TokenGrid out;
    out.d = 4 * g.d;
    out.data.resize(static_cast<std::size_t>(n / 4) * out.d);

    if (mode == GroupMode::RowMajor4) {
        // Pure reinterpretation: consecutive quadruples are already adjacent.
        out.h = 1;
        out.w = n / 4;
        std::copy(g.data.begin(), g.data.end(), out.data.begin());
        return out;
    }

    out.h = g.h / 2;
    out.w = g.w / 2;
    const std::int64_t d = g.d;
    for (std::int64_t by = 0; by < out.h; ++by) {
        for (std::int64_t bx = 0; bx < out.w; ++bx) {
            double* dst = out.token(by * out.w + bx);
            const std::int64_t corners[4] = {
                (2 * by) * g.w + 2 * bx,     (2 * by) * g.w + 2 * bx + 1,
                (2 * by + 1) * g.w + 2 * bx, (2 * by + 1) * g.w + 2 * bx + 1};
            for (int k = 0; k < 4; ++k) {
                std::memcpy(dst + k * d, g.token(corners[k]), sizeof(double) * d);
            }
        }
    }
    return out;
}

PosTable interpolate_pos(const PosTable& p, std::int64_t target_side) {
    p.check();
    if (target_side < 1) {
        throw ValidationError("target side must be >= 1");
    }
    if (target_side == p.side) {
        return p;  // exact identity
    }

    PosTable out;
    out.side = target_side;
    out.d = p.d;
    out.cls = p.cls;
    out.data.resize(static_cast<std::size_t>(target_side) * target_side * p.d);

    const std::int64_t s = p.side;
    // align-corners: source = target * (s-1)/(t-1); a 1-point target samples
    // the grid center.
    auto src_coord = [&](std::int64_t t) -> double {
        if (target_side == 1) return (s - 1) / 2.0;
        return static_cast<double>(t) * (s - 1) / static_cast<double>(target_side - 1);
    };

    for (std::int64_t ty = 0; ty < target_side; ++ty) {
        double y = src_coord(ty);
        std::int64_t y0 = std::min(static_cast<std::int64_t>(std::floor(y)), s - 1);
        std::int64_t y1 = std::min(y0 + 1, s - 1);
        double fy = y - y0;
        for (std::int64_t tx = 0; tx < target_side; ++tx) {
            double x = src_coord(tx);
            std::int64_t x0 = std::min(static_cast<std::int64_t>(std::floor(x)), s - 1);
            std::int64_t x1 = std::min(x0 + 1, s - 1);
            double fx = x - x0;

            const double* v00 = p.data.data() + (y0 * s + x0) * p.d;
            const double* v01 = p.data.data() + (y0 * s + x1) * p.d;
            const double* v10 = p.data.data() + (y1 * s + x0) * p.d;
            const double* v11 = p.data.data() + (y1 * s + x1) * p.d;
            double* dst = out.data.data() + (ty * target_side + tx) * p.d;
            for (std::int64_t c = 0; c < p.d; ++c) {
                double top = v00[c] + (v01[c] - v00[c]) * fx;
                double bottom = v10[c] + (v11[c] - v10[c]) * fx;
                dst[c] = top + (bottom - top) * fy;
            }
        }
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'V', 'L', 'T', 'E', 'N', 'S', '0', '1'};

void write_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::int64_t read_i64(std::istream& in) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void write_grid(std::ostream& out, const TokenGrid& g) {
    g.check();
    out.write(kMagic, sizeof kMagic);
    write_i64(out, g.h);
    write_i64(out, g.w);
    write_i64(out, g.d);
    out.write(reinterpret_cast<const char*>(g.data.data()),
              static_cast<std::streamsize>(g.data.size() * sizeof(double)));
    if (!out) throw Error("write failed");
}

TokenGrid read_grid(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ParseError("bad tensor container magic", 0);
    }
    TokenGrid g;
    g.h = read_i64(in);
    g.w = read_i64(in);
    g.d = read_i64(in);
    if (g.h < 1 || g.w < 1 || g.d < 1) {
        throw ParseError("bad tensor container dims", 8);
    }
    g.data.resize(static_cast<std::size_t>(g.h * g.w * g.d));
    in.read(reinterpret_cast<char*>(g.data.data()),
            static_cast<std::streamsize>(g.data.size() * sizeof(double)));
    if (!in) throw ParseError("truncated tensor container", 32);
    return g;
}

void write_grid_file(const std::string& path, const TokenGrid& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    write_grid(out, g);
}

TokenGrid read_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    return read_grid(in);
}

std::string grid_to_json(const TokenGrid& g) {
    g.check();
    nlohmann::json j{{"h", g.h}, {"w", g.w}, {"d", g.d}, {"data", g.data}};
    return j.dump();
}

TokenGrid grid_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid JSON: ") + e.what(), 0);
    }
    TokenGrid g;
    g.h = j.at("h").get<std::int64_t>();
    g.w = j.at("w").get<std::int64_t>();
    g.d = j.at("d").get<std::int64_t>();
    g.data = j.at("data").get<std::vector<double>>();
    g.check();
    return g;
}

}  // namespace vli::tensorops
