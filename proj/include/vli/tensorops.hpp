#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vli/error.hpp"

namespace vli::tensorops {

// Row-major h*w grid of d-dimensional embedding vectors.
struct TokenGrid {
    std::int64_t h = 0;
    std::int64_t w = 0;
    std::int64_t d = 0;
    std::vector<double> data;  // length h*w*d, token-major

    double* token(std::int64_t i) { return data.data() + i * d; }
    const double* token(std::int64_t i) const { return data.data() + i * d; }

    void check() const;
};

// Square grid of positional vectors; the class-token position, when present,
// bypasses interpolation.
struct PosTable {
    std::int64_t side = 0;
    std::int64_t d = 0;
    std::vector<double> data;  // length side*side*d
    std::optional<std::vector<double>> cls;

    void check() const;
};

enum class GroupMode { RowMajor4, Block2x2 };

// Concatenates 4 adjacent tokens into one: h*w/4 tokens of dimension 4d.
// RowMajor4 takes sequence-consecutive quadruples; Block2x2 takes 2x2 spatial
// blocks (row-major within the block, blocks in row-major order).
TokenGrid group_tokens(const TokenGrid& g, GroupMode mode = GroupMode::RowMajor4);

// Align-corners bilinear resampling of the positional grid to
// target_side x target_side, per channel. target_side == side is an exact
// identity; target_side == 1 samples the grid center.
PosTable interpolate_pos(const PosTable& p, std::int64_t target_side);

// Binary container: magic "VLTENS01", then h, w, d as little-endian int64,
// then h*w*d little-endian doubles.
void write_grid(std::ostream& out, const TokenGrid& g);
TokenGrid read_grid(std::istream& in);
void write_grid_file(const std::string& path, const TokenGrid& g);
TokenGrid read_grid_file(const std::string& path);

// JSON debug form for small fixtures: {"h":…,"w":…,"d":…,"data":[…]}.
std::string grid_to_json(const TokenGrid& g);
TokenGrid grid_from_json(const std::string& text);

}  // namespace vli::tensorops
