#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "vli/error.hpp"

namespace vli::geometry {

// Axis-aligned box in real pixel coordinates. Image dimensions are passed at
// call sites, not stored.
struct PixelBox {
    double x_left = 0.0;
    double y_top = 0.0;
    double x_right = 0.0;
    double y_bottom = 0.0;

    bool ordered() const { return x_left <= x_right && y_top <= y_bottom; }
};

// Box on the normalized [0,100] integer grid. The unit of all spatial I/O.
struct NormBox {
    int x_left = 0;
    int y_top = 0;
    int x_right = 0;
    int y_bottom = 0;

    bool operator==(const NormBox&) const = default;
};

// True iff all coordinates are in [0,100] and the corners are ordered.
bool is_valid(const NormBox& b);

// Throws ValidationError if !is_valid(b).
void check_valid(const NormBox& b);

enum class Rounding { HalfUp, Floor, Ceil };

// Maps pixel coordinates onto the [0,100] grid: round(coord/dim * 100),
// clamped, corners re-ordered if rounding inverts a degenerate pair.
// Throws ValidationError if the box lies outside [0,width]x[0,height].
NormBox normalize_box(const PixelBox& b, int width, int height,
                      Rounding mode = Rounding::HalfUp);

// Exact inverse scaling: coord/100 * dim as reals.
PixelBox denormalize_box(const NormBox& n, int width, int height);

// Canonical wire form "{<a><b><c><d>}": bare decimal integers, no whitespace,
// no zero padding.
std::string serialize_box(const NormBox& n);

// Strict inverse of serialize_box. Rejects anything that is not the canonical
// form, with a ParseError carrying the byte offset.
NormBox parse_box(std::string_view s);

// Parses one canonical box group starting exactly at `pos`. On success returns
// the box and sets `end` to one past the closing '}'. Offsets in errors are
// absolute within `s`.
NormBox parse_box_at(std::string_view s, std::size_t pos, std::size_t& end);

// Intersection-over-union of the boxes as continuous rectangles. Zero-area
// union scores 0 (degenerate boxes never match anything, themselves included).
double iou(const NormBox& a, const NormBox& b);

}  // namespace vli::geometry
