#include "vli/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vli::geometry {

bool is_valid(const NormBox& b) {
    auto in_range = [](int v) { return v >= 0 && v <= 100; };
    return in_range(b.x_left) && in_range(b.y_top) && in_range(b.x_right) &&
           in_range(b.y_bottom) && b.x_left <= b.x_right && b.y_top <= b.y_bottom;
}

void check_valid(const NormBox& b) {
    if (!is_valid(b)) {
        throw ValidationError("invalid NormBox: coordinates must be ordered and in [0,100]");
    }
}

namespace {

int scale_coord(double coord, int dim, Rounding mode) {
    double v = coord * 100.0 / static_cast<double>(dim);
    double r = 0.0;
    switch (mode) {
        case Rounding::HalfUp: r = std::floor(v + 0.5); break;
        case Rounding::Floor: r = std::floor(v); break;
        case Rounding::Ceil: r = std::ceil(v); break;
    }
    return static_cast<int>(std::clamp(r, 0.0, 100.0));
}

void check_in_image(double coord, double dim, const char* name) {
    if (coord < 0.0 || coord > dim) {
        throw ValidationError(std::string("box coordinate ") + name + " = " +
                              std::to_string(coord) + " outside image [0," +
                              std::to_string(static_cast<long long>(dim)) + "]");
    }
}

}  // namespace

NormBox normalize_box(const PixelBox& b, int width, int height, Rounding mode) {
    if (width < 1 || height < 1) {
        throw ValidationError("image dimensions must be >= 1");
    }
    if (!b.ordered()) {
        throw ValidationError("pixel box corners are not ordered");
    }
    check_in_image(b.x_left, width, "x_left");
    check_in_image(b.x_right, width, "x_right");
    check_in_image(b.y_top, height, "y_top");
    check_in_image(b.y_bottom, height, "y_bottom");

    NormBox n;
    n.x_left = scale_coord(b.x_left, width, mode);
    n.x_right = scale_coord(b.x_right, width, mode);
    n.y_top = scale_coord(b.y_top, height, mode);
    n.y_bottom = scale_coord(b.y_bottom, height, mode);
    // Rounding can invert an almost-degenerate pair only by one step.
    if (n.x_left > n.x_right) std::swap(n.x_left, n.x_right);
    if (n.y_top > n.y_bottom) std::swap(n.y_top, n.y_bottom);
    return n;
}

PixelBox denormalize_box(const NormBox& n, int width, int height) {
    check_valid(n);
    if (width < 1 || height < 1) {
        throw ValidationError("image dimensions must be >= 1");
    }
    PixelBox p;
    p.x_left = n.x_left / 100.0 * width;
    p.x_right = n.x_right / 100.0 * width;
    p.y_top = n.y_top / 100.0 * height;
    p.y_bottom = n.y_bottom / 100.0 * height;
    return p;
}

std::string serialize_box(const NormBox& n) {
    check_valid(n);
    std::string out;
    out.reserve(20);
    out += "{<";
    out += std::to_string(n.x_left);
    out += "><";
    out += std::to_string(n.y_top);
    out += "><";
    out += std::to_string(n.x_right);
    out += "><";
    out += std::to_string(n.y_bottom);
    out += ">}";
    return out;
}

namespace {

// Reads a bare decimal integer in [0,100]: "0" or a nonzero digit followed by
// more digits, no sign, no padding.
int parse_coord(std::string_view s, std::size_t& pos) {
    std::size_t start = pos;
    if (pos >= s.size() || s[pos] < '0' || s[pos] > '9') {
        throw ParseError("expected digit", pos);
    }
    if (s[pos] == '0') {
        ++pos;
        if (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            throw ParseError("leading zero in coordinate", start);
        }
        return 0;
    }
    long value = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        value = value * 10 + (s[pos] - '0');
        if (value > 100) {
            throw ParseError("coordinate out of range [0,100]", start);
        }
        ++pos;
    }
    return static_cast<int>(value);
}

void expect(std::string_view s, std::size_t& pos, char c) {
    if (pos >= s.size() || s[pos] != c) {
        throw ParseError(std::string("expected '") + c + "'", pos);
    }
    ++pos;
}

}  // namespace

NormBox parse_box_at(std::string_view s, std::size_t pos, std::size_t& end) {
    expect(s, pos, '{');
    int coords[4];
    for (int& c : coords) {
        expect(s, pos, '<');
        c = parse_coord(s, pos);
        expect(s, pos, '>');
    }
    expect(s, pos, '}');
    NormBox n{coords[0], coords[1], coords[2], coords[3]};
    if (n.x_left > n.x_right || n.y_top > n.y_bottom) {
        throw ParseError("box coordinates not ordered", pos);
    }
    end = pos;
    return n;
}

NormBox parse_box(std::string_view s) {
    std::size_t end = 0;
    NormBox n = parse_box_at(s, 0, end);
    if (end != s.size()) {
        throw ParseError("trailing garbage after box", end);
    }
    return n;
}

double iou(const NormBox& a, const NormBox& b) {
    check_valid(a);
    check_valid(b);
    auto area = [](const NormBox& x) {
        return static_cast<double>(x.x_right - x.x_left) *
               static_cast<double>(x.y_bottom - x.y_top);
    };
    double iw = std::min(a.x_right, b.x_right) - std::max(a.x_left, b.x_left);
    double ih = std::min(a.y_bottom, b.y_bottom) - std::max(a.y_top, b.y_top);
    double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    double uni = area(a) + area(b) - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace vli::geometry
