#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vli/geometry.hpp"

namespace vli::markup {

// One grounded phrase: <p>phrase</p> followed by one or more box groups.
struct GroundedSpan {
    std::string phrase;
    std::vector<geometry::NormBox> boxes;
    std::size_t begin = 0;  // offset of "<p>" in the source
    std::size_t end = 0;    // one past the last box group

    bool operator==(const GroundedSpan&) const = default;
};

struct PlainText {
    std::string text;
    bool operator==(const PlainText&) const = default;
};

using Segment = std::variant<PlainText, GroundedSpan>;

// Lossless parse of a grounded caption: concatenating segment surface forms
// reproduces the source byte-for-byte.
struct GroundedText {
    std::vector<Segment> segments;

    std::size_t span_count() const;
    bool operator==(const GroundedText&) const = default;
};

// Strict parser. Every <p>…</p> must be followed by at least one canonical
// box group; nesting is rejected. ParseError offsets are byte positions.
GroundedText parse_grounded(std::string_view s);

// Scorer-mode parser: any parse failure yields the whole input as one
// PlainText segment (malformed model output scores zero, never crashes).
GroundedText parse_grounded_lenient(std::string_view s);

// Exact inverse of parse_grounded.
std::string emit_grounded(const GroundedText& g);

// The plain caption: spans contribute only their phrase.
std::string strip_grounding(const GroundedText& g);

// Flattens spans into (phrase, box) pairs in document order; a span with k
// boxes yields k pairs.
std::vector<std::pair<std::string, geometry::NormBox>> extract_pairs(const GroundedText& g);

}  // namespace vli::markup
