#include <doctest.h>

#include <random>

#include "vli/markup.hpp"

using namespace vli;
using namespace vli::markup;
using vli::geometry::NormBox;

namespace {

const char* kPaperCaption =
    "a <p>wooden table</p>{<20><30><80><70>} in the center of the room";

NormBox random_box(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> coord(0, 100);
    NormBox b{coord(gen), coord(gen), coord(gen), coord(gen)};
    if (b.x_left > b.x_right) std::swap(b.x_left, b.x_right);
    if (b.y_top > b.y_bottom) std::swap(b.y_top, b.y_bottom);
    return b;
}

GroundedText random_grounded(std::mt19937_64& gen) {
    static const char* plains[] = {"a ", " in the room", " next to ", "photo of ",
                                   " and ", " on the grass"};
    static const char* phrases[] = {"wooden table", "red jacket", "two cats",
                                    "person", "traffic light"};
    std::uniform_int_distribution<int> n_segs(1, 6);
    std::uniform_int_distribution<std::size_t> pick_plain(0, std::size(plains) - 1);
    std::uniform_int_distribution<std::size_t> pick_phrase(0, std::size(phrases) - 1);
    std::uniform_int_distribution<int> n_boxes(1, 3);
    std::uniform_int_distribution<int> coin(0, 1);

    GroundedText g;
    bool last_plain = false;
    int n = n_segs(gen);
    for (int i = 0; i < n; ++i) {
        if (!last_plain && coin(gen)) {
            g.segments.emplace_back(PlainText{plains[pick_plain(gen)]});
            last_plain = true;
        } else {
            GroundedSpan s;
            s.phrase = phrases[pick_phrase(gen)];
            int k = n_boxes(gen);
            for (int j = 0; j < k; ++j) s.boxes.push_back(random_box(gen));
            g.segments.emplace_back(std::move(s));
            last_plain = false;
        }
    }
    return g;
}

// Spans carry char offsets after a parse; clear them for structural equality
// with generated values.
GroundedText without_offsets(GroundedText g) {
    for (auto& seg : g.segments) {
        if (auto* s = std::get_if<GroundedSpan>(&seg)) {
            s->begin = 0;
            s->end = 0;
        }
    }
    return g;
}

}  // namespace

TEST_CASE("parse_grounded handles the grounded caption example") {
    GroundedText g = parse_grounded(kPaperCaption);
    REQUIRE(g.segments.size() == 3);
    CHECK(std::get<PlainText>(g.segments[0]).text == "a ");
    const auto& span = std::get<GroundedSpan>(g.segments[1]);
    CHECK(span.phrase == "wooden table");
    REQUIRE(span.boxes.size() == 1);
    CHECK(span.boxes[0] == NormBox{20, 30, 80, 70});
    CHECK(std::get<PlainText>(g.segments[2]).text == " in the center of the room");
    CHECK(span.begin == 2);
}

TEST_CASE("plain text parses to a single segment") {
    GroundedText g = parse_grounded("no markup here");
    REQUIRE(g.segments.size() == 1);
    CHECK(std::get<PlainText>(g.segments[0]).text == "no markup here");
    CHECK(g.span_count() == 0);
}

TEST_CASE("a phrase may carry multiple boxes") {
    GroundedText g = parse_grounded("<p>two cats</p>{<0><0><40><40>}{<60><60><100><100>}");
    REQUIRE(g.segments.size() == 1);
    const auto& span = std::get<GroundedSpan>(g.segments[0]);
    CHECK(span.phrase == "two cats");
    REQUIRE(span.boxes.size() == 2);
    CHECK(emit_grounded(g) == "<p>two cats</p>{<0><0><40><40>}{<60><60><100><100>}");
}

TEST_CASE("parse_grounded rejects malformed markup with offsets") {
    CHECK_THROWS_AS(parse_grounded("a <p>cat in the room"), ParseError);
    CHECK_THROWS_AS(parse_grounded("a cat</p> here"), ParseError);
    CHECK_THROWS_AS(parse_grounded("<p>cat</p> no box"), ParseError);
    CHECK_THROWS_AS(parse_grounded("<p>a <p>cat</p></p>{<1><1><2><2>}"), ParseError);
    CHECK_THROWS_AS(parse_grounded("<p>cat</p>{<1><1><200><2>}"), ParseError);
    CHECK_THROWS_AS(parse_grounded("<p></p>{<1><1><2><2>}"), ParseError);
    try {
        parse_grounded("ab cat</p> here");
    } catch (const ParseError& e) {
        CHECK(e.offset == 6);
    }
}

TEST_CASE("lenient mode turns failures into spanless text") {
    GroundedText g = parse_grounded_lenient("a <p>cat with no box");
    CHECK(g.span_count() == 0);
    CHECK(strip_grounding(g) == "a <p>cat with no box");
    CHECK(parse_grounded_lenient(kPaperCaption).span_count() == 1);
}

TEST_CASE("emit is the exact inverse of parse") {
    CHECK(emit_grounded(parse_grounded(kPaperCaption)) == kPaperCaption);
    CHECK(emit_grounded(parse_grounded("plain")) == "plain");
}

TEST_CASE("randomized grounded text round-trips through emit and parse") {
    std::mt19937_64 gen(23);
    for (int i = 0; i < 2000; ++i) {
        GroundedText g = random_grounded(gen);
        std::string s = emit_grounded(g);
        GroundedText back = parse_grounded(s);
        CHECK(without_offsets(back) == without_offsets(g));
        CHECK(emit_grounded(back) == s);
        CHECK(back.span_count() == g.span_count());
    }
}

TEST_CASE("strip_grounding yields the plain caption") {
    CHECK(strip_grounding(parse_grounded(kPaperCaption)) ==
          "a wooden table in the center of the room");
    CHECK(strip_grounding(parse_grounded("plain text")) == "plain text");
    GroundedText two = parse_grounded("<p>cats</p>{<0><0><1><1>}{<2><2><3><3>}");
    CHECK(strip_grounding(two) == "cats");
}

TEST_CASE("extract_pairs flattens spans in document order") {
    auto pairs = extract_pairs(parse_grounded(kPaperCaption));
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first == "wooden table");
    CHECK(pairs[0].second == NormBox{20, 30, 80, 70});

    CHECK(extract_pairs(parse_grounded("nothing")).empty());

    auto two = extract_pairs(parse_grounded("<p>cats</p>{<0><0><1><1>}{<2><2><3><3>}"));
    REQUIRE(two.size() == 2);
    CHECK(two[0].first == two[1].first);
}
