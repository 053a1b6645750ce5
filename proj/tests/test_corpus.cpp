#include <doctest.h>

#include <set>

#include "vli/corpus.hpp"

using namespace vli;
using namespace vli::corpus;
using vli::grammar::TaskId;

namespace {

CorpusRecord sample_record(const std::string& id, TaskId task,
                           const std::string& image = "img/1.jpg") {
    CorpusRecord r;
    r.id = id;
    r.task = task;
    r.image_ref = image;
    r.image_width = 448;
    r.image_height = 448;
    r.instruction = std::string(grammar::surface(task)) + " do something";
    if (task == TaskId::None) r.instruction = "do something";
    r.target = "answer for " + id;
    r.source_dataset = "fixture";
    return r;
}

}  // namespace

TEST_CASE("make_rec_record composes template, codec, and normalization") {
    auto r = make_rec_record("r1", "person wearing a red jacket",
                             {112, 112, 336, 336}, "img.jpg", 448, 448, "RefCOCO");
    CHECK(r.task == TaskId::Refer);
    CHECK(r.instruction ==
          "[refer] give me the location of person wearing a red jacket");
    CHECK(r.target == "{<25><25><75><75>}");
    const auto& gb = std::get<GoldBoxes>(r.gold);
    REQUIRE(gb.boxes.size() == 1);
    CHECK(gb.boxes[0] == geometry::NormBox{25, 25, 75, 75});
}

TEST_CASE("make_rec_record handles degenerate point boxes") {
    auto r = make_rec_record("r2", "a point", {224, 224, 224, 224}, "img.jpg",
                             448, 448, "RefCOCO");
    CHECK(r.target == "{<50><50><50><50>}");
}

TEST_CASE("invert_to_reg swaps phrase and box") {
    auto rec = make_rec_record("r1", "red jacket", {112, 112, 336, 336}, "img.jpg",
                               448, 448, "RefCOCO");
    auto reg = invert_to_reg(rec);
    CHECK(reg.task == TaskId::Identify);
    CHECK(reg.id == "r1-reg");
    CHECK(reg.instruction == "[identify] what is in this location {<25><25><75><75>}");
    CHECK(reg.target == "red jacket");
}

TEST_CASE("REG inversion recovers the original payload when applied twice") {
    auto rec = make_rec_record("r1", "red jacket", {112, 112, 336, 336}, "img.jpg",
                               448, 448, "RefCOCO");
    auto reg = invert_to_reg(rec);
    // re-invert by rebuilding the REC record from the REG payload
    auto box = std::get<GoldBoxes>(rec.gold).boxes[0];
    auto rec2 = make_rec_record("r1", reg.target,
                                geometry::denormalize_box(box, 448, 448), "img.jpg",
                                448, 448, "RefCOCO");
    CHECK(rec2.instruction == rec.instruction);
    CHECK(rec2.target == rec.target);
}

TEST_CASE("invert_to_reg rejects non-REC and multi-box records") {
    auto rec = sample_record("x", TaskId::Vqa);
    CHECK_THROWS_AS(invert_to_reg(rec), ValidationError);

    auto multi = make_rec_record("r1", "cats", {0, 0, 100, 100}, "img.jpg", 448,
                                 448, "RefCOCO");
    std::get<GoldBoxes>(multi.gold).boxes.push_back({0, 0, 10, 10});
    CHECK_THROWS_AS(invert_to_reg(multi), ValidationError);
}

TEST_CASE("grounded caption selection keeps >= 5 spans, order preserved") {
    auto make = [](int spans) {
        markup::GroundedText g;
        for (int i = 0; i < spans; ++i) {
            markup::GroundedSpan s;
            s.phrase = "p" + std::to_string(i);
            s.boxes.push_back({0, 0, 10, 10});
            g.segments.emplace_back(std::move(s));
        }
        return g;
    };
    std::vector<markup::GroundedText> captions{make(4), make(5), make(6), make(2)};
    auto kept = select_grounded_captions(captions);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].span_count() == 5);
    CHECK(kept[1].span_count() == 6);
    CHECK(select_grounded_captions({}).empty());
}

TEST_CASE("detection records: caption mode emits one record") {
    auto g = markup::parse_grounded(
        "a <p>wooden table</p>{<20><30><80><70>} in the center of the room");
    auto recs = make_detection_records(g, DetectionMode::CaptionToPhrases, "d1",
                                       "img.jpg", 448, 448, "Flickr30k");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].task == TaskId::Detection);
    CHECK(recs[0].instruction ==
          "[detection] a wooden table in the center of the room");
    CHECK(recs[0].target ==
          "a <p>wooden table</p>{<20><30><80><70>} in the center of the room");
}

TEST_CASE("detection records: phrase mode emits one record per span") {
    auto g = markup::parse_grounded(
        "<p>cat</p>{<0><0><40><40>} and <p>dog</p>{<50><50><90><90>}{<1><1><2><2>}");
    auto recs = make_detection_records(g, DetectionMode::PhraseToPhrase, "d2",
                                       "img.jpg", 448, 448, "Flickr30k");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].instruction == "[detection] cat");
    CHECK(recs[0].target == "<p>cat</p>{<0><0><40><40>}");
    CHECK(recs[1].target == "<p>dog</p>{<50><50><90><90>}{<1><1><2><2>}");

    // union of emitted pairs equals extract_pairs of the input
    std::multiset<std::string> emitted, expected;
    for (const auto& r : recs) {
        for (const auto& [phrase, box] : markup::extract_pairs(
                 markup::parse_grounded(r.target))) {
            emitted.insert(phrase + geometry::serialize_box(box));
        }
    }
    for (const auto& [phrase, box] : markup::extract_pairs(g)) {
        expected.insert(phrase + geometry::serialize_box(box));
    }
    CHECK(emitted == expected);
}

TEST_CASE("detection records reject spanless input") {
    auto g = markup::parse_grounded("nothing grounded");
    CHECK_THROWS_AS(make_detection_records(g, DetectionMode::CaptionToPhrases, "d",
                                           "i", 1, 1, "s"),
                    ValidationError);
}

TEST_CASE("build_multiround groups distinct tasks on one image") {
    std::vector<CorpusRecord> records{sample_record("a", TaskId::Vqa),
                                      sample_record("b", TaskId::Refer),
                                      sample_record("c", TaskId::Caption)};
    auto result = build_multiround(records, 3, 99);
    REQUIRE(result.conversations.size() == 1);
    CHECK(result.conversations[0].turns.size() == 3);
    CHECK(result.leftovers.empty());
}

TEST_CASE("records on distinct images yield no conversations") {
    std::vector<CorpusRecord> records{sample_record("a", TaskId::Vqa, "img/1.jpg"),
                                      sample_record("b", TaskId::Refer, "img/2.jpg")};
    auto result = build_multiround(records, 2, 1);
    CHECK(result.conversations.empty());
    CHECK(result.leftovers.size() == 2);
}

TEST_CASE("same-task records on one image do not converse") {
    std::vector<CorpusRecord> records{sample_record("a", TaskId::Vqa),
                                      sample_record("b", TaskId::Vqa)};
    auto result = build_multiround(records, 2, 1);
    CHECK(result.conversations.empty());
    CHECK(result.leftovers.size() == 2);
}

TEST_CASE("build_multiround is deterministic and conserves records") {
    std::vector<CorpusRecord> records;
    const char* images[] = {"i1", "i2", "i3"};
    TaskId tasks[] = {TaskId::Vqa, TaskId::Refer, TaskId::Caption,
                      TaskId::Identify, TaskId::Detection};
    int n = 0;
    for (const char* img : images) {
        for (TaskId t : tasks) {
            records.push_back(sample_record("r" + std::to_string(n++), t, img));
        }
    }
    auto a = build_multiround(records, 3, 1234);
    auto b = build_multiround(records, 3, 1234);
    CHECK(a.conversations == b.conversations);
    CHECK(a.leftovers == b.leftovers);

    auto c = build_multiround(records, 3, 5678);
    std::size_t turns_a = 0, turns_c = 0;
    for (const auto& conv : a.conversations) turns_a += conv.turns.size();
    for (const auto& conv : c.conversations) turns_c += conv.turns.size();
    CHECK(turns_a + a.leftovers.size() == records.size());
    CHECK(turns_c + c.leftovers.size() == records.size());

    // every turn appears verbatim in some input record
    for (const auto& conv : a.conversations) {
        for (const auto& t : conv.turns) {
            bool found = false;
            for (const auto& r : records) {
                if (r.instruction == t.instruction && r.target == t.target &&
                    r.task == t.task) {
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("JSONL codec round-trips records") {
    auto rec = make_rec_record("r1", "red jacket", {112, 112, 336, 336}, "img.jpg",
                               448, 448, "RefCOCO");
    CHECK(record_from_json(to_json_line(rec)) == rec);

    CorpusRecord vqa = sample_record("v1", TaskId::Vqa);
    vqa.gold = GoldAnswers{{"cat", "kitten"}};
    CHECK(record_from_json(to_json_line(vqa)) == vqa);

    CorpusRecord det = sample_record("g1", TaskId::Detection);
    det.gold = GoldGrounded{"<p>cat</p>{<0><0><1><1>}"};
    CHECK(record_from_json(to_json_line(det)) == det);

    CHECK_THROWS_AS(record_from_json("not json"), ParseError);
    CHECK_THROWS_AS(record_from_json(R"({"id":"x","task":"[bogus]","instruction":"i"})"),
                    ValidationError);
}

TEST_CASE("conversation JSONL codec round-trips") {
    ConversationRecord conv;
    conv.id = "c1";
    conv.image_ref = "img.jpg";
    conv.image_width = 448;
    conv.image_height = 448;
    conv.turns = {{TaskId::Vqa, "[vqa] q1", "a1"}, {TaskId::Refer, "[refer] q2", "a2"}};
    CHECK(conversation_from_json(to_json_line(conv)) == conv);
}
