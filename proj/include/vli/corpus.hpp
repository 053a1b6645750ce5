#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vli/geometry.hpp"
#include "vli/grammar.hpp"
#include "vli/markup.hpp"

namespace vli::corpus {

// Structured gold answer: answer strings for VQA, boxes for REC, grounded
// markup for grounding tasks.
struct GoldAnswers {
    std::vector<std::string> answers;
    bool operator==(const GoldAnswers&) const = default;
};
struct GoldBoxes {
    std::vector<geometry::NormBox> boxes;
    bool operator==(const GoldBoxes&) const = default;
};
struct GoldGrounded {
    std::string markup;
    bool operator==(const GoldGrounded&) const = default;
};
using Gold = std::variant<std::monostate, GoldAnswers, GoldBoxes, GoldGrounded>;

// One training/eval example. The instruction is stored with its identifier
// token inline (readable JSONL); compilation strips a leading token that
// matches `task` before rendering the full prompt.
struct CorpusRecord {
    std::string id;
    grammar::TaskId task = grammar::TaskId::None;
    std::string image_ref;
    int image_width = 0;
    int image_height = 0;
    std::string instruction;
    std::string target;
    Gold gold;
    std::string source_dataset;
    bool weak_label = false;

    bool operator==(const CorpusRecord&) const = default;
};

struct ConversationTurn {
    grammar::TaskId task = grammar::TaskId::None;
    std::string instruction;
    std::string target;
    bool operator==(const ConversationTurn&) const = default;
};

// Multi-round conversation built by mixing tasks on one image.
struct ConversationRecord {
    std::string id;
    std::string image_ref;
    int image_width = 0;
    int image_height = 0;
    std::vector<ConversationTurn> turns;
    bool operator==(const ConversationRecord&) const = default;
};

// JSONL codec. Keys: id, task, image, image_size, instruction, target, gold,
// source, weak. Throws ParseError/ValidationError on bad lines.
std::string to_json_line(const CorpusRecord& r);
CorpusRecord record_from_json(const std::string& line);
std::string to_json_line(const ConversationRecord& r);
ConversationRecord conversation_from_json(const std::string& line);

// instruction = REC template over the phrase, target = serialized normalized
// box, task = Refer. Geometry errors propagate.
CorpusRecord make_rec_record(const std::string& id, const std::string& phrase,
                             const geometry::PixelBox& box, const std::string& image_ref,
                             int width, int height, const std::string& source_dataset);

// Default REG instruction; the {box} hole takes the serialized box.
inline constexpr std::string_view kDefaultRegTemplate =
    "[identify] what is in this location {box}";

// REC -> REG: the box moves into the instruction, the phrase becomes the
// target, task flips to Identify, id gains a "-reg" suffix. Requires exactly
// one gold box.
CorpusRecord invert_to_reg(const CorpusRecord& rec,
                           std::string_view reg_template = kDefaultRegTemplate);

// Keeps captions with at least `min_phrases` grounded spans, order preserved.
std::vector<markup::GroundedText> select_grounded_captions(
    const std::vector<markup::GroundedText>& captions, std::size_t min_phrases = 5);

enum class DetectionMode { CaptionToPhrases, PhraseToPhrase };

// caption->phrases: one record, instruction "[detection] " + plain caption,
// target the grounded string. phrase->phrase: one record per span.
std::vector<CorpusRecord> make_detection_records(const markup::GroundedText& g,
                                                 DetectionMode mode,
                                                 const std::string& id_prefix,
                                                 const std::string& image_ref, int width,
                                                 int height,
                                                 const std::string& source_dataset);

struct MultiRoundResult {
    std::vector<ConversationRecord> conversations;
    std::vector<CorpusRecord> leftovers;  // records not folded into any conversation
};

// Groups records that share an image_ref across distinct tasks into seeded,
// deterministic multi-round conversations of up to turns_per_conv turns.
// Every source record is used at most once; groups that cannot yield a
// >=2-turn distinct-task conversation pass through as leftovers.
MultiRoundResult build_multiround(const std::vector<CorpusRecord>& records,
                                  std::size_t turns_per_conv, std::uint64_t seed);

}  // namespace vli::corpus
