#include "vli/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "vli/rng.hpp"

namespace vli::corpus {

using nlohmann::json;

namespace {

json gold_to_json(const Gold& g) {
    if (const auto* a = std::get_if<GoldAnswers>(&g)) {
        return json{{"answers", a->answers}};
    }
    if (const auto* b = std::get_if<GoldBoxes>(&g)) {
        json arr = json::array();
        for (const auto& box : b->boxes) {
            arr.push_back({box.x_left, box.y_top, box.x_right, box.y_bottom});
        }
        return json{{"boxes", arr}};
    }
    if (const auto* m = std::get_if<GoldGrounded>(&g)) {
        return json{{"grounded", m->markup}};
    }
    return nullptr;
}

Gold gold_from_json(const json& j) {
    if (j.is_null()) return std::monostate{};
    if (j.contains("answers")) {
        return GoldAnswers{j.at("answers").get<std::vector<std::string>>()};
    }
    if (j.contains("boxes")) {
        GoldBoxes gb;
        for (const auto& arr : j.at("boxes")) {
            geometry::NormBox b{arr.at(0).get<int>(), arr.at(1).get<int>(),
                                arr.at(2).get<int>(), arr.at(3).get<int>()};
            geometry::check_valid(b);
            gb.boxes.push_back(b);
        }
        return gb;
    }
    if (j.contains("grounded")) {
        return GoldGrounded{j.at("grounded").get<std::string>()};
    }
    throw ValidationError("gold object has none of answers/boxes/grounded");
}

grammar::TaskId task_from_json(const json& j, const char* key) {
    auto id = grammar::task_from_surface(j.at(key).get<std::string>());
    if (!id) {
        throw ValidationError("unknown task '" + j.at(key).get<std::string>() + "'");
    }
    return *id;
}

}  // namespace

std::string to_json_line(const CorpusRecord& r) {
    json j{{"id", r.id},
           {"task", std::string(grammar::surface(r.task))},
           {"image", r.image_ref},
           {"image_size", {r.image_width, r.image_height}},
           {"instruction", r.instruction},
           {"target", r.target},
           {"gold", gold_to_json(r.gold)},
           {"source", r.source_dataset},
           {"weak", r.weak_label}};
    return j.dump();
}

CorpusRecord record_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what(), 0);
    }
    CorpusRecord r;
    r.id = j.at("id").get<std::string>();
    r.task = task_from_json(j, "task");
    r.image_ref = j.value("image", "");
    if (j.contains("image_size") && !j.at("image_size").is_null()) {
        r.image_width = j.at("image_size").at(0).get<int>();
        r.image_height = j.at("image_size").at(1).get<int>();
    }
    r.instruction = j.at("instruction").get<std::string>();
    r.target = j.value("target", "");
    r.gold = gold_from_json(j.contains("gold") ? j.at("gold") : json(nullptr));
    r.source_dataset = j.value("source", "");
    r.weak_label = j.value("weak", false);
    return r;
}

std::string to_json_line(const ConversationRecord& r) {
    json turns = json::array();
    for (const auto& t : r.turns) {
        turns.push_back({{"task", std::string(grammar::surface(t.task))},
                         {"instruction", t.instruction},
                         {"target", t.target}});
    }
    json j{{"id", r.id},
           {"image", r.image_ref},
           {"image_size", {r.image_width, r.image_height}},
           {"turns", turns}};
    return j.dump();
}

ConversationRecord conversation_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what(), 0);
    }
    ConversationRecord r;
    r.id = j.at("id").get<std::string>();
    r.image_ref = j.value("image", "");
    if (j.contains("image_size") && !j.at("image_size").is_null()) {
        r.image_width = j.at("image_size").at(0).get<int>();
        r.image_height = j.at("image_size").at(1).get<int>();
    }
    for (const auto& t : j.at("turns")) {
        ConversationTurn turn;
        turn.task = task_from_json(t, "task");
        turn.instruction = t.at("instruction").get<std::string>();
        turn.target = t.at("target").get<std::string>();
        r.turns.push_back(std::move(turn));
    }
    if (r.turns.size() < 2) {
        throw ValidationError("conversation '" + r.id + "' needs at least 2 turns");
    }
    return r;
}

CorpusRecord make_rec_record(const std::string& id, const std::string& phrase,
                             const geometry::PixelBox& box, const std::string& image_ref,
                             int width, int height, const std::string& source_dataset) {
    geometry::NormBox n = geometry::normalize_box(box, width, height);
    CorpusRecord r;
    r.id = id;
    r.task = grammar::TaskId::Refer;
    r.image_ref = image_ref;
    r.image_width = width;
    r.image_height = height;
    r.instruction = grammar::BenchmarkRegistry::with_defaults().render("REC", phrase);
    r.target = geometry::serialize_box(n);
    r.gold = GoldBoxes{{n}};
    r.source_dataset = source_dataset;
    return r;
}

CorpusRecord invert_to_reg(const CorpusRecord& rec, std::string_view reg_template) {
    if (rec.task != grammar::TaskId::Refer) {
        throw ValidationError("REG inversion requires a REC record, got task '" +
                              std::string(grammar::surface(rec.task)) + "'");
    }
    const auto* gb = std::get_if<GoldBoxes>(&rec.gold);
    if (!gb || gb->boxes.size() != 1) {
        throw ValidationError("REG inversion requires exactly one gold box (record '" +
                              rec.id + "')");
    }
    // The phrase is the REC instruction with its template prefix removed.
    std::string phrase = rec.instruction;
    const std::string rec_prefix = "[refer] give me the location of ";
    if (phrase.rfind(rec_prefix, 0) == 0) {
        phrase = phrase.substr(rec_prefix.size());
    }

    std::string instruction(reg_template);
    std::size_t hole = instruction.find("{box}");
    if (hole == std::string::npos) {
        throw ConfigError("REG template lacks a {box} hole");
    }
    instruction.replace(hole, 5, geometry::serialize_box(gb->boxes[0]));

    CorpusRecord out = rec;
    out.id = rec.id + "-reg";
    out.task = grammar::TaskId::Identify;
    out.instruction = std::move(instruction);
    out.target = phrase;
    out.gold = GoldAnswers{{phrase}};
    return out;
}

std::vector<markup::GroundedText> select_grounded_captions(
    const std::vector<markup::GroundedText>& captions, std::size_t min_phrases) {
    std::vector<markup::GroundedText> kept;
    for (const auto& c : captions) {
        if (c.span_count() >= min_phrases) kept.push_back(c);
    }
    return kept;
}

std::vector<CorpusRecord> make_detection_records(const markup::GroundedText& g,
                                                 DetectionMode mode,
                                                 const std::string& id_prefix,
                                                 const std::string& image_ref, int width,
                                                 int height,
                                                 const std::string& source_dataset) {
    if (g.span_count() == 0) {
        throw ValidationError("detection records need at least one grounded span");
    }
    std::vector<CorpusRecord> out;
    auto base = [&](const std::string& id) {
        CorpusRecord r;
        r.id = id;
        r.task = grammar::TaskId::Detection;
        r.image_ref = image_ref;
        r.image_width = width;
        r.image_height = height;
        r.source_dataset = source_dataset;
        return r;
    };

    if (mode == DetectionMode::CaptionToPhrases) {
        CorpusRecord r = base(id_prefix);
        r.instruction = "[detection] " + markup::strip_grounding(g);
        r.target = markup::emit_grounded(g);
        r.gold = GoldGrounded{r.target};
        out.push_back(std::move(r));
        return out;
    }

    std::size_t k = 0;
    for (const auto& seg : g.segments) {
        const auto* span = std::get_if<markup::GroundedSpan>(&seg);
        if (!span) continue;
        CorpusRecord r = base(id_prefix + "-p" + std::to_string(k++));
        r.instruction = "[detection] " + span->phrase;
        std::string target = "<p>" + span->phrase + "</p>";
        for (const auto& b : span->boxes) target += geometry::serialize_box(b);
        r.target = target;
        r.gold = GoldGrounded{target};
        out.push_back(std::move(r));
    }
    return out;
}

MultiRoundResult build_multiround(const std::vector<CorpusRecord>& records,
                                  std::size_t turns_per_conv, std::uint64_t seed) {
    if (turns_per_conv < 2) {
        throw ValidationError("turns_per_conv must be >= 2");
    }
    // Group by image, preserving a deterministic group order.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        groups[records[i].image_ref].push_back(i);
    }

    MultiRoundResult result;
    rng::Xoshiro256StarStar gen(seed);
    std::size_t conv_seq = 0;

    for (auto& [image, idxs] : groups) {
        // Seeded shuffle decides both conversation membership and turn order.
        for (std::size_t i = idxs.size(); i > 1; --i) {
            std::swap(idxs[i - 1], idxs[gen.below(i)]);
        }
        std::vector<bool> used(idxs.size(), false);
        while (true) {
            std::vector<std::size_t> turns;
            std::set<grammar::TaskId> seen;
            for (std::size_t i = 0; i < idxs.size() && turns.size() < turns_per_conv; ++i) {
                if (used[i]) continue;
                grammar::TaskId t = records[idxs[i]].task;
                if (seen.contains(t)) continue;
                seen.insert(t);
                turns.push_back(i);
            }
            if (turns.size() < 2) break;
            ConversationRecord conv;
            const CorpusRecord& first = records[idxs[turns[0]]];
            conv.id = "conv-" + std::to_string(conv_seq++);
            conv.image_ref = image;
            conv.image_width = first.image_width;
            conv.image_height = first.image_height;
            for (std::size_t i : turns) {
                used[i] = true;
                const CorpusRecord& r = records[idxs[i]];
                conv.turns.push_back({r.task, r.instruction, r.target});
            }
            result.conversations.push_back(std::move(conv));
        }
        for (std::size_t i = 0; i < idxs.size(); ++i) {
            if (!used[i]) result.leftovers.push_back(records[idxs[i]]);
        }
    }
    return result;
}

}  // namespace vli::corpus
