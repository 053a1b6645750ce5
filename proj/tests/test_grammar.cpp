#include <doctest.h>

#include <random>

#include "vli/grammar.hpp"

using namespace vli;
using namespace vli::grammar;

namespace {

std::string random_instruction(std::mt19937_64& gen) {
    static const char* words[] = {"what", "color", "is", "the", "cat", "on",
                                  "table", "describe", "left", "person", "red",
                                  "jacket", "count", "objects"};
    std::uniform_int_distribution<int> n_words(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(words) - 1);
    std::string s;
    int n = n_words(gen);
    for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += words[pick(gen)];
    }
    return s;
}

}  // namespace

TEST_CASE("the registry is the six identifiers plus none") {
    CHECK(surface(TaskId::None) == "");
    CHECK(surface(TaskId::Vqa) == "[vqa]");
    CHECK(surface(TaskId::Caption) == "[caption]");
    CHECK(surface(TaskId::Grounding) == "[grounding]");
    CHECK(surface(TaskId::Refer) == "[refer]");
    CHECK(surface(TaskId::Identify) == "[identify]");
    CHECK(surface(TaskId::Detection) == "[detection]");
    for (TaskId id : kAllTaskIds) {
        CHECK(task_from_surface(surface(id)) == id);
    }
    CHECK(!task_from_surface("[foo]").has_value());
}

TEST_CASE("render_prompt emits the template format") {
    PromptParts p;
    p.identifier = TaskId::Vqa;
    p.instruction = "What is the color?";
    CHECK(render_prompt(p) ==
          "[INST] <Img><ImageHere></Img> [vqa] What is the color? [/INST]");
}

TEST_CASE("render_prompt omits the image segment for vision-irrelevant prompts") {
    PromptParts p;
    p.has_image = false;
    p.instruction = "Define entropy.";
    CHECK(render_prompt(p) == "[INST] Define entropy. [/INST]");
}

TEST_CASE("render_prompt renders REC prompts") {
    PromptParts p;
    p.identifier = TaskId::Refer;
    p.instruction = "give me the location of the red jacket";
    CHECK(render_prompt(p) ==
          "[INST] <Img><ImageHere></Img> [refer] give me the location of the "
          "red jacket [/INST]");
}

TEST_CASE("render_prompt validates its inputs") {
    PromptParts p;
    CHECK_THROWS_AS(render_prompt(p), ValidationError);  // empty instruction
    p.instruction = "x";
    p.has_image = false;
    p.identifier = TaskId::Vqa;
    CHECK_THROWS_AS(render_prompt(p), ValidationError);
}

TEST_CASE("parse_prompt inverts render_prompt for all identifier variants") {
    std::mt19937_64 gen(19);
    for (TaskId id : kAllTaskIds) {
        for (int i = 0; i < 100; ++i) {
            PromptParts p;
            p.identifier = id;
            p.instruction = random_instruction(gen);
            p.has_image = (id != TaskId::None) || (i % 2 == 0);
            CHECK(parse_prompt(render_prompt(p)) == p);
        }
    }
}

TEST_CASE("parse_prompt handles the plain case") {
    PromptParts p = parse_prompt("[INST] hello [/INST]");
    CHECK(p.identifier == TaskId::None);
    CHECK(!p.has_image);
    CHECK(p.instruction == "hello");
}

TEST_CASE("parse_prompt tolerates and canonicalizes space runs") {
    PromptParts p = parse_prompt("[INST]   <Img>X</Img>   [vqa]   what  is  this  [/INST]");
    CHECK(p.identifier == TaskId::Vqa);
    CHECK(p.image_slot == "X");
    CHECK(p.instruction == "what is this");
}

TEST_CASE("parse_prompt reports distinct failures") {
    CHECK_THROWS_AS(parse_prompt("hello"), ParseError);
    CHECK_THROWS_AS(parse_prompt("[INST] hello"), ParseError);
    CHECK_THROWS_AS(parse_prompt("[INST] <Img>X [vqa] q [/INST]"), ParseError);
    CHECK_THROWS_AS(parse_prompt("[INST] <Img>X</Img> [foo] q [/INST]"), ParseError);
    CHECK_THROWS_AS(parse_prompt("[INST] [/INST]"), ParseError);  // empty instruction
}

TEST_CASE("rendered identifier appears exactly once, after </Img>") {
    PromptParts p;
    p.identifier = TaskId::Caption;
    p.instruction = "briefly describe the image";
    std::string s = render_prompt(p);
    std::size_t first = s.find("[caption]");
    CHECK(first != std::string::npos);
    CHECK(s.find("[caption]", first + 1) == std::string::npos);
    CHECK(s.substr(first - 7, 7) == "</Img> ");
}

TEST_CASE("benchmark registry reproduces the evaluation prompt strings") {
    auto reg = BenchmarkRegistry::with_defaults();
    CHECK(reg.render("VSR", "the cat is left of the dog") ==
          "[vqa] Based on the image, is this statement true or false? the cat "
          "is left of the dog");
    CHECK(reg.render("RefCOCO", "person wearing a red jacket") ==
          "[refer] give me the location of person wearing a red jacket");
    CHECK(reg.render("HatefulMemes", "some text") ==
          "[vqa] This is an image with: some text written on it. Is it "
          "hateful? Answer:");
    CHECK(reg.render("VizWiz", "q") ==
          "[vqa] Based on the image, respond to this question with a single "
          "word or phrase: q, and reply 'unanswerable' when the provided "
          "information is insufficient");
    CHECK(reg.render("GQA", "q") ==
          "[vqa] Based on the image, respond to this question with a single "
          "word or phrase: q");
    CHECK(reg.render("IconQA", "q") == reg.render("OKVQA", "q"));
}

TEST_CASE("benchmark registry rejects unknowns and duplicates") {
    auto reg = BenchmarkRegistry::with_defaults();
    CHECK_THROWS_AS(reg.render("NopeBench", "q"), ConfigError);
    CHECK_THROWS_AS(reg.add({"VSR", "again {question}", TaskId::Vqa}), ConfigError);
    CHECK_THROWS_AS(reg.add({"NoHole", "static text", TaskId::Vqa}), ConfigError);
    CHECK_THROWS_AS(reg.add({"TwoHoles", "{question} {question}", TaskId::Vqa}),
                    ConfigError);
}
