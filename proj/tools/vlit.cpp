// vlit: compile, mix, and evaluate multi-task vision-language instruction
// data from JSONL shards.

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vli/corpus.hpp"
#include "vli/error.hpp"
#include "vli/geometry.hpp"
#include "vli/grammar.hpp"
#include "vli/manifest.hpp"
#include "vli/markup.hpp"
#include "vli/metrics.hpp"
#include "vli/mixer.hpp"
#include "vli/tensorops.hpp"

namespace {

using nlohmann::json;
using namespace vli;

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string config;
    std::string out;
    bool strict = false;
    int jobs = 1;
};

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

manifest::RunManifest start_manifest(const std::string& command_line,
                                     std::uint64_t seed,
                                     const std::vector<std::string>& input_paths,
                                     const std::string& config_bytes = "") {
    manifest::RunManifest m;
    m.command_line = command_line;
    m.seed = seed;
    m.config_hash = manifest::fnv1a64_hex(config_bytes);
    m.started = manifest::now_iso8601();
    for (const auto& p : input_paths) m.inputs.push_back(manifest::digest_file(p));
    return m;
}

void finish_manifest(manifest::RunManifest& m, std::uint64_t records,
                     const std::string& out_path) {
    m.finished = manifest::now_iso8601();
    m.output_records = records;
    manifest::write_beside(m, out_path);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output: " + path);
    return out;
}

// Streaming line-by-line transform; memory stays bounded regardless of the
// input size. Returns records emitted.
std::uint64_t transform_lines(
    const std::string& in_path, const std::string& out_path, bool fail_fast,
    const std::function<void(const std::string&, std::size_t, std::ostream&)>& fn) {
    auto in = open_input(in_path);
    auto out = open_output(out_path);
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t emitted = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            std::uint64_t mark = emitted;
            std::ostringstream buf;
            fn(line, line_no, buf);
            std::string s = buf.str();
            if (!s.empty()) {
                out << s;
                emitted = mark + static_cast<std::uint64_t>(
                                     std::count(s.begin(), s.end(), '\n'));
            }
        } catch (const std::exception& e) {
            std::string msg = "line " + std::to_string(line_no) + ": " + e.what();
            if (fail_fast) throw ValidationError(msg);
            std::cerr << "skip " << msg << '\n';
        }
    }
    return emitted;
}

int run_render(const std::string& task, const std::string& instruction,
               bool no_image, const std::string& slot) {
    auto id = grammar::task_from_surface(task.empty() || task == "none"
                                             ? ""
                                             : "[" + task + "]");
    if (!id) throw ConfigError("unknown task identifier '" + task + "'");
    grammar::PromptParts p;
    p.identifier = *id;
    p.instruction = instruction;
    p.has_image = !no_image;
    p.image_slot = slot;
    std::cout << grammar::render_prompt(p) << '\n';
    return 0;
}

int run_parse(const std::string& prompt) {
    grammar::PromptParts p = grammar::parse_prompt(prompt);
    json j{{"task", std::string(grammar::surface(p.identifier))},
           {"instruction", p.instruction},
           {"has_image", p.has_image},
           {"image_slot", p.image_slot}};
    std::cout << j.dump() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-task vision-language instruction data toolkit"};
    app.require_subcommand(1);
    // Let global options (--out, --seed, ...) appear after the subcommand too.
    app.fallthrough();
    GlobalOpts g;
    app.add_option("--seed", g.seed, "seed for all randomized steps")
        ->envname("VLIT_SEED");
    app.add_option("--config", g.config, "config file")->envname("VLIT_CONFIG");
    app.add_option("--out", g.out, "output path")->envname("VLIT_OUT");
    app.add_flag("--strict", g.strict, "fail fast on bad records")
        ->envname("VLIT_STRICT");
    app.add_option("--jobs", g.jobs, "worker count (recorded in the manifest)")
        ->envname("VLIT_JOBS");

    // render
    auto* render = app.add_subcommand("render", "render one instruction prompt");
    std::string r_task = "none", r_instruction, r_slot = "<ImageHere>";
    bool r_no_image = false;
    render->add_option("--task", r_task, "task identifier name, e.g. vqa");
    render->add_option("--instruction", r_instruction)->required();
    render->add_flag("--no-image", r_no_image);
    render->add_option("--image-slot", r_slot);

    // parse
    auto* parse = app.add_subcommand("parse", "parse a rendered prompt");
    std::string p_prompt;
    parse->add_option("--prompt", p_prompt)->required();

    // compile <transform>
    auto* compile = app.add_subcommand("compile", "corpus transforms over JSONL");
    compile->require_subcommand(1);
    std::string c_in;
    compile->add_option("--in", c_in, "input JSONL")->required();
    auto* c_rec = compile->add_subcommand("rec", "annotation lines -> REC records");
    auto* c_reg = compile->add_subcommand("reg", "REC records -> REG records");
    auto* c_select =
        compile->add_subcommand("grounded-select", "keep captions with enough spans");
    std::size_t min_phrases = 5;
    c_select->add_option("--min-phrases", min_phrases);
    auto* c_det = compile->add_subcommand("detection", "grounded captions -> records");
    std::string det_mode = "caption";
    c_det->add_option("--mode", det_mode)->check(CLI::IsMember({"caption", "phrase"}));
    auto* c_multi = compile->add_subcommand("multiround", "mix tasks per image");
    std::size_t turns = 3;
    c_multi->add_option("--turns", turns);

    // mix
    auto* mix = app.add_subcommand("mix", "sample and compile one training stage");
    std::string m_plan, m_trace;
    bool m_strict_paper = false;
    mix->add_option("--plan", m_plan, "stage plan JSON")->required();
    mix->add_flag("--strict-paper", m_strict_paper, "enforce the stage inclusion matrix");
    mix->add_option("--trace", m_trace, "also write the sample trace JSONL");
    std::uint64_t m_steps_override = 0;
    auto* m_steps_opt = mix->add_option("--steps", m_steps_override,
                                        "override plan step count");

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against an eval set");
    std::string e_kind, e_eval, e_preds, e_lexicon;
    bool e_inclusive = false;
    eval->add_option("--kind", e_kind, "rec | vqa | chair")->required();
    eval->add_option("--eval-set", e_eval)->required();
    eval->add_option("--preds", e_preds)->required();
    eval->add_option("--lexicon", e_lexicon, "CHAIR lexicon JSON");
    eval->add_flag("--iou-inclusive", e_inclusive, "count IoU == 0.5 as correct");

    // tensors
    auto* tensors = app.add_subcommand("tensors", "fixture tooling for array ops");
    auto* t_group = tensors->add_subcommand("group", "concatenate 4 adjacent tokens");
    auto* t_interp = tensors->add_subcommand("interp", "resample a positional grid");
    for (auto* sub : {render, parse, compile, mix, eval, tensors, c_rec, c_reg,
                      c_select, c_det, c_multi, t_group, t_interp}) {
        sub->fallthrough();
    }
    std::string t_in, t_mode = "row";
    std::int64_t t_side = 0;
    tensors->add_option("--in", t_in, "input tensor container")->required();
    t_group->add_option("--mode", t_mode)->check(CLI::IsMember({"row", "block"}));
    t_interp->add_option("--side", t_side, "target grid side")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command_line = join_args(argc, argv);

    try {
        if (*render) return run_render(r_task, r_instruction, r_no_image, r_slot);
        if (*parse) return run_parse(p_prompt);

        if (*compile) {
            if (g.out.empty()) throw ConfigError("--out is required for compile");
            bool fail_fast = g.strict;
            auto m = start_manifest(command_line, g.seed, {c_in});
            std::uint64_t n = 0;

            if (*c_rec) {
                n = transform_lines(c_in, g.out, fail_fast,
                                    [&](const std::string& line, std::size_t, std::ostream& o) {
                    json j;
                    try {
                        j = json::parse(line);
                    } catch (const json::exception& e) {
                        throw ParseError(std::string("bad JSON: ") + e.what(), 0);
                    }
                    auto box = j.at("box");
                    geometry::PixelBox pb{box.at(0).get<double>(), box.at(1).get<double>(),
                                          box.at(2).get<double>(), box.at(3).get<double>()};
                    auto rec = corpus::make_rec_record(
                        j.at("id").get<std::string>(), j.at("phrase").get<std::string>(),
                        pb, j.value("image", ""), j.at("image_size").at(0).get<int>(),
                        j.at("image_size").at(1).get<int>(), j.value("source", ""));
                    o << corpus::to_json_line(rec) << '\n';
                });
            } else if (*c_reg) {
                n = transform_lines(c_in, g.out, fail_fast,
                                    [&](const std::string& line, std::size_t, std::ostream& o) {
                    auto rec = corpus::record_from_json(line);
                    o << corpus::to_json_line(corpus::invert_to_reg(rec)) << '\n';
                });
            } else if (*c_select) {
                n = transform_lines(c_in, g.out, fail_fast,
                                    [&](const std::string& line, std::size_t, std::ostream& o) {
                    auto rec = corpus::record_from_json(line);
                    auto gt = markup::parse_grounded(rec.target);
                    if (gt.span_count() >= min_phrases) o << line << '\n';
                });
            } else if (*c_det) {
                auto mode = det_mode == "caption" ? corpus::DetectionMode::CaptionToPhrases
                                                  : corpus::DetectionMode::PhraseToPhrase;
                n = transform_lines(c_in, g.out, fail_fast,
                                    [&](const std::string& line, std::size_t, std::ostream& o) {
                    auto rec = corpus::record_from_json(line);
                    auto gt = markup::parse_grounded(rec.target);
                    for (const auto& d : corpus::make_detection_records(
                             gt, mode, rec.id, rec.image_ref, rec.image_width,
                             rec.image_height, rec.source_dataset)) {
                        o << corpus::to_json_line(d) << '\n';
                    }
                });
            } else if (*c_multi) {
                // grouping needs the whole shard in memory; multiround inputs
                // are the small fine-grained sets
                std::vector<corpus::CorpusRecord> records;
                auto in = open_input(c_in);
                std::string line;
                std::size_t line_no = 0;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (line.empty()) continue;
                    try {
                        records.push_back(corpus::record_from_json(line));
                    } catch (const Error& e) {
                        std::string msg =
                            "line " + std::to_string(line_no) + ": " + e.what();
                        if (fail_fast) throw ValidationError(msg);
                        std::cerr << "skip " << msg << '\n';
                    }
                }
                auto result = corpus::build_multiround(records, turns, g.seed);
                auto out = open_output(g.out);
                for (const auto& c : result.conversations) {
                    out << corpus::to_json_line(c) << '\n';
                    ++n;
                }
                for (const auto& r : result.leftovers) {
                    out << corpus::to_json_line(r) << '\n';
                    ++n;
                }
            }
            finish_manifest(m, n, g.out);
            return 0;
        }

        if (*mix) {
            if (g.out.empty()) throw ConfigError("--out is required for mix");
            auto plan = mixer::plan_from_json_file(m_plan);
            if (m_steps_opt->count() > 0) {
                if (m_steps_override == 0) throw ConfigError("--steps must be positive");
                plan.total_steps = m_steps_override;
            }
            if (app.count("--seed") > 0) plan.seed = g.seed;
            mixer::check_plan(plan, m_strict_paper);

            std::vector<std::string> input_paths{m_plan};
            std::vector<mixer::ShardIndex> shards;
            std::map<std::string, std::uint64_t> catalogs;
            for (const auto& e : plan.entries) {
                if (!e.included || e.weight <= 0.0) continue;
                if (e.path.empty()) {
                    throw ConfigError("no shard path for dataset '" + e.dataset + "'");
                }
                input_paths.push_back(e.path);
                shards.emplace_back(e.path);
                catalogs[e.dataset] = shards.back().size();
            }
            auto m = start_manifest(command_line, plan.seed, input_paths);

            auto trace = mixer::sample_schedule(plan, catalogs);
            auto out = open_output(g.out);
            auto stats = mixer::compile_stage(plan, trace, shards, out, g.strict,
                                              &std::cerr);
            if (!m_trace.empty()) {
                auto tout = open_output(m_trace);
                for (std::size_t i = 0; i < trace.steps.size(); ++i) {
                    const auto& s = trace.steps[i];
                    json j{{"step", i},
                           {"dataset", trace.datasets[s.dataset_index]},
                           {"record", s.record_ordinal}};
                    tout << j.dump() << '\n';
                }
            }
            finish_manifest(m, stats.emitted, g.out);
            std::cout << "emitted " << stats.emitted << " records";
            if (stats.skipped) std::cout << " (" << stats.skipped << " skipped)";
            std::cout << '\n';
            return 0;
        }

        if (*eval) {
            auto kind = metrics::eval_kind_from_name(e_kind);
            metrics::RecOptions rec_opts;
            rec_opts.inclusive = e_inclusive;
            std::optional<metrics::ChairLexicon> lex;
            if (!e_lexicon.empty()) {
                lex = metrics::ChairLexicon::from_json_file(e_lexicon);
            }
            auto m = start_manifest(command_line, g.seed, {e_eval, e_preds});
            auto report = metrics::run_eval(e_eval, e_preds, kind, rec_opts,
                                            lex ? &*lex : nullptr);
            if (!g.out.empty()) {
                open_output(g.out + ".json") << report.to_json() << '\n';
                open_output(g.out + ".txt") << report.to_table();
                finish_manifest(m, report.total, g.out + ".json");
            }
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            if (kind == metrics::EvalKind::Chair) {
                std::printf("chair_i: %.4f  chair_s: %.4f  len: %.4f\n",
                            report.values.at("chair_i"), report.values.at("chair_s"),
                            report.values.at("len"));
            } else {
                std::printf("accuracy: %.4f\n", report.values.at("accuracy"));
            }
            return 0;
        }

        if (*tensors) {
            if (g.out.empty()) throw ConfigError("--out is required for tensors");
            auto m = start_manifest(command_line, g.seed, {t_in});
            auto grid = tensorops::read_grid_file(t_in);
            if (*t_group) {
                auto mode = t_mode == "row" ? tensorops::GroupMode::RowMajor4
                                            : tensorops::GroupMode::Block2x2;
                tensorops::write_grid_file(g.out, tensorops::group_tokens(grid, mode));
            } else if (*t_interp) {
                tensorops::PosTable p;
                if (grid.h != grid.w) throw ConfigError("positional grid must be square");
                p.side = grid.h;
                p.d = grid.d;
                p.data = grid.data;
                auto r = tensorops::interpolate_pos(p, t_side);
                tensorops::TokenGrid out;
                out.h = out.w = r.side;
                out.d = r.d;
                out.data = std::move(r.data);
                tensorops::write_grid_file(g.out, out);
            } else {
                throw ConfigError("tensors requires a group or interp subcommand");
            }
            finish_manifest(m, 1, g.out);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
