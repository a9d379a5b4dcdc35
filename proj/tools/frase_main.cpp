// frase — frame-enriched SPARQL dataset pipeline driver.
//
// Subcommands (one per pipeline stage):
//   ingest-framenet, fetch-descriptors, build-index, detect-frames, annotate,
//   build-lcq3, split, stats, prompts, eval
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 service error.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

#include "frase/argmap.hpp"
#include "frase/common.hpp"
#include "frase/config.hpp"
#include "frase/dataset.hpp"
#include "frase/embedindex.hpp"
#include "frase/evalharness.hpp"
#include "frase/framealign.hpp"
#include "frase/framenet.hpp"
#include "frase/jsonio.hpp"
#include "frase/kbclient.hpp"
#include "frase/sparqltool.hpp"

namespace fs = std::filesystem;
using namespace frase;

namespace {

// Fallback copy of data/prompts/argmap_prompt.txt for installs that do not
// carry the asset next to the binary.
const char* kDefaultPromptTemplate =
    "You are given a semantic frame and a question. Map each frame element to the\n"
    "exact text span in the question that fills it. Use null for elements that are\n"
    "not mentioned.\n\n"
    "Frame: {frame_id}\n"
    "Definition: {frame_definition}\n"
    "Elements: {elements}\n\n"
    "Question: {question}\n\n"
    "Answer with a single JSON object of the form\n"
    "{\"frame\": \"{frame_id}\", \"elements\": {\"<element>\": \"<span or null>\"}}\n";

struct CliState {
    config::PipelineConfig cfg;
    bool json_summary = false;
    std::string prompt_template_path;
};

void print_summary(const CliState& state, const std::string& stage,
                   const std::vector<std::pair<std::string, std::string>>& fields) {
    if (state.json_summary) {
        json out = {{"stage", stage}};
        for (const auto& [k, v] : fields) out[k] = v;
        std::cout << out.dump() << "\n";
    } else {
        std::cout << "[frase] stage=" << stage;
        for (const auto& [k, v] : fields) std::cout << ' ' << k << '=' << v;
        std::cout << "\n";
    }
}

fs::path out_path(const CliState& state, const std::string& name) {
    return fs::path(state.cfg.output_dir) / name;
}

framenet::InventoryFormat parse_format(const std::string& format) {
    if (format == "framenet-xml-dir") return framenet::InventoryFormat::framenet_xml_dir;
    if (format == "json-lines") return framenet::InventoryFormat::json_lines;
    throw UsageError("unknown inventory format '" + format +
                     "' (framenet-xml-dir|json-lines)");
}

framenet::FrameInventory load_inventory_artifact(const CliState& state) {
    fs::path path = out_path(state, "inventory.jsonl");
    config::check_stage_meta(path, "ingest-framenet", state.cfg);
    if (!fs::exists(path))
        throw InputError("missing inventory artifact " + path.string() +
                         " (run ingest-framenet first)");
    return framenet::load_frame_inventory(path, framenet::InventoryFormat::json_lines);
}

std::unique_ptr<embed::EmbeddingProvider> make_provider(const CliState& state) {
    if (!state.cfg.embed_url.empty())
        return std::make_unique<embed::HttpEmbeddingProvider>(
            state.cfg.embed_url, state.cfg.embed_dim, state.cfg.timeout_ms,
            state.cfg.embed_batch);
    return std::make_unique<embed::HashFoldProvider>(state.cfg.embed_dim);
}

std::vector<dataset::Lcq2Entry> load_corpus(const CliState& state) {
    if (state.cfg.lcq2_path.empty()) throw UsageError("--lcq2 (or config lcq2_path) required");
    return dataset::load_lcq2(state.cfg.lcq2_path);
}

kb::DescriptorCache& descriptor_cache(const CliState& state) {
    static std::unique_ptr<kb::DescriptorCache> cache;
    if (!cache) {
        fs::create_directories(state.cfg.cache_dir);
        cache = std::make_unique<kb::DescriptorCache>(fs::path(state.cfg.cache_dir) /
                                                      "descriptors.jsonl");
    }
    return *cache;
}

kb::FetchOptions fetch_options(const CliState& state) {
    kb::FetchOptions opts;
    opts.api_url = state.cfg.wikidata_api;
    opts.max_retries = state.cfg.max_retries;
    opts.rate_limit_per_sec = state.cfg.rate_limit_per_sec;
    opts.offline = state.cfg.offline;
    return opts;
}

fs::path index_path(const CliState& state) {
    return state.cfg.index_file.empty() ? out_path(state, "frames.idx")
                                        : fs::path(state.cfg.index_file);
}

// ---- stage implementations ----

void cmd_ingest_framenet(const CliState& state) {
    if (state.cfg.framenet_path.empty())
        throw UsageError("--framenet (or config framenet_path) required");
    framenet::FrameInventory inv = framenet::load_frame_inventory(
        state.cfg.framenet_path, parse_format(state.cfg.framenet_format));
    fs::path out = out_path(state, "inventory.jsonl");
    framenet::save_inventory_jsonl(inv, out);
    config::write_stage_meta(out, "ingest-framenet", state.cfg, {"framenet_path", "framenet_format"});
    print_summary(state, "ingest-framenet",
                  {{"frames", std::to_string(inv.size())},
                   {"skipped", std::to_string(inv.skipped_records)},
                   {"missing_definitions", std::to_string(inv.missing_definitions)},
                   {"out", out.string()}});
}

void cmd_fetch_descriptors(const CliState& state) {
    auto entries = load_corpus(state);
    kb::DescriptorCache& cache = descriptor_cache(state);
    kb::WikidataClient client(cache, fetch_options(state));

    std::size_t hits = 0, fetched = 0, not_found = 0, missing = 0;
    std::vector<std::string> failures;
    std::set<std::pair<std::string, kb::DescriptorKind>> targets;
    for (const auto& e : entries) {
        sparql::ExtractedUris uris = sparql::extract_uris(e.sparql);
        for (const auto& u : uris.relations) targets.emplace(u, kb::DescriptorKind::relation);
        for (const auto& u : uris.classes) targets.emplace(u, kb::DescriptorKind::klass);
    }
    for (const auto& [uri, kind] : targets) {
        try {
            bool cached = cache.find(kb::canonicalize_uri(uri)).has_value();
            kb::KbDescriptor d = client.fetch_descriptor(uri, kind);
            (cached ? hits : fetched)++;
            if (d.status == kb::DescriptorStatus::not_found) not_found++;
            if (d.status == kb::DescriptorStatus::missing_description) missing++;
        } catch (const ServiceError& e) {
            failures.push_back(uri);
        }
    }
    cache.save();
    print_summary(state, "fetch-descriptors",
                  {{"uris", std::to_string(targets.size())},
                   {"cache_hits", std::to_string(hits)},
                   {"fetched", std::to_string(fetched)},
                   {"not_found", std::to_string(not_found)},
                   {"missing_description", std::to_string(missing)},
                   {"failures", std::to_string(failures.size())},
                   {"cache", cache.backing_file().string()}});
    if (!failures.empty())
        throw ServiceError(std::to_string(failures.size()) +
                           " descriptor(s) unavailable, first: " + failures.front());
}

void cmd_build_index(const CliState& state) {
    framenet::FrameInventory inv = load_inventory_artifact(state);
    auto provider = make_provider(state);
    fs::path out = index_path(state);
    fs::path checkpoint = out;
    checkpoint += ".partial";
    embed::VectorIndex index = embed::build_frame_index(inv, *provider, checkpoint);
    index.save(out);
    config::write_stage_meta(out, "build-index", state.cfg,
                             {"framenet_path", "framenet_format", "provider"});
    print_summary(state, "build-index",
                  {{"items", std::to_string(index.size())},
                   {"dim", std::to_string(index.dim())},
                   {"provider", index.provider_id()},
                   {"out", out.string()}});
}

void cmd_detect_frames(const CliState& state) {
    auto entries = load_corpus(state);
    fs::path idx = index_path(state);
    config::check_stage_meta(idx, "build-index", state.cfg);
    if (!fs::exists(idx))
        throw InputError("missing index " + idx.string() + " (run build-index first)");
    embed::VectorIndex index = embed::VectorIndex::load(idx);
    auto provider = make_provider(state);
    if (provider->id() != index.provider_id())
        throw InputError("index was built with provider '" + index.provider_id() +
                         "' but the current provider is '" + provider->id() + "'");

    kb::DescriptorCache& cache = descriptor_cache(state);
    kb::WikidataClient client(cache, fetch_options(state));
    align::DescriptorSource source = [&](const std::string& uri, kb::DescriptorKind kind) {
        return client.fetch_descriptor(uri, kind);
    };

    std::vector<align::CorpusEntryRef> refs;
    refs.reserve(entries.size());
    for (const auto& e : entries) refs.push_back({e.uid, e.sparql});

    align::CorpusAlignment aligned = align::align_corpus(refs, index, source, *provider,
                                                         state.cfg.align,
                                                         state.cfg.concurrency);
    cache.save();

    std::string body;
    for (const auto& e : aligned.entries) body += align::entry_alignment_to_json_line(e) + "\n";
    fs::path out = out_path(state, "alignments.jsonl");
    write_file_atomic(out, body);
    config::write_stage_meta(out, "detect-frames", state.cfg, {"lcq2_path", "provider", "k", "threshold", "dedupe_frames"});
    print_summary(state, "detect-frames",
                  {{"entries", std::to_string(aligned.stats.entries)},
                   {"evoked", std::to_string(aligned.stats.evoked_total)},
                   {"skipped_uris", std::to_string(aligned.stats.skipped_uris)},
                   {"below_threshold", std::to_string(aligned.stats.below_threshold)},
                   {"errors", std::to_string(aligned.stats.entries_with_error)},
                   {"out", out.string()}});
}

std::string load_prompt_template(const CliState& state) {
    if (!state.prompt_template_path.empty()) return read_file(state.prompt_template_path);
    return kDefaultPromptTemplate;
}

void cmd_annotate(const CliState& state) {
    auto entries = load_corpus(state);
    framenet::FrameInventory inv = load_inventory_artifact(state);

    fs::path alignments_path = out_path(state, "alignments.jsonl");
    config::check_stage_meta(alignments_path, "detect-frames", state.cfg);
    if (!fs::exists(alignments_path))
        throw InputError("missing alignments " + alignments_path.string() +
                         " (run detect-frames first)");
    std::map<std::string, align::EntryAlignment> alignments;
    for_each_jsonl(alignments_path, [&](const json& record, std::size_t) {
        align::EntryAlignment e = align::entry_alignment_from_json(record.dump());
        alignments[e.uid] = std::move(e);
    });

    std::unique_ptr<argmap::AnnotatorBackend> backend;
    if (!state.cfg.gen_url.empty())
        backend = std::make_unique<argmap::HttpGenBackend>(
            state.cfg.gen_url, load_prompt_template(state), 512, state.cfg.timeout_ms);
    else
        backend = std::make_unique<argmap::LexicalBaselineBackend>();

    // fan out over entries; per-entry isolation, deterministic output order
    std::vector<json> records(entries.size());
    std::atomic<std::size_t> cursor{0}, annotated{0}, errors{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= entries.size()) break;
            const auto& e = entries[i];
            json record = {{"uid", e.uid}, {"annotations", json::array()}, {"error", nullptr}};
            auto it = alignments.find(e.uid);
            if (it != alignments.end() && !it->second.frames.empty()) {
                try {
                    auto annotations =
                        argmap::annotate(e.raw_question, it->second.frames, inv, *backend);
                    for (const auto& a : annotations)
                        record["annotations"].push_back(argmap::annotation_to_json(a));
                    annotated += annotations.size();
                } catch (const std::exception& ex) {
                    record["error"] = ex.what();
                    ++errors;
                }
            }
            records[i] = std::move(record);
        }
    };
    std::size_t workers =
        std::max<std::size_t>(1, std::min(state.cfg.concurrency, entries.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    fs::path out = out_path(state, "annotations.jsonl");
    write_jsonl_atomic(out, records);
    config::write_stage_meta(out, "annotate", state.cfg, {"lcq2_path", "annotator"});
    print_summary(state, "annotate",
                  {{"entries", std::to_string(entries.size())},
                   {"backend", backend->name()},
                   {"annotated_frames", std::to_string(annotated.load())},
                   {"errors", std::to_string(errors.load())},
                   {"out", out.string()}});
}

void cmd_build_lcq3(const CliState& state) {
    auto entries = load_corpus(state);
    framenet::FrameInventory inv = load_inventory_artifact(state);

    fs::path alignments_path = out_path(state, "alignments.jsonl");
    fs::path annotations_path = out_path(state, "annotations.jsonl");
    config::check_stage_meta(alignments_path, "detect-frames", state.cfg);
    config::check_stage_meta(annotations_path, "annotate", state.cfg);
    if (!fs::exists(alignments_path) || !fs::exists(annotations_path))
        throw InputError("missing upstream artifacts (run detect-frames and annotate first)");

    std::map<std::string, align::EntryAlignment> alignments;
    for_each_jsonl(alignments_path, [&](const json& record, std::size_t) {
        align::EntryAlignment e = align::entry_alignment_from_json(record.dump());
        alignments[e.uid] = std::move(e);
    });
    std::map<std::string, std::vector<argmap::FrameAnnotation>> annotations;
    for_each_jsonl(annotations_path, [&](const json& record, std::size_t) {
        if (record.contains("error") && !record["error"].is_null()) return;
        std::vector<argmap::FrameAnnotation> list;
        for (const auto& a : record.value("annotations", json::array()))
            list.push_back(argmap::annotation_from_json(a));
        annotations[record.at("uid").get<std::string>()] = std::move(list);
    });

    std::map<std::string, argmap::UnknownLinks> links;
    for (const auto& e : entries) {
        auto it = annotations.find(e.uid);
        if (it == annotations.end()) continue;
        links[e.uid] = argmap::link_unfilled_to_unknowns(it->second, e.sparql, inv);
    }

    auto lcq3 = dataset::build_lcq3(entries, alignments, annotations, links,
                                    config::kPipelineVersion, state.cfg.config_hash());
    std::vector<json> records;
    records.reserve(lcq3.size());
    std::size_t flagged = 0;
    for (const auto& e : lcq3) {
        if (e.annotation_missing) ++flagged;
        records.push_back(dataset::lcq3_to_json(e));
    }
    fs::path out = out_path(state, "lcq3.jsonl");
    write_jsonl_atomic(out, records);
    config::write_stage_meta(out, "build-lcq3", state.cfg, {"lcq2_path", "provider", "annotator", "k", "threshold", "dedupe_frames"});
    print_summary(state, "build-lcq3",
                  {{"entries", std::to_string(lcq3.size())},
                   {"missing_annotations", std::to_string(flagged)},
                   {"out", out.string()}});
}

std::vector<dataset::Lcq2Entry> load_lcq3_bases(const CliState& state, fs::path* used) {
    fs::path lcq3_path = out_path(state, "lcq3.jsonl");
    if (fs::exists(lcq3_path)) {
        config::check_stage_meta(lcq3_path, "build-lcq3", state.cfg);
        std::vector<dataset::Lcq2Entry> bases;
        for (const auto& e : dataset::load_lcq3(lcq3_path)) bases.push_back(e.base);
        if (used) *used = lcq3_path;
        return bases;
    }
    if (used) *used = state.cfg.lcq2_path;
    return load_corpus(state);  // split/stats work off plain LCQ2 too
}

dataset::SplitSpec make_split(const CliState& state,
                              const std::vector<dataset::Lcq2Entry>& entries) {
    dataset::SplitSpec split;
    if (state.cfg.split == "original")
        split = dataset::make_original_split(entries, state.cfg.seed);
    else if (state.cfg.split == "unknown_template")
        split = dataset::make_unknown_template_split(entries, state.cfg.seed);
    else
        throw UsageError("unknown split '" + state.cfg.split +
                         "' (original|unknown_template)");
    split.variant = dataset::variant_from_string(state.cfg.variant);
    return split;
}

void cmd_split(const CliState& state) {
    fs::path source;
    auto entries = load_lcq3_bases(state, &source);
    dataset::SplitSpec split = make_split(state, entries);

    // partition + disjointness audit
    if (split.assignments.size() != entries.size())
        throw InputError("split does not partition the corpus");
    std::set<std::string> train_tpl, val_tpl, test_tpl;
    for (const auto& e : entries) {
        switch (split.assignments.at(e.uid)) {
            case dataset::Subset::train: train_tpl.insert(e.template_id); break;
            case dataset::Subset::validation: val_tpl.insert(e.template_id); break;
            case dataset::Subset::test: test_tpl.insert(e.template_id); break;
        }
    }
    std::size_t overlap = 0;
    if (state.cfg.split == "unknown_template") {
        for (const auto& t : test_tpl) overlap += train_tpl.count(t);
        for (const auto& t : val_tpl) overlap += train_tpl.count(t);
        if (overlap != 0) throw InputError("template disjointness violated");
    }

    fs::path out = out_path(state, "split_" + state.cfg.split + ".json");
    dataset::save_split(split, out);
    config::write_stage_meta(out, "split", state.cfg, {"lcq2_path", "provider", "annotator", "k", "threshold", "dedupe_frames", "split", "seed"});
    print_summary(state, "split",
                  {{"name", state.cfg.split},
                   {"source", source.string()},
                   {"train", std::to_string(split.count(dataset::Subset::train))},
                   {"validation", std::to_string(split.count(dataset::Subset::validation))},
                   {"test", std::to_string(split.count(dataset::Subset::test))},
                   {"train_templates", std::to_string(train_tpl.size())},
                   {"disjointness_overlap", std::to_string(overlap)},
                   {"out", out.string()}});
}

dataset::SplitSpec load_split_artifact(const CliState& state) {
    fs::path path = out_path(state, "split_" + state.cfg.split + ".json");
    config::check_stage_meta(path, "split", state.cfg);
    if (!fs::exists(path))
        throw InputError("missing split " + path.string() + " (run split first)");
    return dataset::load_split(path);
}

void cmd_stats(const CliState& state) {
    auto entries = load_lcq3_bases(state, nullptr);
    dataset::SplitSpec split = load_split_artifact(state);
    dataset::Variant variant = dataset::variant_from_string(state.cfg.variant);
    dataset::MaterializedSplit m = dataset::make_variant(entries, split, variant);
    dataset::StatsReport report = dataset::split_stats(m);

    fs::path out = out_path(state, "stats_" + state.cfg.split + "_" + state.cfg.variant +
                                       ".csv");
    write_file_atomic(out, report.to_csv());
    config::write_stage_meta(out, "stats", state.cfg, {"split", "seed", "variant"});
    std::cout << report.to_table();
    char train_len[32], val_len[32], test_len[32];
    std::snprintf(train_len, sizeof(train_len), "%.2f", report.train.mean_query_length);
    std::snprintf(val_len, sizeof(val_len), "%.2f", report.validation.mean_query_length);
    std::snprintf(test_len, sizeof(test_len), "%.2f", report.test.mean_query_length);
    print_summary(state, "stats",
                  {{"variant", state.cfg.variant},
                   {"dropped", std::to_string(m.dropped_missing_reformulation)},
                   {"avg_len_train", train_len},
                   {"avg_len_validation", val_len},
                   {"avg_len_test", test_len},
                   {"out", out.string()}});
}

void cmd_prompts(const CliState& state, bool with_frames) {
    fs::path lcq3_path = out_path(state, "lcq3.jsonl");
    config::check_stage_meta(lcq3_path, "build-lcq3", state.cfg);
    if (!fs::exists(lcq3_path))
        throw InputError("missing " + lcq3_path.string() + " (run build-lcq3 first)");
    auto lcq3 = dataset::load_lcq3(lcq3_path);

    std::vector<dataset::Lcq2Entry> bases;
    std::map<std::string, const dataset::Lcq3Entry*> by_uid;
    for (const auto& e : lcq3) {
        bases.push_back(e.base);
        by_uid[e.base.uid] = &e;
    }
    dataset::SplitSpec split = load_split_artifact(state);
    dataset::Variant variant = dataset::variant_from_string(state.cfg.variant);
    dataset::MaterializedSplit m = dataset::make_variant(bases, split, variant);

    std::size_t total = 0;
    for (dataset::Subset subset :
         {dataset::Subset::train, dataset::Subset::validation, dataset::Subset::test}) {
        std::vector<json> records;
        for (const auto& r : m.subset(subset)) {
            const dataset::Lcq3Entry* entry = by_uid.at(r.uid);
            records.push_back(dataset::prompt_to_json(
                dataset::build_prompt(r, entry->annotations, with_frames)));
        }
        total += records.size();
        fs::path out = out_path(state, std::string("prompts_") +
                                           dataset::subset_to_string(subset) + ".jsonl");
        write_jsonl_atomic(out, records);
        config::write_stage_meta(out, "prompts", state.cfg, {"split", "seed", "variant"});
    }
    print_summary(state, "prompts",
                  {{"records", std::to_string(total)},
                   {"variant", state.cfg.variant},
                   {"with_frames", with_frames ? "true" : "false"},
                   {"out_dir", state.cfg.output_dir}});
}

void cmd_eval(const CliState& state, const std::string& predictions_path,
              const std::string& gold_path, const std::string& subset_filter) {
    if (state.cfg.sparql_endpoint.empty())
        throw UsageError("--endpoint (or FRASE_SPARQL_ENDPOINT) required");

    fs::path gold_file = gold_path.empty() ? out_path(state, "lcq3.jsonl")
                                           : fs::path(gold_path);
    if (!fs::exists(gold_file)) throw InputError("missing gold file " + gold_file.string());

    std::vector<eval::GoldEntry> gold;
    for (const auto& record : read_json_records(gold_file)) {
        std::string uid = record.at("uid").is_string()
                              ? record["uid"].get<std::string>()
                              : std::to_string(record["uid"].get<long long>());
        std::string sparql_text = record.contains("sparql")
                                      ? record["sparql"].get<std::string>()
                                      : record.at("sparql_wikidata").get<std::string>();
        gold.push_back({uid, sparql_text});
    }
    if (!subset_filter.empty()) {
        dataset::SplitSpec split = load_split_artifact(state);
        dataset::Subset wanted = subset_filter == "train" ? dataset::Subset::train
                                 : subset_filter == "validation"
                                     ? dataset::Subset::validation
                                     : dataset::Subset::test;
        std::vector<eval::GoldEntry> filtered;
        for (auto& g : gold) {
            auto it = split.assignments.find(g.uid);
            if (it != split.assignments.end() && it->second == wanted)
                filtered.push_back(std::move(g));
        }
        gold = std::move(filtered);
    }

    std::map<std::string, std::string> predictions;
    for (const auto& record : read_json_records(predictions_path)) {
        std::string uid = record.at("uid").is_string()
                              ? record["uid"].get<std::string>()
                              : std::to_string(record["uid"].get<long long>());
        predictions[uid] = record.at("query").get<std::string>();
    }

    fs::create_directories(state.cfg.cache_dir);
    eval::AnswerCache cache(fs::path(state.cfg.cache_dir) / "answers.jsonl");
    eval::EvalOptions opts;
    opts.timeout_ms = state.cfg.timeout_ms;
    opts.cache = &cache;
    opts.concurrency = state.cfg.concurrency;
    eval::EvalReport report =
        eval::evaluate_run(predictions, gold, state.cfg.sparql_endpoint, opts);
    cache.save();

    fs::path out = out_path(state, "eval_report.json");
    write_file_atomic(out, report.to_json().dump(2) + "\n");
    config::write_stage_meta(out, "eval", state.cfg, {});
    std::cout << report.to_table();
    char bleu_buf[32], acc_buf[32], f1_buf[32];
    std::snprintf(bleu_buf, sizeof(bleu_buf), "%.2f", report.corpus_bleu_pooled);
    std::snprintf(acc_buf, sizeof(acc_buf), "%.4f", report.mean_accuracy);
    std::snprintf(f1_buf, sizeof(f1_buf), "%.4f", report.mean_f1);
    print_summary(state, "eval",
                  {{"entries", std::to_string(report.per_entry.size())},
                   {"bleu", bleu_buf},
                   {"accuracy", acc_buf},
                   {"f1", f1_buf},
                   {"out", out.string()}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FRASE pipeline: frame detection, LCQ3 generation, and evaluation"};
    app.require_subcommand(1);

    CliState state;
    std::string config_file;
    app.add_option("--config", config_file, "INI-style config file");
    app.add_flag("--json", state.json_summary, "machine-readable summary line");

    // flag overrides (flags > env > file)
    std::map<std::string, std::string> overrides;
    auto opt = [&](const char* flag, const char* key, const char* help) {
        app.add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
    };
    opt("--framenet", "framenet_path", "FrameNet inventory path");
    opt("--framenet-format", "framenet_format", "framenet-xml-dir|json-lines");
    opt("--lcq2", "lcq2_path", "LC-QuAD 2.0 JSON file");
    opt("--cache-dir", "cache_dir", "descriptor/answer cache directory");
    opt("--index", "index_file", "vector index file");
    opt("--out-dir", "output_dir", "output directory");
    opt("--embed-url", "embed_url", "embedding service URL (empty: hash-fold)");
    opt("--embed-dim", "embed_dim", "embedding dimension");
    opt("--gen-url", "gen_url", "generation service URL (empty: lexical baseline)");
    opt("--wikidata-api", "wikidata_api", "Wikidata API endpoint");
    opt("--endpoint", "sparql_endpoint", "SPARQL endpoint URL");
    opt("--k", "k", "top-k frames per URI");
    opt("--threshold", "threshold", "cosine similarity floor");
    opt("--seed", "seed", "split RNG seed");
    opt("--variant", "variant", "raw|reformulated|combined");
    opt("--split", "split", "original|unknown_template");
    opt("--concurrency", "concurrency", "worker pool size");
    opt("--timeout-ms", "timeout_ms", "HTTP timeout");
    opt("--offline", "offline", "true|false: forbid network");

    app.add_option("--prompt-template", state.prompt_template_path,
                   "annotation prompt template file");

    auto* ingest = app.add_subcommand("ingest-framenet", "normalize a frame inventory");
    auto* fetch = app.add_subcommand("fetch-descriptors",
                                     "fetch relation/class descriptors into the cache");
    auto* build_index = app.add_subcommand("build-index", "embed frames into a vector index");
    auto* detect = app.add_subcommand("detect-frames", "align corpus queries with frames");
    auto* annotate = app.add_subcommand("annotate", "map frame elements to question spans");
    auto* build_lcq3 = app.add_subcommand("build-lcq3", "join annotations into LCQ3 records");
    auto* split_cmd = app.add_subcommand("split", "construct a train/validation/test split");
    auto* stats = app.add_subcommand("stats", "split statistics (entries, templates, lengths)");
    auto* prompts = app.add_subcommand("prompts", "assemble instruction-input-output records");
    bool with_frames = false;
    prompts->add_flag("--with-frames", with_frames,
                      "append frame annotations to the input");
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold queries");
    std::string predictions_path, gold_path, subset_filter;
    eval_cmd->add_option("--predictions", predictions_path,
                         "predictions file (JSON/JSONL with uid + query)")
        ->required();
    eval_cmd->add_option("--gold", gold_path, "gold file (default: <out-dir>/lcq3.jsonl)");
    eval_cmd->add_option("--subset", subset_filter, "restrict gold to train|validation|test");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) state.cfg = config::load_config_file(config_file);
        config::apply_env_overrides(state.cfg);
        for (const auto& [key, value] : overrides) config::apply_key(state.cfg, key, value);
        fs::create_directories(state.cfg.output_dir);

        if (ingest->parsed()) cmd_ingest_framenet(state);
        else if (fetch->parsed()) cmd_fetch_descriptors(state);
        else if (build_index->parsed()) cmd_build_index(state);
        else if (detect->parsed()) cmd_detect_frames(state);
        else if (annotate->parsed()) cmd_annotate(state);
        else if (build_lcq3->parsed()) cmd_build_lcq3(state);
        else if (split_cmd->parsed()) cmd_split(state);
        else if (stats->parsed()) cmd_stats(state);
        else if (prompts->parsed()) cmd_prompts(state, with_frames);
        else if (eval_cmd->parsed()) cmd_eval(state, predictions_path, gold_path, subset_filter);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ServiceError& e) {
        std::cerr << "service error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
