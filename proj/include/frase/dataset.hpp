#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frase/argmap.hpp"
#include "frase/framealign.hpp"

namespace frase::dataset {

struct Lcq2Entry {
    std::string uid;
    std::string raw_question;
    std::optional<std::string> reformulated_question;
    std::string sparql;
    std::string template_id;
};

// Loads the published LC-QuAD 2.0 JSON (array or JSON-lines). Field mapping:
// uid <- uid, raw <- question (NNQT_question fallback), reformulated <-
// paraphrased_question, sparql <- sparql_wikidata|sparql, template_id <-
// template_id|template_index|template (extract_template fallback). A record
// missing uid/question/sparql raises InputError naming the record index.
std::vector<Lcq2Entry> load_lcq2(const std::filesystem::path& path);

struct Lcq3Entry {
    Lcq2Entry base;
    std::vector<align::EvokedFrame> evoked;
    std::vector<argmap::FrameAnnotation> annotations;
    argmap::UnknownLinks unknown_links;
    std::string provenance_version;
    std::string provenance_config_hash;
    bool annotation_missing = false;  // no annotation output joined for this uid
};

// Joins alignment and annotation outputs (keyed by uid) onto the entries.
// Gaps are flagged, unknown uids in the side inputs raise InputError.
std::vector<Lcq3Entry> build_lcq3(
    const std::vector<Lcq2Entry>& entries,
    const std::map<std::string, align::EntryAlignment>& alignments,
    const std::map<std::string, std::vector<argmap::FrameAnnotation>>& annotations,
    const std::map<std::string, argmap::UnknownLinks>& links, const std::string& version,
    const std::string& config_hash);

nlohmann::json lcq3_to_json(const Lcq3Entry& e);
Lcq3Entry lcq3_from_json(const nlohmann::json& j);
std::vector<Lcq3Entry> load_lcq3(const std::filesystem::path& path);

enum class Subset { train, validation, test };
const char* subset_to_string(Subset s);

enum class SplitName { original, unknown_template };
enum class Variant { raw, reformulated, combined };

Variant variant_from_string(const std::string& s);
const char* variant_to_string(Variant v);

struct SplitSpec {
    SplitName name = SplitName::original;
    Variant variant = Variant::raw;  // intended materialization, recorded for provenance
    std::uint64_t seed = 0;
    std::map<std::string, Subset> assignments;  // uid -> subset

    std::size_t count(Subset s) const;
};

// Seeded uniform shuffle, then 80/10/10 by count with largest-remainder
// rounding (a leftover seat goes to test, then validation).
SplitSpec make_original_split(const std::vector<Lcq2Entry>& entries, std::uint64_t seed);

// Reproduces Table-1-style counts when given explicit targets.
SplitSpec make_original_split_with_counts(const std::vector<Lcq2Entry>& entries,
                                          std::uint64_t seed, std::size_t train_count,
                                          std::size_t val_count, std::size_t test_count);

struct UnknownTemplateOptions {
    // When true, validation is carved from train entries instead of from
    // held-out templates (relaxes validation/train template disjointness).
    bool relax_validation_disjointness = false;
    double holdout_fraction = 0.2;    // share of templates (and entries) held out
    double validation_fraction = 0.1; // share of entries targeted for validation
};

// Groups entries by template_id, holds out the template subset whose entry
// count best matches the target (exhaustive for small group counts, seeded
// local search otherwise), then partitions the held-out templates between
// validation and test. Train/validation/test template sets are pairwise
// disjoint. Throws InputError with fewer than 3 template groups.
SplitSpec make_unknown_template_split(const std::vector<Lcq2Entry>& entries, std::uint64_t seed,
                                      const UnknownTemplateOptions& opts = {});

void save_split(const SplitSpec& split, const std::filesystem::path& path);
SplitSpec load_split(const std::filesystem::path& path);

struct MaterializedRecord {
    std::string record_id;  // uid, or uid#raw / uid#ref for combined
    std::string uid;
    std::string question;
    std::string sparql;
    std::string template_id;
};

struct MaterializedSplit {
    std::vector<MaterializedRecord> train;
    std::vector<MaterializedRecord> validation;
    std::vector<MaterializedRecord> test;
    std::size_t dropped_missing_reformulation = 0;

    const std::vector<MaterializedRecord>& subset(Subset s) const;
};

// raw keeps the template question, reformulated keeps the paraphrase
// (dropping entries without one), combined emits both as distinct records.
MaterializedSplit make_variant(const std::vector<Lcq2Entry>& entries, const SplitSpec& split,
                               Variant variant);

struct SubsetStats {
    std::size_t entries = 0;
    std::size_t templates = 0;
    std::size_t unseen_templates = 0;  // templates absent from train
    std::size_t min_query_length = 0;
    double mean_query_length = 0.0;
    std::size_t max_query_length = 0;
    std::map<std::size_t, std::size_t> length_histogram;
};

struct StatsReport {
    SubsetStats train;
    SubsetStats validation;
    SubsetStats test;

    std::string to_table() const;
    std::string to_csv() const;
};

StatsReport split_stats(const MaterializedSplit& split);

struct PromptRecord {
    std::string instruction;
    std::string input;
    std::string output;
};

// Instruction-Input-Output assembly; with_frames appends the deterministic
// serialization of the entry's annotations to the question.
PromptRecord build_prompt(const MaterializedRecord& record,
                          const std::vector<argmap::FrameAnnotation>& annotations,
                          bool with_frames);

std::string serialize_annotations(const std::vector<argmap::FrameAnnotation>& annotations);

nlohmann::json prompt_to_json(const PromptRecord& p);

}  // namespace frase::dataset
