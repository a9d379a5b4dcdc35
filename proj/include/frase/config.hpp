#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "frase/framealign.hpp"

namespace frase::config {

// Resolved pipeline configuration. Precedence: flags > environment > file.
struct PipelineConfig {
    // paths
    std::string framenet_path;
    std::string framenet_format = "json-lines";  // or framenet-xml-dir
    std::string lcq2_path;
    std::string cache_dir = "cache";
    std::string index_file;
    std::string output_dir = "out";

    // services
    std::string embed_url;       // empty -> hash-fold provider
    std::string gen_url;         // empty -> lexical baseline annotator
    std::string wikidata_api = "https://www.wikidata.org/w/api.php";
    std::string sparql_endpoint;

    // embedding
    std::size_t embed_dim = 256;
    std::size_t embed_batch = 32;

    // alignment
    align::AlignConfig align;

    // dataset
    std::uint64_t seed = 1618;
    std::string variant = "raw";
    std::string split = "original";

    // limits
    std::size_t concurrency = 4;
    double rate_limit_per_sec = 5.0;
    int timeout_ms = 30000;
    int max_retries = 2;
    bool offline = false;

    // Pipeline identity: the artifact-defining keys (inputs, provider,
    // annotator, alignment knobs, split knobs). Execution-mode settings
    // (timeouts, concurrency, offline, locations) are excluded.
    std::map<std::string, std::string> identity() const;

    // Stable hash over identity(); embedded in artifact provenance.
    std::string config_hash() const;
};

// INI-style document: `key = value` lines, `#` comments, optional [sections]
// (section names are ignored; keys are globally unique).
PipelineConfig load_config_file(const std::filesystem::path& path);

// Applies FRASE_* environment variables on top of `cfg`.
void apply_env_overrides(PipelineConfig& cfg);

// Key/value application shared by the file parser and CLI flag handling.
void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Stage metadata sidecar (<artifact>.meta.json): records the stage name, the
// subset of the config identity the artifact depends on, its hash, and the
// tool version.
void write_stage_meta(const std::filesystem::path& artifact, const std::string& stage,
                      const PipelineConfig& cfg, const std::vector<std::string>& keys);

// Compares the recorded identity against the current one on the keys both
// sides define; throws InputError naming the stale stage on a mismatch.
void check_stage_meta(const std::filesystem::path& artifact, const std::string& stage,
                      const PipelineConfig& cfg);

extern const char* kPipelineVersion;

}  // namespace frase::config
