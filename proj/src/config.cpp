#include "frase/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "frase/common.hpp"
#include "frase/jsonio.hpp"

namespace frase::config {

const char* kPipelineVersion = "0.1.0";

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "framenet_path") cfg.framenet_path = value;
    else if (key == "framenet_format") cfg.framenet_format = value;
    else if (key == "lcq2_path") cfg.lcq2_path = value;
    else if (key == "cache_dir") cfg.cache_dir = value;
    else if (key == "index_file") cfg.index_file = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "embed_url") cfg.embed_url = value;
    else if (key == "gen_url") cfg.gen_url = value;
    else if (key == "wikidata_api") cfg.wikidata_api = value;
    else if (key == "sparql_endpoint") cfg.sparql_endpoint = value;
    else if (key == "embed_dim") cfg.embed_dim = std::stoul(value);
    else if (key == "embed_batch") cfg.embed_batch = std::stoul(value);
    else if (key == "k") cfg.align.k = std::stoul(value);
    else if (key == "threshold") cfg.align.threshold = std::stod(value);
    else if (key == "dedupe_frames") cfg.align.dedupe_frames = (value == "true" || value == "1");
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "variant") {
        if (value != "raw" && value != "reformulated" && value != "combined")
            throw UsageError("unknown variant '" + value + "' (raw|reformulated|combined)");
        cfg.variant = value;
    } else if (key == "split") {
        if (value != "original" && value != "unknown_template")
            throw UsageError("unknown split '" + value + "' (original|unknown_template)");
        cfg.split = value;
    }
    else if (key == "concurrency") cfg.concurrency = std::stoul(value);
    else if (key == "rate_limit_per_sec") cfg.rate_limit_per_sec = std::stod(value);
    else if (key == "timeout_ms") cfg.timeout_ms = std::stoi(value);
    else if (key == "max_retries") cfg.max_retries = std::stoi(value);
    else if (key == "offline") cfg.offline = (value == "true" || value == "1");
    else throw UsageError("unknown config key '" + key + "'");
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
    PipelineConfig cfg;
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') continue;  // section headers ignored
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
        try {
            apply_key(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const UsageError& e) {
            throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

void apply_env_overrides(PipelineConfig& cfg) {
    auto env = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        return v ? std::string(v) : std::string();
    };
    if (auto v = env("FRASE_EMBED_URL"); !v.empty()) cfg.embed_url = v;
    if (auto v = env("FRASE_GEN_URL"); !v.empty()) cfg.gen_url = v;
    if (auto v = env("FRASE_WIKIDATA_API"); !v.empty()) cfg.wikidata_api = v;
    if (auto v = env("FRASE_SPARQL_ENDPOINT"); !v.empty()) cfg.sparql_endpoint = v;
    if (auto v = env("FRASE_OFFLINE"); !v.empty()) cfg.offline = (v == "true" || v == "1");
}

std::map<std::string, std::string> PipelineConfig::identity() const {
    std::map<std::string, std::string> kv = {
        {"framenet_format", framenet_format},
        {"provider", embed_url.empty() ? "hash-fold-" + std::to_string(embed_dim)
                                       : "http:" + embed_url + ":" + std::to_string(embed_dim)},
        {"annotator", gen_url.empty() ? "baseline" : "http:" + gen_url},
        {"k", std::to_string(align.k)},
        {"threshold", std::to_string(align.threshold)},
        {"dedupe_frames", align.dedupe_frames ? "true" : "false"},
        {"seed", std::to_string(seed)},
        {"variant", variant},
        {"split", split},
    };
    // input paths join the identity only when this invocation names them
    if (!framenet_path.empty()) kv["framenet_path"] = framenet_path;
    if (!lcq2_path.empty()) kv["lcq2_path"] = lcq2_path;
    return kv;
}

std::string PipelineConfig::config_hash() const {
    std::ostringstream canonical;
    for (const auto& [k, v] : identity()) canonical << k << '=' << v << '\n';
    return to_hex(fnv1a64(canonical.str()));
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& artifact) {
    std::filesystem::path p = artifact;
    p += ".meta.json";
    return p;
}

}  // namespace

void write_stage_meta(const std::filesystem::path& artifact, const std::string& stage,
                      const PipelineConfig& cfg, const std::vector<std::string>& keys) {
    auto identity = cfg.identity();
    json recorded = json::object();
    for (const auto& key : keys) {
        auto it = identity.find(key);
        if (it != identity.end()) recorded[key] = it->second;
    }
    json meta = {{"stage", stage},
                 {"config", recorded},
                 {"config_hash", cfg.config_hash()},
                 {"version", kPipelineVersion}};
    write_file_atomic(meta_path(artifact), meta.dump(2) + "\n");
}

void check_stage_meta(const std::filesystem::path& artifact, const std::string& stage,
                      const PipelineConfig& cfg) {
    std::filesystem::path p = meta_path(artifact);
    if (!std::filesystem::exists(p)) return;  // artifact produced out-of-band
    json meta = json::parse(read_file(p), nullptr, false);
    if (meta.is_discarded()) throw InputError("unreadable stage metadata: " + p.string());
    if (!meta.contains("config") || !meta["config"].is_object()) return;
    auto current = cfg.identity();
    for (const auto& [key, recorded] : meta["config"].items()) {
        auto it = current.find(key);
        if (it == current.end()) continue;  // key not defined by this invocation
        if (recorded.get<std::string>() != it->second)
            throw InputError("stale upstream artifact from stage '" +
                             meta.value("stage", stage) + "': " + key + " was '" +
                             recorded.get<std::string>() + "', now '" + it->second +
                             "' (re-run that stage)");
    }
}

}  // namespace frase::config
