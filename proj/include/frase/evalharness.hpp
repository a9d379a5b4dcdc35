#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace frase::eval {

// SPARQL-aware tokenization for BLEU: {}().,; padded with spaces, then
// whitespace split.
std::vector<std::string> bleu_tokenize(const std::string& text);

// Sentence BLEU-4 in [0, 100]: uniform weights, brevity penalty, add-one
// smoothing on orders 2..4 (unigram precision unsmoothed; zero unigram
// matches score 0). Identical non-empty texts score exactly 100.
double bleu(const std::string& candidate, const std::string& reference);

struct CorpusBleu {
    double pooled = 0.0;         // corpus-level pooled n-gram counts
    double mean_sentence = 0.0;  // mean of per-pair sentence BLEU
};

CorpusBleu corpus_bleu(const std::vector<std::pair<std::string, std::string>>& pairs);

enum class AnswerKind { bindings, boolean };

struct AnswerSet {
    AnswerKind kind = AnswerKind::bindings;
    std::set<std::string> values;  // canonical row tuples
    bool boolean_value = false;

    std::set<std::string> as_set() const;  // booleans become singleton sets
};

// Canonicalizes a standard SPARQL JSON results document: SELECT rows become
// ordered tuples of canonical values (URIs stripped to local ids, literals
// tagged with their datatype local name), ASK becomes a boolean.
AnswerSet canonicalize_results(const nlohmann::json& results);

enum class ExecStatus { ok, exec_error, timeout, malformed, missing };
const char* exec_status_to_string(ExecStatus s);

struct ExecutionResult {
    ExecStatus status = ExecStatus::ok;
    AnswerSet answers;
    std::string error;
};

// JSON-lines cache keyed by (endpoint, whitespace-normalized query).
class AnswerCache {
public:
    AnswerCache() = default;
    explicit AnswerCache(std::filesystem::path backing_file);

    std::optional<ExecutionResult> find(const std::string& endpoint,
                                        const std::string& query) const;
    void put(const std::string& endpoint, const std::string& query, const ExecutionResult& r);
    void save() const;
    std::size_t size() const { return entries_.size(); }

private:
    static std::string key(const std::string& endpoint, const std::string& query);
    std::filesystem::path path_;
    std::map<std::string, nlohmann::json> entries_;
};

struct EndpointOptions {
    int timeout_ms = 30000;
    AnswerCache* cache = nullptr;  // optional shared cache
};

// Executes a query against a SPARQL endpoint (GET ?query=, SPARQL JSON
// results). Failures map onto ExecStatus instead of throwing.
ExecutionResult execute_query(const std::string& endpoint, const std::string& query,
                              const EndpointOptions& opts = {});

struct F1Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Set precision/recall/F1 over canonical values; both-empty scores 1.0.
F1Score answer_f1(const AnswerSet& pred, const AnswerSet& gold);

// 1 iff the canonical answer sets are exactly equal.
int answer_accuracy(const AnswerSet& pred, const AnswerSet& gold);

struct EntryScore {
    std::string uid;
    double bleu = 0.0;
    int accuracy = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ExecStatus pred_status = ExecStatus::ok;
    ExecStatus gold_status = ExecStatus::ok;
    bool both_empty = false;  // flagged so analysts can exclude
};

struct GoldEntry {
    std::string uid;
    std::string sparql;
};

struct EvalReport {
    std::vector<EntryScore> per_entry;
    double corpus_bleu_pooled = 0.0;
    double mean_sentence_bleu = 0.0;
    double mean_accuracy = 0.0;
    double mean_f1 = 0.0;
    std::string endpoint;
    int timeout_ms = 0;
    std::size_t cache_entries = 0;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

struct EvalOptions {
    int timeout_ms = 30000;
    AnswerCache* cache = nullptr;
    std::size_t concurrency = 4;
};

// Scores predictions (uid -> query text) against gold entries. Missing
// predictions and execution failures score 0 and are never excluded.
EvalReport evaluate_run(const std::map<std::string, std::string>& predictions,
                        const std::vector<GoldEntry>& gold, const std::string& endpoint,
                        const EvalOptions& opts = {});

}  // namespace frase::eval
