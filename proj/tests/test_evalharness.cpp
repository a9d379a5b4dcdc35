#include <doctest.h>

#include <random>

#include "frase/common.hpp"
#include "frase/evalharness.hpp"
#include "frase/mockendpoint.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace frase;
using namespace frase::eval;
using frase::testsupport::TempDir;
using json = nlohmann::json;

namespace {

std::filesystem::path fixture(const char* name) {
    const char* root = std::getenv("FRASE_SOURCE_DIR");
    REQUIRE(root != nullptr);
    return std::filesystem::path(root) / "data/fixtures" / name;
}

}  // namespace

TEST_SUITE("evalharness") {

TEST_CASE("bleu of identical non-empty text is exactly 100") {
    const char* queries[] = {
        "SELECT ?x WHERE { ?x wdt:P31 wd:Q5 }",
        "ASK { wd:Q1 wdt:P17 wd:Q2 }",
        "a b",
        "x",
    };
    for (const char* q : queries) CHECK(bleu(q, q) == 100.0);
}

TEST_CASE("empty candidate scores zero") {
    CHECK(bleu("", "SELECT ?x WHERE { ?x wdt:P31 wd:Q5 }") == 0.0);
    CHECK(bleu("   ", "x") == 0.0);
}

TEST_CASE("whitespace runs do not change the score") {
    std::string q = "SELECT ?x WHERE { ?x wdt:P31 wd:Q5 . ?x wdt:P17 ?c }";
    std::string spaced = "SELECT   ?x\n WHERE  {  ?x wdt:P31   wd:Q5 .\t?x wdt:P17 ?c }";
    CHECK(bleu(spaced, q) == 100.0);
}

TEST_CASE("punctuation padding tokenizes braces and dots") {
    auto tokens = bleu_tokenize("SELECT ?x WHERE {?x wdt:P31 wd:Q5.}");
    std::vector<std::string> expected = {"SELECT", "?x", "WHERE", "{", "?x",
                                         "wdt:P31", "wd:Q5", ".", "}"};
    CHECK(tokens == expected);
}

TEST_CASE("bleu matches the explicit n-gram enumeration oracle") {
    // deterministic fixture of 50 pairs with varying overlap
    std::mt19937_64 rng(20260810);
    const char* vocab[] = {"SELECT", "?x",  "?y",   "WHERE", "{",       "}",
                           "wdt:P31", "wd:Q5", "wd:Q42", ".",  "FILTER", "(",
                           ")",       "ASK",  "LIMIT", "10", "?z",      "UNION"};
    for (int pair = 0; pair < 50; ++pair) {
        auto draw = [&](std::size_t len) {
            std::string s;
            for (std::size_t i = 0; i < len; ++i) {
                if (i) s += " ";
                s += vocab[rng() % std::size(vocab)];
            }
            return s;
        };
        std::string reference = draw(3 + rng() % 20);
        std::string candidate = (pair % 5 == 0) ? reference : draw(3 + rng() % 20);
        double got = bleu(candidate, reference);
        double expected = oracle::bleu_oracle(candidate, reference);
        CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        CHECK(got >= 0.0);
        CHECK(got <= 100.0);
    }
}

TEST_CASE("corpus bleu pools counts and reports the sentence mean") {
    std::vector<std::pair<std::string, std::string>> identical = {
        {"a b c d e", "a b c d e"}, {"x y z { }", "x y z { }"}};
    CorpusBleu cb = corpus_bleu(identical);
    CHECK(cb.pooled == 100.0);
    CHECK(cb.mean_sentence == 100.0);

    std::vector<std::pair<std::string, std::string>> single = {
        {"a b c d", "a b c e"}};
    CorpusBleu one = corpus_bleu(single);
    CHECK(one.pooled == doctest::Approx(bleu("a b c d", "a b c e")).epsilon(1e-12));
    CHECK(one.mean_sentence == one.pooled);

    // pooled and mean diverge when pair lengths are uneven
    std::vector<std::pair<std::string, std::string>> uneven = {
        {"a b c d e f g h", "a b c d e f g h"}, {"q w", "z v"}};
    CorpusBleu two = corpus_bleu(uneven);
    CHECK(two.pooled != doctest::Approx(two.mean_sentence).epsilon(1e-9));
}

TEST_CASE("answer_f1 over hand-computed overlaps") {
    auto bindings = [](std::initializer_list<const char*> values) {
        AnswerSet s;
        s.kind = AnswerKind::bindings;
        for (const char* v : values) s.values.insert(v);
        return s;
    };
    F1Score same = answer_f1(bindings({"a", "b"}), bindings({"a", "b"}));
    CHECK(same.f1 == 1.0);

    F1Score half = answer_f1(bindings({"a", "b"}), bindings({"b", "c"}));
    CHECK(half.precision == 0.5);
    CHECK(half.recall == 0.5);
    CHECK(half.f1 == 0.5);

    F1Score zero = answer_f1(bindings({}), bindings({"x"}));
    CHECK(zero.f1 == 0.0);

    F1Score empty = answer_f1(bindings({}), bindings({}));
    CHECK(empty.f1 == 1.0);

    // symmetry on randomized sets
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        AnswerSet a, b;
        for (int i = 0; i < 8; ++i) {
            if (rng() % 2) a.values.insert("v" + std::to_string(rng() % 12));
            if (rng() % 2) b.values.insert("v" + std::to_string(rng() % 12));
        }
        F1Score ab = answer_f1(a, b);
        F1Score ba = answer_f1(b, a);
        CHECK(ab.f1 == doctest::Approx(ba.f1).epsilon(1e-12));
        CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-12));
        CHECK(ab.f1 >= 0.0);
        CHECK(ab.f1 <= 1.0);
    }
}

TEST_CASE("booleans compare as singleton sets") {
    AnswerSet t, f;
    t.kind = AnswerKind::boolean;
    t.boolean_value = true;
    f.kind = AnswerKind::boolean;
    f.boolean_value = false;
    CHECK(answer_f1(t, t).f1 == 1.0);
    CHECK(answer_f1(t, f).f1 == 0.0);
    CHECK(answer_accuracy(t, t) == 1);
    CHECK(answer_accuracy(t, f) == 0);
}

TEST_CASE("accuracy is exact set equality") {
    AnswerSet a, b;
    a.values = {"x", "y"};
    b.values = {"x"};
    CHECK(answer_accuracy(a, a) == 1);
    CHECK(answer_accuracy(a, b) == 0);
    AnswerSet e1, e2;
    CHECK(answer_accuracy(e1, e2) == 1);
}

TEST_CASE("canonicalize_results strips URIs and tags literals") {
    json doc = {
        {"head", {{"vars", {"a", "b"}}}},
        {"results",
         {{"bindings",
           {{{"a", {{"type", "uri"}, {"value", "http://www.wikidata.org/entity/Q42"}}},
             {"b",
              {{"type", "literal"},
               {"value", "42"},
               {"datatype", "http://www.w3.org/2001/XMLSchema#integer"}}}}}}}}};
    AnswerSet s = canonicalize_results(doc);
    REQUIRE(s.values.size() == 1);
    CHECK(*s.values.begin() == std::string("Q42") + '\x1f' + "42^^integer");

    AnswerSet ask = canonicalize_results(json{{"boolean", true}});
    CHECK(ask.kind == AnswerKind::boolean);
    CHECK(ask.boolean_value);
}

TEST_CASE("mock endpoint serves mapped queries and faults") {
    MockSparqlEndpoint endpoint(fixture("eval_metrics_map.json"));
    endpoint.start();

    EndpointOptions opts;
    opts.timeout_ms = 2000;
    ExecutionResult ok =
        execute_query(endpoint.url(), "SELECT ?x WHERE { wd:QM1 wdt:P900 ?x }", opts);
    CHECK(ok.status == ExecStatus::ok);
    CHECK(ok.answers.values == std::set<std::string>{"A", "B"});

    ExecutionResult boolean = execute_query(endpoint.url(), "ASK { wd:QM9 wdt:P900 wd:QM90 }",
                                            opts);
    CHECK(boolean.status == ExecStatus::ok);
    CHECK(boolean.answers.kind == AnswerKind::boolean);

    ExecutionResult err =
        execute_query(endpoint.url(), "SELECT ?x WHERE { wd:QM13 wdt:P901 ?x }", opts);
    CHECK(err.status == ExecStatus::exec_error);

    ExecutionResult bad =
        execute_query(endpoint.url(), "SELECT ?x WHERE { wd:QM14 wdt:P901 ?x }", opts);
    CHECK(bad.status == ExecStatus::malformed);

    EndpointOptions tight;
    tight.timeout_ms = 200;
    ExecutionResult slow =
        execute_query(endpoint.url(), "SELECT ?x WHERE { wd:QM15 wdt:P901 ?x }", tight);
    CHECK(slow.status == ExecStatus::timeout);
}

TEST_CASE("answer cache avoids re-execution and round-trips") {
    TempDir dir("cache");
    MockSparqlEndpoint endpoint(fixture("eval_metrics_map.json"));
    endpoint.start();
    std::string query = "SELECT ?x WHERE { wd:QM1 wdt:P900 ?x }";
    {
        AnswerCache cache(dir.file("answers.jsonl"));
        EndpointOptions opts;
        opts.cache = &cache;
        execute_query(endpoint.url(), query, opts);
        execute_query(endpoint.url(), query, opts);
        CHECK(endpoint.request_count() == 1);
        cache.save();
    }
    AnswerCache warm(dir.file("answers.jsonl"));
    auto hit = warm.find(endpoint.url(), query);
    REQUIRE(hit.has_value());
    CHECK(hit->answers.values == std::set<std::string>{"A", "B"});
}

TEST_CASE("evaluate_run on the gold texts is a perfect score") {
    MockSparqlEndpoint endpoint(fixture("sparql_mock_map.json"));
    endpoint.start();
    std::vector<GoldEntry> gold = {
        {"101", "SELECT ?dyn WHERE { ?dyn wdt:P1365 wd:Q7313 . ?dyn wdt:P31 wd:Q164950 }"},
        {"107", "ASK { wd:Q243 wdt:P17 wd:Q142 }"},
    };
    std::map<std::string, std::string> predictions;
    for (const auto& g : gold) predictions[g.uid] = g.sparql;
    EvalReport report = evaluate_run(predictions, gold, endpoint.url(), {});
    CHECK(report.corpus_bleu_pooled == 100.0);
    CHECK(report.mean_accuracy == 1.0);
    CHECK(report.mean_f1 == 1.0);
    CHECK(report.per_entry.size() == 2);
}

TEST_CASE("empty prediction map scores zero with missing statuses") {
    MockSparqlEndpoint endpoint(fixture("sparql_mock_map.json"));
    endpoint.start();
    std::vector<GoldEntry> gold = {{"101", "SELECT ?x WHERE { wd:Q1 wdt:P1 ?x }"}};
    EvalReport report = evaluate_run({}, gold, endpoint.url(), {});
    REQUIRE(report.per_entry.size() == 1);
    CHECK(report.per_entry[0].pred_status == ExecStatus::missing);
    CHECK(report.mean_f1 == 0.0);
    CHECK(report.mean_accuracy == 0.0);

    std::map<std::string, std::string> stray = {{"nope", "ASK { }"}};
    CHECK_THROWS_AS(evaluate_run(stray, gold, endpoint.url(), {}), InputError);
}

TEST_CASE("warm cache reproduces the cold-cache report bit for bit") {
    TempDir dir("cache2");
    MockSparqlEndpoint endpoint(fixture("sparql_mock_map.json"));
    endpoint.start();
    std::vector<GoldEntry> gold = {
        {"101", "SELECT ?dyn WHERE { ?dyn wdt:P1365 wd:Q7313 . ?dyn wdt:P31 wd:Q164950 }"},
        {"104", "SELECT ?who WHERE { wd:Q271095 wdt:P50 ?who }"},
    };
    std::map<std::string, std::string> predictions = {
        {"101", gold[0].sparql}, {"104", "SELECT ?who WHERE { wd:Q41567 wdt:P50 ?who }"}};

    AnswerCache cache(dir.file("answers.jsonl"));
    EvalOptions opts;
    opts.cache = &cache;
    std::string cold = evaluate_run(predictions, gold, endpoint.url(), opts).to_json().dump();
    std::size_t requests_after_cold = endpoint.request_count();
    std::string warm = evaluate_run(predictions, gold, endpoint.url(), opts).to_json().dump();
    CHECK(cold == warm);
    CHECK(endpoint.request_count() == requests_after_cold);
}

TEST_CASE("metric bounds hold under fuzzed result sets") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        AnswerSet a, b;
        if (rng() % 8 == 0) {
            a.kind = AnswerKind::boolean;
            a.boolean_value = rng() % 2;
        } else {
            for (int i = 0; i < static_cast<int>(rng() % 6); ++i)
                a.values.insert("x" + std::to_string(rng() % 9));
        }
        if (rng() % 8 == 0) {
            b.kind = AnswerKind::boolean;
            b.boolean_value = rng() % 2;
        } else {
            for (int i = 0; i < static_cast<int>(rng() % 6); ++i)
                b.values.insert("x" + std::to_string(rng() % 9));
        }
        F1Score f = answer_f1(a, b);
        CHECK(f.precision >= 0.0);
        CHECK(f.precision <= 1.0);
        CHECK(f.recall >= 0.0);
        CHECK(f.recall <= 1.0);
        CHECK(f.f1 >= 0.0);
        CHECK(f.f1 <= 1.0);
        int acc = answer_accuracy(a, b);
        CHECK((acc == 0 || acc == 1));
    }
}

}  // TEST_SUITE
