#include <doctest.h>

#include <random>

#include "frase/common.hpp"
#include "frase/sparqltool.hpp"
#include "support/oracles.hpp"

using namespace frase;
using namespace frase::sparql;

TEST_SUITE("sparqltool") {

TEST_CASE("extract_uris partitions by namespace and class rule") {
    ExtractedUris uris =
        extract_uris("SELECT ?x WHERE { ?x wdt:P1365 wd:Q123 . ?x wdt:P31 wd:Q164950 }");
    CHECK(uris.relations == std::vector<std::string>{"wdt:P1365", "wdt:P31"});
    CHECK(uris.entities == std::vector<std::string>{"wd:Q123"});
    CHECK(uris.classes == std::vector<std::string>{"wd:Q164950"});
}

TEST_CASE("empty pattern extracts nothing") {
    ExtractedUris uris = extract_uris("ASK { }");
    CHECK(uris.empty());
}

TEST_CASE("unbalanced quote raises a parse error with offset") {
    try {
        extract_uris("SELECT ?x WHERE { ?x rdfs:label \"broken }");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 32);
    }
}

TEST_CASE("unbalanced brace raises a parse error") {
    CHECK_THROWS_AS(extract_uris("SELECT ?x WHERE { ?x wdt:P31 wd:Q5"), ParseError);
}

TEST_CASE("absolute wikidata IRIs normalize onto prefixed form") {
    ExtractedUris uris = extract_uris(
        "SELECT ?x WHERE { <http://www.wikidata.org/entity/Q42> "
        "<http://www.wikidata.org/prop/direct/P31> ?x }");
    CHECK(uris.relations == std::vector<std::string>{"wdt:P31"});
    CHECK(uris.entities == std::vector<std::string>{"wd:Q42"});
}

TEST_CASE("statement namespaces count as relations") {
    ExtractedUris uris = extract_uris(
        "SELECT ?pos WHERE { wd:Q567 p:P39 ?st . ?st ps:P39 ?pos . ?st pq:P580 ?t }");
    CHECK(uris.relations ==
          std::vector<std::string>{"p:P39", "ps:P39", "pq:P580"});
}

TEST_CASE("uri appearing as both entity and class counts as class") {
    ExtractedUris uris =
        extract_uris("SELECT ?x WHERE { wd:Q5 wdt:P17 ?x . ?y wdt:P31 wd:Q5 }");
    CHECK(uris.classes == std::vector<std::string>{"wd:Q5"});
    CHECK(uris.entities.empty());
}

TEST_CASE("relations superset of predicate URIs against regex oracle") {
    // property check on a handful of realistic query shapes
    std::vector<std::string> queries = {
        "SELECT ?x WHERE { ?x wdt:P1365 wd:Q123 . ?x wdt:P31 wd:Q164950 }",
        "SELECT ?pos WHERE { wd:Q567 p:P39 ?st . ?st ps:P39 ?pos . ?st pq:P580 ?t }",
        "ASK { wd:Q243 wdt:P17 wd:Q142 }",
        "SELECT ( COUNT ( ?m ) AS ?c ) WHERE { ?m wdt:P463 wd:Q1065 . ?m wdt:P31 wd:Q6256 }",
        "SELECT ?a WHERE { ?a wdt:P50 ?b . FILTER ( YEAR ( ?c ) = 1990 ) }",
    };
    for (const auto& q : queries) {
        ExtractedUris uris = extract_uris(q);
        std::set<std::string> got(uris.relations.begin(), uris.relations.end());
        for (const auto& expected : oracle::regex_relation_uris(q)) {
            CAPTURE(q);
            CHECK(got.count(expected) == 1);
        }
    }
}

TEST_CASE("extract_template canonicalizes equivalent queries") {
    QueryTemplate a = extract_template("SELECT ?a WHERE { ?a wdt:P361 wd:Q1 }");
    QueryTemplate b = extract_template("SELECT ?z WHERE { ?z wdt:P17 wd:Q90 }");
    CHECK(a.canonical_text == "SELECT ?v0 WHERE { ?v0 <REL_0> <ENT_0> }");
    CHECK(a.canonical_text == b.canonical_text);
    CHECK(a.placeholder_count == 2);
}

TEST_CASE("templates are idempotent") {
    std::vector<std::string> queries = {
        "SELECT ?a WHERE { ?a wdt:P361 wd:Q1 }",
        "select distinct ?x where { wd:Q5 wdt:P31 wd:Q5 . ?x rdfs:label \"apple\"@en } LIMIT 3",
        "ASK { wd:Q5 wdt:P31 wd:Q5 }",
        "SELECT ( COUNT ( ?m ) AS ?c ) WHERE { ?m wdt:P463 wd:Q1065 }",
    };
    for (const auto& q : queries) {
        QueryTemplate first = extract_template(q);
        QueryTemplate second = extract_template(first.canonical_text);
        CAPTURE(q);
        CHECK(first.canonical_text == second.canonical_text);
    }
}

TEST_CASE("uri renaming invariance (randomized substitution)") {
    std::mt19937_64 rng(7);
    const std::string base =
        "SELECT ?x WHERE { wd:Q100 wdt:P200 ?x . ?x wdt:P31 wd:Q300 . ?x wdt:P400 wd:Q500 }";
    QueryTemplate reference = extract_template(base);
    for (int trial = 0; trial < 50; ++trial) {
        std::string q = base;
        auto substitute = [&](const std::string& from, const std::string& to) {
            std::size_t pos = 0;
            while ((pos = q.find(from, pos)) != std::string::npos) {
                q.replace(pos, from.size(), to);
                pos += to.size();
            }
        };
        substitute("Q100", "Q" + std::to_string(1000 + rng() % 100000));
        substitute("Q300", "Q" + std::to_string(2000000 + rng() % 100000));
        substitute("Q500", "Q" + std::to_string(4000000 + rng() % 100000));
        substitute("P200", "P" + std::to_string(3000 + rng() % 1000));
        substitute("P400", "P" + std::to_string(5000 + rng() % 1000));
        CHECK(extract_template(q).canonical_text == reference.canonical_text);
    }
}

TEST_CASE("literals become typed placeholders") {
    QueryTemplate t = extract_template(
        "SELECT ?x WHERE { ?x rdfs:label \"apple\"@en . ?x wdt:P1082 42 . "
        "?x wdt:P2044 3.5 . ?x wdt:P800 true }");
    CHECK(t.canonical_text.find("<LIT:str>") != std::string::npos);
    CHECK(t.canonical_text.find("<LIT:int>") != std::string::npos);
    CHECK(t.canonical_text.find("<LIT:num>") != std::string::npos);
    CHECK(t.canonical_text.find("<LIT:bool>") != std::string::npos);
    CHECK(t.canonical_text.find("apple") == std::string::npos);
}

TEST_CASE("query form classification") {
    CHECK(classify_query_form("SELECT ?x WHERE { ?x wdt:P31 wd:Q5 }") == QueryForm::select);
    CHECK(classify_query_form("ASK { wd:Q5 wdt:P31 wd:Q5 }") == QueryForm::ask);
    CHECK(classify_query_form("SELECT ( COUNT ( ?x ) AS ?c ) WHERE { ?x wdt:P31 wd:Q5 }") ==
          QueryForm::count);
    CHECK(classify_query_form("ask { wd:Q5 wdt:P31 wd:Q5 }") == QueryForm::ask);
    CHECK(classify_query_form("DESCRIBE wd:Q5") == QueryForm::other);
    CHECK(classify_query_form("PREFIX wd: <http://www.wikidata.org/entity/> "
                              "ASK { wd:Q5 wdt:P31 wd:Q5 }") == QueryForm::ask);
}

TEST_CASE("query_length counts whitespace tokens") {
    // hand count: SELECT | ?x | WHERE | { | ?x | wdt:P31 | wd:Q5 | } -> 8
    CHECK(query_length("SELECT ?x WHERE { ?x wdt:P31 wd:Q5 }") == 8);
    CHECK(query_length("") == 0);
    CHECK(query_length("SELECT") == 1);
    CHECK(query_length("  a \t b \n c  ") == 3);
}

TEST_CASE("select_variables returns projection in order") {
    CHECK(select_variables("SELECT ?a ?b WHERE { ?a wdt:P31 ?b }") ==
          std::vector<std::string>{"a", "b"});
    CHECK(select_variables("SELECT * WHERE { ?x wdt:P31 ?y }") ==
          std::vector<std::string>{"x", "y"});
    CHECK(select_variables("SELECT ( COUNT ( ?x ) AS ?c ) WHERE { ?x wdt:P31 wd:Q5 }") ==
          std::vector<std::string>{"c"});
    CHECK_THROWS_AS(select_variables("ASK { wd:Q5 wdt:P31 wd:Q5 }"), InputError);
}

}  // TEST_SUITE
