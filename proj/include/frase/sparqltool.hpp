#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace frase::sparql {

enum class QueryForm { select, ask, count, other };

const char* query_form_to_string(QueryForm f);

// Token kinds produced by the lightweight tokenizer. Full SPARQL 1.1 grammar
// validation is out of scope; unknown constructs pass through verbatim.
enum class TokenKind {
    keyword,     // recognized SPARQL keyword (any case in source)
    variable,    // ?x or $x
    prefixed,    // ns:local
    iri,         // <...>
    literal,     // quoted string with optional @lang / ^^type
    number,      // integer or decimal
    boolean_lit, // true / false
    punct,       // {}()[].,;*=<> etc.
    word         // bare word (function names, unknown constructs)
};

struct Token {
    TokenKind kind;
    std::string text;
    std::size_t offset = 0;  // byte offset in the source query
};

// Throws ParseError (with byte offset) on unbalanced quotes or braces.
std::vector<Token> tokenize(const std::string& query);

struct ExtractedUris {
    // First-occurrence order, no duplicates; the three lists are disjoint.
    std::vector<std::string> relations;  // wdt:/p:/ps:/pq: namespaces
    std::vector<std::string> classes;    // wd: objects of instance-of-like triples
    std::vector<std::string> entities;   // remaining wd: URIs

    bool empty() const { return relations.empty() && classes.empty() && entities.empty(); }
};

struct ExtractOptions {
    // Predicates whose objects are treated as classes.
    std::vector<std::string> class_predicates = {"P31", "P279"};
};

ExtractedUris extract_uris(const std::string& query, const ExtractOptions& opts = {});

struct QueryTemplate {
    std::string canonical_text;
    QueryForm form = QueryForm::other;
    std::size_t placeholder_count = 0;
};

// Rewrites URIs to <ENT_i>/<REL_i>/<CLS_i>, literals to <LIT:type>, variables
// to ?v0.., uppercases keywords, and collapses whitespace. Idempotent.
QueryTemplate extract_template(const std::string& query, const ExtractOptions& opts = {});

QueryForm classify_query_form(const std::string& query);

// Number of whitespace-delimited tokens after whitespace normalization.
std::size_t query_length(const std::string& query);

// Projection variables in order, without the leading '?'. SELECT * expands to
// all pattern variables in first-occurrence order. Throws on ASK queries.
std::vector<std::string> select_variables(const std::string& query);

// Trailing P##/Q## identifier of a Wikidata URI (prefixed or absolute);
// empty when the URI does not carry one.
std::string wikidata_local_id(const std::string& uri);

}  // namespace frase::sparql
