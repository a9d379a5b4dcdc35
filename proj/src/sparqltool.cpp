#include "frase/sparqltool.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "frase/common.hpp"

namespace frase::sparql {

const char* query_form_to_string(QueryForm f) {
    switch (f) {
        case QueryForm::select: return "select";
        case QueryForm::ask: return "ask";
        case QueryForm::count: return "count";
        default: return "other";
    }
}

namespace {

const std::set<std::string>& keyword_set() {
    static const std::set<std::string> kws = {
        "select", "ask", "construct", "describe", "where", "distinct", "reduced", "filter",
        "optional", "union", "minus", "graph", "service", "bind", "values", "order", "by",
        "group", "having", "limit", "offset", "asc", "desc", "as", "prefix", "base", "not",
        "exists", "in", "a", "count", "sum", "avg", "min", "max", "sample", "group_concat",
        "contains", "lang", "langmatches", "str", "strstarts", "strends", "regex", "bound",
        "year", "month", "day", "now", "true", "false"};
    return kws;
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

bool is_prefix_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<Token> tokenize(const std::string& q) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = q.size();
    long brace_depth = 0;
    long paren_depth = 0;

    while (i < n) {
        char c = q[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (c == '#') {  // comment to end of line
            while (i < n && q[i] != '\n') ++i;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = c;
            ++i;
            bool closed = false;
            while (i < n) {
                if (q[i] == '\\' && i + 1 < n) {
                    i += 2;
                    continue;
                }
                if (q[i] == quote) {
                    closed = true;
                    ++i;
                    break;
                }
                ++i;
            }
            if (!closed) throw ParseError("unbalanced quote", start);
            // optional @lang or ^^datatype suffix
            if (i < n && q[i] == '@') {
                ++i;
                while (i < n && (std::isalnum(static_cast<unsigned char>(q[i])) || q[i] == '-')) ++i;
            } else if (i + 1 < n && q[i] == '^' && q[i + 1] == '^') {
                i += 2;
                if (i < n && q[i] == '<') {
                    while (i < n && q[i] != '>') ++i;
                    if (i >= n) throw ParseError("unterminated datatype IRI", start);
                    ++i;
                } else {
                    while (i < n && (is_name_char(q[i]) || q[i] == ':')) ++i;
                }
            }
            tokens.push_back({TokenKind::literal, q.substr(start, i - start), start});
            continue;
        }
        if (c == '<') {
            // IRI only if it closes without whitespace; otherwise it is the
            // comparison operator.
            std::size_t j = i + 1;
            while (j < n && q[j] != '>' && !std::isspace(static_cast<unsigned char>(q[j]))) ++j;
            if (j < n && q[j] == '>') {
                tokens.push_back({TokenKind::iri, q.substr(i, j - i + 1), i});
                i = j + 1;
                continue;
            }
            tokens.push_back({TokenKind::punct, "<", i});
            ++i;
            continue;
        }
        if (c == '?' || c == '$') {
            std::size_t j = i + 1;
            while (j < n && is_prefix_char(q[j])) ++j;
            if (j > i + 1) {
                tokens.push_back({TokenKind::variable, q.substr(i, j - i), i});
                i = j;
                continue;
            }
            tokens.push_back({TokenKind::punct, std::string(1, c), i});
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '-' || c == '+') && i + 1 < n &&
             std::isdigit(static_cast<unsigned char>(q[i + 1])))) {
            std::size_t j = i + 1;
            while (j < n && (std::isdigit(static_cast<unsigned char>(q[j])) || q[j] == '.' ||
                             q[j] == 'e' || q[j] == 'E'))
                ++j;
            tokens.push_back({TokenKind::number, q.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < n && is_prefix_char(q[j])) ++j;
            if (j < n && q[j] == ':') {
                // prefixed name: ns:local
                std::size_t k = j + 1;
                while (k < n && is_name_char(q[k])) ++k;
                tokens.push_back({TokenKind::prefixed, q.substr(i, k - i), i});
                i = k;
                continue;
            }
            std::string word = q.substr(i, j - i);
            std::string lower = to_lower(word);
            if (lower == "true" || lower == "false")
                tokens.push_back({TokenKind::boolean_lit, word, i});
            else if (keyword_set().count(lower))
                tokens.push_back({TokenKind::keyword, word, i});
            else
                tokens.push_back({TokenKind::word, word, i});
            i = j;
            continue;
        }
        if (c == '{') ++brace_depth;
        if (c == '}') {
            --brace_depth;
            if (brace_depth < 0) throw ParseError("unbalanced '}'", i);
        }
        if (c == '(') ++paren_depth;
        if (c == ')') {
            --paren_depth;
            if (paren_depth < 0) throw ParseError("unbalanced ')'", i);
        }
        tokens.push_back({TokenKind::punct, std::string(1, c), i});
        ++i;
    }
    if (brace_depth != 0) throw ParseError("unbalanced '{'", n);
    if (paren_depth != 0) throw ParseError("unbalanced '('", n);
    return tokens;
}

namespace {

std::string prefix_of(const std::string& prefixed) {
    std::size_t colon = prefixed.find(':');
    return colon == std::string::npos ? std::string() : prefixed.substr(0, colon);
}

bool is_relation_namespace(const std::string& ns) {
    return ns == "wdt" || ns == "p" || ns == "ps" || ns == "pq";
}

bool is_entity_namespace(const std::string& ns) { return ns == "wd"; }

// Absolute Wikidata IRIs are folded onto their prefixed equivalents.
std::string normalize_wikidata_iri(const std::string& iri_token) {
    static const std::vector<std::pair<std::string, std::string>> mapping = {
        {"<http://www.wikidata.org/prop/direct/", "wdt:"},
        {"<https://www.wikidata.org/prop/direct/", "wdt:"},
        {"<http://www.wikidata.org/prop/statement/", "ps:"},
        {"<http://www.wikidata.org/prop/qualifier/", "pq:"},
        {"<http://www.wikidata.org/prop/", "p:"},
        {"<http://www.wikidata.org/entity/", "wd:"},
        {"<https://www.wikidata.org/entity/", "wd:"},
    };
    for (const auto& [full, pref] : mapping) {
        if (starts_with(iri_token, full) && iri_token.back() == '>')
            return pref + iri_token.substr(full.size(), iri_token.size() - full.size() - 1);
    }
    return std::string();
}

// A token in "URI position": prefixed name in a known Wikidata namespace, or
// an absolute IRI that normalizes onto one.
std::string wikidata_form(const Token& t) {
    if (t.kind == TokenKind::prefixed) {
        std::string ns = prefix_of(t.text);
        if (is_relation_namespace(ns) || is_entity_namespace(ns)) return t.text;
        return std::string();
    }
    if (t.kind == TokenKind::iri) return normalize_wikidata_iri(t.text);
    return std::string();
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

std::string wikidata_local_id(const std::string& uri) {
    std::size_t pos = uri.find_last_of(":/#");
    std::string local = pos == std::string::npos ? uri : uri.substr(pos + 1);
    if (!local.empty() && local.back() == '>') local.pop_back();
    if (local.size() < 2 || (local[0] != 'P' && local[0] != 'Q')) return std::string();
    for (std::size_t i = 1; i < local.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(local[i]))) return std::string();
    return local;
}

ExtractedUris extract_uris(const std::string& query, const ExtractOptions& opts) {
    std::vector<Token> tokens = tokenize(query);
    ExtractedUris out;

    std::set<std::string> class_ids(opts.class_predicates.begin(), opts.class_predicates.end());
    std::set<std::string> class_objects;

    // Pass 1: find objects of instance-of-like triples. Triple patterns in the
    // LCQ2 construct set are linear [subject predicate object], so the object
    // is the next URI/variable/literal token after a class predicate.
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        std::string wd = wikidata_form(tokens[i]);
        if (wd.empty()) continue;
        std::string ns = prefix_of(wd);
        if (!is_relation_namespace(ns)) continue;
        if (!class_ids.count(wikidata_local_id(wd))) continue;
        for (std::size_t j = i + 1; j < tokens.size(); ++j) {
            const Token& t = tokens[j];
            if (t.kind == TokenKind::punct || t.kind == TokenKind::keyword) break;
            std::string obj = wikidata_form(t);
            if (!obj.empty() && is_entity_namespace(prefix_of(obj))) class_objects.insert(obj);
            break;
        }
    }

    for (const Token& t : tokens) {
        std::string wd = wikidata_form(t);
        if (wd.empty()) continue;
        std::string ns = prefix_of(wd);
        if (is_relation_namespace(ns)) {
            push_unique(out.relations, wd);
        } else if (class_objects.count(wd)) {
            push_unique(out.classes, wd);
        } else {
            push_unique(out.entities, wd);
        }
    }
    // Disjointness: a wd: URI seen both as plain entity and as class object
    // counts as a class.
    out.entities.erase(std::remove_if(out.entities.begin(), out.entities.end(),
                                      [&](const std::string& u) {
                                          return class_objects.count(u) > 0;
                                      }),
                       out.entities.end());
    return out;
}

QueryForm classify_query_form(const std::string& query) {
    std::vector<Token> tokens;
    try {
        tokens = tokenize(query);
    } catch (const ParseError&) {
        return QueryForm::other;
    }
    // Skip PREFIX/BASE declarations.
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::string lower = to_lower(tokens[i].text);
        if (tokens[i].kind == TokenKind::keyword && (lower == "prefix" || lower == "base")) {
            i += lower == "prefix" ? 3 : 2;  // PREFIX ns: <iri> | BASE <iri>
            continue;
        }
        break;
    }
    if (i >= tokens.size()) return QueryForm::other;
    std::string head = to_lower(tokens[i].text);
    if (head == "ask") return QueryForm::ask;
    if (head != "select") return QueryForm::other;
    // COUNT inside the projection (before WHERE / '{').
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
        std::string lower = to_lower(tokens[j].text);
        if (lower == "where" || tokens[j].text == "{") break;
        if (tokens[j].kind == TokenKind::keyword && lower == "count") return QueryForm::count;
    }
    return QueryForm::select;
}

std::size_t query_length(const std::string& query) {
    return split_whitespace(query).size();
}

std::vector<std::string> select_variables(const std::string& query) {
    QueryForm form = classify_query_form(query);
    if (form != QueryForm::select && form != QueryForm::count)
        throw InputError("select_variables requires a SELECT query, got form=" +
                         std::string(query_form_to_string(form)));
    std::vector<Token> tokens = tokenize(query);

    std::size_t i = 0;
    while (i < tokens.size() && to_lower(tokens[i].text) != "select") ++i;
    ++i;  // past SELECT

    std::vector<std::string> vars;
    bool star = false;
    long depth = 0;
    std::string pending_as;  // most recent variable after AS at depth 0
    for (; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        std::string lower = to_lower(t.text);
        if (depth == 0 && (lower == "where" || t.text == "{")) break;
        if (t.text == "(") { ++depth; continue; }
        if (t.text == ")") { --depth; continue; }
        if (t.text == "*") { star = true; continue; }
        if (t.kind == TokenKind::keyword && lower == "as") {
            // next variable is the projected alias
            if (i + 1 < tokens.size() && tokens[i + 1].kind == TokenKind::variable) {
                vars.push_back(tokens[i + 1].text.substr(1));
                ++i;
            }
            continue;
        }
        if (t.kind == TokenKind::variable && depth == 0) vars.push_back(t.text.substr(1));
    }

    if (star) {
        vars.clear();
        std::set<std::string> seen;
        for (; i < tokens.size(); ++i) {
            if (tokens[i].kind == TokenKind::variable) {
                std::string name = tokens[i].text.substr(1);
                if (seen.insert(name).second) vars.push_back(name);
            }
        }
    }
    return vars;
}

QueryTemplate extract_template(const std::string& query, const ExtractOptions& opts) {
    std::vector<Token> tokens = tokenize(query);
    ExtractedUris uris = extract_uris(query, opts);

    std::map<std::string, std::string> placeholder;
    std::size_t n_ent = 0, n_rel = 0, n_cls = 0;
    auto assign = [&](const std::string& uri) -> std::string {
        auto it = placeholder.find(uri);
        if (it != placeholder.end()) return it->second;
        std::string ph;
        if (std::find(uris.relations.begin(), uris.relations.end(), uri) != uris.relations.end())
            ph = "<REL_" + std::to_string(n_rel++) + ">";
        else if (std::find(uris.classes.begin(), uris.classes.end(), uri) != uris.classes.end())
            ph = "<CLS_" + std::to_string(n_cls++) + ">";
        else
            ph = "<ENT_" + std::to_string(n_ent++) + ">";
        placeholder.emplace(uri, ph);
        return ph;
    };

    std::map<std::string, std::string> var_names;
    auto rename_var = [&](const std::string& var) -> std::string {
        std::string name = var.substr(1);
        auto it = var_names.find(name);
        if (it != var_names.end()) return it->second;
        std::string fresh = "?v" + std::to_string(var_names.size());
        var_names.emplace(name, fresh);
        return fresh;
    };

    std::vector<std::string> parts;
    parts.reserve(tokens.size());
    for (const Token& t : tokens) {
        switch (t.kind) {
            case TokenKind::variable:
                parts.push_back(rename_var(t.text));
                break;
            case TokenKind::prefixed:
            case TokenKind::iri: {
                std::string wd = wikidata_form(t);
                parts.push_back(wd.empty() ? t.text : assign(wd));
                break;
            }
            case TokenKind::literal:
                parts.push_back("<LIT:str>");
                break;
            case TokenKind::number:
                parts.push_back(t.text.find('.') == std::string::npos ? "<LIT:int>"
                                                                      : "<LIT:num>");
                break;
            case TokenKind::boolean_lit:
                parts.push_back("<LIT:bool>");
                break;
            case TokenKind::keyword: {
                std::string upper = t.text;
                std::transform(upper.begin(), upper.end(), upper.begin(),
                               [](unsigned char c) { return std::toupper(c); });
                parts.push_back(upper);
                break;
            }
            default:
                parts.push_back(t.text);
        }
    }

    QueryTemplate tpl;
    std::ostringstream joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) joined << ' ';
        joined << parts[i];
    }
    tpl.canonical_text = joined.str();
    tpl.form = classify_query_form(query);
    tpl.placeholder_count = placeholder.size();
    return tpl;
}

}  // namespace frase::sparql
