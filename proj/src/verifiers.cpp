// Deterministic local verifiers.

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "verifai/error.hpp"
#include "verifai/text.hpp"
#include "verifai/tokenize.hpp"
#include "verifai/verify.hpp"

namespace verifai {

const std::vector<std::string>& stoplist() {
    static const std::vector<std::string> words = {
        "a",    "an",    "the",  "and",   "or",   "but",   "if",    "of",   "in",    "on",
        "at",   "to",    "for",  "from",  "by",   "with",  "as",    "is",   "are",   "was",
        "were", "be",    "been", "being", "has",  "have",  "had",   "do",   "does",  "did",
        "it",   "its",   "this", "that",  "these", "those", "he",   "she",  "they",  "his",
        "her",  "their", "there", "which", "who",  "what",  "than", "then", "so",    "also"};
    return words;
}

namespace {

constexpr std::size_t kNegationWindow = 5;
constexpr std::size_t kAttributeWindow = 10;
constexpr double kContainmentThreshold = 0.5;
constexpr double kEntityGate = 0.5;
constexpr double kRowMatchForVerified = 0.8;

bool is_stopword(const std::string& t) {
    static const std::unordered_set<std::string> set(stoplist().begin(), stoplist().end());
    return set.count(t) > 0;
}

// Positions of negation tokens. "n't" tokenizes as "<...n>" + "t".
std::vector<std::size_t> negation_positions(const std::vector<std::string>& tokens) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t == "not" || t == "no" || t == "never") {
            out.push_back(i);
        } else if (t == "t" && i > 0 && !tokens[i - 1].empty() && tokens[i - 1].back() == 'n') {
            out.push_back(i);
        }
    }
    return out;
}

bool is_negation_part(const std::vector<std::string>& tokens, std::size_t i) {
    const auto& t = tokens[i];
    if (t == "not" || t == "no" || t == "never") return true;
    return t == "t" && i > 0 && !tokens[i - 1].empty() && tokens[i - 1].back() == 'n';
}

/// Distinct content tokens in first-occurrence order.
std::vector<std::string> content_tokens(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (is_stopword(t) || is_negation_part(tokens, i)) continue;
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

std::vector<std::string> content_tokens(std::string_view s) {
    return content_tokens(tokenize(s));
}

bool near_any(std::size_t pos, const std::vector<std::size_t>& others, std::size_t window) {
    for (auto o : others) {
        const auto d = pos > o ? pos - o : o - pos;
        if (d <= window) return true;
    }
    return false;
}

VerdictRecord make_record(const DataObject& g, std::string_view instance_id, Verdict v, std::string_view verifier,
                          std::string explanation) {
    return VerdictRecord{g.object_id, std::string(instance_id), v, std::string(verifier), std::move(explanation),
                         std::nullopt};
}

std::string quote(std::string_view s) {
    return "'" + std::string(s) + "'";
}

// --- numbers and entities ----------------------------------------------------

struct NumberMention {
    double value;
    std::string text;
};

bool ascii_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool ascii_digit(char c) {
    return c >= '0' && c <= '9';
}

/// Standalone decimal numbers; digits glued to letters ("R2") are not numbers.
std::vector<NumberMention> extract_numbers(std::string_view s) {
    std::vector<NumberMention> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!ascii_digit(s[i]) || (i > 0 && (ascii_alpha(s[i - 1]) || ascii_digit(s[i - 1]) ||
                                             static_cast<unsigned char>(s[i - 1]) >= 0x80))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::string digits;
        while (j < s.size()) {
            if (ascii_digit(s[j])) {
                digits.push_back(s[j++]);
            } else if (s[j] == ',' && j + 3 < s.size() && ascii_digit(s[j + 1]) && ascii_digit(s[j + 2]) &&
                       ascii_digit(s[j + 3]) && (j + 4 >= s.size() || !ascii_digit(s[j + 4]))) {
                ++j;  // thousands separator
            } else if (s[j] == '.' && j + 1 < s.size() && ascii_digit(s[j + 1]) && digits.find('.') == std::string::npos) {
                digits.push_back(s[j++]);
            } else {
                break;
            }
        }
        const bool glued = j < s.size() && (ascii_alpha(s[j]) || static_cast<unsigned char>(s[j]) >= 0x80);
        if (!glued) {
            const bool negative = i > 0 && s[i - 1] == '-' && (i < 2 || !(ascii_alpha(s[i - 2]) || ascii_digit(s[i - 2])));
            if (auto v = text::parse_number(digits)) out.push_back({negative ? -*v : *v, digits});
        }
        i = j;
    }
    return out;
}

bool numbers_equal(double a, double b) {
    return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b));
}

bool starts_upper(std::string_view word) {
    const auto* p = reinterpret_cast<const uint8_t*>(word.data());
    const auto len = static_cast<int32_t>(word.size());
    int32_t i = 0;
    while (i < len) {
        UChar32 c;
        U8_NEXT(p, i, len, c);
        if (c < 0) return false;
        if (u_isalnum(c)) return u_isupper(c) != 0 || u_istitle(c) != 0;
    }
    return false;
}

bool is_blank(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_numeric_token(const std::string& t) {
    return std::all_of(t.begin(), t.end(), ascii_digit);
}

/// Tokens of quoted spans and capitalized words, minus stopwords and numbers.
std::vector<std::string> entity_tokens(std::string_view claim) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto add_all = [&](std::string_view piece) {
        for (auto& t : tokenize(piece)) {
            if (is_stopword(t) || is_numeric_token(t)) continue;
            if (seen.insert(t).second) out.push_back(std::move(t));
        }
    };

    // Quoted spans: straight double quotes and curly double quotes.
    std::string_view rest = claim;
    static const std::vector<std::pair<std::string_view, std::string_view>> quotes = {{"\"", "\""},
                                                                                      {"“", "”"}};
    for (const auto& [open, close] : quotes) {
        std::size_t pos = 0;
        while ((pos = rest.find(open, pos)) != std::string_view::npos) {
            const auto start = pos + open.size();
            const auto end = rest.find(close, start);
            if (end == std::string_view::npos) break;
            add_all(rest.substr(start, end - start));
            pos = end + close.size();
        }
    }

    std::size_t i = 0;
    while (i < claim.size()) {
        while (i < claim.size() && is_blank(claim[i])) ++i;
        std::size_t j = i;
        while (j < claim.size() && !is_blank(claim[j])) ++j;
        if (j > i) {
            const auto word = claim.substr(i, j - i);
            if (starts_upper(word)) add_all(word);
        }
        i = j;
    }
    return out;
}

std::set<std::string> token_set(std::string_view s) {
    auto v = tokenize(s);
    return {std::make_move_iterator(v.begin()), std::make_move_iterator(v.end())};
}

}  // namespace

// --- (imputed tuple, tuple) --------------------------------------------------

VerdictRecord verify_tuple_tuple(const DataObject& g, const Tuple& x, std::string_view instance_id) {
    constexpr auto vid = verifier_ids::kExactTuple;
    if (!g.tuple || !g.target_attr) throw ContractError("verify_tuple_tuple needs an imputed tuple with a target attribute");
    const Tuple& gt = *g.tuple;

    for (const auto& key : gt.key_attrs) {
        const auto gv = gt.value_of(key);
        const auto xv = x.value_of(key);
        if (!xv) return make_record(g, instance_id, Verdict::NotRelated, vid, "evidence lacks key attribute " + quote(key));
        if (!text::values_equal(gv.value_or(""), *xv)) {
            return make_record(g, instance_id, Verdict::NotRelated, vid,
                               "key " + quote(key) + " differs: " + quote(gv.value_or("")) + " vs " + quote(*xv));
        }
    }
    const auto target = gt.value_of(*g.target_attr).value_or("");
    const auto evidence = x.value_of(*g.target_attr);
    if (!evidence) {
        return make_record(g, instance_id, Verdict::NotRelated, vid,
                           "evidence lacks target attribute " + quote(*g.target_attr));
    }
    if (text::values_equal(target, *evidence)) {
        return make_record(g, instance_id, Verdict::Verified, vid,
                           "key matches and " + *g.target_attr + " = " + quote(*evidence));
    }
    return make_record(g, instance_id, Verdict::Refuted, vid,
                       "key matches but " + *g.target_attr + " is " + quote(*evidence) + ", not " + quote(target));
}

// --- (imputed tuple, text) ---------------------------------------------------

VerdictRecord verify_tuple_text(const DataObject& g, const TextChunk& x, std::string_view instance_id) {
    constexpr auto vid = verifier_ids::kLexicalText;
    if (!g.tuple || !g.target_attr) throw ContractError("verify_tuple_text needs an imputed tuple with a target attribute");
    const Tuple& gt = *g.tuple;

    std::vector<std::string> key_tokens;
    for (const auto& key : gt.key_attrs) {
        for (auto& t : content_tokens(gt.value_of(key).value_or(""))) key_tokens.push_back(std::move(t));
    }
    const auto target_value = gt.value_of(*g.target_attr).value_or("");
    auto value_tokens = content_tokens(target_value);
    if (value_tokens.empty()) value_tokens = tokenize(target_value);
    const auto attr_tokens = content_tokens(*g.target_attr);

    const auto chunk = tokenize(x.text);
    const std::set<std::string> chunk_set(chunk.begin(), chunk.end());
    auto contains_all = [&](const std::vector<std::string>& ts) {
        return !ts.empty() && std::all_of(ts.begin(), ts.end(), [&](const auto& t) { return chunk_set.count(t) > 0; });
    };

    if (!contains_all(key_tokens)) {
        return make_record(g, instance_id, Verdict::NotRelated, vid, "chunk does not mention the tuple's key");
    }

    std::vector<std::size_t> attr_pos;
    std::vector<std::size_t> value_pos;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        if (std::find(attr_tokens.begin(), attr_tokens.end(), chunk[i]) != attr_tokens.end()) attr_pos.push_back(i);
        if (std::find(value_tokens.begin(), value_tokens.end(), chunk[i]) != value_tokens.end()) value_pos.push_back(i);
    }
    const bool names_attribute = contains_all(attr_tokens);

    bool stated = false;
    if (names_attribute) {
        // every value token must sit near a mention of the attribute
        stated = !value_tokens.empty() && std::all_of(value_tokens.begin(), value_tokens.end(), [&](const auto& vt) {
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                if (chunk[i] == vt && near_any(i, attr_pos, kAttributeWindow)) return true;
            }
            return false;
        });
    } else {
        stated = contains_all(value_tokens);
    }

    if (stated) {
        const auto neg = negation_positions(chunk);
        for (auto p : value_pos) {
            if (near_any(p, neg, kNegationWindow)) {
                return make_record(g, instance_id, Verdict::Refuted, vid,
                                   "chunk negates " + *g.target_attr + " = " + quote(target_value));
            }
        }
        return make_record(g, instance_id, Verdict::Verified, vid,
                           "chunk states " + *g.target_attr + " = " + quote(target_value));
    }
    if (names_attribute) {
        return make_record(g, instance_id, Verdict::Refuted, vid,
                           "chunk describes " + *g.target_attr + " without " + quote(target_value));
    }
    return make_record(g, instance_id, Verdict::NotRelated, vid, "chunk does not mention " + *g.target_attr);
}

// --- (claim, text) -----------------------------------------------------------

VerdictRecord verify_claim_text(const DataObject& g, const TextChunk& x, std::string_view instance_id) {
    constexpr auto vid = verifier_ids::kLexicalText;
    const auto claim_tokens = tokenize(g.claim_text.value_or(""));
    const auto content = content_tokens(claim_tokens);
    if (content.empty()) return make_record(g, instance_id, Verdict::NotRelated, vid, "claim has no content words");

    const auto chunk = tokenize(x.text);
    const std::set<std::string> chunk_set(chunk.begin(), chunk.end());
    std::set<std::string> matched;
    for (const auto& t : content) {
        if (chunk_set.count(t)) matched.insert(t);
    }
    const double c = static_cast<double>(matched.size()) / static_cast<double>(content.size());
    const std::string ratio = std::to_string(matched.size()) + "/" + std::to_string(content.size());
    if (c < kContainmentThreshold) {
        return make_record(g, instance_id, Verdict::NotRelated, vid, "content-word containment " + ratio + " below 0.5");
    }

    const auto chunk_numbers = extract_numbers(x.text);
    const auto entities = entity_tokens(g.claim_text.value_or(""));
    const bool names_entities =
        std::all_of(entities.begin(), entities.end(), [&](const std::string& e) { return chunk_set.count(e) > 0; });
    if (!names_entities) {
        return make_record(g, instance_id, Verdict::NotRelated, vid,
                           "containment " + ratio + " but the chunk does not name every claim entity");
    }
    for (const auto& n : extract_numbers(g.claim_text.value_or(""))) {
        const bool stated = std::any_of(chunk_numbers.begin(), chunk_numbers.end(),
                                        [&](const NumberMention& m) { return numbers_equal(m.value, n.value); });
        if (stated) continue;
        if (!chunk_numbers.empty()) {
            return make_record(g, instance_id, Verdict::Refuted, vid,
                               "containment " + ratio + "; the chunk does not state " + n.text);
        }
        return make_record(g, instance_id, Verdict::NotRelated, vid,
                           "containment " + ratio + "; the chunk states no figures to compare with " + n.text);
    }

    const auto neg = negation_positions(chunk);
    bool chunk_negates = false;
    for (std::size_t i = 0; i < chunk.size() && !chunk_negates; ++i) {
        if (matched.count(chunk[i]) && near_any(i, neg, kNegationWindow)) chunk_negates = true;
    }
    const bool claim_negates = !negation_positions(claim_tokens).empty();
    if (chunk_negates != claim_negates) {
        return make_record(g, instance_id, Verdict::Refuted, vid,
                           "containment " + ratio + "; negation polarity differs between claim and chunk");
    }
    return make_record(g, instance_id, Verdict::Verified, vid, "containment " + ratio + "; polarity agrees");
}

// --- (claim, table) ----------------------------------------------------------

VerdictRecord verify_claim_table(const DataObject& g, const Table& x, std::string_view instance_id) {
    constexpr auto vid = verifier_ids::kTableClaim;
    const std::string claim = g.claim_text.value_or("");
    const auto entities = entity_tokens(claim);
    if (entities.empty()) return make_record(g, instance_id, Verdict::NotRelated, vid, "claim names no entities");

    std::vector<std::set<std::string>> row_tokens;
    std::set<std::string> cell_tokens;
    row_tokens.reserve(x.rows.size());
    for (const auto& row : x.rows) {
        std::set<std::string> rt;
        for (const auto& cell : row) {
            for (auto& t : tokenize(cell)) rt.insert(std::move(t));
        }
        cell_tokens.insert(rt.begin(), rt.end());
        row_tokens.push_back(std::move(rt));
    }

    std::size_t present = 0;
    for (const auto& e : entities) present += cell_tokens.count(e);
    const std::string gate = std::to_string(present) + "/" + std::to_string(entities.size());
    if (static_cast<double>(present) < kEntityGate * static_cast<double>(entities.size())) {
        return make_record(g, instance_id, Verdict::NotRelated, vid, "only " + gate + " claim entities occur in the table");
    }

    std::size_t best = 0;
    for (const auto& rt : row_tokens) {
        std::size_t m = 0;
        for (const auto& e : entities) m += rt.count(e);
        best = std::max(best, m);
    }
    std::vector<std::size_t> rows;
    if (best > 0) {
        for (std::size_t r = 0; r < row_tokens.size(); ++r) {
            std::size_t m = 0;
            for (const auto& e : entities) m += row_tokens[r].count(e);
            if (m == best) rows.push_back(r);
        }
    }

    // Numbers that only restate the table's name or header are context, not claims.
    std::set<std::string> context = token_set(x.name);
    for (const auto& h : x.schema) {
        for (auto& t : tokenize(h)) context.insert(std::move(t));
    }
    std::vector<NumberMention> numbers;
    for (auto& n : extract_numbers(claim)) {
        if (!context.count(n.text)) numbers.push_back(std::move(n));
    }

    if (numbers.empty()) {
        const double share = static_cast<double>(best) / static_cast<double>(entities.size());
        if (share >= kRowMatchForVerified) {
            return make_record(g, instance_id, Verdict::Verified, vid,
                               "row " + std::to_string(rows.front()) + " matches " + std::to_string(best) + "/" +
                                   std::to_string(entities.size()) + " claim entities");
        }
        return make_record(g, instance_id, Verdict::NotRelated, vid, "no single row matches the claim's entities");
    }
    if (rows.empty()) return make_record(g, instance_id, Verdict::NotRelated, vid, "no row mentions the claim's entities");
    if (static_cast<double>(best) < kRowMatchForVerified * static_cast<double>(entities.size())) {
        return make_record(g, instance_id, Verdict::NotRelated, vid,
                           "best row matches only " + std::to_string(best) + "/" + std::to_string(entities.size()) +
                               " claim entities");
    }

    // Columns the claim talks about; without any, every column is in context.
    const auto claim_set = token_set(claim);
    std::vector<bool> in_context(x.schema.size(), false);
    bool any_context = false;
    for (std::size_t c = 0; c < x.schema.size(); ++c) {
        for (const auto& t : content_tokens(x.schema[c])) {
            if (claim_set.count(t)) {
                in_context[c] = true;
                any_context = true;
            }
        }
    }
    if (!any_context) std::fill(in_context.begin(), in_context.end(), true);

    std::size_t found = 0;
    for (const auto& n : numbers) {
        bool hit = false;
        bool contradicted = false;
        std::string seen_value;
        for (auto r : rows) {
            for (std::size_t c = 0; c < x.rows[r].size(); ++c) {
                const auto cell_numbers = extract_numbers(x.rows[r][c]);
                for (const auto& cn : cell_numbers) {
                    if (numbers_equal(cn.value, n.value)) hit = true;
                }
                if (in_context[c] && !cell_numbers.empty() && seen_value.empty()) seen_value = x.rows[r][c];
            }
        }
        if (hit) {
            ++found;
            continue;
        }
        contradicted = !seen_value.empty();
        if (contradicted) {
            return make_record(g, instance_id, Verdict::Refuted, vid,
                               "claim says " + n.text + " but the matching row has " + quote(seen_value));
        }
    }
    if (found == numbers.size()) {
        return make_record(g, instance_id, Verdict::Verified, vid,
                           "all " + std::to_string(found) + " claim numbers occur in the matching rows");
    }
    return make_record(g, instance_id, Verdict::NotRelated, vid, "matching rows hold no comparable numbers");
}

}  // namespace verifai
