#include "verifai/rerank.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "verifai/error.hpp"
#include "verifai/text.hpp"

namespace verifai {

std::string_view to_string(Scorer s) noexcept {
    switch (s) {
        case Scorer::MaxSimText: return "maxsim_text";
        case Scorer::MaxSimTable: return "maxsim_table";
        case Scorer::TupleOverlap: return "tuple_overlap";
    }
    return "unknown";
}

Scorer parse_scorer(std::string_view s) {
    if (s == "maxsim_text") return Scorer::MaxSimText;
    if (s == "maxsim_table") return Scorer::MaxSimTable;
    if (s == "tuple_overlap") return Scorer::TupleOverlap;
    throw ContractError("unknown scorer '" + std::string(s) + "'");
}

double maxsim_score(const TokenEmbeddingMatrix& query, const TokenEmbeddingMatrix& doc) {
    if (query.empty() || doc.empty()) return 0.0;
    if (query.dim != doc.dim) {
        throw RerankError("token dim mismatch: query " + std::to_string(query.dim) + ", document " +
                          std::to_string(doc.dim));
    }
    std::vector<double> doc_norms(doc.rows());
    for (std::size_t j = 0; j < doc.rows(); ++j) doc_norms[j] = l2_norm(doc.row(j));
    double total = 0.0;
    for (std::size_t i = 0; i < query.rows(); ++i) {
        const auto q = query.row(i);
        const double qn = l2_norm(q);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < doc.rows(); ++j) {
            const double denom = qn * doc_norms[j];
            best = std::max(best, denom > 0.0 ? dot(q, doc.row(j)) / denom : 0.0);
        }
        total += best;
    }
    return total;
}

namespace {

std::vector<RerankResult> top_k(std::vector<RerankResult> scored, std::size_t k_prime) {
    std::sort(scored.begin(), scored.end(), [](const RerankResult& a, const RerankResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.instance_id < b.instance_id;
    });
    if (scored.size() > k_prime) scored.resize(k_prime);
    for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
    return scored;
}

template <typename T, typename Render>
std::vector<RerankResult> rerank_maxsim(std::string_view query, const Candidates<T>& candidates, std::size_t k_prime,
                                        Scorer scorer, Render render) {
    const auto q = embed_tokens(query);
    std::vector<RerankResult> scored;
    scored.reserve(candidates.size());
    for (const auto& [id, payload] : candidates) {
        scored.push_back({id, maxsim_score(q, embed_tokens(render(payload))), 0, scorer});
    }
    return top_k(std::move(scored), k_prime);
}

std::set<std::string> value_set(const std::vector<std::string>& values) {
    std::set<std::string> out;
    for (const auto& v : values) {
        auto n = text::normalize_value(v);
        if (!n.empty()) out.insert(std::move(n));
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& v : a) inter += b.count(v);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

std::vector<RerankResult> rerank_text_text(std::string_view query, const Candidates<std::string>& candidates,
                                           std::size_t k_prime) {
    return rerank_maxsim(query, candidates, k_prime, Scorer::MaxSimText, [](const std::string& s) -> const std::string& {
        return s;
    });
}

std::vector<RerankResult> rerank_text_table(std::string_view claim, const Candidates<Table>& candidates,
                                            std::size_t k_prime) {
    return rerank_maxsim(claim, candidates, k_prime, Scorer::MaxSimTable,
                         [](const Table& t) { return serialize_table(t, kDefaultTableRowLimit); });
}

double tuple_overlap_score(const Tuple& query, const Tuple& candidate, const TupleRerankWeights& weights) {
    std::vector<std::string> query_keys;
    std::vector<std::string> cand_keys;
    for (const auto& attr : query.key_attrs) {
        if (auto v = query.value_of(attr)) query_keys.push_back(*v);
        if (auto v = candidate.value_of(attr)) cand_keys.push_back(*v);
    }
    const double j_key = jaccard(value_set(query_keys), value_set(cand_keys));
    const double j_all = jaccard(value_set(query.cells), value_set(candidate.cells));
    return weights.key * j_key + weights.all * j_all;
}

std::vector<RerankResult> rerank_tuple_tuple(const Tuple& query, const Candidates<Tuple>& candidates,
                                             std::size_t k_prime, const TupleRerankWeights& weights) {
    std::vector<RerankResult> scored;
    scored.reserve(candidates.size());
    for (const auto& [id, t] : candidates) {
        scored.push_back({id, tuple_overlap_score(query, t, weights), 0, Scorer::TupleOverlap});
    }
    return top_k(std::move(scored), k_prime);
}

}  // namespace verifai
