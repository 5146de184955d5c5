#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "verifai/embed.hpp"
#include "verifai/lake.hpp"

namespace verifai {

enum class Scorer { MaxSimText, MaxSimTable, TupleOverlap };

std::string_view to_string(Scorer s) noexcept;
Scorer parse_scorer(std::string_view s);

struct RerankResult {
    std::string instance_id;
    double score = 0.0;
    std::size_t rank = 0;
    Scorer scorer = Scorer::MaxSimText;

    bool operator==(const RerankResult&) const = default;
};

inline constexpr std::size_t kDefaultRerankDepth = 5;

/// Late interaction: sum over query rows of the best cosine against any
/// document row. Zero when either side is empty; RerankError on a dim mismatch.
double maxsim_score(const TokenEmbeddingMatrix& query, const TokenEmbeddingMatrix& doc);

template <typename T>
using Candidates = std::vector<std::pair<std::string, T>>;

std::vector<RerankResult> rerank_text_text(std::string_view query, const Candidates<std::string>& candidates,
                                           std::size_t k_prime = kDefaultRerankDepth);

/// Tables are rendered with serialize_table(row_limit 50) and scored by MaxSim.
std::vector<RerankResult> rerank_text_table(std::string_view claim, const Candidates<Table>& candidates,
                                            std::size_t k_prime = kDefaultRerankDepth);

struct TupleRerankWeights {
    double key = 0.7;
    double all = 0.3;
};

/// Jaccard over normalized cell values. The key part compares the query's
/// key attributes with the candidate's cells under the same attribute names.
double tuple_overlap_score(const Tuple& query, const Tuple& candidate, const TupleRerankWeights& weights = {});

std::vector<RerankResult> rerank_tuple_tuple(const Tuple& query, const Candidates<Tuple>& candidates,
                                             std::size_t k_prime = kDefaultRerankDepth,
                                             const TupleRerankWeights& weights = {});

}  // namespace verifai
