#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verifai/embed.hpp"
#include "verifai/lake.hpp"

namespace verifai {

enum class Retriever { Content, Semantic, Combined };

std::string_view to_string(Retriever r) noexcept;
Retriever parse_retriever(std::string_view s);

/// One entry of a ranked evidence list. Within a list ranks run 1..n and
/// scores never increase with rank.
struct RetrievalHit {
    std::string instance_id;
    double score = 0.0;
    std::size_t rank = 0;
    Retriever retriever = Retriever::Content;
    // Best score each retriever gave this instance; filled in by combine().
    std::optional<double> content_score;
    std::optional<double> semantic_score;

    bool operator==(const RetrievalHit&) const = default;
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr std::string_view kIndexMagic = "VFAI-IDX";
inline constexpr std::size_t kDefaultRetrievalDepth = 100;
inline constexpr std::size_t kMaxRetrievalDepth = 1000;

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    bool operator==(const Bm25Params&) const = default;
};

/// Okapi BM25 inverted index over serialized instances.
class ContentIndex {
public:
    struct Posting {
        std::uint32_t doc = 0;  // position in doc_ids()
        std::uint32_t tf = 0;

        bool operator==(const Posting&) const = default;
    };

    struct Document {
        std::string instance_id;
        std::string text;
    };

    ContentIndex() = default;

    static ContentIndex build(std::span<const DataInstance> instances, Bm25Params params = {});
    /// Indexes raw texts; ids must be unique (IndexError otherwise).
    static ContentIndex build(std::vector<Document> documents, Bm25Params params = {});

    /// BM25 with idf = ln(1 + (N - n + 0.5) / (n + 0.5)), summed over the
    /// distinct query tokens. Only documents scoring above zero are returned,
    /// ordered by (score desc, instance_id asc).
    std::vector<RetrievalHit> search(std::string_view query, std::size_t k) const;

    std::size_t doc_count() const noexcept { return doc_ids_.size(); }
    double avg_doc_len() const noexcept { return avg_doc_len_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_len_; }
    const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const noexcept { return postings_; }
    std::optional<std::uint32_t> doc_len(std::string_view instance_id) const;

    void write(std::ostream& out) const;
    static ContentIndex read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static ContentIndex load(const std::filesystem::path& path);

    bool operator==(const ContentIndex&) const = default;

private:
    void finalize();

    Bm25Params params_;
    std::vector<std::string> doc_ids_;  // ascending
    std::vector<std::uint32_t> doc_len_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    double avg_doc_len_ = 0.0;
};

/// Exact cosine top-k over instance embeddings.
class VectorIndex {
public:
    struct Entry {
        std::string instance_id;
        std::vector<double> vector;
        bool empty = false;  // zero vector; never returned by search

        bool operator==(const Entry&) const = default;
    };

    VectorIndex() = default;
    VectorIndex(std::size_t dim, std::string embedder_tag);

    /// Throws IndexError naming the instance whose embedding failed.
    static VectorIndex build(std::span<const DataInstance> instances, const Embedder& embedder);

    /// Throws IndexError on a dimension mismatch or a non-unit, non-empty vector.
    void add(std::string instance_id, const Embedding& e);

    /// Cosine against every non-empty entry, ties by instance_id asc.
    /// Throws IndexError when query.size() != dim().
    std::vector<RetrievalHit> search(std::span<const double> query, std::size_t k) const;

    std::size_t dim() const noexcept { return dim_; }
    const std::string& embedder_tag() const noexcept { return tag_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    void write(std::ostream& out) const;
    static VectorIndex read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

    bool operator==(const VectorIndex&) const = default;

private:
    std::size_t dim_ = 0;
    std::string tag_;
    std::vector<Entry> entries_;
};

inline constexpr double kRrfConstant = 60.0;

/// Union of the lists with duplicates removed, ordered by reciprocal rank
/// fusion  sum 1/(60 + rank)  (ties by instance_id asc), truncated to k.
std::vector<RetrievalHit> combine(const std::vector<std::vector<RetrievalHit>>& result_lists, std::size_t k);

}  // namespace verifai
