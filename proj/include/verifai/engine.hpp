#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "verifai/embed.hpp"
#include "verifai/index.hpp"
#include "verifai/lake.hpp"
#include "verifai/rerank.hpp"
#include "verifai/verify.hpp"

namespace verifai {

class LineageLog;

/// Rerank depth per evidence modality.
struct RerankDepths {
    std::size_t tuple = 3;
    std::size_t text = 3;
    std::size_t table = 5;

    std::size_t for_modality(Modality m) const noexcept;
    bool operator==(const RerankDepths&) const = default;
};

struct EngineConfig {
    std::filesystem::path lake_dir;
    std::filesystem::path index_dir;
    std::size_t k = kDefaultRetrievalDepth;
    RerankDepths k_prime;
    VerifierMode mode = VerifierMode::Local;
    TrustConfig trust;
    TupleRerankWeights tuple_weights;
    std::optional<ExternalVerifierConfig> llm;
    std::optional<ExternalEmbedConfig> embed_service;
    std::size_t embed_service_dim = kTextEmbeddingDim;
    std::optional<std::filesystem::path> log_path;
    // Baseline mode: the verifier sees only the object, never any evidence.
    bool withhold_evidence = false;

    /// k in [1, 1000] and k >= every k'. Throws ContractError.
    void validate() const;
};

/// The engine parameters a report was produced with.
struct ConfigSnapshot {
    std::size_t k = kDefaultRetrievalDepth;
    RerankDepths k_prime;
    VerifierMode mode = VerifierMode::Local;
    std::string embedder_tag;
    TrustConfig trust;
    bool withhold_evidence = false;

    bool operator==(const ConfigSnapshot&) const = default;
};

/// A pipeline stage that failed for one object (or one piece of evidence).
struct StageError {
    std::string stage;
    std::string instance_id;
    std::string message;

    bool operator==(const StageError&) const = default;
};

struct HitTrail {
    std::vector<RetrievalHit> content;
    std::vector<RetrievalHit> semantic;
    std::vector<RetrievalHit> combined;
    std::vector<RerankResult> rerank_tuple;
    std::vector<RerankResult> rerank_text;
    std::vector<RerankResult> rerank_table;

    const std::vector<RerankResult>& reranked(Modality m) const;
    bool operator==(const HitTrail&) const = default;
};

/// End-to-end lineage of one verification.
struct VerificationReport {
    DataObject object;
    HitTrail hits;
    std::vector<VerdictRecord> records;
    Verdict aggregate = Verdict::NotRelated;
    bool conflict = false;
    ConfigSnapshot config;
    std::int64_t timestamp_ms = 0;
    std::vector<StageError> errors;

    bool operator==(const VerificationReport&) const = default;
};

struct VerifyOutcome {
    VerificationReport report;
    std::optional<std::uint64_t> lineage_id;
};

/// Milliseconds since the epoch. Honors SOURCE_DATE_EPOCH (seconds) when set
/// so that repeated runs can be byte-identical.
std::int64_t default_clock_ms();

/// Retrieval, rerank, verification and aggregation over one lake. Immutable
/// after construction apart from provenance appends, which are serialized.
class Engine {
public:
    Engine(std::shared_ptr<const DataLake> lake, ContentIndex content, VectorIndex vectors,
           std::shared_ptr<const Embedder> embedder, VerifierRegistry registry, EngineConfig config);
    ~Engine();
    Engine(Engine&&) noexcept;
    Engine& operator=(Engine&&) noexcept;

    /// Builds both indexes in memory with the built-in embedder.
    static Engine build(DataLake lake, EngineConfig config);

    /// Loads config.lake_dir and the persisted indexes from config.index_dir.
    static Engine open(EngineConfig config);

    /// Total: every failure is captured in the report's errors.
    VerifyOutcome verify(const DataObject& g) const;

    const DataLake& lake() const noexcept { return *lake_; }
    const EngineConfig& config() const noexcept { return config_; }
    const ContentIndex& content_index() const noexcept { return content_; }
    const VectorIndex& vector_index() const noexcept { return vectors_; }
    const VerifierRegistry& registry() const noexcept { return registry_; }
    const Embedder& embedder() const noexcept { return *embedder_; }
    /// Null when no log path is configured.
    LineageLog* log() const noexcept { return log_.get(); }

    void set_clock(std::function<std::int64_t()> clock) { clock_ = std::move(clock); }

private:
    std::shared_ptr<const DataLake> lake_;
    ContentIndex content_;
    VectorIndex vectors_;
    std::shared_ptr<const Embedder> embedder_;
    VerifierRegistry registry_;
    EngineConfig config_;
    std::unique_ptr<LineageLog> log_;
    std::function<std::int64_t()> clock_;
};

inline constexpr const char* kContentIndexFile = "content.idx";
inline constexpr const char* kVectorIndexFile = "vector.idx";

/// The verification pipeline without provenance. Used by Engine::verify.
VerificationReport verify_object(const DataObject& g, const DataLake& lake, const ContentIndex& content,
                                 const VectorIndex& vectors, const Embedder& embedder,
                                 const VerifierRegistry& registry, const EngineConfig& config,
                                 std::int64_t timestamp_ms);

}  // namespace verifai
