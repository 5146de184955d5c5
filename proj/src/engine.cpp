#include "verifai/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <string>

#include "verifai/error.hpp"
#include "verifai/provenance.hpp"

namespace verifai {

std::size_t RerankDepths::for_modality(Modality m) const noexcept {
    switch (m) {
        case Modality::Tuple: return tuple;
        case Modality::Text: return text;
        case Modality::Table: return table;
    }
    return table;
}

void EngineConfig::validate() const {
    if (k < 1 || k > kMaxRetrievalDepth) {
        throw ContractError("k must lie in [1, " + std::to_string(kMaxRetrievalDepth) + "], got " + std::to_string(k));
    }
    for (auto m : {Modality::Tuple, Modality::Text, Modality::Table}) {
        const auto kp = k_prime.for_modality(m);
        if (kp < 1 || kp > k) {
            throw ContractError("k' for " + std::string(to_string(m)) + " must lie in [1, k], got " + std::to_string(kp));
        }
    }
    if (tuple_weights.key < 0.0 || tuple_weights.all < 0.0) throw ContractError("tuple rerank weights must be >= 0");
    trust.validate();
    if (mode == VerifierMode::External && !llm) throw ContractError("external verifier mode needs an LLM endpoint");
}

const std::vector<RerankResult>& HitTrail::reranked(Modality m) const {
    switch (m) {
        case Modality::Tuple: return rerank_tuple;
        case Modality::Text: return rerank_text;
        case Modality::Table: return rerank_table;
    }
    return rerank_table;
}

std::int64_t default_clock_ms() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        char* end = nullptr;
        const long long secs = std::strtoll(epoch, &end, 10);
        if (end && *end == '\0') return static_cast<std::int64_t>(secs) * 1000;
    }
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

std::vector<RerankResult> rerank_modality(const DataObject& g, Modality m, const std::vector<const DataInstance*>& hits,
                                          const std::string& query, const EngineConfig& config) {
    const std::size_t depth = config.k_prime.for_modality(m);
    switch (m) {
        case Modality::Tuple: {
            Candidates<Tuple> c;
            for (const auto* x : hits) c.emplace_back(x->instance_id, *x->tuple());
            return rerank_tuple_tuple(*g.tuple, c, depth, config.tuple_weights);
        }
        case Modality::Text: {
            Candidates<std::string> c;
            for (const auto* x : hits) c.emplace_back(x->instance_id, x->chunk()->text);
            return rerank_text_text(query, c, depth);
        }
        case Modality::Table: {
            Candidates<Table> c;
            for (const auto* x : hits) c.emplace_back(x->instance_id, *x->table());
            return rerank_text_table(query, c, depth);
        }
    }
    return {};
}

std::vector<RerankResult>& trail_slot(HitTrail& trail, Modality m) {
    switch (m) {
        case Modality::Tuple: return trail.rerank_tuple;
        case Modality::Text: return trail.rerank_text;
        case Modality::Table: return trail.rerank_table;
    }
    return trail.rerank_table;
}

}  // namespace

VerificationReport verify_object(const DataObject& g, const DataLake& lake, const ContentIndex& content,
                                 const VectorIndex& vectors, const Embedder& embedder,
                                 const VerifierRegistry& registry, const EngineConfig& config,
                                 std::int64_t timestamp_ms) {
    VerificationReport report;
    report.object = g;
    report.timestamp_ms = timestamp_ms;
    report.config = {config.k, config.k_prime, config.mode, embedder.tag(), config.trust, config.withhold_evidence};

    try {
        g.validate();
    } catch (const Error& e) {
        report.errors.push_back({"validate", "", e.what()});
        return report;
    }
    if (config.withhold_evidence) return report;

    const std::string query = serialize_object(g);

    try {
        report.hits.content = content.search(query, config.k);
    } catch (const Error& e) {
        report.errors.push_back({"retrieve_content", "", e.what()});
    }
    try {
        const Embedding q = embedder.embed_one(query);
        if (!q.empty) report.hits.semantic = vectors.search(q.values, config.k);
    } catch (const Error& e) {
        report.errors.push_back({"retrieve_semantic", "", e.what()});
    }
    report.hits.combined = combine({report.hits.content, report.hits.semantic}, config.k);

    const auto modalities = mapped_modalities(g.kind);
    for (const Modality m : modalities) {
        std::vector<const DataInstance*> hits;
        for (const auto& h : report.hits.combined) {
            const DataInstance* x = lake.find(h.instance_id);
            if (x == nullptr) {
                report.errors.push_back({"retrieve", h.instance_id, "instance not in lake"});
                continue;
            }
            if (x->modality() == m) hits.push_back(x);
        }
        if (hits.empty()) continue;
        try {
            trail_slot(report.hits, m) = rerank_modality(g, m, hits, query, config);
        } catch (const Error& e) {
            report.errors.push_back({"rerank", "", std::string(to_string(m)) + ": " + e.what()});
        }
    }

    for (const Modality m : modalities) {
        const auto& survivors = report.hits.reranked(m);
        if (survivors.empty()) continue;
        const Verifier* verifier = nullptr;
        try {
            verifier = registry.find(select_verifier(g, m, registry, config.mode));
        } catch (const Error& e) {
            report.errors.push_back({"dispatch", "", e.what()});
            continue;
        }
        for (const auto& r : survivors) {
            try {
                report.records.push_back(verifier->verify(g, lake.at(r.instance_id)));
            } catch (const Error& e) {
                report.errors.push_back({"verify", r.instance_id, e.what()});
            }
        }
    }

    const auto agg = aggregate(
        report.records,
        [&lake](std::string_view id) -> std::optional<std::string> {
            if (const auto* x = lake.find(id)) return x->source_id;
            return std::nullopt;
        },
        config.trust);
    report.aggregate = agg.verdict;
    report.conflict = agg.conflict;
    return report;
}

// --- Engine --------------------------------------------------------------------

namespace {

std::shared_ptr<const Embedder> make_embedder(const EngineConfig& config) {
    if (config.embed_service) return std::make_shared<ExternalEmbedder>(*config.embed_service, config.embed_service_dim);
    return std::make_shared<HashedTextEmbedder>();
}

VerifierRegistry make_registry(const EngineConfig& config) {
    if (config.mode != VerifierMode::Local && config.llm) return VerifierRegistry::with_external(*config.llm);
    return VerifierRegistry::local();
}

}  // namespace

Engine::Engine(std::shared_ptr<const DataLake> lake, ContentIndex content, VectorIndex vectors,
               std::shared_ptr<const Embedder> embedder, VerifierRegistry registry, EngineConfig config)
    : lake_(std::move(lake)),
      content_(std::move(content)),
      vectors_(std::move(vectors)),
      embedder_(std::move(embedder)),
      registry_(std::move(registry)),
      config_(std::move(config)),
      clock_(default_clock_ms) {
    config_.validate();
    if (!lake_ || !embedder_) throw ContractError("engine needs a lake and an embedder");
    if (vectors_.embedder_tag() != embedder_->tag()) {
        throw IndexError("vector index was built with '" + vectors_.embedder_tag() + "' but the engine embeds with '" +
                         embedder_->tag() + "'");
    }
    if (config_.log_path) log_ = std::make_unique<LineageLog>(*config_.log_path);
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

Engine Engine::build(DataLake lake, EngineConfig config) {
    config.validate();
    auto shared = std::make_shared<const DataLake>(std::move(lake));
    auto embedder = make_embedder(config);
    auto content = ContentIndex::build(shared->instances());
    auto vectors = VectorIndex::build(shared->instances(), *embedder);
    auto registry = make_registry(config);
    return Engine(std::move(shared), std::move(content), std::move(vectors), std::move(embedder), std::move(registry),
                  std::move(config));
}

Engine Engine::open(EngineConfig config) {
    config.validate();
    auto shared = std::make_shared<const DataLake>(load_lake(config.lake_dir));
    auto content = ContentIndex::load(config.index_dir / kContentIndexFile);
    auto vectors = VectorIndex::load(config.index_dir / kVectorIndexFile);

    std::vector<std::string> ids;
    ids.reserve(shared->size());
    for (const auto& x : shared->instances()) ids.push_back(x.instance_id);
    std::sort(ids.begin(), ids.end());
    if (ids != content.doc_ids() || vectors.size() != ids.size()) {
        throw IndexError("index in " + config.index_dir.string() + " does not match the lake in " +
                         config.lake_dir.string() + "; rebuild it");
    }

    auto embedder = make_embedder(config);
    auto registry = make_registry(config);
    return Engine(std::move(shared), std::move(content), std::move(vectors), std::move(embedder), std::move(registry),
                  std::move(config));
}

VerifyOutcome Engine::verify(const DataObject& g) const {
    VerifyOutcome out;
    out.report = verify_object(g, *lake_, content_, vectors_, *embedder_, registry_, config_, clock_());
    if (log_) {
        try {
            out.lineage_id = log_->record(out.report);
        } catch (const Error& e) {
            out.report.errors.push_back({"provenance", "", e.what()});
        }
    }
    return out;
}

}  // namespace verifai
