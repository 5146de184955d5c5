#include "verifai/json_io.hpp"

#include "verifai/error.hpp"

namespace verifai {

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
    else v.reset();
}

}  // namespace

void to_json(json& j, const Tuple& t) {
    j = json{{"table_id", t.table_id}, {"row_index", t.row_index}, {"schema", t.schema},
             {"cells", t.cells},       {"key_attrs", t.key_attrs}};
}

void from_json(const json& j, Tuple& t) {
    j.at("table_id").get_to(t.table_id);
    t.row_index = j.value("row_index", std::size_t{0});
    j.at("schema").get_to(t.schema);
    j.at("cells").get_to(t.cells);
    t.key_attrs = j.value("key_attrs", std::vector<std::string>{});
}

void to_json(json& j, const Table& t) {
    j = json{{"table_id", t.table_id}, {"name", t.name}, {"schema", t.schema}, {"rows", t.rows}};
}

void from_json(const json& j, Table& t) {
    j.at("table_id").get_to(t.table_id);
    t.name = j.value("name", t.table_id);
    j.at("schema").get_to(t.schema);
    j.at("rows").get_to(t.rows);
}

void to_json(json& j, const TextChunk& c) {
    j = json{{"chunk_id", c.chunk_id}, {"source_file", c.source_file}, {"seq", c.seq},
             {"text", c.text},         {"span", {c.span.start, c.span.end}}};
}

void from_json(const json& j, TextChunk& c) {
    j.at("chunk_id").get_to(c.chunk_id);
    j.at("source_file").get_to(c.source_file);
    j.at("seq").get_to(c.seq);
    j.at("text").get_to(c.text);
    const auto& span = j.at("span");
    c.span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
}

void to_json(json& j, const SourceDescriptor& s) {
    j = json{{"source_id", s.source_id}, {"path", s.path}, {"modality", to_string(s.modality)}, {"count", s.count}};
}

void from_json(const json& j, SourceDescriptor& s) {
    j.at("source_id").get_to(s.source_id);
    j.at("path").get_to(s.path);
    s.modality = parse_modality(j.at("modality").get<std::string>());
    j.at("count").get_to(s.count);
}

void to_json(json& j, const DataObject& g) {
    j = json{{"object_id", g.object_id}, {"kind", to_string(g.kind)}};
    put_optional(j, "tuple", g.tuple);
    put_optional(j, "claim_text", g.claim_text);
    put_optional(j, "target_attr", g.target_attr);
}

void from_json(const json& j, DataObject& g) {
    j.at("object_id").get_to(g.object_id);
    g.kind = parse_object_kind(j.at("kind").get<std::string>());
    get_optional(j, "tuple", g.tuple);
    get_optional(j, "claim_text", g.claim_text);
    get_optional(j, "target_attr", g.target_attr);
}

void to_json(json& j, const RetrievalHit& h) {
    j = json{{"instance_id", h.instance_id}, {"score", h.score}, {"rank", h.rank}, {"retriever", to_string(h.retriever)}};
    put_optional(j, "content_score", h.content_score);
    put_optional(j, "semantic_score", h.semantic_score);
}

void from_json(const json& j, RetrievalHit& h) {
    j.at("instance_id").get_to(h.instance_id);
    j.at("score").get_to(h.score);
    j.at("rank").get_to(h.rank);
    h.retriever = parse_retriever(j.at("retriever").get<std::string>());
    get_optional(j, "content_score", h.content_score);
    get_optional(j, "semantic_score", h.semantic_score);
}

void to_json(json& j, const RerankResult& r) {
    j = json{{"instance_id", r.instance_id}, {"score", r.score}, {"rank", r.rank}, {"scorer", to_string(r.scorer)}};
}

void from_json(const json& j, RerankResult& r) {
    j.at("instance_id").get_to(r.instance_id);
    j.at("score").get_to(r.score);
    j.at("rank").get_to(r.rank);
    r.scorer = parse_scorer(j.at("scorer").get<std::string>());
}

void to_json(json& j, const VerdictRecord& r) {
    j = json{{"object_id", r.object_id},
             {"instance_id", r.instance_id},
             {"verdict", to_string(r.verdict)},
             {"code", static_cast<int>(r.verdict)},
             {"verifier_id", r.verifier_id},
             {"explanation", r.explanation}};
    put_optional(j, "raw_response", r.raw_response);
}

void from_json(const json& j, VerdictRecord& r) {
    j.at("object_id").get_to(r.object_id);
    j.at("instance_id").get_to(r.instance_id);
    r.verdict = parse_verdict_name(j.at("verdict").get<std::string>());
    j.at("verifier_id").get_to(r.verifier_id);
    r.explanation = j.value("explanation", std::string{});
    get_optional(j, "raw_response", r.raw_response);
}

void to_json(json& j, const TrustConfig& t) {
    j = json{{"default_weight", t.default_weight}, {"per_source", t.per_source}};
}

void from_json(const json& j, TrustConfig& t) {
    t.default_weight = j.value("default_weight", 1.0);
    t.per_source = j.value("per_source", std::map<std::string, double>{});
}

void to_json(json& j, const RerankDepths& d) {
    j = json{{"tuple", d.tuple}, {"text", d.text}, {"table", d.table}};
}

void from_json(const json& j, RerankDepths& d) {
    j.at("tuple").get_to(d.tuple);
    j.at("text").get_to(d.text);
    j.at("table").get_to(d.table);
}

void to_json(json& j, const ConfigSnapshot& c) {
    j = json{{"k", c.k},
             {"k_prime", c.k_prime},
             {"mode", to_string(c.mode)},
             {"embedder_tag", c.embedder_tag},
             {"trust", c.trust},
             {"withhold_evidence", c.withhold_evidence}};
}

void from_json(const json& j, ConfigSnapshot& c) {
    j.at("k").get_to(c.k);
    j.at("k_prime").get_to(c.k_prime);
    c.mode = parse_verifier_mode(j.at("mode").get<std::string>());
    j.at("embedder_tag").get_to(c.embedder_tag);
    j.at("trust").get_to(c.trust);
    c.withhold_evidence = j.value("withhold_evidence", false);
}

void to_json(json& j, const StageError& e) {
    j = json{{"stage", e.stage}, {"instance_id", e.instance_id}, {"message", e.message}};
}

void from_json(const json& j, StageError& e) {
    j.at("stage").get_to(e.stage);
    j.at("instance_id").get_to(e.instance_id);
    j.at("message").get_to(e.message);
}

void to_json(json& j, const HitTrail& h) {
    j = json{{"content", h.content},           {"semantic", h.semantic},       {"combined", h.combined},
             {"rerank_tuple", h.rerank_tuple}, {"rerank_text", h.rerank_text}, {"rerank_table", h.rerank_table}};
}

void from_json(const json& j, HitTrail& h) {
    j.at("content").get_to(h.content);
    j.at("semantic").get_to(h.semantic);
    j.at("combined").get_to(h.combined);
    j.at("rerank_tuple").get_to(h.rerank_tuple);
    j.at("rerank_text").get_to(h.rerank_text);
    j.at("rerank_table").get_to(h.rerank_table);
}

void to_json(json& j, const VerificationReport& r) {
    j = json{{"object", r.object},
             {"hits", r.hits},
             {"records", r.records},
             {"aggregate", to_string(r.aggregate)},
             {"conflict", r.conflict},
             {"config", r.config},
             {"timestamp_ms", r.timestamp_ms},
             {"errors", r.errors}};
}

void from_json(const json& j, VerificationReport& r) {
    j.at("object").get_to(r.object);
    j.at("hits").get_to(r.hits);
    j.at("records").get_to(r.records);
    r.aggregate = parse_verdict_name(j.at("aggregate").get<std::string>());
    j.at("conflict").get_to(r.conflict);
    j.at("config").get_to(r.config);
    j.at("timestamp_ms").get_to(r.timestamp_ms);
    j.at("errors").get_to(r.errors);
}

void to_json(json& j, const LineageSummary& s) {
    j = json{{"lineage_id", s.lineage_id},
             {"object_id", s.object_id},
             {"aggregate", to_string(s.aggregate)},
             {"conflict", s.conflict},
             {"timestamp_ms", s.timestamp_ms}};
}

void to_json(json& j, const BenchmarkSpec& s) {
    j = json{{"seed", s.seed},
             {"n_tables", s.n_tables},
             {"rows_per_table", s.rows_per_table},
             {"n_objects", s.n_objects},
             {"n_claims", s.n_claims},
             {"corruption_rate", s.corruption_rate},
             {"text_evidence", s.text_evidence}};
}

void from_json(const json& j, BenchmarkSpec& s) {
    const BenchmarkSpec d;
    s.seed = j.value("seed", d.seed);
    s.n_tables = j.value("n_tables", d.n_tables);
    s.rows_per_table = j.value("rows_per_table", d.rows_per_table);
    s.n_objects = j.value("n_objects", d.n_objects);
    s.n_claims = j.value("n_claims", d.n_claims);
    s.corruption_rate = j.value("corruption_rate", d.corruption_rate);
    s.text_evidence = j.value("text_evidence", d.text_evidence);
}

void to_json(json& j, const MetricRow& r) {
    j = json{{"metric", r.metric},   {"generated", r.generated}, {"retrieved", r.retrieved},
             {"setting", r.setting}, {"k", r.k},                 {"objects", r.objects},
             {"value", r.value}};
}

}  // namespace verifai
