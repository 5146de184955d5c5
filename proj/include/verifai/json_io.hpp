#pragma once

// JSON wire forms of the domain types. Optional fields are omitted when empty.

#include "json.hpp"
#include "verifai/engine.hpp"
#include "verifai/evalbench.hpp"
#include "verifai/index.hpp"
#include "verifai/lake.hpp"
#include "verifai/provenance.hpp"
#include "verifai/rerank.hpp"
#include "verifai/verify.hpp"

namespace verifai {

using nlohmann::json;

void to_json(json& j, const Tuple& t);
void from_json(const json& j, Tuple& t);
void to_json(json& j, const Table& t);
void from_json(const json& j, Table& t);
void to_json(json& j, const TextChunk& c);
void from_json(const json& j, TextChunk& c);
void to_json(json& j, const SourceDescriptor& s);
void from_json(const json& j, SourceDescriptor& s);
void to_json(json& j, const DataObject& g);
void from_json(const json& j, DataObject& g);

void to_json(json& j, const RetrievalHit& h);
void from_json(const json& j, RetrievalHit& h);
void to_json(json& j, const RerankResult& r);
void from_json(const json& j, RerankResult& r);

void to_json(json& j, const VerdictRecord& r);
void from_json(const json& j, VerdictRecord& r);
void to_json(json& j, const TrustConfig& t);
void from_json(const json& j, TrustConfig& t);

void to_json(json& j, const RerankDepths& d);
void from_json(const json& j, RerankDepths& d);
void to_json(json& j, const ConfigSnapshot& c);
void from_json(const json& j, ConfigSnapshot& c);
void to_json(json& j, const StageError& e);
void from_json(const json& j, StageError& e);
void to_json(json& j, const HitTrail& h);
void from_json(const json& j, HitTrail& h);
void to_json(json& j, const VerificationReport& r);
void from_json(const json& j, VerificationReport& r);

void to_json(json& j, const LineageSummary& s);

void to_json(json& j, const BenchmarkSpec& s);
void from_json(const json& j, BenchmarkSpec& s);
void to_json(json& j, const MetricRow& r);

}  // namespace verifai
