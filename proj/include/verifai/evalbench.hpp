#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "verifai/engine.hpp"
#include "verifai/lake.hpp"
#include "verifai/verify.hpp"

namespace verifai {

struct BenchmarkSpec {
    std::uint64_t seed = 42;
    std::size_t n_tables = 200;
    std::size_t rows_per_table = 10;
    std::size_t n_objects = 100;  // imputed-tuple objects
    std::size_t n_claims = 0;     // textual-claim objects, each about one table
    double corruption_rate = 0.0;
    bool text_evidence = false;

    /// Throws BenchError for infeasible specs.
    void validate() const;
    bool operator==(const BenchmarkSpec&) const = default;
};

/// Relevance judgments and gold verdicts.
struct Qrels {
    std::map<std::string, std::set<std::string>> relevant;
    std::map<std::string, Verdict> gold;

    bool operator==(const Qrels&) const = default;
};

struct BenchmarkFile {
    std::string path;  // relative to the lake directory
    std::string contents;
};

struct Benchmark {
    BenchmarkSpec spec;
    DataLake lake;
    std::vector<BenchmarkFile> files;
    std::vector<DataObject> objects;
    Qrels qrels;
};

/// Seeded, deterministic synthetic lake: themed tables with unique entity
/// keys, optional one-chunk entity descriptions, and imputed-tuple / claim
/// objects whose target value is corrupted with probability corruption_rate.
Benchmark gen_benchmark(const BenchmarkSpec& spec);

/// `<dir>/lake/{tables,texts}`, `<dir>/objects.jsonl`, `<dir>/qrels.jsonl`,
/// `<dir>/spec.json`.
void write_benchmark(const Benchmark& bench, const std::filesystem::path& dir);
Benchmark read_benchmark(const std::filesystem::path& dir);

using Runs = std::map<std::string, std::vector<std::string>>;

/// Macro average of |top-k ∩ relevant| / |relevant|. MetricError for objects
/// missing from qrels or with no relevant instances.
double recall_at_k(const Runs& runs, const Qrels& qrels, std::size_t k);

/// Evidence each decision was based on, per object.
using EvidenceSeen = std::map<std::string, std::vector<std::string>>;

/// Fraction of qrels.gold objects decided correctly. The expected verdict is
/// the gold verdict, except NotRelated when `evidence` shows the decision
/// rested only on non-relevant instances. With binary_adapter, Refuted (a
/// binary verifier's "false") also counts where NotRelated is expected.
double verifier_accuracy(const std::map<std::string, Verdict>& decisions, const Qrels& qrels, bool binary_adapter,
                         const EvidenceSeen* evidence = nullptr);

/// Qrels restricted to the given objects and to relevant instances of one
/// modality; objects left without relevant instances are dropped.
Qrels restrict_qrels(const Qrels& qrels, const DataLake& lake, const std::vector<std::string>& object_ids,
                     std::optional<Modality> modality);

struct MetricRow {
    std::string metric;     // "recall" or "accuracy"
    std::string generated;  // "tuple" or "textual claim"
    std::string retrieved;  // "tuple", "text", "table", "tuple+text", ...
    std::string setting;    // "retrieved", "relevant", "no evidence"
    std::size_t k = 0;      // rank cutoff for recall, 0 otherwise
    std::size_t objects = 0;
    double value = 0.0;

    bool operator==(const MetricRow&) const = default;
};

struct BenchmarkRun {
    std::map<std::string, VerificationReport> reports;
    std::vector<MetricRow> rows;
};

/// Verifies every object through an in-memory engine and computes recall and
/// accuracy rows plus the no-evidence baseline.
BenchmarkRun run_benchmark(const Benchmark& bench, const EngineConfig& config);

/// Run records "(object_id, rank, instance_id, score)" per line.
std::string render_runs(const BenchmarkRun& run);

}  // namespace verifai
