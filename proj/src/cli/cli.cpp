#include "cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli/server.hpp"
#include "verifai/engine.hpp"
#include "verifai/error.hpp"
#include "verifai/evalbench.hpp"
#include "verifai/json_io.hpp"
#include "verifai/provenance.hpp"

namespace verifai::cli {

namespace fs = std::filesystem;

namespace {

/// Flags shared by every command that builds an engine.
struct EngineFlags {
    std::string lake;
    std::string index;
    std::size_t k = kDefaultRetrievalDepth;
    RerankDepths k_prime;
    std::string verifier = "local";
    std::string trust;
    std::string log;
    std::string llm_endpoint;
    std::string llm_model = "gpt-3.5-turbo";
    std::string embed_endpoint;
    std::string embed_model = "default";
    std::size_t embed_dim = kTextEmbeddingDim;

    void add_retrieval(CLI::App& app) {
        app.add_option("--k", k, "Retrieval depth per index")->check(CLI::Range(1, 1000));
        app.add_option("--k-prime-tuple", k_prime.tuple, "Rerank depth for tuples");
        app.add_option("--k-prime-text", k_prime.text, "Rerank depth for text chunks");
        app.add_option("--k-prime-table", k_prime.table, "Rerank depth for tables");
        app.add_option("--verifier", verifier, "Verifier mode")->check(CLI::IsMember({"local", "external", "auto"}));
        app.add_option("--trust", trust, "Trust weights file (JSON)");
        app.add_option("--llm-endpoint", llm_endpoint, "Chat-completion URL for the external verifier");
        app.add_option("--llm-model", llm_model, "Model name sent to the external verifier");
        app.add_option("--embed-endpoint", embed_endpoint, "Embedding service URL");
        app.add_option("--embed-model", embed_model, "Model name sent to the embedding service");
        app.add_option("--embed-dim", embed_dim, "Dimension returned by the embedding service");
    }

    void add_lake(CLI::App& app, bool lake_required) {
        auto* opt = app.add_option("--lake", lake, "Lake directory (tables/ and texts/)");
        if (lake_required) opt->required();
        app.add_option("--index", index, "Index directory (default: <lake>/.index)");
    }

    fs::path index_dir() const { return index.empty() ? fs::path(lake) / ".index" : fs::path(index); }

    EngineConfig config() const {
        EngineConfig c;
        c.lake_dir = lake;
        c.index_dir = index_dir();
        c.k = k;
        c.k_prime = k_prime;
        c.mode = parse_verifier_mode(verifier);
        if (!trust.empty()) c.trust = TrustConfig::load(trust);
        if (!log.empty()) c.log_path = fs::path(log);
        if (!llm_endpoint.empty()) {
            ExternalVerifierConfig llm;
            llm.endpoint = llm_endpoint;
            llm.model = llm_model;
            c.llm = llm;
        }
        if (!embed_endpoint.empty()) {
            ExternalEmbedConfig e;
            e.endpoint = embed_endpoint;
            e.model = embed_model;
            c.embed_service = e;
            c.embed_service_dim = embed_dim;
        }
        return c;
    }
};

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A JSON array, a single object, or one object per line.
std::vector<DataObject> parse_objects(const std::string& text) {
    std::vector<DataObject> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return out;
    auto take = [&](const json& j) {
        auto g = j.get<DataObject>();
        g.validate();
        out.push_back(std::move(g));
    };
    try {
        if (text[first] == '[') {
            for (const auto& j : json::parse(text)) take(j);
            return out;
        }
        std::istringstream in(text);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                take(json::parse(line));
            } catch (const json::exception& e) {
                throw ContractError("object line " + std::to_string(n) + ": " + e.what());
            }
        }
    } catch (const json::exception& e) {
        throw ContractError(std::string("malformed object file: ") + e.what());
    }
    return out;
}

std::string fmt_double(double v, int precision = 4) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(precision) << v;
    return ss.str();
}

void print_metric_table(const std::vector<MetricRow>& rows, std::ostream& err) {
    err << std::left << std::setw(10) << "metric" << std::setw(15) << "generated" << std::setw(12) << "retrieved"
        << std::setw(13) << "setting" << std::setw(4) << "k" << std::setw(9) << "objects"
        << "value\n";
    for (const auto& r : rows) {
        err << std::left << std::setw(10) << r.metric << std::setw(15) << r.generated << std::setw(12) << r.retrieved
            << std::setw(13) << r.setting << std::setw(4) << (r.k ? std::to_string(r.k) : "-") << std::setw(9)
            << r.objects << fmt_double(r.value) << "\n";
    }
}

void render_report(const VerificationReport& r, std::uint64_t lineage_id, std::ostream& out) {
    out << "lineage " << lineage_id << "\n";
    out << "object: " << r.object.object_id << " (" << to_string(r.object.kind) << ")\n";
    out << "  " << serialize_object(r.object) << "\n";
    if (r.object.target_attr) out << "  target attribute: " << *r.object.target_attr << "\n";
    out << "aggregate: " << to_string(r.aggregate) << (r.conflict ? " (conflicting evidence)" : "") << "\n";
    out << "timestamp_ms: " << r.timestamp_ms << "\n";
    out << "config: k=" << r.config.k << " k'=" << r.config.k_prime.tuple << "/" << r.config.k_prime.text << "/"
        << r.config.k_prime.table << " verifier=" << to_string(r.config.mode) << " embedder=" << r.config.embedder_tag
        << (r.config.withhold_evidence ? " evidence=withheld" : "") << "\n";
    out << "retrieval: content " << r.hits.content.size() << ", semantic " << r.hits.semantic.size() << ", combined "
        << r.hits.combined.size() << "\n";
    out << "reranked: tuple " << r.hits.rerank_tuple.size() << ", text " << r.hits.rerank_text.size() << ", table "
        << r.hits.rerank_table.size() << "\n";
    out << "evidence verdicts:\n";
    if (r.records.empty()) out << "  (none)\n";
    for (const auto& v : r.records) {
        out << "  " << v.instance_id << "  " << to_string(v.verdict) << "  [" << v.verifier_id << "]  "
            << v.explanation << "\n";
        if (v.raw_response) out << "    raw response: " << *v.raw_response << "\n";
    }
    if (!r.errors.empty()) {
        out << "errors:\n";
        for (const auto& e : r.errors) {
            out << "  " << e.stage << (e.instance_id.empty() ? "" : " " + e.instance_id) << ": " << e.message << "\n";
        }
    }
}

// --- commands ------------------------------------------------------------------

int cmd_index(const EngineFlags& f, std::ostream& out, std::ostream& err) {
    if (!fs::is_directory(f.lake)) throw LakeError("lake directory " + f.lake + " does not exist");
    const DataLake lake = load_lake(f.lake);
    const EngineConfig config = f.config();
    std::shared_ptr<const Embedder> embedder;
    if (config.embed_service) embedder = std::make_shared<ExternalEmbedder>(*config.embed_service, config.embed_service_dim);
    else embedder = std::make_shared<HashedTextEmbedder>();

    const auto content = ContentIndex::build(lake.instances());
    const auto vectors = VectorIndex::build(lake.instances(), *embedder);
    const fs::path dir = f.index_dir();
    fs::create_directories(dir);
    content.save(dir / kContentIndexFile);
    vectors.save(dir / kVectorIndexFile);

    std::size_t tables = 0, tuples = 0, chunks = 0;
    for (const auto& x : lake.instances()) {
        switch (x.modality()) {
            case Modality::Table: ++tables; break;
            case Modality::Tuple: ++tuples; break;
            case Modality::Text: ++chunks; break;
        }
    }
    out << json{{"index_dir", dir.string()},
                {"instances", lake.size()},
                {"tables", tables},
                {"tuples", tuples},
                {"chunks", chunks},
                {"terms", content.postings().size()},
                {"embedder_tag", vectors.embedder_tag()}}
               .dump()
        << "\n";
    err << "indexed " << lake.size() << " instances (" << tables << " tables, " << tuples << " tuples, " << chunks
        << " text chunks) into " << dir.string() << "\n";
    return kExitOk;
}

int cmd_verify(const EngineFlags& f, const std::string& objects_file, std::ostream& out, std::ostream& err) {
    const auto objects = parse_objects(read_input(objects_file));
    if (objects.empty()) {
        err << "no objects to verify\n";
        return kExitOk;
    }
    const Engine engine = Engine::open(f.config());
    for (const auto& g : objects) {
        const auto outcome = engine.verify(g);
        json j = outcome.report;
        if (outcome.lineage_id) j["lineage_id"] = *outcome.lineage_id;
        out << j.dump() << "\n";
        err << g.object_id << ": " << to_string(outcome.report.aggregate)
            << (outcome.report.conflict ? " (conflict)" : "") << " from " << outcome.report.records.size()
            << " evidence verdicts";
        if (!outcome.report.errors.empty()) err << ", " << outcome.report.errors.size() << " stage errors";
        err << "\n";
    }
    return kExitOk;
}

BenchmarkSpec default_eval_spec() {
    BenchmarkSpec s;
    s.n_tables = 200;
    s.rows_per_table = 10;
    s.n_objects = 100;
    s.n_claims = 100;
    s.corruption_rate = 0.5;
    s.text_evidence = true;
    return s;
}

Benchmark load_or_generate(const std::string& source, std::optional<std::uint64_t> seed) {
    if (!source.empty() && fs::is_directory(source)) {
        if (seed) throw ContractError("--seed applies to generated benchmarks, not to " + source);
        return read_benchmark(source);
    }
    BenchmarkSpec spec = default_eval_spec();
    if (!source.empty()) {
        try {
            spec = json::parse(read_input(source)).get<BenchmarkSpec>();
        } catch (const json::exception& e) {
            throw BenchError("malformed benchmark spec " + source + ": " + e.what());
        }
    }
    if (seed) spec.seed = *seed;
    return gen_benchmark(spec);
}

int cmd_eval(const EngineFlags& f, const std::string& source, std::optional<std::uint64_t> seed,
             const std::string& runs_file, std::ostream& out, std::ostream& err) {
    const Benchmark bench = load_or_generate(source, seed);
    EngineConfig config = f.config();
    const auto run = run_benchmark(bench, config);
    for (const auto& r : run.rows) out << json(r).dump() << "\n";
    print_metric_table(run.rows, err);
    if (!runs_file.empty()) {
        std::ofstream rf(runs_file, std::ios::binary | std::ios::trunc);
        rf << render_runs(run);
        if (!rf) throw ContractError("cannot write " + runs_file);
    }
    return kExitOk;
}

int cmd_gen(const std::string& spec_file, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out, std::ostream& err) {
    BenchmarkSpec spec = default_eval_spec();
    if (!spec_file.empty()) spec = json::parse(read_input(spec_file)).get<BenchmarkSpec>();
    if (seed) spec.seed = *seed;
    const auto bench = gen_benchmark(spec);
    write_benchmark(bench, out_dir);
    out << json{{"dir", out_dir}, {"instances", bench.lake.size()}, {"objects", bench.objects.size()}, {"spec", spec}}
               .dump()
        << "\n";
    err << "wrote benchmark with " << bench.objects.size() << " objects and " << bench.lake.size()
        << " instances to " << out_dir << "\n";
    return kExitOk;
}

int cmd_prov_list(const std::string& log, const LineageFilter& filter, std::ostream& out) {
    for (const auto& s : list_lineage(log, filter)) out << json(s).dump() << "\n";
    return kExitOk;
}

int cmd_prov_show(const std::string& log, std::uint64_t id, bool as_json, std::ostream& out) {
    const auto report = load_lineage(log, id);
    if (as_json) {
        json j = report;
        j["lineage_id"] = id;
        out << j.dump() << "\n";
    } else {
        render_report(report, id, out);
    }
    return kExitOk;
}

int cmd_serve(const EngineFlags& f, const std::string& host, int port, std::ostream& err) {
    auto engine = std::make_shared<const Engine>(Engine::open(f.config()));
    return run_service(std::move(engine), host, port, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"verifai: retrieve evidence from a data lake and verify generated data against it", "verifai"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "verifai 0.1.0");

    EngineFlags flags;

    auto* index = app.add_subcommand("index", "Build and persist the content and vector indexes of a lake");
    flags.add_lake(*index, true);
    index->add_option("--embed-endpoint", flags.embed_endpoint, "Embedding service URL");
    index->add_option("--embed-model", flags.embed_model, "Model name sent to the embedding service");
    index->add_option("--embed-dim", flags.embed_dim, "Dimension returned by the embedding service");

    std::string objects_file;
    auto* verify = app.add_subcommand("verify", "Verify generated objects against an indexed lake");
    verify->add_option("objects", objects_file, "Object file (JSON lines or array; '-' for stdin)")->required();
    flags.add_lake(*verify, true);
    flags.add_retrieval(*verify);
    verify->add_option("--log", flags.log, "Lineage log to append to");

    std::string eval_source;
    std::string runs_file;
    std::optional<std::uint64_t> seed;
    auto* eval = app.add_subcommand("eval", "Generate or load a benchmark and report recall and accuracy");
    eval->add_option("source", eval_source, "Benchmark spec file (JSON) or benchmark directory");
    eval->add_option("--seed", seed, "Override the benchmark seed");
    eval->add_option("--runs", runs_file, "Write ranked runs (JSON lines) to this file");
    flags.add_retrieval(*eval);

    std::string gen_spec;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Write a synthetic benchmark (lake, objects, qrels) to a directory");
    gen->add_option("spec", gen_spec, "Benchmark spec file (JSON)");
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", seed, "Override the benchmark seed");

    auto* prov = app.add_subcommand("prov", "Inspect a lineage log");
    prov->require_subcommand(1);
    std::string log;
    LineageFilter filter;
    std::string verdict_filter;
    auto* list = prov->add_subcommand("list", "One summary record per stored verification");
    list->add_option("--log", log, "Lineage log")->required();
    list->add_option("--object", filter.object_id, "Only this object id");
    list->add_option("--verdict", verdict_filter, "Only this aggregate verdict");
    list->add_option("--from", filter.from_ms, "Earliest timestamp (ms, inclusive)");
    list->add_option("--to", filter.to_ms, "Latest timestamp (ms, inclusive)");
    std::uint64_t show_id = 0;
    bool show_json = false;
    auto* show = prov->add_subcommand("show", "Render one stored verification");
    show->add_option("id", show_id, "Lineage id")->required();
    show->add_option("--log", log, "Lineage log")->required();
    show->add_flag("--json", show_json, "Print the stored record instead of text");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Serve POST /verify, GET /provenance/{id} and GET /healthz");
    flags.add_lake(*serve, true);
    flags.add_retrieval(*serve);
    serve->add_option("--log", flags.log, "Lineage log to append to");
    serve->add_option("--host", host, "Address to bind");
    serve->add_option("--port", port, "Port to bind (0 picks a free port)")->check(CLI::Range(0, 65535));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "verifai 0.1.0\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*index) return cmd_index(flags, out, err);
        if (*verify) return cmd_verify(flags, objects_file, out, err);
        if (*eval) return cmd_eval(flags, eval_source, seed, runs_file, out, err);
        if (*gen) return cmd_gen(gen_spec, gen_out, seed, out, err);
        if (*list) {
            if (!verdict_filter.empty()) filter.verdict = parse_verdict_name(verdict_filter);
            return cmd_prov_list(log, filter, out);
        }
        if (*show) return cmd_prov_show(log, show_id, show_json, out);
        if (*serve) return cmd_serve(flags, host, port, err);
    } catch (const ContractError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const LakeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IngestError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IndexError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const VersionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BenchError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const MetricError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NotFoundError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ProvenanceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace verifai::cli
