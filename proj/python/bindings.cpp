#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "verifai/digest.hpp"
#include "verifai/engine.hpp"
#include "verifai/error.hpp"
#include "verifai/evalbench.hpp"
#include "verifai/json_io.hpp"
#include "verifai/provenance.hpp"
#include "verifai/rerank.hpp"
#include "verifai/text.hpp"
#include "verifai/tokenize.hpp"
#include "verifai/verify.hpp"

namespace py = pybind11;
using namespace verifai;

namespace {

DataObject object_from(const std::string& text) {
    auto g = json::parse(text).get<DataObject>();
    g.validate();
    return g;
}

BenchmarkSpec spec_from(const std::string& text) { return json::parse(text).get<BenchmarkSpec>(); }

std::string index_lake(const std::string& lake_dir, const std::string& index_dir) {
    const auto lake = load_lake(lake_dir);
    const HashedTextEmbedder embedder;
    const auto content = ContentIndex::build(lake.instances());
    const auto vectors = VectorIndex::build(lake.instances(), embedder);
    std::filesystem::create_directories(index_dir);
    content.save(std::filesystem::path(index_dir) / kContentIndexFile);
    vectors.save(std::filesystem::path(index_dir) / kVectorIndexFile);
    return json{{"index_dir", index_dir}, {"instances", lake.size()}, {"terms", content.postings().size()}}.dump();
}

class PyEngine {
public:
    PyEngine(const std::string& lake_dir, const std::string& index_dir, const std::string& log_path, std::size_t k) {
        EngineConfig c;
        c.lake_dir = lake_dir;
        c.index_dir = index_dir.empty() ? std::filesystem::path(lake_dir) / ".index" : std::filesystem::path(index_dir);
        c.k = k;
        if (!log_path.empty()) c.log_path = std::filesystem::path(log_path);
        engine_ = std::make_unique<Engine>(Engine::open(c));
    }

    std::string verify(const std::string& object_json) const {
        const auto g = object_from(object_json);
        VerifyOutcome outcome;
        {
            py::gil_scoped_release release;
            outcome = engine_->verify(g);
        }
        json j = outcome.report;
        if (outcome.lineage_id) j["lineage_id"] = *outcome.lineage_id;
        return j.dump();
    }

    std::size_t size() const { return engine_->lake().size(); }

private:
    std::unique_ptr<Engine> engine_;
};

}  // namespace

PYBIND11_MODULE(_verifai, m) {
    m.doc() = "Evidence retrieval and verification over a multi-modal data lake";

    static py::exception<Error> base(m, "VerifaiError");
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<LakeError>(m, "LakeError", base.ptr());
    py::register_exception<IngestError>(m, "IngestError", base.ptr());
    py::register_exception<IndexError>(m, "IndexError", base.ptr());
    py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
    py::register_exception<CorruptionError>(m, "CorruptionError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<BenchError>(m, "BenchError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("tokenize", [](const std::string& s) { return tokenize(s); }, py::arg("text"));
    m.def("normalize_value", [](const std::string& s) { return text::normalize_value(s); }, py::arg("value"));
    m.def("feature_hash", [](const std::string& s) { return feature_hash(s); }, py::arg("feature"));
    m.def(
        "embed_text", [](const std::string& s, std::size_t dim) { return embed_text(s, dim).values; }, py::arg("text"),
        py::arg("dim") = kTextEmbeddingDim);
    m.def(
        "maxsim_score",
        [](const std::string& q, const std::string& d) { return maxsim_score(embed_tokens(q), embed_tokens(d)); },
        py::arg("query"), py::arg("doc"), "MaxSim between the token embeddings of two texts.");
    m.def(
        "parse_verdict",
        [](const std::string& raw) {
            const auto [v, explanation] = parse_verdict(raw);
            return std::make_pair(std::string(to_string(v)), explanation);
        },
        py::arg("raw"));
    m.def("serialize_object", [](const std::string& g) { return serialize_object(object_from(g)); },
          py::arg("object_json"));
    m.def(
        "render_completion_prompt",
        [](const std::string& name, std::vector<std::string> schema, std::vector<std::vector<std::string>> rows) {
            return render_completion_prompt(Table{name, name, std::move(schema), std::move(rows)});
        },
        py::arg("name"), py::arg("schema"), py::arg("rows"));

    py::class_<ContentIndex>(m, "ContentIndex")
        .def_static(
            "build",
            [](const std::vector<std::pair<std::string, std::string>>& docs) {
                std::vector<ContentIndex::Document> d;
                for (const auto& [id, text] : docs) d.push_back({id, text});
                return ContentIndex::build(std::move(d));
            },
            py::arg("docs"))
        .def(
            "search",
            [](const ContentIndex& idx, const std::string& q, std::size_t k) {
                std::vector<std::pair<std::string, double>> out;
                for (const auto& h : idx.search(q, k)) out.emplace_back(h.instance_id, h.score);
                return out;
            },
            py::arg("query"), py::arg("k") = kDefaultRetrievalDepth)
        .def_property_readonly("doc_count", &ContentIndex::doc_count);

    m.def("index_lake", &index_lake, py::arg("lake_dir"), py::arg("index_dir"));

    py::class_<PyEngine>(m, "Engine")
        .def(py::init<const std::string&, const std::string&, const std::string&, std::size_t>(), py::arg("lake_dir"),
             py::arg("index_dir") = "", py::arg("log_path") = "", py::arg("k") = kDefaultRetrievalDepth)
        .def("verify", &PyEngine::verify, py::arg("object_json"))
        .def("__len__", &PyEngine::size);

    m.def(
        "write_benchmark",
        [](const std::string& spec, const std::string& dir) { write_benchmark(gen_benchmark(spec_from(spec)), dir); },
        py::arg("spec_json"), py::arg("out_dir"));
    m.def(
        "run_benchmark",
        [](const std::string& spec) {
            const auto bench = gen_benchmark(spec_from(spec));
            BenchmarkRun run;
            {
                py::gil_scoped_release release;
                run = run_benchmark(bench, EngineConfig{});
            }
            return json(run.rows).dump();
        },
        py::arg("spec_json"));

    m.def("list_lineage", [](const std::string& log) { return json(list_lineage(log)).dump(); }, py::arg("log_path"));
    m.def(
        "load_lineage", [](const std::string& log, std::uint64_t id) { return json(load_lineage(log, id)).dump(); },
        py::arg("log_path"), py::arg("lineage_id"));
}
