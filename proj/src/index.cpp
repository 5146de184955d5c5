#include "verifai/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "verifai/error.hpp"
#include "verifai/tokenize.hpp"

namespace verifai {

using nlohmann::json;

std::string_view to_string(Retriever r) noexcept {
    switch (r) {
        case Retriever::Content: return "content";
        case Retriever::Semantic: return "semantic";
        case Retriever::Combined: return "combined";
    }
    return "unknown";
}

Retriever parse_retriever(std::string_view s) {
    if (s == "content") return Retriever::Content;
    if (s == "semantic") return Retriever::Semantic;
    if (s == "combined") return Retriever::Combined;
    throw ContractError("unknown retriever '" + std::string(s) + "'");
}

namespace {

bool hit_order(const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.instance_id < b.instance_id;
}

void assign_ranks(std::vector<RetrievalHit>& hits) {
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
}

json read_header(std::istream& in, std::string_view kind) {
    std::string line;
    if (!std::getline(in, line)) throw IndexError("index file is empty");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception&) {
        throw IndexError("index file has no valid header");
    }
    if (!header.is_object() || header.value("magic", "") != kIndexMagic) throw IndexError("not a VFAI-IDX index file");
    const auto version = header.value("version", 0u);
    if (version != kIndexFormatVersion) {
        throw VersionError("index format version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kIndexFormatVersion) + ")");
    }
    if (header.value("kind", "") != kind) throw IndexError("index file holds a '" + header.value("kind", "") + "' index");
    return header;
}

json read_record(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IndexError("index file is truncated");
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw IndexError(std::string("malformed index record: ") + e.what());
    }
}

template <typename Index>
void save_to(const Index& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexError("cannot write " + path.string());
    index.write(out);
    if (!out) throw IndexError("failed writing " + path.string());
}

template <typename Index>
Index load_from(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError("cannot open " + path.string());
    return Index::read(in);
}

}  // namespace

// --- ContentIndex ------------------------------------------------------------

ContentIndex ContentIndex::build(std::span<const DataInstance> instances, Bm25Params params) {
    std::vector<Document> docs;
    docs.reserve(instances.size());
    for (const auto& x : instances) docs.push_back({x.instance_id, serialize_instance(x)});
    return build(std::move(docs), params);
}

ContentIndex ContentIndex::build(std::vector<Document> documents, Bm25Params params) {
    std::sort(documents.begin(), documents.end(),
              [](const Document& a, const Document& b) { return a.instance_id < b.instance_id; });
    for (std::size_t i = 1; i < documents.size(); ++i) {
        if (documents[i].instance_id == documents[i - 1].instance_id) {
            throw IndexError("duplicate instance id " + documents[i].instance_id);
        }
    }

    ContentIndex index;
    index.params_ = params;
    index.doc_ids_.reserve(documents.size());
    index.doc_len_.reserve(documents.size());
    for (std::size_t d = 0; d < documents.size(); ++d) {
        const auto tokens = tokenize(documents[d].text);
        std::map<std::string, std::uint32_t, std::less<>> tf;
        for (const auto& t : tokens) ++tf[t];
        for (auto& [token, count] : tf) {
            index.postings_[token].push_back({static_cast<std::uint32_t>(d), count});
        }
        index.doc_ids_.push_back(std::move(documents[d].instance_id));
        index.doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    }
    index.finalize();
    return index;
}

void ContentIndex::finalize() {
    if (doc_len_.empty()) {
        avg_doc_len_ = 0.0;
        return;
    }
    const double total = std::accumulate(doc_len_.begin(), doc_len_.end(), 0.0);
    avg_doc_len_ = total / static_cast<double>(doc_len_.size());
}

std::optional<std::uint32_t> ContentIndex::doc_len(std::string_view instance_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), instance_id);
    if (it == doc_ids_.end() || *it != instance_id) return std::nullopt;
    return doc_len_[static_cast<std::size_t>(it - doc_ids_.begin())];
}

std::vector<RetrievalHit> ContentIndex::search(std::string_view query, std::size_t k) const {
    if (k == 0 || doc_ids_.empty()) return {};
    std::vector<std::string> terms;
    {
        std::set<std::string> seen;
        for (auto& t : tokenize(query)) {
            if (seen.insert(t).second) terms.push_back(std::move(t));
        }
    }

    const double n_docs = static_cast<double>(doc_ids_.size());
    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * doc_len_[p.doc] / avg_doc_len_);
            acc[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
        }
    }

    std::vector<RetrievalHit> hits;
    hits.reserve(acc.size());
    for (const auto& [doc, score] : acc) {
        if (score > 0.0) hits.push_back({doc_ids_[doc], score, 0, Retriever::Content, score, std::nullopt});
    }
    const auto n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), hit_order);
    hits.resize(n);
    assign_ranks(hits);
    return hits;
}

void ContentIndex::write(std::ostream& out) const {
    const json header = {{"magic", kIndexMagic},
                         {"version", kIndexFormatVersion},
                         {"kind", "content"},
                         {"embedder_tag", ""},
                         {"k1", params_.k1},
                         {"b", params_.b},
                         {"doc_count", doc_ids_.size()},
                         {"term_count", postings_.size()}};
    out << header.dump() << '\n';
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        out << json{{"id", doc_ids_[d]}, {"len", doc_len_[d]}}.dump() << '\n';
    }
    for (const auto& [token, list] : postings_) {
        json p = json::array();
        for (const auto& posting : list) p.push_back({posting.doc, posting.tf});
        out << json{{"t", token}, {"p", std::move(p)}}.dump() << '\n';
    }
}

ContentIndex ContentIndex::read(std::istream& in) {
    const json header = read_header(in, "content");
    ContentIndex index;
    try {
        index.params_ = {header.at("k1").get<double>(), header.at("b").get<double>()};
        const auto docs = header.at("doc_count").get<std::size_t>();
        const auto terms = header.at("term_count").get<std::size_t>();
        for (std::size_t d = 0; d < docs; ++d) {
            const json r = read_record(in);
            index.doc_ids_.push_back(r.at("id").get<std::string>());
            index.doc_len_.push_back(r.at("len").get<std::uint32_t>());
        }
        for (std::size_t t = 0; t < terms; ++t) {
            const json r = read_record(in);
            auto& list = index.postings_[r.at("t").get<std::string>()];
            for (const auto& p : r.at("p")) {
                const Posting posting{p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()};
                if (posting.doc >= docs) throw IndexError("posting references unknown document");
                list.push_back(posting);
            }
        }
    } catch (const json::exception& e) {
        throw IndexError(std::string("malformed content index: ") + e.what());
    }
    index.finalize();
    return index;
}

void ContentIndex::save(const std::filesystem::path& path) const { save_to(*this, path); }
ContentIndex ContentIndex::load(const std::filesystem::path& path) { return load_from<ContentIndex>(path); }

// --- VectorIndex -------------------------------------------------------------

VectorIndex::VectorIndex(std::size_t dim, std::string embedder_tag) : dim_(dim), tag_(std::move(embedder_tag)) {
    if (dim_ == 0) throw IndexError("vector index dimension must be positive");
}

VectorIndex VectorIndex::build(std::span<const DataInstance> instances, const Embedder& embedder) {
    VectorIndex index(embedder.dim(), embedder.tag());
    std::vector<const DataInstance*> ordered;
    ordered.reserve(instances.size());
    for (const auto& x : instances) ordered.push_back(&x);
    std::sort(ordered.begin(), ordered.end(),
              [](const DataInstance* a, const DataInstance* b) { return a->instance_id < b->instance_id; });
    for (const auto* x : ordered) {
        Embedding e;
        try {
            e = embedder.embed_one(serialize_instance(*x));
        } catch (const std::exception& err) {
            throw IndexError("embedding failed for instance " + x->instance_id + ": " + err.what());
        }
        index.add(x->instance_id, e);
    }
    return index;
}

void VectorIndex::add(std::string instance_id, const Embedding& e) {
    if (e.dim() != dim_) {
        throw IndexError("instance " + instance_id + ": embedding dim " + std::to_string(e.dim()) + " != index dim " +
                         std::to_string(dim_));
    }
    const double norm = l2_norm(e.values);
    const bool empty = e.empty || norm == 0.0;
    if (!empty && std::fabs(norm - 1.0) > 1e-9) {
        throw IndexError("instance " + instance_id + ": embedding is not unit-norm");
    }
    Entry entry{std::move(instance_id), e.values, empty};
    if (empty) std::fill(entry.vector.begin(), entry.vector.end(), 0.0);
    entries_.push_back(std::move(entry));
}

std::vector<RetrievalHit> VectorIndex::search(std::span<const double> query, std::size_t k) const {
    if (query.size() != dim_) {
        throw IndexError("query dim " + std::to_string(query.size()) + " != index dim " + std::to_string(dim_));
    }
    const double qn = l2_norm(query);
    if (k == 0 || qn == 0.0) return {};
    std::vector<RetrievalHit> hits;
    hits.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (e.empty) continue;
        const double s = dot(query, e.vector) / qn;
        hits.push_back({e.instance_id, s, 0, Retriever::Semantic, std::nullopt, s});
    }
    const auto n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), hit_order);
    hits.resize(n);
    assign_ranks(hits);
    return hits;
}

void VectorIndex::write(std::ostream& out) const {
    const json header = {{"magic", kIndexMagic}, {"version", kIndexFormatVersion}, {"kind", "vector"},
                         {"embedder_tag", tag_}, {"dim", dim_},                   {"count", entries_.size()}};
    out << header.dump() << '\n';
    for (const auto& e : entries_) {
        out << json{{"id", e.instance_id}, {"empty", e.empty}, {"v", e.vector}}.dump() << '\n';
    }
}

VectorIndex VectorIndex::read(std::istream& in) {
    const json header = read_header(in, "vector");
    VectorIndex index;
    try {
        index = VectorIndex(header.at("dim").get<std::size_t>(), header.at("embedder_tag").get<std::string>());
        const auto count = header.at("count").get<std::size_t>();
        index.entries_.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const json r = read_record(in);
            Entry e{r.at("id").get<std::string>(), r.at("v").get<std::vector<double>>(), r.at("empty").get<bool>()};
            if (e.vector.size() != index.dim_) throw IndexError("stored vector has the wrong dimension");
            index.entries_.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw IndexError(std::string("malformed vector index: ") + e.what());
    }
    return index;
}

void VectorIndex::save(const std::filesystem::path& path) const { save_to(*this, path); }
VectorIndex VectorIndex::load(const std::filesystem::path& path) { return load_from<VectorIndex>(path); }

// --- combiner ----------------------------------------------------------------

std::vector<RetrievalHit> combine(const std::vector<std::vector<RetrievalHit>>& result_lists, std::size_t k) {
    struct Acc {
        std::vector<double> terms;
        std::optional<double> content;
        std::optional<double> semantic;
    };
    std::map<std::string, Acc, std::less<>> by_id;
    auto keep_max = [](std::optional<double>& slot, std::optional<double> v) {
        if (v && (!slot || *v > *slot)) slot = v;
    };
    for (const auto& list : result_lists) {
        for (const auto& h : list) {
            auto& acc = by_id[h.instance_id];
            acc.terms.push_back(1.0 / (kRrfConstant + static_cast<double>(h.rank)));
            switch (h.retriever) {
                case Retriever::Content: keep_max(acc.content, h.score); break;
                case Retriever::Semantic: keep_max(acc.semantic, h.score); break;
                case Retriever::Combined: break;
            }
            keep_max(acc.content, h.content_score);
            keep_max(acc.semantic, h.semantic_score);
        }
    }

    std::vector<RetrievalHit> out;
    out.reserve(by_id.size());
    for (auto& [id, acc] : by_id) {
        std::sort(acc.terms.begin(), acc.terms.end());
        double rrf = 0.0;
        for (double t : acc.terms) rrf += t;
        out.push_back({id, rrf, 0, Retriever::Combined, acc.content, acc.semantic});
    }
    const auto n = std::min(k, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), hit_order);
    out.resize(n);
    assign_ranks(out);
    return out;
}

}  // namespace verifai
