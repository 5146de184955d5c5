#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "cli/cli.hpp"
#include "json.hpp"
#include "test_support.hpp"
#include "verifai/error.hpp"
#include "verifai/evalbench.hpp"
#include "verifai/index.hpp"
#include "verifai/json_io.hpp"
#include "verifai/provenance.hpp"
#include "verifai/rerank.hpp"
#include "verifai/verify.hpp"

using namespace verifai;
using nlohmann::json;
using verifai::testing::MockServer;
using verifai::testing::read_file;
using verifai::testing::TempDir;
using verifai::testing::write_file;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome& o;
    void operator()(bool ok, const std::string& what) {
        if (ok) return;
        if (o.pass) o.detail = what;
        o.pass = false;
    }
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << std::fixed << v;
    return ss.str();
}

// --- 1: ternary totality -------------------------------------------------------------

std::string random_word(std::mt19937_64& rng) {
    static const std::vector<std::string> pool{
        "ohio", "smith", "Mary", "Jones", "1959", "12", "3.50", "-7", "NaN", "not", "never", "the", "café", "Zürich",
        "東京", "R2-D2", "x", "goals", "points", "film", "April", "Stomp", "Yard", "of", "in", "no", "0", "1e3"};
    return pool[rng() % pool.size()];
}

std::string random_phrase(std::mt19937_64& rng, std::size_t max_words) {
    std::string s;
    const auto n = rng() % (max_words + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += (rng() % 5 == 0) ? ", " : " ";
        s += random_word(rng);
    }
    return s;
}

Tuple random_tuple(std::mt19937_64& rng, const std::vector<std::string>& schema, const Tuple* like) {
    Tuple t;
    t.table_id = "t" + std::to_string(rng() % 4);
    t.schema = schema;
    t.key_attrs = {schema[0]};
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (like && i < like->cells.size() && rng() % 2 == 0) t.cells.push_back(like->cells[i]);
        else t.cells.push_back(random_phrase(rng, 3));
    }
    return t;
}

std::vector<std::string> random_schema(std::mt19937_64& rng) {
    static const std::vector<std::string> attrs{"name", "year", "party", "goals", "city", "points", "club"};
    std::vector<std::string> s{"id"};
    const auto n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n && i < attrs.size(); ++i) s.push_back(attrs[(i + rng() % 3) % attrs.size()]);
    std::sort(s.begin() + 1, s.end());
    s.erase(std::unique(s.begin() + 1, s.end()), s.end());
    return s;
}

Outcome ternary_totality() {
    Outcome o;
    std::mt19937_64 rng(20240611);
    const auto registry = VerifierRegistry::local();
    std::map<std::string, int> seen;
    int calls = 0;
    for (int i = 0; i < 1000; ++i) {
        DataObject g;
        Tuple base;
        if (rng() % 2 == 0) {
            base = random_tuple(rng, random_schema(rng), nullptr);
            const auto target = base.schema[1 + rng() % (base.schema.size() - 1)];
            g = DataObject::imputed("g" + std::to_string(i), base, target);
        } else {
            std::string text = random_phrase(rng, 12);
            if (text.find_first_not_of(" ,") == std::string::npos) text = "empty claim";
            g = DataObject::claim("g" + std::to_string(i), text);
        }
        const auto modalities = mapped_modalities(g.kind);
        const Modality m = modalities[rng() % modalities.size()];
        DataInstance x;
        switch (m) {
            case Modality::Tuple:
                x = DataInstance::make(random_tuple(rng, rng() % 2 ? base.schema : random_schema(rng), &base), "s.csv");
                break;
            case Modality::Text: {
                std::string text = random_phrase(rng, 40);
                if (g.tuple && rng() % 2) text += " " + g.tuple->cells[0] + " " + g.tuple->schema.back();
                if (g.claim_text && rng() % 2) text += " " + *g.claim_text;
                x = DataInstance::make(TextChunk{"f#0", "f.txt", 0, text, {0, text.size()}}, "f.txt");
                break;
            }
            case Modality::Table: {
                Table t{"tb", random_phrase(rng, 2), random_schema(rng), {}};
                const auto rows = rng() % 5;
                for (std::size_t r = 0; r < rows; ++r) t.rows.push_back(random_tuple(rng, t.schema, nullptr).cells);
                x = DataInstance::make(t, "tb.csv");
                break;
            }
        }
        try {
            const auto* v = registry.find(select_verifier(g, m, registry, VerifierMode::Local));
            const auto r = v->verify(g, x);
            const int code = static_cast<int>(r.verdict);
            if (code < 0 || code > 2) {
                o.pass = false;
                o.detail = "verdict code " + std::to_string(code);
            }
            ++seen[std::string(to_string(r.verdict))];
            ++calls;
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
    }
    if (o.pass) {
        o.detail = std::to_string(calls) + " pairs:";
        for (const auto& [k, n] : seen) o.detail += " " + k + "=" + std::to_string(n);
    }
    return o;
}

// --- 2: BM25 oracle --------------------------------------------------------------------

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

std::vector<std::pair<std::string, double>> bm25_oracle(const std::vector<ContentIndex::Document>& docs,
                                                        const std::string& query) {
    const double k1 = 1.2, b = 0.75, n = static_cast<double>(docs.size());
    std::vector<std::vector<std::string>> toks;
    double total = 0;
    for (const auto& d : docs) {
        toks.push_back(split_ws(d.text));
        total += static_cast<double>(toks.back().size());
    }
    const double avg = total / n;
    const auto q = split_ws(query);
    const std::set<std::string> terms(q.begin(), q.end());
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        double score = 0;
        for (const auto& term : terms) {
            const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
            if (tf == 0) continue;
            double df = 0;
            for (const auto& t : toks) df += std::find(t.begin(), t.end(), term) != t.end() ? 1 : 0;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double len = static_cast<double>(toks[i].size());
            score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
        }
        if (score > 0) out.emplace_back(docs[i].instance_id, score);
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    return out;
}

Outcome bm25_equivalence() {
    Outcome o;
    Check check{o};
    std::mt19937_64 rng(77);
    const std::vector<std::string> vocab{"ant", "bee", "cat", "dog", "eel", "fox", "gnu", "hen", "ibis", "jay",
                                         "kiwi", "lark"};
    std::size_t compared = 0;
    for (int corpus = 0; corpus < 50; ++corpus) {
        std::vector<ContentIndex::Document> docs;
        const auto n_docs = 1 + rng() % 20;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string text;
            const auto len = 1 + rng() % 30;
            for (std::size_t t = 0; t < len; ++t) text += vocab[rng() % vocab.size()] + " ";
            char id[16];
            std::snprintf(id, sizeof id, "d%02zu", (n_docs - d) * 7 % 101);
            docs.push_back({id + std::to_string(d), text});
        }
        const auto index = ContentIndex::build(docs);
        for (int qi = 0; qi < 10; ++qi) {
            std::string query;
            const auto len = 1 + rng() % 4;
            for (std::size_t t = 0; t < len; ++t) query += vocab[rng() % vocab.size()] + " ";
            const auto expected = bm25_oracle(docs, query);
            const auto hits = index.search(query, 1000);
            check(hits.size() == expected.size(), "hit count differs on corpus " + std::to_string(corpus));
            for (std::size_t i = 0; i < std::min(hits.size(), expected.size()); ++i) {
                const bool same_id = hits[i].instance_id == expected[i].first;
                const bool tie = !same_id && i + 1 < expected.size() &&
                                 std::abs(expected[i].second - expected[i + 1].second) < 1e-9;
                check(same_id || tie, "ranking differs on corpus " + std::to_string(corpus));
                check(std::abs(hits[i].score - expected[i].second) < 1e-9,
                      "score differs on corpus " + std::to_string(corpus));
                check(hits[i].rank == i + 1, "rank numbering");
                ++compared;
            }
        }
    }
    if (o.pass) o.detail = std::to_string(compared) + " ranked hits match";
    return o;
}

// --- 3: MaxSim oracle ----------------------------------------------------------------

TokenEmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
    std::normal_distribution<double> nd;
    TokenEmbeddingMatrix m;
    m.dim = dim;
    for (std::size_t i = 0; i < rows; ++i) {
        m.tokens.push_back("t" + std::to_string(i));
        for (std::size_t c = 0; c < dim; ++c) m.data.push_back(nd(rng));
    }
    return m;
}

double maxsim_oracle(const TokenEmbeddingMatrix& q, const TokenEmbeddingMatrix& d) {
    double total = 0;
    for (std::size_t i = 0; i < q.rows(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d.rows(); ++j) {
            double ab = 0, aa = 0, bb = 0;
            for (std::size_t c = 0; c < q.dim; ++c) {
                const double a = q.data[i * q.dim + c], b = d.data[j * d.dim + c];
                ab += a * b;
                aa += a * a;
                bb += b * b;
            }
            best = std::max(best, ab / std::sqrt(aa * bb));
        }
        if (d.rows()) total += best;
    }
    return total;
}

Outcome maxsim_equivalence() {
    Outcome o;
    Check check{o};
    std::mt19937_64 rng(31);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const auto dim = 8 + rng() % 57;
        const auto q = random_matrix(rng, 1 + rng() % 12, dim);
        const auto d = random_matrix(rng, 1 + rng() % 40, dim);
        const double diff = std::abs(maxsim_score(q, d) - maxsim_oracle(q, d));
        worst = std::max(worst, diff);
        check(diff < 1e-9, "pair " + std::to_string(i) + " differs by " + std::to_string(diff));
    }
    for (int i = 0; i < 50; ++i) {
        const auto text = random_phrase(rng, 15) + " anchor";
        const auto q = embed_tokens(text);
        check(std::abs(maxsim_score(q, q) - static_cast<double>(q.rows())) < 1e-9, "copy score for: " + text);
        const auto longer = embed_tokens(random_phrase(rng, 10) + " " + text + " " + random_phrase(rng, 10));
        check(std::abs(maxsim_score(q, longer) - static_cast<double>(q.rows())) < 1e-9, "embedded copy for: " + text);
    }
    if (o.pass) o.detail = "max deviation " + std::to_string(worst);
    return o;
}

// --- 4, 5, 6: benchmark ---------------------------------------------------------------

BenchmarkSpec tuple_spec() {
    BenchmarkSpec s;
    s.seed = 42;
    s.n_tables = 200;
    s.rows_per_table = 10;
    s.n_objects = 100;
    s.n_claims = 0;
    s.corruption_rate = 0.5;
    s.text_evidence = false;
    return s;
}

BenchmarkSpec claim_spec() {
    BenchmarkSpec s;
    s.seed = 43;
    s.n_tables = 100;
    s.rows_per_table = 10;
    s.n_objects = 100;
    s.n_claims = 100;
    s.corruption_rate = 0.5;
    s.text_evidence = true;
    return s;
}

struct BenchState {
    Benchmark tuples, claims;
    BenchmarkRun tuple_run, claim_run;
};

BenchState& bench_state() {
    static BenchState s = [] {
        BenchState st;
        st.tuples = gen_benchmark(tuple_spec());
        st.claims = gen_benchmark(claim_spec());
        st.tuple_run = run_benchmark(st.tuples, EngineConfig{});
        st.claim_run = run_benchmark(st.claims, EngineConfig{});
        return st;
    }();
    return s;
}

std::vector<std::string> ids_of(const std::vector<RerankResult>& rs) {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(r.instance_id);
    return out;
}

Outcome planted_retrieval() {
    Outcome o;
    Check check{o};
    const auto& s = bench_state();

    Runs runs;
    std::vector<std::string> tuple_ids;
    for (const auto& g : s.tuples.objects) {
        tuple_ids.push_back(g.object_id);
        runs[g.object_id] = ids_of(s.tuple_run.reports.at(g.object_id).hits.rerank_tuple);
    }
    const auto qrels = restrict_qrels(s.tuples.qrels, s.tuples.lake, tuple_ids, Modality::Tuple);
    const double recall = recall_at_k(runs, qrels, 3);
    check(qrels.relevant.size() == 100, "expected 100 tuple objects with relevant tuples");
    check(recall >= 0.95, "tuple recall@3 " + fmt(recall));

    std::size_t claims = 0, found = 0;
    for (const auto& g : s.claims.objects) {
        if (g.kind != ObjectKind::TextualClaim) continue;
        ++claims;
        const auto top = ids_of(s.claim_run.reports.at(g.object_id).hits.rerank_table);
        const auto& rel = s.claims.qrels.relevant.at(g.object_id);
        const bool hit = std::any_of(top.begin(), top.begin() + static_cast<long>(std::min<std::size_t>(5, top.size())),
                                     [&](const std::string& id) {
                                         return rel.count(id) && s.claims.lake.at(id).modality() == Modality::Table;
                                     });
        found += hit ? 1 : 0;
    }
    const double frac = claims ? static_cast<double>(found) / static_cast<double>(claims) : 0.0;
    check(claims == 100, "expected 100 claims");
    check(frac >= 0.85, "claim table@5 " + fmt(frac));
    if (o.pass) o.detail = "tuple recall@3 " + fmt(recall) + ", claim table in top-5 " + fmt(frac);
    return o;
}

Outcome end_to_end_accuracy() {
    Outcome o;
    Check check{o};
    const auto& s = bench_state();
    std::string detail;
    for (const auto* pair : {&s.tuples, &s.claims}) {
        const auto& bench = *pair;
        const auto& run = pair == &s.tuples ? s.tuple_run : s.claim_run;
        std::map<std::string, Verdict> decisions;
        EvidenceSeen seen;
        for (const auto& [id, r] : run.reports) {
            decisions[id] = r.aggregate;
            for (const auto& rec : r.records) seen[id].push_back(rec.instance_id);
        }
        const double acc = verifier_accuracy(decisions, bench.qrels, false, &seen);
        check(acc >= 0.90, "accuracy " + fmt(acc));
        detail += (detail.empty() ? "" : ", ") + std::string(pair == &s.tuples ? "tuple" : "claim+tuple") +
                  " accuracy " + fmt(acc);
    }

    std::size_t relevant_retrieved = 0, exact_correct = 0;
    for (const auto* pair : {&s.tuples, &s.claims}) {
        const auto& bench = *pair;
        const auto& run = pair == &s.tuples ? s.tuple_run : s.claim_run;
        for (const auto& g : bench.objects) {
            if (g.kind != ObjectKind::ImputedTuple) continue;
            const auto& rel = bench.qrels.relevant.at(g.object_id);
            for (const auto& rec : run.reports.at(g.object_id).records) {
                if (rec.verifier_id != verifier_ids::kExactTuple || !rel.count(rec.instance_id)) continue;
                ++relevant_retrieved;
                exact_correct += rec.verdict == bench.qrels.gold.at(g.object_id) ? 1 : 0;
            }
        }
    }
    check(relevant_retrieved > 0, "no relevant tuple reached the verifier");
    check(exact_correct == relevant_retrieved, "exact_tuple " + std::to_string(exact_correct) + "/" +
                                                   std::to_string(relevant_retrieved));
    if (o.pass) {
        o.detail = detail + ", exact_tuple on relevant evidence " + std::to_string(exact_correct) + "/" +
                   std::to_string(relevant_retrieved);
    }
    return o;
}

Outcome no_evidence_baseline() {
    Outcome o;
    Check check{o};
    const auto& s = bench_state();
    EngineConfig withheld;
    withheld.withhold_evidence = true;
    std::string detail;
    for (const auto* bench : {&s.tuples, &s.claims}) {
        const auto run = run_benchmark(*bench, withheld);
        std::map<std::string, Verdict> decisions;
        for (const auto& [id, r] : run.reports) {
            decisions[id] = r.aggregate;
            check(r.records.empty() && r.hits.combined.empty(), "evidence leaked into " + id);
        }
        const double acc = verifier_accuracy(decisions, bench->qrels, false);
        check(acc <= 0.55, "baseline accuracy " + fmt(acc));
        detail += (detail.empty() ? "" : ", ") + std::string("accuracy ") + fmt(acc);
    }
    if (o.pass) o.detail = detail;
    return o;
}

// --- 7: external verifier ---------------------------------------------------------------

json chat_reply(const std::string& content) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

Outcome external_contract() {
    Outcome o;
    Check check{o};
    const std::vector<std::pair<std::string, std::optional<Verdict>>> canned{
        {"Verified. The evidence lists John Smith.", Verdict::Verified},
        {"Refuted: the incumbent is Mary Jones.", Verdict::Refuted},
        {"Not Related - different district.", Verdict::NotRelated},
        {"Result: Verified + the party matches", Verdict::Verified},
        {"Result: Refuted + wrong value", Verdict::Refuted},
        {"Result: Not Related + other table", Verdict::NotRelated},
        {"VERIFIED", Verdict::Verified},
        {"refuted", Verdict::Refuted},
        {"not related", Verdict::NotRelated},
        {"The claim is refuted by row 2.", Verdict::Refuted},
        {"It is verified by the evidence.", Verdict::Verified},
        {"This evidence is unrelated to the data.", Verdict::NotRelated},
        {"  Verified \xE2\x80\x94 exact match", Verdict::Verified},
        {"Refuted \xE2\x80\x93 numbers differ", Verdict::Refuted},
        {"NotRelated", Verdict::NotRelated},
        {"Verified, although a later row looks refuted", Verdict::Verified},
        {"Answer: refuted. The table disagrees.", Verdict::Refuted},
        {"I cannot determine this from the evidence.", std::nullopt},
        {"Maybe?", std::nullopt},
        {std::string(220, '.') + " verified", std::nullopt},
    };

    MockServer server;
    std::atomic<std::size_t> next{0};
    server.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        if (body.value("temperature", -1.0) != 0.0) {
            res.status = 400;
            return;
        }
        res.set_content(chat_reply(canned[next++ % canned.size()].first).dump(), "application/json");
    });
    server.start();

    ExternalVerifierConfig cfg;
    cfg.endpoint = server.url("/v1/chat/completions");
    cfg.backoff = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::milliseconds(2000);
    const auto verifier = make_external_verifier(cfg);

    Tuple t;
    t.table_id = "elections";
    t.schema = {"election", "incumbent"};
    t.cells = {"Ohio 1", "John Smith"};
    t.key_attrs = {"election"};
    const auto g = DataObject::imputed("g", t, "incumbent");
    const auto x = DataInstance::make(t, "elections.csv");

    std::size_t correct = 0, unparsed = 0;
    for (const auto& [raw, expected] : canned) {
        const auto r = verifier->verify(g, x);
        if (expected) {
            const bool ok = r.verdict == *expected && r.verifier_id == verifier_ids::kExternalLlm;
            correct += ok ? 1 : 0;
            check(ok, "misclassified: " + raw.substr(0, 40));
        } else {
            const bool ok = r.verdict == Verdict::NotRelated && r.verifier_id == verifier_ids::kExternalUnparsed &&
                            r.raw_response == raw;
            unparsed += ok ? 1 : 0;
            check(ok, "not folded: " + raw.substr(0, 40));
        }
    }
    check(correct == 17 && unparsed == 3, "classified " + std::to_string(correct) + ", folded " + std::to_string(unparsed));
    server.stop();

    // Flaky endpoint: two failures then success.
    MockServer flaky;
    std::atomic<int> flaky_calls{0};
    flaky.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
        if (++flaky_calls < 3) {
            res.status = 503;
            return;
        }
        res.set_content(chat_reply("Refuted. Wrong year.").dump(), "application/json");
    });
    flaky.start();
    cfg.endpoint = flaky.url("/chat");
    check(call_external_verifier(cfg, "p") == "Refuted. Wrong year." && flaky_calls == 3, "flaky endpoint not retried");
    flaky_calls = -100;
    bool failed = false;
    try {
        call_external_verifier(cfg, "p");
    } catch (const VerifierServiceError&) {
        failed = true;
    }
    check(failed && flaky_calls == -97, "persistent failure not surfaced after 3 attempts");
    flaky.stop();

    // Slow endpoint: every attempt exceeds the timeout.
    MockServer slow;
    std::atomic<int> slow_calls{0};
    slow.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
        ++slow_calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(600));
        res.set_content(chat_reply("Verified").dump(), "application/json");
    });
    slow.start();
    cfg.endpoint = slow.url("/chat");
    cfg.timeout = std::chrono::milliseconds(150);
    const auto start = Clock::now();
    failed = false;
    try {
        call_external_verifier(cfg, "p");
    } catch (const VerifierServiceError&) {
        failed = true;
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    check(failed && slow_calls == 3, "timeouts not retried then surfaced");
    check(elapsed < 3000, "timeout not enforced");
    slow.stop();

    if (o.pass) {
        o.detail = std::to_string(correct) + " classified, " + std::to_string(unparsed) +
                   " folded into NotRelated, flaky retried, timeouts surfaced in " + std::to_string(elapsed) + " ms";
    }
    return o;
}

// --- 8: prompt goldens ------------------------------------------------------------------

Outcome prompt_goldens() {
    Outcome o;
    Check check{o};
    const auto golden = [](const std::string& name) { return read_file(std::string(VERIFAI_GOLDEN_DIR) + "/" + name); };
    const auto election = [](const std::string& d, const std::string& i, const std::string& p) {
        Tuple t;
        t.table_id = "elections";
        t.schema = {"election", "incumbent", "party"};
        t.cells = {d, i, p};
        t.key_attrs = {"election"};
        return t;
    };

    const Table incomplete{"elections", "elections", {"election", "incumbent", "party"},
                           {{"Ohio 1", "NaN", "Democratic"}, {"Ohio 2", "Mary Jones", "NaN"}}};
    check(render_completion_prompt(incomplete) == golden("completion_prompt.txt"), "completion prompt");

    const auto g = DataObject::imputed("g", election("Ohio 1", "John Smith", "Democratic"), "incumbent");
    const auto x = DataInstance::make(election("Ohio 1", "Mary Jones", "Democratic"), "elections.csv");
    check(render_verification_prompt(g, x) == golden("verification_prompt_tuple.txt"), "tuple verification prompt");

    const std::string chunk_text = "Stomp the Yard is a 2007 dance film.\n\nMeagan Good does not appear in Stomp the Yard.";
    const auto text = DataInstance::make(TextChunk{"f#0", "f.txt", 0, chunk_text, {0, chunk_text.size()}}, "f.txt");
    check(render_verification_prompt(DataObject::claim("c", "Meagan Good plays April in Stomp the Yard."), text) ==
              golden("verification_prompt_text.txt"),
          "text verification prompt");

    const auto table = DataInstance::make(
        Table{"e1", "Liga 1960", {"club", "played", "points"}, {{"Estrela", "20", "31"}, {"Bravo", "20", "27"}}},
        "liga.csv");
    check(render_verification_prompt(DataObject::claim("c", "Estrela finished the 1960 Liga with 35 points."), table) ==
              golden("verification_prompt_table.txt"),
          "table verification prompt");

    for (const char* name : {"completion_prompt.txt", "verification_prompt_tuple.txt"}) {
        const auto body = golden(name);
        check(body.find(kCompletionInstruction) != std::string::npos ||
                  body.find(kVerificationInstruction) != std::string::npos,
              std::string("instruction line missing from ") + name);
    }
    if (o.pass) o.detail = "4 goldens byte-identical";
    return o;
}

// --- 9: provenance ----------------------------------------------------------------------

VerificationReport random_report(std::mt19937_64& rng, int i) {
    VerificationReport r;
    Tuple t;
    t.table_id = "t" + std::to_string(i % 7);
    t.schema = {"key", "value"};
    t.cells = {"k" + std::to_string(i), random_phrase(rng, 4)};
    t.key_attrs = {"key"};
    r.object = i % 3 ? DataObject::imputed("g" + std::to_string(i), t, "value")
                     : DataObject::claim("c" + std::to_string(i), "claim " + random_phrase(rng, 6) + " x");
    const auto v = static_cast<Verdict>(rng() % 3);
    for (int h = 0; h < static_cast<int>(rng() % 4); ++h) {
        RetrievalHit hit;
        hit.instance_id = "x" + std::to_string(rng() % 1000);
        hit.rank = static_cast<std::size_t>(h + 1);
        hit.score = std::ldexp(static_cast<double>(rng() % 100000), -10);
        hit.retriever = Retriever::Combined;
        r.hits.combined.push_back(hit);
        r.records.push_back(VerdictRecord{r.object.object_id, hit.instance_id, v, "exact_tuple",
                                          random_phrase(rng, 5), std::nullopt});
    }
    r.aggregate = v;
    r.conflict = rng() % 5 == 0;
    r.config.embedder_tag = "hashed-fnv1a64fmix-unibigram-d256";
    r.timestamp_ms = 1700000000000 + i;
    return r;
}

Outcome provenance_round_trip() {
    Outcome o;
    Check check{o};
    TempDir dir;
    const auto path = dir / "lineage.jsonl";
    std::mt19937_64 rng(99);
    std::vector<VerificationReport> reports;
    {
        LineageLog log(path);
        for (int i = 0; i < 100; ++i) {
            reports.push_back(random_report(rng, i));
            const auto id = log.record(reports.back());
            check(id == static_cast<std::uint64_t>(i + 1), "lineage ids not sequential");
            check(load_lineage(path, id) == reports.back(), "round trip " + std::to_string(id));
        }
    }
    for (std::size_t i = 0; i < reports.size(); ++i) check(load_lineage(path, i + 1) == reports[i], "reload");
    check(list_lineage(path).size() == 100, "list size");

    const auto bytes = read_file(path);
    const auto truncated = dir / "truncated.jsonl";
    write_file(truncated, bytes.substr(0, bytes.size() - 25));
    const auto kept = list_lineage(truncated);
    check(kept.size() == 99, "truncated log kept " + std::to_string(kept.size()));
    for (std::uint64_t id = 1; id <= 99; ++id) check(load_lineage(truncated, id) == reports[id - 1], "truncated load");

    auto flipped = bytes;
    const auto entry = flipped.find("\"lineage_id\":50");
    const auto line_start = flipped.rfind('\n', entry) + 1;
    const auto target = flipped.find("\"timestamp_ms\":", line_start) + 16;
    flipped[target] ^= 0x01;
    const auto flipped_path = dir / "flipped.jsonl";
    write_file(flipped_path, flipped);
    bool corrupt = false;
    try {
        load_lineage(flipped_path, 50);
    } catch (const CorruptionError&) {
        corrupt = true;
    }
    check(corrupt, "bit flip not detected");
    check(load_lineage(flipped_path, 49) == reports[48], "neighbouring entry unreadable");
    if (o.pass) o.detail = "100 cycles identical, truncated tail skipped, bit flip detected";
    return o;
}

// --- 10: determinism --------------------------------------------------------------------

int cli(std::vector<std::string> args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (out) *out = o.str();
    return code;
}

Outcome determinism() {
    Outcome o;
    Check check{o};
    TempDir dir;
    write_benchmark(gen_benchmark(claim_spec()), dir / "bench");
    const auto lake = (dir / "bench" / "lake").string();
    check(cli({"index", "--lake", lake, "--index", (dir / "a").string()}) == 0, "index a");
    check(cli({"index", "--lake", lake, "--index", (dir / "b").string()}) == 0, "index b");
    for (const char* f : {"content.idx", "vector.idx"}) {
        check(read_file(dir / "a" / f) == read_file(dir / "b" / f), std::string(f) + " differs");
    }
    std::string first, second;
    write_file(dir / "spec.json", json(claim_spec()).dump());
    check(cli({"eval", (dir / "spec.json").string(), "--seed", "7", "--runs", (dir / "r1").string()}, &first) == 0,
          "eval 1");
    check(cli({"eval", (dir / "spec.json").string(), "--seed", "7", "--runs", (dir / "r2").string()}, &second) == 0,
          "eval 2");
    check(!first.empty() && first == second, "metric reports differ");
    check(read_file(dir / "r1") == read_file(dir / "r2"), "runs differ");
    if (o.pass) o.detail = "index files and eval reports byte-identical";
    return o;
}

struct Criterion {
    int number;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "ternary totality over 1000 fuzzed pairs", 10, ternary_totality},
        {2, "BM25 matches brute-force oracle", 5, bm25_equivalence},
        {3, "MaxSim matches double-loop oracle", 5, maxsim_equivalence},
        {4, "planted-evidence retrieval", 60, planted_retrieval},
        {5, "end-to-end verifier accuracy", 60, end_to_end_accuracy},
        {6, "no-evidence baseline at chance or worse", 60, no_evidence_baseline},
        {7, "external verifier contract", 10, external_contract},
        {8, "prompt goldens", 5, prompt_goldens},
        {9, "provenance round trip and recovery", 30, provenance_round_trip},
        {10, "index and eval determinism", 60, determinism},
    };
    int failures = 0;
    const auto suite_start = Clock::now();
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (o.pass && secs > c.budget_s) {
            o.pass = false;
            o.detail += "; took longer than " + fmt(c.budget_s) + " s";
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.name << " (" << o.detail
                  << "; " << fmt(secs) << " s)" << std::endl;
    }
    const double total = std::chrono::duration<double>(Clock::now() - suite_start).count();
    std::cout << (failures ? "FAILED " : "ALL PASSED ") << (criteria.size() - failures) << "/" << criteria.size()
              << " in " << fmt(total) << " s" << std::endl;
    return failures ? 1 : 0;
}
