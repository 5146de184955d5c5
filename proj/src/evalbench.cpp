#include "verifai/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "verifai/error.hpp"
#include "verifai/json_io.hpp"
#include "verifai/text.hpp"

namespace verifai {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

const std::vector<std::string>& syllables() {
    static const std::vector<std::string> s = {"ka", "lo", "mir", "ven", "tor", "sa",  "qui", "del", "ran", "zu",
                                               "bel", "nor", "fin", "gal", "ost", "pra", "mek", "dru", "sol", "tav",
                                               "hun", "ver", "pel", "ix",  "mo",  "rud", "san", "tel", "bra", "vo"};
    return s;
}

std::string capitalize(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

std::string make_word(Rng& rng, std::size_t n_syllables) {
    std::string w;
    for (std::size_t i = 0; i < n_syllables; ++i) w += syllables()[rng.below(syllables().size())];
    return capitalize(w);
}

struct NumericAttr {
    std::string name;
    std::int64_t lo;
    std::int64_t hi;
};

struct Theme {
    std::string name;
    std::string key;
    std::vector<std::string> categorical;
    std::vector<NumericAttr> numeric;
};

const std::vector<Theme>& themes() {
    static const std::vector<Theme> t = {
        {"city", "city", {"region", "mayor"}, {{"population", 1000, 900000}, {"founded", 1100, 1990}}},
        {"film", "title", {"director", "studio"}, {{"year", 1950, 2023}, {"runtime", 70, 210}}},
        {"company", "company", {"sector", "headquarters"}, {{"employees", 10, 250000}, {"revenue", 1, 90000}}},
        {"athlete", "athlete", {"country", "club"}, {{"caps", 1, 180}, {"goals", 0, 420}}},
        {"election", "district", {"incumbent", "party"}, {{"first_elected", 1950, 2020}, {"votes", 500, 99000}}},
    };
    return t;
}

constexpr std::size_t kPoolSize = 30;

std::string pad4(std::size_t n) {
    std::string s = std::to_string(n);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string readable(const std::string& attr) {
    std::string s = attr;
    std::replace(s.begin(), s.end(), '_', ' ');
    return s;
}

std::string corrupt_value(Rng& rng, const Theme& theme, std::size_t attr_col, const std::string& value,
                          const std::vector<std::vector<std::string>>& pools) {
    // Columns: key, categorical..., numeric...
    const std::size_t n_cat = theme.categorical.size();
    if (attr_col <= n_cat) {
        const auto& pool = pools[attr_col - 1];
        std::string other;
        do {
            other = pool[rng.below(pool.size())];
        } while (other == value);
        return other;
    }
    const auto& num = theme.numeric[attr_col - 1 - n_cat];
    const std::int64_t v = std::stoll(value);
    const std::int64_t span = std::max<std::int64_t>(1, (num.hi - num.lo) / 10);
    std::int64_t delta = rng.between(1, span);
    if (v + delta > num.hi || (v - delta >= num.lo && rng.below(2) == 0)) delta = -delta;
    return std::to_string(v + delta);
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t population, std::size_t n) {
    std::vector<std::size_t> idx(population);
    for (std::size_t i = 0; i < population; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(population - i)]);
    idx.resize(n);
    return idx;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw BenchError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& contents) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) throw BenchError("cannot write " + p.string());
}

}  // namespace

void BenchmarkSpec::validate() const {
    if (n_tables == 0) throw BenchError("n_tables must be positive");
    if (rows_per_table == 0) throw BenchError("rows_per_table must be positive");
    if (n_tables > 9999) throw BenchError("n_tables must not exceed 9999");
    if (!(corruption_rate >= 0.0 && corruption_rate <= 1.0)) throw BenchError("corruption_rate must lie in [0, 1]");
    const std::size_t rows = n_tables * rows_per_table;
    if (n_objects > rows) throw BenchError("n_objects exceeds the number of generated rows");
    if (n_claims > rows) throw BenchError("n_claims exceeds the number of generated rows");
    if (n_objects + n_claims == 0) throw BenchError("benchmark needs at least one object");
}

Benchmark gen_benchmark(const BenchmarkSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Benchmark bench;
    bench.spec = spec;

    // Per theme, per categorical attribute, a pool of values.
    std::vector<std::vector<std::vector<std::string>>> pools;
    std::set<std::string> used_words;
    for (const auto& theme : themes()) {
        auto& tp = pools.emplace_back();
        for (std::size_t a = 0; a < theme.categorical.size(); ++a) {
            auto& pool = tp.emplace_back();
            while (pool.size() < kPoolSize) {
                std::string w = make_word(rng, 3);
                if (used_words.insert(w).second) pool.push_back(std::move(w));
            }
        }
    }

    std::vector<std::vector<std::string>> schemas;
    std::vector<std::vector<std::vector<std::string>>> rows_of;
    std::vector<std::string> table_inst;
    std::vector<std::vector<std::string>> tuple_inst;
    std::vector<std::vector<std::string>> chunk_inst;
    std::set<std::string> used_keys;

    for (std::size_t t = 0; t < spec.n_tables; ++t) {
        const std::size_t th = t % themes().size();
        const Theme& theme = themes()[th];
        std::vector<std::string> schema{theme.key};
        schema.insert(schema.end(), theme.categorical.begin(), theme.categorical.end());
        for (const auto& n : theme.numeric) schema.push_back(n.name);

        std::vector<std::vector<std::string>> rows;
        for (std::size_t r = 0; r < spec.rows_per_table; ++r) {
            std::string key;
            do {
                key = make_word(rng, 2) + " " + make_word(rng, 2);
            } while (!used_keys.insert(key).second || used_words.count(key.substr(0, key.find(' '))));
            std::vector<std::string> row{key};
            for (std::size_t a = 0; a < theme.categorical.size(); ++a) {
                row.push_back(pools[th][a][rng.below(kPoolSize)]);
            }
            for (const auto& n : theme.numeric) row.push_back(std::to_string(rng.between(n.lo, n.hi)));
            rows.push_back(std::move(row));
        }

        const std::string stem = theme.name + "_" + pad4(t + 1);
        std::string csv;
        for (std::size_t c = 0; c < schema.size(); ++c) csv += (c ? "," : "") + csv_field(schema[c]);
        csv += '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) csv += (c ? "," : "") + csv_field(row[c]);
            csv += '\n';
        }
        const std::string table_source = "tables/" + stem + ".csv";
        auto ingested = ingest_table_text(csv, stem, table_source);
        const auto n_tuples = ingested.tuples.size();
        table_inst.push_back(ingested.table.instance_id);
        auto& tids = tuple_inst.emplace_back();
        for (const auto& x : ingested.tuples) tids.push_back(x.instance_id);
        std::vector<DataInstance> instances;
        instances.push_back(std::move(ingested.table));
        for (auto& x : ingested.tuples) instances.push_back(std::move(x));
        bench.lake.add_source({table_source, table_source, Modality::Table, 1 + n_tuples}, std::move(instances));
        bench.files.push_back({table_source, std::move(csv)});

        auto& cids = chunk_inst.emplace_back();
        if (spec.text_evidence) {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto& row = rows[r];
                std::string text = row[0] + " is a " + theme.name + ".";
                for (std::size_t c = 1; c < schema.size(); ++c) {
                    text += " The " + readable(schema[c]) + " of " + row[0] + " is " + row[c] + ".";
                }
                text += '\n';
                const std::string source = "texts/" + stem + "_r" + pad4(r + 1) + ".txt";
                auto chunks = ingest_text(text, source, source);
                cids.push_back(chunks.front().instance_id);
                const auto n_chunks = chunks.size();
                bench.lake.add_source({source, source, Modality::Text, n_chunks}, std::move(chunks));
                bench.files.push_back({source, std::move(text)});
            }
        }
        schemas.push_back(std::move(schema));
        rows_of.push_back(std::move(rows));
    }

    const std::size_t total_rows = spec.n_tables * spec.rows_per_table;
    const auto tuple_picks = sample_without_replacement(rng, total_rows, spec.n_objects);
    for (std::size_t i = 0; i < tuple_picks.size(); ++i) {
        const std::size_t t = tuple_picks[i] / spec.rows_per_table;
        const std::size_t r = tuple_picks[i] % spec.rows_per_table;
        const Theme& theme = themes()[t % themes().size()];
        const auto& schema = schemas[t];
        std::vector<std::string> cells = rows_of[t][r];
        const std::size_t col = 1 + rng.below(schema.size() - 1);
        const bool corrupt = rng.unit() < spec.corruption_rate;
        if (corrupt) cells[col] = corrupt_value(rng, theme, col, cells[col], pools[t % themes().size()]);

        Tuple tuple{themes()[t % themes().size()].name + "_" + pad4(t + 1), r, schema, cells, {schema[0]}};
        const std::string id = "obj-" + pad4(i + 1);
        bench.objects.push_back(DataObject::imputed(id, std::move(tuple), schema[col]));
        auto& rel = bench.qrels.relevant[id];
        rel.insert(tuple_inst[t][r]);
        if (spec.text_evidence) rel.insert(chunk_inst[t][r]);
        bench.qrels.gold[id] = corrupt ? Verdict::Refuted : Verdict::Verified;
    }

    const auto claim_picks = sample_without_replacement(rng, total_rows, spec.n_claims);
    for (std::size_t i = 0; i < claim_picks.size(); ++i) {
        const std::size_t t = claim_picks[i] / spec.rows_per_table;
        const std::size_t r = claim_picks[i] % spec.rows_per_table;
        const Theme& theme = themes()[t % themes().size()];
        const auto& schema = schemas[t];
        const std::size_t n_cat = theme.categorical.size();
        const std::size_t col = 1 + n_cat + rng.below(theme.numeric.size());
        std::string value = rows_of[t][r][col];
        const bool corrupt = rng.unit() < spec.corruption_rate;
        if (corrupt) value = corrupt_value(rng, theme, col, value, pools[t % themes().size()]);

        const std::string id = "claim-" + pad4(i + 1);
        bench.objects.push_back(
            DataObject::claim(id, "The " + readable(schema[col]) + " of " + rows_of[t][r][0] + " is " + value + "."));
        auto& rel = bench.qrels.relevant[id];
        rel.insert(table_inst[t]);
        if (spec.text_evidence) rel.insert(chunk_inst[t][r]);
        bench.qrels.gold[id] = corrupt ? Verdict::Refuted : Verdict::Verified;
    }

    bench.lake.check_manifest();
    return bench;
}

void write_benchmark(const Benchmark& bench, const std::filesystem::path& dir) {
    const auto lake_dir = dir / "lake";
    std::filesystem::create_directories(lake_dir / "tables");
    std::filesystem::create_directories(lake_dir / "texts");
    for (const auto& f : bench.files) write_file(lake_dir / f.path, f.contents);

    std::string objects;
    for (const auto& g : bench.objects) objects += json(g).dump() + "\n";
    write_file(dir / "objects.jsonl", objects);

    std::string qrels;
    for (const auto& [id, gold] : bench.qrels.gold) {
        json rel = json::array();
        if (auto it = bench.qrels.relevant.find(id); it != bench.qrels.relevant.end()) rel = it->second;
        qrels += json{{"object_id", id}, {"relevant", rel}, {"gold", to_string(gold)}}.dump() + "\n";
    }
    write_file(dir / "qrels.jsonl", qrels);
    write_file(dir / "spec.json", json(bench.spec).dump(2) + "\n");
}

Benchmark read_benchmark(const std::filesystem::path& dir) {
    Benchmark bench;
    if (std::filesystem::exists(dir / "spec.json")) {
        try {
            bench.spec = json::parse(read_file(dir / "spec.json")).get<BenchmarkSpec>();
        } catch (const json::exception& e) {
            throw BenchError("malformed spec.json: " + std::string(e.what()));
        }
    }
    bench.lake = load_lake(dir / "lake", {kDefaultMaxChunkChars, false});

    auto each_line = [](const std::string& bytes, const std::string& what, auto&& fn) {
        std::istringstream in(bytes);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (text::trim(line).empty()) continue;
            try {
                fn(json::parse(line));
            } catch (const json::exception& e) {
                throw BenchError(what + " line " + std::to_string(n) + ": " + e.what());
            } catch (const ContractError& e) {
                throw BenchError(what + " line " + std::to_string(n) + ": " + e.what());
            }
        }
    };
    each_line(read_file(dir / "objects.jsonl"), "objects.jsonl", [&](const json& j) {
        auto g = j.get<DataObject>();
        g.validate();
        bench.objects.push_back(std::move(g));
    });
    each_line(read_file(dir / "qrels.jsonl"), "qrels.jsonl", [&](const json& j) {
        const auto id = j.at("object_id").get<std::string>();
        bench.qrels.relevant[id] = j.at("relevant").get<std::set<std::string>>();
        bench.qrels.gold[id] = parse_verdict_name(j.at("gold").get<std::string>());
    });
    return bench;
}

double recall_at_k(const Runs& runs, const Qrels& qrels, std::size_t k) {
    if (k == 0) throw MetricError("k must be positive");
    for (const auto& [id, _] : runs) {
        if (!qrels.relevant.count(id)) throw MetricError("run object '" + id + "' has no relevance judgments");
    }
    if (qrels.relevant.empty()) throw MetricError("no judged objects");
    double sum = 0.0;
    for (const auto& [id, relevant] : qrels.relevant) {
        if (relevant.empty()) throw MetricError("object '" + id + "' has no relevant instances");
        std::size_t hit = 0;
        if (auto it = runs.find(id); it != runs.end()) {
            const auto& ranked = it->second;
            std::set<std::string> seen;
            for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
                if (relevant.count(ranked[i]) && seen.insert(ranked[i]).second) ++hit;
            }
        }
        sum += static_cast<double>(hit) / static_cast<double>(relevant.size());
    }
    return sum / static_cast<double>(qrels.relevant.size());
}

double verifier_accuracy(const std::map<std::string, Verdict>& decisions, const Qrels& qrels, bool binary_adapter,
                         const EvidenceSeen* evidence) {
    for (const auto& [id, _] : decisions) {
        if (!qrels.gold.count(id)) throw MetricError("decision for unknown object '" + id + "'");
    }
    if (qrels.gold.empty()) throw MetricError("no gold verdicts");
    std::size_t correct = 0;
    for (const auto& [id, gold] : qrels.gold) {
        const auto d = decisions.find(id);
        if (d == decisions.end()) throw MetricError("no decision for object '" + id + "'");
        Verdict expected = gold;
        if (evidence) {
            const auto e = evidence->find(id);
            if (e != evidence->end() && !e->second.empty()) {
                const auto rel = qrels.relevant.find(id);
                const bool any_relevant =
                    rel != qrels.relevant.end() && std::any_of(e->second.begin(), e->second.end(),
                                                               [&](const std::string& x) { return rel->second.count(x) > 0; });
                if (!any_relevant) expected = Verdict::NotRelated;
            }
        }
        if (d->second == expected ||
            (binary_adapter && expected == Verdict::NotRelated && d->second == Verdict::Refuted)) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(qrels.gold.size());
}

Qrels restrict_qrels(const Qrels& qrels, const DataLake& lake, const std::vector<std::string>& object_ids,
                     std::optional<Modality> modality) {
    Qrels out;
    for (const auto& id : object_ids) {
        const auto rel = qrels.relevant.find(id);
        std::set<std::string> kept;
        if (rel != qrels.relevant.end()) {
            for (const auto& x : rel->second) {
                const auto* inst = lake.find(x);
                if (!modality || (inst && inst->modality() == *modality)) kept.insert(x);
            }
        }
        if (modality && kept.empty()) continue;
        out.relevant[id] = std::move(kept);
        if (auto g = qrels.gold.find(id); g != qrels.gold.end()) out.gold[id] = g->second;
    }
    return out;
}

BenchmarkRun run_benchmark(const Benchmark& bench, const EngineConfig& config) {
    EngineConfig cfg = config;
    cfg.log_path.reset();
    const Engine engine = Engine::build(bench.lake, cfg);

    BenchmarkRun run;
    std::vector<std::string> tuple_ids;
    std::vector<std::string> claim_ids;
    std::map<std::string, Verdict> decisions;
    std::map<std::string, Verdict> relevant_decisions;
    std::map<std::string, Verdict> baseline;
    EvidenceSeen evidence;
    EvidenceSeen relevant_evidence;
    std::map<Modality, Runs> runs;

    EngineConfig withheld = cfg;
    withheld.withhold_evidence = true;

    for (const auto& g : bench.objects) {
        (g.kind == ObjectKind::ImputedTuple ? tuple_ids : claim_ids).push_back(g.object_id);
        auto report = engine.verify(g).report;
        for (auto m : {Modality::Tuple, Modality::Text, Modality::Table}) {
            auto& ranked = runs[m][g.object_id];
            for (const auto& r : report.hits.reranked(m)) ranked.push_back(r.instance_id);
        }
        decisions[g.object_id] = report.aggregate;
        auto& seen = evidence[g.object_id];
        for (const auto& r : report.records) seen.push_back(r.instance_id);

        // Verifier alone, handed the relevant instance of the primary modality.
        const Modality primary = g.kind == ObjectKind::ImputedTuple ? Modality::Tuple : Modality::Table;
        if (auto rel = bench.qrels.relevant.find(g.object_id); rel != bench.qrels.relevant.end()) {
            for (const auto& id : rel->second) {
                const auto* x = bench.lake.find(id);
                if (!x || x->modality() != primary) continue;
                const auto* v = engine.registry().find(select_verifier(g, primary, engine.registry(), cfg.mode));
                relevant_decisions[g.object_id] = v->verify(g, *x).verdict;
                relevant_evidence[g.object_id] = {id};
                break;
            }
        }

        const auto base = verify_object(g, engine.lake(), engine.content_index(), engine.vector_index(),
                                        engine.embedder(), engine.registry(), withheld, report.timestamp_ms);
        baseline[g.object_id] = base.aggregate;
        run.reports.emplace(g.object_id, std::move(report));
    }

    const bool binary = false;
    auto add_recall = [&](const std::string& generated, const std::vector<std::string>& ids, Modality m) {
        if (ids.empty()) return;
        const auto q = restrict_qrels(bench.qrels, bench.lake, ids, m);
        if (q.relevant.empty()) return;
        Runs r;
        for (const auto& [id, _] : q.relevant) r[id] = runs[m][id];
        const std::size_t k = cfg.k_prime.for_modality(m);
        run.rows.push_back({"recall", generated, std::string(to_string(m)), "retrieved", k, q.relevant.size(),
                            recall_at_k(r, q, k)});
    };
    auto add_accuracy = [&](const std::string& generated, const std::vector<std::string>& ids,
                            const std::string& retrieved, const std::string& setting,
                            const std::map<std::string, Verdict>& d, const EvidenceSeen* e) {
        if (ids.empty()) return;
        const auto q = restrict_qrels(bench.qrels, bench.lake, ids, std::nullopt);
        std::map<std::string, Verdict> sub;
        for (const auto& id : ids) {
            if (auto it = d.find(id); it != d.end()) sub[id] = it->second;
            else sub[id] = Verdict::NotRelated;
        }
        run.rows.push_back({"accuracy", generated, retrieved, setting, 0, q.gold.size(),
                            verifier_accuracy(sub, q, binary, e)});
    };

    const std::string text_suffix = bench.spec.text_evidence ? "+text" : "";
    add_recall("tuple", tuple_ids, Modality::Tuple);
    add_recall("tuple", tuple_ids, Modality::Text);
    add_recall("textual claim", claim_ids, Modality::Table);
    add_recall("textual claim", claim_ids, Modality::Text);
    add_accuracy("tuple", tuple_ids, "tuple", "relevant", relevant_decisions, &relevant_evidence);
    add_accuracy("tuple", tuple_ids, "tuple" + text_suffix, "retrieved", decisions, &evidence);
    add_accuracy("tuple", tuple_ids, "none", "no evidence", baseline, nullptr);
    add_accuracy("textual claim", claim_ids, "table", "relevant", relevant_decisions, &relevant_evidence);
    add_accuracy("textual claim", claim_ids, "table" + text_suffix, "retrieved", decisions, &evidence);
    add_accuracy("textual claim", claim_ids, "none", "no evidence", baseline, nullptr);
    return run;
}

std::string render_runs(const BenchmarkRun& run) {
    std::string out;
    for (const auto& [id, report] : run.reports) {
        for (auto m : {Modality::Tuple, Modality::Text, Modality::Table}) {
            for (const auto& r : report.hits.reranked(m)) {
                out += json{{"object_id", id},
                            {"modality", to_string(m)},
                            {"rank", r.rank},
                            {"instance_id", r.instance_id},
                            {"score", r.score}}
                           .dump();
                out += '\n';
            }
        }
    }
    return out;
}

}  // namespace verifai
