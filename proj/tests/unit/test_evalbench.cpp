#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"
#include "verifai/error.hpp"
#include "verifai/evalbench.hpp"

using namespace verifai;
using verifai::testing::read_file;
using verifai::testing::TempDir;

namespace {

BenchmarkSpec small_spec(double corruption, bool text = false) {
    BenchmarkSpec s;
    s.seed = 9;
    s.n_tables = 12;
    s.rows_per_table = 5;
    s.n_objects = 20;
    s.n_claims = text ? 10 : 0;
    s.corruption_rate = corruption;
    s.text_evidence = text;
    return s;
}

std::map<std::string, std::string> dir_bytes(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = read_file(e.path());
    }
    return out;
}

}  // namespace

TEST(GenBenchmark, CleanIsAllVerified) {
    const auto b = gen_benchmark(small_spec(0.0));
    ASSERT_EQ(b.objects.size(), 20u);
    for (const auto& [id, v] : b.qrels.gold) EXPECT_EQ(v, Verdict::Verified) << id;
}

TEST(GenBenchmark, FullCorruptionIsAllRefuted) {
    const auto b = gen_benchmark(small_spec(1.0, true));
    ASSERT_EQ(b.qrels.gold.size(), 30u);
    for (const auto& [id, v] : b.qrels.gold) EXPECT_EQ(v, Verdict::Refuted) << id;
}

TEST(GenBenchmark, ObjectsAndQrelsAreConsistent) {
    const auto b = gen_benchmark(small_spec(0.5, true));
    EXPECT_EQ(b.lake.size(), 12u + 12u * 5u + 12u * 5u);
    EXPECT_NO_THROW(b.lake.check_manifest());
    std::set<std::string> keys;
    for (const auto& g : b.objects) {
        EXPECT_NO_THROW(g.validate());
        ASSERT_TRUE(b.qrels.relevant.count(g.object_id));
        const auto& rel = b.qrels.relevant.at(g.object_id);
        EXPECT_EQ(rel.size(), 2u);
        for (const auto& x : rel) EXPECT_NE(b.lake.find(x), nullptr);
        const auto gold = b.qrels.gold.at(g.object_id);
        EXPECT_TRUE(gold == Verdict::Verified || gold == Verdict::Refuted);
        if (g.kind == ObjectKind::ImputedTuple) {
            ASSERT_TRUE(g.target_attr);
            EXPECT_TRUE(std::find(g.tuple->key_attrs.begin(), g.tuple->key_attrs.end(), *g.target_attr) ==
                        g.tuple->key_attrs.end());
        }
    }
    for (const auto& x : b.lake.instances()) {
        if (const auto* t = x.tuple()) EXPECT_TRUE(keys.insert(t->cells[0]).second) << t->cells[0];
    }
}

TEST(GenBenchmark, SeedDeterminism) {
    TempDir a, b, c;
    write_benchmark(gen_benchmark(small_spec(0.5, true)), a.path());
    write_benchmark(gen_benchmark(small_spec(0.5, true)), b.path());
    const auto bytes = dir_bytes(a.path());
    EXPECT_EQ(bytes, dir_bytes(b.path()));
    EXPECT_TRUE(bytes.count("objects.jsonl"));
    EXPECT_TRUE(bytes.count("qrels.jsonl"));
    EXPECT_TRUE(bytes.count("spec.json"));

    auto other = small_spec(0.5, true);
    other.seed = 10;
    write_benchmark(gen_benchmark(other), c.path());
    EXPECT_NE(bytes, dir_bytes(c.path()));
}

TEST(GenBenchmark, ReadBackMatches) {
    TempDir dir;
    const auto b = gen_benchmark(small_spec(0.5, true));
    write_benchmark(b, dir.path());
    const auto back = read_benchmark(dir.path());
    EXPECT_EQ(back.spec, b.spec);
    EXPECT_EQ(back.objects, b.objects);
    EXPECT_EQ(back.qrels, b.qrels);
    EXPECT_EQ(back.lake.instances().size(), b.lake.instances().size());
    for (const auto& x : b.lake.instances()) EXPECT_NE(back.lake.find(x.instance_id), nullptr);
}

TEST(GenBenchmark, InfeasibleSpecs) {
    auto s = small_spec(0.0);
    s.n_objects = 61;
    EXPECT_THROW(gen_benchmark(s), BenchError);
    s = small_spec(1.5);
    EXPECT_THROW(gen_benchmark(s), BenchError);
    s = small_spec(0.0);
    s.n_tables = 0;
    EXPECT_THROW(gen_benchmark(s), BenchError);
}

TEST(Recall, AllRelevantInTopK) {
    Qrels q;
    q.relevant = {{"a", {"x"}}, {"b", {"y", "z"}}};
    const Runs runs{{"a", {"x", "n"}}, {"b", {"z", "y"}}};
    EXPECT_DOUBLE_EQ(recall_at_k(runs, q, 2), 1.0);
    EXPECT_DOUBLE_EQ(recall_at_k(runs, q, 1), 0.75);
}

TEST(Recall, FourObjectsTwoHits) {
    Qrels q;
    q.relevant = {{"o1", {"r1"}}, {"o2", {"r2"}}, {"o3", {"r3"}}, {"o4", {"r4"}}};
    const Runs runs{{"o1", {"r1"}}, {"o2", {"n", "r2"}}, {"o3", {"n"}}, {"o4", {"n", "m", "r4"}}};
    EXPECT_DOUBLE_EQ(recall_at_k(runs, q, 2), 0.5);
    EXPECT_DOUBLE_EQ(recall_at_k(runs, q, 3), 0.75);
}

TEST(Recall, MonotoneInK) {
    const auto b = gen_benchmark(small_spec(0.0));
    Runs runs;
    std::size_t i = 0;
    for (const auto& [id, rel] : b.qrels.relevant) {
        std::vector<std::string> r{"noise1", "noise2"};
        r.insert(r.begin() + static_cast<long>(i++ % 3), *rel.begin());
        runs[id] = r;
    }
    double prev = 0;
    for (std::size_t k = 1; k <= 4; ++k) {
        const double v = recall_at_k(runs, b.qrels, k);
        EXPECT_GE(v, prev);
        EXPECT_LE(v, 1.0);
        prev = v;
    }
}

TEST(Recall, Errors) {
    Qrels q;
    q.relevant = {{"a", {"x"}}, {"empty", {}}};
    EXPECT_THROW(recall_at_k({{"zzz", {"x"}}}, q, 3), MetricError);
    EXPECT_THROW(recall_at_k({{"a", {"x"}}}, Qrels{}, 3), MetricError);
    EXPECT_THROW(recall_at_k({{"empty", {"x"}}}, q, 3), MetricError);
}

TEST(Accuracy, ThreeCaseRule) {
    Qrels q;
    q.relevant = {{"v", {"rv"}}, {"r", {"rr"}}, {"u", {"ru"}}};
    q.gold = {{"v", Verdict::Verified}, {"r", Verdict::Refuted}, {"u", Verdict::Verified}};
    EXPECT_DOUBLE_EQ(verifier_accuracy({{"v", Verdict::Verified}, {"r", Verdict::Refuted}, {"u", Verdict::Verified}}, q, false),
                     1.0);

    // "u" was decided on unrelated evidence only: NotRelated is the right call.
    const EvidenceSeen seen{{"v", {"rv"}}, {"r", {"rr", "other"}}, {"u", {"noise"}}};
    EXPECT_DOUBLE_EQ(verifier_accuracy({{"v", Verdict::Verified}, {"r", Verdict::Refuted}, {"u", Verdict::NotRelated}}, q,
                                       false, &seen),
                     1.0);
    EXPECT_NEAR(verifier_accuracy({{"v", Verdict::Verified}, {"r", Verdict::Refuted}, {"u", Verdict::Refuted}}, q, false,
                                  &seen),
                2.0 / 3.0, 1e-12);
    // A binary verifier answering "false" there is also counted correct.
    EXPECT_DOUBLE_EQ(verifier_accuracy({{"v", Verdict::Verified}, {"r", Verdict::Refuted}, {"u", Verdict::Refuted}}, q, true,
                                       &seen),
                     1.0);
    EXPECT_NEAR(verifier_accuracy({{"v", Verdict::Refuted}, {"r", Verdict::Verified}, {"u", Verdict::NotRelated}}, q, true),
                0.0, 1e-12);
}

TEST(Accuracy, Errors) {
    Qrels q;
    q.gold = {{"a", Verdict::Verified}};
    EXPECT_THROW(verifier_accuracy({}, q, false), MetricError);
    EXPECT_THROW(verifier_accuracy({{"a", Verdict::Verified}, {"b", Verdict::Verified}}, q, false), MetricError);
    EXPECT_THROW(verifier_accuracy({}, Qrels{}, false), MetricError);
}

TEST(Accuracy, PerfectRetrievalOnCleanBenchmark) {
    const auto b = gen_benchmark(small_spec(0.0));
    std::map<std::string, Verdict> decisions;
    for (const auto& g : b.objects) {
        for (const auto& id : b.qrels.relevant.at(g.object_id)) {
            const auto& x = b.lake.at(id);
            if (const auto* t = x.tuple()) decisions[g.object_id] = verify_tuple_tuple(g, *t, id).verdict;
        }
    }
    EXPECT_DOUBLE_EQ(verifier_accuracy(decisions, b.qrels, false), 1.0);
}

TEST(RunBenchmark, SmallRunHasExpectedRows) {
    const auto b = gen_benchmark(small_spec(0.5, true));
    const auto run = run_benchmark(b, EngineConfig{});
    EXPECT_EQ(run.reports.size(), 30u);
    auto find = [&](const std::string& metric, const std::string& gen, const std::string& ret,
                    const std::string& setting) -> const MetricRow* {
        for (const auto& r : run.rows) {
            if (r.metric == metric && r.generated == gen && r.retrieved == ret && r.setting == setting) return &r;
        }
        return nullptr;
    };
    const auto* tt = find("recall", "tuple", "tuple", "retrieved");
    ASSERT_NE(tt, nullptr);
    EXPECT_EQ(tt->k, 3u);
    EXPECT_GE(tt->value, 0.9);
    EXPECT_NE(find("recall", "textual claim", "table", "retrieved"), nullptr);
    const auto* none = find("accuracy", "tuple", "none", "no evidence");
    ASSERT_NE(none, nullptr);
    EXPECT_LE(none->value, 0.55);
    for (const auto& r : run.rows) {
        EXPECT_GE(r.value, 0.0);
        EXPECT_LE(r.value, 1.0);
    }
    const auto rendered = render_runs(run);
    EXPECT_FALSE(rendered.empty());
    EXPECT_EQ(rendered.back(), '\n');
}
