// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL. Data-backed checks run only when the real-data environment
// variables point at files.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../test_support.hpp"
#include "egvi/cli.hpp"
#include "egvi/disambig.hpp"
#include "egvi/egograph.hpp"
#include "egvi/errors.hpp"
#include "egvi/evalbench.hpp"
#include "egvi/inventory.hpp"
#include "egvi/service.hpp"
#include "egvi/simd/kernels.hpp"
#include "egvi/vectorstore.hpp"
#include "egvi/whispers.hpp"

using namespace egvi;
using nlohmann::json;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
    Status status;
    std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }

struct Criterion {
    std::string name;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> check;
};

// k-NN against the naive oracle.
Outcome knn_oracle() {
    const auto m = testutil::random_unit_matrix(1000, 64, 42);
    std::mt19937_64 rng(7);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    std::size_t checked = 0;
    for (int q = 0; q < 100; ++q) {
        std::vector<float> query(64);
        for (auto& x : query) x = gauss(rng);
        normalize(query);
        for (std::size_t k : {1u, 10u, 50u}) {
            const auto got = top_k(m, query, k);
            const auto want = testutil::linear_scan(m, query, k, {});
            if (got.size() != want.size()) return fail("size mismatch at query " + std::to_string(q));
            for (std::size_t i = 0; i < got.size(); ++i) {
                if (got[i].word_id != want[i].word_id)
                    return fail("id mismatch at query " + std::to_string(q) + " rank " + std::to_string(i));
                if (std::abs(got[i].score - want[i].score) > 1e-6)
                    return fail("score mismatch at query " + std::to_string(q));
            }
            ++checked;
        }
    }
    return pass(std::to_string(checked) + " query/k combinations, kernel " + std::string(simd::active().name));
}

WeightedGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
    WeightedGraph g(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < density) g.add_edge(i, j, u(rng));
    return g;
}

Outcome chinese_whispers_properties() {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        const auto g = random_graph(rng, n, (rng() % 100) / 100.0);
        const auto c = chinese_whispers(g, rng());
        std::vector<int> seen(n, 0);
        for (const auto& cluster : c.clusters) {
            if (cluster.empty()) return fail("empty cluster");
            for (auto v : cluster) {
                if (v >= n) return fail("vertex out of range");
                ++seen[v];
            }
        }
        for (int s : seen)
            if (s != 1) return fail("not a partition on trial " + std::to_string(trial));
    }

    WeightedGraph cliques(10);
    for (std::size_t base : {0u, 5u})
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j) cliques.add_edge(base + i, base + j, 1.0);
    cliques.add_edge(4, 5, 0.1);
    const std::vector<std::vector<std::size_t>> expected{{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}};
    int aligned = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        if (chinese_whispers(cliques, seed).clusters == expected) ++aligned;
    }
    if (aligned < 95) return fail("cliques recovered for " + std::to_string(aligned) + "/100 seeds");

    const auto g = random_graph(rng, 80, 0.1);
    const auto first = chinese_whispers(g, 1234);
    for (int i = 0; i < 10; ++i) {
        if (!(chinese_whispers(g, 1234) == first)) return fail("run " + std::to_string(i) + " differs");
    }
    return pass("200 partitions, cliques " + std::to_string(aligned) + "/100, 10 identical runs");
}

Outcome planted_recovery() {
    const auto fx = make_planted_fixture();
    const WordId ego = fx.matrix.id(fx.ego);
    double worst = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        InduceParams p;
        p.n = p.k = 30;
        p.min_size = 1;
        p.seed = seed;
        const auto senses = induce_senses(fx.matrix, ego, p);
        if (senses.size() != 3)
            return fail("seed " + std::to_string(seed) + ": " + std::to_string(senses.size()) + " senses");
        std::set<int> labels;
        for (const auto& s : senses) {
            const auto maj = testutil::majority_label(fx, s);
            worst = std::min(worst, maj.purity);
            labels.insert(maj.label);
            if (maj.purity < 0.9) return fail("seed " + std::to_string(seed) + ": purity " + std::to_string(maj.purity));
        }
        if (labels.size() != 3) return fail("seed " + std::to_string(seed) + ": two senses share a cluster");
    }
    return pass("20 seeds, min purity " + std::to_string(worst));
}

std::string anti_edge_violation(const EgoGraph& g) {
    std::set<std::pair<WordId, WordId>> anti;
    std::set<WordId> in_anti;
    for (const auto& a : g.anti_edges) {
        anti.insert(std::minmax(a.member, a.anti));
        in_anti.insert(a.member);
        in_anti.insert(a.anti);
    }
    for (const auto& e : g.edges) {
        if (anti.contains(std::minmax(e.a, e.b))) return "edge coincides with an anti-edge";
    }
    for (auto v : g.vertices) {
        if (!in_anti.contains(v)) return "vertex without anti-edge";
    }
    if (g.vertices.size() > g.n_param) return "|V| > N";
    return {};
}

Outcome anti_edge_invariants() {
    const auto fx = make_planted_fixture();
    const auto planted = build_ego_graph(fx.matrix, fx.matrix.id(fx.ego), 30, 30);
    if (auto v = anti_edge_violation(planted); !v.empty()) return fail("fixture: " + v);
    std::size_t edges = planted.edges.size();
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = testutil::clustered_matrix(400, 12, 2 + trial % 5, 0.6, 900 + trial);
        const std::size_t n = 10 + trial % 40;
        const auto g = build_ego_graph(m, static_cast<WordId>(trial * 7), n, 5 + trial % 30);
        if (auto v = anti_edge_violation(g); !v.empty()) return fail("graph " + std::to_string(trial) + ": " + v);
        edges += g.edges.size();
    }
    return pass("51 graphs, " + std::to_string(edges) + " edges checked");
}

Outcome lambda_collapse() {
    const auto fx = make_planted_fixture();
    InventoryParams meta;
    meta.lambda = 1.0;
    meta.source = "fixture.vec";
    InduceParams p;
    p.n = p.k = 30;
    const auto inv = build_inventory(fx.matrix, {}, meta, p, BuildOptions{1}).inventory;
    double worst = 0.0;
    for (const auto& entry : inv.entries()) {
        const auto w = fx.matrix.vector(entry.word);
        for (const auto& s : entry.senses) {
            const auto v = sense_vector(fx.matrix, entry.word, s, 1.0);
            for (std::size_t j = 0; j < v.size(); ++j) worst = std::max(worst, std::abs(v[j] - w[j]));
        }
    }
    if (!(worst < 1e-9)) return fail("sense vector deviates by " + std::to_string(worst));
    const auto bench = synthetic_benchmark(fx.matrix, 30, 11);
    const auto senses = evaluate_similarity(fx.matrix, &inv, bench);
    const auto baseline = evaluate_similarity(fx.matrix, nullptr, bench);
    const double diff = std::abs(senses.pearson - baseline.pearson);
    if (!(diff <= 1e-6)) return fail("pearson differs by " + std::to_string(diff));
    char buf[128];
    std::snprintf(buf, sizeof buf, "max deviation %.1e, pearson diff %.1e", worst, diff);
    return pass(buf);
}

Outcome serialization_round_trip() {
    const auto fx = make_planted_fixture();
    InventoryParams meta;
    meta.lang = "fx";
    meta.source = "fixture.vec";
    InduceParams p;
    p.n = p.k = 30;
    const auto inv = build_inventory(fx.matrix, {}, meta, p, BuildOptions{1}).inventory;
    std::ostringstream first;
    save_inventory(inv, first);
    std::istringstream in1(first.str());
    const auto once = load_inventory(in1);
    if (!(once == inv)) return fail("first load differs structurally");
    std::ostringstream second;
    save_inventory(once, second);
    std::istringstream in2(second.str());
    const auto twice = load_inventory(in2);
    if (!(twice == inv)) return fail("second load differs structurally");
    std::ostringstream third;
    save_inventory(twice, third);
    if (first.str() != second.str() || second.str() != third.str()) return fail("files not byte-identical");
    return pass(std::to_string(inv.size()) + " entries, " + std::to_string(first.str().size()) + " bytes");
}

int run(std::vector<std::string> args, std::string& out) {
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    out = o.str();
    return code;
}

Outcome end_to_end() {
    const auto fx = make_planted_fixture();
    const auto dir = testutil::temp_dir("acceptance_e2e");
    const auto vec = (dir / "fixture.vec").string();
    const auto words = (dir / "words.txt").string();
    testutil::write_file(words, fx.ego + "\n");
    std::string out;
    if (run({"fixture", "--embeddings-out", vec}, out) != 0) return fail("fixture command failed");
    std::size_t checks = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inv_path = (dir / ("inv" + std::to_string(seed) + ".tsv")).string();
        if (run({"induce", "--embeddings", vec, "--out", inv_path, "--n", "30", "--k", "30", "--seed",
                 std::to_string(seed), "--words", words, "--quiet"},
                out) != 0)
            return fail("induce failed for seed " + std::to_string(seed));
        const auto inv = load_inventory(std::filesystem::path(inv_path));
        WsdService service;
        service.set_bundles({load_bundle({"fx", vec, inv_path})});
        for (std::size_t c = 0; c < PlantedFixture::kClusters; ++c) {
            const auto text = testutil::fixture_sentence(fx, c);
            std::string cli_out;
            if (run({"disambiguate", "--embeddings", vec, "--inventory", inv_path, "--text", text, "--json"},
                    cli_out) != 0)
                return fail("disambiguate failed");
            const auto served = service.handle("POST", "/disambiguate", {}, json{{"text", text}, {"lang", "fx"}}.dump());
            if (served.status != 200) return fail("service returned " + std::to_string(served.status));
            for (const auto& body : {json::parse(cli_out), json::parse(served.body)}) {
                const auto& tok = body["tokens"][2];
                if (tok["surface"] != fx.ego || !tok.contains("sense")) return fail("ego not disambiguated");
                const auto id = tok["sense"]["id"].get<std::size_t>();
                const auto& sense = inv.find(fx.ego)->senses.at(id);
                if (testutil::majority_label(fx, sense).label != static_cast<int>(c))
                    return fail("seed " + std::to_string(seed) + ", cluster " + std::to_string(c + 1) +
                                ": resolved to the wrong sense");
                ++checks;
            }
        }
    }
    return pass(std::to_string(checks) + " resolutions (CLI and service)");
}

Outcome real_data() {
    const char* vec = std::getenv("EGVI_REAL_EMBEDDINGS");
    const char* bench = std::getenv("EGVI_SEMR11_EN");
    if (!vec || !bench || !std::filesystem::exists(vec) || !std::filesystem::exists(bench)) {
        return {Status::kSkip, "set EGVI_REAL_EMBEDDINGS and EGVI_SEMR11_EN to run"};
    }
    const auto matrix = load_embeddings(std::filesystem::path(vec), 100000);
    const auto benchmark = load_benchmark(std::filesystem::path(bench));
    std::vector<std::string> vocab;
    std::set<std::string> seen;
    for (const auto& p : benchmark.pairs) {
        for (const auto& w : {p.word1, p.word2}) {
            if (seen.insert(w).second && matrix.find(w)) vocab.push_back(w);
        }
    }
    InventoryParams meta;
    meta.lang = "en";
    meta.vocab = 100000;
    meta.source = embeddings_source_id(vec);
    InduceParams p;
    p.n = p.k = 200;
    BuildOptions options;
    options.jobs = 0;
    const auto report = build_inventory(matrix, vocab, meta, p, options);
    const auto eval = evaluate_similarity(matrix, &report.inventory, benchmark);
    const auto stats = inventory_stats(report.inventory, vocab);
    char buf[160];
    std::snprintf(buf, sizeof buf, "coverage %.3f, mean senses %.2f, pearson %.3f", eval.coverage, stats.mean,
                  eval.pearson);
    if (eval.coverage < 0.85) return fail(buf);
    if (stats.mean < 12.5 * 0.75 || stats.mean > 12.5 * 1.25) return fail(buf);
    return pass(buf);
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"k-NN matches linear-scan oracle", 5.0, knn_oracle},
        {"Chinese Whispers partition, cliques, determinism", 10.0, chinese_whispers_properties},
        {"planted-sense recovery", 10.0, planted_recovery},
        {"anti-edge invariants", 0.0, anti_edge_invariants},
        {"lambda=1 collapses to word vectors", 0.0, lambda_collapse},
        {"inventory serialization round trip", 0.0, serialization_round_trip},
        {"end-to-end disambiguation", 0.0, end_to_end},
        {"real data: coverage and senses per word", 0.0, real_data},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.status == Status::kPass && c.time_limit > 0 && secs >= c.time_limit) {
            o = fail(o.detail + "; over the " + std::to_string(c.time_limit) + " s limit");
        }
        const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
        std::printf("%s  %-50s %7.3fs  %s\n", tag, c.name.c_str(), secs, o.detail.c_str());
        if (o.status == Status::kFail) ++failed;
    }
    std::fflush(stdout);
    return failed ? 1 : 0;
}
