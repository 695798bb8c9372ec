#include "egvi/evalbench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "egvi/disambig.hpp"
#include "egvi/errors.hpp"
#include "egvi/random.hpp"

namespace egvi {
namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

// Uniform in [-1, 1] from a SplitMix64 counter stream.
double stream_uniform(std::uint64_t& state) {
    state += 1;
    const std::uint64_t bits = splitmix64(state) >> 11;  // 53 bits
    return static_cast<double>(bits) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

Benchmark load_benchmark(std::istream& in, std::string name) {
    Benchmark b;
    b.name = std::move(name);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
            throw ParseError("expected 'word1<TAB>word2<TAB>score'", line_no);
        }
        double gold = 0.0;
        const auto& s = fields[2];
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), gold);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(gold)) {
            throw ParseError("bad score '" + s + "'", line_no);
        }
        b.pairs.push_back({fields[0], fields[1], gold});
    }
    if (b.pairs.empty()) throw ParseError("benchmark has no pairs", 0);
    return b;
}

Benchmark load_benchmark(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open benchmark file " + path.string());
    return load_benchmark(in, path.stem().string());
}

void save_benchmark(const Benchmark& benchmark, std::ostream& out) {
    char buf[64];
    for (const auto& p : benchmark.pairs) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p.gold);
        out << p.word1 << '\t' << p.word2 << '\t' << std::string_view(buf, ptr - buf) << '\n';
    }
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error("pearson: length mismatch");
    if (xs.size() < 2) throw Error("pearson: need at least two points");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

EvalReport evaluate_similarity(const EmbeddingMatrix& matrix, const SenseInventory* inventory,
                               const Benchmark& benchmark) {
    EvalReport report;
    report.benchmark = benchmark.name;
    report.mode = inventory ? "senses" : "baseline";
    report.n_pairs_total = benchmark.pairs.size();
    std::vector<double> gold;
    std::vector<double> predicted;
    for (const auto& p : benchmark.pairs) {
        try {
            double score;
            if (inventory) {
                score = relatedness(matrix, *inventory, p.word1, p.word2);
            } else {
                score = cosine(matrix.vector(p.word1), matrix.vector(p.word2));
            }
            predicted.push_back(score);
            gold.push_back(p.gold);
        } catch (const OutOfVocabulary&) {
        }
    }
    report.n_pairs_used = predicted.size();
    report.coverage = report.n_pairs_total
                          ? static_cast<double>(report.n_pairs_used) / report.n_pairs_total
                          : 0.0;
    report.pearson = pearson(predicted, gold);
    report.spearman = spearman(predicted, gold);
    return report;
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"benchmark", r.benchmark},       {"mode", r.mode},
            {"pearson", r.pearson},           {"spearman", r.spearman},
            {"n_pairs_used", r.n_pairs_used}, {"n_pairs_total", r.n_pairs_total},
            {"coverage", r.coverage}};
}

std::string to_table(const EvalReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "benchmark  %s\nmode       %s\npearson    %.4f\nspearman   %.4f\n"
                  "pairs      %zu / %zu\ncoverage   %.4f\n",
                  r.benchmark.c_str(), r.mode.c_str(), r.pearson, r.spearman, r.n_pairs_used,
                  r.n_pairs_total, r.coverage);
    return buf;
}

InventoryStats inventory_stats(const SenseInventory& inventory,
                               std::span<const std::string> restrict_to) {
    std::vector<std::size_t> counts;
    if (restrict_to.empty()) {
        for (const auto& e : inventory.entries()) counts.push_back(e.senses.size());
    } else {
        std::set<const InventoryEntry*> seen;
        for (const auto& w : restrict_to) {
            const auto* e = inventory.find(w);
            if (e && seen.insert(e).second) counts.push_back(e->senses.size());
        }
    }
    if (counts.empty()) throw Error("inventory_stats: no entries to summarize");
    InventoryStats s;
    s.words = counts.size();
    std::sort(counts.begin(), counts.end());
    s.mean = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0})) /
             static_cast<double>(counts.size());
    const std::size_t mid = counts.size() / 2;
    s.median = counts.size() % 2 ? static_cast<double>(counts[mid])
                                 : (static_cast<double>(counts[mid - 1]) + counts[mid]) / 2.0;
    s.max = counts.back();
    for (std::size_t c : counts) ++s.histogram[c];
    return s;
}

nlohmann::json to_json(const InventoryStats& s) {
    nlohmann::json hist = nlohmann::json::object();
    for (auto [senses, words] : s.histogram) hist[std::to_string(senses)] = words;
    return {{"words", s.words},
            {"mean_senses", s.mean},
            {"median_senses", s.median},
            {"max_senses", s.max},
            {"histogram", hist}};
}

PlantedFixture make_planted_fixture(std::uint64_t stream_seed) {
    constexpr std::size_t dim = PlantedFixture::kDim;
    static constexpr const char* kNames[] = {"alpha", "beta", "gamma"};
    PlantedFixture fx;
    fx.ego = "ego";
    std::vector<std::string> words{fx.ego};
    std::vector<float> data(dim, 0.0f);
    for (std::size_t c = 0; c < PlantedFixture::kClusters; ++c) {
        data[c] = 1.0f;  // normalized by EmbeddingMatrix
    }
    fx.label.push_back(-1);
    fx.members.resize(PlantedFixture::kClusters);

    std::uint64_t state = stream_seed;
    for (std::size_t c = 0; c < PlantedFixture::kClusters; ++c) {
        for (std::size_t m = 0; m < PlantedFixture::kMembersPerCluster; ++m) {
            char name[32];
            std::snprintf(name, sizeof name, "%s%02zu", kNames[c], m);
            std::vector<double> v(dim, 0.0);
            v[c] = 1.0;
            for (double& x : v) x += PlantedFixture::kNoise * stream_uniform(state);
            for (double x : v) data.push_back(static_cast<float>(x));
            words.emplace_back(name);
            fx.members[c].emplace_back(name);
            fx.label.push_back(static_cast<int>(c));
        }
    }
    fx.matrix = EmbeddingMatrix(std::move(words), dim, std::move(data));

    // Separation check: every intra-cluster cosine beats every inter-cluster one.
    double min_intra = 2.0;
    double max_inter = -2.0;
    for (WordId a = 1; a < fx.matrix.size(); ++a) {
        for (WordId b = a + 1; b < fx.matrix.size(); ++b) {
            const double c = cosine(fx.matrix.row(a), fx.matrix.row(b));
            if (fx.label[a] == fx.label[b]) {
                min_intra = std::min(min_intra, c);
            } else {
                max_inter = std::max(max_inter, c);
            }
        }
    }
    if (!(min_intra > max_inter)) throw Error("planted fixture lost cluster separation");
    return fx;
}

Benchmark synthetic_benchmark(const EmbeddingMatrix& matrix, std::size_t n_pairs,
                              std::uint64_t seed) {
    if (matrix.size() < 2) throw Error("synthetic_benchmark: need at least two words");
    const std::size_t possible = matrix.size() * (matrix.size() - 1) / 2;
    if (n_pairs > possible) throw Error("synthetic_benchmark: not enough distinct pairs");
    std::mt19937_64 rng(seed);
    std::set<std::pair<WordId, WordId>> used;
    Benchmark b;
    b.name = "synthetic";
    while (b.pairs.size() < n_pairs) {
        auto a = static_cast<WordId>(uniform_below(rng, matrix.size()));
        auto c = static_cast<WordId>(uniform_below(rng, matrix.size()));
        if (a == c || !used.insert(std::minmax(a, c)).second) continue;
        const double gold = static_cast<double>(uniform_below(rng, 1001)) / 100.0;
        b.pairs.push_back({matrix.word(a), matrix.word(c), gold});
    }
    return b;
}

}  // namespace egvi
