#include "egvi/egograph.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "egvi/errors.hpp"

namespace egvi {
namespace {

std::pair<WordId, WordId> canonical(WordId a, WordId b) { return std::minmax(a, b); }

std::vector<float> delta(const EmbeddingMatrix& matrix, WordId ego, WordId member) {
    auto w = matrix.row(ego);
    auto wi = matrix.row(member);
    std::vector<float> out(w.size());
    bool nonzero = false;
    for (std::size_t j = 0; j < w.size(); ++j) {
        out[j] = w[j] - wi[j];
        nonzero |= out[j] != 0.0f;
    }
    if (!nonzero) {
        throw DegenerateDelta("identical vectors for '" + matrix.word(ego) + "' and '" +
                              matrix.word(member) + "'");
    }
    return out;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

WordId anti_pair(const EmbeddingMatrix& matrix, WordId ego, WordId member,
                 const SearchOptions& search) {
    if (ego == member) throw Error("anti_pair: ego and member must differ");
    const WordId excluded[] = {ego, member};
    auto best = top_k(matrix, delta(matrix, ego, member), 1, excluded, search);
    if (best.empty()) throw Error("anti_pair: vocabulary has no candidate");
    return best.front().word_id;
}

EgoGraph build_ego_graph(const EmbeddingMatrix& matrix, WordId ego, std::size_t n,
                         std::size_t k, const EgoGraphOptions& options) {
    if (ego >= matrix.size()) throw OutOfVocabulary("#" + std::to_string(ego));
    if (n < 2) throw Error("build_ego_graph: N must be at least 2");
    if (k < 1) throw Error("build_ego_graph: K must be at least 1");
    const std::size_t depth = std::max<std::size_t>(1, options.anti_pair_depth);

    EgoGraph graph;
    graph.ego = ego;
    graph.n_param = n;
    graph.k_param = k;
    const WordId self[] = {ego};
    graph.neighbors = top_k(matrix, matrix.row(ego), n, self, options.search);

    std::vector<bool> in_neighbors(matrix.size(), false);
    for (const auto& nb : graph.neighbors) in_neighbors[nb.word_id] = true;

    std::vector<KnnQuery> delta_queries;
    std::vector<WordId> members;
    for (const auto& nb : graph.neighbors) {
        try {
            delta_queries.push_back({delta(matrix, ego, nb.word_id), {ego, nb.word_id}});
            members.push_back(nb.word_id);
        } catch (const DegenerateDelta&) {
            // No direction to search along; the neighbor cannot join an anti-edge.
        }
    }
    auto anti_lists = top_k_batch(matrix, delta_queries, depth, options.search);

    std::vector<bool> in_vertices(matrix.size(), false);
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (const auto& candidate : anti_lists[i]) {
            if (!in_neighbors[candidate.word_id]) continue;
            graph.anti_edges.push_back({members[i], candidate.word_id});
            in_vertices[members[i]] = true;
            in_vertices[candidate.word_id] = true;
            break;
        }
    }
    for (const auto& nb : graph.neighbors) {
        if (in_vertices[nb.word_id]) graph.vertices.push_back(nb.word_id);
    }
    if (graph.vertices.empty()) return graph;

    std::set<std::pair<WordId, WordId>> forbidden;
    for (const auto& ae : graph.anti_edges) forbidden.insert(canonical(ae.member, ae.anti));

    std::vector<KnnQuery> vertex_queries;
    vertex_queries.reserve(graph.vertices.size());
    for (WordId v : graph.vertices) {
        auto r = matrix.row(v);
        vertex_queries.push_back({{r.begin(), r.end()}, {v}});
    }
    auto vertex_lists = top_k_batch(matrix, vertex_queries, k, options.search);

    std::set<std::pair<WordId, WordId>> linked;
    for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
        for (const auto& u : vertex_lists[i]) {
            if (!in_vertices[u.word_id]) continue;
            auto pair = canonical(graph.vertices[i], u.word_id);
            if (forbidden.contains(pair)) continue;
            linked.insert(pair);
        }
    }
    graph.edges.reserve(linked.size());
    for (auto [a, b] : linked) {
        const double w = cosine(matrix.row(a), matrix.row(b));
        graph.edges.push_back({a, b, std::max(w, 0.0)});
    }
    return graph;
}

void write_dot(const EgoGraph& graph, const EmbeddingMatrix& matrix, std::ostream& out,
               std::span<const std::size_t> cluster_of) {
    static constexpr const char* kPalette[] = {"gold",      "orchid",    "tomato",
                                               "lightblue", "palegreen", "lightsalmon",
                                               "khaki",     "plum",      "lightgray"};
    out << "graph \"" << dot_escape(matrix.word(graph.ego)) << "\" {\n";
    out << "  node [shape=ellipse, style=filled, fillcolor=white];\n";
    for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
        WordId v = graph.vertices[i];
        out << "  n" << v << " [label=\"" << dot_escape(matrix.word(v)) << "\"";
        if (i < cluster_of.size()) {
            out << ", fillcolor=" << kPalette[cluster_of[i] % std::size(kPalette)];
        }
        out << "];\n";
    }
    for (const auto& e : graph.edges) {
        out << "  n" << e.a << " -- n" << e.b << " [weight=" << e.weight << "];\n";
    }
    for (const auto& ae : graph.anti_edges) {
        out << "  n" << ae.member << " -- n" << ae.anti
            << " [style=dashed, color=red, constraint=false];\n";
    }
    out << "}\n";
}

}  // namespace egvi
