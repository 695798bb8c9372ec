#include "egvi/inventory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "egvi/errors.hpp"
#include "egvi/parallel.hpp"
#include "egvi/random.hpp"
#include "egvi/text.hpp"

namespace egvi {
namespace {

constexpr std::string_view kParamsTag = "#params";
constexpr std::string_view kColumnHeader = "word\tsense_id\tkeyword\tcluster";

bool has_reserved_char(std::string_view word) {
    return word.find_first_of("\t,:\n\r") != std::string_view::npos;
}

double round6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    double out = std::strtod(buf, nullptr);
    return out == 0.0 ? 0.0 : out;  // drop negative zero
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename T>
T parse_field(std::string_view s, std::string_view what, std::size_t line) {
    T value{};
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw ParseError("bad " + std::string(what) + " '" + std::string(s) + "'", line);
    }
    return value;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

InventoryParams parse_params(const std::string& line) {
    auto fields = split(line, '\t');
    if (fields.empty() || fields[0] != kParamsTag) throw ParseError("missing #params header", 1);
    std::map<std::string, std::string, std::less<>> kv;
    for (std::size_t i = 1; i < fields.size(); ++i) {
        auto eq = fields[i].find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("bad params field '" + std::string(fields[i]) + "'", 1);
        }
        kv.emplace(std::string(fields[i].substr(0, eq)), std::string(fields[i].substr(eq + 1)));
    }
    auto need = [&](std::string_view key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("params header lacks " + std::string(key), 1);
        return it->second;
    };
    InventoryParams p;
    p.lang = need("lang");
    p.n = parse_field<std::size_t>(need("N"), "N", 1);
    p.k = parse_field<std::size_t>(need("K"), "K", 1);
    p.lambda = parse_field<double>(need("lambda"), "lambda", 1);
    p.vocab = parse_field<std::size_t>(need("vocab"), "vocab", 1);
    p.seed = parse_field<std::uint64_t>(need("seed"), "seed", 1);
    p.source = need("source");
    return p;
}

std::string sanitize_header_value(std::string s) {
    for (char& c : s) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace

std::size_t count_anti_edges(std::span<const AntiEdge> anti_edges, WordId v) {
    return static_cast<std::size_t>(std::count_if(
        anti_edges.begin(), anti_edges.end(),
        [v](const AntiEdge& ae) { return ae.member == v || ae.anti == v; }));
}

WordId select_keyword(std::span<const WordId> members, std::span<const AntiEdge> anti_edges,
                      const EmbeddingMatrix& matrix, WordId ego) {
    if (members.empty()) throw Error("select_keyword: empty cluster");
    WordId best = members.front();
    std::size_t best_count = count_anti_edges(anti_edges, best);
    double best_cos = cosine(matrix.row(ego), matrix.row(best));
    for (WordId m : members.subspan(1)) {
        const std::size_t c = count_anti_edges(anti_edges, m);
        const double cs = cosine(matrix.row(ego), matrix.row(m));
        if (c > best_count || (c == best_count && (cs > best_cos || (cs == best_cos && m < best)))) {
            best = m;
            best_count = c;
            best_cos = cs;
        }
    }
    return best;
}

std::vector<double> sense_vector(const EmbeddingMatrix& matrix, WordId ego,
                                 std::span<const WordId> members, double lambda) {
    if (members.empty()) throw Error("sense_vector: empty cluster");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("sense_vector: lambda outside [0, 1]");
    const auto w = matrix.row(ego);
    const std::size_t dim = matrix.dim();
    std::vector<double> centroid(dim, 0.0);
    for (WordId u : members) {
        const auto row = matrix.row(u);
        const double c = cosine(w, row);
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += c * row[j];
    }
    const double n = static_cast<double>(members.size());
    std::vector<double> s(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        s[j] = lambda * static_cast<double>(w[j]) + (1.0 - lambda) * (centroid[j] / n);
    }
    return s;
}

std::vector<SenseCluster> senses_from_graph(const EmbeddingMatrix& matrix, const EgoGraph& graph,
                                            std::uint64_t seed, std::size_t min_size,
                                            std::size_t max_iter) {
    const WordId ego = graph.ego;
    std::vector<SenseCluster> senses;
    if (!graph.empty()) {
        std::unordered_map<WordId, std::size_t> slot;
        for (std::size_t i = 0; i < graph.vertices.size(); ++i) slot[graph.vertices[i]] = i;
        WeightedGraph g(graph.vertices.size());
        for (const auto& e : graph.edges) g.add_edge(slot.at(e.a), slot.at(e.b), e.weight);
        const Clustering clustering = chinese_whispers(g, seed, max_iter);

        for (const auto& cluster : clustering.clusters) {
            if (cluster.size() < std::max<std::size_t>(min_size, 1)) continue;
            std::vector<WordId> ids;
            ids.reserve(cluster.size());
            for (std::size_t v : cluster) ids.push_back(graph.vertices[v]);
            SenseCluster sense;
            sense.keyword = select_keyword(ids, graph.anti_edges, matrix, ego);
            for (WordId id : ids) {
                sense.members.emplace_back(id, cosine(matrix.row(ego), matrix.row(id)));
            }
            senses.push_back(std::move(sense));
        }
    }
    if (senses.empty()) {
        WordId nearest;
        if (!graph.neighbors.empty()) {
            nearest = graph.neighbors.front().word_id;
        } else {
            const WordId self[] = {ego};
            auto top = top_k(matrix, matrix.row(ego), 1, self);
            if (top.empty()) throw Error("no neighbor available for fallback sense");
            nearest = top.front().word_id;
        }
        SenseCluster fallback;
        fallback.keyword = nearest;
        fallback.members.emplace_back(nearest, cosine(matrix.row(ego), matrix.row(nearest)));
        senses.push_back(std::move(fallback));
    }
    for (auto& s : senses) {
        std::sort(s.members.begin(), s.members.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
    }
    std::sort(senses.begin(), senses.end(), [](const SenseCluster& a, const SenseCluster& b) {
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return a.keyword < b.keyword;
    });
    for (std::size_t i = 0; i < senses.size(); ++i) senses[i].sense_id = i;
    return senses;
}

std::vector<SenseCluster> induce_senses(const EmbeddingMatrix& matrix, WordId ego,
                                        const InduceParams& params) {
    const EgoGraph graph = build_ego_graph(matrix, ego, params.n, params.k, params.graph);
    return senses_from_graph(matrix, graph, params.seed, params.min_size, params.max_iter);
}

// ---------------------------------------------------------------------------

void SenseInventory::add(InventoryEntry entry) {
    if (entry.senses.empty()) throw Error("inventory entry '" + entry.word + "' has no senses");
    for (std::size_t i = 0; i < entry.senses.size(); ++i) {
        if (entry.senses[i].sense_id != i) {
            throw Error("inventory entry '" + entry.word + "' has non-contiguous sense ids");
        }
    }
    auto [it, inserted] = index_.emplace(entry.word, entries_.size());
    if (!inserted) throw Error("duplicate inventory entry '" + entry.word + "'");
    entries_.push_back(std::move(entry));
}

const InventoryEntry* SenseInventory::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) it = index_.find(text::to_lower(word));
    return it == index_.end() ? nullptr : &entries_[it->second];
}

InventoryEntry to_entry(const EmbeddingMatrix& matrix, WordId ego,
                        std::span<const SenseCluster> senses) {
    auto checked = [](const std::string& w) -> const std::string& {
        if (has_reserved_char(w)) {
            throw Error("word '" + w + "' contains a tab, comma, colon or newline and cannot be "
                        "stored in an inventory");
        }
        return w;
    };
    InventoryEntry entry;
    entry.word = checked(matrix.word(ego));
    for (const auto& s : senses) {
        InventorySense out;
        out.sense_id = s.sense_id;
        out.keyword = checked(matrix.word(s.keyword));
        for (auto [id, weight] : s.members) {
            out.members.push_back({checked(matrix.word(id)), round6(weight)});
        }
        entry.senses.push_back(std::move(out));
    }
    return entry;
}

std::vector<double> sense_vector(const EmbeddingMatrix& matrix, std::string_view word,
                                 const InventorySense& sense, double lambda) {
    std::vector<WordId> ids;
    ids.reserve(sense.members.size());
    for (const auto& m : sense.members) ids.push_back(matrix.id(m.word));
    return sense_vector(matrix, matrix.id(word), ids, lambda);
}

void save_inventory(const SenseInventory& inventory, std::ostream& out) {
    const auto& p = inventory.params();
    out << kParamsTag << "\tlang=" << sanitize_header_value(p.lang) << "\tN=" << p.n
        << "\tK=" << p.k << "\tlambda=" << format_double(p.lambda) << "\tvocab=" << p.vocab
        << "\tseed=" << p.seed << "\tsource=" << sanitize_header_value(p.source) << '\n';
    out << kColumnHeader << '\n';
    char buf[64];
    for (const auto& entry : inventory.entries()) {
        for (const auto& sense : entry.senses) {
            out << entry.word << '\t' << sense.sense_id << '\t' << sense.keyword << '\t';
            for (std::size_t i = 0; i < sense.members.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.6f", sense.members[i].weight);
                if (i) out << ',';
                out << sense.members[i].word << ':' << buf;
            }
            out << '\n';
        }
    }
}

void save_inventory(const SenseInventory& inventory, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write inventory file " + path.string());
    save_inventory(inventory, out);
    out.flush();
    if (!out) throw Error("failed writing inventory file " + path.string());
}

SenseInventory load_inventory(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing #params header", 1);
    strip_cr(line);
    SenseInventory inventory(parse_params(line));
    if (!std::getline(in, line)) throw ParseError("missing column header", 2);
    strip_cr(line);
    if (line != kColumnHeader) throw ParseError("unexpected column header", 2);

    std::size_t line_no = 2;
    std::optional<InventoryEntry> current;
    std::size_t current_line = 0;
    auto flush = [&] {
        if (!current) return;
        try {
            inventory.add(std::move(*current));
        } catch (const Error& e) {
            throw ParseError(e.what(), current_line);
        }
        current.reset();
    };
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 4) throw ParseError("expected 4 tab-separated fields", line_no);
        if (fields[0].empty()) throw ParseError("empty word", line_no);
        InventorySense sense;
        sense.sense_id = parse_field<std::size_t>(fields[1], "sense_id", line_no);
        sense.keyword = std::string(fields[2]);
        for (auto item : split(fields[3], ',')) {
            auto colon = item.rfind(':');
            if (colon == std::string_view::npos || colon == 0) {
                throw ParseError("bad cluster member '" + std::string(item) + "'", line_no);
            }
            sense.members.push_back({std::string(item.substr(0, colon)),
                                     parse_field<double>(item.substr(colon + 1), "weight", line_no)});
        }
        const bool keyword_listed =
            std::any_of(sense.members.begin(), sense.members.end(),
                        [&](const SenseMember& m) { return m.word == sense.keyword; });
        if (!keyword_listed) throw ParseError("keyword is not a cluster member", line_no);

        if (!current || current->word != fields[0]) {
            flush();
            current.emplace();
            current->word = std::string(fields[0]);
            current_line = line_no;
        }
        if (sense.sense_id != current->senses.size()) {
            throw ParseError("sense ids must run 0..n-1 in order", line_no);
        }
        current->senses.push_back(std::move(sense));
    }
    flush();
    return inventory;
}

SenseInventory load_inventory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open inventory file " + path.string());
    return load_inventory(in);
}

BuildReport build_inventory(const EmbeddingMatrix& matrix, std::span<const std::string> words,
                            const InventoryParams& meta, const InduceParams& params,
                            const BuildOptions& options) {
    InventoryParams recorded = meta;
    recorded.n = params.n;
    recorded.k = params.k;
    recorded.seed = params.seed;

    std::vector<std::string> targets;
    {
        std::unordered_map<std::string_view, bool> seen;
        for (const auto& w : words.empty() ? std::span<const std::string>(matrix.words()) : words) {
            if (seen.emplace(w, true).second) targets.push_back(w);
        }
    }

    const std::size_t total = targets.size();
    std::vector<std::optional<InventoryEntry>> done(total);
    std::vector<std::optional<std::string>> failed(total);

    BuildReport report;
    if (!options.checkpoint.empty() && std::filesystem::exists(options.checkpoint)) {
        SenseInventory previous = load_inventory(options.checkpoint);
        if (previous.params() != recorded) {
            throw Error("checkpoint " + options.checkpoint.string() +
                        " was written with different parameters");
        }
        for (std::size_t i = 0; i < total; ++i) {
            if (const auto* e = previous.find(targets[i]); e && e->word == targets[i]) {
                done[i] = *e;
                ++report.resumed;
            }
        }
    }

    std::mutex mutex;
    std::size_t completed = report.resumed;
    std::size_t since_checkpoint = 0;
    auto write_checkpoint = [&] {
        SenseInventory partial(recorded);
        for (const auto& e : done) {
            if (e) partial.add(*e);
        }
        auto tmp = options.checkpoint;
        tmp += ".tmp";
        save_inventory(partial, tmp);
        std::filesystem::rename(tmp, options.checkpoint);
    };

    const unsigned jobs = resolve_jobs(options.jobs);
    InduceParams per_word = params;
    // Workers already saturate the cores; keep each search single-threaded.
    if (jobs > 1) per_word.graph.search.threads = 1;

    parallel_for(total, jobs, [&](std::size_t i) {
        if (done[i]) return;
        std::optional<InventoryEntry> entry;
        std::optional<std::string> error;
        try {
            const auto found = matrix.find_exact(targets[i]);
            if (!found) throw OutOfVocabulary(targets[i]);
            InduceParams p = per_word;
            p.seed = mix_seed(params.seed, *found);
            entry = to_entry(matrix, *found, induce_senses(matrix, *found, p));
        } catch (const std::exception& e) {
            error = e.what();
        }
        std::lock_guard lock(mutex);
        done[i] = std::move(entry);
        failed[i] = std::move(error);
        ++completed;
        if (!options.checkpoint.empty() && ++since_checkpoint >= options.checkpoint_every) {
            since_checkpoint = 0;
            write_checkpoint();
        }
        if (options.progress) options.progress(completed, total);
    });

    report.inventory = SenseInventory(recorded);
    for (std::size_t i = 0; i < total; ++i) {
        if (done[i]) {
            report.inventory.add(std::move(*done[i]));
        } else if (failed[i]) {
            report.failures.push_back({targets[i], *failed[i]});
        }
    }
    if (!options.checkpoint.empty()) {
        std::error_code ignored;
        std::filesystem::remove(options.checkpoint, ignored);
    }
    return report;
}

}  // namespace egvi
