#include "egvi/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include "CLI11.hpp"
#include "egvi/disambig.hpp"
#include "egvi/errors.hpp"
#include "egvi/evalbench.hpp"
#include "egvi/inventory.hpp"
#include "egvi/service.hpp"
#include "egvi/simd/kernels.hpp"
#include "egvi/vectorstore.hpp"
#include "egvi/whispers.hpp"

namespace egvi {
namespace {

std::vector<std::string> read_word_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open word list " + path);
    std::vector<std::string> words;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.push_back(line);
    }
    return words;
}

std::string fixed(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

struct InduceArgs {
    std::string embeddings, out, words = "all", lang = "und", checkpoint;
    std::size_t n = kDefaultNeighbors, k = kDefaultNeighbors, limit = kDefaultVocabLimit;
    std::size_t min_size = 1, max_iter = kDefaultMaxIterations;
    double lambda = kDefaultLambda;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    bool json = false, quiet = false;
};

int cmd_induce(const InduceArgs& a, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    const auto matrix = load_embeddings(std::filesystem::path(a.embeddings), a.limit);
    std::vector<std::string> words;
    if (a.words != "all") words = read_word_list(a.words);

    InventoryParams meta;
    meta.lang = a.lang;
    meta.lambda = a.lambda;
    meta.vocab = a.limit;
    meta.source = embeddings_source_id(a.embeddings);
    InduceParams params;
    params.n = a.n;
    params.k = a.k;
    params.seed = a.seed;
    params.min_size = a.min_size;
    params.max_iter = a.max_iter;
    BuildOptions options;
    options.jobs = a.jobs;
    options.checkpoint = a.checkpoint;
    if (!a.quiet) {
        options.progress = [&err](std::size_t done, std::size_t total) {
            if (done % 1000 == 0 || done == total) {
                err << "induce: " << done << " / " << total << " words\n";
            }
        };
    }
    auto report = build_inventory(matrix, words, meta, params, options);
    save_inventory(report.inventory, std::filesystem::path(a.out));
    for (const auto& f : report.failures) err << "induce: skipped '" << f.word << "': " << f.message << '\n';

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::optional<InventoryStats> stats;
    if (!report.inventory.empty()) stats = inventory_stats(report.inventory);
    if (a.json) {
        nlohmann::json j{{"words", report.inventory.size()},
                         {"failures", report.failures.size()},
                         {"resumed", report.resumed},
                         {"mean_senses", stats ? stats->mean : 0.0},
                         {"wall_seconds", seconds},
                         {"simd", simd::active().name}};
        out << j.dump() << '\n';
    } else {
        out << "words processed  " << report.inventory.size() << '\n'
            << "failures         " << report.failures.size() << '\n'
            << "mean senses      " << fixed(stats ? stats->mean : 0.0, 3) << '\n'
            << "wall time        " << fixed(seconds, 2) << " s\n";
    }
    return 0;
}

int cmd_senses(const std::string& inventory_path, const std::string& word, bool json,
               std::ostream& out, std::ostream& err) {
    const auto inventory = load_inventory(std::filesystem::path(inventory_path));
    const auto* entry = inventory.find(word);
    if (!entry) {
        err << "senses: no inventory entry for '" << word << "'\n";
        return 1;
    }
    if (json) {
        out << senses_json(*entry).dump() << '\n';
        return 0;
    }
    out << "sense\tkeyword\tsize\tmembers\n";
    for (const auto& s : entry->senses) {
        out << s.sense_id << '\t' << s.keyword << '\t' << s.members.size() << '\t';
        for (std::size_t i = 0; i < s.members.size(); ++i) {
            out << (i ? ", " : "") << s.members[i].word;
        }
        out << '\n';
    }
    return 0;
}

int cmd_disambiguate(const std::string& embeddings, const std::string& inventory_path,
                     std::size_t limit, const std::string& text, std::optional<std::size_t> window,
                     bool keyword_senses, bool json, std::ostream& out) {
    const auto matrix = load_embeddings(std::filesystem::path(embeddings), limit);
    const auto inventory = load_inventory(std::filesystem::path(inventory_path));
    DisambiguateOptions options;
    options.window = window;
    if (keyword_senses) options.representation = SenseRepresentation::kKeyword;
    const auto analysis = disambiguate_text(matrix, inventory, text, options);
    if (json) {
        out << disambiguation_json(inventory.params().lang, analysis).dump() << '\n';
        return 0;
    }
    for (const auto& t : analysis) {
        if (!t.sense) continue;
        const auto& s = *t.sense;
        out << t.token.surface << '\t' << s.sense_id << '\t' << s.keyword << '\t' << fixed(s.score)
            << '\t' << fixed(s.margin) << (s.low_confidence ? "\tlow-confidence" : "") << '\n';
    }
    return 0;
}

int cmd_eval(const std::string& embeddings, std::size_t limit, const std::string& inventory_path,
             bool baseline, const std::string& benchmark_path, bool json, std::ostream& out) {
    const auto matrix = load_embeddings(std::filesystem::path(embeddings), limit);
    const auto benchmark = load_benchmark(std::filesystem::path(benchmark_path));
    std::optional<SenseInventory> inventory;
    if (!baseline) inventory = load_inventory(std::filesystem::path(inventory_path));
    const auto report = evaluate_similarity(matrix, inventory ? &*inventory : nullptr, benchmark);
    if (json) {
        auto j = to_json(report);
        if (inventory && !inventory->empty()) {
            std::vector<std::string> vocab;
            for (const auto& p : benchmark.pairs) {
                vocab.push_back(p.word1);
                vocab.push_back(p.word2);
            }
            try {
                j["inventory_stats"] = to_json(inventory_stats(*inventory, vocab));
            } catch (const Error&) {
                // no benchmark word has an entry
            }
        }
        out << j.dump() << '\n';
    } else {
        out << to_table(report);
    }
    return 0;
}

int cmd_serve(const std::string& config_path, std::ostream& out, std::ostream& err) {
    const auto config = load_service_config(config_path);
    WsdService service(config);
    HttpServer server(service, config);
    server.start();
    out << "listening on " << config.host << ':' << server.port() << std::endl;
    std::vector<LanguageBundle> bundles;
    for (const auto& spec : config.languages) {
        err << "serve: loading " << spec.lang << '\n';
        bundles.push_back(load_bundle(spec));
    }
    service.set_bundles(std::move(bundles));
    err << "serve: ready\n";
    server.wait();
    return 0;
}

int cmd_neighbors(const std::string& embeddings, std::size_t limit, const std::string& word,
                  std::size_t k, bool json, std::ostream& out) {
    const auto matrix = load_embeddings(std::filesystem::path(embeddings), limit);
    const auto neighbors = word_neighbors(matrix, word, k);
    if (json) {
        out << neighbors_json(matrix, neighbors).dump() << '\n';
        return 0;
    }
    for (const auto& n : neighbors) out << matrix.word(n.word_id) << '\t' << fixed(n.score, 6) << '\n';
    return 0;
}

int cmd_graph(const std::string& embeddings, std::size_t limit, const std::string& word,
              std::size_t n, std::size_t k, std::uint64_t seed, const std::string& out_path,
              std::ostream& out) {
    const auto matrix = load_embeddings(std::filesystem::path(embeddings), limit);
    const auto graph = build_ego_graph(matrix, matrix.id(word), n, k);
    std::vector<std::size_t> cluster_of(graph.vertices.size(), 0);
    if (!graph.empty()) {
        WeightedGraph g(graph.vertices.size());
        std::unordered_map<WordId, std::size_t> slot;
        for (std::size_t i = 0; i < graph.vertices.size(); ++i) slot[graph.vertices[i]] = i;
        for (const auto& e : graph.edges) g.add_edge(slot[e.a], slot[e.b], e.weight);
        const auto clustering = chinese_whispers(g, seed);
        for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
            for (std::size_t v : clustering.clusters[c]) cluster_of[v] = c;
        }
    }
    if (out_path == "-") {
        write_dot(graph, matrix, out, cluster_of);
    } else {
        std::ofstream file(out_path);
        if (!file) throw Error("cannot write " + out_path);
        write_dot(graph, matrix, file, cluster_of);
    }
    return 0;
}

int cmd_fixture(const std::string& embeddings_out, const std::string& benchmark_out,
                std::size_t pairs, std::uint64_t seed) {
    const auto fx = make_planted_fixture();
    {
        std::ofstream file(embeddings_out);
        if (!file) throw Error("cannot write " + embeddings_out);
        save_embeddings(fx.matrix, file);
    }
    if (!benchmark_out.empty()) {
        std::ofstream file(benchmark_out);
        if (!file) throw Error("cannot write " + benchmark_out);
        save_benchmark(synthetic_benchmark(fx.matrix, pairs, seed), file);
    }
    return 0;
}

int cmd_stats(const std::string& inventory_path, const std::string& words_path, bool json,
              std::ostream& out) {
    const auto inventory = load_inventory(std::filesystem::path(inventory_path));
    std::vector<std::string> words;
    if (!words_path.empty()) words = read_word_list(words_path);
    const auto stats = inventory_stats(inventory, words);
    if (json) {
        out << to_json(stats).dump() << '\n';
        return 0;
    }
    out << "words    " << stats.words << "\nmean     " << fixed(stats.mean, 3) << "\nmedian   "
        << fixed(stats.median, 1) << "\nmax      " << stats.max << "\nsenses\twords\n";
    for (auto [senses, count] : stats.histogram) out << senses << '\t' << count << '\n';
    return 0;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"egvi: word sense induction and disambiguation over word embeddings", "egvi"};
    app.require_subcommand(1);

    InduceArgs induce;
    auto* c_induce = app.add_subcommand("induce", "Build a sense inventory");
    c_induce->add_option("--embeddings", induce.embeddings, "word2vec text file")->required();
    c_induce->add_option("--out", induce.out, "Inventory TSV to write")->required();
    c_induce->add_option("--n", induce.n, "Ego-graph neighbors N")->check(CLI::Range(2, 1 << 20));
    c_induce->add_option("--k", induce.k, "Neighbors per vertex K")->check(CLI::Range(1, 1 << 20));
    c_induce->add_option("--lambda", induce.lambda, "Sense vector shift")->check(CLI::Range(0.0, 1.0));
    c_induce->add_option("--limit", induce.limit, "Vocabulary limit")->check(CLI::PositiveNumber);
    c_induce->add_option("--seed", induce.seed, "Global seed");
    c_induce->add_option("--min-size", induce.min_size, "Drop smaller clusters")->check(CLI::PositiveNumber);
    c_induce->add_option("--max-iter", induce.max_iter, "Chinese Whispers iterations")->check(CLI::PositiveNumber);
    c_induce->add_option("--words", induce.words, "Word list file, or 'all'");
    c_induce->add_option("--lang", induce.lang, "Language tag");
    c_induce->add_option("--jobs", induce.jobs, "Worker threads (0 = all cores)");
    c_induce->add_option("--checkpoint", induce.checkpoint, "Checkpoint file for resumable builds");
    c_induce->add_flag("--json", induce.json, "Emit the summary as JSON");
    c_induce->add_flag("--quiet", induce.quiet, "No progress output");

    std::string inventory_path, word, embeddings, text, benchmark_path, config_path, out_path = "-";
    std::string words_path, benchmark_out;
    std::size_t limit = kDefaultVocabLimit, k = 50, n = kDefaultNeighbors, gk = kDefaultNeighbors;
    std::size_t pairs = 30;
    std::optional<std::size_t> window;
    std::uint64_t seed = 0;
    bool json = false, baseline = false, keyword_senses = false;

    auto* c_senses = app.add_subcommand("senses", "Show the senses of a word");
    c_senses->add_option("--inventory", inventory_path)->required();
    c_senses->add_option("--word", word)->required();
    c_senses->add_flag("--json", json);

    auto* c_dis = app.add_subcommand("disambiguate", "Pick senses for words in a text");
    c_dis->add_option("--embeddings", embeddings)->required();
    c_dis->add_option("--inventory", inventory_path)->required();
    c_dis->add_option("--text", text)->required();
    c_dis->add_option("--window", window, "Context radius in tokens (default: whole text)");
    c_dis->add_option("--limit", limit)->check(CLI::PositiveNumber);
    c_dis->add_flag("--keyword-senses", keyword_senses, "Represent senses by keyword vectors");
    c_dis->add_flag("--json", json);

    auto* c_eval = app.add_subcommand("eval", "Word-similarity evaluation");
    c_eval->add_option("--embeddings", embeddings)->required();
    auto* o_inv = c_eval->add_option("--inventory", inventory_path);
    auto* o_base = c_eval->add_flag("--baseline", baseline, "Score with plain word vectors");
    o_inv->excludes(o_base);
    c_eval->add_option("--benchmark", benchmark_path)->required();
    c_eval->add_option("--limit", limit)->check(CLI::PositiveNumber);
    c_eval->add_flag("--json", json);

    auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
    c_serve->add_option("--config", config_path)->required();

    auto* c_nb = app.add_subcommand("neighbors", "Nearest neighbors of a word");
    c_nb->add_option("--embeddings", embeddings)->required();
    c_nb->add_option("--word", word)->required();
    c_nb->add_option("--k", k)->check(CLI::PositiveNumber);
    c_nb->add_option("--limit", limit)->check(CLI::PositiveNumber);
    c_nb->add_flag("--json", json);

    auto* c_graph = app.add_subcommand("graph", "Write a word's ego-graph as Graphviz DOT");
    c_graph->add_option("--embeddings", embeddings)->required();
    c_graph->add_option("--word", word)->required();
    c_graph->add_option("--n", n)->check(CLI::Range(2, 1 << 20));
    c_graph->add_option("--k", gk)->check(CLI::PositiveNumber);
    c_graph->add_option("--seed", seed);
    c_graph->add_option("--limit", limit)->check(CLI::PositiveNumber);
    c_graph->add_option("--out", out_path, "DOT file, '-' for stdout");

    auto* c_fixture = app.add_subcommand("fixture", "Write the planted-sense test embeddings");
    c_fixture->add_option("--embeddings-out", out_path)->required();
    c_fixture->add_option("--benchmark-out", benchmark_out);
    c_fixture->add_option("--pairs", pairs)->check(CLI::PositiveNumber);
    c_fixture->add_option("--seed", seed);

    auto* c_stats = app.add_subcommand("stats", "Senses-per-word statistics");
    c_stats->add_option("--inventory", inventory_path)->required();
    c_stats->add_option("--words", words_path, "Restrict to the words in this file");
    c_stats->add_flag("--json", json);

    std::vector<std::string> argv_storage{"egvi"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (c_induce->parsed()) return cmd_induce(induce, out, err);
        if (c_senses->parsed()) return cmd_senses(inventory_path, word, json, out, err);
        if (c_dis->parsed()) {
            return cmd_disambiguate(embeddings, inventory_path, limit, text, window,
                                    keyword_senses, json, out);
        }
        if (c_eval->parsed()) {
            if (!baseline && inventory_path.empty()) {
                err << "eval: pass --inventory PATH or --baseline\n";
                return 1;
            }
            return cmd_eval(embeddings, limit, inventory_path, baseline, benchmark_path, json, out);
        }
        if (c_serve->parsed()) return cmd_serve(config_path, out, err);
        if (c_nb->parsed()) return cmd_neighbors(embeddings, limit, word, k, json, out);
        if (c_graph->parsed()) return cmd_graph(embeddings, limit, word, n, gk, seed, out_path, out);
        if (c_fixture->parsed()) return cmd_fixture(out_path, benchmark_out, pairs, seed);
        if (c_stats->parsed()) return cmd_stats(inventory_path, words_path, json, out);
    } catch (const std::exception& e) {
        err << "egvi: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace egvi
