#include "egvi/service.hpp"

#include <charconv>
#include <fstream>
#include <mutex>

#include "egvi/errors.hpp"
#include "egvi/text.hpp"
#include "httplib.h"

namespace egvi {
namespace {

using json = nlohmann::json;

HttpResponse reply(int status, const json& body) { return {status, body.dump()}; }

HttpResponse error_reply(int status, const std::string& message) {
    return reply(status, json{{"error", message}});
}

std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) text::next_code_point(s, pos);
    return n;
}

}  // namespace

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("invalid config " + path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    ServiceConfig cfg;
    try {
        cfg.host = j.value("host", cfg.host);
        cfg.port = j.value("port", cfg.port);
        cfg.max_text_length = j.value("max_text_length", cfg.max_text_length);
        cfg.cors_origin = j.value("cors_origin", cfg.cors_origin);
        cfg.max_neighbors = j.value("max_neighbors", cfg.max_neighbors);
        for (const auto& l : j.at("languages")) {
            BundleSpec spec;
            spec.lang = l.at("lang").get<std::string>();
            spec.embeddings = resolve(l.at("embeddings_path").get<std::string>());
            spec.inventory = resolve(l.at("inventory_path").get<std::string>());
            spec.limit = l.value("limit", spec.limit);
            cfg.languages.push_back(std::move(spec));
        }
    } catch (const json::exception& e) {
        throw Error("invalid config " + path.string() + ": " + e.what());
    }
    return cfg;
}

std::string embeddings_source_id(const std::filesystem::path& embeddings) {
    return embeddings.filename().string();
}

LanguageBundle load_bundle(const BundleSpec& spec) {
    LanguageBundle b;
    b.lang = spec.lang;
    b.matrix = std::make_shared<const EmbeddingMatrix>(load_embeddings(spec.embeddings, spec.limit));
    b.inventory = std::make_shared<const SenseInventory>(load_inventory(spec.inventory));
    const auto expected = embeddings_source_id(spec.embeddings);
    if (b.inventory->params().source != expected) {
        throw Error("inventory " + spec.inventory.string() + " was built from '" +
                    b.inventory->params().source + "', not '" + expected + "'");
    }
    return b;
}

std::vector<Neighbor> word_neighbors(const EmbeddingMatrix& matrix, std::string_view word,
                                     std::size_t k) {
    const WordId id = matrix.id(word);
    const WordId self[] = {id};
    return top_k(matrix, matrix.row(id), k, self);
}

json params_json(const InventoryParams& p) {
    return {{"lang", p.lang}, {"N", p.n},       {"K", p.k},          {"lambda", p.lambda},
            {"vocab", p.vocab}, {"seed", p.seed}, {"source", p.source}};
}

json disambiguation_json(std::string_view lang, std::span<const TokenAnalysis> tokens) {
    json out_tokens = json::array();
    for (const auto& t : tokens) {
        json tok{{"surface", t.token.surface},
                 {"start", t.token.start},
                 {"end", t.token.end},
                 {"ambiguous", t.ambiguous},
                 {"n_senses", t.n_senses}};
        if (t.sense) {
            tok["sense"] = {{"id", t.sense->sense_id},
                            {"keyword", t.sense->keyword},
                            {"score", t.sense->score},
                            {"margin", t.sense->margin},
                            {"low_confidence", t.sense->low_confidence}};
        }
        out_tokens.push_back(std::move(tok));
    }
    return {{"lang", lang}, {"tokens", std::move(out_tokens)}};
}

json senses_json(const InventoryEntry& entry) {
    json out = json::array();
    for (const auto& s : entry.senses) {
        json members = json::array();
        for (const auto& m : s.members) members.push_back({{"word", m.word}, {"weight", m.weight}});
        out.push_back({{"sense_id", s.sense_id}, {"keyword", s.keyword}, {"members", members}});
    }
    return out;
}

json neighbors_json(const EmbeddingMatrix& matrix, std::span<const Neighbor> neighbors) {
    json out = json::array();
    for (const auto& n : neighbors) out.push_back({{"word", matrix.word(n.word_id)}, {"score", n.score}});
    return out;
}

WsdService::WsdService(ServiceConfig config) : config_(std::move(config)) {}

void WsdService::set_bundles(std::vector<LanguageBundle> bundles) {
    std::unique_lock lock(mutex_);
    bundles_ = std::move(bundles);
    ready_ = true;
}

bool WsdService::ready() const {
    std::shared_lock lock(mutex_);
    return ready_;
}

const LanguageBundle* WsdService::bundle(std::string_view lang) const {
    for (const auto& b : bundles_) {
        if (b.lang == lang) return &b;
    }
    return nullptr;
}

HttpResponse WsdService::handle(std::string_view method, std::string_view path,
                                const std::multimap<std::string, std::string>& query,
                                std::string_view body) const {
    std::shared_lock lock(mutex_);
    try {
        if (method == "GET" && path == "/health") {
            if (!ready_) return reply(503, json{{"status", "loading"}});
            return reply(200, json{{"status", "ok"}});
        }
        if (!ready_) return error_reply(503, "bundles are still loading");
        if (method == "GET" && path == "/languages") return languages();
        if (path == "/disambiguate") {
            if (method != "POST") return error_reply(405, "use POST");
            return disambiguate(body);
        }
        for (std::string_view prefix : {"/senses/", "/neighbors/"}) {
            if (!path.starts_with(prefix)) continue;
            if (method != "GET") return error_reply(405, "use GET");
            auto rest = path.substr(prefix.size());
            auto slash = rest.find('/');
            if (slash == std::string_view::npos || slash == 0 || slash + 1 == rest.size()) {
                return error_reply(404, "expected " + std::string(prefix) + "{lang}/{word}");
            }
            auto lang = rest.substr(0, slash);
            auto word = rest.substr(slash + 1);
            return prefix == "/senses/" ? senses(lang, word) : neighbors(lang, word, query);
        }
        return error_reply(404, "no route for " + std::string(method) + " " + std::string(path));
    } catch (const std::exception& e) {
        return error_reply(500, e.what());
    }
}

HttpResponse WsdService::languages() const {
    json out = json::array();
    for (const auto& b : bundles_) {
        out.push_back({{"lang", b.lang},
                       {"n_words", b.inventory->size()},
                       {"params", params_json(b.inventory->params())}});
    }
    return reply(200, out);
}

HttpResponse WsdService::disambiguate(std::string_view body) const {
    json request;
    try {
        request = json::parse(body);
    } catch (const json::exception&) {
        return error_reply(400, "request body is not valid JSON");
    }
    if (!request.is_object() || !request.contains("text") || !request["text"].is_string() ||
        !request.contains("lang") || !request["lang"].is_string()) {
        return error_reply(400, "expected {\"text\": string, \"lang\": string}");
    }
    const auto text = request["text"].get<std::string>();
    const auto lang = request["lang"].get<std::string>();
    const LanguageBundle* b = bundle(lang);
    if (!b) return error_reply(404, "language not loaded: " + lang);
    if (code_points(text) > config_.max_text_length) {
        return error_reply(413, "text exceeds " + std::to_string(config_.max_text_length) +
                                    " characters");
    }
    DisambiguateOptions options;
    if (request.contains("window") && request["window"].is_number_unsigned()) {
        options.window = request["window"].get<std::size_t>();
    }
    const auto analysis = disambiguate_text(*b->matrix, *b->inventory, text, options);
    return reply(200, disambiguation_json(lang, analysis));
}

HttpResponse WsdService::senses(std::string_view lang, std::string_view word) const {
    const LanguageBundle* b = bundle(lang);
    if (!b) return error_reply(404, "language not loaded: " + std::string(lang));
    const InventoryEntry* entry = b->inventory->find(word);
    if (!entry) return error_reply(404, "no senses for '" + std::string(word) + "'");
    return reply(200, senses_json(*entry));
}

HttpResponse WsdService::neighbors(std::string_view lang, std::string_view word,
                                   const std::multimap<std::string, std::string>& query) const {
    const LanguageBundle* b = bundle(lang);
    if (!b) return error_reply(404, "language not loaded: " + std::string(lang));
    std::size_t k = 50;
    if (auto it = query.find("k"); it != query.end()) {
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
        if (ec != std::errc() || ptr != s.data() + s.size() || k == 0 || k > config_.max_neighbors) {
            return error_reply(400, "k must be an integer in [1, " +
                                        std::to_string(config_.max_neighbors) + "]");
        }
    }
    try {
        return reply(200, neighbors_json(*b->matrix, word_neighbors(*b->matrix, word, k)));
    } catch (const OutOfVocabulary& e) {
        return error_reply(404, e.what());
    }
}

HttpServer::HttpServer(WsdService& service, const ServiceConfig& config)
    : service_(service), config_(config), server_(std::make_unique<httplib::Server>()) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
        auto r = service_.handle(req.method, req.path, query, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server_->set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
    server_->Get(".*", route);
    server_->Post(".*", route);
    server_->Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
    if (config_.port == 0) {
        port_ = server_->bind_to_any_port(config_.host);
    } else {
        port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }
    if (port_ <= 0) {
        throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
}

void HttpServer::wait() {
    if (thread_.joinable()) thread_.join();
}

void HttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace egvi
