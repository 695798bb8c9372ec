#pragma once

// HTTP disambiguation service over one or more language bundles.
//
// Routing lives in WsdService::handle, a pure function of the loaded bundles
// and the request; HttpServer only adapts it to cpp-httplib.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "egvi/disambig.hpp"
#include "egvi/inventory.hpp"
#include "egvi/vectorstore.hpp"

namespace httplib {
class Server;
}

namespace egvi {

inline constexpr std::size_t kDefaultMaxTextLength = 10'000;

struct BundleSpec {
    std::string lang;
    std::filesystem::path embeddings;
    std::filesystem::path inventory;
    std::size_t limit = kDefaultVocabLimit;
};

struct ServiceConfig {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::size_t max_text_length = kDefaultMaxTextLength;  // code points
    std::string cors_origin = "*";
    std::size_t max_neighbors = 1000;
    std::vector<BundleSpec> languages;
};

// JSON config: {"port": 8080, "max_text_length": 10000, "cors_origin": "*",
//   "languages": [{"lang": "en", "embeddings_path": "...",
//                  "inventory_path": "...", "limit": 100000}]}
// Relative paths resolve against the config file's directory.
ServiceConfig load_service_config(const std::filesystem::path& path);

struct LanguageBundle {
    std::string lang;
    std::shared_ptr<const EmbeddingMatrix> matrix;
    std::shared_ptr<const SenseInventory> inventory;
};

// Identifier recorded as an inventory's source for an embeddings file.
std::string embeddings_source_id(const std::filesystem::path& embeddings);

// Loads both files; throws Error if the inventory was built from a different
// embeddings file.
LanguageBundle load_bundle(const BundleSpec& spec);

// Neighbors of a vocabulary word, the word itself excluded.
std::vector<Neighbor> word_neighbors(const EmbeddingMatrix& matrix, std::string_view word,
                                     std::size_t k);

// Response bodies shared by the service and the CLI's --json output.
nlohmann::json params_json(const InventoryParams& params);
nlohmann::json disambiguation_json(std::string_view lang, std::span<const TokenAnalysis> tokens);
nlohmann::json senses_json(const InventoryEntry& entry);
nlohmann::json neighbors_json(const EmbeddingMatrix& matrix, std::span<const Neighbor> neighbors);

struct HttpResponse {
    int status = 200;
    std::string body;
};

class WsdService {
  public:
    explicit WsdService(ServiceConfig config = {});

    // Replaces all bundles; excludes concurrent requests while swapping.
    void set_bundles(std::vector<LanguageBundle> bundles);
    bool ready() const;

    HttpResponse handle(std::string_view method, std::string_view path,
                        const std::multimap<std::string, std::string>& query,
                        std::string_view body) const;

    const ServiceConfig& config() const noexcept { return config_; }

  private:
    HttpResponse languages() const;
    HttpResponse disambiguate(std::string_view body) const;
    HttpResponse senses(std::string_view lang, std::string_view word) const;
    HttpResponse neighbors(std::string_view lang, std::string_view word,
                           const std::multimap<std::string, std::string>& query) const;
    const LanguageBundle* bundle(std::string_view lang) const;

    ServiceConfig config_;
    mutable std::shared_mutex mutex_;
    std::vector<LanguageBundle> bundles_;
    bool ready_ = false;
};

class HttpServer {
  public:
    HttpServer(WsdService& service, const ServiceConfig& config);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds (port 0 = any free port) and serves on a background thread.
    // Throws Error if binding fails.
    void start();
    // Blocks until stop() is called from elsewhere.
    void wait();
    void stop();
    int port() const noexcept { return port_; }

  private:
    WsdService& service_;
    ServiceConfig config_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace egvi
