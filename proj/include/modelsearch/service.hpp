#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "modelsearch/engine.hpp"

namespace httplib {
class Server;
}

namespace modelsearch {

/// Request handlers shared by the CLI and the HTTP service, so both emit the
/// same bodies for the same request.
namespace api {

json search(const Engine& e, std::string_view q, SemanticMethod method, std::size_t k);
json pipeline(const Engine& e, std::string_view q, const PipelineConfig& config);
json discover(const Engine& e, std::string_view anchor_table, Operator op, std::size_t k);
json card(const Engine& e, std::string_view id);
json table(const Engine& e, std::string_view id);
json integrate(const Engine& e, std::string_view anchor_table, const std::vector<std::string>& table_ids);
json nugget_score(const Engine& e, std::string_view q, const std::vector<std::string>& card_ids);
json nugget_extract(const Engine& e, std::string_view card_id);

/// Splits a comma-separated list, dropping empty items.
std::vector<std::string> split_list(std::string_view s);
/// Parses a positive count; throws InvalidArgument naming `what`.
std::size_t parse_count(std::string_view s, std::string_view what);

}  // namespace api

struct ServiceConfig {
    std::filesystem::path index_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    PipelineConfig defaults;
};

/// Read-only HTTP front end over one engine.
class Service {
public:
    Service(const Engine& engine, PipelineConfig defaults = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds; port 0 picks a free port. Throws Error when the address is taken.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen_after_bind();
    void stop();

private:
    void mount();

    const Engine* engine_;
    PipelineConfig defaults_;
    std::unique_ptr<httplib::Server> server_;
};

/// Opens the index and serves until the process is stopped.
void serve(const ServiceConfig& config, Providers providers);

}  // namespace modelsearch
