#include "modelsearch/service.hpp"

#include <charconv>

#include "httplib.h"
#include "modelsearch/error.hpp"
#include "modelsearch/integration.hpp"

namespace modelsearch {

namespace api {

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find(',', start);
        if (end == std::string_view::npos) {
            end = s.size();
        }
        auto item = s.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') {
            item.remove_prefix(1);
        }
        while (!item.empty() && item.back() == ' ') {
            item.remove_suffix(1);
        }
        if (!item.empty()) {
            out.emplace_back(item);
        }
        start = end + 1;
    }
    return out;
}

std::size_t parse_count(std::string_view s, std::string_view what)
{
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v == 0) {
        throw InvalidArgument(std::string(what) + " must be a positive integer, got '" + std::string(s) + "'");
    }
    return v;
}

json search(const Engine& e, std::string_view q, SemanticMethod method, std::size_t k)
{
    return to_json(e.pipeline().run_unstructured(q, method, k));
}

json pipeline(const Engine& e, std::string_view q, const PipelineConfig& config)
{
    auto j = to_json(e.pipeline().run_structured(q, config));
    j["semantic_method"] = to_string(config.semantic_method);
    return j;
}

json discover(const Engine& e, std::string_view anchor_table, Operator op, std::size_t k)
{
    if (k == 0) {
        throw InvalidArgument("k must be positive");
    }
    const auto& anchor = e.lake().table(anchor_table);
    auto r = e.discovery().search(op, anchor, k);
    json tables = json::array();
    for (const auto& t : r.tables) {
        tables.push_back({{"table_id", t.table_id}, {"score", t.score}});
    }
    return json{{"anchor_table", anchor.id},
                {"operator", to_string(op)},
                {"k", k},
                {"degenerate_query", r.degenerate_query},
                {"tables", std::move(tables)}};
}

json card(const Engine& e, std::string_view id)
{
    const auto& c = e.lake().card(id);
    auto j = to_json(c);
    json nuggets = json::array();
    if (e.nuggets().contains(c.id)) {
        for (const auto& n : e.nuggets().nuggets_of(c.id)) {
            nuggets.push_back(to_json(n));
        }
    }
    j["nuggets"] = std::move(nuggets);
    return j;
}

json table(const Engine& e, std::string_view id) { return to_json(e.lake().table(id)); }

json integrate(const Engine& e, std::string_view anchor_table, const std::vector<std::string>& table_ids)
{
    const auto& anchor = e.lake().table(anchor_table);
    std::vector<EvidenceTable> retrieved;
    for (const auto& id : table_ids) {
        retrieved.push_back(e.lake().table(id));
    }
    auto integrated = integrate_all(anchor, retrieved, e.discovery().config().tau);
    auto j = to_json(integrated);
    j["null_count"] = integrated.null_count();
    return j;
}

json nugget_score(const Engine& e, std::string_view q, const std::vector<std::string>& card_ids)
{
    for (const auto& id : card_ids) {
        e.lake().card(id);
    }
    auto constraint = e.extractor().map_query(q);
    auto score = score_candidate_set(card_ids, constraint, e.nuggets());
    json matching = json::array();
    for (const auto& key : matching_nuggets(card_ids, constraint, e.nuggets())) {
        json row = json::object();
        for (auto a : kAttributes) {
            const auto& v = key[static_cast<std::size_t>(a)];
            row[std::string(attribute_name(a))] = v ? json(*v) : json(nullptr);
        }
        matching.push_back(std::move(row));
    }
    return json{{"query", std::string(q)},
                {"cards", card_ids},
                {"score", score},
                {"constraint", to_json(constraint)},
                {"audit_id", constraint.audit.id},
                {"matching", std::move(matching)}};
}

json nugget_extract(const Engine& e, std::string_view card_id)
{
    const auto& c = e.lake().card(card_id);
    json out = json::array();
    for (const auto& n : e.extractor().extract(c, e.lake().tables_of(c))) {
        out.push_back(to_json(n));
    }
    return json{{"card_id", c.id}, {"nuggets", std::move(out)}};
}

}  // namespace api

namespace {

int status_of(const std::exception& e)
{
    if (dynamic_cast<const NotFound*>(&e) || dynamic_cast<const AnchorNotFound*>(&e)) {
        return 404;
    }
    if (dynamic_cast<const InvalidArgument*>(&e)) {
        return 400;
    }
    if (dynamic_cast<const ProviderError*>(&e)) {
        return 502;
    }
    return 500;
}

std::string param(const httplib::Request& req, const char* name, std::string fallback = {})
{
    return req.has_param(name) ? req.get_param_value(name) : std::move(fallback);
}

std::string required(const httplib::Request& req, const char* name)
{
    if (!req.has_param(name)) {
        throw InvalidArgument(std::string("missing query parameter '") + name + "'");
    }
    return req.get_param_value(name);
}

template <class F>
httplib::Server::Handler handler(F f)
{
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            res.set_content(f(req).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = status_of(e);
            res.set_content(json{{"error", e.what()}, {"status", res.status}}.dump(), "application/json");
        }
    };
}

}  // namespace

Service::Service(const Engine& engine, PipelineConfig defaults)
    : engine_(&engine), defaults_(defaults), server_(std::make_unique<httplib::Server>())
{
    mount();
}

Service::~Service() = default;

void Service::mount()
{
    const Engine& e = *engine_;
    const PipelineConfig defaults = defaults_;
    auto& s = *server_;
    s.Get("/health", handler([&e](const httplib::Request&) {
              return json{{"status", "ok"}, {"cards", e.lake().cards().size()}, {"tables", e.lake().tables().size()}};
          }));
    s.Get("/search", handler([&e, defaults](const httplib::Request& req) {
              auto k = req.has_param("k") ? api::parse_count(req.get_param_value("k"), "k") : defaults.k;
              return api::search(e, required(req, "q"), parse_semantic_method(param(req, "method", "dense")), k);
          }));
    s.Get("/pipeline", handler([&e, defaults](const httplib::Request& req) {
              auto cfg = defaults;
              if (req.has_param("semantic")) {
                  cfg.semantic_method = parse_semantic_method(req.get_param_value("semantic"));
              }
              if (req.has_param("operator")) {
                  cfg.op = parse_operator(req.get_param_value("operator"));
              }
              if (req.has_param("k")) {
                  cfg.k = api::parse_count(req.get_param_value("k"), "k");
                  cfg.discovery_k = std::max(cfg.discovery_k, cfg.k);
              }
              return api::pipeline(e, required(req, "q"), cfg);
          }));
    s.Get(R"(/table/(.+))", handler([&e](const httplib::Request& req) { return api::table(e, req.matches[1].str()); }));
    s.Get(R"(/card/(.+))", handler([&e](const httplib::Request& req) { return api::card(e, req.matches[1].str()); }));
    s.Get("/integrate", handler([&e](const httplib::Request& req) {
              return api::integrate(e, required(req, "anchor"), api::split_list(param(req, "tables")));
          }));
    s.Get("/nuggets/score", handler([&e](const httplib::Request& req) {
              return api::nugget_score(e, required(req, "q"), api::split_list(required(req, "cards")));
          }));
}

int Service::bind(const std::string& host, int port)
{
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        throw Error("cannot listen on " + host + ":" + std::to_string(port));
    }
    return bound;
}

void Service::listen_after_bind() { server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

void serve(const ServiceConfig& config, Providers providers)
{
    auto engine = Engine::open(config.index_dir, std::move(providers));
    Service service(*engine, config.defaults);
    service.bind(config.host, config.port);
    service.listen_after_bind();
}

}  // namespace modelsearch
