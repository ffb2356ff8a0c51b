// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#include <charconv>
#include <thread>

#include <httplib.h>

#include "forge/logging.hpp"
#include "forge/review.hpp"

namespace forge::review {

using Json = nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  res.status = status;
  res.set_content(Json{{"error", {{"code", code}, {"message", message}}}}.dump(), kJson);
}

std::size_t parse_index(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string text = req.get_param_value(key);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ValidationError(std::string(key) + " must be a non-negative integer");
  return value;
}

Json view_json(const SampleView& v) {
  Json j = instruct::to_json(v.sample);
  j["source_snippet"] = v.source_snippet ? Json(*v.source_snippet) : Json(nullptr);
  return j;
}

}  // namespace

struct ReviewServer::Impl {
  ReviewStore& store;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(ReviewStore& s, ServerOptions o) : store(s), options(std::move(o)) {}

  template <typename Handler>
  auto guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const NotFound& e) {
        send_error(res, 404, "not_found", e.what());
      } catch (const InvalidArgument& e) {
        send_error(res, 400, "validation_error", e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "invalid_json", e.what());
      } catch (const std::exception& e) {
        log::error(std::string("review request failed: ") + e.what());
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!options.token || req.path.rfind("/api/", 0) != 0) return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == "Bearer " + *options.token)
        return httplib::Server::HandlerResponse::Unhandled;
      send_error(res, 401, "unauthorized", "missing or invalid bearer token");
      return httplib::Server::HandlerResponse::Handled;
    });

    server.Get("/api/v1/samples", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<instruct::ReviewState> state = instruct::ReviewState::Pending;
      if (req.has_param("state")) {
        const auto name = req.get_param_value("state");
        if (name == "all") {
          state.reset();
        } else {
          state = instruct::parse_review_state(name);
          if (!state) throw ValidationError("unknown state " + name);
        }
      }
      std::optional<instruct::TaskKind> task;
      if (req.has_param("task") && !req.get_param_value("task").empty()) {
        task = instruct::parse_task(req.get_param_value("task"));
        if (!task) throw ValidationError("unknown task " + req.get_param_value("task"));
      }
      const Page page = store.list(state, task, parse_index(req, "page", 0),
                                   parse_index(req, "page_size", 20));
      Json items = Json::array();
      for (const auto& v : page.items) items.push_back(view_json(v));
      res.set_content(Json{{"items", items},
                           {"page", page.page},
                           {"page_size", page.page_size},
                           {"total", page.total}}
                          .dump(),
                      kJson);
    }));

    server.Post("/api/v1/decisions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      ReviewDecision d = decision_from_json(Json::parse(req.body));
      d.decided_at.clear();  // server clock only
      const SubmitResult r = store.submit(std::move(d));
      res.set_content(Json{{"sample", instruct::to_json(r.sample)}, {"recorded", r.recorded}}.dump(),
                      kJson);
    }));

    server.Get("/api/v1/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
      res.set_content(to_json(store.stats()).dump(), kJson);
    }));

    server.Get("/api/v1/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string states = req.has_param("states") ? req.get_param_value("states") : "accepted,edited";
      auto rows = std::make_shared<std::vector<Json>>(
          instruct::export_rows(store.snapshot(), instruct::parse_state_list(states)));
      auto next = std::make_shared<std::size_t>(0);
      res.set_chunked_content_provider("application/x-ndjson",
                                       [rows, next](std::size_t, httplib::DataSink& sink) {
                                         if (*next == rows->size()) {
                                           sink.done();
                                           return true;
                                         }
                                         const std::string line = (*rows)[(*next)++].dump() + "\n";
                                         return sink.write(line.data(), line.size());
                                       });
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                 httplib::status_message(res.status));
      return httplib::Server::HandlerResponse::Handled;
    });

    if (options.ui_dir && !server.set_mount_point("/", options.ui_dir->string()))
      throw IoError("cannot serve UI directory " + options.ui_dir->string());
  }
};

ReviewServer::ReviewServer(ReviewStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->routes();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ReviewServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void ReviewServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace forge::review
