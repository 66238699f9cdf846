#pragma once

// HTTP front of the live service.
//   GET  /state      latest telemetry sample
//   POST /command    apply one command, returns the CommandResult
//   GET  /systems    system catalog
//   GET  /telemetry  NDJSON stream of samples (?from=<index>&limit=<n>)
//   GET  /report     report lines as text (?from=<index>)

#include <memory>
#include <string>

#include <httplib.h>

#include "stl4iot/service/service.hpp"

namespace stl4iot::service {

namespace detail {

inline int http_status(sim::CommandErrorKind k) {
  switch (k) {
    case sim::CommandErrorKind::BadRequest: return 400;
    case sim::CommandErrorKind::UnknownTarget: return 404;
    case sim::CommandErrorKind::SimulationNotRunning: return 503;
  }
  return 500;
}

inline void error(httplib::Response& res, int status, const std::string& kind, const std::string& msg) {
  res.status = status;
  res.set_content(Json{{"error", kind}, {"message", msg}}.dump(), "application/json");
}

inline std::size_t size_param(const httplib::Request& req, const char* name, std::size_t dflt) {
  if (!req.has_param(name)) return dflt;
  const auto v = req.get_param_value(name);
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw sim::CommandError(sim::CommandErrorKind::BadRequest, std::string("bad '") + name + "' parameter");
  return static_cast<std::size_t>(n);
}

}  // namespace detail

/// Registers the endpoints on `srv`. `svc` must outlive the server.
inline void mount(httplib::Server& srv, Service& svc) {
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  srv.Get("/state", [&svc](const httplib::Request&, httplib::Response& res) {
    res.set_content(svc.state_json(), "application/json");
  });

  srv.Get("/systems", [&svc](const httplib::Request&, httplib::Response& res) {
    res.set_content(svc.systems_json(), "application/json");
  });

  srv.Post("/command", [&svc](const httplib::Request& req, httplib::Response& res) {
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return detail::error(res, 400, "BadRequest", "body is not valid JSON");
    try {
      const auto r = svc.submit(sim::command_from_json(body));
      res.set_content(sim::to_json(r).dump(), "application/json");
    } catch (const sim::CommandError& e) {
      detail::error(res, detail::http_status(e.kind()), sim::to_string(e.kind()), e.what());
    }
  });

  srv.Get("/report", [&svc](const httplib::Request& req, httplib::Response& res) {
    try {
      std::string out;
      for (const auto& l : svc.report_from(detail::size_param(req, "from", 0))) out += l + "\n";
      res.set_content(out, "text/plain");
    } catch (const sim::CommandError& e) {
      detail::error(res, 400, "BadRequest", e.what());
    }
  });

  srv.Get("/telemetry", [&svc](const httplib::Request& req, httplib::Response& res) {
    std::size_t from = 0, limit = 0;
    try {
      from = detail::size_param(req, "from", svc.sample_count() ? svc.sample_count() - 1 : 0);
      limit = detail::size_param(req, "limit", 0);
    } catch (const sim::CommandError& e) {
      return detail::error(res, 400, "BadRequest", e.what());
    }
    struct Cursor {
      std::size_t next;
      std::size_t left;  // 0 = unbounded
    };
    auto cur = std::make_shared<Cursor>(Cursor{from, limit});
    res.set_chunked_content_provider("application/x-ndjson", [&svc, cur](std::size_t, httplib::DataSink& sink) {
      auto [lines, more] = svc.samples_from(cur->next, std::chrono::milliseconds(500));
      for (const auto& l : lines) {
        if (!sink.is_writable()) return false;
        const std::string chunk = l + "\n";
        if (!sink.write(chunk.data(), chunk.size())) return false;
        ++cur->next;
        if (cur->left && --cur->left == 0) {
          sink.done();
          return true;
        }
      }
      if (!more) sink.done();
      return true;
    });
  });
}

}  // namespace stl4iot::service
