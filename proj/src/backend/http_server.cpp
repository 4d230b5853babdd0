/*
 * Copyright (C) 2026 The Fleetbed Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "fleetbed/backend/http_server.hpp"

#include <chrono>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fleetbed/core/gzip.hpp"
#include "fleetbed/core/time.hpp"
#include "fleetbed/ota/ota.hpp"

namespace fleetbed::backend {

using nlohmann::json;

static TimestampUs wall_clock_us() {
  return TimestampUs{std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count()};
}

static int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownDevice:
    case Errc::NotFound: return 404;
    default: return 400;
  }
}

static void fail(httplib::Response& res, const Error& e) {
  res.status = status_for(e.code());
  json j{{"error", e.what()}};
  res.set_content(j.dump(), "application/json");
}

template <typename F>
static void handle(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    fail(res, e);
  } catch (const std::exception& e) {
    res.status = 500;
    res.set_content(json{{"error", e.what()}}.dump(), "application/json");
  }
}

static std::set<std::string> split_csv(const std::string& s) {
  std::set<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t pos = s.find(',', start);
    std::string item = s.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!item.empty()) out.insert(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct HttpServer::Impl {
  explicit Impl(Backend& b) : backend(b) {}
  Backend& backend;
  httplib::Server server;
};

HttpServer::HttpServer(Backend& backend) : impl_(new Impl(backend)) {
  auto& srv = impl_->server;
  Backend& be = impl_->backend;

  srv.Post("/v1/upload", [&be](const httplib::Request& req,
                               httplib::Response& res) {
    handle(res, [&] {
      if (!req.has_param("device") || !req.has_param("first_seq")) {
        raise(Errc::InvalidArgument, "device and first_seq are required");
      }
      UploadEnvelope env;
      env.device = DeviceId::parse(req.get_param_value("device"));
      env.first_seq = parse_u64(req.get_param_value("first_seq"), "first_seq");
      env.file_bytes = req.body;
      env.gzipped = req.get_header_value("Content-Encoding") == "gzip";
      env.received_at = req.has_param("received_at")
                            ? parse_timestamp(req.get_param_value("received_at"),
                                              "received_at")
                            : wall_clock_us();
      IngestReport report = be.ingest(env);
      res.set_content(report.to_json_string(), "application/json");
    });
  });

  srv.Post("/v1/heartbeat", [&be](const httplib::Request& req,
                                  httplib::Response& res) {
    handle(res, [&] {
      auto hb = agent::HeartbeatReport::from_json_string(req.body);
      be.record_heartbeat(hb, wall_clock_us());
      res.set_content("{\"ok\":true}", "application/json");
    });
  });

  srv.Get("/v1/ota", [&be](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      if (!req.has_param("device") || !req.has_param("version")) {
        raise(Errc::InvalidArgument, "device and version are required");
      }
      DeviceId device = DeviceId::parse(req.get_param_value("device"));
      std::uint64_t version =
          parse_u64(req.get_param_value("version"), "version");
      auto pkg = be.ota_package_for(device, version);
      if (!pkg) {
        res.status = 204;
        return;
      }
      res.set_content(ota::encode_package(*pkg), "application/octet-stream");
    });
  });

  srv.Get("/v1/query", [&be](const httplib::Request& req,
                             httplib::Response& res) {
    handle(res, [&] {
      if (!req.has_param("start") || !req.has_param("end")) {
        raise(Errc::InvalidArgument, "start and end are required");
      }
      QueryRequest q;
      q.start = parse_timestamp(req.get_param_value("start"), "start");
      q.end = parse_timestamp(req.get_param_value("end"), "end");
      q.tags = split_csv(req.get_param_value("tags"));
      q.devices = split_csv(req.get_param_value("devices"));
      for (const auto& c : split_csv(req.get_param_value("categories"))) {
        q.categories.insert(parse_tag_category(c));
      }
      std::string body;
      for (const auto& r : be.query(q)) {
        body += format_stored_line(r);
        body.push_back('\n');
      }
      res.set_content(body, "text/plain");
    });
  });

  srv.Get("/v1/stats/tags", [&be](const httplib::Request&,
                                  httplib::Response& res) {
    handle(res, [&] {
      res.set_content(be.tag_stats().to_json_string(), "application/json");
    });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind_any(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpServer::bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace fleetbed::backend
