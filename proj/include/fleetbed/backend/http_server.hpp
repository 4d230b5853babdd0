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
#pragma once

#include <memory>
#include <string>

#include "fleetbed/backend/backend.hpp"

namespace fleetbed::backend {

/// Plain request/response front end for the ingestion service:
///   POST /v1/upload?device=<id>&first_seq=<n>   rotated file bytes
///   POST /v1/heartbeat                          heartbeat JSON
///   GET  /v1/ota?device=<id>&version=<n>        package bytes or 204
///   GET  /v1/query?start=&end=&tags=&devices=&categories=
///   GET  /v1/stats/tags
class HttpServer {
 public:
  explicit HttpServer(Backend& backend);
  ~HttpServer();

  /// Binds to an ephemeral port on `host` and returns it.
  int bind_any(const std::string& host);
  bool bind(const std::string& host, int port);

  /// Blocks serving requests until stop() is called.
  bool serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fleetbed::backend
