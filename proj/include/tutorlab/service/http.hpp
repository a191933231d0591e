// Copyright 2026 The Tutorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <string>
#include <thread>

#include "tutorlab/service/api.hpp"

namespace tutorlab::service {

// Sends API requests somewhere: straight into a router, or over HTTP.
class ApiClient {
 public:
  virtual ~ApiClient() = default;
  virtual ApiResponse send(const ApiRequest& request) = 0;
};

class InProcessClient final : public ApiClient {
 public:
  explicit InProcessClient(const ApiRouter& router) : router_(router) {}
  ApiResponse send(const ApiRequest& request) override { return router_.handle(request); }

 private:
  const ApiRouter& router_;
};

class HttpClient final : public ApiClient {
 public:
  HttpClient(std::string host, int port);
  ~HttpClient() override;
  ApiResponse send(const ApiRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Serves a router over HTTP/1.1 on a background thread.
class HttpServer {
 public:
  explicit HttpServer(const ApiRouter& router);
  ~HttpServer();

  // Binds (port 0 picks a free one) and starts serving; returns the port.
  // Throws kIoFailure when the address cannot be bound.
  int start(const std::string& host, int port);
  // Blocks serving on the calling thread.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tutorlab::service
