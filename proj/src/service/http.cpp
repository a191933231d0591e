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

#include "tutorlab/service/http.hpp"

#include <httplib.h>

namespace tutorlab::service {

namespace {

ApiRequest from_httplib(const httplib::Request& req) {
  ApiRequest out;
  out.method = req.method;
  out.path = req.path;
  for (const auto& [k, v] : req.params) out.query[k] = v;
  const std::string auth = req.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) out.token = auth.substr(7);
  out.body = req.body;
  return out;
}

}  // namespace

struct HttpServer::Impl {
  const ApiRouter& router;
  httplib::Server server;
  std::thread thread;

  explicit Impl(const ApiRouter& r) : router(r) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const ApiResponse out = router.handle(from_httplib(req));
      res.status = out.status;
      res.set_content(out.body, out.content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
  }
};

HttpServer::HttpServer(const ApiRouter& router) : impl_(std::make_unique<Impl>(router)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : port;
  if (port != 0 && !impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIoFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  if (bound < 0) throw Error(ErrorCode::kIoFailure, "cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::kIoFailure, "cannot serve on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

struct HttpClient::Impl {
  httplib::Client client;
  Impl(const std::string& host, int port) : client(host, port) {}
};

HttpClient::HttpClient(std::string host, int port) : impl_(std::make_unique<Impl>(host, port)) {}

HttpClient::~HttpClient() = default;

ApiResponse HttpClient::send(const ApiRequest& request) {
  httplib::Headers headers;
  if (!request.token.empty()) headers.emplace("Authorization", "Bearer " + request.token);
  std::string path = request.path;
  if (!request.query.empty()) {
    path += path.find('?') == std::string::npos ? '?' : '&';
    path += httplib::detail::params_to_query_str(httplib::Params(request.query.begin(), request.query.end()));
  }
  const bool csv = request.path.find("/conditions/") != std::string::npos;
  const char* type = csv ? "text/csv" : "application/json";
  httplib::Result res;
  if (request.method == "GET") {
    res = impl_->client.Get(path, headers);
  } else if (request.method == "POST") {
    res = impl_->client.Post(path, headers, request.body, type);
  } else if (request.method == "PUT") {
    res = impl_->client.Put(path, headers, request.body, type);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unsupported method " + request.method);
  }
  if (!res) throw Error(ErrorCode::kIoFailure, "HTTP request failed: " + httplib::to_string(res.error()));
  return {res->status, res->get_header_value("Content-Type"), res->body};
}

}  // namespace tutorlab::service
