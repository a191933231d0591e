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

#include "tutorlab/harness/client.hpp"

#include "tutorlab/common/error.hpp"

namespace tutorlab::harness {

using nlohmann::json;

service::ApiResponse ServiceClient::send(const std::string& method, const std::string& path,
                                         const std::string& token, std::string body) {
  auto response = api_.send({method, path, {}, token, std::move(body)});
  if (response.ok()) return response;
  json doc;
  try {
    doc = json::parse(response.body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kIoFailure, "HTTP " + std::to_string(response.status) + " from " + path);
  }
  const auto code = error_code_from_name(doc.value("error", std::string()));
  std::optional<int> line;
  if (doc.contains("line")) line = doc["line"].get<int>();
  throw Error(code.value_or(ErrorCode::kIoFailure), doc.value("message", std::string("request failed")), line);
}

json ServiceClient::call(const std::string& method, const std::string& path, const std::string& token,
                         const json& body) {
  return send(method, path, token, method == "GET" ? std::string() : body.dump()).json();
}

std::string ServiceClient::call_text(const std::string& method, const std::string& path, const std::string& token,
                                     const std::string& body) {
  return send(method, path, token, body).body;
}

std::string ServiceClient::login(const std::string& login) {
  return call("POST", "/api/login", "", {{"login", login}}).at("token").get<std::string>();
}

}  // namespace tutorlab::harness
