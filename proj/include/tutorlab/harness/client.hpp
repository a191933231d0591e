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

#include <string>

#include <nlohmann/json.hpp>

#include "tutorlab/service/http.hpp"

namespace tutorlab::harness {

// JSON calls against the service API. Error responses are rethrown as the
// Error they describe.
class ServiceClient {
 public:
  explicit ServiceClient(service::ApiClient& api) : api_(api) {}

  nlohmann::json call(const std::string& method, const std::string& path, const std::string& token,
                      const nlohmann::json& body = nlohmann::json::object());
  // Raw body in and out (CSV import, TSV export).
  std::string call_text(const std::string& method, const std::string& path, const std::string& token,
                        const std::string& body = {});

  std::string login(const std::string& login);

 private:
  service::ApiResponse send(const std::string& method, const std::string& path, const std::string& token,
                            std::string body);

  service::ApiClient& api_;
};

}  // namespace tutorlab::harness
