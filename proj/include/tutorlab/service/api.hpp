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

#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "tutorlab/common/error.hpp"
#include "tutorlab/service/tutorshop.hpp"

namespace tutorlab::service {

struct ApiRequest {
  std::string method;  // "GET", "POST", "PUT"
  std::string path;    // may carry a "?a=b" query string
  std::map<std::string, std::string> query;
  std::string token;   // bearer token, empty when anonymous
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  bool ok() const { return status >= 200 && status < 300; }
  nlohmann::json json() const;  // throws kParseError
};

int http_status(ErrorCode code);

// JSON shapes shared by the router and its clients.
nlohmann::json to_json(const Account& account);
nlohmann::json to_json(const ClassRoster& roster);
nlohmann::json to_json(const Assignment& assignment);
Assignment assignment_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ClassReport& report);
nlohmann::json to_json(const student::StudentModel& model);
nlohmann::json to_json(const graph::Sai& sai);
// What the client sees of an evaluation; test mode hides the outcome.
nlohmann::json project(const StepResult& result);
nlohmann::json error_body(const Error& error);

// Maps the HTTP surface onto a Tutorshop. Stateless apart from the service,
// so one router can serve any number of transport threads.
class ApiRouter {
 public:
  explicit ApiRouter(Tutorshop& shop) : shop_(shop) {}

  ApiResponse handle(const ApiRequest& request) const;

 private:
  ApiResponse dispatch(const ApiRequest& request) const;

  Tutorshop& shop_;
};

}  // namespace tutorlab::service
