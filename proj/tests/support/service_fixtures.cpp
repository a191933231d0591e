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

#include "service_fixtures.hpp"

#include <random>

#include "tutorlab/common/error.hpp"
#include "tutorlab/harness/inputs.hpp"

namespace tutorlab::testing {

TempDir::TempDir() {
  path = std::filesystem::temp_directory_path() /
         ("tutorlab-svc-" + std::to_string(std::random_device{}()) + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

std::filesystem::path source_dir() { return TUTORLAB_SOURCE_DIR; }

service::Package sample_package() {
  return service::load_package_dir(source_dir() / "data" / "packages" / "fractions");
}

ShopFixture::ShopFixture(int n_students) {
  restart();
  admin = shop->authenticate(shop->login("admin"));
  teacher = shop->create_account(admin, {"t1", "t1", service::Role::kTeacher, "Teacher One"});
  std::vector<std::string> ids;
  for (int i = 1; i <= n_students; ++i) {
    const std::string id = "s" + std::to_string(i);
    students.push_back(shop->create_account(teacher, {id, id, service::Role::kStudent, "Student " + std::to_string(i)}));
    ids.push_back(id);
  }
  shop->create_class(teacher, {"c1", "Period 1", "", ids});
  shop->publish_package(teacher, sample_package());
}

void ShopFixture::restart() {
  shop.reset();
  shop = std::make_unique<service::Tutorshop>(service::ServiceConfig{dir.path}, clock);
}

service::Assignment ShopFixture::assign(const std::string& id, const std::string& curriculum,
                                        std::vector<std::string> prerequisites, bool test_mode,
                                        std::string condition) {
  service::Assignment a;
  a.id = id;
  a.class_id = "c1";
  a.package_name = "fractions";
  a.curriculum_id = curriculum;
  a.condition_name = std::move(condition);
  a.test_mode = test_mode;
  a.prerequisites = std::move(prerequisites);
  return shop->create_assignment(teacher, a);
}

Mirror::Mirror(const service::Package& package, const service::SessionView& view) {
  const auto* g = package.find_problem(view.problem_name);
  if (!g) throw Error(ErrorCode::kUnknownProblem, view.problem_name);
  tracer_ = std::make_shared<graph::Tracer>(*g);
  state_ = tracer_->init_state();
  for (const auto& sai : view.filled) {
    try {
      apply(sai);
    } catch (const Error&) {
      // tutor-filled widgets have no student link
    }
  }
}

graph::Sai Mirror::next_correct() const {
  for (const auto* link : tracer_->available_links(state_)) {
    if (auto sai = harness::correct_attempt(*link)) return *sai;
  }
  throw Error(ErrorCode::kNoHintAvailable, "no correct attempt available");
}

void Mirror::apply(const graph::Sai& sai) {
  graph::Transaction txn;
  txn.selection = sai.selection;
  txn.action = sai.action;
  txn.input = sai.input;
  state_ = tracer_->trace(state_, txn, false).state;
}

std::string solve_next(service::Tutorshop& shop, const service::Account& student,
                       const std::string& assignment_id, ManualClock& clock) {
  static const service::Package package = sample_package();
  const auto view = shop.open_session(student, assignment_id);
  if (view.assignment_complete) return {};
  Mirror mirror(package, view);
  while (!mirror.completed()) {
    const auto sai = mirror.next_correct();
    clock.advance(5000);
    shop.submit_transaction(student, view.session_id, sai);
    mirror.apply(sai);
  }
  return view.problem_name;
}

}  // namespace tutorlab::testing
