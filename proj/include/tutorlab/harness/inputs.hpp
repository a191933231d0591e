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

#include <optional>
#include <string>

#include "tutorlab/common/random.hpp"
#include "tutorlab/graph/behavior_graph.hpp"

namespace tutorlab::harness {

// An input the matcher accepts: the exact value, a range midpoint, the
// target expression, or a literal reading of a simple pattern. Nullopt when
// no candidate is found.
std::optional<std::string> sample_correct_input(const graph::InputMatcher& matcher);

// An input the matcher rejects, drawn from a few near misses; nullopt for
// matchers that accept everything.
std::optional<std::string> sample_incorrect_input(const graph::InputMatcher& matcher, Rng& rng);

// The attempt that traverses a correct link.
std::optional<graph::Sai> correct_attempt(const graph::Link& link);

}  // namespace tutorlab::harness
