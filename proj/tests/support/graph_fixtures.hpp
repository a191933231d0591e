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

#include <set>
#include <string>
#include <vector>

#include "tutorlab/common/random.hpp"
#include "tutorlab/graph/behavior_graph.hpp"
#include "tutorlab/graph/tracer.hpp"

namespace tutorlab::testing {

using SaiSequence = std::vector<graph::Sai>;

// Linear chain n0 -> n1 -> ... with one exact-match correct link per step on
// widgets cell_A1, cell_A2, ...; step i expects input std::to_string(40 + i).
graph::BehaviorGraph chain_graph(int steps);

// Random valid graph: at most 8 links and 3 groups, mixing correct, buggy
// and tutor_performed links and unordered groups, over widgets w0..w2.
graph::BehaviorGraph random_graph(Rng& rng);

// Candidate attempts used to probe generated graphs.
std::vector<graph::Sai> probe_alphabet();

// Brute force: walks every start-to-done path (unordered groups expanded to
// all member permutations, tutor links taken silently), expands each path
// into the attempt sequences whose items satisfy the path's matchers, and
// drops sequences that already complete on a proper prefix. Reads matcher
// definitions from their document form; never calls the tracer or the
// matcher classes.
std::set<SaiSequence> oracle_completing_sequences(
    const graph::BehaviorGraph& g, const std::vector<graph::Sai>& alphabet);

// Exhaustive search through the tracer: every all-CORRECT attempt sequence
// over the alphabet that ends with the problem completed.
std::set<SaiSequence> tracer_completing_sequences(
    const graph::Tracer& tracer, const std::vector<graph::Sai>& alphabet);

}  // namespace tutorlab::testing
