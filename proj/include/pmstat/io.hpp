// Copyright 2026 The pm-statkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON round trip for distribution functions:
//   {"interpolation": "step", "knots": [[t, left, right], ...]}
// An empty knot list is eps_inf. Uses the single-header nlohmann/json.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmstat/ddf.hpp"

namespace pmstat {

inline nlohmann::json to_json(const Ddf& f) {
  nlohmann::json knots = nlohmann::json::array();
  for (const auto& k : f.knots()) knots.push_back({k.t, k.left, k.right});
  return {{"interpolation", f.interpolation() == Interpolation::step ? "step" : "linear"}, {"knots", knots}};
}

/// Throws std::invalid_argument on a malformed record and whatever the Ddf
/// constructor throws on an invalid knot list.
inline Ddf ddf_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("ddf: expected an object");
  Interpolation mode = Interpolation::step;
  if (j.contains("interpolation")) {
    const auto& m = j.at("interpolation");
    if (m == "step") {
      mode = Interpolation::step;
    } else if (m == "linear") {
      mode = Interpolation::linear;
    } else {
      throw std::invalid_argument("ddf.interpolation: expected \"step\" or \"linear\"");
    }
  }
  if (!j.contains("knots") || !j.at("knots").is_array()) throw std::invalid_argument("ddf.knots: expected an array");
  std::vector<Knot> knots;
  for (const auto& k : j.at("knots")) {
    if (!k.is_array() || k.size() != 3 || !k[0].is_number() || !k[1].is_number() || !k[2].is_number()) {
      throw std::invalid_argument("ddf.knots: each knot is [t, left, right]");
    }
    knots.push_back(Knot{k[0].get<double>(), k[1].get<double>(), k[2].get<double>()});
  }
  return Ddf(std::move(knots), mode);
}

}  // namespace pmstat
