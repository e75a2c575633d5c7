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

// Subsets of N = {1, 2, ...} given by an explicit list, a predicate, or set
// algebra on other index sets. Index sets are immutable and cheap to copy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pmstat {

/// mask[k] != 0 iff k is a member, for 1 <= k < mask.size(); mask[0] unused.
using IndexMask = std::vector<std::uint8_t>;

class IndexSet {
 public:
  using Predicate = std::function<bool(std::size_t)>;

  IndexSet() : IndexSet(Explicit{}, "empty") {}

  static IndexSet from_list(std::vector<std::size_t> members, std::string name = "explicit") {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (!members.empty() && members.front() == 0) {
      throw std::domain_error("IndexSet: indices start at 1");
    }
    return IndexSet(Explicit{std::move(members)}, std::move(name));
  }

  static IndexSet from_predicate(Predicate p, std::string name) {
    if (!p) throw std::invalid_argument("IndexSet: empty predicate");
    return IndexSet(std::move(p), std::move(name));
  }

  static IndexSet from_mask(const IndexMask& mask, std::string name = "explicit") {
    std::vector<std::size_t> members;
    for (std::size_t k = 1; k < mask.size(); ++k) {
      if (mask[k]) members.push_back(k);
    }
    return IndexSet(Explicit{std::move(members)}, std::move(name));
  }

  static IndexSet empty() { return IndexSet(); }
  static IndexSet all() { return empty().complement("N"); }

  IndexSet complement(std::string name = "") const {
    if (name.empty()) name = "complement(" + name_ + ")";
    return IndexSet(Complement{std::make_shared<IndexSet>(*this)}, std::move(name));
  }

  friend IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    return IndexSet(Union{std::make_shared<IndexSet>(a), std::make_shared<IndexSet>(b)},
                    "union(" + a.name_ + ", " + b.name_ + ")");
  }

  friend IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    return IndexSet(Intersection{std::make_shared<IndexSet>(a), std::make_shared<IndexSet>(b)},
                    "intersection(" + a.name_ + ", " + b.name_ + ")");
  }

  bool contains(std::size_t k) const {
    if (k == 0) return false;
    return std::visit(
        [k](const auto& node) -> bool {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Explicit>) {
            return std::binary_search(node.members.begin(), node.members.end(), k);
          } else if constexpr (std::is_same_v<T, Predicate>) {
            return node(k);
          } else if constexpr (std::is_same_v<T, Complement>) {
            return !node.inner->contains(k);
          } else if constexpr (std::is_same_v<T, Union>) {
            return node.a->contains(k) || node.b->contains(k);
          } else {
            return node.a->contains(k) && node.b->contains(k);
          }
        },
        node_);
  }

  /// Membership of 1..n as a dense mask of size n + 1.
  IndexMask mask(std::size_t n) const {
    IndexMask out(n + 1, 0);
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Explicit>) {
            for (auto k : node.members) {
              if (k > n) break;
              out[k] = 1;
            }
          } else if constexpr (std::is_same_v<T, Predicate>) {
            for (std::size_t k = 1; k <= n; ++k) out[k] = node(k) ? 1 : 0;
          } else if constexpr (std::is_same_v<T, Complement>) {
            out = node.inner->mask(n);
            for (std::size_t k = 1; k <= n; ++k) out[k] = out[k] ? 0 : 1;
          } else if constexpr (std::is_same_v<T, Union>) {
            out = node.a->mask(n);
            const auto other = node.b->mask(n);
            for (std::size_t k = 1; k <= n; ++k) out[k] = (out[k] || other[k]) ? 1 : 0;
          } else {
            out = node.a->mask(n);
            const auto other = node.b->mask(n);
            for (std::size_t k = 1; k <= n; ++k) out[k] = (out[k] && other[k]) ? 1 : 0;
          }
        },
        node_);
    return out;
  }

  /// Members in [1, n], ascending.
  std::vector<std::size_t> members_up_to(std::size_t n) const {
    std::vector<std::size_t> out;
    const auto m = mask(n);
    for (std::size_t k = 1; k <= n; ++k) {
      if (m[k]) out.push_back(k);
    }
    return out;
  }

  std::size_t count_up_to(std::size_t n) const {
    const auto m = mask(n);
    return static_cast<std::size_t>(std::count(m.begin() + 1, m.end(), std::uint8_t{1}));
  }

  const std::string& name() const { return name_; }

 private:
  struct Explicit {
    std::vector<std::size_t> members;
  };
  struct Complement {
    std::shared_ptr<const IndexSet> inner;
  };
  struct Union {
    std::shared_ptr<const IndexSet> a, b;
  };
  struct Intersection {
    std::shared_ptr<const IndexSet> a, b;
  };
  using Node = std::variant<Explicit, Predicate, Complement, Union, Intersection>;

  IndexSet(Node node, std::string name) : node_(std::move(node)), name_(std::move(name)) {}

  Node node_;
  std::string name_;
};

namespace sets {

inline bool is_perfect_power(std::size_t k, int power) {
  const double root = std::round(std::pow(static_cast<double>(k), 1.0 / power));
  for (double r : {root - 1.0, root, root + 1.0}) {
    if (r < 1.0) continue;
    double p = 1.0;
    for (int i = 0; i < power; ++i) p *= r;
    if (p == static_cast<double>(k)) return true;
  }
  return false;
}

inline IndexSet squares() {
  return IndexSet::from_predicate([](std::size_t k) { return is_perfect_power(k, 2); }, "squares");
}

inline IndexSet cubes() {
  return IndexSet::from_predicate([](std::size_t k) { return is_perfect_power(k, 3); }, "cubes");
}

inline IndexSet evens() {
  return IndexSet::from_predicate([](std::size_t k) { return k % 2 == 0; }, "evens");
}

inline IndexSet odds() {
  return IndexSet::from_predicate([](std::size_t k) { return k % 2 == 1; }, "odds");
}

/// {k : k = offset (mod step)} with 1 <= offset <= step.
inline IndexSet progression(std::size_t step, std::size_t offset) {
  if (step == 0 || offset == 0 || offset > step) {
    throw std::domain_error("progression: need step >= 1 and 1 <= offset <= step");
  }
  return IndexSet::from_predicate([step, offset](std::size_t k) { return k % step == offset % step; },
                                  "progression(" + std::to_string(step) + "," +
                                      std::to_string(offset) + ")");
}

/// Union of the blocks (4^m, 2 * 4^m]. Its Cesaro partial sums oscillate
/// between about 1/3 and 2/3, so it has no natural density.
inline IndexSet lacunary_blocks() {
  return IndexSet::from_predicate(
      [](std::size_t k) {
        std::size_t lo = 1;  // 4^m
        while (lo * 4 < k) lo *= 4;
        return k > lo && k <= 2 * lo;
      },
      "lacunary-blocks");
}

}  // namespace sets

}  // namespace pmstat
