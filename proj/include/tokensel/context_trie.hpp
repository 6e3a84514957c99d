// Copyright 2026 The tokensel Authors.
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

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "tokensel/corpus_io.hpp"

namespace tokensel {

// Trie over reversed contexts. Node 0 is the empty context; the child of a
// node for context (h1..hk) along token x is the context (x h1..hk), so a
// walk from the root follows the history from the most recent token back.
class ContextTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  ContextTrie() { nodes_.push_back({kRoot, 0, 0}); }

  std::size_t size() const noexcept { return nodes_.size(); }
  NodeId parent(NodeId n) const { return nodes_[n].parent; }
  Token word(NodeId n) const { return nodes_[n].word; }
  std::uint32_t depth(NodeId n) const { return nodes_[n].depth; }

  std::optional<NodeId> child(NodeId n, Token t) const {
    auto it = children_.find(key(n, t));
    if (it == children_.end()) return std::nullopt;
    return it->second;
  }

  NodeId child_or_add(NodeId n, Token t) {
    auto [it, inserted] = children_.try_emplace(key(n, t), static_cast<NodeId>(nodes_.size()));
    if (inserted) nodes_.push_back({n, t, nodes_[n].depth + 1});
    return it->second;
  }

  // Node for `context` given oldest-first.
  std::optional<NodeId> find(std::span<const Token> context) const {
    NodeId n = kRoot;
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
      auto c = child(n, *it);
      if (!c) return std::nullopt;
      n = *c;
    }
    return n;
  }

  NodeId insert(std::span<const Token> context) {
    NodeId n = kRoot;
    for (auto it = context.rbegin(); it != context.rend(); ++it) n = child_or_add(n, *it);
    return n;
  }

  // Context tokens of node n, oldest first.
  std::vector<Token> tokens(NodeId n) const {
    std::vector<Token> out;
    out.reserve(nodes_[n].depth);
    for (; n != kRoot; n = nodes_[n].parent) out.push_back(nodes_[n].word);
    return out;
  }

  void reserve(std::size_t n) {
    nodes_.reserve(n);
    children_.reserve(n);
  }

  static std::uint64_t key(NodeId n, Token t) noexcept { return (std::uint64_t{n} << 32) | t; }

 private:
  struct Node {
    NodeId parent;
    Token word;
    std::uint32_t depth;
  };
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, NodeId> children_;
};

}  // namespace tokensel
