#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "geodragon/error.hpp"
#include "geodragon/tokens.hpp"

namespace geodragon::retrieval {

// Prefix tree over tokenized entity identifiers. Every identifier ends with
// the end-of-sequence token, so terminals never have children and the token
// sequences are prefix-free.
class EntityTrie {
 public:
  struct Node {
    std::map<std::string, int> children;  // token -> node index
    std::int64_t terminal_osm_id = -1;    // set on end-of-sequence nodes
    std::string terminal_rendered;
  };

  static EntityTrie build(const std::vector<std::pair<std::string, std::int64_t>>& ids);

  // Node reached by a token prefix, or nullptr if the prefix leaves the trie.
  const Node* walk(std::span<const std::string> prefix) const;

  // Admissible next tokens after the prefix (includes the end-of-sequence
  // token when the prefix spells a complete identifier).
  std::vector<std::string> children_of(std::span<const std::string> prefix) const;

  bool empty() const { return nodes_.size() <= 1 && nodes_[0].children.empty(); }
  std::size_t terminal_count() const { return terminal_count_; }

  // All complete identifiers spelled by root-to-terminal paths.
  std::vector<std::string> enumerate_ids() const;

  // Every distinct word token in the corpus plus the end-of-sequence token.
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  const Node& node(int idx) const { return nodes_[idx]; }
  const Node& root() const { return nodes_[0]; }

 private:
  std::vector<Node> nodes_{1};
  std::size_t terminal_count_ = 0;
  std::vector<std::string> vocabulary_;
};

}  // namespace geodragon::retrieval
