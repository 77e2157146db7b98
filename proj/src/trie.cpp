#include "geodragon/trie.hpp"

#include <set>

namespace geodragon::retrieval {

EntityTrie EntityTrie::build(const std::vector<std::pair<std::string, std::int64_t>>& ids) {
  EntityTrie trie;
  std::set<std::string> vocab;
  std::set<std::string> seen;
  for (const auto& [rendered, osm_id] : ids) {
    require(seen.insert(rendered).second, Errc::DuplicateId, "duplicate id: ", rendered);
    std::vector<std::string> toks = tokens::tokenize(rendered);
    toks.push_back(tokens::kEos);
    int cur = 0;
    for (const std::string& tok : toks) {
      if (tok != tokens::kEos) vocab.insert(tok);
      auto it = trie.nodes_[cur].children.find(tok);
      if (it == trie.nodes_[cur].children.end()) {
        const int next = static_cast<int>(trie.nodes_.size());
        trie.nodes_[cur].children.emplace(tok, next);
        trie.nodes_.emplace_back();
        cur = next;
      } else {
        cur = it->second;
      }
    }
    trie.nodes_[cur].terminal_osm_id = osm_id;
    trie.nodes_[cur].terminal_rendered = rendered;
    ++trie.terminal_count_;
  }
  trie.vocabulary_.assign(vocab.begin(), vocab.end());
  trie.vocabulary_.push_back(tokens::kEos);
  return trie;
}

const EntityTrie::Node* EntityTrie::walk(std::span<const std::string> prefix) const {
  int cur = 0;
  for (const std::string& tok : prefix) {
    auto it = nodes_[cur].children.find(tok);
    if (it == nodes_[cur].children.end()) return nullptr;
    cur = it->second;
  }
  return &nodes_[cur];
}

std::vector<std::string> EntityTrie::children_of(std::span<const std::string> prefix) const {
  const Node* node = walk(prefix);
  require(node != nullptr, Errc::InvalidPrefix, "prefix is not a path in the trie");
  std::vector<std::string> out;
  out.reserve(node->children.size());
  for (const auto& [tok, idx] : node->children) out.push_back(tok);
  return out;
}

std::vector<std::string> EntityTrie::enumerate_ids() const {
  std::vector<std::string> out;
  std::vector<int> stack{0};
  // Iterative DFS; terminal nodes carry the full rendered id.
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    const Node& n = nodes_[cur];
    if (n.terminal_osm_id >= 0) out.push_back(n.terminal_rendered);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
      stack.push_back(it->second);
  }
  return out;
}

}  // namespace geodragon::retrieval
