#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "geodragon/error.hpp"

namespace geodragon::bt {

enum class TickStatus { Running, Success, Failure };

const char* status_name(TickStatus s);

enum class NodeKind { Sequence, Fallback, Action, Condition };

struct BtNode {
  NodeKind kind = NodeKind::Sequence;
  std::string name;                         // skill name (Action) or condition name
  std::map<std::string, std::string> params;  // e.g. target="..."
  std::vector<BtNode> children;

  static BtNode sequence(std::vector<BtNode> children);
  static BtNode fallback(std::vector<BtNode> children);
  static BtNode action(std::string skill, std::map<std::string, std::string> params = {});
  static BtNode condition(std::string name);
  bool is_leaf() const { return kind == NodeKind::Action || kind == NodeKind::Condition; }
};

// XML wire format: <Sequence>, <Fallback>, <Action skill target/>,
// <Condition name/>. Unknown tags and unknown attributes are rejected.
std::string to_xml(const BtNode& root);
BtNode from_xml(std::string_view text);
bool structurally_equal(const BtNode& a, const BtNode& b);

struct TickEvent {
  int tick = 0;
  std::string path;
  TickStatus status = TickStatus::Running;
};

// Tick engine. Sequences keep memory (they resume from their running child
// across ticks and advance within a tick on Success). Fallbacks are reactive:
// every tick re-evaluates children from the left, and a previously running
// branch that gets abandoned is reset, so each re-entry of a recovery branch
// starts it from scratch.
class TreeRuntime {
 public:
  using LeafFn = std::function<TickStatus(const BtNode& leaf, const std::string& path)>;

  explicit TreeRuntime(const BtNode& root);

  TickStatus tick(const LeafFn& leaf);

  int ticks() const { return tick_count_; }
  const std::vector<TickEvent>& events() const { return events_; }
  // Leaf invocation count by node path ("" for unknown paths -> 0).
  int invocations(const std::string& path) const;
  const std::vector<std::string>& paths() const { return paths_; }
  void reset();

 private:
  struct NodeState {
    int cursor = 0;        // Sequence resume point
    int active_child = -1; // Fallback branch that returned Running last
  };

  TickStatus tick_node(int idx, const LeafFn& leaf);
  void reset_subtree(int idx);

  const BtNode* root_;
  std::vector<const BtNode*> flat_;
  std::vector<std::string> paths_;
  std::vector<std::vector<int>> child_idx_;
  std::vector<NodeState> state_;
  std::vector<int> invocations_;
  std::vector<TickEvent> events_;
  int tick_count_ = 0;
};

}  // namespace geodragon::bt
