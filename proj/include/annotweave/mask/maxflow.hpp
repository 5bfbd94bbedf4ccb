#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace annotweave {

/// s-t max-flow / min-cut by augmenting paths over two search trees grown from
/// the terminals (Boykov-Kolmogorov). Terminal links are stored per node as a
/// signed residual, so only the non-terminal arcs are materialised.
class MaxFlowGraph {
 public:
  explicit MaxFlowGraph(int node_count, int arc_hint = 0);

  [[nodiscard]] int node_count() const { return static_cast<int>(nodes_.size()); }

  /// Adds source->node and node->sink capacities (both >= 0).
  void add_terminal_weights(int node, double source_cap, double sink_cap);

  /// Adds the pair of directed arcs u->v (cap_uv) and v->u (cap_vu).
  void add_edge(int u, int v, double cap_uv, double cap_vu);

  /// Computes the maximum flow; call once after the graph is built.
  double solve();

  /// After solve(): true when the node lies on the source side of the minimum cut.
  [[nodiscard]] bool in_source_segment(int node) const;

 private:
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;

  struct Arc {
    int head;
    int next;
    double r_cap;
  };
  struct Node {
    int first = kNone;
    int parent = kNone;
    bool in_sink_tree = false;
    bool active = false;
    std::int64_t ts = 0;
    int dist = 0;
    double tr_cap = 0.0;
  };

  static int sister(int arc) { return arc ^ 1; }
  void set_active(int node);
  int next_active();
  void augment(int middle_arc);
  void process_source_orphan(int node);
  void process_sink_orphan(int node);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  double flow_ = 0.0;
  std::int64_t time_ = 0;
  bool solved_ = false;
};

}  // namespace annotweave
