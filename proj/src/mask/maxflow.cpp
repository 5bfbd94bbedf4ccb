#include "annotweave/mask/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "annotweave/core/error.hpp"

namespace annotweave {

MaxFlowGraph::MaxFlowGraph(int node_count, int arc_hint) : nodes_(static_cast<std::size_t>(node_count)) {
  arcs_.reserve(static_cast<std::size_t>(std::max(arc_hint, 0)) * 2);
}

void MaxFlowGraph::add_terminal_weights(int node, double source_cap, double sink_cap) {
  if (source_cap < 0 || sink_cap < 0) throw Error(ErrorCode::InvalidArgument, "negative terminal capacity");
  // Flow through s->node->t saturates the smaller of the two links immediately.
  flow_ += std::min(source_cap, sink_cap);
  nodes_[node].tr_cap += source_cap - sink_cap;
}

void MaxFlowGraph::add_edge(int u, int v, double cap_uv, double cap_vu) {
  if (cap_uv < 0 || cap_vu < 0) throw Error(ErrorCode::InvalidArgument, "negative arc capacity");
  const int a = static_cast<int>(arcs_.size());
  arcs_.push_back({v, nodes_[u].first, cap_uv});
  arcs_.push_back({u, nodes_[v].first, cap_vu});
  nodes_[u].first = a;
  nodes_[v].first = a + 1;
}

void MaxFlowGraph::set_active(int node) {
  if (!nodes_[node].active) {
    nodes_[node].active = true;
    active_.push_back(node);
  }
}

int MaxFlowGraph::next_active() {
  while (!active_.empty()) {
    const int i = active_.front();
    active_.pop_front();
    nodes_[i].active = false;
    if (nodes_[i].parent != kNone) return i;
  }
  return kNone;
}

void MaxFlowGraph::augment(int middle_arc) {
  // middle_arc runs from a source-tree node to a sink-tree node.
  double bottleneck = arcs_[middle_arc].r_cap;
  int i = arcs_[sister(middle_arc)].head;
  while (nodes_[i].parent != kTerminal) {
    const int a = nodes_[i].parent;
    bottleneck = std::min(bottleneck, arcs_[sister(a)].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, nodes_[i].tr_cap);

  i = arcs_[middle_arc].head;
  while (nodes_[i].parent != kTerminal) {
    const int a = nodes_[i].parent;
    bottleneck = std::min(bottleneck, arcs_[a].r_cap);
    i = arcs_[a].head;
  }
  bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

  arcs_[sister(middle_arc)].r_cap += bottleneck;
  arcs_[middle_arc].r_cap -= bottleneck;

  i = arcs_[sister(middle_arc)].head;
  while (nodes_[i].parent != kTerminal) {
    const int a = nodes_[i].parent;
    arcs_[a].r_cap += bottleneck;
    arcs_[sister(a)].r_cap -= bottleneck;
    if (arcs_[sister(a)].r_cap <= 0.0) {
      nodes_[i].parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap -= bottleneck;
  if (nodes_[i].tr_cap <= 0.0) {
    nodes_[i].parent = kOrphan;
    orphans_.push_front(i);
  }

  i = arcs_[middle_arc].head;
  while (nodes_[i].parent != kTerminal) {
    const int a = nodes_[i].parent;
    arcs_[sister(a)].r_cap += bottleneck;
    arcs_[a].r_cap -= bottleneck;
    if (arcs_[a].r_cap <= 0.0) {
      nodes_[i].parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arcs_[a].head;
  }
  nodes_[i].tr_cap += bottleneck;
  if (nodes_[i].tr_cap >= 0.0) {
    nodes_[i].parent = kOrphan;
    orphans_.push_front(i);
  }

  flow_ += bottleneck;
}

void MaxFlowGraph::process_source_orphan(int i) {
  int best_arc = kNone;
  int best_dist = std::numeric_limits<int>::max();
  for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
    if (arcs_[sister(a)].r_cap <= 0.0) continue;
    int j = arcs_[a].head;
    if (nodes_[j].in_sink_tree || nodes_[j].parent == kNone) continue;
    // Walk towards the root to confirm j still originates at the source.
    int d = 0;
    bool valid = true;
    for (;;) {
      if (nodes_[j].ts == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int p = nodes_[j].parent;
      ++d;
      if (p == kTerminal) {
        nodes_[j].ts = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (p == kOrphan) {
        valid = false;
        break;
      }
      j = arcs_[p].head;
    }
    if (!valid) continue;
    if (d < best_dist) {
      best_arc = a;
      best_dist = d;
    }
    // Stamp the verified path so later searches stop early.
    for (j = arcs_[a].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
      nodes_[j].ts = time_;
      nodes_[j].dist = d--;
    }
  }

  if (best_arc != kNone) {
    nodes_[i].parent = best_arc;
    nodes_[i].ts = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }

  nodes_[i].parent = kNone;
  for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
    const int j = arcs_[a].head;
    if (nodes_[j].in_sink_tree || nodes_[j].parent == kNone) continue;
    if (arcs_[sister(a)].r_cap > 0.0) set_active(j);
    const int p = nodes_[j].parent;
    if (p != kTerminal && p != kOrphan && arcs_[p].head == i) {
      nodes_[j].parent = kOrphan;
      orphans_.push_back(j);
    }
  }
}

void MaxFlowGraph::process_sink_orphan(int i) {
  int best_arc = kNone;
  int best_dist = std::numeric_limits<int>::max();
  for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
    if (arcs_[a].r_cap <= 0.0) continue;
    int j = arcs_[a].head;
    if (!nodes_[j].in_sink_tree || nodes_[j].parent == kNone) continue;
    int d = 0;
    bool valid = true;
    for (;;) {
      if (nodes_[j].ts == time_) {
        d += nodes_[j].dist;
        break;
      }
      const int p = nodes_[j].parent;
      ++d;
      if (p == kTerminal) {
        nodes_[j].ts = time_;
        nodes_[j].dist = 1;
        break;
      }
      if (p == kOrphan) {
        valid = false;
        break;
      }
      j = arcs_[p].head;
    }
    if (!valid) continue;
    if (d < best_dist) {
      best_arc = a;
      best_dist = d;
    }
    for (j = arcs_[a].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
      nodes_[j].ts = time_;
      nodes_[j].dist = d--;
    }
  }

  if (best_arc != kNone) {
    nodes_[i].parent = best_arc;
    nodes_[i].ts = time_;
    nodes_[i].dist = best_dist + 1;
    return;
  }

  nodes_[i].parent = kNone;
  for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
    const int j = arcs_[a].head;
    if (!nodes_[j].in_sink_tree || nodes_[j].parent == kNone) continue;
    if (arcs_[a].r_cap > 0.0) set_active(j);
    const int p = nodes_[j].parent;
    if (p != kTerminal && p != kOrphan && arcs_[p].head == i) {
      nodes_[j].parent = kOrphan;
      orphans_.push_back(j);
    }
  }
}

double MaxFlowGraph::solve() {
  if (solved_) return flow_;
  solved_ = true;

  for (int i = 0; i < node_count(); ++i) {
    auto& n = nodes_[i];
    if (n.tr_cap > 0.0) {
      n.in_sink_tree = false;
      n.parent = kTerminal;
      n.ts = 0;
      n.dist = 1;
      set_active(i);
    } else if (n.tr_cap < 0.0) {
      n.in_sink_tree = true;
      n.parent = kTerminal;
      n.ts = 0;
      n.dist = 1;
      set_active(i);
    }
  }

  int current = kNone;
  for (;;) {
    int i = current;
    if (i != kNone && nodes_[i].parent == kNone) i = kNone;
    if (i == kNone) {
      i = next_active();
      if (i == kNone) break;
    }

    // Grow the tree containing i until it touches the other tree.
    int middle = kNone;
    if (!nodes_[i].in_sink_tree) {
      for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
        if (arcs_[a].r_cap <= 0.0) continue;
        const int j = arcs_[a].head;
        auto& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.in_sink_tree = false;
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
          set_active(j);
        } else if (nj.in_sink_tree) {
          middle = a;
          break;
        } else if (nj.ts <= nodes_[i].ts && nj.dist > nodes_[i].dist) {
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
        }
      }
    } else {
      for (int a = nodes_[i].first; a != kNone; a = arcs_[a].next) {
        if (arcs_[sister(a)].r_cap <= 0.0) continue;
        const int j = arcs_[a].head;
        auto& nj = nodes_[j];
        if (nj.parent == kNone) {
          nj.in_sink_tree = true;
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
          set_active(j);
        } else if (!nj.in_sink_tree) {
          middle = sister(a);
          break;
        } else if (nj.ts <= nodes_[i].ts && nj.dist > nodes_[i].dist) {
          nj.parent = sister(a);
          nj.ts = nodes_[i].ts;
          nj.dist = nodes_[i].dist + 1;
        }
      }
    }

    ++time_;
    if (middle == kNone) {
      current = kNone;
      continue;
    }

    // Keep expanding from i after the orphans are adopted.
    current = i;
    augment(middle);
    while (!orphans_.empty()) {
      const int o = orphans_.front();
      orphans_.pop_front();
      if (nodes_[o].in_sink_tree) {
        process_sink_orphan(o);
      } else {
        process_source_orphan(o);
      }
    }
  }
  return flow_;
}

bool MaxFlowGraph::in_source_segment(int node) const {
  return nodes_[node].parent != kNone && !nodes_[node].in_sink_tree;
}

}  // namespace annotweave
