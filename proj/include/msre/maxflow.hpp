#pragma once

#include <cstdint>
#include <vector>

namespace msre {

// Dinic max-flow on double capacities. Deterministic: arcs are explored in
// insertion order. Saturation is exact (the bottleneck arc's residual becomes
// 0.0), so strict positive comparisons terminate without tolerance knobs.
class MaxFlow {
  public:
    explicit MaxFlow(int64_t num_nodes);

    // directed arc with a zero-capacity reverse companion at index^1
    void add_edge(int64_t from, int64_t to, double cap);

    double solve(int64_t s, int64_t t);

    // after solve: node reachable from s in the residual graph. This is the
    // smallest source side among minimum cuts.
    bool source_side(int64_t node) const;

    // capacity of the cut induced by source_side; equals the flow value up to
    // rounding and certifies optimality
    double cut_capacity() const;

    int64_t augmentations() const { return augmentations_; }
    int64_t phases() const { return phases_; }
    int64_t arc_count() const { return static_cast<int64_t>(to_.size()); }

  private:
    bool bfs(int64_t s, int64_t t);
    double blocking_flow(int64_t s, int64_t t);

    int64_t n_;
    std::vector<int32_t> to_;
    std::vector<double> residual_;
    std::vector<double> cap0_;
    std::vector<std::vector<int32_t>> adj_;
    std::vector<int32_t> level_;
    std::vector<int32_t> iter_;
    int64_t augmentations_ = 0;
    int64_t phases_ = 0;
    bool solved_ = false;
};

}  // namespace msre
