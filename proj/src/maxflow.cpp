#include "msre/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "msre/common.hpp"
#include "msre/summation.hpp"

namespace msre {

MaxFlow::MaxFlow(int64_t num_nodes) : n_(num_nodes) {
    require(num_nodes >= 2, "flow network needs at least two nodes");
    require(num_nodes <= (int64_t{1} << 31), "node count exceeds index width");
    adj_.resize(static_cast<size_t>(num_nodes));
}

void MaxFlow::add_edge(int64_t from, int64_t to, double cap) {
    require(!solved_, "network is frozen after solve");
    require(from >= 0 && from < n_ && to >= 0 && to < n_, "arc endpoint out of range");
    require(cap >= 0.0, "arc capacity must be nonnegative");
    const int32_t idx = static_cast<int32_t>(to_.size());
    to_.push_back(static_cast<int32_t>(to));
    residual_.push_back(cap);
    cap0_.push_back(cap);
    adj_[static_cast<size_t>(from)].push_back(idx);
    to_.push_back(static_cast<int32_t>(from));
    residual_.push_back(0.0);
    cap0_.push_back(0.0);
    adj_[static_cast<size_t>(to)].push_back(idx + 1);
}

bool MaxFlow::bfs(int64_t s, int64_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int32_t> queue;
    level_[static_cast<size_t>(s)] = 0;
    queue.push_back(static_cast<int32_t>(s));
    while (!queue.empty()) {
        const int32_t v = queue.front();
        queue.pop_front();
        for (int32_t a : adj_[static_cast<size_t>(v)]) {
            const int32_t u = to_[static_cast<size_t>(a)];
            if (residual_[static_cast<size_t>(a)] > 0.0 && level_[static_cast<size_t>(u)] < 0) {
                level_[static_cast<size_t>(u)] = level_[static_cast<size_t>(v)] + 1;
                queue.push_back(u);
            }
        }
    }
    return level_[static_cast<size_t>(t)] >= 0;
}

double MaxFlow::blocking_flow(int64_t s, int64_t t) {
    // iterative DFS over the level graph; path recorded as arc indices
    double total = 0.0;
    std::vector<int32_t> path;
    path.reserve(64);
    int64_t v = s;
    while (true) {
        if (v == t) {
            double bottleneck = std::numeric_limits<double>::infinity();
            for (int32_t a : path) {
                bottleneck = std::min(bottleneck, residual_[static_cast<size_t>(a)]);
            }
            int64_t retreat_to = static_cast<int64_t>(path.size());
            for (int64_t i = 0; i < static_cast<int64_t>(path.size()); ++i) {
                const size_t a = static_cast<size_t>(path[static_cast<size_t>(i)]);
                residual_[a] -= bottleneck;
                residual_[a ^ 1] += bottleneck;
                if (residual_[a] <= 0.0 && i < retreat_to) retreat_to = i;
            }
            total += bottleneck;
            ++augmentations_;
            // back up to the first saturated arc
            path.resize(static_cast<size_t>(retreat_to));
            v = path.empty() ? s : to_[static_cast<size_t>(path.back())];
            continue;
        }
        const auto& arcs = adj_[static_cast<size_t>(v)];
        int32_t& it = iter_[static_cast<size_t>(v)];
        bool advanced = false;
        while (it < static_cast<int32_t>(arcs.size())) {
            const int32_t a = arcs[static_cast<size_t>(it)];
            const int32_t u = to_[static_cast<size_t>(a)];
            if (residual_[static_cast<size_t>(a)] > 0.0 &&
                level_[static_cast<size_t>(u)] == level_[static_cast<size_t>(v)] + 1) {
                path.push_back(a);
                v = u;
                advanced = true;
                break;
            }
            ++it;
        }
        if (advanced) continue;
        // dead end: prune this node from the level graph and retreat
        level_[static_cast<size_t>(v)] = -1;
        if (v == s) break;
        path.pop_back();
        v = path.empty() ? s : to_[static_cast<size_t>(path.back())];
    }
    return total;
}

double MaxFlow::solve(int64_t s, int64_t t) {
    require(!solved_, "network already solved");
    require(s != t && s >= 0 && s < n_ && t >= 0 && t < n_, "bad terminals");
    solved_ = true;
    level_.assign(static_cast<size_t>(n_), -1);
    iter_.assign(static_cast<size_t>(n_), 0);
    PairwiseAccumulator flow;
    while (bfs(s, t)) {
        ++phases_;
        std::fill(iter_.begin(), iter_.end(), 0);
        flow.add(blocking_flow(s, t));
        // blocking_flow wipes levels along dead ends; rebuild via bfs
    }
    // final bfs already left reachability in level_
    return flow.total();
}

bool MaxFlow::source_side(int64_t node) const {
    check(solved_, "cut queried before solve");
    return level_[static_cast<size_t>(node)] >= 0;
}

double MaxFlow::cut_capacity() const {
    check(solved_, "cut queried before solve");
    PairwiseAccumulator acc;
    for (int64_t v = 0; v < n_; ++v) {
        if (level_[static_cast<size_t>(v)] < 0) continue;
        for (int32_t a : adj_[static_cast<size_t>(v)]) {
            if (cap0_[static_cast<size_t>(a)] <= 0.0) continue;
            const int32_t u = to_[static_cast<size_t>(a)];
            if (level_[static_cast<size_t>(u)] < 0) acc.add(cap0_[static_cast<size_t>(a)]);
        }
    }
    return acc.total();
}

}  // namespace msre
