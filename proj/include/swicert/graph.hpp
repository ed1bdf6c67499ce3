#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "swicert/error.hpp"

namespace swicert {

/// 1-based system index into the family.
using SystemIndex = int;

/// Directed transition k -> l.
struct Edge {
    SystemIndex from = 0;
    SystemIndex to = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline std::string to_string(const Edge& e) { return std::to_string(e.from) + "->" + std::to_string(e.to); }

/// Admissible transitions on the vertex set {1..N}; no self-loops.
class TransitionGraph {
public:
    TransitionGraph() = default;

    TransitionGraph(int vertex_count, const std::vector<Edge>& edges) : vertex_count_(vertex_count) {
        if (vertex_count <= 0) fail(ErrorKind::Configuration, "graph needs at least one vertex");
        for (const Edge& e : edges) {
            if (e.from < 1 || e.from > vertex_count || e.to < 1 || e.to > vertex_count)
                fail(ErrorKind::Configuration, "edge " + to_string(e) + " references an undeclared vertex");
            if (e.from == e.to) fail(ErrorKind::Configuration, "self-loop " + to_string(e) + " is not a switch");
            edges_.insert(e);
        }
    }

    /// Complete digraph on {1..n}.
    static TransitionGraph complete(int n) {
        std::vector<Edge> es;
        for (int k = 1; k <= n; ++k)
            for (int l = 1; l <= n; ++l)
                if (k != l) es.push_back({k, l});
        return TransitionGraph(n, es);
    }

    [[nodiscard]] int vertex_count() const noexcept { return vertex_count_; }
    [[nodiscard]] const std::set<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] bool has_edge(SystemIndex k, SystemIndex l) const { return edges_.contains({k, l}); }
    [[nodiscard]] bool has_vertex(SystemIndex k) const noexcept { return k >= 1 && k <= vertex_count_; }

    /// Destinations reachable from `k`, ascending.
    [[nodiscard]] std::vector<SystemIndex> successors(SystemIndex k) const {
        std::vector<SystemIndex> out;
        for (auto it = edges_.lower_bound({k, 0}); it != edges_.end() && it->from == k; ++it) out.push_back(it->to);
        return out;
    }

    [[nodiscard]] bool every_vertex_has_successor() const {
        for (int k = 1; k <= vertex_count_; ++k)
            if (successors(k).empty()) return false;
        return true;
    }

private:
    int vertex_count_ = 0;
    std::set<Edge> edges_;
};

} // namespace swicert
