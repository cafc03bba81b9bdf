#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tpgen/grid_map.hpp"
#include "tpgen/rng.hpp"

namespace tpgen {

struct PlannerConfig {
    double step_size = 5.0;
    int max_iterations = 5000;
    double gamma_rrt = 80.0;       // near-radius shrink coefficient
    double zeta = 50.0;            // near-radius cap
    double goal_tolerance = 1e-6;
    std::uint64_t seed = 0;
    int audit_interval = 0;        // > 0: verify tree invariants every N iterations

    void validate() const;
};

struct TreeNode {
    Vec2 position;
    int parent = -1;               // -1 for the root
    double cost = 0.0;             // path cost from the root
};

class Tree {
  public:
    explicit Tree(const Vec2& root) { nodes_.push_back({root, -1, 0.0}); }

    int size() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int i) const { return nodes_[i]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    int nearest(const Vec2& q) const;
    std::vector<int> near(const Vec2& q, double radius) const;
    int add_node(const Vec2& position, int parent);
    void reparent(int node, int new_parent);  // updates cost and all descendants

    // Root-ward chain of positions starting at `node`.
    std::vector<Vec2> chain_to_root(int node) const;

  private:
    void propagate_cost(int node);

    std::vector<TreeNode> nodes_;
    std::vector<std::vector<int>> children_{std::vector<int>{}};
};

enum class ExtendStatus { Reached, Advanced, Trapped };

struct ExtendResult {
    ExtendStatus status;
    int new_node = -1;             // index of the node added, -1 when Trapped
};

// Near-node radius min(gamma_rrt * (ln n / n)^(1/d), zeta); zeta when n < 2.
double near_radius(int n, int dim, const PlannerConfig& cfg);

// One steer-and-add step toward q. `total_nodes` is the node count across
// both trees, which sets the near radius.
ExtendResult extend(Tree& tree, const Vec2& q, const GridMap& map,
                    const PlannerConfig& cfg, int total_nodes);

// Repeats extend toward q while the result is Advanced.
ExtendResult connect(Tree& tree, const Vec2& q, const GridMap& map,
                     const PlannerConfig& cfg, int total_nodes_other);

// Lowest-cost collision-free parent for q_new among the near set, defaulting
// to q_nearest.
int choose_parent(const Tree& tree, const std::vector<int>& near_set, int q_nearest,
                  const Vec2& q_new, const GridMap& map);

// Re-parents any near node whose path would improve through q_new.
void rewire(Tree& tree, const std::vector<int>& near_set, int q_min, int q_new,
            const GridMap& map);

struct PlannedPath {
    std::vector<Vec2> waypoints;   // ordered q_start -> q_end
    double cost = 0.0;
    int nodes_start_tree = 0;
    int nodes_goal_tree = 0;
    int connections = 0;
};

struct PlanFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bidirectional RRT*-Connect. Runs all max_iterations, records every tree
// connection, and returns the path through the minimum-cost connection.
PlannedPath plan(const GridMap& map, const Vec2& q_start, const Vec2& q_end,
                 const PlannerConfig& cfg);

// Invariant audit used by tests and by plan() when audit_interval > 0:
// single root, acyclic parents, cost(child) = cost(parent) + edge length,
// every edge obstacle-free. Throws std::logic_error on violation.
void audit_tree(const Tree& tree, const GridMap& map);

}  // namespace tpgen
