#include "tpgen/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tpgen {

void PlannerConfig::validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(gamma_rrt > 0.0)) throw std::invalid_argument("gamma_rrt must be > 0");
    if (zeta < 0.0) throw std::invalid_argument("zeta must be >= 0");
    if (goal_tolerance < 0.0) throw std::invalid_argument("goal_tolerance must be >= 0");
}

int Tree::nearest(const Vec2& q) const {
    int best = 0;
    double best_d2 = (nodes_[0].position - q).squared_norm();
    for (int i = 1; i < size(); ++i) {
        const double d2 = (nodes_[i].position - q).squared_norm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

std::vector<int> Tree::near(const Vec2& q, double radius) const {
    std::vector<int> out;
    const double r2 = radius * radius;
    for (int i = 0; i < size(); ++i)
        if ((nodes_[i].position - q).squared_norm() <= r2) out.push_back(i);
    return out;
}

int Tree::add_node(const Vec2& position, int parent) {
    TreeNode node;
    node.position = position;
    node.parent = parent;
    node.cost = nodes_[parent].cost + distance(nodes_[parent].position, position);
    nodes_.push_back(node);
    children_.emplace_back();
    const int idx = size() - 1;
    children_[parent].push_back(idx);
    return idx;
}

void Tree::reparent(int node, int new_parent) {
    const int old_parent = nodes_[node].parent;
    auto& siblings = children_[old_parent];
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    nodes_[node].parent = new_parent;
    children_[new_parent].push_back(node);
    propagate_cost(node);
}

void Tree::propagate_cost(int node) {
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const TreeNode& parent = nodes_[nodes_[i].parent];
        nodes_[i].cost = parent.cost + distance(parent.position, nodes_[i].position);
        for (int child : children_[i]) stack.push_back(child);
    }
}

std::vector<Vec2> Tree::chain_to_root(int node) const {
    std::vector<Vec2> chain;
    for (int i = node; i != -1; i = nodes_[i].parent) chain.push_back(nodes_[i].position);
    return chain;
}

double near_radius(int n, int dim, const PlannerConfig& cfg) {
    if (n < 2) return cfg.zeta;
    const double shrink = cfg.gamma_rrt * std::pow(std::log(n) / n, 1.0 / dim);
    return std::min(shrink, cfg.zeta);
}

namespace {

// Steps from `from` toward `to` by at most step_size, landing exactly on
// `to` when it is within reach.
Vec2 steer(const Vec2& to, const Vec2& from, double step_size) {
    const Vec2 delta = to - from;
    const double d = delta.norm();
    if (d <= step_size) return to;
    return from + delta * (step_size / d);
}

}  // namespace

ExtendResult extend(Tree& tree, const Vec2& q, const GridMap& map,
                    const PlannerConfig& cfg, int total_nodes) {
    const int q_nearest = tree.nearest(q);
    const Vec2 q_new = steer(q, tree.node(q_nearest).position, cfg.step_size);
    if (!obstacle_free(tree.node(q_nearest).position, q_new, map))
        return {ExtendStatus::Trapped, -1};

    const double radius = near_radius(total_nodes, 2, cfg);
    const std::vector<int> near_set = tree.near(q_new, radius);
    const int q_min = choose_parent(tree, near_set, q_nearest, q_new, map);
    const int idx = tree.add_node(q_new, q_min);
    rewire(tree, near_set, q_min, idx, map);

    if (distance(q_new, q) <= cfg.goal_tolerance) return {ExtendStatus::Reached, idx};
    return {ExtendStatus::Advanced, idx};
}

ExtendResult connect(Tree& tree, const Vec2& q, const GridMap& map,
                     const PlannerConfig& cfg, int total_nodes_other) {
    ExtendResult result{ExtendStatus::Advanced, -1};
    do {
        result = extend(tree, q, map, cfg, total_nodes_other + tree.size());
    } while (result.status == ExtendStatus::Advanced);
    return result;
}

int choose_parent(const Tree& tree, const std::vector<int>& near_set, int q_nearest,
                  const Vec2& q_new, const GridMap& map) {
    int q_min = q_nearest;
    double c_min = tree.node(q_nearest).cost + distance(q_new, tree.node(q_nearest).position);
    for (int q_near : near_set) {
        if (q_near == q_nearest) continue;
        const double c = tree.node(q_near).cost + distance(q_new, tree.node(q_near).position);
        if (c < c_min && obstacle_free(tree.node(q_near).position, q_new, map)) {
            q_min = q_near;
            c_min = c;
        }
    }
    return q_min;
}

void rewire(Tree& tree, const std::vector<int>& near_set, int q_min, int q_new,
            const GridMap& map) {
    for (int q_near : near_set) {
        if (q_near == q_min) continue;
        const double through = tree.node(q_new).cost +
                               distance(tree.node(q_new).position, tree.node(q_near).position);
        if (through < tree.node(q_near).cost &&
            obstacle_free(tree.node(q_near).position, tree.node(q_new).position, map))
            tree.reparent(q_near, q_new);
    }
}

void audit_tree(const Tree& tree, const GridMap& map) {
    const int n = tree.size();
    for (int i = 0; i < n; ++i) {
        const TreeNode& node = tree.node(i);
        if (i == 0) {
            if (node.parent != -1 || node.cost != 0.0)
                throw std::logic_error("tree root must have no parent and zero cost");
            continue;
        }
        if (node.parent < 0 || node.parent >= n)
            throw std::logic_error("node parent out of range");
        // Acyclicity: walk to the root, bounded by the node count.
        int steps = 0;
        for (int j = i; j != -1; j = tree.node(j).parent)
            if (++steps > n) throw std::logic_error("cycle in tree");
        const TreeNode& parent = tree.node(node.parent);
        const double expect = parent.cost + distance(parent.position, node.position);
        if (std::abs(node.cost - expect) > 1e-9)
            throw std::logic_error("node cost inconsistent with parent");
        if (!obstacle_free(parent.position, node.position, map))
            throw std::logic_error("tree edge crosses an obstacle");
    }
}

PlannedPath plan(const GridMap& map, const Vec2& q_start, const Vec2& q_end,
                 const PlannerConfig& cfg) {
    cfg.validate();
    map.validate();
    if (!map.is_free(q_start)) throw std::invalid_argument("q_start is not in free space");
    if (!map.is_free(q_end)) throw std::invalid_argument("q_end is not in free space");

    if (distance(q_start, q_end) == 0.0)
        return PlannedPath{{q_start}, 0.0, 1, 1, 0};

    Rng rng(cfg.seed);
    Tree tree_a(q_start);
    Tree tree_b(q_end);
    bool a_is_start = true;

    // (index in start tree, index in goal tree) for every junction found.
    std::vector<std::pair<int, int>> links;

    for (int k = 0; k < cfg.max_iterations; ++k) {
        Vec2 q_rand;
        int tries = 0;
        do {
            q_rand = {rng.uniform(0.0, map.width), rng.uniform(0.0, map.height)};
            if (++tries > 100000)
                throw PlanFailure("could not sample free space; map looks fully blocked");
        } while (!map.is_free(q_rand));

        const ExtendResult ext = extend(tree_a, q_rand, map, cfg,
                                        tree_a.size() + tree_b.size());
        if (ext.status != ExtendStatus::Trapped) {
            const Vec2 q_new = tree_a.node(ext.new_node).position;
            const ExtendResult con = connect(tree_b, q_new, map, cfg, tree_a.size());
            if (con.status == ExtendStatus::Reached) {
                if (a_is_start) links.emplace_back(ext.new_node, con.new_node);
                else links.emplace_back(con.new_node, ext.new_node);
            }
        }
        std::swap(tree_a, tree_b);
        a_is_start = !a_is_start;

        if (cfg.audit_interval > 0 && (k + 1) % cfg.audit_interval == 0) {
            audit_tree(tree_a, map);
            audit_tree(tree_b, map);
        }
    }

    const Tree& start_tree = a_is_start ? tree_a : tree_b;
    const Tree& goal_tree = a_is_start ? tree_b : tree_a;

    if (links.empty())
        throw PlanFailure("no connection after " + std::to_string(cfg.max_iterations) +
                          " iterations (explored " + std::to_string(start_tree.size()) +
                          " start-tree and " + std::to_string(goal_tree.size()) +
                          " goal-tree nodes)");

    // Connection costs are evaluated on the final trees so rewiring that
    // happened after a junction was recorded is taken into account.
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(links.size()); ++i) {
        const double c = start_tree.node(links[i].first).cost +
                         goal_tree.node(links[i].second).cost;
        if (c < best_cost) {
            best_cost = c;
            best = i;
        }
    }

    std::vector<Vec2> start_half = start_tree.chain_to_root(links[best].first);
    std::reverse(start_half.begin(), start_half.end());
    const std::vector<Vec2> goal_half = goal_tree.chain_to_root(links[best].second);

    PlannedPath path;
    path.waypoints = std::move(start_half);
    // The junction node lives in both trees; keep one copy.
    for (std::size_t i = 1; i < goal_half.size(); ++i) path.waypoints.push_back(goal_half[i]);
    path.cost = best_cost;
    path.nodes_start_tree = start_tree.size();
    path.nodes_goal_tree = goal_tree.size();
    path.connections = static_cast<int>(links.size());
    return path;
}

}  // namespace tpgen
