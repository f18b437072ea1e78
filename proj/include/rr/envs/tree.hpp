#pragma once

#include <vector>

#include "rr/policy.hpp"

namespace rr::envs {

/// Binary-tree MDP with terminal rewards in {-1, +10}. Internal nodes are
/// decision states with one softmax pair of logits each; leaves carry the
/// reward. Invariants: strictly more -1 leaves than +10 leaves, and at least
/// one +10 leaf.
struct TreeMDP {
    struct Node {
        bool leaf = false;
        double reward = 0.0;
        int child[2] = {-1, -1};  // [left, right], internal nodes only
        int state = -1;           // decision-state index, internal nodes only
    };

    int depth = 0;
    std::vector<Node> nodes;  // nodes[0] is the root
    int n_states = 0;
    std::vector<int> leaf_ids;

    std::size_t policy_dim() const { return 2 * static_cast<std::size_t>(n_states); }
    int positive_leaves() const;
    int negative_leaves() const;
    void validate() const;

    /// The worked seven-leaf example: six decision nodes, three +10 leaves.
    static TreeMDP example_seven_leaf();
    /// Depth-1 stub with rewards (-1, +10); handy in tests.
    static TreeMDP two_leaf();
};

/// Random tree: nodes above the maximum depth close as leaves with
/// probability 0.3, every node at the maximum depth is a leaf, leaf reward is
/// +10 with probability 0.3 and -1 otherwise. Resamples until the TreeMDP
/// invariants hold.
TreeMDP random_tree(int depth, Rng& rng);

/// Expected return of the softmax policy: sum over leaves of reward times the
/// probability of reaching that leaf.
double tree_expected_return(const TreeMDP& t, const ParamVector& theta);

/// The tree as an optimization problem (loss = -J) with analytic gradient,
/// Hessian and per-state entropy.
PolicyProblem tree_problem(const TreeMDP& t);

/// Leaf reached by always taking the higher-probability action.
int greedy_leaf(const TreeMDP& t, const ParamVector& theta);

}  // namespace rr::envs
