#include "rr/envs/tree.hpp"

#include <cmath>
#include <memory>

namespace rr {

void softmax_block(const ParamVector& logits, std::size_t begin, std::size_t count,
                   double* out_probs) {
    double mx = logits[begin];
    for (std::size_t i = 1; i < count; ++i) mx = std::max(mx, logits[begin + i]);
    double z = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        out_probs[i] = std::exp(logits[begin + i] - mx);
        z += out_probs[i];
    }
    for (std::size_t i = 0; i < count; ++i) out_probs[i] /= z;
}

}  // namespace rr

namespace rr::envs {

int TreeMDP::positive_leaves() const {
    int n = 0;
    for (int id : leaf_ids) n += nodes[id].reward > 0.0 ? 1 : 0;
    return n;
}

int TreeMDP::negative_leaves() const {
    return static_cast<int>(leaf_ids.size()) - positive_leaves();
}

void TreeMDP::validate() const {
    if (nodes.empty() || nodes[0].leaf) throw std::invalid_argument("TreeMDP: root must be internal");
    for (int id : leaf_ids) {
        double r = nodes[id].reward;
        if (r != -1.0 && r != 10.0) throw std::invalid_argument("TreeMDP: leaf reward must be -1 or 10");
    }
    if (positive_leaves() < 1) throw std::invalid_argument("TreeMDP: needs a positive leaf");
    if (negative_leaves() <= positive_leaves()) {
        throw std::invalid_argument("TreeMDP: needs more negative than positive leaves");
    }
}

namespace {

int add_leaf(TreeMDP& t, double reward) {
    TreeMDP::Node n;
    n.leaf = true;
    n.reward = reward;
    t.nodes.push_back(n);
    int id = static_cast<int>(t.nodes.size()) - 1;
    t.leaf_ids.push_back(id);
    return id;
}

int add_state(TreeMDP& t) {
    TreeMDP::Node n;
    n.state = t.n_states++;
    t.nodes.push_back(n);
    return static_cast<int>(t.nodes.size()) - 1;
}

}  // namespace

TreeMDP TreeMDP::example_seven_leaf() {
    TreeMDP t;
    t.depth = 5;
    int s1 = add_state(t);
    int s2 = add_state(t);
    int s3 = add_state(t);
    t.nodes[s1].child[0] = s2;
    t.nodes[s1].child[1] = s3;
    t.nodes[s2].child[0] = add_leaf(t, 10.0);
    t.nodes[s2].child[1] = add_leaf(t, -1.0);
    t.nodes[s3].child[0] = add_leaf(t, -1.0);
    int s4 = add_state(t);
    t.nodes[s3].child[1] = s4;
    int s5 = add_state(t);
    t.nodes[s4].child[0] = s5;
    t.nodes[s4].child[1] = add_leaf(t, -1.0);
    int s6 = add_state(t);
    t.nodes[s5].child[0] = s6;
    t.nodes[s5].child[1] = add_leaf(t, 10.0);
    t.nodes[s6].child[0] = add_leaf(t, 10.0);
    t.nodes[s6].child[1] = add_leaf(t, -1.0);
    t.validate();
    return t;
}

TreeMDP TreeMDP::two_leaf() {
    TreeMDP t;
    t.depth = 1;
    int s = add_state(t);
    t.nodes[s].child[0] = add_leaf(t, -1.0);
    t.nodes[s].child[1] = add_leaf(t, 10.0);
    // Deliberately skips validate(): one of each sign.
    return t;
}

namespace {

int build_random(TreeMDP& t, int depth_left, bool force_internal, Rng& rng) {
    bool leaf = depth_left == 0 || (!force_internal && rng.uniform01() < 0.3);
    if (leaf) {
        double reward = rng.uniform01() < 0.3 ? 10.0 : -1.0;
        return add_leaf(t, reward);
    }
    int id = add_state(t);
    int left = build_random(t, depth_left - 1, false, rng);
    int right = build_random(t, depth_left - 1, false, rng);
    t.nodes[id].child[0] = left;
    t.nodes[id].child[1] = right;
    return id;
}

}  // namespace

TreeMDP random_tree(int depth, Rng& rng) {
    if (depth < 2) throw std::invalid_argument("random_tree: depth must be >= 2");
    while (true) {
        TreeMDP t;
        t.depth = depth;
        build_random(t, depth, true, rng);
        if (t.positive_leaves() >= 1 && t.negative_leaves() > t.positive_leaves()) {
            t.validate();
            return t;
        }
    }
}

namespace {

// Root-to-leaf paths as (state, action) pairs, fixed per tree.
struct TreePaths {
    struct Leaf {
        double reward;
        std::vector<std::pair<int, int>> path;
    };
    std::vector<Leaf> leaves;
};

TreePaths build_paths(const TreeMDP& t) {
    TreePaths p;
    std::vector<std::pair<int, int>> path;
    auto walk = [&](auto&& self, int id) -> void {
        const auto& n = t.nodes[id];
        if (n.leaf) {
            p.leaves.push_back({n.reward, path});
            return;
        }
        for (int a = 0; a < 2; ++a) {
            path.emplace_back(n.state, a);
            self(self, n.child[a]);
            path.pop_back();
        }
    };
    walk(walk, 0);
    return p;
}

struct Policies {
    std::vector<double> probs;  // 2 per state
    void compute(const ParamVector& theta, int n_states) {
        probs.resize(2 * static_cast<std::size_t>(n_states));
        for (int s = 0; s < n_states; ++s) {
            softmax_block(theta, 2 * static_cast<std::size_t>(s), 2, probs.data() + 2 * s);
        }
    }
    double prob(int state, int action) const { return probs[2 * state + action]; }
};

}  // namespace

double tree_expected_return(const TreeMDP& t, const ParamVector& theta) {
    if (theta.size() != t.policy_dim()) {
        throw std::invalid_argument("tree_expected_return: policy dimension mismatch");
    }
    Policies pol;
    pol.compute(theta, t.n_states);
    // Probability mass propagated down the tree, no path enumeration.
    double j = 0.0;
    auto walk = [&](auto&& self, int id, double mass) -> void {
        const auto& n = t.nodes[id];
        if (n.leaf) {
            j += mass * n.reward;
            return;
        }
        self(self, n.child[0], mass * pol.prob(n.state, 0));
        self(self, n.child[1], mass * pol.prob(n.state, 1));
    };
    walk(walk, 0, 1.0);
    return j;
}

PolicyProblem tree_problem(const TreeMDP& tree) {
    auto t = std::make_shared<TreeMDP>(tree);
    auto paths = std::make_shared<TreePaths>(build_paths(tree));
    const std::size_t dim = tree.policy_dim();

    auto ret = [t](const ParamVector& theta) { return tree_expected_return(*t, theta); };

    auto ret_grad = [t, paths, dim](const ParamVector& theta) {
        Policies pol;
        pol.compute(theta, t->n_states);
        std::vector<double> g(dim, 0.0);
        for (const auto& leaf : paths->leaves) {
            double mass = leaf.reward;
            for (const auto& [s, a] : leaf.path) mass *= pol.prob(s, a);
            for (const auto& [s, a] : leaf.path) {
                for (int i = 0; i < 2; ++i) {
                    g[2 * s + i] += mass * ((i == a ? 1.0 : 0.0) - pol.prob(s, i));
                }
            }
        }
        return ParamVector(std::move(g));
    };

    auto hess = [t, paths, dim](const ParamVector& theta) {
        Policies pol;
        pol.compute(theta, t->n_states);
        SymMatrix H(dim);
        std::vector<double> dense(dim * dim, 0.0);
        for (const auto& leaf : paths->leaves) {
            double mass = leaf.reward;
            for (const auto& [s, a] : leaf.path) mass *= pol.prob(s, a);
            const auto& path = leaf.path;
            for (std::size_t u = 0; u < path.size(); ++u) {
                auto [s, a] = path[u];
                for (int i = 0; i < 2; ++i) {
                    double ds_i = (i == a ? 1.0 : 0.0) - pol.prob(s, i);
                    // Same-state second derivative.
                    for (int k = 0; k < 2; ++k) {
                        double ds_k = (k == a ? 1.0 : 0.0) - pol.prob(s, k);
                        double curv = ds_i * ds_k -
                                      pol.prob(s, i) * ((i == k ? 1.0 : 0.0) - pol.prob(s, k));
                        dense[(2 * s + i) * dim + (2 * s + k)] += mass * curv;
                    }
                    // Distinct states on the same path.
                    for (std::size_t w = u + 1; w < path.size(); ++w) {
                        auto [s2, a2] = path[w];
                        for (int k = 0; k < 2; ++k) {
                            double ds2_k = (k == a2 ? 1.0 : 0.0) - pol.prob(s2, k);
                            double v = mass * ds_i * ds2_k;
                            dense[(2 * s + i) * dim + (2 * s2 + k)] += v;
                            dense[(2 * s2 + k) * dim + (2 * s + i)] += v;
                        }
                    }
                }
            }
        }
        // Loss is -J.
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t k = i; k < dim; ++k) {
                H.set(i, k, -0.5 * (dense[i * dim + k] + dense[k * dim + i]));
            }
        }
        return H;
    };

    auto entropy = [t](const ParamVector& theta) {
        Policies pol;
        pol.compute(theta, t->n_states);
        double h = 0.0;
        for (int s = 0; s < t->n_states; ++s) {
            for (int i = 0; i < 2; ++i) {
                double p = pol.prob(s, i);
                if (p > 0.0) h -= p * std::log(p);
            }
        }
        return h;
    };

    auto entropy_grad = [t, dim](const ParamVector& theta) {
        Policies pol;
        pol.compute(theta, t->n_states);
        std::vector<double> g(dim, 0.0);
        for (int s = 0; s < t->n_states; ++s) {
            double hs = 0.0;
            for (int i = 0; i < 2; ++i) {
                double p = pol.prob(s, i);
                if (p > 0.0) hs -= p * std::log(p);
            }
            for (int i = 0; i < 2; ++i) {
                double p = pol.prob(s, i);
                g[2 * s + i] = p > 0.0 ? -p * (std::log(p) + hs) : 0.0;
            }
        }
        return ParamVector(std::move(g));
    };

    PolicyProblem pp;
    pp.expected_return = ret;
    pp.return_grad = ret_grad;
    pp.entropy = entropy;
    pp.entropy_grad = entropy_grad;
    pp.base = make_problem(
        dim, [ret](const ParamVector& th) { return -ret(th); },
        [ret_grad](const ParamVector& th) { return ret_grad(th).scaled(-1.0); }, nullptr, hess);
    return pp;
}

int greedy_leaf(const TreeMDP& t, const ParamVector& theta) {
    int id = 0;
    while (!t.nodes[id].leaf) {
        int s = t.nodes[id].state;
        int a = theta[2 * s] >= theta[2 * s + 1] ? 0 : 1;
        id = t.nodes[id].child[a];
    }
    return id;
}

}  // namespace rr::envs
