#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

#include "rr/envs/tree.hpp"
#include "rr/mis.hpp"
#include "rr/ridge_exact.hpp"

using namespace rr;
using namespace rr::envs;

namespace {

Problem quadratic_problem(const SymMatrix& A) {
    auto H = std::make_shared<SymMatrix>(A);
    return make_problem(
        A.dim(), [H](const ParamVector& t) { return 0.5 * H->quad_form(t); },
        [H](const ParamVector& t) { return H->apply(t); }, nullptr,
        [H](const ParamVector&) { return *H; });
}

// Two-dimensional surface with a local maximum at the origin; the two
// curvature scales there are -2 and -4.
Problem hat_surface() {
    auto loss = [](const ParamVector& t) {
        double x = t[0], y = t[1];
        return -(x * x) - 2.0 * (y * y) + 0.25 * (x * x * x * x + y * y * y * y);
    };
    auto grad = [](const ParamVector& t) {
        double x = t[0], y = t[1];
        return ParamVector({-2.0 * x + x * x * x, -4.0 * y + y * y * y});
    };
    auto hess = [](const ParamVector& t) {
        double x = t[0], y = t[1];
        SymMatrix H(2);
        H.set(0, 0, -2.0 + 3.0 * x * x);
        H.set(1, 1, -4.0 + 3.0 * y * y);
        return H;
    };
    return make_problem(2, loss, grad, hess ? nullptr : nullptr, hess);
}

}  // namespace

TEST_CASE("archive order") {
    auto entry = [](int tag) {
        ArchiveEntry e;
        e.fingerprint = Fingerprint({tag});
        return e;
    };
    std::deque<ArchiveEntry> archive;
    archive.push_back(entry(1));
    archive.push_back(entry(2));
    archive.push_back(entry(3));

    std::deque<ArchiveEntry> bfs = archive;
    CHECK(choose_from_archive(bfs, ArchiveOrder::BFS).fingerprint == Fingerprint({1}));
    CHECK(bfs.size() == 2);
    CHECK(bfs.front().fingerprint == Fingerprint({2}));

    std::deque<ArchiveEntry> dfs = archive;
    CHECK(choose_from_archive(dfs, ArchiveOrder::DFS).fingerprint == Fingerprint({3}));
    CHECK(dfs.size() == 2);

    std::deque<ArchiveEntry> empty;
    CHECK_THROWS_AS(choose_from_archive(empty, ArchiveOrder::BFS), std::runtime_error);
}

TEST_CASE("interleaved pushes and pops match a reference deque") {
    Rng rng(6);
    std::deque<ArchiveEntry> archive;
    std::deque<int> reference;
    int next_tag = 0;
    for (int step = 0; step < 500; ++step) {
        bool push = reference.empty() || rng.uniform01() < 0.55;
        if (push) {
            ArchiveEntry e;
            e.fingerprint = Fingerprint({next_tag});
            archive.push_back(std::move(e));
            reference.push_back(next_tag);
            ++next_tag;
        } else {
            bool bfs = rng.uniform01() < 0.5;
            int got = choose_from_archive(archive, bfs ? ArchiveOrder::BFS : ArchiveOrder::DFS)
                          .fingerprint.entries[0];
            int want;
            if (bfs) {
                want = reference.front();
                reference.pop_front();
            } else {
                want = reference.back();
                reference.pop_back();
            }
            REQUIRE(got == want);
        }
    }
}

TEST_CASE("stop rule") {
    ExactRRConfig cfg;
    cfg.delta_break = 0.95;
    cfg.patience = 10;

    RideWindow strictly_improving;
    for (int i = 0; i < 30; ++i) strictly_improving.push(1.0 - 0.01 * i);
    CHECK_FALSE(end_ride(strictly_improving, 1.0, cfg));
    CHECK(end_ride(strictly_improving, 0.90, cfg));

    RideWindow flat;
    flat.push(1.0);
    for (int i = 0; i < cfg.patience; ++i) {
        flat.push(1.0);
    }
    CHECK(end_ride(flat, 1.0, cfg));
}

TEST_CASE("ridges from a quadratic with one negative direction") {
    SymMatrix A(2);
    A.set(0, 0, 2.0);
    A.set(1, 1, -1.0);
    Problem p = quadratic_problem(A);
    auto entries = get_ridges(p, ParamVector({0.1, -0.2}), 6);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].fingerprint == Fingerprint({1}));
    CHECK(entries[1].fingerprint == Fingerprint({-1}));
    CHECK(entries[0].eigenvalue == doctest::Approx(-1.0));
    CHECK(std::abs(std::abs(entries[0].ridge[1]) - 1.0) <= 1e-10);
    CHECK(distance(entries[0].ridge, entries[1].ridge.scaled(-1.0)) <= 1e-12);
}

TEST_CASE("positive definite Hessians yield no ridges") {
    SymMatrix A(3);
    A.set(0, 0, 1.0);
    A.set(1, 1, 2.0);
    A.set(2, 2, 3.0);
    Problem p = quadratic_problem(A);
    CHECK(get_ridges(p, ParamVector(3, 0.0), 6).empty());
}

TEST_CASE("repeated eigenvalues collapse to one cluster representative") {
    // Triple eigenvalue -1 plus a positive direction.
    SymMatrix A(4);
    A.set(0, 0, -1.0);
    A.set(1, 1, -1.0);
    A.set(2, 2, -1.0);
    A.set(3, 3, 2.0);
    Problem p = quadratic_problem(A);
    auto entries = get_ridges(p, ParamVector(4, 0.0), 6);
    REQUIRE(entries.size() == 2);  // one cluster, both directions
    CHECK(entries[0].eigenvalue == doctest::Approx(-1.0));

    // The same structure arises from an equivalent-set construction with
    // N = 4 singleton sets: the difference modes share one eigenvalue with
    // multiplicity 3. Negate the loss so that cluster is a descent ridge.
    Rng rng(12);
    auto spec = NEquivalentSpec::contiguous(4, 1, 6);
    Problem q = make_n_equivalent_test_problem(spec, rng);
    ParamVector theta = symmetric_point(spec, rng);
    Problem neg = make_problem(
        q.dim, [q](const ParamVector& t) { return -q.loss(t); },
        [q](const ParamVector& t) { return q.grad(t).scaled(-1.0); }, nullptr,
        [q](const ParamVector& t) {
            SymMatrix H = q.full_hessian(t);
            SymMatrix out(H.dim());
            for (std::size_t i = 0; i < H.dim(); ++i)
                for (std::size_t j = i; j < H.dim(); ++j) out.set(i, j, -H.at(i, j));
            return out;
        });
    Spectrum sp = jacobi_eigh(neg.full_hessian(theta));
    std::size_t neg_count = 0;
    for (double v : sp.values) neg_count += v < -1e-9 ? 1 : 0;
    REQUIRE(neg_count >= 3);
    auto ridge_entries = get_ridges(neg, theta, 6);
    std::vector<double> neg_vals(sp.values.end() - neg_count, sp.values.end());
    std::sort(neg_vals.begin(), neg_vals.end(), std::greater<double>());
    auto clusters = cluster_eigenvalues(neg_vals);
    CHECK(ridge_entries.size() == 2 * clusters.size());
    CHECK(ridge_entries.size() < 2 * neg_count);  // the triple collapsed
}

TEST_CASE("ridge update is stable where the Hessian is constant") {
    SymMatrix A(3);
    A.set(0, 0, -2.0);
    A.set(1, 1, 1.0);
    A.set(2, 2, 3.0);
    Problem p = quadratic_problem(A);
    ParamVector e({1.0, 0.0, 0.0});

    auto [pair0, ov0] = update_ridge_exact(p, ParamVector({0.4, 0.1, 0.0}), e);
    CHECK(ov0 == doctest::Approx(1.0));
    CHECK(pair0.value == doctest::Approx(-2.0));
    CHECK(dot(pair0.vector, e) >= 0.0);

    // Any step keeps overlap 1 on a quadratic.
    auto res = adaptive_step(p, ParamVector({0.4, 0.1, 0.0}), e, 0.5, 1e-8, 0.95);
    CHECK(res.alpha_used == doctest::Approx(0.5));
    CHECK(res.overlap == doctest::Approx(1.0));
    CHECK_FALSE(res.alpha_floor);
}

TEST_CASE("ridge update tracks the continuation on the tree") {
    TreeMDP t = TreeMDP::example_seven_leaf();
    PolicyProblem pp = tree_problem(t);
    ParamVector mis(t.policy_dim(), 0.0);
    auto entries = get_ridges(pp.base, mis, 1);
    REQUIRE(!entries.empty());
    const auto& e = entries[0];
    ParamVector stepped = mis.minus(e.ridge.scaled(0.01));
    auto [pair, overlap] = update_ridge_exact(pp.base, stepped, e.ridge);
    CHECK(overlap >= 0.99);
    CHECK(pair.value < 0.0);
}

TEST_CASE("adaptive step halves on a fast-rotating eigenbasis") {
    // The cubic coupling feeds the off-diagonal with x, so stepping along the
    // x eigenvector rotates the small-gap eigenbasis in proportion to alpha.
    auto loss = [](const ParamVector& t) {
        double x = t[0], y = t[1];
        return -0.6 * x * x - 0.4 * y * y + 0.5 * x * x * y;
    };
    auto grad = [](const ParamVector& t) {
        double x = t[0], y = t[1];
        return ParamVector({-1.2 * x + x * y, -0.8 * y + 0.5 * x * x});
    };
    auto hess = [](const ParamVector& t) {
        double x = t[0], y = t[1];
        SymMatrix H(2);
        H.set(0, 0, -1.2 + y);
        H.set(1, 1, -0.8);
        H.set(0, 1, x);
        return H;
    };
    Problem p = make_problem(2, loss, grad, nullptr, hess);
    ParamVector theta(2, 0.0);
    auto start = get_ridges(p, theta, 1);
    REQUIRE(start.size() == 2);
    auto res = adaptive_step(p, theta, start[0].ridge, 1.0, 1e-8, 0.95);
    CHECK(res.alpha_used < 1.0);
    CHECK(res.alpha_used >= 0.06);
    CHECK(res.overlap >= 0.95);
}

TEST_CASE("config validation") {
    ExactRRConfig cfg;
    cfg.alpha_init = 1e-9;
    cfg.alpha_min = 1e-8;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    ExactRRConfig bad_delta;
    bad_delta.delta_break = 1.5;
    CHECK_THROWS_AS(bad_delta.validate(), std::invalid_argument);
}

TEST_CASE("four initial paths from a two-dimensional maximum") {
    Problem p = hat_surface();
    ExactRRConfig cfg;
    cfg.alpha_init = 0.25;
    cfg.n_ridges = 2;
    cfg.t_budget = 4000;
    cfg.patience = 10;

    auto seed = get_ridges(p, ParamVector(2, 0.0), cfg.n_ridges);
    CHECK(seed.size() == 4);

    RunRecord rec = run_exact_rr(p, ParamVector(2, 0.0), cfg);
    std::set<std::string> first_rides;
    for (std::size_t i = 0; i < std::min<std::size_t>(4, rec.rides.size()); ++i) {
        first_rides.insert(rec.rides[i].fingerprint.str());
    }
    CHECK(first_rides == std::set<std::string>({"+1", "-1", "+2", "-2"}));

    // Every terminal point of this surface is a strict local minimum.
    for (const auto* sol : rec.solutions()) {
        CHECK(norm(p.grad(sol->theta_end)) <= 1e-4);
    }
    CHECK(rec.steps_used <= cfg.t_budget);
}

TEST_CASE("a convex start is rejected") {
    SymMatrix A(2);
    A.set(0, 0, 1.0);
    A.set(1, 1, 2.0);
    Problem p = quadratic_problem(A);
    ExactRRConfig cfg;
    CHECK_THROWS_AS(run_exact_rr(p, ParamVector(2, 0.0), cfg), std::invalid_argument);
}

TEST_CASE("fingerprints of terminal solutions are unique and budget is respected") {
    Rng rng(44);
    TreeMDP t = random_tree(4, rng);
    PolicyProblem pp = tree_problem(t);
    ExactRRConfig cfg;
    cfg.alpha_init = 1.0;
    cfg.n_ridges = 6;
    cfg.t_budget = 20000;

    RunRecord rec = run_exact_rr(pp.base, ParamVector(t.policy_dim(), 0.0), cfg);
    std::set<std::string> prints;
    long ride_steps = 0;
    for (const auto& ride : rec.rides) {
        ride_steps += ride.steps;
        if (ride.terminal) {
            CHECK(prints.insert(ride.fingerprint.str()).second);
        }
    }
    CHECK(ride_steps <= cfg.t_budget);
    CHECK(rec.steps_used <= cfg.t_budget);
    CHECK(!rec.solutions().empty());
}

TEST_CASE("baselines respect their budget and kinds") {
    Rng rng(7);
    TreeMDP t = random_tree(4, rng);
    PolicyProblem pp = tree_problem(t);
    ParamVector mis(t.policy_dim(), 0.0);

    RunRecord zero = run_baselines(pp.base, mis, 0, rng, BaselineKind::gd_random);
    CHECK(zero.rides.empty());
    CHECK(zero.steps_used == 0);

    for (auto kind : {BaselineKind::gd_random, BaselineKind::gd_mis, BaselineKind::random_vec_mis,
                      BaselineKind::rand_ridge_plus, BaselineKind::fixed_alpha_update_ridge,
                      BaselineKind::fixed_alpha_fixed_ridge}) {
        Rng run_rng(101);
        RunRecord rec = run_baselines(pp.base, mis, 2000, run_rng, kind);
        CHECK(rec.steps_used <= 2000);
        CHECK(!rec.rides.empty());
    }

    CHECK_THROWS_AS(baseline_kind_from_string("nope"), std::invalid_argument);
    CHECK(baseline_kind_from_string("gd_mis") == BaselineKind::gd_mis);
}
