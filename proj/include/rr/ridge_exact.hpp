#pragma once

#include <cmath>
#include <deque>
#include <string>

#include "rr/problem.hpp"

namespace rr {

/// Search-path identifier: one signed entry per branching point. |entry| is
/// the 1-based eigenvalue-cluster rank at that branch (1 = most negative),
/// the sign picks one of the two opposite directions along the eigenvector.
struct Fingerprint {
    std::vector<int> entries;

    Fingerprint() = default;
    explicit Fingerprint(std::vector<int> e) : entries(std::move(e)) {}

    Fingerprint extended(int signed_rank) const {
        Fingerprint f = *this;
        f.entries.push_back(signed_rank);
        return f;
    }
    /// Ranks with signs dropped; cross-run grouping key.
    std::vector<int> unsigned_key() const {
        std::vector<int> k(entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) k[i] = std::abs(entries[i]);
        return k;
    }
    std::string str() const;
    bool operator==(const Fingerprint& o) const { return entries == o.entries; }
    bool operator<(const Fingerprint& o) const { return entries < o.entries; }
};

struct ArchiveEntry {
    Fingerprint fingerprint;
    ParamVector theta;
    ParamVector ridge;        // unit vector
    double eigenvalue = 0.0;  // negative at creation
};

enum class ArchiveOrder { BFS, DFS };

struct ExactRRConfig {
    double alpha_init = 0.5;
    double delta_break = 0.95;
    int n_ridges = 6;          // clusters per branch
    long t_budget = 100000;    // total ridge steps
    ArchiveOrder order = ArchiveOrder::BFS;
    double alpha_min = 1e-8;
    int patience = 10;         // steps without loss improvement before a ride ends
    double improve_tol = 1e-6; // relative loss decrease that counts as improvement
    bool polish = true;        // gradient-descent cleanup at terminal points
    int polish_steps = 200;
    // Re-branching from a point this close (L2) to an earlier branch point is
    // skipped: identical inputs would replay identical rides. 0 disables.
    double branch_dedup_radius = 0.25;
    bool log_steps = false;

    void validate() const;
};

struct StepLog {
    std::string fingerprint;
    long step = 0;          // global step index
    double loss = 0.0;
    double eigenvalue = 0.0;
    double overlap = 0.0;
    double alpha = 0.0;
};

struct RideLog {
    Fingerprint fingerprint;
    long steps = 0;
    double final_loss = 0.0;
    double final_eigenvalue = 0.0;
    double final_overlap = 0.0;
    std::string break_reason;  // ridge_break | stagnation | budget | alpha_floor
    bool terminal = false;     // counted as a solution
    ParamVector theta_end;
};

/// Trajectory log shared by the exact engine, the baselines and the
/// large-scale engines.
struct RunRecord {
    std::vector<RideLog> rides;
    std::vector<StepLog> steps;  // filled only when log_steps is on
    long steps_used = 0;
    bool budget_exhausted = false;

    std::vector<const RideLog*> solutions() const {
        std::vector<const RideLog*> out;
        for (const auto& r : rides)
            if (r.terminal) out.push_back(&r);
        return out;
    }
};

/// Ride bookkeeping for the stop rule: tracks the best loss seen and how many
/// steps passed without improving it by a relative margin.
struct RideWindow {
    double improve_tol = 1e-6;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_improve = 0;

    RideWindow() = default;
    explicit RideWindow(double tol) : improve_tol(tol) {}

    void push(double loss) {
        bool improved = !std::isfinite(best_loss) ||
                        loss < best_loss - improve_tol * std::max(1.0, std::abs(best_loss));
        if (improved) {
            best_loss = loss;
            since_improve = 0;
        } else {
            ++since_improve;
        }
    }
};

/// Entries for the N most negative distinct eigenvalue clusters at theta, one
/// representative eigenvector per cluster, both directions each. Empty when
/// the Hessian has no negative eigenvalue. Fingerprints hold only the new
/// signed rank; the engine prepends the parent path.
std::vector<ArchiveEntry> get_ridges(const Problem& p, const ParamVector& theta, int n);

/// Recompute the spectrum at theta_new and return the eigenpair whose
/// eigenvector has maximum |overlap| with e_prev, sign-aligned so the
/// overlap is nonnegative.
std::pair<EigenPair, double> update_ridge_exact(const Problem& p, const ParamVector& theta_new,
                                                const ParamVector& e_prev);

/// update_ridge_exact plus the full recomputed spectrum; `warm` seeds the
/// eigensolver with a nearby point's eigenvectors.
struct RidgeUpdate {
    EigenPair pair;
    double overlap = 0.0;
    Spectrum spectrum;
};
RidgeUpdate update_ridge_exact_detail(const Problem& p, const ParamVector& theta_new,
                                      const ParamVector& e_prev, const Spectrum* warm = nullptr);

/// Stop rule: the ridge broke (overlap < delta_break) or the loss stopped
/// improving for cfg.patience steps.
bool end_ride(const RideWindow& window, double overlap, const ExactRRConfig& cfg);

struct AdaptiveStepResult {
    ParamVector theta_new;
    double alpha_used = 0.0;
    EigenPair pair;
    double overlap = 0.0;
    bool alpha_floor = false;  // accepted at alpha_min without meeting delta_break
    Spectrum spectrum;         // at theta_new
};

/// Step along -e starting from alpha_init, halving until the updated ridge
/// keeps overlap >= delta_break or alpha falls below alpha_min (then the
/// alpha_min step is returned flagged so the stop rule fires).
AdaptiveStepResult adaptive_step(const Problem& p, const ParamVector& theta,
                                 const ParamVector& e, double alpha_init, double alpha_min,
                                 double delta_break, const Spectrum* warm = nullptr);

/// FIFO pop for BFS, LIFO for DFS. Throws on an empty archive.
ArchiveEntry choose_from_archive(std::deque<ArchiveEntry>& archive, ArchiveOrder order);

/// The full branching search from a strict saddle: seed the archive from
/// get_ridges, ride each entry until the stop rule fires, re-branch at the
/// endpoint, until the archive drains or the step budget is spent.
RunRecord run_exact_rr(const Problem& p, const ParamVector& theta_mis, const ExactRRConfig& cfg);

enum class BaselineKind {
    gd_random,
    gd_mis,
    random_vec_mis,
    fixed_alpha_update_ridge,
    fixed_alpha_fixed_ridge,
    rand_ridge_plus,
};

BaselineKind baseline_kind_from_string(const std::string& name);
std::string to_string(BaselineKind kind);

struct BaselineConfig {
    double alpha = 0.1;        // fixed step for every baseline, ablations included
    int patience = 10;
    double grad_tol = 1e-6;
    double improve_tol = 0.0;  // plain baselines run to convergence
    double ablation_improve_tol = 1e-6;  // ride stop rule for the two fixed-alpha ablations
    int n_ridges = 6;          // branch width for the ablations
    double delta_break = 0.95;
    double init_sd = 1.0;      // gd_random initialization scale
};

/// Equal-budget baselines and ablations; solutions are recorded under the
/// same accounting as run_exact_rr.
RunRecord run_baselines(const Problem& p, const ParamVector& theta_start, long budget, Rng& rng,
                        BaselineKind kind, const BaselineConfig& cfg = {});

}  // namespace rr
