#include "rr/ridge_exact.hpp"

#include <cmath>

namespace rr {

std::string Fingerprint::str() const {
    if (entries.empty()) return "root";
    std::string s;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) s += '.';
        s += entries[i] > 0 ? '+' : '-';
        s += std::to_string(std::abs(entries[i]));
    }
    return s;
}

void ExactRRConfig::validate() const {
    if (!(delta_break > 0.0 && delta_break <= 1.0)) {
        throw std::invalid_argument("ExactRRConfig: delta_break must be in (0, 1]");
    }
    if (n_ridges < 1) throw std::invalid_argument("ExactRRConfig: n_ridges must be >= 1");
    if (!(alpha_min < alpha_init)) {
        throw std::invalid_argument("ExactRRConfig: alpha_min must be below alpha_init");
    }
    if (t_budget < 0) throw std::invalid_argument("ExactRRConfig: negative budget");
    if (patience < 1) throw std::invalid_argument("ExactRRConfig: patience must be >= 1");
}

std::vector<ArchiveEntry> get_ridges(const Problem& p, const ParamVector& theta, int n) {
    if (!p.has_full_hessian()) throw std::invalid_argument("get_ridges: full Hessian unavailable");
    if (n < 1) throw std::invalid_argument("get_ridges: n must be >= 1");
    Spectrum spec = jacobi_eigh(p.full_hessian(theta));

    // Strictly negative eigenvalues only; exact zero modes (softmax shift
    // directions and friends) are not descent ridges.
    double scale = std::max(std::abs(spec.values.front()), std::abs(spec.values.back()));
    double neg_thr = -1e-9 * std::max(1.0, scale);
    std::vector<double> negatives;
    std::size_t neg_begin = spec.size();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec.values[i] < neg_thr) {
            neg_begin = i;
            break;
        }
    }
    if (neg_begin == spec.size()) return {};
    for (std::size_t i = neg_begin; i < spec.size(); ++i) negatives.push_back(spec.values[i]);

    // Negatives are sorted descending; the last cluster is the most negative.
    auto clusters = cluster_eigenvalues(negatives);
    std::vector<ArchiveEntry> out;
    int rank = 0;
    for (auto it = clusters.rbegin(); it != clusters.rend() && rank < n; ++it, ++rank) {
        // One representative per cluster: its most negative member.
        std::size_t rep = neg_begin + it->second - 1;
        ArchiveEntry plus;
        plus.fingerprint = Fingerprint({rank + 1});
        plus.theta = theta;
        plus.ridge = spec.vectors[rep];
        plus.eigenvalue = spec.values[rep];
        ArchiveEntry minus = plus;
        minus.fingerprint = Fingerprint({-(rank + 1)});
        minus.ridge = spec.vectors[rep].scaled(-1.0);
        out.push_back(std::move(plus));
        out.push_back(std::move(minus));
    }
    return out;
}

RidgeUpdate update_ridge_exact_detail(const Problem& p, const ParamVector& theta_new,
                                      const ParamVector& e_prev, const Spectrum* warm) {
    if (!p.has_full_hessian()) {
        throw std::invalid_argument("update_ridge_exact: full Hessian unavailable");
    }
    SymMatrix H = p.full_hessian(theta_new);
    Spectrum spec = warm ? jacobi_eigh_warm(H, warm->vectors) : jacobi_eigh(H);

    // Repeated eigenvalues make individual eigenvectors arbitrary inside
    // their cluster, so the continuation of e_prev is its normalized
    // projection onto the cluster eigenspace: an exact eigenvector of the
    // cluster eigenvalue with the maximum overlap any unit eigenvector
    // attains. For singleton clusters this is the usual max-overlap vector.
    auto clusters = cluster_eigenvalues(spec.values);
    std::size_t best_cluster = 0;
    double best_norm2 = -1.0;
    std::vector<double> coeffs(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) coeffs[i] = dot(spec.vectors[i], e_prev);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        double n2 = 0.0;
        for (std::size_t i = clusters[c].first; i < clusters[c].second; ++i)
            n2 += coeffs[i] * coeffs[i];
        if (n2 > best_norm2) {
            best_norm2 = n2;
            best_cluster = c;
        }
    }
    auto [cb, ce] = clusters[best_cluster];
    ParamVector e(e_prev.size(), 0.0);
    for (std::size_t i = cb; i < ce; ++i) e.add_scaled(coeffs[i], spec.vectors[i]);
    double overlap = norm(e);
    if (overlap <= 1e-12) {
        // Degenerate fallback; keep the single best-overlap vector.
        std::size_t best = cb;
        e = coeffs[best] >= 0.0 ? spec.vectors[best] : spec.vectors[best].scaled(-1.0);
        overlap = std::abs(coeffs[best]);
    } else {
        e = e.scaled(1.0 / overlap);
    }
    RidgeUpdate out;
    out.pair = EigenPair{spec.values[ce - 1], std::move(e), -1};
    out.overlap = std::min(overlap, 1.0);
    out.spectrum = std::move(spec);
    return out;
}

std::pair<EigenPair, double> update_ridge_exact(const Problem& p, const ParamVector& theta_new,
                                                const ParamVector& e_prev) {
    RidgeUpdate u = update_ridge_exact_detail(p, theta_new, e_prev);
    return {std::move(u.pair), u.overlap};
}

bool end_ride(const RideWindow& window, double overlap, const ExactRRConfig& cfg) {
    if (overlap < cfg.delta_break) return true;
    return window.since_improve >= cfg.patience;
}

AdaptiveStepResult adaptive_step(const Problem& p, const ParamVector& theta, const ParamVector& e,
                                 double alpha_init, double alpha_min, double delta_break,
                                 const Spectrum* warm) {
    double alpha = alpha_init;
    while (true) {
        ParamVector cand = theta.minus(e.scaled(alpha));
        RidgeUpdate u = update_ridge_exact_detail(p, cand, e, warm);
        if (u.overlap >= delta_break) {
            return {std::move(cand), alpha, std::move(u.pair), u.overlap, false,
                    std::move(u.spectrum)};
        }
        double next = alpha * 0.5;
        if (next < alpha_min) {
            ParamVector floor_cand = theta.minus(e.scaled(alpha_min));
            RidgeUpdate fu = update_ridge_exact_detail(p, floor_cand, e, warm);
            return {std::move(floor_cand), alpha_min, std::move(fu.pair), fu.overlap, true,
                    std::move(fu.spectrum)};
        }
        alpha = next;
    }
}

ArchiveEntry choose_from_archive(std::deque<ArchiveEntry>& archive, ArchiveOrder order) {
    if (archive.empty()) throw std::runtime_error("choose_from_archive: empty archive");
    ArchiveEntry e;
    if (order == ArchiveOrder::BFS) {
        e = std::move(archive.front());
        archive.pop_front();
    } else {
        e = std::move(archive.back());
        archive.pop_back();
    }
    return e;
}

namespace {

enum class StepMode { adaptive, fixed_update, fixed_fixed };

long polish_terminal(const Problem& p, ParamVector& theta, double alpha, int max_steps,
                     long budget_left) {
    long used = 0;
    for (int i = 0; i < max_steps && used < budget_left; ++i) {
        ParamVector g = p.grad(theta);
        if (norm(g) < 1e-10) break;
        theta = theta.minus(g.scaled(alpha));
        ++used;
    }
    return used;
}

RunRecord run_rr_core(const Problem& p, const ParamVector& theta_start, const ExactRRConfig& cfg,
                      StepMode mode) {
    cfg.validate();
    auto seed_entries = get_ridges(p, theta_start, cfg.n_ridges);
    if (seed_entries.empty()) {
        throw std::invalid_argument(
            "run_exact_rr: starting point has no negative curvature (not a strict saddle)");
    }

    RunRecord rec;
    std::deque<ArchiveEntry> archive(seed_entries.begin(), seed_entries.end());
    std::vector<ParamVector> branch_points;
    branch_points.push_back(theta_start);

    while (!archive.empty() && rec.steps_used < cfg.t_budget) {
        ArchiveEntry entry = choose_from_archive(archive, cfg.order);
        ParamVector theta = entry.theta;
        ParamVector e = entry.ridge;
        double lambda = entry.eigenvalue;
        double overlap = 1.0;
        double alpha_used = cfg.alpha_init;

        RideWindow window(cfg.improve_tol);
        window.push(p.loss(theta));
        RideLog ride;
        ride.fingerprint = entry.fingerprint;
        std::string reason;
        Spectrum warm;  // previous step's spectrum; seeds the eigensolver

        while (true) {
            if (rec.steps_used >= cfg.t_budget) {
                reason = "budget";
                break;
            }
            bool floored = false;
            const Spectrum* warm_ptr = warm.size() == p.dim ? &warm : nullptr;
            if (mode == StepMode::adaptive) {
                // Regrow alpha after earlier halvings so each step still takes
                // the largest ridge-preserving stride without re-probing the
                // whole ladder from alpha_init every time.
                double start_alpha = std::min(cfg.alpha_init, alpha_used * 2.0);
                auto res = adaptive_step(p, theta, e, start_alpha, cfg.alpha_min,
                                         cfg.delta_break, warm_ptr);
                theta = std::move(res.theta_new);
                e = res.pair.vector;
                lambda = res.pair.value;
                overlap = res.overlap;
                alpha_used = res.alpha_used;
                floored = res.alpha_floor;
                warm = std::move(res.spectrum);
            } else if (mode == StepMode::fixed_update) {
                theta = theta.minus(e.scaled(cfg.alpha_init));
                RidgeUpdate u = update_ridge_exact_detail(p, theta, e, warm_ptr);
                e = u.pair.vector;
                lambda = u.pair.value;
                overlap = u.overlap;
                alpha_used = cfg.alpha_init;
                warm = std::move(u.spectrum);
            } else {
                theta = theta.minus(e.scaled(cfg.alpha_init));
                overlap = 1.0;
                alpha_used = cfg.alpha_init;
            }
            ++rec.steps_used;
            ++ride.steps;
            double loss = p.loss(theta);
            window.push(loss);
            if (cfg.log_steps) {
                rec.steps.push_back({entry.fingerprint.str(), rec.steps_used, loss, lambda,
                                     overlap, alpha_used});
            }
            if (end_ride(window, overlap, cfg)) {
                if (overlap < cfg.delta_break) {
                    reason = floored ? "alpha_floor" : "ridge_break";
                } else {
                    reason = "stagnation";
                }
                break;
            }
        }

        bool duplicate_branch = false;
        if (cfg.branch_dedup_radius > 0.0) {
            for (const auto& seen : branch_points) {
                if (distance(seen, theta) <= cfg.branch_dedup_radius) {
                    duplicate_branch = true;
                    break;
                }
            }
        }
        std::vector<ArchiveEntry> children;
        if (rec.steps_used < cfg.t_budget && !duplicate_branch) {
            children = get_ridges(p, theta, cfg.n_ridges);
        }
        double grad_norm = norm(p.grad(theta));
        bool terminal = (children.empty() && !duplicate_branch) || grad_norm < 1e-6;
        if (duplicate_branch) reason += "+dup";
        if (terminal) {
            if (cfg.polish && grad_norm >= 1e-10) {
                rec.steps_used += polish_terminal(p, theta, cfg.alpha_init / 10.0,
                                                  cfg.polish_steps,
                                                  cfg.t_budget - rec.steps_used);
            }
        } else {
            branch_points.push_back(theta);
            for (auto& child : children) {
                child.fingerprint = entry.fingerprint.extended(child.fingerprint.entries[0]);
                archive.push_back(std::move(child));
            }
        }

        ride.final_loss = p.loss(theta);
        ride.final_eigenvalue = lambda;
        ride.final_overlap = overlap;
        ride.break_reason = reason;
        ride.terminal = terminal;
        ride.theta_end = std::move(theta);
        rec.rides.push_back(std::move(ride));
    }
    rec.budget_exhausted = rec.steps_used >= cfg.t_budget;
    return rec;
}

// Plain gradient descent until the loss stagnates; the workhorse of the
// non-ridge baselines.
struct DescentResult {
    ParamVector theta;
    long steps = 0;
    std::string reason;
};

DescentResult gd_until_stuck(const Problem& p, ParamVector theta, double alpha, long budget_left,
                             int patience, double grad_tol, double improve_tol) {
    DescentResult out{std::move(theta), 0, "stagnation"};
    RideWindow window(improve_tol);
    window.push(p.loss(out.theta));
    while (out.steps < budget_left) {
        ParamVector g = p.grad(out.theta);
        if (norm(g) < grad_tol) {
            out.reason = "converged";
            break;
        }
        out.theta = out.theta.minus(g.scaled(alpha));
        ++out.steps;
        window.push(p.loss(out.theta));
        if (window.since_improve >= patience) break;
    }
    if (out.steps >= budget_left) out.reason = "budget";
    return out;
}

}  // namespace

RunRecord run_exact_rr(const Problem& p, const ParamVector& theta_mis, const ExactRRConfig& cfg) {
    return run_rr_core(p, theta_mis, cfg, StepMode::adaptive);
}

BaselineKind baseline_kind_from_string(const std::string& name) {
    if (name == "gd_random") return BaselineKind::gd_random;
    if (name == "gd_mis") return BaselineKind::gd_mis;
    if (name == "random_vec_mis") return BaselineKind::random_vec_mis;
    if (name == "fixed_alpha_update_ridge") return BaselineKind::fixed_alpha_update_ridge;
    if (name == "fixed_alpha_fixed_ridge") return BaselineKind::fixed_alpha_fixed_ridge;
    if (name == "rand_ridge_plus") return BaselineKind::rand_ridge_plus;
    throw std::invalid_argument("unknown baseline kind: " + name);
}

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::gd_random: return "gd_random";
        case BaselineKind::gd_mis: return "gd_mis";
        case BaselineKind::random_vec_mis: return "random_vec_mis";
        case BaselineKind::fixed_alpha_update_ridge: return "fixed_alpha_update_ridge";
        case BaselineKind::fixed_alpha_fixed_ridge: return "fixed_alpha_fixed_ridge";
        case BaselineKind::rand_ridge_plus: return "rand_ridge_plus";
    }
    throw std::invalid_argument("unknown baseline kind");
}

RunRecord run_baselines(const Problem& p, const ParamVector& theta_start, long budget, Rng& rng,
                        BaselineKind kind, const BaselineConfig& cfg) {
    if (kind == BaselineKind::fixed_alpha_update_ridge ||
        kind == BaselineKind::fixed_alpha_fixed_ridge) {
        ExactRRConfig rr;
        rr.alpha_init = cfg.alpha;
        rr.alpha_min = cfg.alpha * 1e-9;
        rr.delta_break = cfg.delta_break;
        rr.n_ridges = cfg.n_ridges;
        rr.t_budget = budget;
        rr.patience = cfg.patience;
        rr.improve_tol = cfg.ablation_improve_tol;
        StepMode mode = kind == BaselineKind::fixed_alpha_update_ridge ? StepMode::fixed_update
                                                                       : StepMode::fixed_fixed;
        return run_rr_core(p, theta_start, rr, mode);
    }

    RunRecord rec;
    int restart = 0;
    ParamVector walker = theta_start;  // rand_ridge_plus continues from ride ends
    while (rec.steps_used < budget) {
        // The plain baselines are single trajectories: one greedy descent (or
        // one ray) cannot use leftover budget productively, which is exactly
        // what they are here to show. Only rand_ridge_plus keeps re-branching.
        if (restart > 0 && kind != BaselineKind::rand_ridge_plus) break;
        ParamVector theta0(p.dim, 0.0);
        ParamVector direction;
        switch (kind) {
            case BaselineKind::gd_random:
                theta0 = rng.normal_vector(p.dim, cfg.init_sd);
                break;
            case BaselineKind::gd_mis:
                theta0 = theta_start;
                break;
            case BaselineKind::random_vec_mis:
                theta0 = theta_start;
                direction = rng.unit_vector(p.dim);
                break;
            case BaselineKind::rand_ridge_plus: {
                theta0 = walker;
                direction = rng.unit_vector(p.dim);
                if (dot(direction, p.grad(theta0)) < 0.0) direction = direction.scaled(-1.0);
                break;
            }
            default:
                throw std::invalid_argument("run_baselines: unhandled kind");
        }

        RideLog ride;
        ride.fingerprint = Fingerprint({restart + 1});
        if (direction.empty()) {
            auto res = gd_until_stuck(p, theta0, cfg.alpha, budget - rec.steps_used, cfg.patience,
                                      cfg.grad_tol, cfg.improve_tol);
            rec.steps_used += res.steps;
            ride.steps = res.steps;
            ride.break_reason = res.reason;
            ride.theta_end = std::move(res.theta);
        } else {
            // Ride the fixed direction until the loss stops improving.
            ParamVector theta = theta0;
            RideWindow window(cfg.improve_tol);
            window.push(p.loss(theta));
            std::string reason = "stagnation";
            while (rec.steps_used < budget) {
                theta = theta.minus(direction.scaled(cfg.alpha));
                ++rec.steps_used;
                ++ride.steps;
                window.push(p.loss(theta));
                if (window.since_improve >= cfg.patience) break;
            }
            if (rec.steps_used >= budget) reason = "budget";
            ride.break_reason = reason;
            ride.theta_end = std::move(theta);
        }
        ride.final_loss = p.loss(ride.theta_end);
        ride.final_overlap = 1.0;
        ride.terminal = true;
        if (kind == BaselineKind::rand_ridge_plus) walker = ride.theta_end;
        rec.rides.push_back(std::move(ride));
        ++restart;
    }
    rec.budget_exhausted = rec.steps_used >= budget;
    return rec;
}

}  // namespace rr
