#include "wagemfg/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Core>

#include "wagemfg/errors.hpp"
#include "wagemfg/linalg.hpp"

namespace wagemfg {

namespace {

// Node values above the obstacle by less than this are treated as stopping.
double continue_threshold(double g) { return 1e-12 * (1.0 + std::abs(g)); }

// Offer mass and value-weighted offer mass strictly above each node's value.
struct UpperSums {
    Eigen::VectorXd mass;   // P_k = sum_{V_j > V_k} p_j
    Eigen::VectorXd value;  // S_k = sum_{V_j > V_k} p_j V_j
};

std::vector<int> argsort(const Eigen::VectorXd& V) {
    std::vector<int> order(V.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return V[a] < V[b]; });
    return order;
}

UpperSums upper_sums(const Eigen::VectorXd& V, const Eigen::VectorXd& p) {
    const int K = static_cast<int>(V.size());
    const std::vector<int> order = argsort(V);
    // suffix sums over the sorted order
    Eigen::VectorXd sp = Eigen::VectorXd::Zero(K + 1), sv = Eigen::VectorXd::Zero(K + 1);
    for (int i = K - 1; i >= 0; --i) {
        sp[i] = sp[i + 1] + p[order[i]];
        sv[i] = sv[i + 1] + p[order[i]] * V[order[i]];
    }
    UpperSums out{Eigen::VectorXd(K), Eigen::VectorXd(K)};
    int i = 0;
    while (i < K) {
        int j = i;
        while (j < K && V[order[j]] == V[order[i]]) ++j;
        for (int t = i; t < j; ++t) {
            out.mass[order[t]] = sp[j];
            out.value[order[t]] = sv[j];
        }
        i = j;
    }
    return out;
}

struct ActionTable {
    Eigen::VectorXd cost;
    Eigen::VectorXd lambda;
};

ActionTable action_table(const WorkerEnv& env) {
    const int n = env.actions.size();
    ActionTable t{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        t.cost[i] = search_cost(env.actions.values[i], env.params);
        t.lambda[i] = env.lambda(env.actions.values[i]);
    }
    return t;
}

// argmax_a  -c(a) + lambda(a) * G, smallest action on ties
int best_action(const ActionTable& t, double G) {
    int best = 0;
    double best_val = -t.cost[0] + t.lambda[0] * G;
    for (int i = 1; i < t.cost.size(); ++i) {
        const double v = -t.cost[i] + t.lambda[i] * G;
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    return best;
}

TridiagonalOperator worker_generator(const WorkerEnv& env) {
    const int K = env.grid.K;
    return assemble_generator(Eigen::VectorXd::Constant(K, env.coeffs.mu_Z),
                              Eigen::VectorXd::Constant(K, env.coeffs.sigma_Z * env.coeffs.sigma_Z),
                              env.grid);
}

} // namespace

OfferKernel OfferKernel::point_mass(const Grid& g, double z) {
    OfferKernel k;
    k.kind = Kind::PointMass;
    k.probs = Eigen::VectorXd::Zero(g.K);
    k.probs[g.nearest_index(z)] = 1.0;
    return k;
}

OfferKernel OfferKernel::from_density(const Eigen::VectorXd& m, const Grid& g,
                                      const std::vector<bool>& active) {
    if (m.size() != g.K) throw ConfigError("offer density must have one entry per node");
    if ((m.array() < 0.0).any() || !m.allFinite()) {
        throw DomainError("offer density must be finite and nonnegative");
    }
    OfferKernel k;
    k.kind = Kind::Density;
    k.probs = m * g.dz;
    if (!active.empty()) {
        if (static_cast<int>(active.size()) != g.K) throw ConfigError("mask size mismatch");
        Eigen::VectorXd restricted = k.probs;
        for (int j = 0; j < g.K; ++j) {
            if (!active[j]) restricted[j] = 0.0;
        }
        if (restricted.sum() > 0.0) k.probs = restricted;
    }
    const double total = k.probs.sum();
    if (!(total > 0.0)) throw DomainError("offer density carries no mass");
    k.probs /= total;
    return k;
}

double WorkerEnv::lambda(double a) const {
    return search_enabled ? arrival_rate(a, params) : 0.0;
}

void WorkerEnv::validate() const {
    const int K = grid.K;
    if (wage.size() != K) throw ConfigError("wage schedule must have one entry per node");
    if (offers.probs.size() != K) throw ConfigError("offer kernel must have one entry per node");
    if (actions.size() < 1) throw ConfigError("empty action grid");
    if (!(coeffs.sigma_Z > 0.0)) throw ConfigError("surplus volatility must be positive");
    if (!(params.r > 0.0)) throw ConfigError("discount rate must be positive");
}

Eigen::VectorXd offer_gain_per_arrival(const Eigen::VectorXd& V, const OfferKernel& offers) {
    const UpperSums u = upper_sums(V, offers.probs);
    return u.value - u.mass.cwiseProduct(V);
}

double offer_gain(int k, const Eigen::VectorXd& V, const WorkerEnv& env, double a) {
    const double la = env.lambda(a);
    if (la == 0.0) return 0.0;
    double acc = 0.0;
    for (int j = 0; j < V.size(); ++j) acc += std::max(V[j] - V[k], 0.0) * env.offers.probs[j];
    return la * acc;
}

double hjb_residual(const WorkerEnv& env, const Eigen::VectorXd& V) {
    const TridiagonalOperator L = worker_generator(env);
    const ActionTable t = action_table(env);
    const Eigen::VectorXd G = offer_gain_per_arrival(V, env.offers);
    const Eigen::VectorXd LV = L.apply(V);
    const double g = env.obstacle();
    double res = 0.0;
    for (int k = 0; k < env.grid.K; ++k) {
        const int i = best_action(t, G[k]);
        const double H = env.wage[k] - t.cost[i] + LV[k] + t.lambda[i] * G[k];
        const double R = env.params.r * V[k] - H;
        res = std::max(res, std::abs(std::min(R, V[k] - g)));
    }
    return res;
}

WorkerSolution finalize_solution(const WorkerEnv& env, Eigen::VectorXd V, int iterations) {
    const int K = env.grid.K;
    const double g = env.obstacle();
    const ActionTable t = action_table(env);
    const Eigen::VectorXd G = offer_gain_per_arrival(V, env.offers);

    WorkerSolution sol;
    sol.a_opt = Eigen::VectorXd::Zero(K);
    sol.continue_mask.assign(K, false);
    sol.k_star = K;
    for (int k = 0; k < K; ++k) {
        if (V[k] > g + continue_threshold(g)) {
            sol.continue_mask[k] = true;
            sol.a_opt[k] = env.actions.values[best_action(t, G[k])];
            if (sol.k_star == K) sol.k_star = k;
        }
    }
    sol.V = std::move(V);
    sol.iterations = iterations;
    sol.residual = hjb_residual(env, sol.V);
    return sol;
}

WorkerSolution solve_obstacle_pi(const WorkerEnv& env, double tol, int max_iter) {
    env.validate();
    const int K = env.grid.K;
    const double r = env.params.r;
    const double g = env.obstacle();
    const TridiagonalOperator L = worker_generator(env);
    const ActionTable t = action_table(env);
    const Eigen::VectorXd& p = env.offers.probs;

    Eigen::VectorXd V = Eigen::VectorXd::Constant(K, g);
    std::vector<int> prev_action(K, -1);
    std::vector<bool> prev_stop(K, false);
    double res = std::numeric_limits<double>::infinity();

    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd G = offer_gain_per_arrival(V, env.offers);
        const Eigen::VectorXd LV = L.apply(V);
        std::vector<int> action(K);
        std::vector<bool> stop(K);
        res = 0.0;
        for (int k = 0; k < K; ++k) {
            action[k] = best_action(t, G[k]);
            const double H = env.wage[k] - t.cost[action[k]] + LV[k] + t.lambda[action[k]] * G[k];
            const double R = r * V[k] - H;
            const double S = V[k] - g;
            stop[k] = S <= R;
            res = std::max(res, std::abs(std::min(R, S)));
        }
        if (res <= tol) return finalize_solution(env, V, it);

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);
        Eigen::VectorXd rhs(K);
        const std::vector<int> order = argsort(V);
        std::vector<int> rank(K);
        for (int i = 0; i < K; ++i) rank[order[i]] = i;
        for (int k = 0; k < K; ++k) {
            if (stop[k]) {
                A(k, k) = 1.0;
                rhs[k] = g;
                continue;
            }
            A(k, k) = r - L.diag[k];
            if (k > 0) A(k, k - 1) = -L.lower[k - 1];
            if (k < K - 1) A(k, k + 1) = -L.upper[k];
            rhs[k] = env.wage[k] - t.cost[action[k]];
            const double la = t.lambda[action[k]];
            if (la == 0.0) continue;
            // accept every offer valued strictly above the current node
            int first = rank[k] + 1;
            while (first < K && V[order[first]] == V[k]) ++first;
            for (int i = first; i < K; ++i) {
                const int j = order[i];
                if (p[j] == 0.0) continue;
                A(k, k) += la * p[j];
                A(k, j) -= la * p[j];
            }
        }
        Eigen::VectorXd Vn = solve_dense(std::move(A), std::move(rhs));

        const bool same_policy = action == prev_action && stop == prev_stop;
        const double change = (Vn - V).cwiseAbs().maxCoeff();
        V = std::move(Vn);
        if (same_policy && change <= 1e-13 * (1.0 + V.cwiseAbs().maxCoeff())) {
            return finalize_solution(env, V, it + 1);
        }
        prev_action = std::move(action);
        prev_stop = std::move(stop);
    }
    const double final_res = hjb_residual(env, V);
    if (final_res <= tol) return finalize_solution(env, V, max_iter);
    throw IterationLimitError("policy iteration did not converge", final_res, max_iter);
}

WorkerSolution solve_obstacle_vi(const WorkerEnv& env, double dt, double theta, double tol,
                                 int max_iter, std::vector<double>* change_trace) {
    env.validate();
    if (!(dt > 0.0)) throw ConfigError("value iteration needs dt > 0");
    if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("relaxation theta must lie in (0, 1]");
    const int K = env.grid.K;
    const double r = env.params.r;
    const double g = env.obstacle();
    const double inv_dt = std::isinf(dt) ? 0.0 : 1.0 / dt;
    const TridiagonalOperator L = worker_generator(env);
    const ActionTable t = action_table(env);
    const int n_act = env.actions.size();

    Eigen::VectorXd V = Eigen::VectorXd::Constant(K, g);
    Eigen::VectorXd Vn(K);
    double change = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        const UpperSums u = upper_sums(V, env.offers.probs);
        for (int k = 0; k < K; ++k) {
            double off = 0.0;
            if (k > 0) off += L.lower[k - 1] * V[k - 1];
            if (k < K - 1) off += L.upper[k] * V[k + 1];
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_act; ++i) {
                const double num = env.wage[k] - t.cost[i] + off + t.lambda[i] * u.value[k] + V[k] * inv_dt;
                const double den = r + inv_dt - L.diag[k] + t.lambda[i] * u.mass[k];
                best = std::max(best, num / den);
            }
            Vn[k] = (1.0 - theta) * V[k] + theta * std::max(best, g);
        }
        change = (Vn - V).cwiseAbs().maxCoeff();
        if (change_trace) change_trace->push_back(change);
        V.swap(Vn);
        if (change <= tol) return finalize_solution(env, V, it);
    }
    throw IterationLimitError("value iteration did not converge", change, max_iter);
}

FreeBoundary free_boundary(const WorkerSolution& sol, const Grid& g) {
    if (sol.k_star >= g.K) {
        throw DomainError("no continuation region: the worker separates at every node");
    }
    return FreeBoundary{g.nodes[sol.k_star], sol.k_star, sol.k_star == 0};
}

double smooth_fit_residual(const WorkerSolution& sol, const Grid& g) {
    const int k = sol.k_star;
    if (k + 1 >= g.K) throw DomainError("free boundary at the upper edge of the grid");
    return std::abs(sol.V[k + 1] - sol.V[k]) / g.dz;
}

} // namespace wagemfg
