#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "orthant/laplace.hpp"
#include "orthant/optimizer.hpp"
#include "orthant/rng.hpp"

namespace orthant {

/// Which engine produced a survival curve.
enum class Engine { DP, MC, MC_TILTED };

inline const char* engine_name(Engine e) {
    switch (e) {
        case Engine::DP: return "dp";
        case Engine::MC: return "mc";
        case Engine::MC_TILTED: return "mc-tilted";
    }
    return "?";
}

/**
 * Survival probabilities P^x(tau > n) of the walk started at x, where tau is
 * the first time n >= 1 the walk leaves the orthant, for every horizon n in
 * [0, n_max].  P(tau > 0) = 1 by convention.  Probabilities are
 * non-increasing in n.  Monte Carlo curves carry per-horizon standard errors
 * (and, for the tilted estimator, effective sample sizes); lattice engines
 * record the truncation radius of the state box.
 */
struct SurvivalCurve {
    Eigen::VectorXd start;
    std::vector<int> horizons;
    std::vector<double> probabilities;
    Engine engine = Engine::DP;
    std::vector<double> mc_stderr; // empty for DP
    std::vector<double> mc_ess;    // tilted engine only
    long long truncation = -1;     // -1 when not applicable
};

enum class RateMethod { Ratio, NthRoot, Spectral };

inline const char* method_name(RateMethod m) {
    switch (m) {
        case RateMethod::Ratio: return "ratio";
        case RateMethod::NthRoot: return "nth_root";
        case RateMethod::Spectral: return "spectral";
    }
    return "?";
}

/**
 * A rate estimate together with the evidence behind it: the survival curve it
 * was extracted from, the theoretical ceiling inf_Q L (the estimate must stay
 * below it, up to tolerance), and the depth d(x) of the start, which governs
 * how close to the ceiling the true rate is expected to be.  `converged`
 * reports the engine's own diagnostic (box-doubling stability for DP, power
 * iteration convergence for spectral); truncated engines otherwise certify
 * the rate only as a lower bound.
 */
struct RateReport {
    double rate = 0.0;
    RateMethod method = RateMethod::Ratio;
    SurvivalCurve curve;
    double bound = 0.0;
    double d_of_x = 0.0;
    bool converged = true;
    int period = 1; // ratio-averaging window is a multiple of this
};

namespace detail {

struct LatticeBox {
    int d = 0;
    long long trunc = 0;
    long long states = 0; // (trunc+1)^d
    std::vector<long long> strides;
};

inline LatticeBox make_box(int d, long long trunc) {
    if (trunc < 0)
        throw DomainError("truncation radius must be nonnegative");
    LatticeBox box;
    box.d = d;
    box.trunc = trunc;
    const double est = std::pow(static_cast<double>(trunc) + 1.0, d);
    if (est > 1e7)
        throw StateExplosionError("state box exceeds 10^7 states");
    box.states = 1;
    box.strides.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        box.strides[static_cast<std::size_t>(i)] = box.states;
        box.states *= trunc + 1;
    }
    return box;
}

inline long long encode(const LatticeBox& box, const std::vector<long long>& s) {
    long long idx = 0;
    for (int i = 0; i < box.d; ++i)
        idx += s[static_cast<std::size_t>(i)] * box.strides[static_cast<std::size_t>(i)];
    return idx;
}

inline void decode(const LatticeBox& box, long long idx, std::vector<long long>& s) {
    for (int i = 0; i < box.d; ++i) {
        s[static_cast<std::size_t>(i)] = idx % (box.trunc + 1);
        idx /= box.trunc + 1;
    }
}

inline std::vector<std::vector<long long>> integer_steps(const FiniteDistribution& dist) {
    if (!dist.lattice)
        throw NotLatticeError("this engine requires an integer-lattice distribution");
    std::vector<std::vector<long long>> steps;
    for (const Atom& a : dist.atoms) {
        std::vector<long long> y(static_cast<std::size_t>(dist.dimension));
        for (Eigen::Index i = 0; i < a.point.size(); ++i)
            y[static_cast<std::size_t>(i)] =
                static_cast<long long>(numerator(a.point(i)));
        steps.push_back(std::move(y));
    }
    return steps;
}

inline std::vector<long long> integer_start(const VectorXr& x) {
    std::vector<long long> s(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!is_integer(x(i)))
            throw NotLatticeError("lattice engines require an integer start point");
        if (x(i) < 0)
            throw NotInOrthantError("start point has a negative coordinate");
        s[static_cast<std::size_t>(i)] = static_cast<long long>(numerator(x(i)));
    }
    return s;
}

inline void require_start_in_box(const std::vector<long long>& s, long long trunc) {
    for (long long c : s)
        if (c > trunc)
            throw DomainError("start point lies outside the truncation box");
}

} // namespace detail

/**
 * Default truncation radius.  When every step has nonpositive coordinate sum,
 * sum(x) never increases along surviving paths, so the box [0, sum(x)]^d
 * contains the whole reachable set and truncation is lossless.  Otherwise
 * the box is sized so that no path of length n_max can reach the boundary:
 * max(x) + n_max * (max step coordinate).
 */
inline long long default_truncation(const FiniteDistribution& dist, const VectorXr& x,
                                    int n_max) {
    std::vector<long long> s = detail::integer_start(x);
    bool bounded = true;
    Rational max_step = 0;
    for (const Atom& a : dist.atoms) {
        Rational sum = 0;
        for (Eigen::Index i = 0; i < a.point.size(); ++i) {
            sum += a.point(i);
            Rational m = abs(a.point(i));
            if (m > max_step)
                max_step = m;
        }
        if (sum > 0)
            bounded = false;
    }
    if (bounded)
        return std::accumulate(s.begin(), s.end(), 0LL);
    const long long step = static_cast<long long>(std::ceil(to_double(max_step)));
    return *std::max_element(s.begin(), s.end()) + static_cast<long long>(n_max) * step;
}

/**
 * Exact forward dynamic programming over the states of Q cap [0,trunc]^d.
 * One step moves every state's mass along each atom; mass stepping out of the
 * box (whether out of the orthant or past the truncation radius) is dropped,
 * so each probability is a certified lower bound on the true survival
 * probability, exact whenever the box contains the full reachable set.
 *
 * @throws NotLatticeError     for non-integer supports or starts.
 * @throws StateExplosionError when the box has more than 10^7 states.
 */
inline SurvivalCurve survival_dp(const FiniteDistribution& dist, const VectorXr& x,
                                 int n_max, long long trunc) {
    std::vector<std::vector<long long>> steps = detail::integer_steps(dist);
    std::vector<long long> start = detail::integer_start(x);
    detail::require_start_in_box(start, trunc);
    detail::LatticeBox box = detail::make_box(dist.dimension, trunc);

    std::vector<double> weights;
    for (const Atom& a : dist.atoms)
        weights.push_back(to_double(a.weight));

    std::vector<double> cur(static_cast<std::size_t>(box.states), 0.0);
    std::vector<double> nxt(static_cast<std::size_t>(box.states), 0.0);
    cur[static_cast<std::size_t>(detail::encode(box, start))] = 1.0;

    SurvivalCurve curve;
    curve.start = Eigen::VectorXd(dist.dimension);
    for (int i = 0; i < dist.dimension; ++i)
        curve.start(i) = static_cast<double>(start[static_cast<std::size_t>(i)]);
    curve.engine = Engine::DP;
    curve.truncation = trunc;
    curve.horizons.push_back(0);
    curve.probabilities.push_back(1.0);

    std::vector<long long> coords(static_cast<std::size_t>(box.d));
    for (int n = 1; n <= n_max; ++n) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (long long idx = 0; idx < box.states; ++idx) {
            const double mass = cur[static_cast<std::size_t>(idx)];
            if (mass == 0.0)
                continue;
            detail::decode(box, idx, coords);
            for (std::size_t a = 0; a < steps.size(); ++a) {
                long long tgt = idx;
                bool inside = true;
                for (int i = 0; i < box.d; ++i) {
                    const long long c =
                        coords[static_cast<std::size_t>(i)] + steps[a][static_cast<std::size_t>(i)];
                    if (c < 0 || c > box.trunc) { inside = false; break; }
                    tgt += steps[a][static_cast<std::size_t>(i)] *
                           box.strides[static_cast<std::size_t>(i)];
                }
                if (inside)
                    nxt[static_cast<std::size_t>(tgt)] += mass * weights[a];
            }
        }
        cur.swap(nxt);
        double total = 0.0;
        for (double v : cur)
            total += v;
        curve.horizons.push_back(n);
        curve.probabilities.push_back(std::min(total, 1.0));
    }
    return curve;
}

namespace detail {

struct ReachableGraph {
    std::vector<long long> states;         // encoded, in BFS discovery order
    std::vector<std::vector<int>> adj;     // surviving transitions
    std::vector<std::vector<double>> prob; // matching weights
    std::vector<int> level;                // BFS distance from the start
};

inline ReachableGraph reachable_graph(const FiniteDistribution& dist, const VectorXr& x,
                                      long long trunc) {
    std::vector<std::vector<long long>> steps = integer_steps(dist);
    std::vector<long long> start = integer_start(x);
    require_start_in_box(start, trunc);
    LatticeBox box = make_box(dist.dimension, trunc);

    std::vector<double> weights;
    for (const Atom& a : dist.atoms)
        weights.push_back(to_double(a.weight));

    ReachableGraph g;
    std::unordered_map<long long, int> index;
    std::vector<long long> queue;
    const long long s0 = encode(box, start);
    index.emplace(s0, 0);
    g.states.push_back(s0);
    g.level.push_back(0);
    queue.push_back(s0);

    std::vector<long long> coords(static_cast<std::size_t>(box.d));
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const long long idx = queue[head];
        decode(box, idx, coords);
        std::vector<int> out;
        std::vector<double> pout;
        for (std::size_t a = 0; a < steps.size(); ++a) {
            long long tgt = idx;
            bool inside = true;
            for (int i = 0; i < box.d; ++i) {
                const long long c =
                    coords[static_cast<std::size_t>(i)] + steps[a][static_cast<std::size_t>(i)];
                if (c < 0 || c > box.trunc) { inside = false; break; }
                tgt += steps[a][static_cast<std::size_t>(i)] *
                       box.strides[static_cast<std::size_t>(i)];
            }
            if (!inside)
                continue;
            auto [it, fresh] = index.emplace(tgt, static_cast<int>(g.states.size()));
            if (fresh) {
                g.states.push_back(tgt);
                g.level.push_back(g.level[head] + 1);
                queue.push_back(tgt);
            }
            out.push_back(it->second);
            pout.push_back(weights[a]);
        }
        g.adj.push_back(std::move(out));
        g.prob.push_back(std::move(pout));
    }
    return g;
}

} // namespace detail

/**
 * Oscillation period of the survival sequence: the gcd, over all transitions
 * u -> v of the reachable killed chain, of level(u) + 1 - level(v), where
 * level is BFS distance from the start.  Every cycle length in the chain is
 * a multiple of this gcd, so a ratio window sized to a multiple of it cancels
 * periodic eigenvalue oscillation (period 2 for the diagonal walks here).
 * Returns 1 for aperiodic or cycle-free chains.
 */
inline int walk_period(const FiniteDistribution& dist, const VectorXr& x, long long trunc) {
    detail::ReachableGraph g = detail::reachable_graph(dist, x, trunc);
    long long gcd = 0;
    for (std::size_t u = 0; u < g.adj.size(); ++u)
        for (int v : g.adj[u])
            gcd = std::gcd(gcd, static_cast<long long>(
                                    g.level[u] + 1 - g.level[static_cast<std::size_t>(v)]));
    return gcd <= 0 ? 1 : static_cast<int>(gcd);
}

/**
 * Rate extraction from a survival curve.
 *
 * Ratio (default): geometric mean of the one-step ratios over the trailing
 * window, i.e. (P(n2)/P(n1))^(1/(n2-n1)) with n2 the last positive horizon
 * and the window the smallest multiple of `period` that is >= 10 (shrunk to
 * fit short curves).  Windows commensurate with the period cancel the
 * alternating-sign eigenvalue contributions exactly.
 *
 * NthRoot: P(n2)^(1/n2); converges like 1 + O(log n / n), slower but
 * assumption-free.
 */
inline double rate_from_curve(const SurvivalCurve& curve,
                              RateMethod method = RateMethod::Ratio, int period = 1) {
    if (curve.probabilities.empty())
        throw DomainError("rate_from_curve: empty curve");
    std::size_t n2 = curve.probabilities.size();
    while (n2 > 0 && curve.probabilities[n2 - 1] <= 0.0)
        --n2;
    if (n2 <= 1)
        return 0.0; // walk dies immediately (or only P(tau>0) is positive)
    --n2; // last index with positive probability
    const int h2 = curve.horizons[n2];
    if (method == RateMethod::NthRoot)
        return std::pow(curve.probabilities[n2], 1.0 / h2);

    if (period < 1)
        period = 1;
    int window = period * ((10 + period - 1) / period); // smallest multiple >= 10
    if (window > h2)
        window = std::max(h2 - h2 % period, period <= h2 ? period : h2);
    const std::size_t n1 = n2 - static_cast<std::size_t>(window);
    const double p2 = curve.probabilities[n2];
    const double p1 = curve.probabilities[n1];
    if (p1 <= 0.0)
        return 0.0;
    return std::pow(p2 / p1, 1.0 / window);
}

namespace detail {

/**
 * Strongly connected components of the reachable killed chain, by iterative
 * Tarjan.  Writes one component id per state into the returned vector and
 * the number of components into `count`; only membership matters, not the
 * id order.
 */
inline std::vector<int> strongly_connected_components(const ReachableGraph& g, int& count) {
    const int n = static_cast<int>(g.states.size());
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<int> disc(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::pair<int, std::size_t>> call; // (state, next edge index)
    int timer = 0;
    count = 0;

    for (int root = 0; root < n; ++root) {
        if (disc[static_cast<std::size_t>(root)] != -1)
            continue;
        call.emplace_back(root, 0);
        while (!call.empty()) {
            const int u = call.back().first;
            const std::size_t su = static_cast<std::size_t>(u);
            if (call.back().second == 0) {
                disc[su] = low[su] = timer++;
                stack.push_back(u);
                on_stack[su] = 1;
            }
            bool descended = false;
            while (call.back().second < g.adj[su].size()) {
                const int v = g.adj[su][call.back().second++];
                const std::size_t sv = static_cast<std::size_t>(v);
                if (disc[sv] == -1) {
                    call.emplace_back(v, 0);
                    descended = true;
                    break;
                }
                if (on_stack[sv])
                    low[su] = std::min(low[su], disc[sv]);
            }
            if (descended)
                continue;
            if (low[su] == disc[su]) {
                while (true) {
                    const int w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = 0;
                    comp[static_cast<std::size_t>(w)] = count;
                    if (w == u)
                        break;
                }
                ++count;
            }
            call.pop_back();
            if (!call.empty()) {
                const std::size_t sp = static_cast<std::size_t>(call.back().first);
                low[sp] = std::min(low[sp], low[su]);
            }
        }
    }
    return comp;
}

/**
 * Spectral radius of the one-step matrix restricted to one strongly
 * connected component, by power iteration on M + I: on a component the
 * matrix is irreducible, so the shift makes it primitive and the dominant
 * eigenvalue simple, which is what guarantees the iteration a geometric
 * convergence rate.  Should near-ties still starve it (components bridged
 * by very small weights), a dense Schur decomposition settles the value for
 * components of up to 2048 states.
 *
 * `scratch` must be sized to the full graph and filled with -1; it is used
 * for membership tests and restored before returning.
 *
 * @throws NoConvergenceError for a larger component that will not converge.
 */
inline double component_spectral_radius(const ReachableGraph& g,
                                        const std::vector<int>& members,
                                        std::vector<int>& scratch) {
    const int m = static_cast<int>(members.size());
    for (int i = 0; i < m; ++i)
        scratch[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])] = i;

    std::vector<std::vector<std::pair<int, double>>> edges(static_cast<std::size_t>(m));
    bool any_edge = false;
    for (int i = 0; i < m; ++i) {
        const std::size_t u =
            static_cast<std::size_t>(members[static_cast<std::size_t>(i)]);
        for (std::size_t a = 0; a < g.adj[u].size(); ++a) {
            const int tgt = scratch[static_cast<std::size_t>(g.adj[u][a])];
            if (tgt >= 0) {
                edges[static_cast<std::size_t>(i)].emplace_back(tgt, g.prob[u][a]);
                any_edge = true;
            }
        }
    }
    for (int i = 0; i < m; ++i)
        scratch[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])] = -1;
    if (!any_edge)
        return 0.0;

    std::vector<double> v(static_cast<std::size_t>(m),
                          1.0 / std::sqrt(static_cast<double>(m)));
    std::vector<double> w(static_cast<std::size_t>(m), 0.0);
    double lambda = 1.0;
    double gap = 1.0;
    for (int iter = 0; iter < 100000; ++iter) {
        w = v; // the +I shift
        for (int i = 0; i < m; ++i) {
            const double vi = v[static_cast<std::size_t>(i)];
            if (vi == 0.0)
                continue;
            for (const auto& [tgt, p] : edges[static_cast<std::size_t>(i)])
                w[static_cast<std::size_t>(tgt)] += p * vi;
        }
        double norm = 0.0;
        for (double c : w)
            norm += c * c;
        norm = std::sqrt(norm);
        gap = std::abs(norm - lambda) / norm;
        lambda = norm;
        for (int i = 0; i < m; ++i)
            v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / norm;
        if (gap <= 1e-10)
            return std::max(lambda - 1.0, 0.0);
    }
    if (m <= 2048) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (const auto& [tgt, p] : edges[static_cast<std::size_t>(i)])
                a(tgt, i) += p;
        Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    throw NoConvergenceError("power iteration did not converge; last relative gap " +
                             std::to_string(gap));
}

} // namespace detail

/**
 * Spectral radius of the substochastic one-step matrix restricted to the
 * states reachable from x inside Q cap [0,trunc]^d.  For walks whose
 * coordinates are bounded above along surviving paths the reachable set is
 * exactly finite and the result is the true rate rho_x; otherwise it is the
 * box's lower-bound rate.
 *
 * The radius is taken as the maximum over the strongly connected components
 * of the reachable chain — the classical reduction to irreducible diagonal
 * blocks.  Decomposing first matters: walks with a monotone linear
 * functional of the support produce block-triangular chains whose repeated
 * or defective leading eigenvalues make a whole-matrix power iteration
 * converge harmonically instead of geometrically (a nilpotent box chain is
 * the extreme case), while per-component iteration keeps Perron-Frobenius
 * convergence guarantees.
 *
 * The report carries a DP survival curve over the same box for inspection,
 * the bound inf_Q L and the depth d(x).
 *
 * @throws NoConvergenceError if some component above the dense-fallback cap
 *         keeps an iteration gap above 1e-10 after 1e5 iterations.
 */
inline RateReport spectral_rate(const FiniteDistribution& dist, const VectorXr& x,
                                long long trunc = 0, int curve_n = 40) {
    if (trunc <= 0)
        trunc = default_truncation(dist, x, curve_n);
    detail::ReachableGraph g = detail::reachable_graph(dist, x, trunc);
    const std::size_t n = g.states.size();

    int comp_count = 0;
    const std::vector<int> comp = detail::strongly_connected_components(g, comp_count);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(comp_count));
    for (std::size_t u = 0; u < n; ++u)
        members[static_cast<std::size_t>(comp[u])].push_back(static_cast<int>(u));

    std::vector<int> scratch(n, -1);
    double rho = 0.0;
    for (const std::vector<int>& block : members)
        rho = std::max(rho, detail::component_spectral_radius(g, block, scratch));

    RateReport report;
    report.method = RateMethod::Spectral;
    report.rate = rho;
    report.converged = true;
    report.curve = survival_dp(dist, x, curve_n, trunc);
    report.period = walk_period(dist, x, trunc);

    auto [rs, min_report] = reduce_and_minimize(dist);
    report.bound = min_report.inf_value;
    report.d_of_x = depth(rs, x);
    return report;
}

namespace detail {

/**
 * Runs `body(block, begin, end)` over fixed blocks of `kBlock` replicates on
 * up to `threads` workers.  Block boundaries and per-block results do not
 * depend on the number of workers, and each block's result lands in its own
 * preassigned slot, so any later fixed-order reduction yields bytes
 * independent of scheduling.  The first exception wins and is rethrown.
 */
constexpr long long kBlock = 4096;

template <typename Body>
void parallel_blocks(long long total, int threads, Body&& body) {
    const long long blocks = (total + kBlock - 1) / kBlock;
    if (threads < 1)
        threads = 1;
    std::atomic<long long> next{0};
    std::atomic<bool> abort{false};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&]() {
        for (;;) {
            if (abort.load(std::memory_order_relaxed))
                return;
            const long long b = next.fetch_add(1);
            if (b >= blocks)
                return;
            try {
                body(b, b * kBlock, std::min((b + 1) * kBlock, total));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                abort.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    if (threads == 1 || blocks <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int count = static_cast<int>(std::min<long long>(threads, blocks));
        for (int t = 0; t < count; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

/// Pairwise-tree reduction of per-block partials; order fixed by block index.
template <typename T, typename Combine>
T pairwise_reduce(std::vector<T> parts, Combine&& combine) {
    while (parts.size() > 1) {
        std::vector<T> merged;
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2)
            merged.push_back(combine(std::move(parts[i]), std::move(parts[i + 1])));
        if (parts.size() % 2 == 1)
            merged.push_back(std::move(parts.back()));
        parts = std::move(merged);
    }
    return std::move(parts.front());
}

struct McSampler {
    std::vector<double> cum;                // cumulative atom weights
    std::vector<std::vector<double>> steps; // atom points as doubles
    int d = 0;

    explicit McSampler(const FiniteDistribution& dist) : d(dist.dimension) {
        double acc = 0.0;
        for (const Atom& a : dist.atoms) {
            acc += to_double(a.weight);
            cum.push_back(acc);
            std::vector<double> y(static_cast<std::size_t>(d));
            for (Eigen::Index i = 0; i < a.point.size(); ++i)
                y[static_cast<std::size_t>(i)] = to_double(a.point(i));
            steps.push_back(std::move(y));
        }
        cum.back() = 1.0; // guard against rounding at the top
    }

    std::size_t draw(SplitMix64& g) const {
        const double u = g.uniform();
        std::size_t a = 0;
        while (a + 1 < cum.size() && u >= cum[a])
            ++a;
        return a;
    }
};

inline void check_mc_args(const VectorXr& x, long long samples) {
    if (samples < 1)
        throw DomainError("samples must be >= 1");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < 0)
            throw NotInOrthantError("start point has a negative coordinate");
}

} // namespace detail

/**
 * Direct Monte Carlo estimate of the survival curve.  Replicate r draws its
 * trajectory from replicate_stream(seed, r); survival at every horizon is
 * counted on the same trajectory (nested events), so the estimated curve is
 * non-increasing pathwise.  Results are bitwise independent of `threads`.
 */
inline SurvivalCurve mc_survival(const FiniteDistribution& dist, const VectorXr& x,
                                 int n, long long samples, std::uint64_t seed,
                                 int threads = 1) {
    detail::check_mc_args(x, samples);
    const detail::McSampler sampler(dist);
    const Eigen::VectorXd start = to_double(x);

    // Per block: histogram over exit steps e in [1, n+1], e = n+1 = survived.
    const long long blocks = (samples + detail::kBlock - 1) / detail::kBlock;
    std::vector<std::vector<long long>> parts(
        static_cast<std::size_t>(blocks),
        std::vector<long long>(static_cast<std::size_t>(n) + 2, 0));

    detail::parallel_blocks(samples, threads, [&](long long b, long long lo, long long hi) {
        std::vector<long long>& hist = parts[static_cast<std::size_t>(b)];
        std::vector<double> pos(static_cast<std::size_t>(sampler.d));
        for (long long r = lo; r < hi; ++r) {
            SplitMix64 g = replicate_stream(seed, static_cast<std::uint64_t>(r));
            for (int i = 0; i < sampler.d; ++i)
                pos[static_cast<std::size_t>(i)] = start(i);
            int exit_step = n + 1;
            for (int k = 1; k <= n; ++k) {
                const std::vector<double>& y = sampler.steps[sampler.draw(g)];
                bool alive = true;
                for (int i = 0; i < sampler.d; ++i) {
                    pos[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
                    if (pos[static_cast<std::size_t>(i)] < 0.0)
                        alive = false;
                }
                if (!alive) { exit_step = k; break; }
            }
            ++hist[static_cast<std::size_t>(exit_step)];
        }
    });

    std::vector<long long> hist = detail::pairwise_reduce(
        std::move(parts), [](std::vector<long long> a, const std::vector<long long>& b) {
            for (std::size_t i = 0; i < a.size(); ++i)
                a[i] += b[i];
            return a;
        });

    SurvivalCurve curve;
    curve.start = start;
    curve.engine = Engine::MC;
    long long surviving = samples;
    for (int m = 0; m <= n; ++m) {
        if (m > 0)
            surviving -= hist[static_cast<std::size_t>(m)];
        const double p = static_cast<double>(surviving) / static_cast<double>(samples);
        curve.horizons.push_back(m);
        curve.probabilities.push_back(p);
        curve.mc_stderr.push_back(
            std::sqrt(p * (1.0 - p) / static_cast<double>(samples)));
    }
    return curve;
}

/**
 * Importance-sampled survival estimate via the exponential change of measure:
 * trajectories are simulated under tilt(mu, x0) and reweighted by
 * L(x0)^m exp(<x0, x - S_m>), which makes the estimator unbiased for
 * P^x(tau > m) at every horizon m.  Useful when x0 points against the drift,
 * where direct simulation starves.  Reports importance-sampling standard
 * errors and effective sample sizes; x0 = 0 reproduces mc_survival exactly.
 *
 * @throws OverflowError when the deterministic prefactor L(x0)^n e^{<x0,x>}
 *         (or a trajectory weight) overflows.
 */
inline SurvivalCurve mc_tilted_survival(const FiniteDistribution& dist, const VectorXr& x0,
                                        const VectorXr& x, int n, long long samples,
                                        std::uint64_t seed, int threads = 1) {
    detail::check_mc_args(x, samples);
    const Eigen::VectorXd tilt_dir = to_double(x0);
    const FiniteDistribution tilted = tilt(dist, tilt_dir);
    const detail::McSampler sampler(tilted);
    const Eigen::VectorXd start = to_double(x);

    const double log_l = laplace_moments(dist, tilt_dir).log_value;
    const double base = tilt_dir.dot(start);
    detail::exp_checked(static_cast<double>(n) * log_l + base); // prefactor guard

    // Per-atom increments of <x0, S_k>, aligned with the sampler's atoms.
    std::vector<double> step_dot;
    for (const Atom& a : tilted.atoms)
        step_dot.push_back(tilt_dir.dot(to_double(a.point)));

    struct Part {
        std::vector<double> sum_w, sum_w2;
    };
    const long long blocks = (samples + detail::kBlock - 1) / detail::kBlock;
    std::vector<Part> parts(static_cast<std::size_t>(blocks));
    for (Part& p : parts) {
        p.sum_w.assign(static_cast<std::size_t>(n) + 1, 0.0);
        p.sum_w2.assign(static_cast<std::size_t>(n) + 1, 0.0);
    }

    detail::parallel_blocks(samples, threads, [&](long long b, long long lo, long long hi) {
        Part& part = parts[static_cast<std::size_t>(b)];
        std::vector<double> pos(static_cast<std::size_t>(sampler.d));
        for (long long r = lo; r < hi; ++r) {
            SplitMix64 g = replicate_stream(seed, static_cast<std::uint64_t>(r));
            for (int i = 0; i < sampler.d; ++i)
                pos[static_cast<std::size_t>(i)] = start(i);
            double dot = base; // <x0, S_k>, updated incrementally
            part.sum_w[0] += 1.0;
            part.sum_w2[0] += 1.0;
            for (int k = 1; k <= n; ++k) {
                const std::size_t a = sampler.draw(g);
                const std::vector<double>& y = sampler.steps[a];
                bool alive = true;
                for (int i = 0; i < sampler.d; ++i) {
                    pos[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
                    if (pos[static_cast<std::size_t>(i)] < 0.0)
                        alive = false;
                }
                if (!alive)
                    break;
                dot += step_dot[a];
                const double w = detail::exp_checked(k * log_l + base - dot);
                part.sum_w[static_cast<std::size_t>(k)] += w;
                part.sum_w2[static_cast<std::size_t>(k)] += w * w;
            }
        }
    });

    Part total = detail::pairwise_reduce(std::move(parts), [](Part a, const Part& b) {
        for (std::size_t i = 0; i < a.sum_w.size(); ++i) {
            a.sum_w[i] += b.sum_w[i];
            a.sum_w2[i] += b.sum_w2[i];
        }
        return a;
    });

    SurvivalCurve curve;
    curve.start = start;
    curve.engine = Engine::MC_TILTED;
    const double nn = static_cast<double>(samples);
    for (int m = 0; m <= n; ++m) {
        const double sw = total.sum_w[static_cast<std::size_t>(m)];
        const double sw2 = total.sum_w2[static_cast<std::size_t>(m)];
        const double mean = sw / nn;
        double var = 0.0;
        if (samples > 1)
            var = std::max(0.0, (sw2 - sw * sw / nn) / (nn - 1.0));
        curve.horizons.push_back(m);
        curve.probabilities.push_back(std::min(mean, 1.0));
        curve.mc_stderr.push_back(std::sqrt(var / nn));
        curve.mc_ess.push_back(sw2 > 0.0 ? sw * sw / sw2 : 0.0);
    }
    return curve;
}

/**
 * Diagnostic estimator for the conditioned lower-bound mechanism: survival in
 * the cone {s : s_i >= 0 for all i in I} with the additional excursion
 * constraint max_k chi(S_k - v) <= R, where
 *
 *   chi(y) = max( max_{i in K} |y_i|, ||y - proj_axes(y)|| )
 *
 * and proj_axes keeps the coordinates in I.  The distribution is expected to
 * live on the subspace spanned by the walk (e.g. a tilted restriction); the
 * start v must satisfy v_i >= 0 for i in I.  Qualitative use only.
 */
inline SurvivalCurve mc_chi_survival(const FiniteDistribution& dist, const VectorXr& v,
                                     const std::vector<int>& I, const std::vector<int>& K,
                                     double R, int n, long long samples,
                                     std::uint64_t seed, int threads = 1) {
    if (samples < 1)
        throw DomainError("samples must be >= 1");
    const detail::McSampler sampler(dist);
    const Eigen::VectorXd start = to_double(v);
    for (int i : I)
        if (start(i) < 0.0)
            throw NotInOrthantError("start point leaves the restricted cone");

    const long long blocks = (samples + detail::kBlock - 1) / detail::kBlock;
    std::vector<std::vector<long long>> parts(
        static_cast<std::size_t>(blocks),
        std::vector<long long>(static_cast<std::size_t>(n) + 2, 0));

    detail::parallel_blocks(samples, threads, [&](long long b, long long lo, long long hi) {
        std::vector<long long>& hist = parts[static_cast<std::size_t>(b)];
        std::vector<double> pos(static_cast<std::size_t>(sampler.d));
        for (long long r = lo; r < hi; ++r) {
            SplitMix64 g = replicate_stream(seed, static_cast<std::uint64_t>(r));
            for (int i = 0; i < sampler.d; ++i)
                pos[static_cast<std::size_t>(i)] = start(i);
            int exit_step = n + 1;
            for (int k = 1; k <= n; ++k) {
                const std::vector<double>& y = sampler.steps[sampler.draw(g)];
                for (int i = 0; i < sampler.d; ++i)
                    pos[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
                bool alive = true;
                for (int i : I)
                    if (pos[static_cast<std::size_t>(i)] < 0.0)
                        alive = false;
                if (alive) {
                    double norm2 = 0.0;
                    for (int i = 0; i < sampler.d; ++i) {
                        const double diff = pos[static_cast<std::size_t>(i)] - start(i);
                        norm2 += diff * diff;
                    }
                    double axes2 = 0.0;
                    double axis_max = 0.0;
                    for (int i : I) {
                        const double diff = pos[static_cast<std::size_t>(i)] - start(i);
                        axes2 += diff * diff;
                    }
                    for (int i : K)
                        axis_max = std::max(
                            axis_max, std::abs(pos[static_cast<std::size_t>(i)] - start(i)));
                    const double chi =
                        std::max(axis_max, std::sqrt(std::max(norm2 - axes2, 0.0)));
                    if (chi > R)
                        alive = false;
                }
                if (!alive) { exit_step = k; break; }
            }
            ++hist[static_cast<std::size_t>(exit_step)];
        }
    });

    std::vector<long long> hist = detail::pairwise_reduce(
        std::move(parts), [](std::vector<long long> a, const std::vector<long long>& b) {
            for (std::size_t i = 0; i < a.size(); ++i)
                a[i] += b[i];
            return a;
        });

    SurvivalCurve curve;
    curve.start = start;
    curve.engine = Engine::MC;
    long long surviving = samples;
    for (int m = 0; m <= n; ++m) {
        if (m > 0)
            surviving -= hist[static_cast<std::size_t>(m)];
        const double p = static_cast<double>(surviving) / static_cast<double>(samples);
        curve.horizons.push_back(m);
        curve.probabilities.push_back(p);
        curve.mc_stderr.push_back(
            std::sqrt(p * (1.0 - p) / static_cast<double>(samples)));
    }
    return curve;
}

/**
 * DP rate with the box-doubling convergence certificate: the truncation
 * radius doubles until two successive ratio estimates agree within 1e-6 (at
 * most six doublings, stopping early if the box would explode).  For walks
 * with bounded-above coordinates the first doubling already changes nothing
 * and the certificate is immediate.  The reported rate is the one from the
 * largest box — a certified lower bound in all cases.
 */
inline RateReport dp_rate(const FiniteDistribution& dist, const VectorXr& x, int n_max,
                          long long trunc = 0) {
    if (trunc <= 0)
        trunc = std::max<long long>(default_truncation(dist, x, n_max), 1);

    RateReport report;
    report.method = RateMethod::Ratio;
    report.period = walk_period(dist, x, trunc);
    report.curve = survival_dp(dist, x, n_max, trunc);
    report.rate = rate_from_curve(report.curve, RateMethod::Ratio, report.period);
    report.converged = false;
    for (int round = 0; round < 6 && !report.converged; ++round) {
        SurvivalCurve wider;
        try {
            wider = survival_dp(dist, x, n_max, trunc * 2);
        } catch (const StateExplosionError&) {
            break;
        }
        const double rate = rate_from_curve(wider, RateMethod::Ratio, report.period);
        report.converged = std::abs(rate - report.rate) < 1e-6;
        report.curve = std::move(wider);
        report.rate = rate;
        trunc *= 2;
    }

    auto [rs, min_report] = reduce_and_minimize(dist);
    report.bound = min_report.inf_value;
    report.d_of_x = depth(rs, x);
    return report;
}

enum class RateEngine { Dp, Spectral, Mc, McTilted };

/// Tunables for rate_sweep and the command-line front end.
struct EngineOptions {
    int n_max = 60;
    long long trunc = 0; // 0 = default_truncation policy
    long long samples = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::optional<VectorXr> tilt_point; // McTilted; defaults to the minimizer v0
};

/**
 * One RateReport per start, all sharing the reduction and the bound, ordered
 * by depth d(x) ascending (ties keep input order) so that the climb of the
 * rates toward inf_Q L is visible top to bottom.
 */
inline std::vector<RateReport> rate_sweep(const FiniteDistribution& dist,
                                          const ReducedSupport& rs,
                                          const MinimizerReport& min_report,
                                          const std::vector<VectorXr>& xs,
                                          RateEngine engine,
                                          const EngineOptions& opts = {}) {
    VectorXr tilt_pt;
    if (engine == RateEngine::McTilted) {
        if (opts.tilt_point) {
            tilt_pt = *opts.tilt_point;
        } else {
            tilt_pt = VectorXr::Zero(dist.dimension);
            for (Eigen::Index i = 0; i < tilt_pt.size(); ++i)
                tilt_pt(i) = rational_from_double(min_report.v0(i));
        }
    }

    std::vector<RateReport> reports;
    for (const VectorXr& x : xs) {
        RateReport rep;
        switch (engine) {
            case RateEngine::Dp:
                rep = dp_rate(dist, x, opts.n_max, opts.trunc);
                break;
            case RateEngine::Spectral:
                rep = spectral_rate(dist, x, opts.trunc, opts.n_max);
                break;
            case RateEngine::Mc: {
                rep.method = RateMethod::Ratio;
                rep.curve = mc_survival(dist, x, opts.n_max, opts.samples, opts.seed,
                                        opts.threads);
                int period = 1;
                if (dist.lattice)
                    period = walk_period(dist, x, default_truncation(dist, x, opts.n_max));
                rep.period = period;
                rep.rate = rate_from_curve(rep.curve, RateMethod::Ratio, period);
                rep.converged = true;
                rep.bound = min_report.inf_value;
                rep.d_of_x = depth(rs, x);
                break;
            }
            case RateEngine::McTilted: {
                rep.method = RateMethod::Ratio;
                rep.curve = mc_tilted_survival(dist, tilt_pt, x, opts.n_max, opts.samples,
                                               opts.seed, opts.threads);
                int period = 1;
                if (dist.lattice)
                    period = walk_period(dist, x, default_truncation(dist, x, opts.n_max));
                rep.period = period;
                rep.rate = rate_from_curve(rep.curve, RateMethod::Ratio, period);
                rep.converged = true;
                rep.bound = min_report.inf_value;
                rep.d_of_x = depth(rs, x);
                break;
            }
        }
        if (engine == RateEngine::Dp || engine == RateEngine::Spectral) {
            // Refresh with the shared reduction (identical values; avoids
            // trusting per-call recomputation for ordering).
            rep.bound = min_report.inf_value;
            rep.d_of_x = depth(rs, x);
        }
        reports.push_back(std::move(rep));
    }

    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return reports[a].d_of_x < reports[b].d_of_x;
    });
    std::vector<RateReport> sorted;
    for (std::size_t i : order)
        sorted.push_back(std::move(reports[i]));
    return sorted;
}

} // namespace orthant
