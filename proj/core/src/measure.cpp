#include "geogasket/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "geogasket/errors.hpp"
#include "geogasket/parallel.hpp"

namespace geogasket {

namespace {

long double total_weight(const std::vector<Atom>& atoms) {
    long double sum = 0.0L;
    for (const auto& a : atoms) sum += a.weight;
    return sum;
}

MultiIndex prefix_of(const MultiIndex& m, std::size_t n) {
    const auto& d = m.digits();
    return MultiIndex(std::vector<std::uint8_t>(d.begin(), d.begin() + static_cast<long>(n)));
}

// Network simplex on the complete bipartite graph supply -> demand. Nodes
// 0..n-1 are supplies, n..n+m-1 demands; arc a runs from a / m to n + a % m.
// The initial basis is the north-west corner staircase, which is strongly
// feasible when rooted at supply 0; the leaving-arc rule below (last blocking
// arc after the apex, in flow direction) keeps it so and rules out cycling.
class TransportSimplex {
public:
    TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                     std::span<const double> cost)
        : n_(supply.size()), m_(demand.size()), cost_(cost.begin(), cost.end()) {
        const std::size_t nodes = n_ + m_;
        flow_.assign(n_ * m_, 0.0);
        in_tree_.assign(n_ * m_, 0);
        adj_.resize(nodes);
        parent_.resize(nodes);
        pred_.resize(nodes);
        depth_.resize(nodes);
        pi_.resize(nodes);

        std::vector<double> rs(supply.begin(), supply.end()), rd(demand.begin(), demand.end());
        std::size_t i = 0, j = 0;
        for (;;) {
            const double f = std::min(rs[i], rd[j]);
            rs[i] -= f;
            rd[j] -= f;
            add_tree_arc(i * m_ + j, std::max(f, 0.0));
            if (i == n_ - 1 && j == m_ - 1) break;
            if (i == n_ - 1) {
                ++j;
            } else if (j == m_ - 1) {
                ++i;
            } else if (rs[i] > 0.0) {
                ++j;
            } else if (rd[j] > 0.0) {
                ++i;
            } else {
                ++j;  // both exhausted: the zero arc (i, j+1) hangs below supply i
            }
        }
        max_cost_ = 0.0;
        for (double c : cost_) max_cost_ = std::max(max_cost_, c);
        rebuild();
    }

    double solve() {
        const std::size_t arcs = n_ * m_;
        const std::size_t block = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(
                                                                static_cast<double>(arcs))));
        const double eps = 1e-12 * std::max(max_cost_, 1e-300);
        const std::size_t max_pivots = 100 * arcs + 10'000;
        std::size_t next = 0;
        for (std::size_t pivots = 0;; ++pivots) {
            if (pivots > max_pivots) {
                throw ConvergenceError("network simplex exceeded its pivot limit", 0.0);
            }
            double best = -eps;
            std::size_t entering = arcs;
            std::size_t scanned = 0;
            while (scanned < arcs) {
                const std::size_t stop = std::min(arcs, scanned + block);
                for (; scanned < stop; ++scanned) {
                    const std::size_t a = next;
                    next = next + 1 == arcs ? 0 : next + 1;
                    if (in_tree_[a]) continue;
                    const double rc = cost_[a] + pi_[a / m_] - pi_[n_ + a % m_];
                    if (rc < best) {
                        best = rc;
                        entering = a;
                    }
                }
                if (entering != arcs) break;
            }
            if (entering == arcs) break;
            pivot(entering);
        }
        double total = 0.0;
        for (std::size_t a = 0; a < arcs; ++a)
            if (in_tree_[a]) total += flow_[a] * cost_[a];
        return total;
    }

private:
    std::size_t n_, m_;
    std::vector<double> cost_, flow_;
    std::vector<char> in_tree_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> parent_, pred_, depth_;
    std::vector<double> pi_;
    std::vector<std::size_t> queue_;
    double max_cost_ = 0.0;
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t tail(std::size_t a) const { return a / m_; }
    std::size_t head(std::size_t a) const { return n_ + a % m_; }

    void add_tree_arc(std::size_t a, double f) {
        in_tree_[a] = 1;
        flow_[a] = f;
        adj_[tail(a)].push_back(a);
        adj_[head(a)].push_back(a);
    }

    void remove_tree_arc(std::size_t a) {
        in_tree_[a] = 0;
        flow_[a] = 0.0;
        for (std::size_t x : {tail(a), head(a)}) {
            auto& v = adj_[x];
            auto it = std::find(v.begin(), v.end(), a);
            *it = v.back();
            v.pop_back();
        }
    }

    void rebuild() {
        parent_[0] = npos;
        depth_[0] = 0;
        pi_[0] = 0.0;
        walk(0);
    }

    void hang(std::size_t x, std::size_t parent, std::size_t arc) {
        parent_[x] = parent;
        pred_[x] = arc;
        depth_[x] = depth_[parent] + 1;
        pi_[x] = x >= n_ ? pi_[parent] + cost_[arc] : pi_[parent] - cost_[arc];
        walk(x);
    }

    // Breadth-first refresh of everything below `top`.
    void walk(std::size_t top) {
        auto& queue = queue_;
        queue.assign(1, top);
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const std::size_t x = queue[q];
            for (std::size_t a : adj_[x]) {
                const std::size_t y = tail(a) == x ? head(a) : tail(a);
                if (y == parent_[x]) continue;
                parent_[y] = x;
                pred_[y] = a;
                depth_[y] = depth_[x] + 1;
                pi_[y] = y >= n_ ? pi_[x] + cost_[a] : pi_[x] - cost_[a];
                queue.push_back(y);
            }
        }
    }

    void pivot(std::size_t e) {
        std::size_t u = tail(e), v = head(e);
        std::vector<std::size_t> up_u, up_v;
        while (depth_[u] > depth_[v]) {
            up_u.push_back(u);
            u = parent_[u];
        }
        while (depth_[v] > depth_[u]) {
            up_v.push_back(v);
            v = parent_[v];
        }
        while (u != v) {
            up_u.push_back(u);
            up_v.push_back(v);
            u = parent_[u];
            v = parent_[v];
        }
        // Cycle in flow direction from the apex: down to tail(e), across e,
        // then up from head(e). Arc pred[x] is traversed parent -> x on the way
        // down and x -> parent on the way up.
        struct Step {
            std::size_t arc;
            bool increase;
            bool tail_side;
        };
        std::vector<Step> cycle;
        cycle.reserve(up_u.size() + up_v.size());
        for (auto it = up_u.rbegin(); it != up_u.rend(); ++it)
            cycle.push_back({pred_[*it], *it >= n_, true});
        for (std::size_t x : up_v) cycle.push_back({pred_[x], x < n_, false});

        double delta = std::numeric_limits<double>::infinity();
        const Step* leaving = nullptr;
        for (const auto& s : cycle) {
            if (!s.increase && flow_[s.arc] <= delta) {
                delta = flow_[s.arc];
                leaving = &s;
            }
        }
        for (const auto& s : cycle) flow_[s.arc] += s.increase ? delta : -delta;
        // The endpoint of e below the leaving arc takes the other endpoint as
        // its new parent; only that subtree needs new depths and potentials.
        const std::size_t moved = leaving->tail_side ? tail(e) : head(e);
        const std::size_t anchor = leaving->tail_side ? head(e) : tail(e);
        remove_tree_arc(leaving->arc);
        add_tree_arc(e, delta);
        hang(moved, anchor, e);
    }
};

struct Side {
    std::vector<SurfacePoint> points;
    std::vector<double> weights;
    std::vector<const MultiIndex*> addresses;
};

Side positive_atoms(const DiscreteMeasure& mu) {
    Side s;
    for (const auto& a : mu.atoms()) {
        if (a.weight <= 0.0) continue;
        s.points.push_back(a.point);
        s.weights.push_back(a.weight);
        s.addresses.push_back(&a.address);
    }
    return s;
}

double ground(const DistanceFn& dist, bool bounded, const SurfacePoint& p, const SurfacePoint& q) {
    const double d = dist(p, q);
    return bounded ? std::min(d, 2.0) : d;
}

// Exact transport between weighted point lists with equal totals.
double exact_transport(const std::vector<SurfacePoint>& ps, const std::vector<double>& pw,
                       const std::vector<SurfacePoint>& qs, const std::vector<double>& qw,
                       const DistanceFn& dist, bool bounded, bool parallel) {
    if (ps.empty() || qs.empty()) return 0.0;
    std::vector<double> cost(ps.size() * qs.size());
    auto row = [&](std::size_t i) {
        for (std::size_t j = 0; j < qs.size(); ++j)
            cost[i * qs.size() + j] = ground(dist, bounded, ps[i], qs[j]);
    };
    if (parallel) {
        parallel_for(ps.size(), row);
    } else {
        for (std::size_t i = 0; i < ps.size(); ++i) row(i);
    }
    return transport_cost(pw, qw, cost);
}

// W1 on the line between the pushforwards of both sides under x -> d(x, z).
double projected_bound(const Side& a, const Side& b, const SurfacePoint& z, const DistanceFn& dist) {
    std::vector<std::pair<double, double>> ev;  // (position, signed mass)
    ev.reserve(a.points.size() + b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) ev.emplace_back(dist(a.points[i], z), a.weights[i]);
    for (std::size_t j = 0; j < b.points.size(); ++j) ev.emplace_back(dist(b.points[j], z), -b.weights[j]);
    std::sort(ev.begin(), ev.end());
    double cdf = 0.0, w1 = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
        cdf += ev[k].second;
        w1 += std::abs(cdf) * (ev[k + 1].first - ev[k].first);
    }
    return w1;
}

struct Item {
    SurfacePoint point;
    double weight;
    bool second;  // belongs to the second measure
    MultiIndex prefix;
};

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (!(a.weight >= 0.0)) throw DomainError("measure has a negative atom weight");
    }
    const long double total = total_weight(atoms_);
    if (std::abs(total - 1.0L) > 1e-12L) {
        throw DomainError("measure weights sum to " + std::to_string(static_cast<double>(total)) +
                          ", not 1");
    }
}

DiscreteMeasure DiscreteMeasure::point_mass(const SurfacePoint& p, MultiIndex address) {
    return DiscreteMeasure({Atom{p, 1.0, std::move(address)}});
}

double transport_cost(std::span<const double> supply, std::span<const double> demand,
                      std::span<const double> cost) {
    if (cost.size() != supply.size() * demand.size()) {
        throw DomainError("cost matrix does not match the supply and demand sizes");
    }
    double s = 0.0, d = 0.0;
    for (double x : supply) {
        if (!(x >= 0.0)) throw DomainError("negative supply");
        s += x;
    }
    for (double x : demand) {
        if (!(x >= 0.0)) throw DomainError("negative demand");
        d += x;
    }
    if (std::abs(s - d) > 1e-12 * std::max({s, d, 1e-300})) {
        throw DomainError("supply and demand totals differ");
    }
    if (supply.empty() || demand.empty()) return 0.0;
    TransportSimplex simplex(supply, demand, cost);
    return simplex.solve();
}

KrResult kr_distance(const DiscreteMeasure& a, const DiscreteMeasure& b, const DistanceFn& dist,
                     const KrOptions& options) {
    const Side A = positive_atoms(a), B = positive_atoms(b);
    KrResult r;
    if (A.points.size() + B.points.size() <= options.exact_limit) {
        r.value = exact_transport(A.points, A.weights, B.points, B.weights, dist, options.bounded, true);
        r.lower = r.upper = r.value;
        return r;
    }

    std::size_t min_len = std::numeric_limits<std::size_t>::max();
    for (auto* m : A.addresses) min_len = std::min(min_len, m->size());
    for (auto* m : B.addresses) min_len = std::min(min_len, m->size());

    // Smallest prefix length at which every cell fits an exact solve.
    using Cells = std::map<MultiIndex, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>;
    Cells cells;
    std::size_t q = 1;
    for (;; ++q) {
        if (q > min_len) {
            throw CapacityError("measures with " + std::to_string(A.points.size() + B.points.size()) +
                                " atoms exceed the exact limit and their addresses are too short "
                                "to split");
        }
        cells.clear();
        for (std::size_t i = 0; i < A.points.size(); ++i)
            cells[prefix_of(*A.addresses[i], q)].first.push_back(i);
        for (std::size_t j = 0; j < B.points.size(); ++j)
            cells[prefix_of(*B.addresses[j], q)].second.push_back(j);
        std::size_t largest = 0;
        for (const auto& [key, c] : cells) largest = std::max(largest, c.first.size() + c.second.size());
        if (largest <= options.exact_limit) break;
    }

    // Level q: match the common mass inside each cell, carry the rest to the
    // cell representative (its first atom).
    std::vector<const Cells::value_type*> list;
    for (const auto& kv : cells) list.push_back(&kv);
    std::vector<double> cell_cost(list.size(), 0.0);
    std::vector<Item> carried(list.size());
    parallel_for(list.size(), [&](std::size_t c) {
        const auto& [key, members] = *list[c];
        std::vector<SurfacePoint> ps, qs;
        std::vector<double> pw, qw;
        double ta = 0.0, tb = 0.0;
        for (std::size_t i : members.first) {
            ps.push_back(A.points[i]);
            pw.push_back(A.weights[i]);
            ta += A.weights[i];
        }
        for (std::size_t j : members.second) {
            qs.push_back(B.points[j]);
            qw.push_back(B.weights[j]);
            tb += B.weights[j];
        }
        const double common = std::min(ta, tb);
        double cost = 0.0;
        if (common > 0.0) {
            std::vector<double> sp(pw), sq(qw);
            for (auto& w : sp) w *= common / ta;
            for (auto& w : sq) w *= common / tb;
            cost += exact_transport(ps, sp, qs, sq, dist, options.bounded, false);
        }
        const SurfacePoint rep = ps.empty() ? qs.front() : ps.front();
        const bool second = tb > ta;
        const auto& rest_p = second ? qs : ps;
        const auto& rest_w = second ? qw : pw;
        const double total = second ? tb : ta;
        double rest = 0.0;
        if (total > common) {
            for (std::size_t k = 0; k < rest_p.size(); ++k) {
                const double w = rest_w[k] * (1.0 - common / total);
                cost += w * ground(dist, options.bounded, rest_p[k], rep);
                rest += w;
            }
        }
        cell_cost[c] = cost;
        carried[c] = Item{rep, rest, second, key};
    });
    double upper = std::accumulate(cell_cost.begin(), cell_cost.end(), 0.0);

    // Coarser levels: at most `branching` carried items per cell.
    for (std::size_t level = q; level-- > 0;) {
        std::map<MultiIndex, std::vector<Item>> groups;
        for (auto& it : carried) {
            if (it.weight <= 0.0) continue;
            MultiIndex key = prefix_of(it.prefix, level);
            groups[key].push_back(std::move(it));
        }
        std::vector<Item> next;
        for (auto& [key, items] : groups) {
            std::vector<SurfacePoint> ps, qs;
            std::vector<double> pw, qw;
            for (const auto& it : items) {
                (it.second ? qs : ps).push_back(it.point);
                (it.second ? qw : pw).push_back(it.weight);
            }
            const double ta = std::accumulate(pw.begin(), pw.end(), 0.0);
            const double tb = std::accumulate(qw.begin(), qw.end(), 0.0);
            const double common = std::min(ta, tb);
            if (common > 0.0) {
                std::vector<double> sp(pw), sq(qw);
                for (auto& w : sp) w *= common / ta;
                for (auto& w : sq) w *= common / tb;
                upper += exact_transport(ps, sp, qs, sq, dist, options.bounded, false);
            }
            if (level == 0) break;  // totals agree up to round-off at the root
            const SurfacePoint rep = items.front().point;
            const bool second = tb > ta;
            const auto& rest_p = second ? qs : ps;
            const auto& rest_w = second ? qw : pw;
            const double total = second ? tb : ta;
            double rest = 0.0;
            if (total > common) {
                for (std::size_t k = 0; k < rest_p.size(); ++k) {
                    const double w = rest_w[k] * (1.0 - common / total);
                    upper += w * ground(dist, options.bounded, rest_p[k], rep);
                    rest += w;
                }
            }
            next.push_back(Item{rep, rest, second, key});
        }
        carried = std::move(next);
    }

    double lower = 0.0;
    if (!options.bounded) {
        std::vector<SurfacePoint> anchors{A.points.front(), B.points.front()};
        std::size_t step = std::max<std::size_t>(1, list.size() / 4);
        for (std::size_t c = 0; c < list.size() && anchors.size() < 8; c += step) {
            const auto& members = list[c]->second;
            anchors.push_back(members.first.empty() ? B.points[members.second.front()]
                                                    : A.points[members.first.front()]);
        }
        std::vector<double> bounds(anchors.size());
        parallel_for(anchors.size(),
                     [&](std::size_t k) { bounds[k] = projected_bound(A, B, anchors[k], dist); });
        lower = *std::max_element(bounds.begin(), bounds.end());
    }

    r.exact = false;
    r.split_depth = static_cast<int>(q);
    r.upper = upper;
    r.lower = std::min(lower, upper);
    r.value = upper;
    return r;
}

DiscreteMeasure default_seed(const TriangleSystem& sys) {
    return DiscreteMeasure::point_mass(sys.base().phi(0, 0.5, 2.0 / 3.0));
}

FixpointResult pushforward_fixpoint(const TriangleSystem& sys, std::span<const double> weights,
                                    int iterations, const DiscreteMeasure& seed,
                                    const FixpointOptions& options) {
    if (weights.empty() || weights.size() > static_cast<std::size_t>(sys.branching())) {
        throw DomainError("need between 1 and " + std::to_string(sys.branching()) + " weights");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw DomainError("map weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("map weights must sum to 1");
    if (iterations < 0) throw DomainError("iteration count must be nonnegative");
    if (!(options.snap_tolerance > 0.0 && options.snap_tolerance < 1.0)) {
        throw DomainError("snap tolerance must lie in (0,1)");
    }

    const Surface& surface = sys.surface();
    const DistanceFn dist = [&surface](const SurfacePoint& p, const SurfacePoint& q) {
        return surface.distance(p, q);
    };
    const std::size_t k = weights.size();
    const std::size_t snap_depth = std::min<std::size_t>(
        static_cast<std::size_t>(std::ceil(std::log2(1.0 / options.snap_tolerance))),
        static_cast<std::size_t>(sys.depth()));

    FixpointResult result;
    result.measure = seed;
    for (int it = 0; it < iterations; ++it) {
        const auto& cur = result.measure.atoms();
        const std::size_t count = cur.size() * k;
        if (count > options.atom_budget && !options.resample) {
            throw CapacityError("iterate " + std::to_string(it + 1) + " needs " +
                                std::to_string(count) + " atoms, budget is " +
                                std::to_string(options.atom_budget));
        }
        std::vector<Atom> next(count);
        parallel_for(count, [&](std::size_t idx) {
            const std::size_t d = idx / cur.size();
            const Atom& x = cur[idx % cur.size()];
            const MultiIndex digit({static_cast<std::uint8_t>(d + 1)});
            next[idx] = Atom{sys.apply_f(digit, x.point), weights[d] * x.weight, digit.concat(x.address)};
        });

        if (count > options.atom_budget) {
            std::map<MultiIndex, double> merged;
            std::vector<Atom> kept;
            for (auto& a : next) {
                if (a.address.size() >= snap_depth) {
                    merged[prefix_of(a.address, snap_depth)] += a.weight;
                } else {
                    kept.push_back(std::move(a));
                }
            }
            std::vector<Atom> snapped(merged.size());
            std::vector<const std::pair<const MultiIndex, double>*> entries;
            for (const auto& e : merged) entries.push_back(&e);
            parallel_for(entries.size(), [&](std::size_t c) {
                const auto& [addr, w] = *entries[c];
                snapped[c] = Atom{sys.cell(addr).phi(0, 0.5, 2.0 / 3.0), w, addr};
            });
            snapped.insert(snapped.end(), std::make_move_iterator(kept.begin()),
                           std::make_move_iterator(kept.end()));
            if (snapped.size() > options.atom_budget) {
                throw CapacityError("resampled iterate still has " + std::to_string(snapped.size()) +
                                    " atoms, budget is " + std::to_string(options.atom_budget));
            }
            next = std::move(snapped);
            ++result.resamples;
        }
        DiscreteMeasure mu(std::move(next));
        result.trace.push_back(kr_distance(mu, result.measure, dist, options.kr));
        result.measure = std::move(mu);
    }
    return result;
}

std::vector<double> cell_masses(const DiscreteMeasure& mu, const TriangleSystem& sys, int n) {
    if (n < 0 || n > sys.depth()) throw DomainError("level outside the system depth");
    std::vector<double> mass(sys.level(n).size(), 0.0);
    const auto k = static_cast<std::uint8_t>(sys.branching());
    for (const auto& a : mu.atoms()) {
        MultiIndex at;
        if (a.address.size() >= static_cast<std::size_t>(n)) {
            at = prefix_of(a.address, static_cast<std::size_t>(n));
        } else {
            for (int level = 0; level < n; ++level) {
                bool found = false;
                for (std::uint8_t d = 1; d <= k && !found; ++d) {
                    if (sys.cell(at.child(d)).contains(a.point)) {
                        at = at.child(d);
                        found = true;
                    }
                }
                if (!found) throw DomainError("atom lies outside every level-" + std::to_string(n) + " cell");
            }
        }
        mass[sys.offset_of(at)] += a.weight;
    }
    return mass;
}

double invariance_residual(const DiscreteMeasure& mu, const TriangleSystem& sys,
                           std::span<const double> weights, int n) {
    const auto mass = cell_masses(mu, sys, n);
    double worst = 0.0;
    for (std::size_t off = 0; off < mass.size(); ++off) {
        double target = 1.0;
        const MultiIndex index = sys.index_at(n, off);
        for (auto d : index.digits())
            target *= d <= weights.size() ? weights[d - 1u] : 0.0;
        worst = std::max(worst, std::abs(mass[off] - target));
    }
    return worst;
}

}  // namespace geogasket
