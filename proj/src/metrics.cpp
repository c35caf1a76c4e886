#include "mee/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "mee/rng.hpp"

namespace mee {

std::optional<double> specialization_entropy(const std::array<double, kBuckets>& gain) {
    double total = 0.0;
    for (double g : gain) total += g;
    if (!(total > 0.0)) return std::nullopt;
    double h = 0.0;
    for (double g : gain) {
        if (g <= 0.0) continue;
        const double q = g / total;
        h -= q * std::log2(q);
    }
    return std::max(0.0, h);
}

bool noise_dominated(const ProfileWindow& w, bool admits_noise) {
    if (!admits_noise) return false;
    double total = 0.0;
    for (double v : w.volume) total += v;
    if (!(total > 0.0)) return false;
    const double share = w.volume[index_of(StreamKind::Noise)] / total;
    // A share of exactly one quarter counts; the tolerance absorbs rounding.
    return share >= 0.25 * (1.0 - 1e-9);
}

double noise_fraction(std::span<const UnitEnergyProfile> profiles) {
    if (profiles.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& p : profiles) hits += noise_dominated(p.window, p.admits_noise) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(profiles.size());
}

TrophicAssignment assign_trophic_levels(std::span<const UnitEnergyProfile> profiles,
                                        const std::map<std::uint64_t, int>* previous) {
    const std::size_t n = profiles.size();
    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(profiles[i].unit_id, i);

    std::vector<std::vector<std::size_t>> feeds(n);  // i -> emitters it earned from
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [id, g] : profiles[i].window.emitter_gain) {
            auto it = index.find(id);
            if (g > 0.0 && it != index.end() && it->second != i) feeds[i].push_back(it->second);
        }

    // Tarjan; components come out emitters-first.
    std::vector<int> comp(n, -1), low(n, 0), order(n, -1);
    std::vector<std::size_t> stack;
    std::vector<bool> on_stack(n, false);
    std::vector<std::vector<std::size_t>> components;
    int counter = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        order[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w : feeds[v]) {
            if (order[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], order[w]);
            }
        }
        if (low[v] == order[v]) {
            std::vector<std::size_t> members;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = static_cast<int>(components.size());
                members.push_back(w);
            } while (w != v);
            components.push_back(std::move(members));
        }
    };
    for (std::size_t v = 0; v < n; ++v)
        if (order[v] < 0) visit(v);

    std::vector<int> level(n, 1);
    auto level_of = [&](std::uint64_t id) {
        auto it = index.find(id);
        if (it != index.end()) return level[it->second];
        if (previous) {
            auto p = previous->find(id);
            if (p != previous->end()) return p->second;
        }
        return 1;
    };

    for (const auto& members : components) {
        int best = kMaxTrophicLevel;
        for (std::size_t u : members) {
            const auto& w = profiles[u].window;
            double total = 0.0;
            for (double g : w.gain) total += g;
            double base = w.gain[0] + w.gain[1] + w.gain[2] + w.gain[3];
            std::vector<std::pair<int, double>> fed;
            for (const auto& [id, g] : w.emitter_gain) {
                if (g <= 0.0) continue;
                auto it = index.find(id);
                if (it != index.end() && comp[it->second] == comp[u])
                    base += g;
                else
                    fed.emplace_back(level_of(id), g);
            }
            int lv = 1;
            if (total > 0.0 && !(base > 0.5 * total) && !fed.empty()) {
                std::sort(fed.begin(), fed.end());
                double mass = 0.0;
                for (const auto& f : fed) mass += f.second;
                double acc = 0.0;
                int median = fed.front().first;
                for (const auto& f : fed) {
                    acc += f.second;
                    median = f.first;
                    if (acc >= 0.5 * mass) break;
                }
                lv = std::min(kMaxTrophicLevel, median + 1);
            }
            best = std::min(best, lv);
        }
        for (std::size_t u : members) level[u] = best;
    }

    TrophicAssignment out;
    for (std::size_t i = 0; i < n; ++i) {
        const int lv = level[i];
        out.level[profiles[i].unit_id] = lv;
        ++out.histogram[static_cast<std::size_t>(lv)];
        const auto& w = profiles[i].window;
        out.flow[0][static_cast<std::size_t>(lv)] += w.gain[0] + w.gain[1] + w.gain[2] + w.gain[3];
        for (const auto& [id, g] : w.emitter_gain)
            out.flow[static_cast<std::size_t>(level_of(id))][static_cast<std::size_t>(lv)] += g;
    }
    return out;
}

namespace {

// Mean distance over ordered pairs (i, j), i != j, drawn from [0, na) x [0, nb).
std::pair<double, std::size_t> mean_pair_distance(std::span<const Genome> a, std::span<const Genome> b,
                                                  std::uint64_t seed, std::size_t cap, const DistanceScale& scale) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    double sum = 0.0;
    std::size_t count = 0;
    if (na * nb <= cap) {
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb; ++j) {
                if (i == j) continue;
                sum += genome_distance(a[i], b[j], scale);
                ++count;
            }
    } else {
        Rng rng(derive_key({seed, 0x70617468ULL}));
        while (count < cap) {
            const std::size_t i = rng.below(na);
            const std::size_t j = rng.below(nb);
            if (i == j) continue;
            sum += genome_distance(a[i], b[j], scale);
            ++count;
        }
    }
    return {count ? sum / static_cast<double>(count) : 0.0, count};
}

}  // namespace

Divergence path_divergence(std::span<const Genome> a, std::span<const Genome> b, std::uint64_t seed,
                           std::size_t cap, const DistanceScale& scale) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("path_divergence needs two genomes per population");
    Divergence d;
    const auto inter = mean_pair_distance(a, b, seed, cap, scale);
    const auto ia = mean_pair_distance(a, a, seed, cap, scale);
    const auto ib = mean_pair_distance(b, b, seed, cap, scale);
    d.inter = inter.first;
    d.inter_pairs = inter.second;
    d.intra = 0.5 * (ia.first + ib.first);
    d.intra_pairs = ia.second + ib.second;
    return d;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return 0.0;
    const double mx = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

ComplexitySeries complexity_series(std::vector<ComplexityPoint> points) {
    ComplexitySeries out;
    out.points = std::move(points);
    std::vector<double> t, nodes, edges;
    for (const auto& p : out.points) {
        t.push_back(static_cast<double>(p.tick));
        nodes.push_back(p.mean_nodes);
        edges.push_back(p.mean_edges);
    }
    out.node_slope = ols_slope(t, nodes);
    out.edge_slope = ols_slope(t, edges);
    return out;
}

ComplexitySeries complexity_series(std::span<const std::vector<Genome>> populations,
                                   std::span<const std::int64_t> ticks) {
    std::vector<ComplexityPoint> pts;
    for (std::size_t i = 0; i < populations.size() && i < ticks.size(); ++i) {
        ComplexityPoint p;
        p.tick = ticks[i];
        for (const auto& g : populations[i]) {
            p.mean_nodes += g.node_count;
            p.mean_edges += static_cast<double>(g.connections.size());
        }
        if (!populations[i].empty()) {
            p.mean_nodes /= static_cast<double>(populations[i].size());
            p.mean_edges /= static_cast<double>(populations[i].size());
        }
        pts.push_back(p);
    }
    return complexity_series(std::move(pts));
}

std::vector<double> efficiency_series(std::span<const double> cost, std::span<const double> improvement) {
    std::vector<double> out(std::min(cost.size(), improvement.size()), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = improvement[i] > 0.0 ? cost[i] / improvement[i] : 0.0;
    return out;
}

MannKendall mann_kendall(std::span<const double> x, double alpha) {
    MannKendall r;
    r.n = x.size();
    const std::size_t n = x.size();
    if (n < 3) return r;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
    r.s = s;

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        if (t > 1) ties += t * (t - 1) * (2 * t + 5);
        i = j;
    }
    const double nn = static_cast<double>(n);
    r.variance = (nn * (nn - 1) * (2 * nn + 5) - ties) / 18.0;
    if (r.variance > 0.0) {
        if (s > 0)
            r.z = (s - 1) / std::sqrt(r.variance);
        else if (s < 0)
            r.z = (s + 1) / std::sqrt(r.variance);
    }
    r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
    if (r.p_value < alpha) r.trend = r.z > 0 ? "increasing" : "decreasing";
    return r;
}

std::vector<double> block_means(std::span<const double> series, std::size_t block) {
    std::vector<double> out;
    if (block == 0) return out;
    for (std::size_t i = 0; i + block <= series.size(); i += block) {
        double s = 0.0;
        for (std::size_t j = i; j < i + block; ++j) s += series[j];
        out.push_back(s / static_cast<double>(block));
    }
    return out;
}

}  // namespace mee
