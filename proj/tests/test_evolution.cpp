#include <doctest.h>

#include <type_traits>

#include "mee/evolution.hpp"
#include "support.hpp"

using namespace mee;

namespace {

Genome founder(std::uint64_t seed, int nodes = 5) {
    FounderSpec s;
    s.layout = Layout{4, 2};
    Rng rng(seed);
    return new_uniform_genome(nodes, s, rng);
}

MutationRates zero_rates() {
    MutationRates r;
    r.weight_rate = 0.0;
    r.topo_rate = 0.0;
    r.param_rate = 0.0;
    r.interface_factor = 0.0;
    return r;
}

Unit unit_with(const Genome& g, double energy, std::uint64_t id) {
    Unit u;
    u.id = id;
    u.energy = energy;
    u.genome = g;
    u.phenotype = g;
    return u;
}

}  // namespace

// Operators only see genomes, rates and a random stream.
static_assert(std::is_invocable_r_v<Genome, decltype(&mutate_weights), Genome, const MutationRates&, Rng&>);
static_assert(std::is_invocable_r_v<Genome, decltype(&mutate_topology), Genome, const MutationRates&,
                                    const VariationLimits&, Rng&, TopologyOp*>);
static_assert(std::is_invocable_r_v<Genome, decltype(&mutate_params_and_interface), Genome, const MutationRates&,
                                    const VariationLimits&, Rng&>);

TEST_CASE("weight mutation degenerate cases") {
    const Genome g = founder(1);
    Rng rng(2);
    MutationRates r;
    r.weight_rate = 0.0;
    CHECK(mutate_weights(g, r, rng) == g);
    r.weight_rate = 1.0;
    r.weight_sigma = 0.0;
    CHECK(mutate_weights(g, r, rng) == g);
}

TEST_CASE("weight mutation count, Monte Carlo") {
    Genome g = founder(3);
    g.connections.resize(100);
    for (std::size_t i = 0; i < 100; ++i) g.connections[i] = {static_cast<int>(i / 10), 10 + static_cast<int>(i % 10), 0.5};
    g.node_count = 10;
    g.sort_connections();
    MutationRates r;
    r.weight_rate = 0.01;
    Rng rng(77);
    const int trials = 100000;
    double changed = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Genome m = mutate_weights(g, r, rng);
        for (std::size_t i = 0; i < 100; ++i) changed += m.connections[i].weight != g.connections[i].weight ? 1.0 : 0.0;
    }
    const double mean = changed / trials;
    MESSAGE("mean perturbed connections " << mean);
    CHECK(mean >= 0.97);
    CHECK(mean <= 1.03);
}

TEST_CASE("topology mutation") {
    const Genome g = founder(4);
    VariationLimits lim;
    Rng rng(5);
    MutationRates r = zero_rates();
    CHECK(mutate_topology(g, r, lim, rng) == g);

    const std::size_t e = g.connections.size();
    const Connection old = g.connections[7];
    const Genome s = split_edge(g, 7, lim);
    CHECK(s.connections.size() == e + 1);
    CHECK(s.node_count == g.node_count + 1);
    const int fresh = s.total_nodes() - 1;
    CHECK_FALSE(s.find(old.src, old.dst).has_value());
    REQUIRE(s.find(old.src, fresh).has_value());
    REQUIRE(s.find(fresh, old.dst).has_value());
    CHECK(s.connections[*s.find(old.src, fresh)].weight == 1.0);
    CHECK(s.connections[*s.find(fresh, old.dst)].weight == old.weight);
    CHECK(validate_genome(s, lim.bounds).empty());

    VariationLimits capped = lim;
    capped.bounds.node_max = g.node_count;
    CHECK(split_edge(g, 0, capped) == g);

    r.topo_rate = 1.0;
    for (int i = 0; i < 500; ++i) {
        TopologyOp op = TopologyOp::None;
        const Genome m = mutate_topology(g, r, lim, rng, &op);
        CHECK(validate_genome(m, lim.bounds).empty());
        CHECK((op == TopologyOp::None) == (m == g));
    }
}

TEST_CASE("delete skips the last edge into the readouts") {
    Genome g = founder(6);
    const int h = g.layout.hidden_begin();
    g.connections = {{h, g.layout.prediction_begin(), 0.3}};
    VariationLimits lim;
    CHECK(delete_edge(g, 0, lim) == g);
    lim.strict_blind_deletion = true;
    CHECK(delete_edge(g, 0, lim).connections.empty());
}

TEST_CASE("interface genes") {
    const Genome g = founder(8);
    VariationLimits lim;
    MutationRates r;
    r.param_rate = 1.0;
    r.interface_factor = 0.0;
    Rng rng(9);
    for (int i = 0; i < 2000; ++i) CHECK(mutate_params_and_interface(g, r, lim, rng).interface == g.interface);

    Genome one = g;
    one.interface.receptor_mask.assign(one.interface.receptor_mask.size(), false);
    one.interface.receptor_mask[2] = true;
    for (int i = 0; i < 50; ++i) {
        Genome m = one;
        flip_receptor_bit(m, 2, rng);
        int set = 0;
        for (bool b : m.interface.receptor_mask) set += b ? 1 : 0;
        // The flip lands on an unset bit instead, so the last set bit survives.
        CHECK(set == 2);
        CHECK(m.interface.receptor_mask[2]);
    }
}

TEST_CASE("interface mutation frequency, Monte Carlo") {
    const Genome g = founder(10);
    VariationLimits lim;
    MutationRates r;
    r.param_rate = 0.05;
    r.interface_factor = 0.01;
    Rng rng(123);
    const int trials = 1000000;
    int mask = 0;
    int gain = 0;
    for (int i = 0; i < trials; ++i) {
        const Genome m = mutate_params_and_interface(g, r, lim, rng);
        mask += m.interface.receptor_mask != g.interface.receptor_mask ? 1 : 0;
        gain += m.interface.emission_gain != g.interface.emission_gain ? 1 : 0;
    }
    const double expect = 0.05 * 0.01;
    const double sd = std::sqrt(expect * (1 - expect) / trials);
    MESSAGE("mask " << static_cast<double>(mask) / trials << " gain " << static_cast<double>(gain) / trials);
    CHECK(std::abs(static_cast<double>(mask) / trials - expect) < 4 * sd);
    CHECK(std::abs(static_cast<double>(gain) / trials - expect) < 4 * sd);
}

TEST_CASE("recombination") {
    const Genome g = founder(11);
    VariationLimits lim;
    Rng rng(12);
    CHECK(recombine(g, g, zero_rates(), lim, rng) == g);

    Genome a = founder(13, 10);
    Genome b = a;
    const int h = a.layout.hidden_begin();
    a.connections.clear();
    b.connections.clear();
    for (int i = 0; i < 4; ++i) a.connections.push_back({0, h + i, 0.1});
    for (int i = 0; i < 6; ++i) b.connections.push_back({1, h + i, 0.2});
    const int trials = 20000;
    double edges = 0.0;
    for (int i = 0; i < trials; ++i) edges += static_cast<double>(recombine(a, b, zero_rates(), lim, rng).connections.size());
    CHECK(edges / trials == doctest::Approx(5.0).epsilon(0.01));

    MutationRates r;
    r.topo_rate = 0.5;
    r.param_rate = 0.5;
    r.interface_factor = 0.5;
    for (int i = 0; i < 500; ++i) {
        const Genome x = founder(100 + static_cast<std::uint64_t>(i), 5 + i % 7);
        const Genome y = founder(900 + static_cast<std::uint64_t>(i), 5 + (i * 3) % 9);
        const Genome c = recombine(x, y, r, lim, rng);
        CHECK(validate_genome(c, lim.bounds).empty());
        CHECK(c.node_count >= std::max(x.node_count, y.node_count));
    }
}

TEST_CASE("fission") {
    const Genome g = founder(14);
    PhysicsParams p;
    MutationRates r;
    VariationLimits lim;
    Rng rng(15);
    Neighborhood empty;

    const Unit parent = unit_with(g, 210.0, 1);
    const auto o = try_reproduce(parent, empty, p, r, lim, rng);
    REQUIRE(o.has_value());
    CHECK(o->parent_energy == 105.0);
    CHECK(o->child_energy == 105.0);

    const Unit at = unit_with(g, 200.0, 1);
    CHECK_FALSE(try_reproduce(at, empty, p, r, lim, rng).has_value());

    Neighborhood full;
    const Unit other = unit_with(g, 50.0, 2);
    full.occupant.fill(&other);
    CHECK_FALSE(try_reproduce(parent, full, p, r, lim, rng).has_value());

    for (int i = 0; i < 10000; ++i) {
        const double e = 200.0 + rng.uniform() * 1000.0;
        const auto f = try_reproduce(unit_with(g, e, 3), empty, p, r, lim, rng);
        REQUIRE(f.has_value());
        CHECK(f->parent_energy + f->child_energy == e);
    }
}

TEST_CASE("lower id wins a contested slot") {
    SimConfig cfg = test::micro_config(8);
    cfg.physics.repro_threshold = 200.0;
    World w(cfg, test::corpus());
    Genome g = test::empty_genome(cfg);
    // Surround cell (4,4) except for itself; units 1 and 2 sit next to it.
    const Unit& a = w.add_unit(g, 3, 4, 500.0);
    const std::uint64_t ida = a.id;
    const std::uint64_t idb = w.add_unit(g, 5, 4, 500.0).id;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            if (!(x == 4 && y == 4) && !w.unit_at(x, y)) w.add_unit(g, x, y, 10.0);
    const TickReport rep = w.step();
    REQUIRE(rep.births == 1);
    const Unit* child = w.unit_at(4, 4);
    REQUIRE(child != nullptr);
    CHECK(child->parent_a == ida);
    CHECK(w.find(idb)->energy > 400.0);  // deferred, kept its energy
}
