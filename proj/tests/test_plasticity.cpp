#include <doctest.h>

#include <cmath>
#include <limits>

#include "mee/plasticity.hpp"
#include "mee/rng.hpp"
#include "urn_toy.hpp"

using namespace mee;

namespace {

// Two nodes, one edge 0 -> 1.
Genome pair(double w) {
    Genome g;
    g.layout = Layout{1, 0};
    g.node_count = 1;
    g.interface.receptor_mask = {true};
    g.connections = {{0, 1, w}};
    return g;
}

NetState acts(double x, double y) {
    NetState s;
    s.activations = {x, y};
    s.last_prediction = {0.5};
    return s;
}

PhysicsParams params(double eta, double lambda) {
    PhysicsParams p;
    p.eta = eta;
    p.lambda_decay = lambda;
    return p;
}

}  // namespace

TEST_CASE("update examples") {
    const PhysicsParams still = params(0.1, 0.0);
    CHECK(hebbian_update(pair(0.37), acts(1, 1), 0.0, still).genome.connections[0].weight == 0.37);

    const double up = hebbian_update(pair(0.0), acts(1, 1), 2.0, still).genome.connections[0].weight;
    CHECK(up == doctest::Approx(0.2).epsilon(1e-15));
    const double down = hebbian_update(pair(0.0), acts(1, 1), -2.0, still).genome.connections[0].weight;
    CHECK(down == doctest::Approx(-0.2).epsilon(1e-15));

    // Crossing zero makes the edge inhibitory.
    CHECK(hebbian_update(pair(0.1), acts(1, 1), -2.0, still).genome.connections[0].weight < 0.0);
}

TEST_CASE("sign law, exhaustive small cases") {
    const PhysicsParams p = params(0.1, 0.0);
    for (double w : {-1.0, 0.0, 0.5})
        for (double x : {0.0, 0.5, 1.0})
            for (double y : {0.0, 0.5, 1.0})
                for (double s : {-3.0, 0.0, 3.0}) {
                    const double dw = hebbian_update(pair(w), acts(x, y), s, p).genome.connections[0].weight - w;
                    if (x * y > 0.0 && s != 0.0)
                        CHECK((dw > 0.0) == (s > 0.0));
                    else
                        CHECK(dw == 0.0);
                }
}

TEST_CASE("sign law and decay restoring force, randomized") {
    Rng rng(314);
    Genome g = pair(0.0);
    NetState s = acts(0.0, 0.0);
    for (int i = 0; i < 100000; ++i) {
        const double w = rng.normal(2.0);
        const double x = rng.bernoulli(0.2) ? 0.0 : rng.uniform() * 3.0;
        const double y = rng.bernoulli(0.2) ? 0.0 : rng.uniform() * 3.0;
        const double surplus = rng.normal(5.0);
        const double eta = 1e-4 + rng.uniform() * 0.1;

        g.connections[0].weight = w;
        s.activations = {x, y};
        Genome h = g;
        hebbian_update_inplace(h, s, surplus, params(eta, 0.0));
        const double dw = h.connections[0].weight - w;
        if (x * y > 0.0) {
            if (surplus > 0.0) CHECK(dw > 0.0);
            if (surplus < 0.0) CHECK(dw < 0.0);
        } else {
            CHECK(dw == 0.0);
        }

        if (w != 0.0) {
            Genome d = g;
            hebbian_update_inplace(d, s, 0.0, params(eta, 1e-4 + rng.uniform() * 0.5));
            CHECK(std::abs(d.connections[0].weight) < std::abs(w));
        }
    }
}

TEST_CASE("weights are clamped and non-finite updates reset") {
    PhysicsParams p = params(1.0, 0.0);
    p.w_cap = 10.0;
    CHECK(hebbian_update(pair(9.0), acts(1, 1), 50.0, p).genome.connections[0].weight == 10.0);
    CHECK(hebbian_update(pair(-9.0), acts(1, 1), -50.0, p).genome.connections[0].weight == -10.0);

    const auto r = hebbian_update(pair(1.0), acts(1, 1), std::numeric_limits<double>::infinity() * 0.0, p);
    CHECK(r.reset_weights == 1);
    CHECK(r.genome.connections[0].weight == 0.0);
}

TEST_CASE("urn toy locks in on a small sample") {
    int locked = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) locked += test::run_urn_toy(1000 + static_cast<std::uint64_t>(i)).locked_in() ? 1 : 0;
    MESSAGE("lock-in " << locked << "/" << n);
    CHECK(locked >= n / 2);
}
