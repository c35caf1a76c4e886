#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mee/errors.hpp"
#include "mee/rng.hpp"
#include "mee/streams.hpp"
#include "support.hpp"

using namespace mee;

namespace {

StreamsConfig uniform() {
    StreamsConfig cfg = StreamsConfig::defaults();
    for (auto& s : cfg.streams) s.blobs.count = 0;
    return cfg;
}

double binary_entropy(double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); }

}  // namespace

TEST_CASE("default layout") {
    const StreamsConfig cfg = StreamsConfig::defaults();
    CHECK(cfg.channel_count() == 32);
    CHECK(cfg.get(StreamKind::Numeric).width == 4);
    CHECK(cfg.get(StreamKind::Text).width == 16);
    CHECK(cfg.get(StreamKind::Noise).width == 8);
    CHECK(cfg.get(StreamKind::Temporal).width == 4);
    CHECK(cfg.validate().empty());

    StreamsConfig overlap = cfg;
    overlap.get(StreamKind::Noise).first = 18;
    CHECK_FALSE(overlap.validate().empty());
}

TEST_CASE("fibonacci sequence") {
    const auto fib = fibonacci_table();
    REQUIRE(fib.size() >= 5);
    CHECK(fib[0] == 1);
    CHECK(fib[1] == 1);
    CHECK(fib[2] == 2);
    CHECK(fib[3] == 3);
    CHECK(fib[4] == 5);
    const auto primes = prime_table(5);
    CHECK(primes == std::vector<double>{2, 3, 5, 7, 11});
}

TEST_CASE("numeric window is normalized by the running max") {
    StreamField f(uniform(), 3, 3, 1, test::corpus());
    f.advance(0);
    const auto first = *f.generate_window(StreamKind::Numeric, 0, 0);
    CHECK(first == std::vector<double>{1.0 / 3, 1.0 / 3, 2.0 / 3, 1.0});
    for (int t = 1; t < 300; ++t) {
        f.advance(t);
        const auto w = f.generate_window(StreamKind::Numeric, 1, 1);
        REQUIRE(w.has_value());
        for (double v : *w) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("temporal value at t = 0 with zero phase") {
    StreamsConfig cfg = StreamsConfig::defaults();
    StreamField f(cfg, 8, 8, 1, test::corpus());
    Blob b;
    b.x0 = 4;
    b.y0 = 4;
    b.phase = 0.0;
    f.set_blobs(StreamKind::Temporal, {b});
    f.advance(0);
    CHECK(f.intensity(StreamKind::Temporal, 4, 4) == 1.0);
    CHECK((*f.generate_window(StreamKind::Temporal, 4, 4))[0] == 0.5);
}

TEST_CASE("text leaves as raw bits of raw bytes") {
    const std::string corpus = "Az!";
    StreamField f(uniform(), 3, 3, 1, corpus);
    f.advance(0);
    const auto w = *f.generate_window(StreamKind::Text, 0, 0);
    std::vector<double> expect;
    for (unsigned char ch : std::string("Az"))
        for (int bit = 7; bit >= 0; --bit) expect.push_back((ch >> bit) & 1);
    CHECK(w == expect);
    f.advance(1);  // "!" then wrap to "A"
    const auto w2 = *f.generate_window(StreamKind::Text, 0, 0);
    std::vector<double> expect2;
    for (unsigned char ch : std::string("!A"))
        for (int bit = 7; bit >= 0; --bit) expect2.push_back((ch >> bit) & 1);
    CHECK(w2 == expect2);
}

TEST_CASE("missing corpus names the path") {
    try {
        load_corpus("/nonexistent/corpus-xyz.txt");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/corpus-xyz.txt") != std::string::npos);
    }
}

TEST_CASE("noise stream: best constant predictor is within 1% of ln 2") {
    StreamField f(uniform(), 3, 3, 7, test::corpus());
    const int ticks = 125000;  // 8 bits per tick
    double ones = 0.0;
    for (int t = 0; t < ticks; ++t) {
        f.advance(t);
        for (double b : f.global_window(StreamKind::Noise)) ones += b;
    }
    const double p = ones / (ticks * 8.0);
    const double bce = binary_entropy(p);
    CHECK(std::abs(bce - std::numbers::ln2) < 0.01 * std::numbers::ln2);
}

TEST_CASE("noise stream: consecutive outputs carry no detectable mutual information") {
    StreamField f(uniform(), 3, 3, 21, test::corpus());
    std::vector<int> bits;
    for (int t = 0; t < 2000; ++t) {
        f.advance(t);
        for (double b : f.global_window(StreamKind::Noise)) bits.push_back(static_cast<int>(b));
    }
    auto mi = [](const std::vector<int>& a, const std::vector<int>& b) {
        double n[2][2] = {};
        for (std::size_t i = 0; i < a.size(); ++i) n[a[i]][b[i]] += 1.0;
        const double total = static_cast<double>(a.size());
        double out = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                if (n[i][j] == 0) continue;
                const double pij = n[i][j] / total;
                const double pi = (n[i][0] + n[i][1]) / total;
                const double pj = (n[0][j] + n[1][j]) / total;
                out += pij * std::log(pij / (pi * pj));
            }
        return out;
    };
    std::vector<int> x(bits.begin(), bits.end() - 1);
    std::vector<int> y(bits.begin() + 1, bits.end());
    const double observed = mi(x, y);
    Rng rng(4);
    int extreme = 0;
    const int perms = 200;
    for (int k = 0; k < perms; ++k) {
        std::shuffle(y.begin(), y.end(), rng);
        extreme += mi(x, y) >= observed ? 1 : 0;
    }
    const double p = (extreme + 1.0) / (perms + 1.0);
    MESSAGE("MI " << observed << " permutation p " << p);
    CHECK(p > 0.01);
}

TEST_CASE("weather examples") {
    StreamsConfig cfg = StreamsConfig::defaults();
    StreamField f(cfg, 32, 32, 1, test::corpus());
    Blob still;
    still.x0 = 10;
    still.y0 = 12;
    f.set_blobs(StreamKind::Numeric, {still});
    f.advance(0);
    std::vector<double> first;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) first.push_back(f.intensity(StreamKind::Numeric, x, y));
    for (int t = 1; t < 20; ++t) {
        f.advance(t);
        std::size_t i = 0;
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) CHECK(f.intensity(StreamKind::Numeric, x, y) == first[i++]);
    }

    StreamsConfig r3 = StreamsConfig::defaults();
    r3.get(StreamKind::Text).blobs.radius = 3.0;
    StreamField g(r3, 32, 32, 1, test::corpus());
    Blob origin;
    g.set_blobs(StreamKind::Text, {origin});
    g.advance(0);
    CHECK(g.intensity(StreamKind::Text, 0, 4) == 0.0);
    CHECK(g.intensity(StreamKind::Text, 0, 0) == 1.0);
    CHECK_FALSE(g.generate_window(StreamKind::Text, 0, 4).has_value());

    Blob mover;
    mover.vx = 1.0;
    mover.x0 = 5.0;
    mover.y0 = 7.0;
    CHECK(StreamField::blob_center(mover, 32, 32, 32) == std::array<double, 2>{5.0, 7.0});
    CHECK(StreamField::blob_center(mover, 31, 32, 32)[0] == 4.0);
}

TEST_CASE("intensity below the floor gives no data") {
    StreamsConfig cfg = StreamsConfig::defaults();
    cfg.get(StreamKind::Temporal).blobs.radius = 10.0;
    StreamField f(cfg, 32, 32, 1, test::corpus());
    Blob b;
    f.set_blobs(StreamKind::Temporal, {b});
    f.advance(0);
    // Linear falloff 1 - d/r: 0.1 at d = 9, nothing at d = r.
    CHECK(f.intensity(StreamKind::Temporal, 9, 0) == doctest::Approx(0.1));
    CHECK(f.generate_window(StreamKind::Temporal, 9, 0).has_value());
    CHECK_FALSE(f.generate_window(StreamKind::Temporal, 10, 0).has_value());
}
