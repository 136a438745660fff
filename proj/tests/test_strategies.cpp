#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lshart/error.hpp"
#include "lshart/grid_index.hpp"
#include "lshart/kd_tree.hpp"
#include "lshart/neighbor_index.hpp"
#include "lshart/strategy.hpp"

using namespace lshart;

namespace {

double brute_nn(const std::vector<Point>& pts, const Point& q) {
    double best = kInfinity;
    for (const auto& p : pts) best = std::min(best, euclidean_distance(p, q));
    return best;
}

std::vector<double> v1(double x) { return {x}; }

}  // namespace

TEST_CASE("fscs_select picks the first maximum") {
    const double a[] = {0.3, 0.05, 0.4};
    CHECK(fscs_select(a) == 2);
    const double b[] = {kInfinity, kInfinity, kInfinity};
    CHECK(fscs_select(b) == 0);
    const double c[] = {0.4, 0.4, 0.1};
    CHECK(fscs_select(c) == 0);
    CHECK_THROWS_AS(fscs_select(std::span<const double>{}), ContractViolation);
}

TEST_CASE("max-min selection over a one-point executed set") {
    LinearScanIndex idx(1);
    idx.insert(v1(0.5));
    const double cands[] = {0.2, 0.45, 0.9};
    std::vector<double> d;
    for (double x : cands) d.push_back(idx.nearest_distance(v1(x)));
    CHECK(cands[fscs_select(d)] == 0.9);
}

TEST_CASE("sigma_d recursion") {
    CHECK(sigma_d(1) == doctest::Approx(0.5));
    CHECK(sigma_d(2) == doctest::Approx(1.0));
    CHECK(sigma_d(3) == doctest::Approx(0.75));
    CHECK(sigma_d(4) == doctest::Approx(2.0));
    CHECK(sigma_d(6) == doctest::Approx(6.0));
    CHECK(sigma_d(10) == doctest::Approx(120.0));
    CHECK_THROWS_AS(sigma_d(0), ParameterError);
    for (std::size_t d = 3; d <= 60; ++d) CHECK(sigma_d(d) == doctest::Approx(sigma_d(d - 2) * d / 2.0));
}

TEST_CASE("rrt radius examples") {
    CHECK(rrt_radius(1, 1.0, 0.75, 1) == doctest::Approx(0.375));
    CHECK(rrt_radius(2, 1.0, 0.75, 1) == doctest::Approx(std::sqrt(0.75 / M_PI)).epsilon(1e-12));
    CHECK(rrt_radius(2, 1.0, 0.75, 1) == doctest::Approx(0.48860).epsilon(1e-5));
    CHECK(rrt_radius(1, 1.0, 0.75, 4) == doctest::Approx(rrt_radius(1, 1.0, 0.75, 1) / 4));
    // 52! = 8.0658175170943878e67; evaluated here independently of the log-space recursion.
    const double direct = std::pow(8.0658175170943878e67 * 0.75 / std::pow(M_PI, 52), 1.0 / 104);
    CHECK(rrt_radius(104, 1.0, 0.75, 1) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(std::abs(rrt_radius(104, 1.0, 0.75, 1) - 2.53) <= 0.01);
    CHECK(std::isfinite(rrt_radius(1000, 1.0, 0.75, 10)));
}

TEST_CASE("rrt distance test against the exclusion radius") {
    LinearScanIndex idx(1);
    idx.insert(v1(0.5));
    const double r = rrt_radius(1, 1.0, 0.75, idx.size());
    CHECK(r == doctest::Approx(0.375));
    CHECK_FALSE(idx.nearest_distance(v1(0.52)) > r);
    CHECK(idx.nearest_distance(v1(0.95)) > r);
}

TEST_CASE("strategy parameter validation") {
    StrategyParams p;
    CHECK_NOTHROW(p.validate());
    auto bad = [](auto mutate) {
        StrategyParams q;
        mutate(q);
        CHECK_THROWS_AS(q.validate(), ParameterError);
    };
    bad([](StrategyParams& q) { q.k = 0; });
    bad([](StrategyParams& q) { q.exclusion_ratio = 0.0; });
    bad([](StrategyParams& q) { q.exclusion_ratio = 1.0; });
    bad([](StrategyParams& q) { q.lambda = 0; });
    bad([](StrategyParams& q) { q.p0 = 0; });
    bad([](StrategyParams& q) { q.tau = 0; });
    bad([](StrategyParams& q) { q.bucket_capacity = 0; });
    CHECK_THROWS_AS(make_strategy("nope", InputDomain::unit(2), p, 1), ParameterError);
}

TEST_CASE("random testing is deterministic and appends in order") {
    const InputDomain dom = InputDomain::unit(2);
    Strategy a = make_strategy("rt", dom, {}, 1);
    Strategy b = make_strategy("rt", dom, {}, 1);
    std::vector<Point> seen;
    for (int i = 0; i < 1000; ++i) {
        seen.push_back(a.next());
        CHECK(b.next() == seen.back());
    }
    CHECK(a.executed() == seen);
    SeededRng rng(1);
    CHECK(seen.front() == sample_uniform(dom, rng));
}

TEST_CASE("FSCS with one candidate reproduces random testing") {
    const InputDomain dom = InputDomain::unit(3);
    StrategyParams p;
    p.k = 1;
    Strategy f = make_strategy("fscs", dom, p, 77);
    Strategy r = make_strategy("rt", dom, p, 77);
    for (int i = 0; i < 300; ++i) CHECK(f.next() == r.next());
}

TEST_CASE("every strategy keeps its index in step with the executed set") {
    for (const auto& name : strategy_names()) {
        for (std::size_t d : {1u, 2u, 4u}) {
            CAPTURE(name);
            CAPTURE(d);
            const InputDomain dom = InputDomain::unit(d);
            Strategy s = make_strategy(name, dom, {}, 123 + d);
            for (int i = 0; i < 300; ++i) CHECK(dom.contains(s.next()));
            CHECK(s.executed().size() == 300);
            if (s.index() != nullptr) CHECK(s.index()->size() == 300);
            std::set<std::vector<double>> distinct;
            for (const auto& p : s.executed()) distinct.insert(p.values());
            CHECK(distinct.size() == 300);
        }
    }
}

TEST_CASE("FSCS picks the candidate farthest from the executed set") {
    // Rebuild each round's candidates from a twin rng and check the choice.
    const InputDomain dom = InputDomain::unit(2);
    StrategyParams p;
    Strategy s = make_strategy("fscs", dom, p, 5);
    SeededRng twin(5);
    std::vector<Point> executed;
    executed.push_back(sample_uniform(dom, twin));
    CHECK(s.next() == executed.back());
    for (int round = 0; round < 200; ++round) {
        std::vector<Point> cands;
        for (std::size_t i = 0; i < p.k; ++i) cands.push_back(sample_uniform(dom, twin));
        std::size_t best = 0;
        for (std::size_t i = 1; i < cands.size(); ++i) {
            if (brute_nn(executed, cands[i]) > brute_nn(executed, cands[best])) best = i;
        }
        executed.push_back(cands[best]);
        CHECK(s.next() == executed.back());
    }
}

TEST_CASE("RRT accepted tests lie outside the exclusion radius") {
    for (std::size_t d : {1u, 2u, 3u}) {
        const InputDomain dom = InputDomain::unit(d);
        Strategy s = make_strategy("rrt", dom, {}, 9 + d);
        std::vector<Point> prev;
        for (int i = 0; i < 400; ++i) {
            const Point t = s.next();
            if (!prev.empty()) CHECK(brute_nn(prev, t) > rrt_radius(d, 1.0, 0.75, prev.size()));
            prev.push_back(t);
        }
        CHECK(s.stats().relaxations == 0);
    }
}

TEST_CASE("RRT relaxes to the farthest candidate after too many attempts") {
    StrategyParams p;
    p.max_rrt_attempts = 1;
    p.exclusion_ratio = 0.99;
    Strategy s = make_strategy("rrt", InputDomain::unit(1), p, 4);
    for (int i = 0; i < 200; ++i) s.next();
    CHECK(s.stats().relaxations > 0);
    CHECK(s.executed().size() == 200);
}

TEST_CASE("candidate filter discards and counts invalid draws") {
    Strategy s = make_strategy("fscs", InputDomain::unit(2), {}, 3);
    s.set_candidate_filter([](std::span<const double> c) { return c[0] < 0.5; });
    for (int i = 0; i < 100; ++i) CHECK(s.next()[0] < 0.5);
    CHECK(s.stats().invalid_draws > 0);
    CHECK(s.stats().candidates == 1 + 99 * 10);

    Strategy never = make_strategy("rt", InputDomain::unit(2), {}, 3);
    never.set_candidate_filter([](std::span<const double>) { return false; }, 1000);
    CHECK_THROWS_AS(never.next(), SaturationError);
}

TEST_CASE("random forgetting subset") {
    SeededRng rng(1);
    std::vector<int> e10(10), e100(100);
    for (int i = 0; i < 100; ++i) {
        if (i < 10) e10[i] = i;
        e100[i] = i;
    }
    CHECK(rf_filter<int>(e10, 60, rng) == e10);
    const auto sub = rf_filter<int>(e100, 60, rng);
    CHECK(sub.size() == 60);
    CHECK(std::set<int>(sub.begin(), sub.end()).size() == 60);
    CHECK(std::is_sorted(sub.begin(), sub.end()));
    CHECK(rf_filter<int>(e100, 60, rng) != sub);

    // Each index is kept with probability lambda / n.
    std::vector<int> counts(100, 0);
    for (int t = 0; t < 20000; ++t) {
        for (std::size_t i : sample_distinct_indices(100, 60, rng)) ++counts[i];
    }
    for (int c : counts) CHECK(std::abs(c / 20000.0 - 0.6) < 0.025);
}

TEST_CASE("consecutive retention keeps the suffix") {
    const std::vector<char> e{'a', 'b', 'c'};
    CHECK(cr_filter<char>(e, 2) == std::vector<char>{'b', 'c'});
    CHECK(cr_filter<char>(e, 3) == e);
    CHECK(cr_filter<char>(e, 10) == e);
}

TEST_CASE("forgetting index searches only the active subset") {
    ForgettingIndex cr(1, ForgettingKind::Recent, 2);
    SeededRng rng(1);
    for (double x : {0.1, 0.5, 0.9}) cr.insert(v1(x));
    cr.begin_round(rng);
    CHECK(cr.nearest_distance(v1(0.1)) == doctest::Approx(0.4));

    ForgettingIndex rf(1, ForgettingKind::Random, 60);
    for (int i = 0; i < 100; ++i) rf.insert(v1(i / 100.0));
    rf.begin_round(rng);
    CHECK(rf.active().size() == 60);
    SeededRng qr(2);
    LinearScanIndex exact(1);
    for (int i = 0; i < 100; ++i) exact.insert(v1(i / 100.0));
    for (int i = 0; i < 1000; ++i) {
        const auto q = v1(qr.uniform());
        CHECK(rf.nearest_distance(q) >= exact.nearest_distance(q));
    }
}

TEST_CASE("grid starts with p0^d cells and doubles past the density threshold") {
    const InputDomain dom = InputDomain::unit(2);
    GridIndex g(dom, 3, 5);
    CHECK(g.partitions() == 3);
    CHECK(g.cell_count() == 9);
    SeededRng rng(3);
    for (int i = 0; i < 45; ++i) g.insert(sample_uniform(dom, rng).coords());
    CHECK(g.partitions() == 3);
    g.insert(sample_uniform(dom, rng).coords());
    CHECK(g.partitions() == 6);
    CHECK(g.cell_count() == 36);
}

TEST_CASE("grid neighborhood restriction") {
    const InputDomain dom = InputDomain::unit(2);
    GridIndex g(dom, 3, 5);
    const std::vector<double> c{0.15, 0.15};
    g.insert(std::vector<double>{0.16, 0.15});
    g.insert(std::vector<double>{0.9, 0.9});
    CHECK(df_nn_distance(g, c) == doctest::Approx(0.01));

    GridIndex far(dom, 3, 5);
    far.insert(std::vector<double>{0.9, 0.15});
    CHECK(df_nn_distance(far, c) == kInfinity);
    CHECK(df_nn_distance(far, std::vector<double>{0.5, 0.15}) == doctest::Approx(0.4));
}

TEST_CASE("grid invariants under random insertion") {
    for (std::size_t d : {1u, 2u, 3u}) {
        const InputDomain dom = InputDomain::unit(d);
        GridIndex g(dom, 3, 5);
        SeededRng rng(20 + d);
        std::vector<Point> pts;
        std::size_t last_parts = g.partitions();
        for (int i = 0; i < 1500; ++i) {
            pts.push_back(sample_uniform(dom, rng));
            g.insert(pts.back().coords());
            CHECK(g.partitions() >= last_parts);
            last_parts = g.partitions();
            CHECK(static_cast<double>(g.size()) <= 5.0 * static_cast<double>(g.cell_count()));
        }
        CHECK(g.occupied_cells() <= g.size());
        for (int i = 0; i < 1000; ++i) {
            const Point q = sample_uniform(dom, rng);
            CHECK(df_nn_distance(g, q.coords()) >= brute_nn(pts, q));
        }
    }
}

TEST_CASE("k-d tree basics") {
    KdTree t(2);
    CHECK_FALSE(kd_nn(t, std::vector<double>{0.5, 0.5}).has_value());
    CHECK(t.nearest_distance(std::vector<double>{0.5, 0.5}) == kInfinity);
    kd_insert(t, std::vector<double>{0.0, 0.0});
    kd_insert(t, std::vector<double>{1.0, 1.0});
    CHECK(*kd_nn(t, std::vector<double>{0.2, 0.1}) == Point{0.0, 0.0});
}

TEST_CASE("k-d tree matches a linear scan") {
    for (std::size_t d : {1u, 2u, 3u, 5u, 8u}) {
        const InputDomain dom = InputDomain::unit(d);
        KdTree t(d);
        SeededRng rng(40 + d);
        std::vector<Point> pts;
        for (int i = 0; i < 1000; ++i) {
            pts.push_back(sample_uniform(dom, rng));
            kd_insert(t, pts.back().coords());
            const Point q = sample_uniform(dom, rng);
            const auto nn = kd_nn(t, q.coords());
            REQUIRE(nn.has_value());
            CHECK(euclidean_distance(*nn, q) == doctest::Approx(brute_nn(pts, q)).epsilon(1e-12));
        }
        auto in = t.in_order();
        CHECK(in.size() == pts.size());
        auto key = [](const Point& p) { return p.values(); };
        std::vector<std::vector<double>> a, b;
        for (const auto& p : in) a.push_back(key(p));
        for (const auto& p : pts) b.push_back(key(p));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("DF is not defined on binary domains") {
    CHECK_THROWS_AS(make_strategy("df-fscs", InputDomain::binary(8), {}, 1), ParameterError);
    CHECK_NOTHROW(make_strategy("lsh-fscs", InputDomain::binary(8), {}, 1));
}
