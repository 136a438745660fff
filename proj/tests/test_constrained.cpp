#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "lshart/constrained.hpp"
#include "lshart/error.hpp"

using namespace lshart;

namespace {

std::vector<double> assignment(std::uint32_t mask, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1u ? 1.0 : 0.0;
    return v;
}

bool brute_valid(const std::vector<double>& v, const std::vector<Constraint>& cs) {
    for (const auto& c : cs) {
        bool all = true;
        for (const auto& l : c.literals) all = all && v[l.idx] == l.val;
        if (all) return false;
    }
    return true;
}

std::vector<Literal> random_literals(std::size_t n, std::size_t k, SeededRng& rng) {
    std::vector<Literal> out;
    for (std::size_t i : sample_distinct_indices(n, k, rng)) out.push_back({i, static_cast<int>(rng.below(2))});
    return out;
}

double mean_first_detection(const std::string& strategy, std::size_t n, const std::vector<Constraint>& cs,
                            const Fault& f, int runs) {
    double sum = 0.0;
    for (int r = 0; r < runs; ++r) {
        Strategy s = make_strategy(strategy, InputDomain::binary(n), {}, derive_seed(11, r));
        install_constraints(s, cs);
        const auto res = fault_detection_run(s, {f}, 100000);
        REQUIRE_FALSE(res.censored);
        sum += static_cast<double>(*res.first_detection[0]);
    }
    return sum / runs;
}

}  // namespace

TEST_CASE("validity examples") {
    const std::vector<Constraint> cs{{{{0, 1}, {1, 1}}}};
    CHECK_FALSE(is_valid(ConfigTest({1, 1}), cs));
    CHECK(is_valid(ConfigTest({1, 0}), cs));
    CHECK(is_valid(ConfigTest({0, 1}), cs));
    CHECK(is_valid(ConfigTest({0, 0}), cs));
    CHECK(is_valid(ConfigTest({1, 1}), {}));
}

TEST_CASE("validity agrees with brute force on small spaces") {
    SeededRng rng(1);
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 2 + rng.below(7);
        std::vector<Constraint> cs;
        const std::size_t m = rng.below(6);
        for (std::size_t i = 0; i < m; ++i) cs.push_back({random_literals(n, 1 + rng.below(std::min<std::size_t>(n, 3)), rng)});
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            const auto v = assignment(mask, n);
            CHECK(is_valid(v, cs) == brute_valid(v, cs));
        }
    }
}

TEST_CASE("literal validation") {
    const std::vector<Literal> out_of_range{{3, 1}};
    const std::vector<Literal> bad_value{{0, 2}};
    const std::vector<Literal> repeated{{0, 1}, {0, 0}};
    CHECK_THROWS_AS(validate_literals(out_of_range, 3, "x"), ParameterError);
    CHECK_THROWS_AS(validate_literals(bad_value, 3, "x"), ParameterError);
    CHECK_THROWS_AS(validate_literals(repeated, 3, "x"), ParameterError);
    const std::vector<Literal> ok{{0, 1}, {2, 0}};
    CHECK_NOTHROW(validate_literals(ok, 3, "x"));
}

TEST_CASE("embedding round-trips and distance is the root of the Hamming distance") {
    SeededRng rng(2);
    const InputDomain dom = InputDomain::binary(20);
    for (int i = 0; i < 1000; ++i) {
        const Point a = sample_uniform(dom, rng), b = sample_uniform(dom, rng);
        const ConfigTest ta = ConfigTest::from_point(a), tb = ConfigTest::from_point(b);
        CHECK(ta.embed() == a);
        std::size_t hamming = 0;
        for (std::size_t k = 0; k < 20; ++k) hamming += ta[k] != tb[k] ? 1 : 0;
        CHECK(euclidean_distance(a, b) == doctest::Approx(std::sqrt(static_cast<double>(hamming))));
    }
    CHECK_THROWS_AS(ConfigTest::from_point(Point{0.5, 1.0}), ContractViolation);
    CHECK_THROWS_AS(ConfigTest({0, 2}), ParameterError);
}

TEST_CASE("satisfiability search agrees with brute force") {
    SeededRng rng(3);
    int unsat = 0;
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t n = 1 + rng.below(8);
        std::vector<Constraint> cs;
        const std::size_t m = rng.below(3 * n + 1);
        for (std::size_t i = 0; i < m; ++i) cs.push_back({random_literals(n, 1 + rng.below(std::min<std::size_t>(n, 2)), rng)});
        const auto fixed = random_literals(n, rng.below(std::min<std::size_t>(n, 3) + 1), rng);
        bool any = false;
        for (std::uint32_t mask = 0; mask < (1u << n) && !any; ++mask) {
            const auto v = assignment(mask, n);
            any = brute_valid(v, cs) && matches(fixed, v);
        }
        const auto r = find_valid_assignment(n, cs, fixed);
        CHECK(r.status == (any ? Satisfiability::Satisfiable : Satisfiability::Unsatisfiable));
        if (r.witness) {
            CHECK(is_valid(*r.witness, cs));
            CHECK(matches(fixed, r.witness->embed().coords()));
        }
        unsat += any ? 0 : 1;
    }
    CHECK(unsat > 0);
    CHECK(find_valid_assignment(3, {Constraint{}}).status == Satisfiability::Unsatisfiable);
}

TEST_CASE("satisfiability search resolves distant conflicts without exhaustive backtracking") {
    // Forces parameter 0 to 1 through a conflict that only surfaces at parameter 79.
    const std::vector<Constraint> cs{{{{0, 0}, {79, 1}}}, {{{0, 0}, {79, 0}}}};
    const auto r = find_valid_assignment(80, cs, {}, 1000);
    REQUIRE(r.status == Satisfiability::Satisfiable);
    CHECK((*r.witness)[0] == 1);
    CHECK(find_valid_assignment(80, cs, {}, 0).status == Satisfiability::Unknown);
    const std::vector<Literal> pinned{{0, 0}};
    CHECK(find_valid_assignment(80, cs, pinned, 1000).status == Satisfiability::Unsatisfiable);
    CHECK(synthetic_corpus(104, 83, 2, 28, 2, 3).faults.size() == 28);
}

TEST_CASE("single-literal fault under random testing takes two tests on average") {
    const double mean = mean_first_detection("rt", 4, {}, Fault{"f", {{0, 1}}}, 4000);
    CHECK(mean == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("two-literal fault under random testing takes four tests on average") {
    const double mean = mean_first_detection("rt", 10, {}, Fault{"f", {{2, 1}, {7, 0}}}, 4000);
    CHECK(mean == doctest::Approx(4.0).epsilon(0.06));
}

TEST_CASE("constrained random testing matches the valid-space detection rate") {
    // Under RT over valid assignments the first detection is geometric with
    // rate (#valid matching the trigger) / (#valid).
    const std::size_t n = 8;
    const std::vector<Constraint> cs{{{{0, 1}, {1, 1}}}, {{{2, 0}, {3, 1}}}, {{{4, 1}}}};
    const Fault f{"f", {{0, 1}, {2, 1}}};
    std::size_t valid = 0, hit = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const auto v = assignment(mask, n);
        if (!brute_valid(v, cs)) continue;
        ++valid;
        hit += matches(f.trigger, v) ? 1 : 0;
    }
    const double expected = static_cast<double>(valid) / static_cast<double>(hit);
    CHECK(mean_first_detection("rt", n, cs, f, 4000) == doctest::Approx(expected).epsilon(0.06));
}

TEST_CASE("generated tests are valid for every strategy family") {
    const Corpus c = synthetic_corpus(20, 15, 2, 4, 2, 5);
    for (const char* name : {"rt", "fscs", "rrt", "rf-fscs", "kd-fscs", "lsh-fscs", "lsh-rrt"}) {
        CAPTURE(name);
        Strategy s = make_strategy(name, InputDomain::binary(20), {}, 6);
        install_constraints(s, c.constraints);
        for (int i = 0; i < 200; ++i) CHECK(is_valid(generate_valid(s), c.constraints));
    }
}

TEST_CASE("f_all bounds every per-fault detection") {
    const Corpus c = synthetic_corpus(16, 10, 2, 6, 2, 7);
    for (int r = 0; r < 50; ++r) {
        Strategy s = make_strategy("fscs", InputDomain::binary(16), {}, derive_seed(8, r));
        install_constraints(s, c.constraints);
        const auto res = fault_detection_run(s, c.faults, 5000);
        REQUIRE_FALSE(res.censored);
        for (const auto& fd : res.first_detection) CHECK(res.f_all >= *fd);
        CHECK(res.executed == res.f_all);
    }
}

TEST_CASE("unreachable faults are censored at the budget") {
    const std::vector<Constraint> cs{{{{0, 1}, {1, 1}}}};
    Strategy s = make_strategy("rt", InputDomain::binary(4), {}, 9);
    install_constraints(s, cs);
    const auto res = fault_detection_run(s, {Fault{"a", {{0, 1}}}, Fault{"b", {{0, 1}, {1, 1}}}}, 300);
    CHECK(res.censored);
    CHECK(res.f_all == 300);
    CHECK(res.executed == 300);
    CHECK(res.first_detection[0].has_value());
    CHECK_FALSE(res.first_detection[1].has_value());
    CHECK_THROWS_AS(fault_detection_run(s, {}, 10), ParameterError);
}

TEST_CASE("an empty valid space saturates the generator") {
    const std::vector<Constraint> cs{{{{0, 1}}}, {{{0, 0}}}};
    Strategy s = make_strategy("rt", InputDomain::binary(3), {}, 10);
    install_constraints(s, cs, 5000);
    CHECK_THROWS_AS(s.next(), SaturationError);
    Strategy cont = make_strategy("rt", InputDomain::unit(3), {}, 10);
    CHECK_THROWS_AS(install_constraints(cont, cs), ContractViolation);
}

TEST_CASE("synthetic corpus with many constraints") {
    const Corpus c = synthetic_corpus(47, 45, 2, 8, 2, 1);
    CHECK(c.space.n == 47);
    CHECK(c.constraints.size() == 45);
    CHECK(c.faults.size() == 8);
    CHECK_NOTHROW(c.validate());
    for (const auto& f : c.faults) {
        CHECK(find_valid_assignment(47, c.constraints, f.trigger).status == Satisfiability::Satisfiable);
    }
    CHECK(c.faults[0].id == "f1");
}

TEST_CASE("dependency corpus shape") {
    const Corpus c = dependency_corpus(104, 83, 28, 2, 3);
    CHECK(c.constraints.size() == 83);
    CHECK(c.faults.size() == 28);
    CHECK(is_valid(ConfigTest(std::vector<std::uint8_t>(104, 0)), c.constraints));
    std::set<std::size_t> hubs;
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& con : c.constraints) {
        REQUIRE(con.literals.size() == 2);
        const auto& on = con.literals[0].val == 1 ? con.literals[0] : con.literals[1];
        const auto& off = con.literals[0].val == 1 ? con.literals[1] : con.literals[0];
        CHECK(on.val == 1);
        CHECK(off.val == 0);
        hubs.insert(off.idx);
        pairs.insert({on.idx, off.idx});
    }
    CHECK(hubs.size() <= 10);
    CHECK(pairs.size() == 83);
    for (const auto& f : c.faults) {
        CHECK(find_valid_assignment(104, c.constraints, f.trigger).status == Satisfiability::Satisfiable);
    }
    CHECK_THROWS_AS(dependency_corpus(4, 100, 1, 1, 1), ParameterError);
}

TEST_CASE("corpus JSON round-trip and errors") {
    Corpus c = synthetic_corpus(12, 6, 2, 3, 2, 4);
    c.space.names.clear();
    for (std::size_t i = 0; i < 12; ++i) c.space.names.push_back("opt" + std::to_string(i));
    const Corpus back = Corpus::from_json(nlohmann::json::parse(c.to_json().dump()));
    CHECK(back.to_json() == c.to_json());
    CHECK(back.space.names == c.space.names);

    const auto path = std::filesystem::temp_directory_path() / "lshart_corpus_test.json";
    c.save(path.string());
    CHECK(Corpus::load(path.string()).to_json() == c.to_json());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(Corpus::load("/nonexistent/corpus.json"), IoError);

    auto j = c.to_json();
    j["constraints"][0][0]["idx"] = 99;
    CHECK_THROWS_AS(Corpus::from_json(j), ParameterError);
    CHECK_THROWS_AS(Corpus::from_json(nlohmann::json{{"constraints", nlohmann::json::array()}}), ParameterError);
}
