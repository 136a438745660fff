#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lshart/error.hpp"
#include "lshart/experiment.hpp"

using namespace lshart;

namespace {

ExperimentConfig small_fmeasure() {
    ExperimentConfig c;
    c.kind = ExperimentKind::Fmeasure;
    c.strategies = {"rt", "fscs", "lsh-fscs"};
    c.theta = 0.01;
    c.runs = 40;
    c.deterministic = true;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("linear fit of an exact line") {
    const std::vector<double> xs{1, 2, 3, 4, 5}, ys{5, 7, 9, 11, 13};
    const auto f = linear_fit(xs, ys);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(3.0));
    CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("linear fit of constant ys") {
    const std::vector<double> xs{1, 2, 3}, ys{4, 4, 4};
    const auto f = linear_fit(xs, ys);
    CHECK(f.slope == 0.0);
    CHECK(f.intercept == doctest::Approx(4.0));
    CHECK(f.r2 == 1.0);
}

TEST_CASE("linear fit against the raw-sum normal equations") {
    // Anscombe's first dataset.
    const std::vector<double> xs{10, 8, 13, 9, 11, 14, 6, 4, 12, 7, 5};
    const std::vector<double> ys{8.04, 6.95, 7.58, 8.81, 8.33, 9.96, 7.24, 4.26, 10.84, 4.82, 5.68};
    long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const long double n = static_cast<long double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += static_cast<long double>(xs[i]) * xs[i];
        sxy += static_cast<long double>(xs[i]) * ys[i];
        syy += static_cast<long double>(ys[i]) * ys[i];
    }
    const long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const long double intercept = (sy - slope * sx) / n;
    const long double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    const auto f = linear_fit(xs, ys);
    CHECK(f.slope == doctest::Approx(static_cast<double>(slope)).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(static_cast<double>(intercept)).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(static_cast<double>(r * r)).epsilon(1e-12));
    CHECK(f.slope == doctest::Approx(0.5001).epsilon(1e-3));
    CHECK(f.r2 == doctest::Approx(0.6665).epsilon(1e-3));
}

TEST_CASE("linear fit rejects degenerate x") {
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0}, std::vector<double>{2.0}), FitError);
    CHECK_THROWS_AS(linear_fit(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}), FitError);
}

TEST_CASE("config JSON round-trip and validation") {
    ExperimentConfig c = small_fmeasure();
    c.dims = {1, 3};
    c.params.k = 7;
    const auto back = ExperimentConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
    CHECK(back.to_json() == c.to_json());
    CHECK(back.params.k == 7);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"runz", 3}}), ParameterError);
    ExperimentConfig bad = c;
    bad.runs = 0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.strategies = {"rt", "nope"};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.kind = ExperimentKind::Timing;
    bad.n_list = {1000, 500};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    CHECK(parse_experiment_kind(to_string(ExperimentKind::Timing)) == ExperimentKind::Timing);
}

TEST_CASE("metric table keys are unique") {
    MetricTable t;
    t.add_value("a", "s", "m", 1.0);
    CHECK_THROWS_AS(t.add_value("a", "s", "m", 2.0), ContractViolation);
    CHECK(t.find("a", "s", "m")->summary.mean == 1.0);
    CHECK(t.find("a", "s", "x") == nullptr);
    CHECK(t.to_csv().rfind("strategy,scenario,metric,mean,stddev,ci95_low,ci95_high\n", 0) == 0);
}

TEST_CASE("F-measure output is deterministic and independent of thread count") {
    ExperimentConfig c = small_fmeasure();
    const auto a = run_fmeasure(c);
    const auto b = run_fmeasure(c);
    c.threads = 3;
    const auto t = run_fmeasure(c);
    CHECK(a.table.to_csv() == b.table.to_csv());
    CHECK(a.table.to_csv() == t.table.to_csv());
    CHECK(raw_to_csv(a.raw) == raw_to_csv(t.raw));
    CHECK(verdicts_to_csv(a.verdicts) == verdicts_to_csv(t.verdicts));

    ExperimentConfig one = small_fmeasure();
    one.runs = 1;
    CHECK(run_fmeasure(one).table.to_csv() == run_fmeasure(one).table.to_csv());
}

TEST_CASE("F-measure row counts follow the grid") {
    ExperimentConfig c = small_fmeasure();
    c.dims = {1, 2};
    const auto r = run_fmeasure(c);
    // Four metrics per strategy plus one theory row, per dimension.
    CHECK(r.table.rows().size() == 2 * (3 * 4 + 1));
    CHECK(count_lines(r.table.to_csv()) == 1 + r.table.rows().size());
    CHECK(r.raw.size() == 2 * 3 * 3 * c.runs);
    CHECK(r.verdicts.size() == 2 * 2);
    CHECK(r.find("rt", "block-d1-t0.01", "f_measure") != nullptr);

    c.deterministic = false;
    const auto timed = run_fmeasure(c);
    CHECK(timed.table.rows().size() == 2 * (3 * 5 + 1));
}

TEST_CASE("strategies see the same pattern per run") {
    ExperimentConfig solo = small_fmeasure();
    solo.strategies = {"rt"};
    const auto a = run_fmeasure(solo);
    const auto b = run_fmeasure(small_fmeasure());
    std::vector<double> fa, fb;
    for (const auto& r : a.raw) {
        if (r.metric == "f_measure") fa.push_back(r.value);
    }
    for (const auto& r : b.raw) {
        if (r.metric == "f_measure" && r.strategy == "rt") fb.push_back(r.value);
    }
    CHECK(fa == fb);
}

TEST_CASE("raw rows round-trip and reproduce every verdict") {
    const auto r = run_fmeasure(small_fmeasure());
    const auto back = raw_from_csv(raw_to_csv(r.raw));
    REQUIRE(back.size() == r.raw.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].strategy == r.raw[i].strategy);
        CHECK(back[i].scenario == r.raw[i].scenario);
        CHECK(back[i].run == r.raw[i].run);
        CHECK(back[i].metric == r.raw[i].metric);
        CHECK(back[i].value == r.raw[i].value);
    }
    std::vector<VerdictRow> again;
    for (const char* cand : {"fscs", "lsh-fscs"}) {
        auto v = compare(back, cand, "rt");
        again.insert(again.end(), v.begin(), v.end());
    }
    CHECK(verdicts_to_csv(again) == verdicts_to_csv(r.verdicts));
    CHECK_THROWS_AS(raw_from_csv("strategy,scenario,run,metric,value\nrt,s,x,f,1\n"), ParameterError);
    CHECK_THROWS_AS(compare(back, "rt", "rt"), ParameterError);
}

TEST_CASE("errors carry the scenario and strategy") {
    ExperimentConfig c = small_fmeasure();
    c.strategies = {"rt", "df-fscs"};
    c.params.p0 = 1;
    c.params.tau = 1;
    c.dims = {40};
    c.pattern = PatternKind::Point;
    c.theta = 0.9;
    try {
        run_fmeasure(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("point-d40") != std::string::npos);
        CHECK(std::string(e.kind()) == "construction");
    }
}

TEST_CASE("random testing P-measure at the derived set size") {
    ExperimentConfig c;
    c.kind = ExperimentKind::Pmeasure;
    c.strategies = {"rt"};
    c.theta = 0.01;
    c.runs = 60;
    c.n_t = 100;
    const auto r = run_pmeasure(c);
    const auto* p = r.find("rt", "block-d2-t0.01", "p_measure");
    REQUIRE(p != nullptr);
    CHECK(std::abs(p->summary.mean - 0.5) < 0.03);
    CHECK(r.find("theory", "block-d2-t0.01", "test_set_size")->summary.mean == 69.0);
    CHECK(r.find("theory", "block-d2-t0.01", "rt_p_measure")->summary.mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("test sets inside the failure region always detect") {
    const FailurePattern pattern(PatternKind::Block, 2, 0.04, {Box{{0.4, 0.4}, {0.6, 0.6}}});
    SeededRng rng(1);
    const InputDomain inside({0.4, 0.4}, {0.6, 0.6});
    PmeasureSample s;
    s.n = 20;
    for (int j = 0; j < 100; ++j) {
        std::vector<Point> set;
        for (int i = 0; i < 20; ++i) set.push_back(sample_uniform(inside, rng));
        const std::size_t e = e_measure(set, pattern);
        CHECK(e == 20);
        s.detected.push_back(e > 0);
    }
    CHECK(p_measure(s) == 1.0);
}

TEST_CASE("P-measure verdicts use Fisher's test") {
    ExperimentConfig c;
    c.kind = ExperimentKind::Pmeasure;
    c.strategies = {"rt", "lsh-fscs"};
    c.dims = {1};
    c.theta = 0.01;
    c.runs = 20;
    c.n_t = 50;
    const auto r = run_pmeasure(c);
    REQUIRE(r.verdicts.size() == 1);
    CHECK(r.verdicts[0].test == "fisher");
    CHECK(r.verdicts[0].effect > 1.0);
    const auto again = compare(r.raw, "lsh-fscs", "rt", "detected_sets", c.n_t);
    CHECK(verdicts_to_csv(again) == verdicts_to_csv(r.verdicts));
}

TEST_CASE("timing output and chart") {
    ExperimentConfig c;
    c.kind = ExperimentKind::Timing;
    c.strategies = {"rt", "lsh-fscs"};
    c.n_list = {100, 200, 300};
    c.timing_repetitions = 2;
    const auto r = run_timing(c);
    REQUIRE(r.svgs.size() == 1);
    const std::string& svg = r.svgs[0];
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("lsh-fscs") != std::string::npos);
    CHECK(r.find("lsh-fscs", "d2-n300", "time_ms_median") != nullptr);
    CHECK(r.find("lsh-fscs", "d2", "fit_r2") != nullptr);
    CHECK(r.find("rt", "d2-n100", "time_ms")->summary.count == 2);
}

TEST_CASE("svg escapes text") {
    const std::vector<SvgSeries> s{{"a<b", {1, 2}, {1, 2}, linear_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2})}};
    const auto svg = render_svg("t&t", "x", "y", s);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(svg.find("t&amp;t") != std::string::npos);
}

TEST_CASE("configurable run with a quarter-probability fault") {
    Corpus corpus;
    corpus.space.n = 6;
    corpus.faults = {Fault{"f1", {{1, 1}, {4, 0}}}};
    ExperimentConfig c;
    c.kind = ExperimentKind::Configurable;
    c.strategies = {"rt"};
    c.runs = 3000;
    c.deterministic = true;
    const auto r = run_configurable(c, corpus);
    CHECK(r.find("rt", "config-n6", "f_all")->summary.mean == doctest::Approx(4.0).epsilon(0.06));
    CHECK(r.find("rt", "config-n6", "f_fault:f1")->summary.mean == r.find("rt", "config-n6", "f_all")->summary.mean);
    CHECK(r.find("rt", "config-n6", "acceptance_rate")->summary.mean == 1.0);
}

TEST_CASE("configurable run on 104 parameters") {
    const Corpus corpus = synthetic_corpus(104, 60, 3, 4, 2, 3);
    ExperimentConfig c;
    c.kind = ExperimentKind::Configurable;
    c.strategies = {"rt", "lsh-rrt"};
    c.runs = 5;
    c.budget = 2000;
    const auto r = run_configurable(c, corpus);
    CHECK(std::abs(r.find("lsh-rrt", "config-n104", "initial_rrt_radius")->summary.mean - 2.53) <= 0.01);
    CHECK(r.find("theory", "config-n104", "domain_diameter")->summary.mean == doctest::Approx(10.198).epsilon(1e-4));
    CHECK(r.find("lsh-rrt", "config-n104", "t_gen_ms") != nullptr);
    CHECK(r.find("lsh-rrt", "config-n104", "t_nns_ms") != nullptr);
    REQUIRE(r.verdicts.size() == 1);
    CHECK(r.verdicts[0].metric == "f_all");
}

TEST_CASE("unsatisfiable corpus is a saturation error") {
    Corpus corpus;
    corpus.space.n = 2;
    corpus.constraints = {Constraint{{{0, 1}}}, Constraint{{{0, 0}}}};
    corpus.faults = {Fault{"f1", {{1, 1}}}};
    ExperimentConfig c;
    c.kind = ExperimentKind::Configurable;
    CHECK_THROWS_AS(run_configurable(c, corpus), SaturationError);
}

TEST_CASE("outputs are written under the prefix") {
    const auto dir = std::filesystem::temp_directory_path() / "lshart_exp_test";
    std::filesystem::create_directories(dir);
    const auto r = run_fmeasure(small_fmeasure());
    write_outputs(r, (dir / "f.csv").string());
    CHECK(slurp(dir / "f.csv") == r.table.to_csv());
    CHECK(slurp(dir / "f.raw.csv") == raw_to_csv(r.raw));
    CHECK(slurp(dir / "f.verdicts.csv") == verdicts_to_csv(r.verdicts));
    std::filesystem::remove_all(dir);
}

TEST_CASE("parallel_for reports the first failing index") {
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] = 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 30) throw ParameterError("at " + std::to_string(i));
        });
        FAIL("expected an error");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()) == "at 7");
    }
}
