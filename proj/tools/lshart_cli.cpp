// Command-line front end for the experiment harness.
//
//   lshart fmeasure --strategy rt,lsh-fscs --pattern block --dim 2 --theta 0.005 --runs 1000 --out results/f
//   lshart pmeasure --strategy rt --theta 0.01 --runs 500 --n-t 100
//   lshart timing --strategy fscs,lsh-fscs --dim 2 --n-list 500,1000,1500
//   lshart configurable --corpus data/corpora/drupal_like.json --strategy rt,lsh-fscs
//   lshart compare --raw a.raw.csv --raw b.raw.csv --candidate lsh-fscs --baseline fscs
//   lshart corpus --n 47 --constraints 45 --faults 8 --style dependency --out corpus.json
//
// Errors are reported as a single JSON line on stderr with a nonzero exit code.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lshart/constrained.hpp"
#include "lshart/error.hpp"
#include "lshart/experiment.hpp"

namespace {

using lshart::ExperimentConfig;
using lshart::ExperimentKind;

int report_error(const std::string& kind, const std::string& message, int code) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lshart::IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Flag values; each is applied over the config file only when given.
struct Flags {
    std::string config;
    std::vector<std::string> strategies;
    std::string pattern;
    std::vector<std::size_t> dims;
    double theta = 0;
    std::size_t runs = 0, n_t = 0, set_size = 0, reps = 0, max_tests = 0, threads = 0, budget = 0;
    std::vector<std::size_t> n_list;
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::string out, corpus;
    std::size_t k = 0, lambda = 0, bucket_capacity = 0, p0 = 0, tau = 0, max_levels = 0;
    double collision_p = 0, exclusion_ratio = 0;
};

struct Bound {
    CLI::App* app;
    ExperimentKind kind;
};

void add_experiment_options(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON experiment config; flags override its fields")->check(CLI::ExistingFile);
    sub->add_option("--strategy", f.strategies, "strategy names; the first is the baseline")->delimiter(',');
    sub->add_option("--out", f.out, "output prefix for <out>.csv, <out>.raw.csv, <out>.verdicts.csv");
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--runs", f.runs, "runs (patterns or repetitions)");
    sub->add_option("--threads", f.threads, "worker threads across runs");
    sub->add_flag("--deterministic", f.deterministic, "omit wall-clock metrics for byte-identical output");
    sub->add_option("--k", f.k, "FSCS candidate count");
    sub->add_option("--exclusion-ratio", f.exclusion_ratio, "RRT exclusion ratio R");
    sub->add_option("--lambda", f.lambda, "forgetting budget");
    sub->add_option("--p0", f.p0, "DF initial partitions per axis");
    sub->add_option("--tau", f.tau, "DF density threshold");
    sub->add_option("--bucket-capacity", f.bucket_capacity, "SLSH bucket capacity m");
    sub->add_option("--collision-p", f.collision_p, "SLSH collision probability at the domain diameter");
    sub->add_option("--max-levels", f.max_levels, "SLSH depth limit");
}

void add_geometry_options(CLI::App* sub, Flags& f) {
    sub->add_option("--pattern", f.pattern, "block, strip or point");
    sub->add_option("--dim", f.dims, "dimensions")->delimiter(',');
    sub->add_option("--theta", f.theta, "failure rate");
}

ExperimentConfig build_config(CLI::App* sub, ExperimentKind kind, const Flags& f) {
    ExperimentConfig c;
    if (!f.config.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(f.config));
        } catch (const nlohmann::json::exception& e) {
            throw lshart::ParameterError("config '" + f.config + "' is not valid JSON: " + e.what());
        }
        c = ExperimentConfig::from_json(j);
    }
    c.kind = kind;
    auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
    if (given("--strategy")) c.strategies = f.strategies;
    if (given("--pattern")) c.pattern = lshart::parse_pattern_kind(f.pattern);
    if (given("--dim")) c.dims = f.dims;
    if (given("--theta")) c.theta = f.theta;
    if (given("--runs")) c.runs = f.runs;
    if (given("--n-t")) c.n_t = f.n_t;
    if (given("--set-size")) c.set_size = f.set_size;
    if (given("--n-list")) c.n_list = f.n_list;
    if (given("--reps")) c.timing_repetitions = f.reps;
    if (given("--max-tests")) c.max_tests = f.max_tests;
    if (given("--seed")) c.seed = f.seed;
    if (given("--threads")) c.threads = f.threads;
    if (given("--deterministic")) c.deterministic = f.deterministic;
    if (given("--out")) c.out = f.out;
    if (given("--corpus")) c.corpus = f.corpus;
    if (given("--budget")) c.budget = f.budget;
    if (given("--k")) c.params.k = f.k;
    if (given("--exclusion-ratio")) c.params.exclusion_ratio = f.exclusion_ratio;
    if (given("--lambda")) c.params.lambda = f.lambda;
    if (given("--p0")) c.params.p0 = f.p0;
    if (given("--tau")) c.params.tau = f.tau;
    if (given("--bucket-capacity")) c.params.bucket_capacity = f.bucket_capacity;
    if (given("--collision-p")) c.params.collision_p = f.collision_p;
    if (given("--max-levels")) c.params.max_levels = f.max_levels;
    c.validate();
    return c;
}

void emit(const lshart::ExperimentResult& result, const ExperimentConfig& c) {
    if (c.out.empty()) {
        std::cout << result.table.to_csv();
        if (!result.verdicts.empty()) std::cout << '\n' << lshart::verdicts_to_csv(result.verdicts);
        return;
    }
    lshart::write_outputs(result, c.out, c.dims);
    std::cerr << "wrote " << c.out << ".*\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive random testing experiments with hash-based neighbor search"};
    app.require_subcommand(1);
    Flags f;

    std::vector<Bound> experiments;
    auto* fm = app.add_subcommand("fmeasure", "tests to first failure over random failure patterns");
    add_experiment_options(fm, f);
    add_geometry_options(fm, f);
    fm->add_option("--max-tests", f.max_tests, "per-run cap; 0 means ceil(1000 / theta)");
    experiments.push_back({fm, ExperimentKind::Fmeasure});

    auto* pm = app.add_subcommand("pmeasure", "detection probability of fixed-size test sets");
    add_experiment_options(pm, f);
    add_geometry_options(pm, f);
    pm->add_option("--n-t", f.n_t, "test sets per pattern");
    pm->add_option("--set-size", f.set_size, "test-set size; 0 derives it from theta");
    experiments.push_back({pm, ExperimentKind::Pmeasure});

    auto* tm = app.add_subcommand("timing", "generation time against the number of test cases");
    add_experiment_options(tm, f);
    tm->add_option("--dim", f.dims, "dimensions")->delimiter(',');
    tm->add_option("--n-list", f.n_list, "nondecreasing test counts")->delimiter(',');
    tm->add_option("--reps", f.reps, "repetitions per point (median reported)");
    experiments.push_back({tm, ExperimentKind::Timing});

    auto* cf = app.add_subcommand("configurable", "fault detection on a constrained binary parameter space");
    add_experiment_options(cf, f);
    cf->add_option("--corpus", f.corpus, "corpus JSON {n, constraints, faults}");
    cf->add_option("--budget", f.budget, "test budget per run");
    experiments.push_back({cf, ExperimentKind::Configurable});

    std::vector<std::string> raw_files;
    std::string candidate, baseline, metric = "f_measure", cmp_out;
    std::size_t sets_per_run = 100;
    auto* cmp = app.add_subcommand("compare", "verdicts from raw per-run CSVs");
    cmp->add_option("--raw", raw_files, "raw CSV files (rows are pooled)")->required()->check(CLI::ExistingFile);
    cmp->add_option("--candidate", candidate, "candidate strategy")->required();
    cmp->add_option("--baseline", baseline, "baseline strategy")->required();
    cmp->add_option("--metric", metric, "metric to compare (detected_sets uses Fisher's test)");
    cmp->add_option("--sets-per-run", sets_per_run, "test sets per run for detected_sets");
    cmp->add_option("--out", cmp_out, "verdict CSV path (stdout when omitted)");

    std::size_t corpus_n = 47, corpus_constraints = 45, corpus_size = 2, corpus_faults = 8, corpus_trigger = 2;
    std::uint64_t corpus_seed = 1;
    std::string corpus_out, corpus_style = "dependency";
    auto* gen = app.add_subcommand("corpus", "write a synthetic corpus");
    gen->add_option("--n", corpus_n, "binary parameters");
    gen->add_option("--constraints", corpus_constraints, "forbidden combinations");
    gen->add_option("--style", corpus_style, "dependency (leaf requires hub) or random (random forbidden combinations)")
        ->check(CLI::IsMember({"dependency", "random"}));
    gen->add_option("--constraint-size", corpus_size, "literals per random constraint");
    gen->add_option("--faults", corpus_faults, "faults");
    gen->add_option("--trigger-size", corpus_trigger, "literals per fault trigger");
    gen->add_option("--seed", corpus_seed, "seed");
    gen->add_option("--out", corpus_out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    try {
        for (const auto& [sub, kind] : experiments) {
            if (!sub->parsed()) continue;
            const ExperimentConfig c = build_config(sub, kind, f);
            emit(lshart::run_experiment(c), c);
            return 0;
        }
        if (cmp->parsed()) {
            std::vector<lshart::RawRow> rows;
            for (const auto& path : raw_files) {
                auto part = lshart::raw_from_csv(read_file(path));
                rows.insert(rows.end(), part.begin(), part.end());
            }
            const auto verdicts = lshart::compare(rows, candidate, baseline, metric, sets_per_run);
            if (verdicts.empty()) throw lshart::ParameterError("no scenario has '" + metric + "' rows for both strategies");
            const std::string csv = lshart::verdicts_to_csv(verdicts);
            if (cmp_out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(cmp_out, std::ios::binary);
                if (!(out << csv)) throw lshart::IoError("cannot write '" + cmp_out + "'");
            }
            return 0;
        }
        if (gen->parsed()) {
            const lshart::Corpus corpus =
                corpus_style == "random"
                    ? lshart::synthetic_corpus(corpus_n, corpus_constraints, corpus_size, corpus_faults, corpus_trigger,
                                               corpus_seed)
                    : lshart::dependency_corpus(corpus_n, corpus_constraints, corpus_faults, corpus_trigger, corpus_seed);
            corpus.save(corpus_out);
            return 0;
        }
    } catch (const lshart::Error& e) {
        return report_error(e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
    return report_error("usage", "no subcommand", 2);
}
