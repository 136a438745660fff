#include "lshart/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lshart/error.hpp"

namespace lshart {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(double v, int precision) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string theta_label(double theta) { return fmt(theta, 6); }

bool is_rrt(const std::string& name) { return name.ends_with("rrt"); }

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Fmeasure: return "fmeasure";
        case ExperimentKind::Pmeasure: return "pmeasure";
        case ExperimentKind::Timing: return "timing";
        case ExperimentKind::Configurable: break;
    }
    return "configurable";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "fmeasure") return ExperimentKind::Fmeasure;
    if (name == "pmeasure") return ExperimentKind::Pmeasure;
    if (name == "timing") return ExperimentKind::Timing;
    if (name == "configurable") return ExperimentKind::Configurable;
    throw ParameterError("unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (strategies.empty()) throw ParameterError("at least one strategy is required");
    std::set<std::string> seen;
    for (const auto& s : strategies) {
        if (!is_strategy_name(s)) throw ParameterError("unknown strategy '" + s + "'");
        if (!seen.insert(s).second) throw ParameterError("strategy '" + s + "' listed twice");
    }
    if (runs < 1) throw ParameterError("runs must be at least 1");
    if (threads < 1) throw ParameterError("threads must be at least 1");
    params.validate();
    if (kind == ExperimentKind::Configurable) {
        if (budget < 1) throw ParameterError("budget must be at least 1");
        return;
    }
    if (dims.empty()) throw ParameterError("at least one dimension is required");
    for (std::size_t d : dims) {
        if (d < 1) throw ParameterError("dimension must be at least 1");
    }
    if (kind == ExperimentKind::Timing) {
        if (n_list.empty()) throw ParameterError("timing needs a nonempty n-list");
        if (n_list.front() < 1) throw ParameterError("timing n values must be at least 1");
        if (!std::is_sorted(n_list.begin(), n_list.end())) throw ParameterError("timing n-list must be nondecreasing");
        if (timing_repetitions < 1) throw ParameterError("timing repetitions must be at least 1");
        return;
    }
    if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("theta must lie in (0, 1)");
    if (kind == ExperimentKind::Pmeasure && n_t < 1) throw ParameterError("N_t must be at least 1");
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"kind", to_string(kind)},
            {"strategies", strategies},
            {"pattern", to_string(pattern)},
            {"dims", dims},
            {"theta", theta},
            {"runs", runs},
            {"n_t", n_t},
            {"set_size", set_size},
            {"n_list", n_list},
            {"timing_repetitions", timing_repetitions},
            {"max_tests", max_tests},
            {"seed", seed},
            {"threads", threads},
            {"deterministic", deterministic},
            {"out", out},
            {"corpus", corpus},
            {"budget", budget},
            {"params",
             {{"k", params.k},
              {"exclusion_ratio", params.exclusion_ratio},
              {"lambda", params.lambda},
              {"p0", params.p0},
              {"tau", params.tau},
              {"bucket_capacity", params.bucket_capacity},
              {"collision_p", params.collision_p},
              {"max_levels", params.max_levels},
              {"max_rrt_attempts", params.max_rrt_attempts}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) { return from_json(j, ExperimentConfig{}); }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, ExperimentConfig c) {
    if (!j.is_object()) throw ParameterError("experiment config must be a JSON object");
    static const std::set<std::string> known{"kind",    "strategies", "pattern", "dims",   "theta",
                                             "runs",    "n_t",        "set_size", "n_list", "timing_repetitions",
                                             "max_tests", "seed",     "threads", "deterministic", "out",
                                             "corpus",  "budget",     "params"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ParameterError("unknown config key '" + key + "'");
    }
    try {
        if (j.contains("kind")) c.kind = parse_experiment_kind(j["kind"].get<std::string>());
        if (j.contains("strategies")) {
            c.strategies = j["strategies"].is_string() ? std::vector<std::string>{j["strategies"].get<std::string>()}
                                                       : j["strategies"].get<std::vector<std::string>>();
        }
        if (j.contains("pattern")) c.pattern = parse_pattern_kind(j["pattern"].get<std::string>());
        if (j.contains("dims")) {
            c.dims = j["dims"].is_number() ? std::vector<std::size_t>{j["dims"].get<std::size_t>()}
                                           : j["dims"].get<std::vector<std::size_t>>();
        }
        c.theta = j.value("theta", c.theta);
        c.runs = j.value("runs", c.runs);
        c.n_t = j.value("n_t", c.n_t);
        c.set_size = j.value("set_size", c.set_size);
        if (j.contains("n_list")) c.n_list = j["n_list"].get<std::vector<std::size_t>>();
        c.timing_repetitions = j.value("timing_repetitions", c.timing_repetitions);
        c.max_tests = j.value("max_tests", c.max_tests);
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        c.deterministic = j.value("deterministic", c.deterministic);
        c.out = j.value("out", c.out);
        c.corpus = j.value("corpus", c.corpus);
        c.budget = j.value("budget", c.budget);
        if (j.contains("params")) {
            const auto& p = j["params"];
            c.params.k = p.value("k", c.params.k);
            c.params.exclusion_ratio = p.value("exclusion_ratio", c.params.exclusion_ratio);
            c.params.lambda = p.value("lambda", c.params.lambda);
            c.params.p0 = p.value("p0", c.params.p0);
            c.params.tau = p.value("tau", c.params.tau);
            c.params.bucket_capacity = p.value("bucket_capacity", c.params.bucket_capacity);
            c.params.collision_p = p.value("collision_p", c.params.collision_p);
            c.params.max_levels = p.value("max_levels", c.params.max_levels);
            c.params.max_rrt_attempts = p.value("max_rrt_attempts", c.params.max_rrt_attempts);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed experiment config: ") + e.what());
    }
    return c;
}

void MetricTable::add(MetricRow row) {
    if (find(row.strategy, row.scenario, row.metric) != nullptr) {
        throw ContractViolation("duplicate metric row " + row.strategy + "/" + row.scenario + "/" + row.metric);
    }
    rows_.push_back(std::move(row));
}

void MetricTable::add(const std::string& strategy, const std::string& scenario, const std::string& metric,
                      std::span<const double> values) {
    add(MetricRow{strategy, scenario, metric, summarize(values)});
}

void MetricTable::add_value(const std::string& strategy, const std::string& scenario, const std::string& metric,
                            double value) {
    const double v[] = {value};
    add(strategy, scenario, metric, v);
}

const MetricRow* MetricTable::find(const std::string& strategy, const std::string& scenario,
                                   const std::string& metric) const {
    for (const auto& r : rows_) {
        if (r.strategy == strategy && r.scenario == scenario && r.metric == metric) return &r;
    }
    return nullptr;
}

std::string MetricTable::to_csv() const {
    std::string out = "strategy,scenario,metric,mean,stddev,ci95_low,ci95_high\n";
    for (const auto& r : rows_) {
        out += csv_field(r.strategy) + ',' + csv_field(r.scenario) + ',' + csv_field(r.metric) + ',' +
               fmt(r.summary.mean, 10) + ',' + fmt(r.summary.stddev, 10) + ',' + fmt(r.summary.ci95_low, 10) + ',' +
               fmt(r.summary.ci95_high, 10) + '\n';
    }
    return out;
}

std::string raw_to_csv(std::span<const RawRow> rows) {
    std::string out = "strategy,scenario,run,metric,value\n";
    for (const auto& r : rows) {
        out += csv_field(r.strategy) + ',' + csv_field(r.scenario) + ',' + std::to_string(r.run) + ',' +
               csv_field(r.metric) + ',' + fmt(r.value, 17) + '\n';
    }
    return out;
}

std::vector<RawRow> raw_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"strategy", "scenario", "run",
                                                                                      "metric", "value"}) {
        throw ParameterError("raw CSV must start with the header strategy,scenario,run,metric,value");
    }
    std::vector<RawRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw ParameterError("raw CSV line " + std::to_string(lineno) + " does not have 5 fields");
        try {
            rows.push_back({f[0], f[1], std::stoull(f[2]), f[3], std::stod(f[4])});
        } catch (const std::exception&) {
            throw ParameterError("raw CSV line " + std::to_string(lineno) + " has a malformed number");
        }
    }
    return rows;
}

std::string verdicts_to_csv(std::span<const VerdictRow> rows) {
    std::string out = "candidate,baseline,scenario,metric,test,p_value,effect,verdict\n";
    for (const auto& r : rows) {
        out += csv_field(r.candidate) + ',' + csv_field(r.baseline) + ',' + csv_field(r.scenario) + ',' +
               csv_field(r.metric) + ',' + r.test + ',' + fmt(r.p_value, 10) + ',' + fmt(r.effect, 10) + ',' +
               to_string(r.verdict) + '\n';
    }
    return out;
}

void write_outputs(const ExperimentResult& result, const std::string& prefix_in, std::span<const std::size_t> dims) {
    if (prefix_in.empty()) throw ParameterError("output path must not be empty");
    std::string prefix = prefix_in;
    if (prefix.ends_with(".csv")) prefix.resize(prefix.size() - 4);
    write_file(prefix + ".csv", result.table.to_csv());
    write_file(prefix + ".raw.csv", raw_to_csv(result.raw));
    write_file(prefix + ".verdicts.csv", verdicts_to_csv(result.verdicts));
    for (std::size_t i = 0; i < result.svgs.size(); ++i) {
        const std::string tag = i < dims.size() ? "d" + std::to_string(dims[i]) : std::to_string(i);
        write_file(prefix + "." + tag + ".svg", result.svgs[i]);
    }
}

std::string scenario_label(PatternKind pattern, std::size_t dims, double theta) {
    return to_string(pattern) + "-d" + std::to_string(dims) + "-t" + theta_label(theta);
}

std::uint64_t name_tag(const std::string& name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::size_t failed_index = count;
    std::exception_ptr failure;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

namespace {

void append_raw(std::vector<RawRow>& raw, const std::string& strategy, const std::string& scenario,
                const std::string& metric, std::span<const double> values) {
    for (std::size_t r = 0; r < values.size(); ++r) raw.push_back({strategy, scenario, r, metric, values[r]});
}

std::string with_context(const std::string& scenario, const std::string& strategy, const std::string& message) {
    return scenario + " / " + strategy + ": " + message;
}

/// Rethrows library errors with the scenario and strategy prefixed.
template <typename F>
void in_context(const std::string& scenario, const std::string& strategy, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        throw Error(e.kind(), with_context(scenario, strategy, e.what()));
    }
}

FailurePattern pattern_for_run(const ExperimentConfig& c, std::size_t d, std::size_t run) {
    SeededRng rng(derive_seed(c.seed, d, run));
    return make_pattern(c.pattern, d, c.theta, rng);
}

std::uint64_t strategy_seed(const ExperimentConfig& c, const std::string& name, std::size_t d, std::size_t run) {
    return derive_seed(c.seed, run, name_tag(name) ^ (static_cast<std::uint64_t>(d) << 48));
}

void add_verdicts(ExperimentResult& result, const ExperimentConfig& c, const std::string& metric,
                  std::size_t sets_per_run = 100) {
    for (std::size_t s = 1; s < c.strategies.size(); ++s) {
        auto rows = compare(result.raw, c.strategies[s], c.strategies[0], metric, sets_per_run);
        result.verdicts.insert(result.verdicts.end(), rows.begin(), rows.end());
    }
}

}  // namespace

ExperimentResult run_fmeasure(const ExperimentConfig& c) {
    c.validate();
    const std::size_t cap = c.max_tests > 0 ? c.max_tests : static_cast<std::size_t>(std::ceil(1000.0 / c.theta));
    const std::size_t S = c.strategies.size();
    ExperimentResult result;
    for (std::size_t d : c.dims) {
        const std::string scenario = scenario_label(c.pattern, d, c.theta);
        const InputDomain domain = InputDomain::unit(d);
        std::vector<std::vector<double>> f(S, std::vector<double>(c.runs)), ms = f, relax = f, censored = f;
        parallel_for(S * c.runs, c.threads, [&](std::size_t task) {
            const std::size_t s = task / c.runs;
            const std::size_t run = task % c.runs;
            const std::string& name = c.strategies[s];
            in_context(scenario, name, [&] {
                const FailurePattern pattern = pattern_for_run(c, d, run);
                Strategy strategy = make_strategy(name, domain, c.params, strategy_seed(c, name, d, run));
                const auto start = Clock::now();
                std::size_t count = 0;
                bool hit = false;
                while (count < cap) {
                    const Point& t = strategy.next();
                    ++count;
                    if (pattern.is_failure(t)) {
                        hit = true;
                        break;
                    }
                }
                ms[s][run] = ms_since(start);
                f[s][run] = static_cast<double>(count);
                relax[s][run] = static_cast<double>(strategy.stats().relaxations);
                censored[s][run] = hit ? 0.0 : 1.0;
            });
        });
        for (std::size_t s = 0; s < S; ++s) {
            const std::string& name = c.strategies[s];
            std::vector<double> ratio(c.runs);
            for (std::size_t r = 0; r < c.runs; ++r) ratio[r] = f_ratio(f[s][r], c.theta);
            result.table.add(name, scenario, "f_measure", f[s]);
            result.table.add(name, scenario, "f_ratio", ratio);
            result.table.add(name, scenario, "relaxations", relax[s]);
            result.table.add(name, scenario, "censored", censored[s]);
            if (!c.deterministic) result.table.add(name, scenario, "f_time_ms", ms[s]);
            append_raw(result.raw, name, scenario, "f_measure", f[s]);
            append_raw(result.raw, name, scenario, "relaxations", relax[s]);
            append_raw(result.raw, name, scenario, "censored", censored[s]);
            if (!c.deterministic) append_raw(result.raw, name, scenario, "f_time_ms", ms[s]);
        }
        result.table.add_value("theory", scenario, "rt_f_measure", theoretical_rt_f(c.theta));
    }
    add_verdicts(result, c, "f_measure");
    return result;
}

ExperimentResult run_pmeasure(const ExperimentConfig& c) {
    c.validate();
    const std::size_t n = c.set_size > 0 ? c.set_size : test_set_size(c.theta);
    const std::size_t S = c.strategies.size();
    ExperimentResult result;
    for (std::size_t d : c.dims) {
        const std::string scenario = scenario_label(c.pattern, d, c.theta);
        const InputDomain domain = InputDomain::unit(d);
        std::vector<std::vector<double>> detected(S, std::vector<double>(c.runs)), pm = detected, em = detected;
        parallel_for(S * c.runs, c.threads, [&](std::size_t task) {
            const std::size_t s = task / c.runs;
            const std::size_t run = task % c.runs;
            const std::string& name = c.strategies[s];
            in_context(scenario, name, [&] {
                const FailurePattern pattern = pattern_for_run(c, d, run);
                const std::uint64_t base = strategy_seed(c, name, d, run);
                PmeasureSample sample;
                sample.n = n;
                std::size_t failures = 0;
                for (std::size_t j = 0; j < c.n_t; ++j) {
                    Strategy strategy = make_strategy(name, domain, c.params, derive_seed(base, j));
                    for (std::size_t i = 0; i < n; ++i) strategy.next();
                    const std::size_t e = e_measure(strategy.executed(), pattern);
                    failures += e;
                    sample.detected.push_back(e > 0);
                }
                detected[s][run] = static_cast<double>(sample.n_f());
                pm[s][run] = p_measure(sample);
                em[s][run] = static_cast<double>(failures) / static_cast<double>(c.n_t);
            });
        });
        for (std::size_t s = 0; s < S; ++s) {
            const std::string& name = c.strategies[s];
            result.table.add(name, scenario, "p_measure", pm[s]);
            result.table.add(name, scenario, "e_measure", em[s]);
            result.table.add(name, scenario, "detected_sets", detected[s]);
            // Pooled over every test set, with the binomial standard error.
            double total = 0.0;
            for (double v : detected[s]) total += v;
            const std::size_t sets = c.runs * c.n_t;
            const double p = total / static_cast<double>(sets);
            const double se = standard_error(std::sqrt(p * (1.0 - p)), sets);
            result.table.add(MetricRow{name, scenario, "p_measure_pooled",
                                       Summary{sets, p, std::sqrt(p * (1.0 - p)), p - 1.959963984540054 * se,
                                               p + 1.959963984540054 * se}});
            append_raw(result.raw, name, scenario, "detected_sets", detected[s]);
            append_raw(result.raw, name, scenario, "p_measure", pm[s]);
            append_raw(result.raw, name, scenario, "e_measure", em[s]);
        }
        const double sd = rt_p_sd(c.theta, n);
        result.table.add(MetricRow{"theory", scenario, "rt_p_measure",
                                   Summary{c.n_t, 1.0 - std::exp(static_cast<double>(n) * std::log1p(-c.theta)), sd,
                                           0.0, 0.0}});
        result.table.add_value("theory", scenario, "rt_p_standard_error", standard_error(sd, c.n_t));
        result.table.add_value("theory", scenario, "test_set_size", static_cast<double>(n));
    }
    add_verdicts(result, c, "detected_sets", c.n_t);
    return result;
}

ExperimentResult run_timing(const ExperimentConfig& c) {
    c.validate();
    ExperimentResult result;
    const std::size_t n_max = c.n_list.back();
    for (std::size_t d : c.dims) {
        const InputDomain domain = InputDomain::unit(d);
        std::vector<SvgSeries> series;
        for (const std::string& name : c.strategies) {
            const std::string dscen = "d" + std::to_string(d);
            // times[i][rep]: elapsed ms when the n_list[i]-th test was generated.
            std::vector<std::vector<double>> times(c.n_list.size(), std::vector<double>(c.timing_repetitions));
            in_context(dscen, name, [&] {
                for (std::size_t rep = 0; rep < c.timing_repetitions; ++rep) {
                    Strategy strategy = make_strategy(name, domain, c.params, strategy_seed(c, name, d, rep));
                    std::size_t checkpoint = 0;
                    const auto start = Clock::now();
                    for (std::size_t i = 1; i <= n_max; ++i) {
                        strategy.next();
                        while (checkpoint < c.n_list.size() && c.n_list[checkpoint] == i) {
                            times[checkpoint++][rep] = ms_since(start);
                        }
                    }
                }
            });
            SvgSeries sv{name, {}, {}, std::nullopt};
            for (std::size_t i = 0; i < c.n_list.size(); ++i) {
                const std::string scen = dscen + "-n" + std::to_string(c.n_list[i]);
                result.table.add(name, scen, "time_ms", times[i]);
                result.table.add_value(name, scen, "time_ms_median", median(times[i]));
                append_raw(result.raw, name, scen, "time_ms", times[i]);
                sv.xs.push_back(static_cast<double>(c.n_list[i]));
                sv.ys.push_back(median(times[i]));
            }
            std::set<double> distinct(sv.xs.begin(), sv.xs.end());
            if (distinct.size() >= 2) {
                sv.fit = linear_fit(sv.xs, sv.ys);
                result.table.add_value(name, dscen, "fit_slope_ms_per_test", sv.fit->slope);
                result.table.add_value(name, dscen, "fit_intercept_ms", sv.fit->intercept);
                result.table.add_value(name, dscen, "fit_r2", sv.fit->r2);
            }
            series.push_back(std::move(sv));
        }
        result.svgs.push_back(render_svg("Generation time, d = " + std::to_string(d), "number of test cases n",
                                         "time (ms)", series));
    }
    return result;
}

ExperimentResult run_configurable(const ExperimentConfig& c) {
    if (c.corpus.empty()) throw ParameterError("configurable experiment needs a corpus file");
    return run_configurable(c, Corpus::load(c.corpus));
}

ExperimentResult run_configurable(const ExperimentConfig& c, const Corpus& corpus) {
    c.validate();
    corpus.validate();
    if (corpus.faults.empty()) throw ParameterError("corpus has no faults to detect");
    const auto sat = find_valid_assignment(corpus.space.n, corpus.constraints);
    if (sat.status == Satisfiability::Unsatisfiable) {
        throw SaturationError("corpus constraints admit no valid configuration");
    }
    const std::size_t n = corpus.space.n;
    const std::size_t S = c.strategies.size();
    const std::size_t F = corpus.faults.size();
    const InputDomain domain = InputDomain::binary(n);
    const std::string scenario = "config-n" + std::to_string(n);

    struct Cell {
        DetectionResult r;
    };
    std::vector<std::vector<Cell>> cells(S, std::vector<Cell>(c.runs));
    parallel_for(S * c.runs, c.threads, [&](std::size_t task) {
        const std::size_t s = task / c.runs;
        const std::size_t run = task % c.runs;
        const std::string& name = c.strategies[s];
        in_context(scenario, name, [&] {
            Strategy strategy = make_strategy(name, domain, c.params, strategy_seed(c, name, n, run));
            install_constraints(strategy, corpus.constraints);
            strategy.enable_timing(!c.deterministic);
            cells[s][run].r = fault_detection_run(strategy, corpus.faults, c.budget);
        });
    });

    ExperimentResult result;
    for (std::size_t s = 0; s < S; ++s) {
        const std::string& name = c.strategies[s];
        auto collect = [&](auto&& get) {
            std::vector<double> v(c.runs);
            for (std::size_t r = 0; r < c.runs; ++r) v[r] = get(cells[s][r].r);
            return v;
        };
        auto emit = [&](const std::string& metric, const std::vector<double>& v) {
            result.table.add(name, scenario, metric, v);
            append_raw(result.raw, name, scenario, metric, v);
        };
        for (std::size_t fi = 0; fi < F; ++fi) {
            emit("f_fault:" + corpus.faults[fi].id, collect([&](const DetectionResult& r) {
                     return static_cast<double>(r.first_detection[fi].value_or(c.budget));
                 }));
        }
        emit("f_all", collect([](const DetectionResult& r) { return static_cast<double>(r.f_all); }));
        emit("censored", collect([](const DetectionResult& r) { return r.censored ? 1.0 : 0.0; }));
        emit("invalid_draws", collect([](const DetectionResult& r) { return static_cast<double>(r.stats.invalid_draws); }));
        emit("acceptance_rate", collect([](const DetectionResult& r) {
                 const double total = static_cast<double>(r.stats.candidates + r.stats.invalid_draws);
                 return total > 0 ? static_cast<double>(r.stats.candidates) / total : 1.0;
             }));
        if (!c.deterministic) {
            emit("f_all_time_ms", collect([](const DetectionResult& r) { return r.seconds * 1e3; }));
            emit("t_gen_ms", collect([](const DetectionResult& r) { return r.stats.generation_seconds * 1e3; }));
            emit("t_nns_ms", collect([](const DetectionResult& r) { return r.stats.selection_seconds * 1e3; }));
        }
        if (is_rrt(name)) {
            result.table.add_value(name, scenario, "initial_rrt_radius",
                                   rrt_radius(n, domain.volume(), c.params.exclusion_ratio, 1));
        }
    }
    result.table.add_value("theory", scenario, "domain_diameter", domain_diameter(domain));
    add_verdicts(result, c, "f_all");
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
    switch (c.kind) {
        case ExperimentKind::Fmeasure: return run_fmeasure(c);
        case ExperimentKind::Pmeasure: return run_pmeasure(c);
        case ExperimentKind::Timing: return run_timing(c);
        case ExperimentKind::Configurable: break;
    }
    return run_configurable(c);
}

std::vector<VerdictRow> compare(std::span<const RawRow> rows, const std::string& candidate, const std::string& baseline,
                                const std::string& metric, std::size_t sets_per_run) {
    if (candidate == baseline) throw ParameterError("candidate and baseline must differ");
    // scenario -> run -> value, per side; std::map keeps scenarios and runs ordered.
    std::map<std::string, std::map<std::size_t, double>> cand, base;
    for (const auto& r : rows) {
        if (r.metric != metric) continue;
        if (r.strategy == candidate) cand[r.scenario][r.run] = r.value;
        if (r.strategy == baseline) base[r.scenario][r.run] = r.value;
    }
    std::vector<VerdictRow> out;
    for (const auto& [scenario, cvals] : cand) {
        auto it = base.find(scenario);
        if (it == base.end()) continue;
        std::vector<double> a, b;
        for (const auto& [run, v] : cvals) a.push_back(v);
        for (const auto& [run, v] : it->second) b.push_back(v);
        VerdictRow row{candidate, baseline, scenario, metric, "", 1.0, 0.5, Verdict::Tie};
        Comparison cmp;
        if (metric == "detected_sets") {
            if (a.size() != b.size()) throw ParameterError("Fisher comparison needs equal run counts on both sides");
            double sa = 0.0, sb = 0.0;
            for (double v : a) sa += v;
            for (double v : b) sb += v;
            cmp = compare_pmeasure(static_cast<std::size_t>(sa), static_cast<std::size_t>(sb), a.size() * sets_per_run);
            row.test = "fisher";
        } else {
            cmp = compare_fmeasure(a, b);
            row.test = "mann-whitney";
        }
        row.p_value = cmp.p_value;
        row.effect = cmp.effect;
        row.verdict = cmp.verdict;
        out.push_back(std::move(row));
    }
    return out;
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw FitError("xs and ys differ in length");
    if (xs.size() < 2) throw FitError("linear fit needs at least two points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("linear fit needs at least two distinct x values");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0;
        return fit;
    }
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
        ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
    return fit;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       std::span<const SvgSeries> series) {
    constexpr double W = 720, H = 460, left = 80, right = 170, top = 40, bottom = 60;
    constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                       "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double xmin = kInfinity, xmax = -kInfinity, ymax = 0.0;
    for (const auto& s : series) {
        for (double x : s.xs) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
        for (double y : s.ys) ymax = std::max(ymax, y);
    }
    if (!(xmin < xmax)) {
        xmin = std::isfinite(xmin) ? xmin - 1.0 : 0.0;
        xmax = xmin + 2.0;
    }
    if (!(ymax > 0.0)) ymax = 1.0;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + ph - y / ymax * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymax * i / 5.0;
        o << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\"" << top + ph + 5
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt(xv, 4)
          << "</text>\n";
        o << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left << "\" y2=\"" << sy(yv)
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv, 4)
          << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
      << "</text>\n";
    o << "<text transform=\"translate(20," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % std::size(palette)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) o << (i ? " " : "") << sx(s.xs[i]) << ',' << sy(s.ys[i]);
        o << "\"/>\n";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            o << "<circle cx=\"" << sx(s.xs[i]) << "\" cy=\"" << sy(s.ys[i]) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
        }
        if (s.fit) {
            const double y0 = std::clamp(s.fit->slope * xmin + s.fit->intercept, 0.0, ymax);
            const double y1 = std::clamp(s.fit->slope * xmax + s.fit->intercept, 0.0, ymax);
            o << "<line x1=\"" << sx(xmin) << "\" y1=\"" << sy(y0) << "\" x2=\"" << sx(xmax) << "\" y2=\"" << sy(y1)
              << "\" stroke=\"" << color << "\" stroke-dasharray=\"5,4\"/>\n";
        }
        const double ly = top + 16.0 * static_cast<double>(k);
        o << "<rect x=\"" << left + pw + 15 << "\" y=\"" << ly << "\" width=\"12\" height=\"3\" fill=\"" << color
          << "\"/>\n";
        std::string label = s.name;
        if (s.fit) label += " (R2=" + fmt(s.fit->r2, 4) + ")";
        o << "<text x=\"" << left + pw + 32 << "\" y=\"" << ly + 5 << "\">" << xml_escape(label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace lshart
