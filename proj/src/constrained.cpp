#include "lshart/constrained.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lshart/error.hpp"

namespace lshart {

void ParamSpace::validate() const {
    if (n < 1) throw ParameterError("parameter space needs n >= 1");
    if (!names.empty() && names.size() != n) throw ParameterError("parameter names must be empty or have n entries");
}

void validate_literals(std::span<const Literal> literals, std::size_t n, const std::string& what) {
    std::vector<bool> seen(n, false);
    for (const Literal& l : literals) {
        if (l.idx >= n) throw ParameterError(what + ": parameter index " + std::to_string(l.idx) + " out of range");
        if (l.val != 0 && l.val != 1) throw ParameterError(what + ": literal value must be 0 or 1");
        if (seen[l.idx]) throw ParameterError(what + ": parameter " + std::to_string(l.idx) + " appears twice");
        seen[l.idx] = true;
    }
}

bool matches(std::span<const Literal> literals, std::span<const double> embedded) noexcept {
    for (const Literal& l : literals) {
        if (embedded[l.idx] != static_cast<double>(l.val)) return false;
    }
    return true;
}

ConfigTest::ConfigTest(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw ParameterError("configuration needs at least one parameter");
    for (std::uint8_t b : bits_) {
        if (b > 1) throw ParameterError("configuration bits must be 0 or 1");
    }
}

ConfigTest ConfigTest::from_point(const Point& p) {
    std::vector<std::uint8_t> bits(p.dims());
    for (std::size_t i = 0; i < p.dims(); ++i) {
        if (p[i] == 0.0) {
            bits[i] = 0;
        } else if (p[i] == 1.0) {
            bits[i] = 1;
        } else {
            throw ContractViolation("embedded configuration coordinate is neither 0 nor 1");
        }
    }
    return ConfigTest(std::move(bits));
}

Point ConfigTest::embed() const {
    std::vector<double> c(bits_.begin(), bits_.end());
    return Point(std::move(c));
}

bool is_valid(std::span<const double> embedded, const std::vector<Constraint>& constraints) noexcept {
    for (const Constraint& c : constraints) {
        if (matches(c.literals, embedded)) return false;
    }
    return true;
}

bool is_valid(const ConfigTest& t, const std::vector<Constraint>& constraints) {
    const Point p = t.embed();
    for (const Constraint& c : constraints) {
        for (const Literal& l : c.literals) {
            if (l.idx >= t.size()) throw ContractViolation("constraint refers to a parameter beyond the configuration");
        }
    }
    return is_valid(p.coords(), constraints);
}

SatResult find_valid_assignment(std::size_t n, const std::vector<Constraint>& constraints,
                                std::span<const Literal> fixed, std::size_t max_nodes) {
    if (n < 1) throw ParameterError("satisfiability search needs n >= 1");
    validate_literals(fixed, n, "fixed assignment");
    for (const Constraint& c : constraints) {
        if (c.literals.empty()) return {Satisfiability::Unsatisfiable, std::nullopt};
        validate_literals(c.literals, n, "constraint");
    }
    // DPLL with unit propagation. A constraint is violated when every literal
    // matches; with one unassigned literal left it forces the opposite value.
    std::vector<std::vector<std::size_t>> occurs(n);
    for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
        for (const Literal& l : constraints[ci].literals) occurs[l.idx].push_back(ci);
    }
    std::vector<int> value(n, -1);
    std::vector<std::size_t> trail;
    struct Decision {
        std::size_t trail_size;
        std::size_t var;
        bool flipped;
    };
    std::vector<Decision> decisions;

    auto assign = [&](std::size_t var, int v) {
        value[var] = v;
        trail.push_back(var);
    };
    // Propagates assignments from trail[from]; false on a violated constraint.
    auto propagate = [&](std::size_t from) {
        for (std::size_t head = from; head < trail.size(); ++head) {
            for (std::size_t ci : occurs[trail[head]]) {
                const Literal* open = nullptr;
                std::size_t open_count = 0;
                bool satisfied = false;
                for (const Literal& l : constraints[ci].literals) {
                    if (value[l.idx] == -1) {
                        open = &l;
                        ++open_count;
                    } else if (value[l.idx] != l.val) {
                        satisfied = true;
                        break;
                    }
                }
                if (satisfied || open_count > 1) continue;
                if (open_count == 0) return false;
                assign(open->idx, 1 - open->val);
            }
        }
        return true;
    };
    auto backtrack = [&]() {
        while (!decisions.empty() && decisions.back().flipped) {
            while (trail.size() > decisions.back().trail_size) value[trail.back()] = -1, trail.pop_back();
            decisions.pop_back();
        }
        if (decisions.empty()) return false;
        Decision& d = decisions.back();
        while (trail.size() > d.trail_size) value[trail.back()] = -1, trail.pop_back();
        d.flipped = true;
        assign(d.var, 1);
        return true;
    };

    for (const Literal& l : fixed) assign(l.idx, l.val);
    for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
        if (constraints[ci].literals.size() == 1) {
            const Literal& l = constraints[ci].literals[0];
            if (value[l.idx] == l.val) return {Satisfiability::Unsatisfiable, std::nullopt};
            if (value[l.idx] == -1) assign(l.idx, 1 - l.val);
        }
    }
    bool ok = propagate(0);
    std::size_t nodes = 0;
    std::size_t cursor = 0;  // every variable below cursor is assigned
    while (true) {
        if (!ok) {
            if (!backtrack()) return {Satisfiability::Unsatisfiable, std::nullopt};
            cursor = 0;
            ok = propagate(trail.size() - 1);
            continue;
        }
        while (cursor < n && value[cursor] != -1) ++cursor;
        if (cursor == n) {
            std::vector<std::uint8_t> bits(value.begin(), value.end());
            return {Satisfiability::Satisfiable, ConfigTest(std::move(bits))};
        }
        if (++nodes > max_nodes) return {Satisfiability::Unknown, std::nullopt};
        decisions.push_back({trail.size(), cursor, false});
        assign(cursor, 0);
        ok = propagate(trail.size() - 1);
    }
}

void Corpus::validate() const {
    space.validate();
    for (const Constraint& c : constraints) {
        if (c.literals.empty()) throw ParameterError("constraint must have at least one literal");
        validate_literals(c.literals, space.n, "constraint");
    }
    for (const Fault& f : faults) {
        if (f.trigger.empty()) throw ParameterError("fault '" + f.id + "' has an empty trigger");
        validate_literals(f.trigger, space.n, "fault '" + f.id + "'");
    }
}

namespace {

nlohmann::json literals_to_json(const std::vector<Literal>& lits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Literal& l : lits) arr.push_back({{"idx", l.idx}, {"val", l.val}});
    return arr;
}

std::vector<Literal> literals_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw ParameterError("literal list must be a JSON array");
    std::vector<Literal> out;
    for (const auto& e : arr) out.push_back({e.at("idx").get<std::size_t>(), e.at("val").get<int>()});
    return out;
}

}  // namespace

nlohmann::json Corpus::to_json() const {
    nlohmann::json j;
    j["n"] = space.n;
    if (!space.names.empty()) j["names"] = space.names;
    j["constraints"] = nlohmann::json::array();
    for (const Constraint& c : constraints) j["constraints"].push_back(literals_to_json(c.literals));
    j["faults"] = nlohmann::json::array();
    for (const Fault& f : faults) j["faults"].push_back({{"id", f.id}, {"trigger", literals_to_json(f.trigger)}});
    return j;
}

Corpus Corpus::from_json(const nlohmann::json& j) {
    Corpus c;
    try {
        c.space.n = j.at("n").get<std::size_t>();
        if (j.contains("names")) c.space.names = j.at("names").get<std::vector<std::string>>();
        for (const auto& lits : j.value("constraints", nlohmann::json::array())) {
            c.constraints.push_back({literals_from_json(lits)});
        }
        for (const auto& f : j.value("faults", nlohmann::json::array())) {
            c.faults.push_back({f.at("id").get<std::string>(), literals_from_json(f.at("trigger"))});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("malformed corpus: ") + e.what());
    }
    c.validate();
    return c;
}

Corpus Corpus::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("corpus '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void Corpus::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write corpus file '" + path + "'");
    out << to_json().dump(2) << '\n';
}

namespace {

std::vector<Literal> random_literals(std::size_t n, std::size_t size, SeededRng& rng) {
    std::vector<Literal> lits;
    for (std::size_t idx : sample_distinct_indices(n, size, rng)) {
        lits.push_back({idx, static_cast<int>(rng.below(2))});
    }
    return lits;
}

void add_reachable_faults(Corpus& c, std::size_t n_faults, std::size_t trigger_size, SeededRng& rng) {
    constexpr std::size_t kMaxTriggerAttempts = 10000;
    for (std::size_t i = 0; i < n_faults; ++i) {
        std::size_t attempts = 0;
        while (true) {
            if (++attempts > kMaxTriggerAttempts) throw ConstructionError("could not place a reachable fault trigger");
            auto trigger = random_literals(c.space.n, trigger_size, rng);
            if (find_valid_assignment(c.space.n, c.constraints, trigger).status == Satisfiability::Satisfiable) {
                c.faults.push_back({"f" + std::to_string(i + 1), std::move(trigger)});
                break;
            }
        }
    }
}

}  // namespace

Corpus synthetic_corpus(std::size_t n, std::size_t n_constraints, std::size_t constraint_size, std::size_t n_faults,
                        std::size_t trigger_size, std::uint64_t seed) {
    if (n < 1) throw ParameterError("synthetic corpus needs n >= 1");
    if (constraint_size < 1 || constraint_size > n) throw ParameterError("constraint size must lie in [1, n]");
    if (trigger_size < 1 || trigger_size > n) throw ParameterError("trigger size must lie in [1, n]");
    SeededRng rng(seed);
    Corpus c;
    c.space.n = n;
    for (std::size_t i = 0; i < n_constraints; ++i) c.constraints.push_back({random_literals(n, constraint_size, rng)});
    if (find_valid_assignment(n, c.constraints).status != Satisfiability::Satisfiable) {
        throw ConstructionError("synthetic constraints admit no valid assignment; use fewer or longer constraints");
    }
    add_reachable_faults(c, n_faults, trigger_size, rng);
    return c;
}

Corpus dependency_corpus(std::size_t n, std::size_t n_constraints, std::size_t n_faults, std::size_t trigger_size,
                         std::uint64_t seed) {
    if (n < 2) throw ParameterError("dependency corpus needs n >= 2");
    if (trigger_size < 1 || trigger_size > n) throw ParameterError("trigger size must lie in [1, n]");
    const std::size_t hubs = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n)))), 1, n - 1);
    const std::size_t leaves = n - hubs;
    if (n_constraints > hubs * leaves) {
        throw ParameterError("dependency corpus allows at most " + std::to_string(hubs * leaves) + " constraints");
    }
    SeededRng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    Corpus c;
    c.space.n = n;
    // order[0, hubs) are hubs, the rest leaves; each pair forbids leaf on with hub off.
    for (std::size_t pair : sample_distinct_indices(hubs * leaves, n_constraints, rng)) {
        const std::size_t hub = order[pair / leaves];
        const std::size_t leaf = order[hubs + pair % leaves];
        std::vector<Literal> lits{{leaf, 1}, {hub, 0}};
        std::sort(lits.begin(), lits.end(), [](const Literal& a, const Literal& b) { return a.idx < b.idx; });
        c.constraints.push_back({std::move(lits)});
    }
    add_reachable_faults(c, n_faults, trigger_size, rng);
    return c;
}

void install_constraints(Strategy& strategy, const std::vector<Constraint>& constraints,
                         std::size_t max_consecutive_invalid) {
    if (!strategy.domain().is_binary()) throw ContractViolation("constrained generation needs a binary domain");
    for (const Constraint& c : constraints) validate_literals(c.literals, strategy.domain().dims(), "constraint");
    if (constraints.empty()) {
        strategy.set_candidate_filter(nullptr);
        return;
    }
    strategy.set_candidate_filter(
        [constraints](std::span<const double> c) { return is_valid(c, constraints); }, max_consecutive_invalid);
}

ConfigTest generate_valid(Strategy& strategy) { return ConfigTest::from_point(strategy.next()); }

DetectionResult fault_detection_run(Strategy& strategy, const std::vector<Fault>& faults, std::size_t budget) {
    if (budget < 1) throw ParameterError("detection budget must be at least 1");
    if (faults.empty()) throw ParameterError("detection run needs at least one fault");
    const std::size_t n = strategy.domain().dims();
    for (const Fault& f : faults) validate_literals(f.trigger, n, "fault '" + f.id + "'");

    DetectionResult r;
    r.first_detection.assign(faults.size(), std::nullopt);
    std::size_t remaining = faults.size();
    const auto start = std::chrono::steady_clock::now();
    while (remaining > 0 && r.executed < budget) {
        const Point& t = strategy.next();
        ++r.executed;
        for (std::size_t i = 0; i < faults.size(); ++i) {
            if (!r.first_detection[i] && matches(faults[i].trigger, t.coords())) {
                r.first_detection[i] = r.executed;
                --remaining;
            }
        }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.censored = remaining > 0;
    r.f_all = budget;
    if (!r.censored) {
        r.f_all = 0;
        for (const auto& fd : r.first_detection) r.f_all = std::max(r.f_all, *fd);
    }
    r.stats = strategy.stats();
    return r;
}

}  // namespace lshart
