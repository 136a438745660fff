#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lshart/domain.hpp"
#include "lshart/strategy.hpp"

namespace lshart {

/// Parameter `idx` takes value `val` (0 or 1).
struct Literal {
    std::size_t idx = 0;
    int val = 0;

    friend bool operator==(const Literal&, const Literal&) = default;
};

struct ParamSpace {
    std::size_t n = 0;
    std::vector<std::string> names;  // empty or exactly n labels

    void validate() const;
};

/// Forbidden combination: an assignment matching every literal is invalid.
struct Constraint {
    std::vector<Literal> literals;
};

/// A test detects the fault iff it matches every trigger literal.
struct Fault {
    std::string id;
    std::vector<Literal> trigger;
};

/// Checks index range, 0/1 values and that no parameter repeats.
void validate_literals(std::span<const Literal> literals, std::size_t n, const std::string& what);

/// True iff the embedded assignment agrees with every literal.
bool matches(std::span<const Literal> literals, std::span<const double> embedded) noexcept;

/// An on/off assignment to the n parameters.
class ConfigTest {
public:
    explicit ConfigTest(std::vector<std::uint8_t> bits);

    /// Inverse of `embed`; every coordinate must be exactly 0.0 or 1.0.
    static ConfigTest from_point(const Point& p);

    std::size_t size() const noexcept { return bits_.size(); }
    int operator[](std::size_t i) const noexcept { return bits_[i]; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    /// Point with 0.0/1.0 coordinates, usable by every distance-based strategy.
    Point embed() const;

    friend bool operator==(const ConfigTest&, const ConfigTest&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

bool is_valid(std::span<const double> embedded, const std::vector<Constraint>& constraints) noexcept;
bool is_valid(const ConfigTest& t, const std::vector<Constraint>& constraints);

enum class Satisfiability { Satisfiable, Unsatisfiable, Unknown };

struct SatResult {
    Satisfiability status = Satisfiability::Unknown;
    std::optional<ConfigTest> witness;
};

/// Backtracking search with unit propagation for a valid assignment that also matches `fixed`.
/// Gives up with Unknown after `max_nodes` search nodes.
SatResult find_valid_assignment(std::size_t n, const std::vector<Constraint>& constraints,
                                std::span<const Literal> fixed = {}, std::size_t max_nodes = 1000000);

/// A configurable system: parameters, constraints and seeded faults.
struct Corpus {
    ParamSpace space;
    std::vector<Constraint> constraints;
    std::vector<Fault> faults;

    void validate() const;

    nlohmann::json to_json() const;
    static Corpus from_json(const nlohmann::json& j);
    static Corpus load(const std::string& path);
    void save(const std::string& path) const;
};

/// Random corpus: `n_constraints` forbidden combinations of `constraint_size`
/// literals and `n_faults` faults with `trigger_size` literals, each trigger
/// reachable by some valid assignment.
Corpus synthetic_corpus(std::size_t n, std::size_t n_constraints, std::size_t constraint_size, std::size_t n_faults,
                        std::size_t trigger_size, std::uint64_t seed);

/// Dependency-style corpus: about sqrt(n) hub parameters; each constraint
/// forbids enabling a leaf parameter while a hub it requires is disabled.
/// The all-off assignment is always valid.
Corpus dependency_corpus(std::size_t n, std::size_t n_constraints, std::size_t n_faults, std::size_t trigger_size,
                         std::uint64_t seed);

/// Restricts a strategy's candidates to valid configurations. The strategy
/// must work over a binary domain of matching dimension.
void install_constraints(Strategy& strategy, const std::vector<Constraint>& constraints,
                         std::size_t max_consecutive_invalid = 1000000);

/// Next valid test from a strategy prepared by `install_constraints`.
ConfigTest generate_valid(Strategy& strategy);

struct DetectionResult {
    /// 1-based index of the first detecting test; nullopt when censored.
    std::vector<std::optional<std::size_t>> first_detection;
    /// Max over faults, or the budget when any fault stayed undetected.
    std::size_t f_all = 0;
    bool censored = false;
    std::size_t executed = 0;
    double seconds = 0.0;
    GenerationStats stats;
};

/// Generates until every fault is detected or `budget` tests have run.
DetectionResult fault_detection_run(Strategy& strategy, const std::vector<Fault>& faults, std::size_t budget);

}  // namespace lshart
