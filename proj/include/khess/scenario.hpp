#pragma once
// Scenario configuration and check orchestration behind the CLI. Checks run
// in dependency order (core validation, operator, solver, estimates, family,
// stability) and aggregate into deterministic machine-readable reports.

#include <optional>

#include "khess/core.hpp"
#include "khess/family.hpp"

namespace khess {

inline constexpr const char* kReportSchema = "khessian-report/1";

struct Scenario {
    ProblemParams params{3, 1};
    WeightSpec weight = WeightSpec::constant();
    std::optional<FamilyParams> family;
    std::vector<std::string> checks;  // empty selects the default set
    std::string out_path;             // empty: no file written
    std::string format = "json";      // "json" or "csv"
    unsigned long long seed = 20240915ull;
    int trials = 10000;

    static Scenario from_json(const json& j);
    json to_json() const;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    json details;
};

struct RunReport {
    std::vector<CheckResult> results;
    bool all_passed() const;
    json to_json(const Scenario& s) const;
    std::string to_csv() const;
};

std::vector<std::string> known_checks();

// Executes the scenario's checks. Unknown check names and checks whose
// required family block is missing throw std::invalid_argument.
RunReport run_scenario(const Scenario& s);

// writes the report to s.out_path in s.format when a path is set
void write_report(const Scenario& s, const RunReport& rep);

struct SweepSpec {
    Scenario base;
    std::string axis;  // beta | sigma1 | sigma2 | tau | n | k
    std::vector<double> values;

    static SweepSpec from_json(const json& j);
};

struct SweepReport {
    std::vector<std::pair<double, RunReport>> rows;
    bool all_passed() const;
    std::string to_csv() const;  // axis value x check pass/fail matrix
    json to_json() const;
};

// Runs one scenario per axis value on a bounded worker pool; rows keep the
// input order regardless of completion order.
SweepReport run_sweep(const SweepSpec& spec, int max_workers = 4);

}  // namespace khess
