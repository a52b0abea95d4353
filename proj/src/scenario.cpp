#include "khess/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "khess/growth.hpp"
#include "khess/ode.hpp"
#include "khess/radial_hessian.hpp"
#include "khess/stability.hpp"

namespace khess {

Scenario Scenario::from_json(const json& j) {
    Scenario s;
    s.params = ProblemParams(j.at("n").get<int>(), j.at("k").get<int>());
    if (j.contains("weight")) s.weight = WeightSpec::from_json(j.at("weight"));
    if (j.contains("family") && !j.at("family").is_null())
        s.family = FamilyParams::from_json(j.at("family"));
    if (j.contains("checks")) s.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("output")) {
        const auto& o = j.at("output");
        s.out_path = o.value("path", std::string{});
        s.format = o.value("format", std::string{"json"});
    }
    s.seed = j.value("seed", s.seed);
    s.trials = j.value("trials", s.trials);
    if (s.format != "json" && s.format != "csv")
        throw std::invalid_argument("Scenario: format must be json or csv");
    return s;
}

json Scenario::to_json() const {
    json j;
    j["n"] = params.n;
    j["k"] = params.k;
    j["weight"] = weight.to_json();
    if (family) j["family"] = family->to_json();
    j["checks"] = checks;
    j["output"] = {{"path", out_path}, {"format", format}};
    j["seed"] = seed;
    j["trials"] = trials;
    return j;
}

bool RunReport::all_passed() const {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& c) { return c.passed; });
}

json RunReport::to_json(const Scenario& s) const {
    json j;
    j["schema"] = kReportSchema;
    j["scenario"] = s.to_json();
    json arr = json::array();
    for (const auto& c : results)
        arr.push_back({{"check", c.name}, {"passed", c.passed}, {"details", c.details}});
    j["results"] = std::move(arr);
    j["all_passed"] = all_passed();
    return j;
}

std::string RunReport::to_csv() const {
    std::string out = "check,passed\n";
    for (const auto& c : results) out += c.name + "," + (c.passed ? "1" : "0") + "\n";
    return out;
}

namespace {

const FamilyParams& require_family(const Scenario& s, const std::string& check) {
    if (!s.family)
        throw std::invalid_argument("check '" + check + "' requires family parameters");
    return *s.family;
}

CheckResult check_hypotheses(const Scenario& s) {
    const auto rep = validate_hypotheses(s.weight, s.params);
    return {"hypotheses", rep.all_ok(), rep.to_json()};
}

CheckResult check_operator_oracle(const Scenario& s) {
    std::mt19937_64 rng(s.seed);
    std::uniform_int_distribution<int> dim(1, 10);
    std::uniform_real_distribution<double> lam(-5.0, 5.0);
    double worst = 0;
    for (int t = 0; t < s.trials; ++t) {
        const int n = dim(rng);
        std::uniform_int_distribution<int> ord(1, n);
        const int j = ord(rng);
        const ProblemParams p(n, std::max(1, std::min(j, n)));
        const double l1 = lam(rng), l2 = lam(rng);
        const double a = sk_radial(p, j, l1, l2);
        const double b = elementary_symmetric_radial(p, j, l1, l2);
        worst = std::max(worst, std::fabs(a - b) /
                                    std::max({1.0, std::fabs(a), std::fabs(b)}));
    }
    json d;
    d["trials"] = s.trials;
    d["max_relative_error"] = worst;
    return {"operator-oracle", worst <= 1e-10, std::move(d)};
}

CheckResult check_alpha_delta(const Scenario& s) {
    json d;
    bool ok = true;
    try {
        const DeltaInf di = delta_inf(s.params, s.weight);
        const double gap = std::fabs(di.value - di.factorized);
        d["delta_inf"] = di.value;
        d["delta_inf_factorized"] = di.factorized;
        d["sign_factor"] = di.sign_factor;
        ok = gap <= 1e-12 * (1 + std::fabs(di.value));
        for (double r : {2.0, 10.0, 100.0}) {
            const double delta = delta_of_r(s.params, s.weight, r);
            d["delta"][std::to_string(r)] = delta;
            if (delta < di.value - 1e-9) ok = false;  // delta(r) >= delta_inf
        }
        if (s.weight.kind() == WeightKind::PowerLaw && s.weight.sigma1() == 0 && s.params.k == 1) {
            const double closed = -s.params.n / 2.0 + std::sqrt(s.params.n - 1.0) + 2;
            d["closed_form"] = closed;
            if (std::fabs(delta_of_r(s.params, s.weight, 10.0) - closed) > 1e-10) ok = false;
        }
    } catch (const std::domain_error& e) {
        d["error"] = e.what();
        ok = false;
    }
    return {"alpha-delta", ok, std::move(d)};
}

CheckResult check_family_residual(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "family-residual");
    const RadialProfile profile = family_profile(fp, s.params, 1e-2, 1e2, 100, true);
    const auto rep = residual(s.params, s.weight, g_beta_nonlinearity(fp, s.params), profile);
    json d;
    d["sup_norm"] = rep.sup_norm;
    d["points"] = rep.r.size();
    return {"family-residual", rep.sup_norm <= 1e-8, std::move(d)};
}

CheckResult check_family_kconvexity(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "family-kconvexity");
    const auto grid = log_grid(1e-2, 1e3, 400);
    const auto rep = kconvexity_certificate(fp, s.params, grid);
    return {"family-kconvexity", rep.analytic_ok && rep.grid_ok, rep.to_json()};
}

CheckResult check_admissibility(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "admissibility");
    const RadialProfile profile = family_profile(fp, s.params, 1e-2, 1e3, 2000, true);
    const auto rep = k_admissibility(s.params, profile);
    return {"admissibility", rep.admissible, rep.to_json()};
}

CheckResult check_solver_roundtrip(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "solver-roundtrip");
    const Nonlinearity g = g_beta_nonlinearity(fp, s.params);
    const double u1 = u_beta(fp, s.params, 1.0);
    const double du1 = u_beta_prime(fp, s.params, 1.0);
    const double z1 = pow_int(du1, s.params.k);  // r = 1
    auto err_at = [&](int steps) {
        const RadialProfile prof =
            integrate_outward(s.params, s.weight, g, 1.0, u1, z1, 2.0, steps);
        return std::fabs(prof.u.back() - u_beta(fp, s.params, 2.0));
    };
    const double e1 = err_at(64), e2 = err_at(128), e_fine = err_at(400);
    const double order = e2 > 0 ? std::log2(e1 / e2) : 5.0;
    json d;
    d["error_64"] = e1;
    d["error_128"] = e2;
    d["error_400"] = e_fine;
    d["observed_order"] = order;
    return {"solver-roundtrip", e_fine <= 1e-6 && order >= 3.5, std::move(d)};
}

CheckResult check_gradient_positivity(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "gradient-positivity");
    const RadialProfile profile = family_profile(fp, s.params, 1e-2, 1e2, 2000, false);
    const auto rep = gradient_positivity_check(profile);
    return {"gradient-positivity", rep.positive, rep.to_json()};
}

CheckResult check_essentialg(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "essentialg");
    const RadialProfile profile = family_profile(fp, s.params, 0.5, 256.0, 20000, false);
    const auto grid = log_grid(1.0, 8.0, 33);
    const auto rep64 = essentialg_ratio(s.params, s.weight, profile, grid, 64.0);
    const auto rep128 = essentialg_ratio(s.params, s.weight, profile, grid, 128.0);
    const double change =
        std::fabs(rep128.sup_ratio - rep64.sup_ratio) / std::max(rep64.sup_ratio, 1e-300);
    json d;
    d["sup_ratio_R64"] = rep64.sup_ratio;
    d["sup_ratio_R128"] = rep128.sup_ratio;
    d["relative_change"] = change;
    return {"essentialg", std::isfinite(rep128.sup_ratio) && change < 0.05, std::move(d)};
}

CheckResult check_doubling(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "doubling");
    const RadialProfile profile = family_profile(fp, s.params, 0.5, 300.0, 40000, false);
    const auto grid = log_grid(1.0, 100.0, 101);
    const auto rep = doubling_check(s.params, s.weight, profile, grid);
    return {"doubling", !rep.violation && rep.min_ratio > 0, rep.to_json()};
}

CheckResult check_growth(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "growth");
    const GrowthKind kind = fp.beta < 0 ? GrowthKind::Bounded : GrowthKind::Unbounded;
    const RadialProfile profile = family_profile(fp, s.params, 0.5, 1e6, 120000, false);
    const auto rep = growth_theorem_check(s.params, s.weight, profile, kind);
    bool ok = rep.min_ratio > 0;
    json d = rep.to_json();
    if (kind == GrowthKind::Bounded) {
        ok = ok && rep.dimension_condition_ok;
        const double mu = fp.mu(s.params);
        const double bound = std::exp(fp.beta / mu * std::numbers::ln2);
        d["sharp_bound"] = bound;
        ok = ok && rep.min_ratio_from_1 >= bound - 1e-6;
    }
    return {"growth", ok, std::move(d)};
}

CheckResult check_family_certificate(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "family-certificate");
    CertificateOptions opt;
    opt.seed = s.seed;
    const auto cert = semistability_certificate(fp, s.params, opt);
    return {"family-certificate", cert.all_ok(), cert.to_json()};
}

CheckResult check_stability_eigen(const Scenario& s) {
    const FamilyParams& fp = require_family(s, "stability-eigen");
    const RadialProfile profile = family_profile(fp, s.params, 1e-3, 1e3, 200001, true);
    const auto rep =
        is_semistable(s.params, s.weight, g_beta_nonlinearity(fp, s.params), profile);
    return {"stability-eigen", rep.verdict == StabilityReport::Verdict::SemiStable,
            rep.to_json()};
}

using CheckFn = CheckResult (*)(const Scenario&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
    // dependency order: core, operator, solver, estimates, family, stability
    static const std::vector<std::pair<std::string, CheckFn>> reg = {
        {"hypotheses", check_hypotheses},
        {"operator-oracle", check_operator_oracle},
        {"admissibility", check_admissibility},
        {"family-residual", check_family_residual},
        {"family-kconvexity", check_family_kconvexity},
        {"solver-roundtrip", check_solver_roundtrip},
        {"gradient-positivity", check_gradient_positivity},
        {"alpha-delta", check_alpha_delta},
        {"essentialg", check_essentialg},
        {"doubling", check_doubling},
        {"growth", check_growth},
        {"family-certificate", check_family_certificate},
        {"stability-eigen", check_stability_eigen},
    };
    return reg;
}

}  // namespace

std::vector<std::string> known_checks() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : registry()) names.push_back(name);
    return names;
}

RunReport run_scenario(const Scenario& s) {
    std::vector<std::string> wanted = s.checks;
    if (wanted.empty()) {
        wanted = {"hypotheses", "operator-oracle", "alpha-delta"};
        if (s.family) {
            for (const char* c :
                 {"admissibility", "family-residual", "family-kconvexity", "solver-roundtrip",
                  "gradient-positivity", "essentialg", "doubling", "growth",
                  "family-certificate"})
                wanted.push_back(c);
        }
    }
    for (const auto& name : wanted) {
        const bool known = std::any_of(registry().begin(), registry().end(),
                                       [&](const auto& kv) { return kv.first == name; });
        if (!known) throw std::invalid_argument("unknown check '" + name + "'");
    }

    RunReport rep;
    for (const auto& [name, fn] : registry()) {
        if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        rep.results.push_back(fn(s));
    }
    return rep;
}

void write_report(const Scenario& s, const RunReport& rep) {
    if (s.out_path.empty()) return;
    std::ofstream os(s.out_path);
    if (!os) throw std::runtime_error("cannot open output path " + s.out_path);
    if (s.format == "csv")
        os << rep.to_csv();
    else
        os << rep.to_json(s).dump(2) << "\n";
}

SweepSpec SweepSpec::from_json(const json& j) {
    SweepSpec spec;
    spec.base = Scenario::from_json(j.at("base"));
    spec.axis = j.at("axis").get<std::string>();
    spec.values = j.at("values").get<std::vector<double>>();
    const std::vector<std::string> axes = {"beta", "sigma1", "sigma2", "tau", "n", "k"};
    if (std::find(axes.begin(), axes.end(), spec.axis) == axes.end())
        throw std::invalid_argument("sweep axis must be one of beta/sigma1/sigma2/tau/n/k");
    return spec;
}

namespace {

Scenario apply_axis(Scenario s, const std::string& axis, double value) {
    if (axis == "n" || axis == "k") {
        const int iv = static_cast<int>(std::llround(value));
        s.params = axis == "n" ? ProblemParams(iv, s.params.k) : ProblemParams(s.params.n, iv);
    } else {
        if (!s.family) throw std::invalid_argument("sweep axis '" + axis + "' requires family");
        if (axis == "beta") s.family->beta = value;
        if (axis == "sigma1") s.family->sigma1 = value;
        if (axis == "sigma2") s.family->sigma2 = value;
        if (axis == "tau") s.family->tau = value;
        s.weight = s.family->weight();
    }
    s.out_path.clear();
    return s;
}

}  // namespace

bool SweepReport::all_passed() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const auto& row) { return row.second.all_passed(); });
}

std::string SweepReport::to_csv() const {
    std::string out = "value,check,passed\n";
    char buf[64];
    for (const auto& [value, rep] : rows)
        for (const auto& c : rep.results) {
            std::snprintf(buf, sizeof buf, "%.17g", value);
            out += std::string(buf) + "," + c.name + "," + (c.passed ? "1" : "0") + "\n";
        }
    return out;
}

json SweepReport::to_json() const {
    json j;
    j["schema"] = kReportSchema;
    json arr = json::array();
    for (const auto& [value, rep] : rows) {
        json row;
        row["value"] = value;
        row["all_passed"] = rep.all_passed();
        json checks = json::array();
        for (const auto& c : rep.results)
            checks.push_back({{"check", c.name}, {"passed", c.passed}, {"details", c.details}});
        row["results"] = std::move(checks);
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    j["all_passed"] = all_passed();
    return j;
}

SweepReport run_sweep(const SweepSpec& spec, int max_workers) {
    SweepReport rep;
    rep.rows.resize(spec.values.size());
    if (spec.values.empty()) return rep;

    // validate every tuple up front so configuration errors surface as such
    std::vector<Scenario> scenarios;
    scenarios.reserve(spec.values.size());
    for (double v : spec.values) scenarios.push_back(apply_axis(spec.base, spec.axis, v));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                rep.rows[i] = {spec.values[i], run_scenario(scenarios[i])};
            } catch (const std::exception& e) {
                rep.rows[i].first = spec.values[i];
                CheckResult c;
                c.name = "error";
                c.passed = false;
                c.details = json{{"message", e.what()}};
                rep.rows[i].second.results.push_back(std::move(c));
            }
        }
    };
    const int nw = std::max(1, std::min<int>(max_workers, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rep;
}

}  // namespace khess
