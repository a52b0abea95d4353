// khess: scenario runner and check front end.
// Exit codes: 0 all requested checks pass, 1 check failures,
// 2 configuration/parse errors, 3 internal errors.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "khess/growth.hpp"
#include "khess/scenario.hpp"

namespace {

using khess::json;

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file " + path);
    return json::parse(is);
}

void print_results(const khess::RunReport& rep) {
    for (const auto& c : rep.results)
        std::printf("[%s] %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str());
}

int cmd_run(const std::string& config, const std::string& out, const std::string& format) {
    khess::Scenario s = khess::Scenario::from_json(load_json(config));
    if (!out.empty()) s.out_path = out;
    if (!format.empty()) s.format = format;
    const khess::RunReport rep = khess::run_scenario(s);
    khess::write_report(s, rep);
    print_results(rep);
    return rep.all_passed() ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& out, int workers) {
    const khess::SweepSpec spec = khess::SweepSpec::from_json(load_json(config));
    const khess::SweepReport rep = khess::run_sweep(spec, workers);
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot open output path " + out);
        os << rep.to_csv();
    }
    std::printf("sweep: %zu tuples, %s\n", rep.rows.size(),
                rep.all_passed() ? "all passed" : "failures present");
    return rep.all_passed() ? 0 : 1;
}

int cmd_check_operator(int n, int k, int trials, unsigned long long seed,
                       const std::string& out) {
    khess::Scenario s;
    s.params = khess::ProblemParams(n, k);
    s.checks = {"operator-oracle"};
    s.seed = seed;
    s.trials = trials;
    s.out_path = out;
    const khess::RunReport rep = khess::run_scenario(s);
    khess::write_report(s, rep);
    print_results(rep);
    return rep.all_passed() ? 0 : 1;
}

int cmd_family_verify(const std::string& config, const std::string& out,
                      unsigned long long seed) {
    const json j = load_json(config);
    const khess::ProblemParams p(j.at("n").get<int>(), j.at("k").get<int>());
    json report = json::array();
    bool all_ok = true;
    for (const auto& tj : j.at("tuples")) {
        const khess::FamilyParams fp = khess::FamilyParams::from_json(tj);
        khess::Scenario s;
        s.params = p;
        s.family = fp;
        s.weight = fp.weight();
        s.seed = seed;
        s.checks = {"family-residual", "family-kconvexity", "family-certificate"};
        const khess::RunReport rep = khess::run_scenario(s);
        all_ok = all_ok && rep.all_passed();
        std::printf("tuple sigma1=%g sigma2=%g tau=%g beta=%g:\n", fp.sigma1, fp.sigma2, fp.tau,
                    fp.beta);
        print_results(rep);
        json row;
        row["tuple"] = fp.to_json();
        row["results"] = rep.to_json(s)["results"];
        report.push_back(std::move(row));
    }
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot open output path " + out);
        json top;
        top["schema"] = khess::kReportSchema;
        top["tuples"] = std::move(report);
        top["all_passed"] = all_ok;
        os << top.dump(2) << "\n";
    }
    return all_ok ? 0 : 1;
}

int cmd_delta(int n, int k, const std::string& weight, double sigma1, double sigma2, double tau,
              double rmin, double rmax, int mesh, const std::string& out) {
    khess::WeightSpec spec = khess::WeightSpec::constant();
    if (weight == "power")
        spec = khess::WeightSpec::power_law(sigma1);
    else if (weight == "interp")
        spec = khess::WeightSpec::interpolated_power(sigma1, sigma2, tau);
    else if (weight != "const")
        throw std::invalid_argument("--weight must be const, power or interp");
    const khess::ProblemParams p(n, k);
    auto grid = khess::log_grid(std::max(1.0, rmin), std::max(rmax, std::max(1.0, rmin) * 2),
                                static_cast<std::size_t>(std::max(2, mesh)));
    const khess::ExponentProfile prof = khess::exponent_profile(p, spec, std::move(grid));
    for (std::size_t i = 0; i < prof.r.size(); ++i)
        std::printf("r=%-12.6g alpha=%-20.17g delta=%-20.17g\n", prof.r[i], prof.alpha[i],
                    prof.delta[i]);
    std::printf("delta_inf=%.17g\n", prof.delta_inf);
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot open output path " + out);
        prof.to_csv(os);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks for semi-stable radial k-Hessian equations"};
    app.require_subcommand(1);

    std::string config, out, format;
    int workers = 4;
    int n = 5, k = 2, trials = 10000, mesh = 16;
    unsigned long long seed = 20240915ull;
    std::string weight = "const";
    double sigma1 = 0, sigma2 = 2, tau = 0, rmin = 1, rmax = 100;

    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("--config", config)->required();
    run->add_option("--out", out);
    run->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep config");
    sweep->add_option("--config", config)->required();
    sweep->add_option("--out", out);
    sweep->add_option("--workers", workers)->check(CLI::PositiveNumber);

    auto* chk = app.add_subcommand("check-operator", "operator oracle equivalence suite");
    chk->add_option("--n", n);
    chk->add_option("--k", k);
    chk->add_option("--trials", trials);
    chk->add_option("--seed", seed);
    chk->add_option("--out", out);

    auto* fam = app.add_subcommand("family-verify", "family Step 1 + Step 2 certificates");
    fam->add_option("--config", config)->required();
    fam->add_option("--out", out);
    fam->add_option("--seed", seed);

    auto* del = app.add_subcommand("delta", "print alpha/delta exponents");
    del->add_option("--n", n)->required();
    del->add_option("--k", k)->required();
    del->add_option("--weight", weight);
    del->add_option("--sigma1", sigma1);
    del->add_option("--sigma2", sigma2);
    del->add_option("--tau", tau);
    del->add_option("--rmin", rmin);
    del->add_option("--rmax", rmax);
    del->add_option("--mesh", mesh);
    del->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) return cmd_run(config, out, format);
        if (*sweep) return cmd_sweep(config, out, workers);
        if (*chk) return cmd_check_operator(n, k, trials, seed, out);
        if (*fam) return cmd_family_verify(config, out, seed);
        if (*del) return cmd_delta(n, k, weight, sigma1, sigma2, tau, rmin, rmax, mesh, out);
    } catch (const khess::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 2;
}
