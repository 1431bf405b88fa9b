// ppinv: point-process invariance and moment-identity verification CLI.
//
// Subcommands: combi (exact combinatorics), moments (identity checks),
// invariance (distributional tests of pushforwards), oracle (pathwise
// operator checks).  Exit codes: 0 pass, 1 statistical or exact failure,
// 2 configuration or runtime error.

#include "ppinv/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace ppinv;

namespace {

int run_combi_verify(int nmax) {
    bool ok = true;
    auto line = [&](const std::string& name, bool pass) {
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << "\n";
        ok = ok && pass;
    };

    bool bell = true;
    for (int n = 0; n <= std::min(nmax, 8); ++n)
        bell = bell && touchard(n).eval(exact_scalar(1)) == exact_scalar(bell_number_bruteforce(n));
    line("touchard at 1 equals Bell numbers", bell);

    bool centered = true;
    for (int n = 0; n <= nmax; ++n)
        centered = centered && centered_touchard(n) == compensated_poisson_moment(n);
    line("centered touchard equals no-singleton expansion", centered);

    bool duals = true;
    for (int n = 0; n <= nmax; ++n)
        for (int a = 0; a <= n; ++a) {
            exact_int acc = 0;
            for (int c = 0; c <= a; ++c) {
                if (a - c > n - c) continue;
                exact_int t = exact_binomial(n, c) * stirling_second(n - c, a - c);
                acc += (c % 2 == 0) ? t : -t;
            }
            duals = duals && acc == stirling_no_singleton(n, a);
            exact_int s = 0;
            for (int k = 0; k <= a; ++k)
                s += exact_binomial(n, k) * stirling_no_singleton(n - k, a - k);
            duals = duals && s == stirling_second(n, a);
        }
    line("dual stirling identities", duals);

    bool agg = true;
    for (long total = 0; total <= std::min(nmax, 8); ++total)
        for (long a = 0; a <= total; ++a)
            for (long c = 0; a + c <= total; ++c) {
                exact_int sum = 0;
                for (const auto& L : compositions_of(total - a - c, a)) sum += coeff_c(L, a + c);
                agg = agg && sum == partition_count_oracle(total, a, c);
            }
    line("aggregated coefficient identity vs partition oracle", agg);

    bool special = true;
    for (int n = 0; n <= std::min(nmax, 6); ++n) {
        special = special && central_moment_stirling_form(n) == centered_touchard(n) &&
                  central_moment_coeff_c_form(n) == centered_touchard(n);
    }
    line("indicator specializations equal centered touchard", special);

    return ok ? 0 : 1;
}

int run_combi_table(const std::string& what, int nmax, const std::string& lambda_str,
                    const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw config_error("cannot open output file: " + out_path);

    std::optional<exact_scalar> lambda;
    if (!lambda_str.empty()) {
        const auto slash = lambda_str.find('/');
        if (slash == std::string::npos) {
            lambda = exact_scalar(exact_int(lambda_str));
        } else {
            lambda = exact_scalar(exact_int(lambda_str.substr(0, slash)),
                                  exact_int(lambda_str.substr(slash + 1)));
        }
    }

    if (what == "touchard" || what == "centered") {
        auto make = what == "touchard" ? touchard : centered_touchard;
        if (lambda) {
            out << "n,value\n";
            for (int n = 0; n <= nmax; ++n)
                out << n << "," << render_exact(make(n).eval(*lambda)) << "\n";
        } else {
            out << "n,k,coeff\n";
            for (int n = 0; n <= nmax; ++n) {
                const auto poly = make(n);
                for (std::size_t k = 0; k < poly.size(); ++k)
                    out << n << "," << k << "," << render_exact(poly.coeff(k)) << "\n";
            }
        }
        return 0;
    }
    if (what == "stirling" || what == "s2") {
        out << "n,k,value\n";
        for (int n = 0; n <= nmax; ++n)
            for (int k = 0; k <= n; ++k)
                out << n << "," << k << ","
                    << (what == "stirling" ? stirling_second(n, k) : stirling_no_singleton(n, k))
                    << "\n";
        return 0;
    }
    if (what == "coeffc") {
        out << "a,b,parts,value\n";
        for (long total = 0; total <= nmax; ++total)
            for (long a = 0; a <= total; ++a)
                for (long c = 0; a + c <= total; ++c)
                    for (const auto& L : compositions_of(total - a - c, a)) {
                        out << a << "," << (a + c) << ",\"";
                        for (std::size_t i = 0; i < L.parts.size(); ++i)
                            out << (i ? " " : "") << L.parts[i];
                        out << "\"," << coeff_c(L, a + c) << "\n";
                    }
        return 0;
    }
    throw config_error("unknown table: " + what);
}

void apply_config(experiment_config& cfg, const std::string& path) {
    if (path.empty()) return;
    cfg = experiment_config::from_file(path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-process invariance and moment-identity verification"};
    app.require_subcommand(1);

    // ---- combi ----
    auto* combi = app.add_subcommand("combi", "exact combinatorial identity suites");
    combi->require_subcommand(1);
    int nmax = 8;
    auto* cverify = combi->add_subcommand("verify", "run all exact identity suites");
    cverify->add_option("--nmax", nmax, "largest order to check")->default_val(8);
    std::string what = "touchard", lambda_str, out_path = "table.csv";
    auto* ctable = combi->add_subcommand("table", "emit exact tables as CSV");
    ctable->add_option("--what", what, "touchard|centered|stirling|s2|coeffc")->required();
    ctable->add_option("--nmax", nmax, "largest order")->default_val(8);
    ctable->add_option("--lambda", lambda_str, "rational evaluation point, e.g. 1/2");
    ctable->add_option("--out", out_path, "output CSV path")->required();

    // ---- moments ----
    auto* moments = app.add_subcommand("moments", "moment identity checks");
    moments->require_subcommand(1);
    auto* mverify = moments->add_subcommand(
        "verify", "estimate both sides of an identity with common random numbers.\n"
                  "config keys: process, identity, n, samples, seed, out");
    std::string process = "U2", identity = "isometry", out_json, config_path;
    long samples = 100000;
    int order = 2;
    std::uint64_t seed = 42;
    mverify->add_option("--config", config_path, "flat key-value config file");
    auto* po = mverify->add_option("--process", process, "U1|U2|U3|U4|U4_hull");
    auto* io = mverify->add_option("--identity", identity, "isometry|third|l22|p01|c1|pr1");
    auto* no = mverify->add_option("--n", order, "moment order parameter");
    auto* so = mverify->add_option("--samples", samples, "Monte Carlo samples");
    auto* eo = mverify->add_option("--seed", seed, "RNG seed");
    auto* oo = mverify->add_option("--out", out_json, "report JSON path");

    // ---- invariance ----
    auto* inv = app.add_subcommand("invariance", "distributional invariance tests");
    inv->require_subcommand(1);
    auto* irun = inv->add_subcommand(
        "run", "full invariance suite for a pushforward.\n"
               "config keys: transform, samples, seed, cells, alpha, out");
    std::string transform = "identity";
    int cells = 8;
    double alpha = 0.01;
    std::string inv_config;
    auto* ito = irun->add_option("--transform", transform, "identity|halfswap|hull|negmax");
    auto* iso = irun->add_option("--samples", samples, "configurations to sample");
    auto* ieo = irun->add_option("--seed", seed, "RNG seed");
    auto* ico = irun->add_option("--cells", cells, "equal-mass cells");
    auto* iao = irun->add_option("--alpha", alpha, "family-wise level");
    auto* ioo = irun->add_option("--out", out_json, "report JSON path");
    irun->add_option("--config", inv_config, "flat key-value config file");

    int runs = 200;
    auto* ical = inv->add_subcommand("calibrate", "KS-uniformity of suite p-values over seeds");
    ical->add_option("--transform", transform)->default_val("identity");
    ical->add_option("--runs", runs, "independent seeded runs")->default_val(200);
    ical->add_option("--samples", samples)->default_val(100000);
    ical->add_option("--seed", seed, "first seed")->default_val(42);
    ical->add_option("--out", out_json, "report JSON path");

    // ---- oracle ----
    auto* oracle = app.add_subcommand("oracle", "pathwise operator identity oracles");
    long trials = 100;
    bool with_bernoulli = false;
    oracle->add_option("--trials", trials, "random lookup-table instances")->default_val(100);
    oracle->add_option("--seed", seed, "RNG seed")->default_val(42);
    oracle->add_flag("--bernoulli", with_bernoulli, "include the Bernoulli discretization oracle");
    oracle->add_option("--out", out_json, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? 0 : 2;
    }

    try {
        if (cverify->parsed()) return run_combi_verify(nmax);
        if (ctable->parsed()) return run_combi_table(what, nmax, lambda_str, out_path);

        if (mverify->parsed()) {
            experiment_config cfg;
            apply_config(cfg, config_path);
            if (!*po) process = cfg.get_string("process", process);
            if (!*io) identity = cfg.get_string("identity", identity);
            if (!*no) order = static_cast<int>(cfg.get_long("n", order));
            if (!*so) samples = cfg.get_long("samples", samples);
            if (!*eo) seed = static_cast<std::uint64_t>(cfg.get_long("seed", seed));
            if (!*oo) out_json = cfg.get_string("out", out_json);

            auto rep = run_moment_identity(process, identity, order, samples, seed);
            auto m = process_measure(process);
            json j = to_json(rep);
            j["provenance"] = provenance(seed, samples, m, worker_count());
            if (!out_json.empty()) write_report(j, out_json);
            std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << identity << " " << process
                      << "  lhs=" << rep.lhs.mean << " rhs=" << rep.rhs.mean
                      << " z=" << rep.z_score << "\n";
            return rep.pass ? 0 : 1;
        }

        if (irun->parsed()) {
            experiment_config cfg;
            apply_config(cfg, inv_config);
            if (!*ito) transform = cfg.get_string("transform", transform);
            if (!*iso) samples = cfg.get_long("samples", samples);
            if (!*ieo) seed = static_cast<std::uint64_t>(cfg.get_long("seed", seed));
            if (!*ico) cells = static_cast<int>(cfg.get_long("cells", cells));
            if (!*iao) alpha = cfg.get_number("alpha", alpha);
            if (!*ioo) out_json = cfg.get_string("out", out_json);

            cfg.set("transform", transform);
            auto tau = transform_from_config(cfg);
            auto rep = run_invariance(tau, samples, seed, cells, alpha);
            json j = to_json(rep);
            j["provenance"] = provenance(seed, samples, tau.target, worker_count());
            if (!out_json.empty()) write_report(j, out_json);
            std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << "invariance " << transform
                      << "  chi2_p=" << rep.primary_p << "\n";
            return rep.pass ? 0 : 1;
        }

        if (ical->parsed()) {
            auto tau = make_transform(transform);
            auto rep = calibrate_invariance(tau, runs, samples, seed, cells);
            if (!out_json.empty()) write_report(to_json(rep), out_json);
            std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << "calibration " << transform
                      << "  ks_p=" << rep.ks.p_value << "\n";
            return rep.pass ? 0 : 1;
        }

        if (oracle->parsed()) {
            auto rep = oracle_pathwise(trials, seed);
            json j = to_json(rep);
            if (with_bernoulli) {
                json b = json::array();
                bool bpass = true;
                for (int n = 1; n <= 3; ++n) {
                    auto r = bernoulli_lemma25_check(16, 1.0, n);
                    b.push_back(to_json(r));
                    bpass = bpass && r.pass;
                }
                j["bernoulli"] = b;
                rep.pass = rep.pass && bpass;
                j["verdict"] = rep.pass ? "pass" : "fail";
            }
            if (!out_json.empty()) write_report(j, out_json);
            std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << "oracle  violations="
                      << rep.violations << " mutation_detected=" << rep.mutation_detected << "\n";
            return rep.pass ? 0 : 1;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
