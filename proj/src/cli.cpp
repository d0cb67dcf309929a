#include "pfsi/cli_io.hpp"

#include "pfsi/lemma_constants.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace pfsi {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    return out;
}

int cmd_run(const std::string& path, bool strict, std::ostream& out)
{
    const SimulationConfig cfg = load_config(path);
    const fs::path dir = output_root("pfsi_out") / fs::path(path).stem();
    out << "output: " << dir.string() << '\n';
    return run_to_directory(cfg, dir, strict, out);
}

int cmd_validate(const std::string& path, std::ostream& out)
{
    out << format_config(load_config(path));
    return exit_ok;
}

int cmd_sweep(const std::string& path, const std::string& vary, bool strict, std::ostream& out)
{
    const auto eq = vary.find('=');
    if (eq == std::string::npos)
        throw InputError("--vary expects section.key=v1,v2,...");
    const std::string key = vary.substr(0, eq);
    const std::vector<std::string> values = split(vary.substr(eq + 1), ',');
    if (values.empty())
        throw InputError("--vary lists no values");
    const SimulationConfig base = load_config(path);
    // resolve every variant before running any
    std::vector<SimulationConfig> cfgs;
    for (const auto& v : values) {
        SimulationConfig c = base;
        apply_override(c, key, v);
        cfgs.push_back(c);
    }
    const fs::path root = output_root("pfsi_out") / (fs::path(path).stem().string() + "_sweep");
    fs::create_directories(root);
    std::ostringstream report;
    report << "key,value,exit_code,detachment_time,windows_run,final_t\n";
    int worst = exit_ok;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const fs::path dir = root / (key + "=" + values[k]);
        out << "== " << key << " = " << values[k] << " -> " << dir.string() << '\n';
        Trajectory tr;
        const int code = run_to_directory(cfgs[k], dir, strict, out, &tr);
        worst = std::max(worst, code);
        const auto td = tr.detachment_time();
        report << key << ',' << values[k] << ',' << code << ',' << (td ? format_double(*td) : "") << ','
               << tr.windows_run << ',' << (tr.records.empty() ? "" : format_double(tr.records.back().t)) << '\n';
    }
    write_file_atomic(root / "sweep.csv", report.str());
    out << "sweep report: " << (root / "sweep.csv").string() << '\n';
    return worst;
}

int cmd_check_lemmas(std::uint64_t seed, int trials, bool strict, std::ostream& out)
{
    if (trials < 1)
        throw InputError("--trials must be positive");
    const LemmaReport r = run_lemma_suite(seed, trials, PhysParams{});
    const fs::path dir = output_root("pfsi_out") / ("lemmas_seed" + std::to_string(seed));
    fs::create_directories(dir);
    std::ostringstream ss;
    write_lemma_csv(ss, r.trials);
    write_file_atomic(dir / "lemmas.csv", ss.str());

    std::map<std::string, std::pair<int, int>> tally;  // trials, failures
    std::map<std::string, double> worst;               // max lhs / (C rhs)
    for (const auto& t : r.trials) {
        auto& e = tally[t.lemma];
        ++e.first;
        e.second += t.pass ? 0 : 1;
        if (t.rhs > 0)
            worst[t.lemma] = std::max(worst[t.lemma], t.lhs / (t.constant * t.rhs));
    }
    out << std::setprecision(6);
    for (const auto& [name, e] : tally)
        out << std::left << std::setw(20) << name << " trials " << e.first << "  failures " << e.second
            << "  max lhs/(C rhs) " << worst[name] << '\n';
    out << "korn identity gap " << r.korn_gap_coarse << " -> " << r.korn_gap_fine << " (order " << r.korn_order
        << ")\n";
    out << "max ||u||_L4 / ||u||_H1 " << r.max_l4_over_h1 << ", max ||trace||_L4 / ||u||_H1 "
        << r.max_trace_l4_over_h1 << '\n';
    const bool ok = r.all_pass();
    out << (ok ? "all lemma checks pass" : "lemma check failures present") << "; report " << (dir / "lemmas.csv").string()
        << '\n';

    RunManifest m;
    m.config = "seed = " + std::to_string(seed) + "\ntrials = " + std::to_string(trials) + "\n";
    m.code_version = pfsi_version;
    m.platform = platform_fingerprint();
    m.start_time = m.end_time = utc_now();
    m.exit_status = ok || !strict ? exit_ok : exit_check_failed;
    m.message = ok ? "all pass" : "failures present";
    write_manifest(dir, m, {"lemmas.csv"});
    return m.exit_status;
}

int cmd_calibrate(std::uint64_t seed, int trials, std::ostream& out)
{
    const LemmaConstants c = calibrate_lemma_constants(seed, trials, PhysParams{});
    out << std::setprecision(17) << "korn " << c.korn << "\ngrad_log_s1 " << c.grad_log_s1 << "\ngrad_log_s2 "
        << c.grad_log_s2 << "\nmax_min " << c.max_min << '\n';
    const LemmaConstants& f = frozen_lemma_constants;
    out << std::setprecision(4) << "relative to frozen: " << c.korn / f.korn << ' ' << c.grad_log_s1 / f.grad_log_s1
        << ' ' << c.grad_log_s2 / f.grad_log_s2 << ' ' << c.max_min / f.max_min << '\n';
    return exit_ok;
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Compressible fluid / elastic beam contact simulator"};
    app.name("pfsi");
    app.require_subcommand(1);
    app.fallthrough();
    bool strict = false;
    app.add_flag("--strict", strict, "exit 3 when an inequality check fails");

    std::string config, vary;
    auto* run = app.add_subcommand("run", "run one configuration");
    run->add_option("config", config, "config file")->required();

    auto* validate = app.add_subcommand("validate", "parse a config and print it fully resolved");
    validate->add_option("config", config, "config file")->required();

    auto* sweep = app.add_subcommand("sweep", "run a config once per value of one key");
    sweep->add_option("config", config, "config file")->required();
    sweep->add_option("--vary", vary, "section.key=v1,v2,...")->required();

    std::uint64_t seed = 42;
    int trials = 200;
    auto* lemmas = app.add_subcommand("check-lemmas", "randomized check of the analytic inequalities");
    lemmas->add_option("--seed", seed);
    lemmas->add_option("--trials", trials);

    std::uint64_t cal_seed = frozen_lemma_seed;
    int cal_trials = frozen_lemma_trials;
    auto* calibrate = app.add_subcommand("calibrate-lemmas", "recompute the calibrated lemma constants");
    calibrate->add_option("--seed", cal_seed);
    calibrate->add_option("--trials", cal_trials);

    double T = 0, m = 0, gamma = 0, L = 0, C = 0, F = 0;
    auto* bound = app.add_subcommand("bound", "lower bound on max_t ||eta||_inf from the detachment estimate");
    bound->add_option("--T", T)->required();
    bound->add_option("--m", m)->required();
    bound->add_option("--gamma", gamma)->required();
    bound->add_option("--L", L)->required();
    bound->add_option("--C", C)->required();
    bound->add_option("--F-total", F)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*run)
            return cmd_run(config, strict, out);
        if (*validate)
            return cmd_validate(config, out);
        if (*sweep)
            return cmd_sweep(config, vary, strict, out);
        if (*lemmas)
            return cmd_check_lemmas(seed, trials, strict, out);
        if (*calibrate)
            return cmd_calibrate(cal_seed, cal_trials, out);
        if (*bound) {
            if (!(T >= 0) || !(m > 0) || !(gamma > 1) || !(L > 0) || !(C > 0))
                throw InputError("bound needs T >= 0, m > 0, gamma > 1, L > 0, C > 0");
            const DetachmentBound b = detachment_bound(T, m, gamma, L, C, F);
            if (b.vacuous)
                out << "inf (vacuous: C(1 + sqrt(T)) <= F_total)\n";
            else
                out << std::setprecision(6) << b.value << '\n';
            return exit_ok;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IOError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericalAbort& e) {
        err << "numerical abort: " << e.what() << '\n';
        return exit_numerical;
    }
    err << app.help();
    return exit_usage;
}

}  // namespace pfsi
