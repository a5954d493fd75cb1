#include "herdlab/run.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "herdlab/chaos.hpp"
#include "herdlab/dynamics.hpp"
#include "herdlab/errors.hpp"
#include "herdlab/fokker_planck.hpp"
#include "herdlab/rng.hpp"
#include "json.hpp"

namespace herdlab {

namespace fs = std::filesystem;

Command parse_command(const std::string& name) {
    if (name == "simulate") return Command::Simulate;
    if (name == "chaos-rates") return Command::ChaosRates;
    if (name == "fp-check") return Command::FpCheck;
    if (name == "duality") return Command::Duality;
    if (name == "optimize") return Command::Optimize;
    if (name == "gamma") return Command::Gamma;
    if (name == "validate") return Command::Validate;
    throw ParseError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::ChaosRates: return "chaos-rates";
        case Command::FpCheck: return "fp-check";
        case Command::Duality: return "duality";
        case Command::Optimize: return "optimize";
        case Command::Gamma: return "gamma";
        case Command::Validate: return "validate";
    }
    return "?";
}

namespace {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::string& header) : path_(path) {
        out_.open(path, std::ios::binary);  // LF line endings everywhere
        if (!out_) throw IoError("cannot open " + path.string() + " for writing");
        out_ << header << "\n";
    }
    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, write_field(fields)), ...);
        out_ << "\n";
    }
    void close() {
        out_.close();
        if (!out_) throw IoError("failed writing " + path_.string());
    }

private:
    void write_field(double v) { out_ << fmt(v); }
    void write_field(int v) { out_ << v; }
    void write_field(const std::string& v) { out_ << v; }
    void write_field(const char* v) { out_ << v; }
    fs::path path_;
    std::ofstream out_;
};

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string error_name(const Error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const UnsupportedError*>(&e)) return "UnsupportedError";
    if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
    if (dynamic_cast<const IndexError*>(&e)) return "IndexError";
    if (dynamic_cast<const SizeError*>(&e)) return "SizeError";
    if (dynamic_cast<const CapacityError*>(&e)) return "CapacityError";
    if (dynamic_cast<const BlowupError*>(&e)) return "BlowupError";
    if (dynamic_cast<const CoefficientError*>(&e)) return "CoefficientError";
    if (dynamic_cast<const ObservableError*>(&e)) return "ObservableError";
    if (dynamic_cast<const FitError*>(&e)) return "FitError";
    if (dynamic_cast<const EvaluationError*>(&e)) return "EvaluationError";
    if (dynamic_cast<const MissingNoiseError*>(&e)) return "MissingNoiseError";
    if (dynamic_cast<const IoError*>(&e)) return "IoError";
    return "Error";
}

double bank_scale_of(const Scenario& sc) {
    return sc.exp.bank_scale > 0.0 ? sc.exp.bank_scale : sc.spec.initial.scale();
}

void write_trajectory_csv(const fs::path& path, const TrajectoryBundle& traj) {
    CsvWriter csv(path, "t,kind,index,coord,value");
    for (int k = 0; k <= traj.steps; ++k) {
        for (int i = 0; i < traj.n; ++i)
            for (int j = 0; j < traj.d; ++j)
                csv.row(traj.times[k], "herd", i, j, traj.herd_at(k).point(i)[j]);
        for (int i = 0; i < traj.m; ++i)
            for (int j = 0; j < traj.d; ++j)
                csv.row(traj.times[k], "herder", i, j, traj.herders_at(k).point(i)[j]);
    }
    csv.close();
}

// 32-byte header: magic "HLAB", u32 version, K, N, M, d, 8 reserved zero
// bytes; then the herd array [K+1][N][d] as little-endian float64.
void write_trajectory_binary(const fs::path& path, const TrajectoryBundle& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    char header[32] = {0};
    std::memcpy(header, "HLAB", 4);
    std::uint32_t words[5] = {1u, static_cast<std::uint32_t>(traj.steps),
                              static_cast<std::uint32_t>(traj.n),
                              static_cast<std::uint32_t>(traj.m),
                              static_cast<std::uint32_t>(traj.d)};
    std::memcpy(header + 4, words, sizeof(words));
    out.write(header, sizeof(header));
    out.write(reinterpret_cast<const char*>(traj.herd.data()),
              static_cast<std::streamsize>(traj.herd.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + path.string());
}

void drive_simulate(const Scenario& sc, const fs::path& dir, int /*threads*/,
                    std::vector<std::string>& outputs) {
    ControlParams control = sc.make_control();
    TrajectoryBundle traj = simulate_finite(sc.spec, control, sc.seed, 0);
    write_trajectory_csv(dir / "trajectory.csv", traj);
    outputs.push_back("trajectory.csv");
    if (sc.exp.binary_export) {
        write_trajectory_binary(dir / "trajectory.bin", traj);
        outputs.push_back("trajectory.bin");
    }
}

void drive_validate(const Scenario& sc, const fs::path& dir,
                    std::vector<std::string>& outputs) {
    ValidationReport report = validate_assumptions(sc.spec, sc.exp.grid_size);
    CsvWriter csv(dir / "validation.csv", "coefficient,estimate,bound,pass");
    for (const auto& c : report.checks)
        csv.row(c.name, c.estimate, c.bound, c.pass ? "true" : "false");
    csv.close();
    outputs.push_back("validation.csv");
}

void drive_chaos_rates(const Scenario& sc, const fs::path& dir, int threads,
                       std::vector<std::string>& outputs) {
    ControlParams control = sc.make_control();
    RateTable table = run_rate_experiment(sc.spec, control, sc.exp.N_list, sc.exp.N_ref,
                                          sc.exp.replicas, sc.exp.q, sc.seed, threads);
    CsvWriter rates(dir / "rates.csv", "N,replicas,q,coupled_err,coupled_se,wq_err,wq_se");
    for (const auto& r : table.rows)
        rates.row(r.N, r.replicas, r.q, r.coupled_err, r.coupled_se, r.wq_err, r.wq_se);
    rates.close();
    outputs.push_back("rates.csv");

    RateExponents predicted = predicted_exponent(sc.exp.q, sc.spec.d, sc.spec.p);
    CsvWriter fit(dir / "fit.csv", "column,slope,intercept,r2,predicted");
    for (auto [name, col] : {std::pair<const char*, RateColumn>{"coupled_err", RateColumn::Coupled},
                             std::pair<const char*, RateColumn>{"wq_err", RateColumn::Wq}}) {
        FitResult f = fit_loglog_slope(table, col);
        fit.row(name, f.slope, f.intercept, f.r2, predicted.exponent);
    }
    fit.close();
    outputs.push_back("fit.csv");
}

void drive_fp_check(const Scenario& sc, const fs::path& dir, int /*threads*/,
                    std::vector<std::string>& outputs) {
    ControlParams control = sc.make_control();
    TestFunctionBank bank = TestFunctionBank::standard(sc.spec.d, bank_scale_of(sc));

    MeanFieldFlow flow =
        simulate_mean_field_reference(sc.spec, control, sc.exp.N_ref, sc.seed, 0);
    WeakResidualReport base = weak_residual(flow, sc.spec, control, bank);

    CsvWriter res(dir / "weak_residual.csv", "phi_id,t,residual");
    for (const auto& s : base.series)
        for (std::size_t k = 0; k < s.t.size(); ++k) res.row(s.phi_id, s.t[k], s.residual[k]);
    res.close();
    outputs.push_back("weak_residual.csv");

    SystemSpec refined_spec = sc.spec;
    refined_spec.dt = sc.spec.step_size() / 2.0;
    MeanFieldFlow refined_flow =
        simulate_mean_field_reference(refined_spec, control, 4 * sc.exp.N_ref, sc.seed, 0);
    WeakResidualReport refined = weak_residual(refined_flow, refined_spec, control, bank);

    CsvWriter summary(dir / "fp_summary.csv", "level,dt,ensemble,max_residual");
    summary.row("base", base.dt, base.ensemble, base.max_abs);
    summary.row("refined", refined.dt, refined.ensemble, refined.max_abs);
    summary.close();
    outputs.push_back("fp_summary.csv");
}

void drive_duality(const Scenario& sc, const fs::path& dir, int threads,
                   std::vector<std::string>& outputs) {
    ControlParams control = sc.make_control();
    TestFunctionBank bank = TestFunctionBank::standard(sc.spec.d, bank_scale_of(sc));
    DualityReport report = duality_check(sc.spec, control, bank, sc.exp.N_ref,
                                         sc.exp.inner_replicas, sc.seed, threads);
    CsvWriter csv(dir / "duality.csv", "phi_id,lhs,rhs,gap,se");
    for (const auto& r : report.rows) csv.row(r.phi_id, r.lhs, r.rhs, r.gap, r.se);
    csv.close();
    outputs.push_back("duality.csv");
}

nlohmann::json control_to_json(const ControlParams& p) {
    nlohmann::json out;
    out["pieces"] = p.pieces;
    out["ell"] = p.ell;
    out["h"] = p.h;
    nlohmann::json gs = nlohmann::json::array();
    for (const auto& g : p.g)
        gs.push_back({{"w_y", g.w_y}, {"w_feat", g.w_feat}, {"bias", g.bias}});
    out["g"] = gs;
    return out;
}

void drive_optimize(const Scenario& sc, const fs::path& dir, int threads,
                    std::vector<std::string>& outputs) {
    ControlParams init = sc.make_control();
    const std::uint64_t crn_seed = stream_key(sc.seed, 0, 0, streams::kOptimizer) >> 1;
    auto evaluator = [&](const ControlParams& p) {
        return eval_cost_finite(sc.spec, p, sc.exp.crn_replicas, crn_seed, threads);
    };
    OptResult res = minimize_cost(sc.spec, evaluator, init, sc.exp.budget, sc.seed);

    CsvWriter trace(dir / "trace.csv", "eval_id,total,best_so_far");
    for (const auto& t : res.trace) trace.row(t.eval_id, t.total, t.best_so_far);
    trace.close();
    outputs.push_back("trace.csv");

    nlohmann::json best = control_to_json(res.best);
    best["cost"] = {{"running", res.cost.running},
                    {"transient", res.cost.transient},
                    {"endpoint", res.cost.endpoint},
                    {"total", res.cost.total},
                    {"total_se", res.cost.total_se},
                    {"replicas", res.cost.replicas}};
    std::ofstream out(dir / "best_control.json", std::ios::binary);
    out << best.dump(2) << "\n";
    if (!out) throw IoError("failed writing best_control.json");
    outputs.push_back("best_control.json");
}

void drive_gamma(const Scenario& sc, const fs::path& dir, int threads,
                 std::vector<std::string>& outputs) {
    GammaOptions opt;
    opt.N_list = sc.exp.N_list;
    opt.N_star = sc.exp.N_star;
    opt.budget = sc.exp.budget;
    opt.replicas = sc.exp.crn_replicas;
    opt.seeds = sc.exp.seeds;
    opt.threads = threads;
    opt.pieces = sc.control_pieces;
    GammaReport report = gamma_experiment(sc.spec, opt);

    CsvWriter csv(dir / "gamma.csv", "N,minFN,se,gap_to_Fstar,cross_eval");
    for (const auto& r : report.rows) csv.row(r.N, r.min_fn, r.se, r.gap_to_fstar, r.cross_eval);
    csv.close();
    outputs.push_back("gamma.csv");

    CsvWriter star(dir / "gamma_star.csv", "N_star,fstar_min,fstar_se,fstar_zero_control");
    star.row(report.N_star, report.fstar_min, report.fstar_se, report.fstar_zero_control);
    star.close();
    outputs.push_back("gamma_star.csv");
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["scenario"] = m.scenario_name;
    j["scenario_hash"] = m.scenario_hash;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["threads"] = m.threads;
    j["outputs"] = m.outputs;
    if (m.error_type.empty()) {
        j["error"] = nullptr;
    } else {
        j["error"] = {{"type", m.error_type}, {"message", m.error_message}};
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest.json");
}

}  // namespace

RunManifest run_command(Command cmd, const Scenario& scenario, const std::string& out_dir,
                        int threads) {
    RunManifest manifest;
    manifest.command = command_name(cmd);
    manifest.scenario_name = scenario.name;
    manifest.scenario_hash = hash_hex(scenario_hash(scenario));
    manifest.seed = scenario.seed;
    manifest.version = kVersion;
    manifest.threads = threads;
    manifest.started_at = now_iso8601();

    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);

    try {
        switch (cmd) {
            case Command::Simulate:
                drive_simulate(scenario, dir, threads, manifest.outputs);
                break;
            case Command::Validate:
                drive_validate(scenario, dir, manifest.outputs);
                break;
            case Command::ChaosRates:
                drive_chaos_rates(scenario, dir, threads, manifest.outputs);
                break;
            case Command::FpCheck:
                drive_fp_check(scenario, dir, threads, manifest.outputs);
                break;
            case Command::Duality:
                drive_duality(scenario, dir, threads, manifest.outputs);
                break;
            case Command::Optimize:
                drive_optimize(scenario, dir, threads, manifest.outputs);
                break;
            case Command::Gamma:
                drive_gamma(scenario, dir, threads, manifest.outputs);
                break;
        }
    } catch (const Error& e) {
        manifest.finished_at = now_iso8601();
        manifest.error_type = error_name(e);
        manifest.error_message = e.what();
        write_manifest(dir, manifest);
        throw;
    }
    manifest.finished_at = now_iso8601();
    write_manifest(dir, manifest);
    manifest.outputs.push_back("manifest.json");
    return manifest;
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const ValidationError&) {
        return 2;
    } catch (const ParseError&) {
        return 2;
    } catch (const UnsupportedError&) {
        return 2;
    } catch (const DimensionError&) {
        return 2;
    } catch (const IndexError&) {
        return 2;
    } catch (const SizeError&) {
        return 2;
    } catch (const CapacityError&) {
        return 2;
    } catch (const IoError&) {
        return 4;
    } catch (const BlowupError&) {
        return 3;
    } catch (const Error&) {
        return 3;
    } catch (const std::exception&) {
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"herdlab: herd-herder SDE-ODE laboratory"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int threads = 0;

    std::vector<std::pair<std::string, Command>> commands = {
        {"simulate", Command::Simulate}, {"chaos-rates", Command::ChaosRates},
        {"fp-check", Command::FpCheck},  {"duality", Command::Duality},
        {"optimize", Command::Optimize}, {"gamma", Command::Gamma},
        {"validate", Command::Validate}};
    for (auto& [name, cmd] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario_path, "scenario JSON path")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_override, "seed override")
            ->each([&seed_given](const std::string&) { seed_given = true; });
        sub->add_option("--threads", threads, "worker threads");
    }

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        Command cmd = parse_command(app.get_subcommands().front()->get_name());
        Scenario scenario = parse_scenario(scenario_path);
        if (seed_given) scenario.seed = seed_override;
        if (threads <= 0) {
            const char* env = std::getenv("HERDLAB_THREADS");
            threads = env ? std::max(1, std::atoi(env)) : 1;
        }
        RunManifest manifest = run_command(cmd, scenario, out_dir, threads);
        std::printf("%s: ok, %zu output(s) in %s\n", manifest.command.c_str(),
                    manifest.outputs.size(), out_dir.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "herdlab: %s\n", e.what());
        return exit_code_for_current_exception();
    }
}

}  // namespace herdlab
