// qpwalk: construct, simulate, and analyze nearest-neighbor walks in
// deterministic, periodic, and quasi-periodic environments.
//
// Exit codes: 0 = verdict pass / pure computation, 2 = verdict fail, 1 = error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qpwalk/analysis.hpp"
#include "qpwalk/constructions.hpp"
#include "qpwalk/engine.hpp"
#include "qpwalk/manifest.hpp"
#include "qpwalk/potential.hpp"

using namespace qpwalk;

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read " + path);
    nlohmann::json j;
    f >> j;
    return j;
}

Environment load_env(const std::string& path) {
    nlohmann::json j = read_json(path);
    if (j.contains("env")) return Environment::from_json(j.at("env"));
    return Environment::from_json(j);
}

CircleMap load_map(const std::string& path) {
    nlohmann::json j = read_json(path);
    if (j.contains("p_map")) return CircleMap::from_json(j.at("p_map"));
    return CircleMap::from_json(j);
}

std::pair<long long, long long> parse_window(const std::string& s) {
    size_t colon = s.find(':', 1); // allow a leading minus
    if (colon == std::string::npos) throw Error("window must be a:b");
    return {std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1))};
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << content;
}

void emit(const nlohmann::json& j, const std::string& out) {
    std::string s = j.dump(2) + "\n";
    if (out.empty())
        std::cout << s;
    else
        write_text(out, s);
}

std::string sigma_profile_csv(const Environment& env, long long lo, long long hi) {
    PotentialTable pt(env, lo, hi);
    std::ostringstream os;
    os << "j,p,sigma,M,log_abs_M\n";
    for (long long j = lo; j <= hi; ++j) {
        os << j << ',' << format_double(env.p(j)) << ','
           << format_double(pt.sigma(j)) << ',' << format_double(pt.mart(j))
           << ',' << format_double(pt.log_abs_mart(j)) << '\n';
    }
    return os.str();
}

// ------------------------------------------------------ scenario run

int run_scenario(const std::string& kind, const nlohmann::json& config,
                 const std::string& plan_path, const std::string& out_dir,
                 uint64_t seed, const std::string& engine) {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioPreset preset;
    if (!plan_path.empty()) {
        nlohmann::json pj = read_json(plan_path);
        preset = build_preset(pj.at("kind").get<std::string>(),
                              pj.value("config", nlohmann::json::object()));
    } else {
        preset = build_preset(kind, config);
    }

    std::filesystem::create_directories(out_dir);
    RunManifest manifest("scenario run " + preset.kind, config, seed);
    auto path_in = [&](const std::string& name) { return out_dir + "/" + name; };

    manifest.write_output(path_in("env.json"), preset.env.to_json().dump(2) + "\n");

    nlohmann::json verdict_json;
    bool pass = false;

    if (preset.kind == "localization") {
        long long N = preset.N;
        manifest.write_output(path_in("sigma_profile.csv"),
                              sigma_profile_csv(preset.env, -N, N));
        CriterionReport cr = check_criterion("c1", preset.env, N, 0.1);
        manifest.write_output(path_in("criteria.json"), cr.to_json().dump(2) + "\n");
        ScenarioConfig sc;
        sc.engine = engine;
        sc.seed = seed;
        ScenarioVerdict verdict = scenario_verdict("localization", preset.env, N, sc);
        verdict_json = verdict.to_json();
        pass = verdict.pass && cr.holds;
    } else if (preset.kind == "one-sided") {
        long long N = preset.N;
        manifest.write_output(path_in("sigma_profile.csv"),
                              sigma_profile_csv(preset.env, -256, 256));
        CriterionThresholds thr;
        thr.c2c_tol = 1e-9;
        CriterionReport cr = check_criterion("c2", preset.env, std::min(N, 4096LL), 0.25, thr);
        manifest.write_output(path_in("criteria.json"), cr.to_json().dump(2) + "\n");
        ScenarioConfig sc;
        sc.epsilon = 0.25;
        sc.seed = seed;
        ScenarioVerdict verdict = scenario_verdict("one-sided", preset.env, N, sc);
        verdict_json = verdict.to_json();
        pass = verdict.pass;
    } else if (preset.kind == "two-sided") {
        long long N = preset.N;
        long long span = static_cast<long long>(0.55 * static_cast<double>(N));
        manifest.write_output(path_in("sigma_profile.csv"),
                              sigma_profile_csv(preset.env, -span, span));
        CriterionThresholds thr;
        // desk-scale barrier target; the sqrt(N) relaxation is recorded
        thr.barrier = config.value("barrier",
                                   std::min(20.0, 0.01 * static_cast<double>(N)));
        thr.A = preset.witness->A;
        thr.Q = preset.witness->Q;
        thr.u = preset.witness->u;
        thr.v = preset.witness->v;
        thr.wm = preset.witness->wm;
        thr.wp = preset.witness->wp;
        thr.up = preset.witness->up;
        thr.vp = preset.witness->vp;
        thr.wpm = preset.witness->wpm;
        thr.wpp = preset.witness->wpp;
        CriterionReport cr =
            check_criterion("c3", preset.env, N, preset.meta.value("epsilon", 0.12), thr,
                            preset.base_env ? &*preset.base_env : nullptr);
        manifest.write_output(path_in("criteria.json"), cr.to_json().dump(2) + "\n");
        ScenarioConfig sc;
        sc.witness = preset.witness;
        sc.leakage_budget = 0.01;
        sc.seed = seed;
        ScenarioVerdict verdict = scenario_verdict("two-sided", preset.env, N, sc);
        verdict_json = verdict.to_json();
        pass = verdict.pass && cr.holds;
    } else if (preset.kind == "asymmetric-drift") {
        AsymDriftReport rep = asym_drift_report(preset, config.value("grid", 256));
        std::ostringstream os;
        os << "x,u,b_t,in_J,in_Jp\n";
        for (size_t i = 0; i < rep.profile.x.size(); ++i)
            os << format_double(rep.profile.x[i]) << ','
               << format_double(rep.profile.u[i]) << ',' << rep.profile.b_t[i]
               << ',' << int(rep.in_J[i]) << ',' << int(rep.in_Jp[i]) << '\n';
        manifest.write_output(path_in("drift_profile.csv"), os.str());
        verdict_json = {{"kind", "asymmetric-drift"}, {"pass", rep.pass},
                        {"details", rep.details}};
        pass = rep.pass;
    } else if (preset.kind == "diophantine-window") {
        manifest.write_output(path_in("sigma_profile.csv"),
                              sigma_profile_csv(preset.env, -512, 512));
        ScenarioConfig sc;
        sc.seed = seed;
        ScenarioVerdict verdict =
            scenario_verdict("diophantine-clt", preset.env, preset.N, sc);
        verdict_json = verdict.to_json();
        pass = verdict.pass;
    } else {
        throw Error("unknown scenario kind: " + preset.kind);
    }

    manifest.write_output(path_in("verdict.json"), verdict_json.dump(2) + "\n");
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.finish(wall);
    manifest.save(path_in("manifest.json"));
    std::cout << verdict_json.dump(2) << "\n";
    return pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-periodic random walk toolkit"};
    app.require_subcommand(1);

    // ------------------------------------------------------------- env
    auto* env_cmd = app.add_subcommand("env", "environment construction/inspection");
    env_cmd->require_subcommand(1);

    auto* env_build = env_cmd->add_subcommand("build", "build an environment spec");
    std::string eb_preset, eb_kind, eb_values, eb_p, eb_alpha = "golden", eb_out;
    long long eb_K = 0, eb_K1 = 16, eb_K2 = 64, eb_lo = 0;
    long long eb_xnum = 0, eb_xden = 1;
    double eb_left = 0.5, eb_right = 0.5, eb_eps = 0.01;
    uint64_t eb_seed = 12345;
    bool eb_noextend = false;
    env_build->add_option("--preset", eb_preset, "localization|clt|two-sided");
    env_build->add_option("--kind", eb_kind, "periodic|tabulated|procedural|quasiperiodic");
    env_build->add_option("--values", eb_values, "comma-separated probabilities");
    env_build->add_option("--p", eb_p, "CircleMap JSON file (quasiperiodic)");
    env_build->add_option("--alpha", eb_alpha,
                          "golden|silver|quotients:a1,..|liouville:s1,..");
    env_build->add_option("--x-num", eb_xnum);
    env_build->add_option("--x-den", eb_xden);
    env_build->add_option("--K", eb_K);
    env_build->add_option("--K1", eb_K1);
    env_build->add_option("--K2", eb_K2);
    env_build->add_option("--eps", eb_eps);
    env_build->add_option("--seed", eb_seed);
    env_build->add_option("--lo", eb_lo);
    env_build->add_option("--left", eb_left);
    env_build->add_option("--right", eb_right);
    env_build->add_flag("--no-extend", eb_noextend);
    env_build->add_option("--out", eb_out)->required();

    auto* env_inspect = env_cmd->add_subcommand("inspect", "print j, p, Sigma, M as CSV");
    std::string ei_env, ei_window = "-32:32", ei_out;
    env_inspect->add_option("--env", ei_env)->required();
    env_inspect->add_option("--window", ei_window);
    env_inspect->add_option("--out", ei_out);

    // -------------------------------------------------------- potential
    auto* pot_cmd = app.add_subcommand("potential", "potential table and traps");
    pot_cmd->require_subcommand(1);
    auto* pot_table = pot_cmd->add_subcommand("table", "Sigma/M table CSV");
    std::string pt_env, pt_window = "-32:32", pt_out;
    pot_table->add_option("--env", pt_env)->required();
    pot_table->add_option("--window", pt_window);
    pot_table->add_option("--out", pt_out);
    auto* pot_traps = pot_cmd->add_subcommand("traps", "potential traps");
    std::string tr_env, tr_window = "-128:128", tr_out;
    double tr_threshold = 5.0;
    pot_traps->add_option("--env", tr_env)->required();
    pot_traps->add_option("--window", tr_window);
    pot_traps->add_option("--threshold", tr_threshold);
    pot_traps->add_option("--out", tr_out);

    // --------------------------------------------------------- criteria
    auto* crit_cmd = app.add_subcommand("criteria", "criteria checkers");
    auto* crit_check = crit_cmd->add_subcommand("check", "check C1/C2/C3");
    std::string cc_kind = "c1", cc_env, cc_base, cc_out;
    long long cc_N = 64;
    double cc_eps = 0.1, cc_barrier = -1.0, cc_c2c = 1e-9;
    double cc_A = -1.0;
    long long cc_L = -1, cc_Q = -1;
    std::vector<double> cc_witness;
    crit_check->add_option("--kind", cc_kind, "c1|c2|c3")->required();
    crit_check->add_option("--env", cc_env)->required();
    crit_check->add_option("--base", cc_base, "base env for C3c");
    crit_check->add_option("--N", cc_N)->required();
    crit_check->add_option("--eps", cc_eps);
    crit_check->add_option("--A", cc_A);
    crit_check->add_option("--L", cc_L);
    crit_check->add_option("--Q", cc_Q);
    crit_check->add_option("--barrier", cc_barrier);
    crit_check->add_option("--c2c-tol", cc_c2c);
    crit_check->add_option("--witness", cc_witness,
                           "u,v,w-,w+,u',v',w'-,w'+ for C3")->expected(8);
    crit_check->add_option("--out", cc_out);

    // ------------------------------------------------------------- walk
    auto* walk_cmd = app.add_subcommand("walk", "simulation and exact evolution");
    walk_cmd->require_subcommand(1);

    auto* walk_sim = walk_cmd->add_subcommand("simulate", "Monte Carlo trajectories");
    std::string ws_env, ws_out, ws_record = "endpoints";
    double ws_T = 1000, ws_traj = 10000;
    long long ws_start = 0;
    uint64_t ws_seed = 1;
    walk_sim->add_option("--env", ws_env)->required();
    walk_sim->add_option("--T", ws_T);
    walk_sim->add_option("--traj", ws_traj);
    walk_sim->add_option("--seed", ws_seed);
    walk_sim->add_option("--start", ws_start);
    walk_sim->add_option("--record", ws_record,
                         "endpoints|max-excursion|full-path-sample");
    walk_sim->add_option("--out", ws_out, "CSV: traj_id,endpoint");

    auto* walk_exact = walk_cmd->add_subcommand("exact", "exact forward evolution");
    std::string we_env, we_window, we_out;
    double we_T = 1000;
    long long we_start = 0;
    walk_exact->add_option("--env", we_env)->required();
    walk_exact->add_option("--T", we_T);
    walk_exact->add_option("--window", we_window, "a:b (default start +- T+1)");
    walk_exact->add_option("--start", we_start);
    walk_exact->add_option("--out", we_out, "CSV: site,mass");

    auto* walk_exit = walk_cmd->add_subcommand("exit", "first-passage solves");
    std::string wx_env, wx_out;
    long long wx_a = -16, wx_b = 16, wx_start = 0;
    bool wx_full = false;
    walk_exit->add_option("--env", wx_env)->required();
    walk_exit->add_option("--a", wx_a);
    walk_exit->add_option("--b", wx_b);
    walk_exit->add_option("--start", wx_start);
    walk_exit->add_flag("--full", wx_full, "include occupation and r_k arrays");
    walk_exit->add_option("--out", wx_out);

    // ---------------------------------------------------------- analyze
    auto* an_cmd = app.add_subcommand("analyze", "statistical verdicts");
    an_cmd->require_subcommand(1);

    auto* an_moments = an_cmd->add_subcommand("moments", "mean/variance of the law");
    std::string am_env, am_window, am_out;
    double am_T = 1000, am_budget = 1e-9;
    an_moments->add_option("--env", am_env)->required();
    an_moments->add_option("--T", am_T);
    an_moments->add_option("--window", am_window);
    an_moments->add_option("--leakage-budget", am_budget);
    an_moments->add_option("--out", am_out);

    auto* an_clt = an_cmd->add_subcommand("clt", "KS distance to the normal law");
    std::string ac_env, ac_mu = "auto", ac_sigma = "auto", ac_out;
    double ac_T = 10000, ac_tol = 0.05;
    an_clt->add_option("--env", ac_env)->required();
    an_clt->add_option("--T", ac_T);
    an_clt->add_option("--mu", ac_mu);
    an_clt->add_option("--sigma", ac_sigma);
    an_clt->add_option("--ks-tol", ac_tol);
    an_clt->add_option("--out", ac_out);

    auto* an_drift = an_cmd->add_subcommand("drift-profile", "x, u(x), b_t(x) CSV");
    std::string ad_p, ad_alpha = "golden", ad_out;
    double ad_t = 10000;
    int ad_grid = 256;
    an_drift->add_option("--p", ad_p)->required();
    an_drift->add_option("--alpha", ad_alpha);
    an_drift->add_option("--t", ad_t);
    an_drift->add_option("--grid", ad_grid);
    an_drift->add_option("--out", ad_out);

    auto* an_stat = an_cmd->add_subcommand("stationary", "stationary density residuals");
    std::string as_p, as_alpha = "golden", as_out, as_csv;
    int as_grid = 512;
    double as_tol = 1e-10;
    an_stat->add_option("--p", as_p)->required();
    an_stat->add_option("--alpha", as_alpha);
    an_stat->add_option("--grid", as_grid);
    an_stat->add_option("--tol", as_tol);
    an_stat->add_option("--out", as_out);
    an_stat->add_option("--csv", as_csv, "x,rho CSV path");

    // ---------------------------------------------------------- scenario
    auto* sc_cmd = app.add_subcommand("scenario", "end-to-end preset runs");
    sc_cmd->require_subcommand(1);

    auto* sc_build = sc_cmd->add_subcommand("build", "build a scenario plan");
    std::string sb_kind, sb_out, sb_alpha;
    long long sb_N = -1, sb_K = 0, sb_t = -1, sb_a3 = -1;
    double sb_s = -1.0;
    int sb_n = -1;
    sc_build->add_option("--kind", sb_kind,
                         "localization|one-sided|two-sided|c3|asymmetric-drift|"
                         "diophantine-window")->required();
    sc_build->add_option("--N", sb_N);
    sc_build->add_option("--K", sb_K);
    sc_build->add_option("--t", sb_t);
    sc_build->add_option("--n", sb_n);
    sc_build->add_option("--s", sb_s);
    sc_build->add_option("--a3", sb_a3);
    sc_build->add_option("--alpha", sb_alpha, "recorded; used by presets that take it");
    sc_build->add_option("--out", sb_out)->required();

    auto* sc_run = sc_cmd->add_subcommand("run", "run a scenario end to end");
    std::string sr_kind, sr_plan, sr_dir = ".", sr_engine = "exact";
    long long sr_N = -1;
    uint64_t sr_seed = 1;
    sc_run->add_option("--kind", sr_kind);
    sc_run->add_option("--plan", sr_plan, "plan JSON from scenario build");
    sc_run->add_option("--out-dir", sr_dir);
    sc_run->add_option("--seed", sr_seed);
    sc_run->add_option("--engine", sr_engine, "exact|mc (localization)");
    sc_run->add_option("--N", sr_N);

    CLI11_PARSE(app, argc, argv);

    try {
        // ------------------------------------------------------------ env
        if (*env_build) {
            Environment env;
            nlohmann::json extra;
            if (!eb_preset.empty()) {
                GenericEnvResult r = generic_env(eb_preset, eb_K, eb_K1, eb_K2,
                                                 eb_eps, eb_seed);
                env = r.env;
                extra = {{"achieved_ratio", r.achieved_ratio}, {"balanced", r.balanced}};
            } else if (eb_kind == "periodic") {
                env = Environment::periodic(parse_doubles(eb_values));
            } else if (eb_kind == "tabulated") {
                env = Environment::tabulated(parse_doubles(eb_values), eb_lo,
                                             !eb_noextend);
            } else if (eb_kind == "procedural") {
                env = Environment::procedural(parse_doubles(eb_values), eb_lo,
                                              eb_left, eb_right);
            } else if (eb_kind == "quasiperiodic") {
                env = Environment::quasiperiodic(load_map(eb_p),
                                                 Frequency::parse(eb_alpha),
                                                 BigRat(BigInt(eb_xnum), BigInt(eb_xden)));
            } else {
                throw Error("give --preset or a valid --kind");
            }
            write_text(eb_out, env.to_json().dump(2) + "\n");
            nlohmann::json info{{"kappa", env.kappa()}, {"out", eb_out}};
            if (!extra.empty()) info["generic"] = extra;
            std::cout << info.dump(2) << "\n";
            return 0;
        }
        if (*env_inspect) {
            auto [a, b] = parse_window(ei_window);
            std::string csv = sigma_profile_csv(load_env(ei_env), a, b);
            if (ei_out.empty()) std::cout << csv;
            else write_text(ei_out, csv);
            return 0;
        }
        if (*pot_table) {
            auto [a, b] = parse_window(pt_window);
            std::string csv = sigma_profile_csv(load_env(pt_env), a, b);
            if (pt_out.empty()) std::cout << csv;
            else write_text(pt_out, csv);
            return 0;
        }
        if (*pot_traps) {
            auto [a, b] = parse_window(tr_window);
            std::vector<Trap> traps = find_traps(load_env(tr_env), a, b, tr_threshold);
            std::ostringstream os;
            os << "left,bottom,right,depth\n";
            for (const Trap& t : traps)
                os << t.left << ',' << t.bottom << ',' << t.right << ','
                   << format_double(t.depth) << '\n';
            if (tr_out.empty()) std::cout << os.str();
            else write_text(tr_out, os.str());
            return 0;
        }
        if (*crit_check) {
            Environment env = load_env(cc_env);
            std::optional<Environment> base;
            if (!cc_base.empty()) base = load_env(cc_base);
            CriterionThresholds thr;
            if (cc_A > 0) thr.A = cc_A;
            if (cc_L > 0) thr.L = cc_L;
            if (cc_Q > 0) thr.Q = cc_Q;
            thr.barrier = cc_barrier;
            thr.c2c_tol = cc_c2c;
            if (cc_witness.size() == 8) {
                thr.u = cc_witness[0];
                thr.v = cc_witness[1];
                thr.wm = cc_witness[2];
                thr.wp = cc_witness[3];
                thr.up = cc_witness[4];
                thr.vp = cc_witness[5];
                thr.wpm = cc_witness[6];
                thr.wpp = cc_witness[7];
            }
            CriterionReport rep = check_criterion(cc_kind, env, cc_N, cc_eps, thr,
                                                  base ? &*base : nullptr);
            emit(rep.to_json(), cc_out);
            return rep.holds ? 0 : 2;
        }
        if (*walk_sim) {
            Environment env = load_env(ws_env);
            RecordMode mode = ws_record == "max-excursion" ? RecordMode::max_excursion
                              : ws_record == "full-path-sample"
                                  ? RecordMode::full_path_sample
                                  : RecordMode::endpoints;
            SimulateResult res =
                simulate(env, static_cast<long long>(ws_T),
                         static_cast<uint64_t>(ws_traj), ws_seed, mode, ws_start,
                         default_exec(), !ws_out.empty());
            if (!ws_out.empty()) {
                std::ostringstream os;
                if (mode == RecordMode::full_path_sample) {
                    os << "traj_id,t,site\n";
                    for (size_t i = 0; i < res.sample_paths.size(); ++i)
                        for (size_t t = 0; t < res.sample_paths[i].size(); ++t)
                            os << i << ',' << t << ',' << res.sample_paths[i][t] << '\n';
                } else {
                    os << "traj_id,endpoint\n";
                    for (size_t i = 0; i < res.endpoints.size(); ++i)
                        os << i << ',' << res.endpoints[i] << '\n';
                }
                write_text(ws_out, os.str());
            }
            nlohmann::json j{{"T", res.T}, {"n_traj", res.n_traj}, {"seed", res.seed},
                             {"mean", res.mean}, {"variance", res.variance}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*walk_exact) {
            Environment env = load_env(we_env);
            long long T = static_cast<long long>(we_T);
            long long a = we_start - T - 1, b = we_start + T + 1;
            if (!we_window.empty()) std::tie(a, b) = parse_window(we_window);
            LatticeDistribution dist = evolve_exact(env, T, a, b, we_start);
            if (!we_out.empty()) {
                std::ostringstream os;
                os << "site,mass\n";
                for (size_t i = 0; i < dist.mass.size(); ++i)
                    if (dist.mass[i] != 0.0)
                        os << dist.lo + static_cast<long long>(i) << ','
                           << format_double(dist.mass[i]) << '\n';
                write_text(we_out, os.str());
            }
            Moments m = moments(dist, 1.0);
            nlohmann::json j{{"T", T}, {"window", {dist.lo, dist.hi}},
                             {"mean", m.mean}, {"variance", m.variance},
                             {"leak_left", dist.leak_left},
                             {"leak_right", dist.leak_right}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*walk_exit) {
            Environment env = load_env(wx_env);
            ExitStats st = exit_solve(env, wx_a, wx_b, wx_start);
            nlohmann::json j{{"a", st.a}, {"b", st.b}, {"start", st.start},
                             {"p_exit_right", st.p_exit_right},
                             {"m1", st.m1}, {"m2", st.m2}, {"m3", st.m3},
                             {"m1_right", st.m1_right}};
            if (wx_full) {
                j["occupation"] = st.occupation;
                j["return_escape"] = st.return_escape;
            }
            emit(j, wx_out);
            return 0;
        }
        if (*an_moments) {
            Environment env = load_env(am_env);
            long long T = static_cast<long long>(am_T);
            long long a = -T - 1, b = T + 1;
            if (!am_window.empty()) std::tie(a, b) = parse_window(am_window);
            Moments m = moments(evolve_exact(env, T, a, b, 0), am_budget);
            emit({{"T", T}, {"mean", m.mean}, {"variance", m.variance},
                  {"leakage", m.leakage}}, am_out);
            return 0;
        }
        if (*an_clt) {
            Environment env = load_env(ac_env);
            long long T = static_cast<long long>(ac_T);
            LatticeDistribution dist = evolve_exact(env, T, -T - 1, T + 1, 0);
            double mu, sigma;
            std::string source;
            if (ac_mu == "auto" || ac_sigma == "auto") {
                if (env.kind() == Environment::Kind::periodic) {
                    RenewalStats rs = renewal_stats(env);
                    mu = rs.predict_mu(static_cast<double>(T));
                    sigma = rs.predict_sigma(static_cast<double>(T));
                    source = "renewal";
                } else {
                    Moments m = moments(dist, 1.0);
                    mu = m.mean;
                    sigma = std::sqrt(m.variance);
                    source = "moments";
                }
                if (ac_mu != "auto") mu = std::stod(ac_mu);
                if (ac_sigma != "auto") sigma = std::stod(ac_sigma);
            } else {
                mu = std::stod(ac_mu);
                sigma = std::stod(ac_sigma);
                source = "given";
            }
            double ks = ks_phi(dist, mu, sigma);
            bool pass = ks < ac_tol;
            emit({{"T", T}, {"mu", mu}, {"sigma", sigma}, {"source", source},
                  {"ks", ks}, {"ks_tol", ac_tol}, {"pass", pass}}, ac_out);
            return pass ? 0 : 2;
        }
        if (*an_drift) {
            CircleMap p = load_map(ad_p);
            Frequency alpha = Frequency::parse(ad_alpha);
            DriftProfile prof = drift_profile(p, alpha, ad_grid, ad_t);
            std::ostringstream os;
            os << "x,u,b_t\n";
            for (size_t i = 0; i < prof.x.size(); ++i)
                os << format_double(prof.x[i]) << ',' << format_double(prof.u[i])
                   << ',' << prof.b_t[i] << '\n';
            if (ad_out.empty()) std::cout << os.str();
            else write_text(ad_out, os.str());
            return 0;
        }
        if (*an_stat) {
            CircleMap p = load_map(as_p);
            Frequency alpha = Frequency::parse(as_alpha);
            StationaryDensity sd = stationary_density(p, alpha, as_grid, as_tol);
            if (!as_csv.empty()) {
                std::ostringstream os;
                os << "x,rho\n";
                for (size_t i = 0; i < sd.x.size(); ++i)
                    os << format_double(sd.x[i]) << ',' << format_double(sd.rho[i]) << '\n';
                write_text(as_csv, os.str());
            }
            emit({{"grid", as_grid}, {"tol", as_tol},
                  {"eqim_residual", sd.eqim_residual},
                  {"flux_defect", sd.flux_defect}}, as_out);
            return 0;
        }
        if (*sc_build) {
            nlohmann::json config = nlohmann::json::object();
            if (sb_N > 0) config["N"] = sb_N;
            if (sb_K > 0) config["K"] = sb_K;
            if (sb_t > 0) config["t"] = sb_t;
            if (sb_n > 0) config["n"] = sb_n;
            if (sb_s > 0) config["s"] = sb_s;
            if (sb_a3 > 0) config["a3"] = sb_a3;
            if (!sb_alpha.empty()) config["alpha"] = sb_alpha;
            ScenarioPreset preset = build_preset(sb_kind, config);
            nlohmann::json plan{{"kind", preset.kind}, {"config", config},
                                {"N", preset.N}, {"env", preset.env.to_json()},
                                {"meta", preset.meta}};
            if (preset.base_env) plan["base_env"] = preset.base_env->to_json();
            if (preset.p_map) plan["p_map"] = preset.p_map->to_json();
            if (preset.plan) plan["perturbation"] = preset.plan->to_json();
            if (preset.witness) {
                const CriterionWitness& w = *preset.witness;
                plan["witness"] = {{"A", w.A}, {"Q", w.Q}, {"u", w.u}, {"v", w.v},
                                   {"wm", w.wm}, {"wp", w.wp}, {"up", w.up},
                                   {"vp", w.vp}, {"wpm", w.wpm}, {"wpp", w.wpp}};
            }
            write_text(sb_out, plan.dump(2) + "\n");
            std::cout << nlohmann::json{{"kind", preset.kind}, {"N", preset.N},
                                        {"out", sb_out}}.dump(2) << "\n";
            return 0;
        }
        if (*sc_run) {
            nlohmann::json config = nlohmann::json::object();
            if (sr_N > 0) config["N"] = sr_N;
            return run_scenario(sr_kind, config, sr_plan, sr_dir, sr_seed, sr_engine);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
