#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("QPWALK_BIN");
    REQUIRE(b != nullptr);
    return b;
}

fs::path workdir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("qpwalk_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd = env_prefix + bin() + " " + args + " > " +
                      (workdir() / "stdout.txt").string() + " 2> " +
                      (workdir() / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

nlohmann::json stdout_json() {
    return nlohmann::json::parse(slurp(workdir() / "stdout.txt"));
}

} // namespace

TEST_CASE("env build / inspect round trip") {
    fs::path envp = workdir() / "trap.json";
    CHECK(run("env build --preset localization --K 0 --out " + envp.string()) == 0);
    CHECK(stdout_json()["kappa"].get<double>() == doctest::Approx(1.0 / 3.0));

    CHECK(run("env inspect --env " + envp.string() + " --window -4:4") == 0);
    std::string csv = slurp(workdir() / "stdout.txt");
    CHECK(csv.rfind("j,p,sigma,M,log_abs_M", 0) == 0);
    CHECK(csv.find("\n0,0.5,") != std::string::npos);

    CHECK(run("env build --kind periodic --values 0.7,0.45 --out " +
              (workdir() / "p2.json").string()) == 0);
}

TEST_CASE("criteria check exit codes") {
    fs::path envp = workdir() / "c1trap.json";
    CHECK(run("env build --kind procedural --values 0.6666666666666666 --lo 0 "
              "--left 0.6666666666666666 --right 0.3333333333333333 --out " +
              envp.string()) == 0);
    CHECK(run("criteria check --kind c1 --env " + envp.string() + " --N 100") == 0);
    CHECK(stdout_json()["holds"].get<bool>());

    fs::path fair = workdir() / "fair.json";
    CHECK(run("env build --kind periodic --values 0.5 --out " + fair.string()) == 0);
    CHECK(run("criteria check --kind c1 --env " + fair.string() + " --N 100") == 2);

    CHECK(run("criteria check --kind bogus --env " + fair.string() + " --N 4") == 1);
}

TEST_CASE("walk exact / exit / simulate") {
    fs::path fair = workdir() / "fair2.json";
    REQUIRE(run("env build --kind periodic --values 0.5 --out " + fair.string()) == 0);

    CHECK(run("walk exact --env " + fair.string() + " --T 2 --out " +
              (workdir() / "mass.csv").string()) == 0);
    std::string csv = slurp(workdir() / "mass.csv");
    CHECK(csv.find("site,mass") == 0);
    CHECK(csv.find("-2,0.25") != std::string::npos);
    CHECK(csv.find("0,0.5") != std::string::npos);

    CHECK(run("walk exit --env " + fair.string() + " --a -10 --b 10 --start 0") == 0);
    nlohmann::json ex = stdout_json();
    CHECK(ex["p_exit_right"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ex["m1"].get<double>() == doctest::Approx(100.0).epsilon(1e-10));

    CHECK(run("walk simulate --env " + fair.string() +
              " --T 100 --traj 1000 --seed 3 --out " +
              (workdir() / "traj.csv").string()) == 0);
    std::string tcsv = slurp(workdir() / "traj.csv");
    CHECK(tcsv.find("traj_id,endpoint") == 0);

    CHECK(run("walk simulate --env " + fair.string() +
              " --T 50 --traj 20 --seed 3 --record full-path-sample --out " +
              (workdir() / "paths.csv").string()) == 0);
    CHECK(slurp(workdir() / "paths.csv").find("traj_id,t,site") == 0);
}

TEST_CASE("potential traps CSV") {
    fs::path envp = workdir() / "trap2.json";
    REQUIRE(run("env build --preset localization --K 0 --out " + envp.string()) == 0);
    CHECK(run("potential traps --env " + envp.string() +
              " --window -100:100 --threshold 10") == 0);
    std::string csv = slurp(workdir() / "stdout.txt");
    CHECK(csv.find("left,bottom,right,depth") == 0);
    CHECK(csv.find("-100,0,100,") != std::string::npos);
}

TEST_CASE("simulate CSV is byte-identical across worker counts") {
    fs::path envp = workdir() / "sim_env.json";
    REQUIRE(run("env build --kind periodic --values 0.7,0.45 --out " +
                envp.string()) == 0);
    std::vector<std::string> outs;
    for (const char* th : {"1", "3", "8"}) {
        fs::path out = workdir() / (std::string("sim_") + th + ".csv");
        REQUIRE(run("walk simulate --env " + envp.string() +
                    " --T 500 --traj 20000 --seed 11 --out " + out.string(),
                    std::string("QPWALK_THREADS=") + th + " ") == 0);
        outs.push_back(slurp(out));
    }
    CHECK(outs[0] == outs[1]);
    CHECK(outs[1] == outs[2]);
    CHECK(!outs[0].empty());
}

TEST_CASE("analyze clt and moments") {
    fs::path envp = workdir() / "p2b.json";
    REQUIRE(run("env build --kind periodic --values 0.7,0.45 --out " +
                envp.string()) == 0);
    CHECK(run("analyze clt --env " + envp.string() + " --T 2000") == 0);
    nlohmann::json v = stdout_json();
    CHECK(v["source"] == "renewal");
    CHECK(v["ks"].get<double>() < 0.05);

    CHECK(run("analyze moments --env " + envp.string() + " --T 500") == 0);
    CHECK(stdout_json()["variance"].get<double>() > 0.0);
}

TEST_CASE("analyze drift-profile and stationary") {
    // p map file: 2/3 + 0.05 cos(2 pi x)
    fs::path pmap = workdir() / "pmap.json";
    {
        std::ofstream f(pmap);
        f << R"({"kind":"trig","coeffs":[0.6666666666666666,0.05,0.0]})";
    }
    CHECK(run("analyze drift-profile --p " + pmap.string() +
              " --alpha golden --t 1000 --grid 16") == 0);
    std::string csv = slurp(workdir() / "stdout.txt");
    CHECK(csv.find("x,u,b_t") == 0);

    CHECK(run("analyze stationary --p " + pmap.string() +
              " --alpha golden --grid 64") == 0);
    CHECK(stdout_json()["eqim_residual"].get<double>() < 1e-8);
}

TEST_CASE("scenario build emits a plan consumable as an env") {
    fs::path plan = workdir() / "plan.json";
    CHECK(run("scenario build --kind two-sided --N 500 --s 2 --out " +
              plan.string()) == 0);
    nlohmann::json pj = nlohmann::json::parse(slurp(plan));
    CHECK(pj["kind"] == "two-sided");
    CHECK(pj.contains("env"));
    CHECK(pj.contains("witness"));

    // every env-consuming command accepts the plan file directly
    CHECK(run("potential table --env " + plan.string() + " --window -8:8") == 0);
}

TEST_CASE("scenario run localization writes verdict and manifest") {
    fs::path dir = workdir() / "run1";
    fs::create_directories(dir);
    CHECK(run("scenario run --kind localization --engine mc --seed 5 --out-dir " +
              dir.string()) == 0);
    nlohmann::json verdict = nlohmann::json::parse(slurp(dir / "verdict.json"));
    CHECK(verdict["pass"].get<bool>());
    nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["outputs"].size() >= 3);

    // rerun reproduces each recorded output hash
    fs::path dir2 = workdir() / "run2";
    fs::create_directories(dir2);
    CHECK(run("scenario run --kind localization --engine mc --seed 5 --out-dir " +
              dir2.string()) == 0);
    nlohmann::json manifest2 = nlohmann::json::parse(slurp(dir2 / "manifest.json"));
    REQUIRE(manifest["outputs"].size() == manifest2["outputs"].size());
    for (size_t i = 0; i < manifest["outputs"].size(); ++i)
        CHECK(manifest["outputs"][i]["hash"] == manifest2["outputs"][i]["hash"]);
}
