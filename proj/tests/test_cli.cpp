#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

// Exit-code contract: 0 = all verdicts pass, 1 = a verdict fails,
// 2 = usage or ingestion error.

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(CESIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cesim_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("simulate") == 2);                    // missing required options
    CHECK(run("markov --eps 0.01") == 2);           // missing required options
    CHECK(run("check --csv /nonexistent.csv") == 2);
    CHECK(run("proxy --csv /nonexistent.csv") == 2);
    CHECK(run("markov --eps 2.0 --gamma 0.3 --alpha 0.2 --lfull 100") == 2); // bad domain
}

TEST_CASE("markov closed form and monte-carlo agree, exit 0") {
    CHECK(run("markov --eps 0.01 --gamma 0.3 --alpha 0.2 --lfull 100 --trials 200000") == 0);
    CHECK(run("markov --eps 0.005 --gamma 0.3 --alpha 0.2 --lfull 200") == 0);
}

TEST_CASE("simulate then check round-trips with exit 0") {
    TempDir tmp;
    const auto cfg_path = tmp.path / "demo.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "label = demo\nseed = 5\ncycles = 6\npopulation = 200\n"
            << "tau = 0.5\ngenome_length = 12\nalphabet = 3\n";
    }
    const auto out_dir = tmp.path / "out";
    CHECK(run("simulate --config " + cfg_path.string() + " --out " + out_dir.string()) == 0);
    CHECK(fs::exists(out_dir / "cycle_data.csv"));
    CHECK(fs::exists(out_dir / "report.txt"));
    CHECK(fs::exists(out_dir / "fig_concentration.csv"));
    CHECK(run("check --csv " + (out_dir / "cycle_data.csv").string() +
              " --population 200") == 0);

    // --seed overrides the config seed and changes the emitted trajectory
    const auto out2 = tmp.path / "out2";
    CHECK(run("simulate --config " + cfg_path.string() + " --seed 6 --out " +
              out2.string()) == 0);
    std::ifstream a(out_dir / "cycle_data.csv"), b(out2 / "cycle_data.csv");
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa != sb);
}

TEST_CASE("check exits 1 when a verdict fails") {
    TempDir tmp;
    const auto csv = tmp.path / "bad.csv";
    {
        std::ofstream f(csv);
        f << "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions\n";
        // zero admissions at cycle 1 and collapsing concentration
        f << "x,0,1,0.9,0.9,5\n";
        f << "x,1,1,0.05,0.2,0\n";
        f << "x,2,1,0.04,0.2,1\n";
    }
    CHECK(run("check --csv " + csv.string() + " --population 100") == 1);
}

TEST_CASE("ingestion errors exit 2 with line diagnostics") {
    TempDir tmp;
    const auto csv = tmp.path / "mangled.csv";
    {
        std::ofstream f(csv);
        f << "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions\n";
        f << "x,0,1.7,0.9,0.9,5\n"; // out of range
    }
    CHECK(run("check --csv " + csv.string()) == 2);
}

TEST_CASE("novelty subcommand filters a token stream") {
    TempDir tmp;
    const auto toks = tmp.path / "stream.txt";
    {
        std::ofstream f(toks);
        f << "0 1 2 3 0 1 2 3 0 1\n";
        f << "0 1 2 3 0 1 2 3 0 1\n"; // duplicate -> reject
        f << "3 3 3 3 3 3 3 3 3 3\n";
    }
    CHECK(run("novelty --input " + toks.string() + " --tau-nov 0.9 --k 128") == 0);
    CHECK(run("novelty --input /nonexistent --tau-nov 0.9 --k 128") == 2);

    const auto bad = tmp.path / "bad.txt";
    {
        std::ofstream f(bad);
        f << "0 1 two 3\n";
    }
    CHECK(run("novelty --input " + bad.string() + " --tau-nov 0.9 --k 128") == 2);
}

TEST_CASE("proxy subcommand analyses a pairs csv") {
    TempDir tmp;
    const auto csv = tmp.path / "pairs.csv";
    {
        std::ofstream f(csv);
        f << "llm,arch_id,dataset,proxy_acc,full_acc\n";
        for (int i = 0; i < 8; ++i) {
            const double x = 0.1 + 0.1 * i;
            f << "m,a" << i << ",mnist," << x << ',' << x + 0.02 << "\n";
        }
    }
    CHECK(run("proxy --csv " + csv.string()) == 0);
}

TEST_CASE("help exits 0") {
    CHECK(run("--help") == 0);
    CHECK(run("simulate --help") == 0);
}
