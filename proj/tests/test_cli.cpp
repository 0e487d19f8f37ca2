// End-to-end checks of the command-line driver: determinism of payloads,
// cache behavior, strict config handling, exit codes.
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

std::string cli_path() {
    const char* env = std::getenv("HOMOLAB_CLI");
    return env ? env : "build/tools/homolab";
}

int run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string payload_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    std::string line;
    bool in_provenance = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;  // CSV provenance comments
        if (line.find("\"provenance\"") != std::string::npos) {
            in_provenance = true;
            continue;
        }
        if (in_provenance) {
            if (line.find("},") != std::string::npos || line.find('}') == line.find_first_not_of(' '))
                in_provenance = false;
            continue;
        }
        out << line << "\n";
    }
    return out.str();
}

struct TempDir {
    std::string path;
    explicit TempDir(const std::string& p) : path(p) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_spec(const std::string& path) {
    std::ofstream out(path);
    out << "dim 2\nlambda 4\nlaw checkerboard\nvalues 1 4\nprobs 0.5 0.5\n"
        << "grid_k 2\nlevel 2\nsamples 4\nseed 11\n";
}

}  // namespace

TEST_CASE("cli reruns produce bit-identical numeric payloads") {
    TempDir dir("/tmp/homolab_cli_det");
    write_spec(dir.path + "/spec.cfg");
    std::string base = "--spec " + dir.path + "/spec.cfg --out " + dir.path + "/run";
    REQUIRE(run("energies " + base) == 0);
    std::string first = payload_lines(dir.path + "/run/energies.csv");
    std::string first_json = payload_lines(dir.path + "/run/energies.json");
    REQUIRE(run("energies " + base) == 0);
    CHECK(payload_lines(dir.path + "/run/energies.csv") == first);
    CHECK(payload_lines(dir.path + "/run/energies.json") == first_json);
}

TEST_CASE("outputs are independent of the thread count") {
    TempDir dir("/tmp/homolab_cli_threads");
    write_spec(dir.path + "/spec.cfg");
    std::string base = "--spec " + dir.path + "/spec.cfg --out " + dir.path + "/run";
    std::string one = "HOMOLAB_THREADS=1 " + cli_path() + " energies " + base + " > /dev/null 2>&1";
    std::string two = "HOMOLAB_THREADS=2 " + cli_path() + " energies " + base + " > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(one.c_str())) == 0);
    std::string serial = payload_lines(dir.path + "/run/energies.csv");
    REQUIRE(WEXITSTATUS(std::system(two.c_str())) == 0);
    CHECK(payload_lines(dir.path + "/run/energies.csv") == serial);
}

TEST_CASE("cache hit reproduces the computed estimate") {
    TempDir dir("/tmp/homolab_cli_cache");
    write_spec(dir.path + "/spec.cfg");
    std::string base = "--spec " + dir.path + "/spec.cfg --out " + dir.path + "/run";
    REQUIRE(run("estimate-ahom " + base) == 0);
    std::string first = payload_lines(dir.path + "/run/estimate_ahom.json");
    REQUIRE(run("estimate-ahom " + base) == 0);  // cache hit path
    CHECK(payload_lines(dir.path + "/run/estimate_ahom.json") == first);
    // a cold recomputation is byte-identical to the cached result
    std::filesystem::remove_all(dir.path + "/run/cache");
    REQUIRE(run("estimate-ahom " + base) == 0);
    CHECK(payload_lines(dir.path + "/run/estimate_ahom.json") == first);
}

TEST_CASE("two-scale without a cached matrix instructs the user") {
    TempDir dir("/tmp/homolab_cli_nocache");
    write_spec(dir.path + "/spec.cfg");
    int rc = run("two-scale --spec " + dir.path + "/spec.cfg --out " + dir.path +
                 "/run --eps 1/3,1/9");
    CHECK(rc == 2);  // infrastructure error, not an assertion failure
}

TEST_CASE("invalid configs exit with the infrastructure code") {
    TempDir dir("/tmp/homolab_cli_bad");
    {
        std::ofstream out(dir.path + "/bad.cfg");
        out << "dim 2\nlambda 4\nlaw checkerboard\nvalues 1 4\nprobs 0.5 0.5\nmystery 1\n";
    }
    CHECK(run("energies --spec " + dir.path + "/bad.cfg --out " + dir.path + "/run") == 2);
}

TEST_CASE("report collates one row per cached experiment") {
    TempDir dir("/tmp/homolab_cli_report");
    write_spec(dir.path + "/spec.cfg");
    std::string base = "--spec " + dir.path + "/spec.cfg --out " + dir.path + "/run";
    REQUIRE(run("estimate-ahom " + base) == 0);
    REQUIRE(run("estimate-ahom " + base + " --level 1") == 0);
    REQUIRE(run("report " + base) == 0);
    std::ifstream in(dir.path + "/run/report.csv");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    // header + one row per cache file (two keyed estimates + latest pointer)
    int cache_files = 0;
    for (const auto& e :
         std::filesystem::directory_iterator(dir.path + "/run/cache"))
        if (e.path().extension() == ".json") ++cache_files;
    CHECK(rows == cache_files + 1);
}
