#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(BETAMM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path workdir() {
    const auto p = fs::temp_directory_path() / "betamm_test_cli";
    fs::create_directories(p);
    return p;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const auto p = workdir() / name;
    std::ofstream(p) << body;
    return p;
}

const char* kConfig = R"(
seed: 9
episodes: {count: 2, length: 300}
data:
  synthetic:
    - {name: A, seed: 1, session_length: 1200}
policy: {family: fixed, alpha: 1, beta: [1, 2]}
)";

}  // namespace

TEST_CASE("usage errors exit with 1") {
    REQUIRE(run("") == 1);
    REQUIRE(run("frobnicate") == 1);
    REQUIRE(run("sweep") == 1);
    REQUIRE(run("sweep --config /nonexistent.yaml") == 1);
    REQUIRE(run("--help") == 0);
    const auto bad = write_config("bad.yaml", "data: {synthetic: [{name: A}]}\npolicy: {family: fixed, alpah: 2}\n");
    REQUIRE(run("sweep --config " + bad.string()) == 1);
    const auto neg = write_config("neg.yaml", "data: {synthetic: [{name: A}]}\npolicy: {family: fixed, alpha: -2}\n");
    REQUIRE(run("sweep --config " + neg.string()) == 1);
}

TEST_CASE("sweep writes deterministic tables") {
    const auto cfg = write_config("ok.yaml", kConfig);
    const auto out1 = workdir() / "out1", out2 = workdir() / "out2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + out1.string()) == 0);
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + out2.string() + " --jobs 2") == 0);
    for (const char* f : {"summary.csv", "episodes_000.csv", "episodes_001.csv"}) {
        REQUIRE(fs::exists(out1 / f));
        REQUIRE(slurp(out1 / f) == slurp(out2 / f));
    }
    const auto out3 = workdir() / "out3";
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + out3.string() + " --seed 10") == 0);
    REQUIRE(slurp(out1 / "episodes_000.csv") != slurp(out3 / "episodes_000.csv"));
}

TEST_CASE("partial failures exit with 3") {
    const auto cfg = write_config("partial.yaml", R"(
episodes: {count: 2, length: 300}
data:
  synthetic:
    - {name: A, seed: 1, session_length: 1200}
    - {name: SHORT, seed: 2, session_length: 100}
policy: {family: ladder}
)");
    REQUIRE(run("sweep --config " + cfg.string() + " --out " + (workdir() / "partial").string()) == 3);
    REQUIRE(fs::exists(workdir() / "partial" / "summary.csv"));
}

TEST_CASE("trace writes step and fill files") {
    const auto cfg = write_config("trace.yaml", kConfig);
    const auto out = workdir() / "trace";
    fs::remove_all(out);
    REQUIRE(run("trace --config " + cfg.string() + " --out " + out.string() + " --grid-index 1 --episode 1") == 0);
    REQUIRE(fs::exists(out / "steps.csv"));
    REQUIRE(fs::exists(out / "fills.csv"));
    REQUIRE(run("trace --config " + cfg.string() + " --out " + out.string() + " --grid-index 5") == 1);
    REQUIRE(run("trace --config " + cfg.string() + " --out " + out.string() + " --group nope") == 1);
}

TEST_CASE("gen-data output validates, corruption is a data error") {
    const auto dir = workdir() / "data";
    fs::remove_all(dir);
    REQUIRE(run("gen-data --out " + dir.string() + " --name Z --seed 4 --max-messages 3000 --levels 10") == 0);
    const auto msgs = dir / "Z_message_10.csv", book = dir / "Z_orderbook_10.csv";
    REQUIRE(fs::exists(msgs));
    REQUIRE(run("validate-data --messages " + msgs.string() + " --orderbook " + book.string() + " --levels 10") == 0);
    REQUIRE(run("validate-data --messages " + msgs.string() + " --orderbook " + book.string() +
                " --levels 10 --compare-levels 3") == 0);

    std::string text = slurp(msgs);
    text.insert(text.find('\n', text.size() / 2) + 1, "garbage,row\n");
    std::ofstream(dir / "broken.csv") << text;
    REQUIRE(run("validate-data --messages " + (dir / "broken.csv").string() + " --orderbook " + book.string() +
                " --levels 10") == 2);

    const auto cfg_data = write_config("gen.yaml", kConfig);
    REQUIRE(run("gen-data --config " + cfg_data.string() + " --out " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "A_message_50.csv"));
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"ladder_sweep.yaml", "fixed_grid.yaml", "inventory.yaml"}) {
        const auto path = fs::path(BETAMM_CONFIG_DIR) / name;
        REQUIRE(fs::exists(path));
        // one short episode each keeps this quick
        REQUIRE(run("sweep --config " + path.string() + " --episodes 1 --length 60 --out " +
                    (workdir() / "shipped").string()) == 0);
    }
}
