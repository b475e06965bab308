#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "villus/experiment.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("villus_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string("\"") + VILLUS_HOMOG_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const auto path = dir / "run.cfg";
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("geometry on a plain cylinder") {
    const auto dir = scratch("geometry");
    const auto cfg = write_config(dir, "[experiment]\nmodule = geometry\n[profile]\nfamily = flat\nradius = 1\n");
    CHECK(run_tool("geometry --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
    const auto csv = slurp(dir / "out" / "measures.csv");
    CHECK(csv.find("volume,3.14159265358979") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("unknown module exits with a usage status and an error record") {
    const auto dir = scratch("unknown");
    const auto cfg = write_config(dir, "[profile]\nfamily = flat\n");
    CHECK(run_tool("nonsense --config " + cfg.string() + " --out " + (dir / "out").string()) == 2);
    CHECK(fs::exists(dir / "out" / "error.json"));
}

TEST_CASE("invalid config exits with a usage status") {
    const auto dir = scratch("invalid");
    const auto cfg = write_config(dir, "[pulse]\nwave_speed = 1\ninitial_speed = 2\n");
    CHECK(run_tool("ode-sim --config " + cfg.string() + " --out " + (dir / "out").string()) == 2);
    CHECK(slurp(dir / "out" / "error.json").find("initial bolus speed") != std::string::npos);
    CHECK(run_tool("ode-sim --config " + (dir / "missing.cfg").string()) == 2);
    CHECK(run_tool("ode-sim") == 2);
}

TEST_CASE("identical configs give byte-identical outputs") {
    const auto dir = scratch("determinism");
    const auto cfg = write_config(dir,
                                  "[experiment]\nmodule = macro-solve\n[profile]\nfamily = cosine\namplitude = 0.1\n"
                                  "[velocity]\nfamily = plug\n[absorption]\n[grids]\naxial_length = 2\n"
                                  "axial_cells = 200\nhorizon = 1\nsnapshot_times = 0.5, 1\n[inflow]\nfamily = meal\n");
    REQUIRE(run_tool("macro-solve --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_tool("macro-solve --config " + cfg.string() + " --out " + (dir / "b").string()) == 0);
    for (const char* f : {"macro.csv", "budget.csv", "u_final.dat", "v_final.dat"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK_FALSE(slurp(dir / "a" / f).empty());
    }
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    const auto cfg = write_config(dir, "[profile]\nfamily = flat\n");
    const std::string env = "VILLUS_HOMOG_OUT=\"" + (dir / "env_out").string() + "\" ";
    const std::string cmd = env + "\"" + VILLUS_HOMOG_PATH + "\" geometry --config " + cfg.string() + " > /dev/null";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "env_out" / "measures.csv"));
}

TEST_CASE("run_experiment reports numeric failures without throwing") {
    const auto dir = scratch("library");
    villus::ExperimentConfig c;
    c.module = "cell-solve";
    c.profile = "lobed";
    c.lobes = 3;
    c.modulation = 0.2;
    const auto r = villus::run_experiment(c, dir);
    CHECK(r.status == villus::kExitUsage);
    CHECK(r.error_kind == "unsupported-geometry");
    CHECK(fs::exists(dir / "error.json"));
}

TEST_CASE("shipped configs are valid") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(VILLUS_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        ++seen;
        const auto r = villus::parse_config(slurp(entry.path()));
        INFO(entry.path().string());
        CHECK(r.config.has_value());
    }
    CHECK(seen >= 4);
}
