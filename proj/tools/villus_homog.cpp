// villus-homog <module> --config <path> [--out <dir>]
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "villus/error.hpp"
#include "villus/experiment.hpp"

namespace {

std::string join_modules() {
    std::string s;
    for (const auto& m : villus::module_names()) {
        if (!s.empty()) s += " | ";
        s += m;
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale nutrient transport and absorption in the small intestine"};
    app.set_version_flag("--version", std::string(villus::kToolVersion));
    std::string module;
    std::string config_path;
    std::string out_dir;
    app.add_option("module", module, "Pipeline: " + join_modules())->required();
    app.add_option("--config,-c", config_path, "Experiment configuration file")->required();
    app.add_option("--out,-o", out_dir, "Output directory (overrides VILLUS_HOMOG_OUT and output_dir)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? villus::kExitOk : villus::kExitUsage;
    }

    std::string text;
    {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot read configuration " << config_path << '\n';
            return villus::kExitUsage;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }

    const auto& names = villus::module_names();
    const bool known = std::find(names.begin(), names.end(), module) != names.end();
    auto parsed = villus::parse_config(text, known ? module : std::string());
    std::filesystem::path dir = out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("VILLUS_HOMOG_OUT"); env && *env) dir = env;
    }
    if (dir.empty()) dir = parsed.config ? parsed.config->output_dir : "out";

    if (!parsed.config || !known) {
        std::ostringstream msg;
        if (!known) msg << "unknown module selector '" << module << "' (expected " << join_modules() << ")";
        for (const auto& e : parsed.errors) {
            if (msg.tellp() > 0) msg << '\n';
            msg << config_path << ":" << e.line << ": " << e.message;
        }
        std::cerr << "error: " << msg.str() << '\n';
        try {
            villus::write_error_record(dir, villus::kExitUsage, known ? "config" : "usage", msg.str());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
        }
        return villus::kExitUsage;
    }

    const auto result = villus::run_experiment(*parsed.config, dir);
    if (result.status != villus::kExitOk) {
        std::cerr << "error (" << result.error_kind << "): " << result.error_message << '\n';
    } else {
        for (const auto& f : result.files) std::cout << f.string() << '\n';
    }
    return result.status;
}
