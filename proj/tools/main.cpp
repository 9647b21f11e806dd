#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "fibenv/errors.hpp"
#include "fibenv/json_io.hpp"
#include "fibenv/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fibenv: fibered approximation toolkit batch runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  CLI::App* run = app.add_subcommand("run", "execute one scenario config");
  run->add_option("config", config_path, "scenario config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--tolerance", tolerance, "override the config tolerance");

  std::string suite_dir;
  std::string suite_out = "out";
  CLI::App* suite = app.add_subcommand("suite", "run every config in a directory");
  suite->add_option("dir", suite_dir, "directory of config JSON files")->required();
  suite->add_option("--out", suite_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (seed || tolerance) {
      // Apply overrides by rewriting the in-memory config before dispatch.
      try {
        fibenv::Json config = fibenv::load_json_file(config_path);
        if (seed) config["seed"] = *seed;
        if (tolerance) {
          if (!config.contains("parameters")) {
            config["parameters"] = fibenv::Json::object();
          }
          config["parameters"]["tolerance"] = *tolerance;
        }
        fibenv::ScenarioOutcome out = fibenv::run_scenario(config);
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::string name =
            config.value("output", fibenv::Json::object())
                .value("report",
                       config.at("scenario").get<std::string>() + "_report.json");
        fibenv::write_text_file((fs::path(out_dir) / name).string(),
                                out.report.dump(2) + "\n");
        for (const auto& [fname, content] : out.extra_files) {
          fibenv::write_text_file((fs::path(out_dir) / fname).string(), content);
        }
        return out.exit_code;
      } catch (const fibenv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
      } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
      }
    }
    return fibenv::run_config(config_path, out_dir);
  }
  return fibenv::run_suite(suite_dir, suite_out);
}
