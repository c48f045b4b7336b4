// Experiment runner: one config (--config) or a whole profile (--profile).
// Exit status: 0 all assertions pass, 1 an assertion failed, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wellposed/experiments.hpp"

namespace fs = std::filesystem;
namespace ex = wellposed::experiments;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

unsigned thread_count() {
  if (const char* v = std::getenv("WELLPOSED_THREADS")) {
    try {
      const int n = std::stoi(v);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    throw wellposed::UsageError("WELLPOSED_THREADS must be a positive integer");
  }
  return 1;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_run(const fs::path& dir, const ex::RunReport& rep) {
  const std::string& kind = rep.config.kind;
  write_file(dir / (kind + ".json"), rep.to_json().dump(2) + "\n");
  for (const auto& [name, content] : rep.csv) write_file(dir / (kind + "_" + name), content);
}

void print_run(const ex::RunReport& rep) {
  std::cout << (rep.passed() ? "PASS " : "FAIL ") << rep.config.kind << " (" << rep.wall_time << " s)\n";
  for (const auto& a : rep.assertions)
    std::cout << "  " << (a.passed ? "ok   " : "FAIL ") << a.name << ": " << wellposed::io::format_double(a.measured)
              << ' ' << a.relation << ' ' << wellposed::io::format_double(a.tolerance) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Well-posed linear systems experiment runner"};
  std::string config_path, out_dir = ".", profile;
  std::optional<std::uint64_t> seed;
  bool list = false;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out_dir, "Output directory for JSON reports and CSV traces");
  app.add_option("--profile", profile, "quick | full; runs every kind unless --config is given");
  app.add_option("--seed", seed, "Seed, overrides the config");
  app.add_flag("--list", list, "List experiment kinds");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), kExitUsage);
  }

  try {
    if (list) {
      for (const auto& k : ex::kinds()) std::cout << k.name << "\n";
      return 0;
    }
    if (config_path.empty() && profile.empty()) throw wellposed::UsageError("give --config <path> or --profile quick|full");

    // Everything is validated before any output is written.
    std::optional<ex::ExperimentConfig> config;
    if (!config_path.empty()) {
      config = ex::config_from_json(wellposed::io::read_json_file(config_path));
      if (seed) config->seed = *seed;
      if (!profile.empty()) config->profile = ex::parse_profile(profile);
    }
    const ex::Profile suite_profile = profile.empty() ? ex::Profile::full : ex::parse_profile(profile);
    const unsigned threads = thread_count();

    if (config) {
      const ex::RunReport rep = ex::run(*config);
      fs::create_directories(out_dir);
      write_run(out_dir, rep);
      print_run(rep);
      return rep.passed() ? 0 : kExitFailed;
    }

    const ex::SuiteReport suite = ex::suite(suite_profile, seed.value_or(1), threads);
    fs::create_directories(out_dir);
    for (const auto& rep : suite.runs) {
      write_run(out_dir, rep);
      print_run(rep);
    }
    write_file(fs::path(out_dir) / "suite.json", suite.to_json().dump(2) + "\n");
    std::cout << (suite.passed() ? "PASS" : "FAIL") << " suite " << ex::profile_name(suite_profile) << " ("
              << suite.wall_time << " s)\n";
    return suite.passed() ? 0 : kExitFailed;
  } catch (const wellposed::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}
