// darl <experiment> [--config file] [--seed u64] [--out path] [--format csv|json] [--jobs n]
//
// Exit codes: 0 all assertions pass, 1 a statistical assertion failed,
// 2 configuration or I/O error.

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "darl/xprun/config.hpp"
#include "darl/xprun/experiments.hpp"
#include "darl/xprun/report.hpp"

namespace xp = darl::xprun;

namespace {

struct Options {
  std::string config;
  std::string seed;
  std::string out = "-";
  std::string format = "csv";
  std::size_t jobs = 0;
};

int runCommand(xp::ExperimentKind kind, const Options& opt) {
  auto cfg = opt.config.empty() ? xp::defaultConfig(kind) : xp::loadConfig(opt.config);
  if (cfg.kind != kind) {
    throw xp::ConfigError("config names experiment '" + xp::kindName(cfg.kind) + "' but subcommand is '" +
                          xp::kindName(kind) + "'");
  }
  if (!opt.seed.empty()) {
    cfg.masterSeed = xp::detail::parseSeed(opt.seed);
  } else if (auto s = xp::seedFromEnv()) {
    cfg.masterSeed = *s;
  }
  std::size_t jobs = opt.jobs;
  if (jobs == 0) jobs = xp::jobsFromEnv().value_or(std::max(1u, std::thread::hardware_concurrency()));
  const auto format = xp::parseFormat(opt.format);

  const auto start = std::chrono::steady_clock::now();
  auto report = xp::run(cfg, jobs);
  report.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (opt.out == "-") {
    std::cout << xp::render(report, format);
    std::cout.flush();
  } else {
    xp::emitReport(report, format, opt.out);
  }
  for (const auto& a : report.assertions) {
    std::cerr << (a.passed ? "PASS " : "FAIL ") << a.name << "  " << a.detail << "\n";
  }
  std::cerr << report.experiment << ": " << report.rows.size() << " rows in " << report.wallSeconds << " s, "
            << (report.passed() ? "all assertions passed" : "assertion failure") << "\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional adversarial loss experiments"};
  app.require_subcommand(1);
  Options opt;
  for (const auto& [kind, name] : xp::kindNames()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " suite");
    sub->add_option("--config", opt.config, "YAML experiment config (default: built-in)");
    sub->add_option("--seed", opt.seed, "master seed (overrides DARL_SEED and the config)");
    sub->add_option("--out", opt.out, "report path, '-' for stdout");
    sub->add_option("--format", opt.format, "csv or json");
    sub->add_option("--jobs", opt.jobs, "worker threads (overrides DARL_JOBS)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const auto kind = xp::parseKind(app.get_subcommands().front()->get_name());
  try {
    return runCommand(kind, opt);
  } catch (const xp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
