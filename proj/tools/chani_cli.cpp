// chani: run, sweep, oracle, verify, fetch-digits
//
// Exit codes: 0 success, 1 configuration or input error, 2 verification failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "chani/experiment.hpp"

#ifndef CHANI_DIGITS_PATH
#define CHANI_DIGITS_PATH ""
#endif

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::string out = "out";
  std::size_t workers = 0;
};

void add_common(CLI::App* sub, Common& c, bool needs_out) {
  sub->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed (overrides run.seed)");
  sub->add_option("--runs", c.runs, "number of runs (overrides run.runs)");
  if (needs_out) sub->add_option("--out", c.out, "output directory");
  sub->add_option("--workers", c.workers, "worker threads (default: CHANI_WORKERS or 1)");
}

chani::ExperimentConfig load(const Common& c) {
  auto cfg = chani::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.runs) cfg.runs = *c.runs;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CHANI spiking network trainer and limit-model oracle"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, oracle_opts, verify_opts;
  auto* run = app.add_subcommand("run", "train and evaluate every run of a config");
  add_common(run, run_opts, true);

  auto* sweep = app.add_subcommand("sweep", "one run set per value of a parameter");
  add_common(sweep, sweep_opts, true);
  std::string axis;
  std::vector<std::string> values;
  sweep->add_option("--axis", axis, "parameter: selected_n, M, N, T, nu or any config key")->required();
  sweep->add_option("--values", values, "values to sweep")->required()->delimiter(',');

  auto* oracle = app.add_subcommand("oracle", "closed-form limit model report (JSON)");
  add_common(oracle, oracle_opts, true);

  auto* verify = app.add_subcommand("verify", "train and compare against the limit model");
  add_common(verify, verify_opts, true);

  auto* fetch = app.add_subcommand("fetch-digits", "write the digits corpus in the plain text format");
  std::string fetch_src = CHANI_DIGITS_PATH, fetch_out = "digits.csv";
  fetch->add_option("--source", fetch_src, "digits.csv(.gz) from a scikit-learn install");
  fetch->add_option("--out", fetch_out, "destination file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = load(run_opts);
      const auto s = chani::cmd_run(cfg, run_opts.out, chani::resolve_workers(run_opts.workers), &std::cerr);
      std::cout << s.summary["final_accuracy"].dump() << '\n';
    } else if (*sweep) {
      const auto cfg = load(sweep_opts);
      chani::cmd_sweep(cfg, axis, values, sweep_opts.out, chani::resolve_workers(sweep_opts.workers), &std::cerr);
      std::cout << "wrote " << (std::filesystem::path(sweep_opts.out) / "sweep.csv").string() << '\n';
    } else if (*oracle) {
      const auto cfg = load(oracle_opts);
      const auto rep = chani::cmd_oracle(cfg);
      std::filesystem::create_directories(oracle_opts.out);
      chani::write_text(std::filesystem::path(oracle_opts.out) / "oracle.json", rep.dump(2) + "\n");
      std::cout << rep.dump(2) << '\n';
    } else if (*verify) {
      const auto cfg = load(verify_opts);
      const auto rep = chani::cmd_verify(cfg, chani::resolve_workers(verify_opts.workers), &std::cerr);
      const auto j = chani::verify_json(rep);
      std::filesystem::create_directories(verify_opts.out);
      chani::write_text(std::filesystem::path(verify_opts.out) / "verify.json", j.dump(2) + "\n");
      for (const auto& c : rep.checks) {
        std::cout << (c.skipped ? "SKIP " : (c.pass ? "PASS " : "FAIL ")) << c.name << ": " << c.detail << '\n';
      }
      return rep.all_pass() ? 0 : 2;
    } else if (*fetch) {
      if (fetch_src.empty()) throw chani::ConfigError("fetch-digits: no --source and no bundled corpus path");
      const auto records = chani::parse_digits(chani::detail::read_maybe_gz(fetch_src));
      std::ofstream f(fetch_out);
      if (!f) throw chani::ConfigError("cannot write " + fetch_out);
      chani::write_digits(f, records);
      std::cout << "wrote " << records.size() << " records to " << fetch_out << '\n';
    }
  } catch (const chani::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const chani::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const chani::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const chani::SelectionEmpty& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
