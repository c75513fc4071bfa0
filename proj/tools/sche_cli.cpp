// Command-line front end: sche <command> [--config F] [--seed S] [--out DIR]
// [--threads N] [--deterministic] [--svg].

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <string>

#include "sche/sche.hpp"

namespace {

int fail(const std::string& command, const std::string& kind, const std::string& message) {
  nlohmann::json line = {{"status", "error"}, {"command", command}, {"kind", kind}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return kind == "config" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Tamed exponential Euler solver for the stochastic Cahn-Hilliard equation"};
  cli.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = sche::default_threads();
  bool deterministic = false, svg = false;

  const char* names[] = {"simulate", "converge-time", "converge-space", "ergodic", "verify"};
  const char* blurbs[] = {"run one trajectory and write snapshots plus a checkpoint",
                          "temporal strong-error study", "spatial strong-error study",
                          "time-average estimates of ergodic limits", "run the invariant suite"};
  for (int k = 0; k < 5; ++k) {
    auto* sub = cli.add_subcommand(names[k], blurbs[k]);
    sub->add_option("--config", config_path, "config file, or any output CSV to re-run from its header")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides config and environment)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--deterministic", deterministic, "write run-to-run identical files (no timings)");
    sub->add_flag("--svg", svg, "also write SVG line charts");
  }
  CLI11_PARSE(cli, argc, argv);

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    std::string text;
    if (!config_path.empty()) {
      text = sche::read_file(config_path);
      if (sche::is_output_file(text)) text = sche::config_text_from_header(text);
    }
    auto overrides = sche::env_overrides();
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (deterministic) overrides["deterministic"] = "true";
    const sche::RunConfig cfg = sche::parse_config(text, sche::command_from_string(command), overrides);

    sche::AppOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    opts.svg = svg;
    const auto outcome = sche::run(cfg, opts);
    for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << '\n';
    return outcome.exit_code;
  } catch (const sche::ConfigError& e) {
    std::string joined;
    for (const auto& m : e.errors()) joined += (joined.empty() ? "" : "; ") + m;
    return fail(command, "config", joined);
  } catch (const sche::CheckpointError& e) {
    return fail(command, "checkpoint", e.what());
  } catch (const std::exception& e) {
    return fail(command, "runtime", e.what());
  }
}
