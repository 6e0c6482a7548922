#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sagin/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string scheme;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment configuration file (JSON)");
  cmd->add_option("--out", opts.out_dir, "Output directory for artifacts");
  cmd->add_option("--scheme", opts.scheme, "Scheme to run: zf|ddpg|both");
  cmd->add_option("--seed", opts.seed, "Override the experiment seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_flag("--svg", opts.svg, "Also render static SVG plots");
}

sagin::ExperimentConfig make_config(const CommonOpts& opts) {
  sagin::ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = sagin::load_config(opts.config_path);
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    cfg.agent.seed = opts.seed;
  }
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (!opts.scheme.empty()) cfg.scheme = sagin::scheme_from_string(opts.scheme);
  if (opts.svg) cfg.emit_svg = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"saginsim: RIS-aided HAPS downlink link-level simulator "
               "(zero-forcing baseline + DDPG beamforming agent)"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "Train/solve one scenario and emit artifacts");
  add_common(run_cmd, run_opts);

  CommonOpts sweep_opts;
  std::vector<int> counts;
  std::vector<std::string> distributions;
  int sweep_seeds = 0;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep-users", "Sum rate versus user count per distribution");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--counts", counts, "User counts to sweep")->delimiter(',');
  sweep_cmd->add_option("--distributions", distributions,
                        "Distributions to sweep: poisson, normal, uniform")
      ->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_seeds, "Evaluation draws per cell");

  CommonOpts cmp_opts;
  std::vector<int> ris_sides{4, 6};
  std::vector<double> alphas{1.0, 2.0};
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "DDPG vs ZF throughput table over RIS sizes and alphas");
  add_common(cmp_cmd, cmp_opts);
  cmp_cmd->add_option("--ris-sides", ris_sides, "RIS side lengths")->delimiter(',');
  cmp_cmd->add_option("--alphas", alphas, "Fairness exponents")->delimiter(',');

  int grad_instances = 50;
  std::uint64_t grad_seed = 42;
  CLI::App* grad_cmd =
      app.add_subcommand("gradcheck", "Finite-difference check of the network gradients");
  grad_cmd->add_option("--instances", grad_instances, "Random network instantiations");
  grad_cmd->add_option("--seed", grad_seed, "Seed for the random instantiations");

  CLI::App* self_cmd = app.add_subcommand("selftest", "ZF and RIS closed-form oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      const auto cfg = make_config(run_opts);
      const auto summary = sagin::run(cfg);
      if (summary.zf)
        std::cout << "zf:   mean sum rate " << sagin::format_double(summary.zf->mean_sum_rate_bps)
                  << " bps over " << cfg.eval_episodes << " draws\n";
      if (summary.ddpg)
        std::cout << "ddpg: mean sum rate "
                  << sagin::format_double(summary.ddpg->mean_sum_rate_bps) << " bps over "
                  << cfg.eval_episodes << " draws\n";
      std::cout << "artifacts written to " << cfg.out_dir << "\n";
      return kExitOk;
    }
    if (sweep_cmd->parsed()) {
      auto cfg = make_config(sweep_opts);
      sagin::SweepSpec spec = cfg.sweep.value_or(sagin::SweepSpec{});
      if (!counts.empty()) spec.user_counts = counts;
      if (!distributions.empty()) {
        spec.distributions.clear();
        for (const auto& d : distributions)
          spec.distributions.push_back(sagin::user_distribution_from_string(d));
      }
      if (sweep_seeds > 0) spec.seeds = sweep_seeds;
      cfg.sweep = spec;
      const auto cells = sagin::sweep_users(cfg);
      std::cout << "wrote " << cells.size() << " sweep cells to " << cfg.out_dir
                << "/fig4_data.csv\n";
      return kExitOk;
    }
    if (cmp_cmd->parsed()) {
      const auto cfg = make_config(cmp_opts);
      const auto cells = sagin::compare_throughput(cfg, ris_sides, alphas);
      for (const auto& c : cells)
        std::cout << c.scheme << " " << c.ris_side << "x" << c.ris_side << " alpha="
                  << sagin::format_double(c.alpha) << ": "
                  << sagin::format_double(c.throughput_bps) << " bps ("
                  << sagin::format_double(c.improvement_pct_vs_zf) << "% vs zf)\n";
      std::cout << "table written to " << cfg.out_dir << "/table2_replica.csv\n";
      return kExitOk;
    }
    if (grad_cmd->parsed()) {
      const auto report = sagin::neural::gradient_check(grad_instances, grad_seed);
      std::cout << "checked " << report.parameters_checked << " parameters across "
                << grad_instances << " networks; max relative error "
                << sagin::format_double(report.max_rel_error) << "\n";
      if (report.max_rel_error > 1.0e-4) {
        std::cerr << "gradcheck FAILED (tolerance 1e-4)\n";
        return kExitNumerical;
      }
      std::cout << "gradcheck passed (tolerance 1e-4)\n";
      return kExitOk;
    }
    if (self_cmd->parsed()) {
      return sagin::run_selftest(std::cout) ? kExitOk : kExitNumerical;
    }
  } catch (const sagin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sagin::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
