#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sagin/ddpg.hpp"
#include "sagin/metrics.hpp"

namespace sagin {

/// Configuration problems (bad value, unknown key, unreadable file). The CLI
/// maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme { kZf, kDdpg, kBoth };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SweepSpec {
  std::vector<int> user_counts{1, 2, 3, 4};
  std::vector<UserDistribution> distributions{
      UserDistribution::kPoisson, UserDistribution::kNormal, UserDistribution::kUniform};
  int seeds = 3;  // evaluation draws averaged per cell
};

struct ExperimentConfig {
  GeometryConfig geometry;
  NoiseModel noise;
  UserDistSpec users{UserDistribution::kPoisson, 150.0, 2};
  AgentConfig agent;
  Scheme scheme = Scheme::kBoth;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  int eval_episodes = 10;
  bool emit_svg = false;
  std::optional<SweepSpec> sweep;
};

/// Strict parse: unknown keys are rejected naming the offending key, units
/// live in the key names (p_t_dbm, bandwidth_hz, ...), and everything left
/// at its default is echoed back into the resolved snapshot.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string resolved_config_json(const ExperimentConfig& cfg);

/// Deterministic shortest round-trip formatting used in every CSV artifact.
std::string format_double(double v);

struct EvalSummary {
  double mean_reward = 0.0;
  double mean_sum_rate_bps = 0.0;
  std::vector<double> episode_sum_rate_bps;
  std::vector<RateReport> episode_rates;
  SinrReport first_episode_sinr;
  double first_episode_power_w = 0.0;
};

/// Deterministic-policy evaluation over eval-stream layout draws.
EvalSummary evaluate_policy(const ExperimentConfig& cfg, const neural::MlpParams& actor,
                            int episodes);

/// Minimum-power ZF evaluation over the same eval-stream layout draws.
/// Throws InfeasibleError when the ZF solution needs more than the budget.
EvalSummary evaluate_zf(const ExperimentConfig& cfg, int episodes);

struct RunSummary {
  std::optional<EvalSummary> zf;
  std::optional<EvalSummary> ddpg;
  std::optional<TrainResult> training;
};

/// The `run` protocol: build the scenario, solve ZF and/or train the agent,
/// and write training_log.csv, reward_curve.csv, sinr_report.csv, rates.csv,
/// channels.json, checkpoints and the resolved-config snapshot into out_dir.
RunSummary run(const ExperimentConfig& cfg);

struct SweepCell {
  UserDistribution distribution;
  int n_users = 0;
  std::string scheme;
  double mean_sum_rate_bps = 0.0;
  double std_sum_rate_bps = 0.0;
};

/// Sum rate versus user count for each distribution; emits fig4_data.csv.
std::vector<SweepCell> sweep_users(const ExperimentConfig& cfg);

struct CompareCell {
  std::string scheme;
  int ris_side = 0;
  double alpha = 0.0;
  double throughput_bps = 0.0;
  double improvement_pct_vs_zf = 0.0;
  double mean_sum_rate_bps = 0.0;  // plain sum rate of the underlying evaluation
};

/// Throughput-table protocol over RIS sizes and fairness exponents; emits
/// table2_replica.csv.
std::vector<CompareCell> compare_throughput(const ExperimentConfig& cfg,
                                            const std::vector<int>& ris_sides,
                                            const std::vector<double>& alphas);

/// ZF nulling and RIS coherent-gain oracle checks; prints one line per check.
bool run_selftest(std::ostream& os);

/// Minimal static SVG line plot for the emitted CSV curves.
struct SvgSeries {
  std::string name;
  std::vector<double> x, y;
};
void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::vector<SvgSeries>& series);

}  // namespace sagin
