#include "sagin/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sagin {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kZf: return "zf";
    case Scheme::kDdpg: return "ddpg";
    case Scheme::kBoth: return "both";
  }
  return "both";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "zf") return Scheme::kZf;
  if (s == "ddpg") return Scheme::kDdpg;
  if (s == "both") return Scheme::kBoth;
  throw ConfigError("scheme must be one of zf|ddpg|both, got '" + s + "'");
}

namespace {

// Strict section reader: every key must be consumed, leftovers are errors.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("config section '" + prefix_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    handled_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + prefix_ + key + "' has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* sub(const char* key) {
    handled_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!handled_.count(item.key()))
        throw ConfigError("unknown config key '" + prefix_ + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> handled_;
};

void parse_scenario(const json& j, GeometryConfig& g) {
  Section s(j, "scenario.");
  s.get("area_x_m", g.area_x_m);
  s.get("area_y_m", g.area_y_m);
  s.get("sat_height_m", g.sat_height_m);
  s.get("haps_height_m", g.haps_height_m);
  s.get("ris_position_m", g.ris_position_m);
  s.get("carrier_freq_hz", g.carrier_freq_hz);
  s.get("bandwidth_hz", g.bandwidth_hz);
  s.get("n_antennas", g.n_antennas);
  s.get("ris_side", g.ris_side);
  s.get("ris_spacing_m", g.ris_spacing_m);
  s.get("sat_aoa_rad", g.sat_aoa_rad);
  s.get("k_sat", g.k_sat);
  if (s.has("p_t_dbm")) {
    double dbm = 0.0;
    s.get("p_t_dbm", dbm);
    g.p_t_watts = dbm_to_watts(dbm);
  } else {
    s.get("p_t_dbm", g.p_t_watts);  // marks the key handled
  }
  if (s.has("gamma_min_db")) {
    double db = 0.0;
    s.get("gamma_min_db", db);
    g.gamma_min = db_to_linear(db);
  } else {
    s.get("gamma_min_db", g.gamma_min);
  }
  if (s.has("uplink_gamma_min_db")) {
    double db = 0.0;
    s.get("uplink_gamma_min_db", db);
    g.uplink_gamma_min = db_to_linear(db);
  } else {
    s.get("uplink_gamma_min_db", g.uplink_gamma_min);
  }
  if (s.has("backlobe_gain_db")) {
    double db = 0.0;
    s.get("backlobe_gain_db", db);
    g.backlobe_gain = db_to_linear(db);
  } else {
    s.get("backlobe_gain_db", g.backlobe_gain);
  }
  s.get("apply_pathloss", g.apply_pathloss);
  s.get("channel_perturb_std", g.channel_perturb_std);
  s.get("ris_serve_user", g.ris_serve_user);
  s.finish();
}

void parse_users(const json& j, UserDistSpec& u) {
  Section s(j, "users.");
  if (s.has("distribution")) {
    std::string d;
    s.get("distribution", d);
    try {
      u.kind = user_distribution_from_string(d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config key 'users.distribution': ") + e.what());
    }
  } else {
    std::string dummy;
    s.get("distribution", dummy);
  }
  s.get("density_per_km2", u.density_per_km2);
  s.get("fixed_count", u.fixed_count);
  s.finish();
}

void parse_agent(const json& j, AgentConfig& a, std::uint64_t default_seed) {
  Section s(j, "agent.");
  a.seed = default_seed;
  s.get("discount", a.discount);
  s.get("learning_rate", a.learning_rate);
  s.get("weight_decay", a.weight_decay);
  s.get("batch_size", a.batch_size);
  s.get("warmup_steps", a.warmup_steps);
  s.get("noise_std", a.noise_std);
  s.get("steps_per_episode", a.steps_per_episode);
  s.get("max_episodes", a.max_episodes);
  s.get("seed", a.seed);
  s.get("target_blend", a.target_blend);
  s.get("target_hard_copy_period", a.target_hard_copy_period);
  s.get("lambda_power", a.lambda_power);
  s.get("lambda_violation", a.lambda_violation);
  s.get("hidden", a.hidden);
  s.get("a_max", a.a_max);
  s.get("a_max_scale", a.a_max_scale);
  s.get("replay_capacity", a.replay_capacity);
  s.get("redraw_per_step", a.redraw_per_step);
  s.finish();
}

void parse_sweep(const json& j, SweepSpec& sw) {
  Section s(j, "sweep.");
  s.get("user_counts", sw.user_counts);
  if (s.has("distributions")) {
    std::vector<std::string> names;
    s.get("distributions", names);
    sw.distributions.clear();
    for (const auto& n : names) {
      try {
        sw.distributions.push_back(user_distribution_from_string(n));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config key 'sweep.distributions': ") + e.what());
      }
    }
  } else {
    std::vector<std::string> dummy;
    s.get("distributions", dummy);
  }
  s.get("seeds", sw.seeds);
  s.finish();
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(j, "");
  top.get("seed", cfg.seed);
  if (top.has("scheme")) {
    std::string s;
    top.get("scheme", s);
    cfg.scheme = scheme_from_string(s);
  } else {
    std::string dummy;
    top.get("scheme", dummy);
  }
  top.get("out_dir", cfg.out_dir);
  top.get("eval_episodes", cfg.eval_episodes);
  top.get("emit_svg", cfg.emit_svg);
  if (const json* s = top.sub("scenario")) parse_scenario(*s, cfg.geometry);
  if (const json* s = top.sub("noise")) {
    Section n(*s, "noise.");
    n.get("noise_figure_db", cfg.noise.noise_figure_db);
    n.finish();
  }
  if (const json* s = top.sub("users")) parse_users(*s, cfg.users);
  if (const json* s = top.sub("agent")) parse_agent(*s, cfg.agent, cfg.seed);
  if (!j.contains("agent")) cfg.agent.seed = cfg.seed;
  if (const json* s = top.sub("sweep")) {
    SweepSpec sw;
    parse_sweep(*s, sw);
    cfg.sweep = sw;
  }
  top.finish();

  try {
    cfg.geometry.validate();
    cfg.agent.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_json(text);
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["scheme"] = to_string(cfg.scheme);
  j["out_dir"] = cfg.out_dir;
  j["eval_episodes"] = cfg.eval_episodes;
  j["emit_svg"] = cfg.emit_svg;
  const GeometryConfig& g = cfg.geometry;
  j["scenario"] = {{"area_x_m", g.area_x_m},
                   {"area_y_m", g.area_y_m},
                   {"sat_height_m", g.sat_height_m},
                   {"haps_height_m", g.haps_height_m},
                   {"ris_position_m", g.ris_position_m},
                   {"carrier_freq_hz", g.carrier_freq_hz},
                   {"bandwidth_hz", g.bandwidth_hz},
                   {"n_antennas", g.n_antennas},
                   {"ris_side", g.ris_side},
                   {"ris_spacing_m", g.ris_spacing()},
                   {"sat_aoa_rad", g.sat_aoa_rad},
                   {"k_sat", g.k_sat},
                   {"p_t_dbm", watts_to_dbm(g.p_t_watts)},
                   {"gamma_min_db", linear_to_db(g.gamma_min)},
                   {"uplink_gamma_min_db", linear_to_db(g.resolved_uplink_gamma_min())},
                   {"backlobe_gain_db", linear_to_db(g.backlobe_gain)},
                   {"apply_pathloss", g.apply_pathloss},
                   {"channel_perturb_std", g.channel_perturb_std},
                   {"ris_serve_user", g.ris_serve_user}};
  j["noise"] = {{"noise_figure_db", cfg.noise.noise_figure_db}};
  j["users"] = {{"distribution", to_string(cfg.users.kind)},
                {"density_per_km2", cfg.users.density_per_km2},
                {"fixed_count", cfg.users.fixed_count}};
  const AgentConfig& a = cfg.agent;
  j["agent"] = {{"discount", a.discount},
                {"learning_rate", a.learning_rate},
                {"weight_decay", a.weight_decay},
                {"batch_size", a.batch_size},
                {"warmup_steps", a.warmup_steps},
                {"noise_std", a.noise_std},
                {"steps_per_episode", a.steps_per_episode},
                {"max_episodes", a.max_episodes},
                {"seed", a.seed},
                {"target_blend", a.target_blend},
                {"target_hard_copy_period", a.target_hard_copy_period},
                {"lambda_power", a.lambda_power},
                {"lambda_violation", a.lambda_violation},
                {"hidden", a.hidden},
                {"a_max", a.a_max},
                {"a_max_scale", a.a_max_scale},
                {"resolved_a_max", resolve_a_max(a, g)},
                {"replay_capacity", a.replay_capacity},
                {"redraw_per_step", a.redraw_per_step}};
  if (cfg.sweep) {
    std::vector<std::string> dists;
    for (auto d : cfg.sweep->distributions) dists.push_back(to_string(d));
    j["sweep"] = {{"user_counts", cfg.sweep->user_counts},
                  {"distributions", dists},
                  {"seeds", cfg.sweep->seeds}};
  }
  return j.dump(2) + "\n";
}

namespace {

// Pin the user count once so training and evaluation agree on dimensions
// even in Poisson-density mode.
ExperimentConfig resolve_users(const ExperimentConfig& cfg) {
  ExperimentConfig out = cfg;
  if (out.users.fixed_count <= 0) {
    Rng probe_rng(cfg.seed, rng_streams::kLayout);
    const UserLayout probe = place_users(out.geometry, out.users, probe_rng);
    out.users.fixed_count = probe.count();
  }
  out.geometry.k_ue = out.users.fixed_count;
  return out;
}

std::vector<double> zf_targets(const GeometryConfig& g) {
  std::vector<double> t(static_cast<std::size_t>(g.n_streams()), g.gamma_min);
  for (int i = 0; i < g.k_sat; ++i)
    t[static_cast<std::size_t>(i)] = g.resolved_uplink_gamma_min();
  return t;
}

void accumulate_eval(EvalSummary& s, const Environment& env, const Environment::StepEval& ev,
                     int episode) {
  const auto& geo = env.geometry();
  RateReport rates = per_user_rates(ev.sinr, geo.bandwidth_hz, geo.k_sat);
  if (episode == 0) {
    s.first_episode_sinr = ev.sinr;
    s.first_episode_power_w = ev.total_power_w;
  }
  s.mean_reward += ev.reward;
  s.episode_sum_rate_bps.push_back(rates.sum_rate_bps);
  s.episode_rates.push_back(std::move(rates));
}

void finalize_eval(EvalSummary& s, int episodes) {
  s.mean_reward /= episodes;
  for (double r : s.episode_sum_rate_bps) s.mean_sum_rate_bps += r;
  s.mean_sum_rate_bps /= episodes;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string sinr_report_csv_rows(const std::string& scheme, const GeometryConfig& geo,
                                 const SinrReport& report) {
  std::ostringstream os;
  for (std::size_t k = 0; k < report.n_streams(); ++k) {
    const bool uplink = static_cast<int>(k) < geo.k_sat;
    os << scheme << ',' << k << ',' << (uplink ? "sat" : "ue") << ','
       << format_double(report.signal_w[k]) << ',' << format_double(report.interference_w[k])
       << ',' << format_double(report.noise_w) << ','
       << format_double(linear_to_db(std::max(report.sinr[k], 1.0e-30))) << '\n';
  }
  return os.str();
}

std::string rates_csv_rows(const std::string& scheme, const EvalSummary& s) {
  std::ostringstream os;
  for (std::size_t ep = 0; ep < s.episode_rates.size(); ++ep) {
    const auto& rr = s.episode_rates[ep];
    for (std::size_t u = 0; u < rr.per_user_rate_bps.size(); ++u)
      os << scheme << ',' << ep << ',' << u << ',' << format_double(rr.per_user_rate_bps[u])
         << '\n';
  }
  return os.str();
}

}  // namespace

EvalSummary evaluate_policy(const ExperimentConfig& cfg_in, const neural::MlpParams& actor,
                            int episodes) {
  const ExperimentConfig cfg = resolve_users(cfg_in);
  Environment env(cfg.geometry, cfg.noise, cfg.users, cfg.seed, rng_streams::kEval);
  EvalSummary summary;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(ep);
    const std::vector<double> state = env.state();
    RealMatrix sb(1, state.size());
    for (std::size_t c = 0; c < state.size(); ++c) sb(0, c) = state[c];
    const RealMatrix mu = neural::infer(actor, sb);
    std::vector<double> action(mu.data.begin(), mu.data.end());
    const BeamformingMatrix w = decode_action(action, env.geometry());
    accumulate_eval(summary, env, env.evaluate(w, cfg.agent), ep);
  }
  finalize_eval(summary, episodes);
  return summary;
}

EvalSummary evaluate_zf(const ExperimentConfig& cfg_in, int episodes) {
  const ExperimentConfig cfg = resolve_users(cfg_in);
  Environment env(cfg.geometry, cfg.noise, cfg.users, cfg.seed, rng_streams::kEval);
  const auto targets = zf_targets(env.geometry());
  EvalSummary summary;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(ep);
    const ComplexMatrix& h = env.channels().h_composite;
    const BeamformingMatrix dirs = zf_directions(h);
    const BeamformingMatrix w = min_power_scaling(dirs, h, targets, env.sigma2());
    if (total_power(w) > env.geometry().p_t_watts + 1.0e-9)
      throw InfeasibleError("evaluate_zf: minimum-power ZF solution exceeds the power budget");
    accumulate_eval(summary, env, env.evaluate(w, cfg.agent), ep);
  }
  finalize_eval(summary, episodes);
  return summary;
}

RunSummary run(const ExperimentConfig& cfg_in) {
  const ExperimentConfig cfg = resolve_users(cfg_in);
  const bool want_zf = cfg.scheme != Scheme::kDdpg;
  const bool want_ddpg = cfg.scheme != Scheme::kZf;

  if (!cfg.geometry.zf_feasible()) {
    const std::string msg =
        "scenario has " + std::to_string(cfg.geometry.n_streams()) + " streams but only " +
        std::to_string(cfg.geometry.n_antennas) +
        " antennas; zero-forcing needs N >= K_sat + K_UE transmit degrees of freedom";
    if (want_zf) throw InfeasibleError(msg);
    std::cerr << "warning: " << msg << " (continuing, DDPG only)\n";
  }

  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "resolved_config.json", resolved_config_json(cfg));

  {
    Environment dump_env(cfg.geometry, cfg.noise, cfg.users, cfg.seed, rng_streams::kLayout);
    write_file(fs::path(cfg.out_dir) / "channels.json",
               channel_set_to_json(dump_env.channels()));
  }

  RunSummary summary;
  if (want_ddpg) {
    Environment env(cfg.geometry, cfg.noise, cfg.users, cfg.seed, rng_streams::kLayout);
    summary.training = train(env, cfg.agent);

    std::ostringstream log;
    log << "step,episode,reward,critic_loss,total_power_watts,min_user_sinr_db\n";
    for (const auto& row : summary.training->log) {
      log << row.step << ',' << row.episode << ',' << format_double(row.reward) << ','
          << format_double(row.critic_loss) << ',' << format_double(row.total_power_w) << ','
          << format_double(row.min_user_sinr_db) << '\n';
    }
    write_file(fs::path(cfg.out_dir) / "training_log.csv", log.str());

    // Raw curve plus the 100-step moving average.
    std::ostringstream curve;
    curve << "step,reward,reward_ma100\n";
    double window_sum = 0.0;
    const auto& rows = summary.training->log;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      window_sum += rows[i].reward;
      if (i >= 100) window_sum -= rows[i - 100].reward;
      const double ma = window_sum / static_cast<double>(std::min<std::size_t>(i + 1, 100));
      curve << rows[i].step << ',' << format_double(rows[i].reward) << ','
            << format_double(ma) << '\n';
    }
    write_file(fs::path(cfg.out_dir) / "reward_curve.csv", curve.str());

    const fs::path ckpt_dir = fs::path(cfg.out_dir) / "checkpoints";
    fs::create_directories(ckpt_dir);
    neural::save_checkpoint(summary.training->nets.actor, (ckpt_dir / "actor.json").string());
    neural::save_checkpoint(summary.training->nets.critic, (ckpt_dir / "critic.json").string());
    neural::save_checkpoint(summary.training->nets.target_actor,
                            (ckpt_dir / "target_actor.json").string());
    neural::save_checkpoint(summary.training->nets.target_critic,
                            (ckpt_dir / "target_critic.json").string());

    summary.ddpg = evaluate_policy(cfg, summary.training->nets.actor, cfg.eval_episodes);

    if (cfg.emit_svg) {
      SvgSeries series{"reward_ma100", {}, {}};
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i % 10 != 0) continue;
        series.x.push_back(static_cast<double>(rows[i].step));
        double ma = 0.0;
        const std::size_t lo = i >= 100 ? i - 100 + 1 : 0;
        for (std::size_t k = lo; k <= i; ++k) ma += rows[k].reward;
        series.y.push_back(ma / static_cast<double>(i - lo + 1));
      }
      write_svg_lineplot((fs::path(cfg.out_dir) / "reward_curve.svg").string(),
                         "average reward vs step", {series});
    }
  }
  if (want_zf) summary.zf = evaluate_zf(cfg, cfg.eval_episodes);

  std::ostringstream sinr_csv;
  sinr_csv << "scheme,stream,kind,signal_w,interference_w,noise_w,sinr_db\n";
  if (summary.zf) sinr_csv << sinr_report_csv_rows("zf", cfg.geometry, summary.zf->first_episode_sinr);
  if (summary.ddpg)
    sinr_csv << sinr_report_csv_rows("ddpg", cfg.geometry, summary.ddpg->first_episode_sinr);
  write_file(fs::path(cfg.out_dir) / "sinr_report.csv", sinr_csv.str());

  std::ostringstream rates_csv;
  rates_csv << "scheme,eval_episode,user,rate_bps\n";
  if (summary.zf) rates_csv << rates_csv_rows("zf", *summary.zf);
  if (summary.ddpg) rates_csv << rates_csv_rows("ddpg", *summary.ddpg);
  write_file(fs::path(cfg.out_dir) / "rates.csv", rates_csv.str());

  return summary;
}

std::vector<SweepCell> sweep_users(const ExperimentConfig& cfg) {
  const SweepSpec sweep = cfg.sweep.value_or(SweepSpec{});
  if (sweep.user_counts.empty() || sweep.distributions.empty() || sweep.seeds < 1)
    throw ConfigError("sweep: need user_counts, distributions and seeds >= 1");
  for (int c : sweep.user_counts)
    if (c < 1) throw ConfigError("sweep: user counts must be >= 1");

  const bool want_ddpg = cfg.scheme != Scheme::kZf;
  std::vector<SweepCell> cells;
  int cell_index = 0;
  for (UserDistribution dist : sweep.distributions) {
    for (int count : sweep.user_counts) {
      ExperimentConfig cell_cfg = cfg;
      cell_cfg.users.kind = dist;
      cell_cfg.users.fixed_count = count;
      cell_cfg.seed = cfg.seed + static_cast<std::uint64_t>(cell_index);
      cell_cfg.agent.seed = cell_cfg.seed;

      auto push_cell = [&](const std::string& scheme, const EvalSummary& s) {
        SweepCell cell;
        cell.distribution = dist;
        cell.n_users = count;
        cell.scheme = scheme;
        cell.mean_sum_rate_bps = s.mean_sum_rate_bps;
        double var = 0.0;
        for (double r : s.episode_sum_rate_bps) {
          const double d = r - s.mean_sum_rate_bps;
          var += d * d;
        }
        cell.std_sum_rate_bps = std::sqrt(var / s.episode_sum_rate_bps.size());
        cells.push_back(cell);
      };

      push_cell("zf", evaluate_zf(cell_cfg, sweep.seeds));
      if (want_ddpg) {
        const ExperimentConfig resolved = resolve_users(cell_cfg);
        Environment env(resolved.geometry, resolved.noise, resolved.users, resolved.seed,
                        rng_streams::kLayout);
        TrainResult tr = train(env, resolved.agent);
        push_cell("ddpg", evaluate_policy(cell_cfg, tr.nets.actor, sweep.seeds));
      }
      ++cell_index;
    }
  }

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << "distribution,n_users,scheme,mean_sum_rate_bps,std\n";
  for (const auto& cell : cells)
    csv << to_string(cell.distribution) << ',' << cell.n_users << ',' << cell.scheme << ','
        << format_double(cell.mean_sum_rate_bps) << ',' << format_double(cell.std_sum_rate_bps)
        << '\n';
  write_file(fs::path(cfg.out_dir) / "fig4_data.csv", csv.str());

  if (cfg.emit_svg) {
    std::vector<SvgSeries> series;
    for (UserDistribution dist : sweep.distributions) {
      for (const char* scheme : {"zf", "ddpg"}) {
        SvgSeries s{to_string(dist) + "/" + scheme, {}, {}};
        for (const auto& cell : cells) {
          if (cell.distribution == dist && cell.scheme == scheme) {
            s.x.push_back(cell.n_users);
            s.y.push_back(cell.mean_sum_rate_bps);
          }
        }
        if (!s.x.empty()) series.push_back(std::move(s));
      }
    }
    write_svg_lineplot((fs::path(cfg.out_dir) / "fig4_data.svg").string(),
                       "sum rate vs ground users", series);
  }
  return cells;
}

std::vector<CompareCell> compare_throughput(const ExperimentConfig& cfg,
                                            const std::vector<int>& ris_sides,
                                            const std::vector<double>& alphas) {
  if (ris_sides.empty() || alphas.empty())
    throw ConfigError("compare: need at least one RIS side and one alpha");
  for (double a : alphas)
    if (a < 0.0) throw ConfigError("compare: alphas must be >= 0");

  std::vector<CompareCell> cells;
  for (int side : ris_sides) {
    ExperimentConfig side_cfg = cfg;
    side_cfg.geometry.ris_side = side;

    const ExperimentConfig resolved = resolve_users(side_cfg);
    Environment env(resolved.geometry, resolved.noise, resolved.users, resolved.seed,
                    rng_streams::kLayout);
    TrainResult tr = train(env, resolved.agent);
    const EvalSummary ddpg = evaluate_policy(side_cfg, tr.nets.actor, side_cfg.eval_episodes);
    const EvalSummary zf = evaluate_zf(side_cfg, side_cfg.eval_episodes);

    for (double alpha : alphas) {
      auto mean_fair = [&](const EvalSummary& s) {
        double acc = 0.0;
        for (const auto& rr : s.episode_rates)
          acc += alpha_fair_throughput(rr.per_user_rate_bps, alpha).fair_throughput_bps;
        return acc / s.episode_rates.size();
      };
      const double zf_fair = mean_fair(zf);
      const double ddpg_fair = mean_fair(ddpg);
      cells.push_back({"ddpg", side, alpha, ddpg_fair, improvement_percent(ddpg_fair, zf_fair),
                       ddpg.mean_sum_rate_bps});
      cells.push_back({"zf", side, alpha, zf_fair, 0.0, zf.mean_sum_rate_bps});
    }
  }

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << "scheme,ris_side,alpha,throughput_bps,improvement_pct_vs_zf\n";
  for (const auto& cell : cells)
    csv << cell.scheme << ',' << cell.ris_side << ',' << format_double(cell.alpha) << ','
        << format_double(cell.throughput_bps) << ','
        << format_double(cell.improvement_pct_vs_zf) << '\n';
  write_file(fs::path(cfg.out_dir) / "table2_replica.csv", csv.str());
  return cells;
}

bool run_selftest(std::ostream& os) {
  bool all_pass = true;
  auto report = [&](const char* name, bool pass, double value) {
    os << (pass ? "[PASS] " : "[FAIL] ") << name << " (" << value << ")\n";
    all_pass = all_pass && pass;
  };

  // ZF nulling + SINR tightness on random steering-like channels.
  {
    Rng rng(7, 0);
    double worst_null = 0.0, worst_sinr_err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t k = 2 + static_cast<std::size_t>(rng.uniform() * 5);
      const std::size_t n = k + static_cast<std::size_t>(rng.uniform() * (k + 1));
      ComplexMatrix h(k, n);
      for (auto& z : h.data()) z = rng.complex_gaussian(1.0);
      const auto dirs = zf_directions(h);
      const auto w = min_power_scaling(dirs, h, 1.0, 1.0e-9);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < k; ++c) {
          if (i == c) continue;
          cplx dot(0.0, 0.0);
          for (std::size_t a = 0; a < n; ++a) dot += h(i, a) * dirs.w(a, c);
          worst_null = std::max(worst_null, std::abs(dot));
        }
      const auto sinr = compute_sinr(h, w, 1.0e-9);
      for (double g : sinr.sinr) worst_sinr_err = std::max(worst_sinr_err, std::abs(g - 1.0));
    }
    report("zf null residual <= 1e-9", worst_null <= 1.0e-9, worst_null);
    report("zf sinr tightness <= 1e-6", worst_sinr_err <= 1.0e-6, worst_sinr_err);
  }

  // RIS coherent gain against the brute-force element sum.
  {
    for (int side : {4, 6}) {
      GeometryConfig geo;
      geo.ris_side = side;
      const double win = 0.31, wout = -0.52;
      const auto profile = ris_phase_profile(win, wout, geo);
      const auto g = ris_departure_vector(wout, geo);
      const auto a = ris_arrival_vector(win, geo);
      cplx acc(0.0, 0.0);
      for (int l = 0; l < geo.ris_elements(); ++l) {
        const cplx phase(std::cos(profile.phases[static_cast<std::size_t>(l)]),
                         std::sin(profile.phases[static_cast<std::size_t>(l)]));
        acc += std::conj(g[static_cast<std::size_t>(l)]) * phase * a[static_cast<std::size_t>(l)];
      }
      const double err = std::abs(std::abs(acc) - geo.ris_elements());
      report(side == 4 ? "ris coherent gain 4x4 = L^2" : "ris coherent gain 6x6 = L^2",
             err <= 1.0e-9, err);
    }
  }
  return all_pass;
}

void write_svg_lineplot(const std::string& path, const std::string& title,
                        const std::vector<SvgSeries>& series) {
  const int width = 860, height = 520, margin = 60;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << margin << "\" y=\"" << height - margin + 20 << "\" font-size=\"11\">"
     << format_double(xmin) << "</text>\n";
  os << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 20
     << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(xmax) << "</text>\n";
  os << "<text x=\"" << margin - 4 << "\" y=\"" << height - margin
     << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(ymin) << "</text>\n";
  os << "<text x=\"" << margin - 4 << "\" y=\"" << margin
     << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(ymax) << "</text>\n";

  auto sx = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  auto sy = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    os << "<polyline fill=\"none\" stroke=\"" << colors[si % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << width - margin - 150 << "\" y=\"" << margin + 16 * (si + 1)
       << "\" font-size=\"12\" fill=\"" << colors[si % 6] << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  write_file(path, os.str());
}

}  // namespace sagin
