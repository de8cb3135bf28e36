#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "iosim/channel.hpp"
#include "iosim/experiment.hpp"
#include "iosim/oracle.hpp"
#include "iosim/rng.hpp"

using nlohmann::json;

namespace {

using namespace iosim;

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  json j;
  is >> j;
  return j;
}

/// Config files carry presentation units (dB, dBm, dBW); this is the one
/// place they are converted to the linear units the library uses.
SystemConfig system_from_json(const json& j, const std::string& profile) {
  SystemConfig cfg;
  cfg.n_elements = profile == "paper" ? 128 : 64;
  cfg.n_tx = j.value("n_tx", cfg.n_tx);
  cfg.n_elements = j.value("n_elements", cfg.n_elements);
  cfg.k_r = j.value("k_r", cfg.k_r);
  cfg.k_t = j.value("k_t", cfg.k_t);
  const double noise_dbm = j.value("noise_dbm", -70.0);
  cfg.noise_r = dbm_to_watt(j.value("noise_r_dbm", noise_dbm));
  cfg.noise_t = dbm_to_watt(j.value("noise_t_dbm", noise_dbm));
  const double target_db = j.value("sinr_target_db", 20.0);
  cfg.sinr_targets_r = RVec::Constant(cfg.k_r, db_to_linear(target_db));
  cfg.sinr_targets_t = RVec::Constant(cfg.k_t, db_to_linear(target_db));
  cfg.power_budget = db_to_linear(j.value("power_budget_dbw", 5.0));
  cfg.geometry.d_bi = j.value("d_bi", 50.0);
  cfg.geometry.d_iu = j.value("d_iu", 2.0);
  if (j.contains("pathloss")) {
    cfg.pathloss.bs_ios = j["pathloss"].value("bs_ios", 2.5);
    cfg.pathloss.ios_user = j["pathloss"].value("ios_user", 2.8);
    cfg.pathloss.bs_user = j["pathloss"].value("bs_user", 3.5);
  }
  cfg.ref_gain = db_to_linear(j.value("ref_gain_db", -30.0));
  cfg.seed = j.value("seed", 1ull);
  if (j.contains("delta_r"))
    cfg.geometry.delta_r = j["delta_r"].get<std::vector<double>>();
  if (j.contains("delta_t"))
    cfg.geometry.delta_t = j["delta_t"].get<std::vector<double>>();
  return cfg;
}

ExperimentSpec spec_from_json(const json& j, const std::string& profile) {
  ExperimentSpec spec;
  const std::string prob = j.value("problem", "power_min");
  if (prob != "power_min" && prob != "sum_rate")
    throw std::runtime_error("problem must be power_min or sum_rate");
  spec.problem = prob == "power_min" ? Problem::PowerMin : Problem::SumRate;
  spec.axis = axis_from_string(j.value("axis", "sinr_target"));
  if (j.contains("values")) spec.values = j["values"].get<std::vector<double>>();
  if (j.contains("ratio_values"))
    for (const auto& pair : j["ratio_values"])
      spec.ratio_values.emplace_back(pair[0].get<int>(), pair[1].get<int>());
  spec.trials = j.value("trials", profile == "paper" ? 50 : 20);
  if (j.contains("schemes"))
    spec.schemes = j["schemes"].get<std::vector<std::string>>();
  spec.out_path = j.value("out", "sweep.csv");
  spec.base = system_from_json(j.value("system", json::object()), profile);
  return spec;
}

int run_sweep(const std::string& config, const std::string& out,
              const std::string& profile, std::uint64_t seed, bool seed_set,
              int threads) {
  json j = config.empty() ? json::object() : load_json(config);
  ExperimentSpec spec = spec_from_json(j, profile);
  if (!out.empty()) spec.out_path = out;
  if (seed_set) spec.base.seed = seed;
  spec.threads = threads;
  run_experiment(spec);
  std::cout << "wrote " << spec.out_path << " and " << spec.out_path
            << ".summary.csv\n";
  return 0;
}

int run_trace(const std::string& config, const std::string& out,
              const std::string& profile, std::uint64_t seed, bool seed_set,
              const std::string& scheme, const std::string& problem) {
  json j = config.empty() ? json::object() : load_json(config);
  SystemConfig cfg = system_from_json(j.value("system", json::object()),
                                      profile);
  if (seed_set) cfg.seed = seed;
  convergence_trace(cfg,
                    problem == "sum_rate" ? Problem::SumRate
                                          : Problem::PowerMin,
                    scheme, out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_oracle(int instances, std::uint64_t seed, const std::string& which) {
  using namespace iosim::oracle;
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    SystemConfig cfg;
    cfg.n_tx = 2;
    cfg.n_elements = 2;
    cfg.k_r = 1;
    cfg.k_t = 1;
    cfg.noise_r = cfg.noise_t = 1e-10;
    cfg.sinr_targets_r = RVec::Constant(1, db_to_linear(10.0));
    cfg.sinr_targets_t = RVec::Constant(1, db_to_linear(10.0));
    cfg.power_budget = db_to_linear(0.0);
    cfg.seed = mix_seed(seed, i);
    const ChannelSet ch = sample_channels(cfg);

    const bool want_pm = which != "sr";
    const bool want_sr = which != "pm";
    const auto t0 = std::chrono::steady_clock::now();
    const TinyGridResult grid = tiny_joint_grid(ch, cfg, want_pm, want_sr);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();

    std::cout << "instance " << i << " (grid " << grid.points << " pts, "
              << secs << " s)\n";
    if (want_pm) {
      const auto rep = compare_schemes(Problem::PowerMin, ch, cfg, {"ued"})
                           .at("ued");
      const double solver = rep.status == SolveStatus::Infeasible
                                ? std::numeric_limits<double>::infinity()
                                : rep.final_objective();
      const double rel =
          std::abs(solver - grid.pm_min_power) / grid.pm_min_power;
      std::cout << "  power-min: solver " << solver << " W, grid "
                << grid.pm_min_power << " W, rel " << rel
                << (rel <= 0.05 ? "  [ok]" : "  [off]") << "\n";
      if (rel > 0.05) ++failures;
    }
    if (want_sr) {
      const auto rep = compare_schemes(Problem::SumRate, ch, cfg, {"ued"})
                           .at("ued");
      const double solver = rep.final_objective();
      const bool ok =
          solver >= 0.98 * grid.sr_lower && solver <= 1.02 * grid.sr_upper;
      std::cout << "  sum-rate: solver " << solver << ", grid ["
                << grid.sr_lower << ", " << grid.sr_upper << "]"
                << (ok ? "  [ok]" : "  [off]") << "\n";
      if (!ok) ++failures;
    }
  }
  std::cout << (failures == 0 ? "all instances within tolerance\n"
                              : "instances off tolerance: " +
                                    std::to_string(failures) + "\n");
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surface-assisted downlink designer and experiment harness"};
  app.require_subcommand(1);

  std::string config, out, profile = "desk", scheme = "ued",
              problem = "power_min", which = "both";
  std::uint64_t seed = 0;
  int threads = 0, instances = 3;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON config path");
    cmd->add_option("--profile", profile, "desk|paper scale defaults")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", seed, "base RNG seed");
  };

  CLI::App* sweep = app.add_subcommand("sweep", "run a Monte-Carlo sweep");
  add_common(sweep);
  sweep->add_option("--out", out, "results CSV path");
  sweep->add_option("--threads", threads, "worker threads (0 = auto)");

  CLI::App* trace =
      app.add_subcommand("trace", "write one convergence trace");
  add_common(trace);
  trace->add_option("--out", out, "trace CSV path")->required();
  trace->add_option("--scheme", scheme, "control scheme tag");
  trace->add_option("--problem", problem, "power_min|sum_rate")
      ->check(CLI::IsMember({"power_min", "sum_rate"}));

  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "compare solvers against the tiny-instance grid searches");
  oracle_cmd->add_option("--instances", instances, "number of instances");
  oracle_cmd->add_option("--seed", seed, "base RNG seed");
  oracle_cmd->add_option("--which", which, "pm|sr|both")
      ->check(CLI::IsMember({"pm", "sr", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const bool seed_set = app.count_all() && (sweep->count("--seed") ||
                                              trace->count("--seed") ||
                                              oracle_cmd->count("--seed"));
    if (sweep->parsed())
      return run_sweep(config, out, profile, seed, seed_set, threads);
    if (trace->parsed())
      return run_trace(config, out, profile, seed, seed_set, scheme, problem);
    if (oracle_cmd->parsed()) return run_oracle(instances, seed, which);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
