#include "iosim/modes.hpp"

#include <algorithm>
#include <cmath>

#include "iosim/model.hpp"
#include "iosim/rng.hpp"

namespace iosim {

ModeSpec ModeSpec::by_mode(Mode m, int n_elements, int k_r, int k_t) {
  ModeSpec spec;
  spec.mode = m;
  if (m == Mode::SD) {
    const int total = std::max(1, k_r + k_t);
    const int n_reflect = static_cast<int>(
        std::ceil(static_cast<double>(n_elements) * k_r / total));
    spec.reflect_set.resize(n_reflect);
    for (int i = 0; i < n_reflect; ++i) spec.reflect_set[i] = i;
  }
  return spec;
}

IosState project_mode(const IosState& state, const ModeSpec& spec) {
  IosState out = state;
  out.mode = spec.mode;
  const int m = state.n_elements();
  switch (spec.mode) {
    case Mode::UED:
      break;
    case Mode::EED:
      out.zeta = RVec::Constant(m, 1.0 / std::sqrt(2.0));
      break;
    case Mode::SD: {
      std::vector<bool> seen(m, false);
      out.zeta = RVec::Zero(m);
      for (int idx : spec.reflect_set) {
        if (idx < 0 || idx >= m)
          throw std::invalid_argument("SD partition index out of range");
        if (seen[idx])
          throw std::invalid_argument("SD partition repeats an element");
        seen[idx] = true;
        out.zeta[idx] = 1.0;
      }
      break;
    }
    case Mode::TDReflect:
    case Mode::IRS:
      out.zeta = RVec::Ones(m);
      break;
    case Mode::TDTransmit:
      out.zeta = RVec::Zero(m);
      break;
    case Mode::None:
      break;
  }
  return out;
}

Scheme scheme_from_tag(const std::string& tag, int n_elements, int k_r,
                       int k_t) {
  Scheme s;
  s.tag = tag;
  if (tag == "random-eed") {
    s.spec = ModeSpec::by_mode(Mode::EED, n_elements, k_r, k_t);
    s.random_phase = true;
    return s;
  }
  if (tag == "td") {
    s.spec = ModeSpec::by_mode(Mode::TDReflect, n_elements, k_r, k_t);
    s.time_division = true;
    return s;
  }
  s.spec = ModeSpec::by_mode(mode_from_string(tag), n_elements, k_r, k_t);
  return s;
}

namespace {

/// Keep only one side's users in the scenario (TD slots).
void slice_side(const ChannelSet& ch, const SystemConfig& cfg, bool reflected,
                ChannelSet* ch_out, SystemConfig* cfg_out) {
  *ch_out = ch;
  *cfg_out = cfg;
  if (reflected) {
    cfg_out->k_t = 0;
    cfg_out->sinr_targets_t = RVec(0);
    cfg_out->geometry.delta_t.clear();
    ch_out->h_t = CMat::Zero(ch.n_elements(), 0);
  } else {
    cfg_out->k_r = 0;
    cfg_out->sinr_targets_r = RVec(0);
    cfg_out->geometry.delta_r.clear();
    ch_out->h_d = CMat::Zero(cfg.n_tx, 0);
    ch_out->h_r = CMat::Zero(ch.n_elements(), 0);
  }
}

IosState random_phase_state(const ChannelSet& ch, const SystemConfig& cfg,
                            const ModeSpec& spec) {
  IosState s = IosState::neutral(ch.n_elements(), spec.mode);
  Philox rng(cfg.seed, 0xBADFACEull);
  for (int i = 0; i < s.n_elements(); ++i) {
    s.phi_r[i] = std::polar(1.0, 2.0 * M_PI * rng.next_double());
    s.phi_t[i] = std::polar(1.0, 2.0 * M_PI * rng.next_double());
  }
  return project_mode(s, spec);
}

SolveReport solve_single(Problem problem, const ChannelSet& ch,
                         const SystemConfig& cfg, const Scheme& scheme,
                         const SchemeSolveOptions& opts,
                         std::optional<IosState> warm_ios,
                         std::optional<Beamformers> warm_w) {
  const Mode mode = scheme.spec.mode;
  IosState init =
      warm_ios.has_value()
          ? project_mode(*warm_ios, scheme.spec)
          : (scheme.random_phase
                 ? random_phase_state(ch, cfg, scheme.spec)
                 : project_mode(bootstrap_ios(ch, cfg, mode), scheme.spec));

  if (problem == Problem::PowerMin) {
    PmBlocks blocks;
    blocks.zeta = (mode == Mode::UED);
    blocks.phases_r = mode != Mode::None && !scheme.random_phase &&
                      mode != Mode::TDTransmit;
    blocks.phases_t = mode != Mode::None && !scheme.random_phase &&
                      mode != Mode::IRS && mode != Mode::TDReflect;
    PowerMinOptions pm = opts.pm;
    if (scheme.random_phase) pm.init_random_retries = 0;
    return solve_power_min(ch, cfg, pm, blocks, init);
  }

  SrBlocks blocks;
  blocks.zeta = (mode == Mode::UED);
  blocks.phases = mode != Mode::None && !scheme.random_phase;
  return solve_sum_rate(ch, cfg, opts.sr, blocks, init, std::move(warm_w));
}

}  // namespace

SolveReport solve_with_mode(Problem problem, const ChannelSet& ch,
                            const SystemConfig& cfg, const Scheme& scheme,
                            const SchemeSolveOptions& opts,
                            std::optional<IosState> warm_ios,
                            std::optional<Beamformers> warm_w) {
  if (!scheme.time_division)
    return solve_single(problem, ch, cfg, scheme, opts, std::move(warm_ios),
                        std::move(warm_w));

  // Time division: reflect-only and transmit-only slots solved separately.
  ChannelSet ch_slot;
  SystemConfig cfg_slot;
  Scheme slot = scheme;
  slot.time_division = false;

  SolveReport combined;
  combined.ios = IosState::neutral(ch.n_elements(), Mode::TDReflect);

  slice_side(ch, cfg, true, &ch_slot, &cfg_slot);
  slot.spec.mode = Mode::TDReflect;
  SolveReport r_slot =
      cfg_slot.k_r > 0
          ? solve_single(problem, ch_slot, cfg_slot, slot, opts, {}, {})
          : SolveReport{};
  if (cfg_slot.k_r == 0) r_slot.objective_trace = {0.0};

  slice_side(ch, cfg, false, &ch_slot, &cfg_slot);
  slot.spec.mode = Mode::TDTransmit;
  SolveReport t_slot =
      cfg_slot.k_t > 0
          ? solve_single(problem, ch_slot, cfg_slot, slot, opts, {}, {})
          : SolveReport{};
  if (cfg_slot.k_t == 0) t_slot.objective_trace = {0.0};

  if (r_slot.status == SolveStatus::Infeasible ||
      t_slot.status == SolveStatus::Infeasible) {
    combined.status = SolveStatus::Infeasible;
    return combined;
  }
  combined.status = SolveStatus::Converged;
  combined.iterations =
      std::max(r_slot.iterations, t_slot.iterations);
  const double a = r_slot.final_objective();
  const double b = t_slot.final_objective();
  // power: both slots must meet their QoS, the budget is the larger one;
  // rate: slots time-share the frame.
  combined.objective_trace = {problem == Problem::PowerMin
                                  ? std::max(a, b)
                                  : scheme.spec.tau_r * a +
                                        scheme.spec.tau_t * b};
  combined.beams = r_slot.beams;
  combined.ios = r_slot.ios;
  return combined;
}

}  // namespace iosim
