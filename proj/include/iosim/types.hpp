#ifndef IOSIM_TYPES_HPP
#define IOSIM_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace iosim {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

/// Propagation exponents for the three link classes.
struct PathlossExponents {
  double bs_ios = 2.5;
  double ios_user = 2.8;
  double bs_user = 3.5;
};

/// Deployment geometry. Angles are per-user; empty vectors mean
/// "draw uniformly in [0, pi/2] when sampling channels".
struct Geometry {
  double d_bi = 50.0;  // BS-surface distance [m]
  double d_iu = 2.0;   // surface-user distance [m]
  std::vector<double> delta_r;  // reflected-user angles [rad]
  std::vector<double> delta_t;  // transmitted-user angles [rad]
};

/// Scenario description. All physical quantities are in linear units
/// (watts, linear SINR); dB conversion happens only at the CLI boundary.
struct SystemConfig {
  int n_tx = 16;        // BS antennas
  int n_elements = 128; // surface elements
  int k_r = 4;          // reflected users
  int k_t = 4;          // transmitted users

  double noise_r = 1e-10;  // -70 dBm
  double noise_t = 1e-10;

  RVec sinr_targets_r;  // per-user, linear; empty -> filled with 100 (20 dB)
  RVec sinr_targets_t;
  double power_budget = 3.1622776601683795;  // 5 dBW

  Geometry geometry;
  PathlossExponents pathloss;
  double ref_gain = 1e-3;  // attenuation at the 1 m reference distance

  std::uint64_t seed = 1;

  int users_total() const { return k_r + k_t; }

  /// Per-user noise and target vectors in the [reflected; transmitted] order
  /// used everywhere in this library.
  double noise_of(int user) const { return user < k_r ? noise_r : noise_t; }
  double target_of(int user) const;

  void validate() const;
};

/// One flat-fading realization. Column u of each matrix belongs to user u.
struct ChannelSet {
  CMat g;    // n_elements x n_tx, BS -> surface
  CMat h_d;  // n_tx x k_r, BS -> reflected user (direct)
  CMat h_r;  // n_elements x k_r, surface -> reflected user
  CMat h_t;  // n_elements x k_t, surface -> transmitted user

  int n_tx() const { return static_cast<int>(g.cols()); }
  int n_elements() const { return static_cast<int>(g.rows()); }
  int k_r() const { return static_cast<int>(h_r.cols()); }
  int k_t() const { return static_cast<int>(h_t.cols()); }

  void validate() const;
};

/// Surface control modes.
enum class Mode {
  UED,         // per-element energy split, fully optimized
  EED,         // fixed equal split zeta = 1/sqrt(2)
  SD,          // element partition into reflect-only / transmit-only
  TDReflect,   // time slot where all elements reflect
  TDTransmit,  // time slot where all elements transmit
  IRS,         // reflect-only surface, zeta = 1
  None,        // surface absent, direct links only
};

std::string to_string(Mode m);
Mode mode_from_string(const std::string& tag);

/// Surface state: unit-modulus phases and the reflect amplitude vector.
/// The transmit amplitude eta is always derived as sqrt(1 - zeta^2) so the
/// passive-split constraint zeta^2 + eta^2 = 1 holds by construction.
struct IosState {
  CVec phi_r;  // length M, |phi_r[m]| = 1
  CVec phi_t;  // length M, |phi_t[m]| = 1
  RVec zeta;   // length M, in [0, 1]
  Mode mode = Mode::UED;

  int n_elements() const { return static_cast<int>(zeta.size()); }

  RVec eta() const { return (1.0 - zeta.array().square()).max(0.0).sqrt(); }

  /// Element coefficients applied to the incident wave.
  CVec reflect_coeff() const { return zeta.array() * phi_r.array(); }
  CVec transmit_coeff() const { return eta().array() * phi_t.array(); }

  void validate(double phase_tol = 1e-12) const;

  static IosState neutral(int m, Mode mode = Mode::UED);
};

/// Transmit precoders, one column per user.
struct Beamformers {
  CMat w_r;  // n_tx x k_r
  CMat w_t;  // n_tx x k_t

  int k_r() const { return static_cast<int>(w_r.cols()); }
  int k_t() const { return static_cast<int>(w_t.cols()); }
  int users_total() const { return k_r() + k_t(); }

  /// Column of the concatenated [W_r, W_t] matrix.
  CVec column(int user) const {
    return user < k_r() ? CVec(w_r.col(user)) : CVec(w_t.col(user - k_r()));
  }

  static Beamformers zeros(int n_tx, int k_r, int k_t) {
    return {CMat::Zero(n_tx, k_r), CMat::Zero(n_tx, k_t)};
  }
};

enum class SolveStatus { Converged, MaxIters, Infeasible };

std::string to_string(SolveStatus s);

/// Outcome of one solver run. objective_trace has iterations + 1 entries
/// (initial point plus one per outer iteration).
struct SolveReport {
  std::vector<double> objective_trace;
  std::vector<double> aux_trace;  // sum-rate solver: surrogate objective
  Beamformers beams;
  IosState ios;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  std::vector<IosState> iterates;  // populated when requested in options
  std::vector<std::string> notes;
  double wall_seconds = 0.0;

  double final_objective() const {
    return objective_trace.empty() ? 0.0 : objective_trace.back();
  }
};

}  // namespace iosim

#endif
