#pragma once

#include <string>
#include <vector>

#include "sagin/numerics.hpp"
#include "sagin/scenario.hpp"

namespace sagin {

/// Per-element RIS phase shifts, wrapped into [0, 2*pi).
struct RisPhaseProfile {
  std::vector<double> phases;  // length L^2, element index l = 1..L^2

  int elements() const { return static_cast<int>(phases.size()); }
};

/// Half-wavelength array response [e^{-j pi (n-1) sin(angle)}], n = 1..N.
/// Every element has unit modulus.
std::vector<cplx> steering_vector(double angle_rad, int n);

/// Phase configuration that reflects an incident wave at omega_in toward
/// omega_out: p_l = -(2 pi f d_RIS l / c)(sin omega_in + sin omega_out),
/// wrapped into [0, 2*pi), l = 1..L^2. The element index is linear along one
/// axis; the phase law is one-dimensional.
RisPhaseProfile ris_phase_profile(double omega_in, double omega_out, const GeometryConfig& cfg);

/// Diagonal L^2 x L^2 reflection matrix diag(e^{j p_1}, ..., e^{j p_{L^2}}).
ComplexMatrix ris_reflection_matrix(const RisPhaseProfile& profile);

/// RIS-side response of a wave arriving at the panel from angle omega:
/// element l = e^{+j (2 pi f d_RIS / c) l sin omega}.
std::vector<cplx> ris_arrival_vector(double angle_rad, const GeometryConfig& cfg);

/// RIS-side response of a wave departing the panel toward angle omega:
/// element l = e^{-j (2 pi f d_RIS / c) l sin omega}. Used conjugated (g^H)
/// in the effective downlink composition, which together with the arrival
/// convention makes the phase profile above combine coherently.
std::vector<cplx> ris_departure_vector(double angle_rad, const GeometryConfig& cfg);

/// Angles that drive the RIS configuration for a concrete layout.
struct RisGeometry {
  double incidence_rad = 0.0;            // HAPS->RIS elevation angle (same at both ends)
  std::vector<double> user_bearing_rad;  // RIS->user planar bearing per user
  int served_user = 0;                   // index the panel is pointed at
};

/// Incidence angle, per-user bearings and the served-user choice (weakest
/// direct channel, lowest index on ties; cfg.ris_serve_user overrides).
RisGeometry ris_geometry(const GeometryConfig& cfg, const UserLayout& layout);

/// All channels of one realized scenario. Rows of h_ul / h_direct /
/// h_composite store the Hermitian (row-vector) channels exactly as they are
/// stacked into the composite matrix.
struct ChannelSet {
  ComplexMatrix h_ul;            // K_sat x N
  ComplexMatrix h_haps_ris;      // L^2 x N, rank-1 LoS product
  std::vector<std::vector<cplx>> g_users;  // K_UE vectors of length L^2
  ComplexMatrix h_direct;        // K_UE x N, backlobe-scaled direct rows
  ComplexMatrix h_composite;     // (K_sat + K_UE) x N
};

/// Assemble every channel for the given layout and RIS profile. The direct
/// HAPS->user rows carry sqrt(backlobe_gain); the composite matrix stacks the
/// uplink rows first, then the effective downlink rows
/// h_DL,k^H = g_k^H Theta H_h + h_{h,k}^H.
/// rng feeds the optional CN(0, eps) perturbation (cfg.channel_perturb_std).
ChannelSet build_channels(const GeometryConfig& cfg, const UserLayout& layout,
                          const RisPhaseProfile& profile, Rng& rng);

/// JSON dump with complex entries as [re, im] pairs, for offline inspection.
std::string channel_set_to_json(const ChannelSet& cs);

}  // namespace sagin
