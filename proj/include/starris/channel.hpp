#pragma once

#include <complex>
#include <span>
#include <vector>

#include "starris/random.hpp"
#include "starris/scenario.hpp"

namespace starris {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// Per-surface transmission and reflection phase shifts, radians in [0, 2pi).
struct PhaseConfig {
  std::vector<std::vector<double>> theta_t;
  std::vector<std::vector<double>> theta_r;

  static PhaseConfig zeros(int num_ris, int elements);
};

// Which side of the surface the UAV sits on relative to a UE cluster:
// 1 = same side (reflection), 0 = opposite side (transmission).
struct SideFlags {
  int left = 0;
  int right = 0;
};

enum class SurfaceKind {
  kStar,            // transmits and reflects
  kReflectingOnly,  // transmission path blocked
};

struct ChannelRealization {
  std::vector<ComplexVector> h_ue_ris;   // per UE, length M (to its serving surface)
  std::vector<ComplexVector> h_ris_ubs;  // per surface, length M
  ComplexVector h_ue_ubs;                // per UE, direct link
  ComplexVector composite;               // per UE, superimposed channel
  std::vector<int> reflect_flag;         // per UE, flag applied to its cluster
};

double large_scale_gain(double distance, double alpha, double xi0);

// Far-field ULA response: a common propagation phase times a linear
// progressive phase across the M elements.
ComplexVector ula_los(double distance, double cos_angle, int elements,
                      double spacing, double wavelength);

// Factors at or above this are treated as pure line of sight.
inline constexpr double kPureLosRicianFactor = 1e12;

ComplexVector rician_sample(std::span<const Complex> los, double rician_factor,
                            double xi, Rng& rng);

SideFlags side_flags(double uav_x, double ris_x);

/// h_ris_ubs^H * diag(e^{j theta}) * h_ue_ris + h_direct, with theta taken
/// from theta_r when flag == 1 and theta_t when flag == 0.
Complex composite_channel(std::span<const Complex> h_ris_ubs,
                          std::span<const Complex> h_ue_ris,
                          std::span<const double> theta_t,
                          std::span<const double> theta_r, int flag,
                          Complex h_direct);

/// Samples all three link types for every UE at one UAV position and forms
/// the composite channels. RNG draw order is fixed: for each surface its
/// UBS link, then for each UE its surface link followed by its direct link.
ChannelRealization realize_slot(const Scenario& scenario,
                                const Association& association,
                                const Position3D& uav, const PhaseConfig& phases,
                                Rng& rng,
                                SurfaceKind surface = SurfaceKind::kStar);

}  // namespace starris
