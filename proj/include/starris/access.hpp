#pragma once

#include <span>
#include <vector>

#include "starris/scenario.hpp"

namespace starris {

enum class AccessScheme { kNoma, kOma };

/// Time-switching split of one slot between a surface's left and right
/// clusters. Only the left fraction is stored; the right share is derived
/// so that tau_left() + tau_right() == slot exactly.
class TimeSplit {
 public:
  TimeSplit(double left_fraction, double slot_length);

  double left_fraction() const { return left_fraction_; }
  double tau_left() const { return tau_left_; }
  double tau_right() const { return slot_ - tau_left_; }
  double tau(Side s) const { return s == Side::kLeft ? tau_left() : tau_right(); }
  double slot() const { return slot_; }

 private:
  double left_fraction_;
  double slot_;
  double tau_left_;
};

// 1-based SIC rank per cluster member; rank 1 is decoded first.
using DecodingOrder = std::vector<int>;

// Descending gain; equal gains keep their input order.
DecodingOrder decoding_order(std::span<const double> gains);

/// Uplink NOMA rates (bit/s/Hz) for one cluster. Member k is interfered by
/// every member decoded after it:
///   r_k = (time_fraction / num_ris) * log2(1 + p_k g_k / (sum_{w_j > w_k} p_j g_j + sigma2))
std::vector<double> noma_cluster_rates(std::span<const double> gains,
                                       std::span<const double> powers,
                                       double time_fraction, int num_ris,
                                       double sigma2);

/// OFDMA inside the cluster: c members each get 1/c of the band and
/// therefore 1/c of the noise.
std::vector<double> oma_cluster_rates(std::span<const double> gains,
                                      std::span<const double> powers,
                                      double time_fraction, int num_ris,
                                      double sigma2);

// Per-UE energy (J) in one slot: p_k times the duration of its side.
std::vector<double> slot_energy(std::span<const double> powers,
                                std::span<const TimeSplit> splits,
                                const Association& association);

}  // namespace starris
