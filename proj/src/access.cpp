#include "starris/access.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "starris/errors.hpp"

namespace starris {

TimeSplit::TimeSplit(double left_fraction, double slot_length)
    : left_fraction_(left_fraction), slot_(slot_length), tau_left_(left_fraction * slot_length) {
  if (!(left_fraction >= 0.0 && left_fraction <= 1.0)) {
    throw ValidationError("time split fraction must lie in [0, 1]");
  }
}

DecodingOrder decoding_order(std::span<const double> gains) {
  std::vector<int> idx(gains.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return gains[a] > gains[b]; });
  DecodingOrder rank(gains.size());
  for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = static_cast<int>(r) + 1;
  return rank;
}

std::vector<double> noma_cluster_rates(std::span<const double> gains,
                                       std::span<const double> powers,
                                       double time_fraction, int num_ris,
                                       double sigma2) {
  if (gains.size() != powers.size()) throw ShapeError("noma_cluster_rates: size mismatch");
  const std::size_t n = gains.size();
  const auto rank = decoding_order(gains);
  // Walk in reverse decoding order accumulating the residual interference.
  std::vector<int> by_rank(n);
  for (std::size_t k = 0; k < n; ++k) by_rank[rank[k] - 1] = static_cast<int>(k);
  const double scale = time_fraction / num_ris;
  std::vector<double> rates(n, 0.0);
  double interference = 0.0;
  for (std::size_t r = n; r-- > 0;) {
    const int k = by_rank[r];
    const double rx = powers[k] * gains[k];
    rates[k] = scale * std::log2(1.0 + rx / (interference + sigma2));
    interference += rx;
  }
  return rates;
}

std::vector<double> oma_cluster_rates(std::span<const double> gains,
                                      std::span<const double> powers,
                                      double time_fraction, int num_ris,
                                      double sigma2) {
  if (gains.size() != powers.size()) throw ShapeError("oma_cluster_rates: size mismatch");
  const std::size_t n = gains.size();
  std::vector<double> rates(n, 0.0);
  if (n == 0) return rates;
  const double c = static_cast<double>(n);
  const double scale = time_fraction / (num_ris * c);
  for (std::size_t k = 0; k < n; ++k) {
    rates[k] = scale * std::log2(1.0 + powers[k] * gains[k] * c / sigma2);
  }
  return rates;
}

std::vector<double> slot_energy(std::span<const double> powers,
                                std::span<const TimeSplit> splits,
                                const Association& association) {
  if (powers.size() != association.serving_ris.size()) {
    throw ShapeError("slot_energy: one power per UE required");
  }
  if (splits.size() != association.left_sets.size()) {
    throw ShapeError("slot_energy: one split per surface required");
  }
  std::vector<double> e(powers.size());
  for (std::size_t k = 0; k < powers.size(); ++k) {
    e[k] = powers[k] * splits[association.serving_ris[k]].tau(association.side[k]);
  }
  return e;
}

}  // namespace starris
