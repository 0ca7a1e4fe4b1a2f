#include "starris/channel.hpp"

#include <cmath>
#include <numbers>

#include "starris/errors.hpp"

namespace starris {

PhaseConfig PhaseConfig::zeros(int num_ris, int elements) {
  PhaseConfig p;
  p.theta_t.assign(num_ris, std::vector<double>(elements, 0.0));
  p.theta_r.assign(num_ris, std::vector<double>(elements, 0.0));
  return p;
}

double large_scale_gain(double distance, double alpha, double xi0) {
  if (!(distance > 0.0)) throw DomainError("large_scale_gain: distance must be > 0");
  return xi0 / std::pow(distance, alpha);
}

ComplexVector ula_los(double distance, double cos_angle, int elements,
                      double spacing, double wavelength) {
  if (!(distance > 0.0)) throw DomainError("ula_los: distance must be > 0");
  if (elements < 1) throw DomainError("ula_los: need at least one element");
  if (!(std::abs(cos_angle) <= 1.0)) throw DomainError("ula_los: |cos_angle| > 1");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double common = -kTwoPi * distance / wavelength;
  const double step = -kTwoPi * spacing * cos_angle / wavelength;
  ComplexVector out(elements);
  for (int m = 0; m < elements; ++m) {
    out[m] = std::polar(1.0, common + step * m);
  }
  return out;
}

ComplexVector rician_sample(std::span<const Complex> los, double rician_factor,
                            double xi, Rng& rng) {
  const double amp = std::sqrt(xi);
  const bool pure_los = rician_factor >= kPureLosRicianFactor;
  const double los_w = pure_los ? 1.0 : std::sqrt(rician_factor / (rician_factor + 1.0));
  const double nlos_w = pure_los ? 0.0 : std::sqrt(1.0 / (rician_factor + 1.0));
  ComplexVector out(los.size());
  for (std::size_t m = 0; m < los.size(); ++m) {
    // Always draw so the stream position does not depend on the factor.
    const Complex w = complex_normal(rng);
    out[m] = amp * (los_w * los[m] + nlos_w * w);
  }
  return out;
}

SideFlags side_flags(double uav_x, double ris_x) {
  if (uav_x <= ris_x) return {1, 0};
  return {0, 1};
}

Complex composite_channel(std::span<const Complex> h_ris_ubs,
                          std::span<const Complex> h_ue_ris,
                          std::span<const double> theta_t,
                          std::span<const double> theta_r, int flag,
                          Complex h_direct) {
  const std::size_t M = h_ris_ubs.size();
  if (h_ue_ris.size() != M || theta_t.size() != M || theta_r.size() != M) {
    throw ShapeError("composite_channel: all vectors must have length M");
  }
  const auto theta = flag == 1 ? theta_r : theta_t;
  Complex acc{0.0, 0.0};
  for (std::size_t m = 0; m < M; ++m) {
    acc += std::conj(h_ris_ubs[m]) * std::polar(1.0, theta[m]) * h_ue_ris[m];
  }
  return acc + h_direct;
}

ChannelRealization realize_slot(const Scenario& scenario,
                                const Association& association,
                                const Position3D& uav, const PhaseConfig& phases,
                                Rng& rng, SurfaceKind surface) {
  const auto& c = scenario.config;
  const int K = scenario.num_ues();
  const int I = scenario.num_ris();
  const int M = scenario.elements();
  const double lambda = c.wavelength();
  const double spacing = c.element_spacing();

  ChannelRealization out;
  out.h_ris_ubs.resize(I);
  out.h_ue_ris.resize(K);
  out.h_ue_ubs.resize(K);
  out.composite.resize(K);
  out.reflect_flag.resize(K);

  for (int i = 0; i < I; ++i) {
    const auto& q = scenario.ris[i];
    const double d = distance(uav, q);
    const double cos_aod = (uav.x - q.x) / d;
    const auto los = ula_los(d, cos_aod, M, spacing, lambda);
    out.h_ris_ubs[i] = rician_sample(los, c.rician_ris_uav,
                                     large_scale_gain(d, c.alpha_ris_uav, c.ref_gain), rng);
  }

  for (int k = 0; k < K; ++k) {
    const int i = association.serving_ris[k];
    const auto& ue = scenario.ues[k];
    const auto& q = scenario.ris[i];
    const double d_ki = distance(ue, q);
    const double cos_aoa = (q.x - ue.x) / d_ki;
    const auto los = ula_los(d_ki, cos_aoa, M, spacing, lambda);
    out.h_ue_ris[k] = rician_sample(los, c.rician_ue_ris,
                                    large_scale_gain(d_ki, c.alpha_ue_ris, c.ref_gain), rng);

    const double d_ku = distance(uav, ue);
    const Complex direct_los = std::polar(1.0, -2.0 * std::numbers::pi * d_ku / lambda);
    out.h_ue_ubs[k] = rician_sample(std::span<const Complex>(&direct_los, 1), c.rician_ue_uav,
                                    large_scale_gain(d_ku, c.alpha_ue_uav, c.ref_gain), rng)[0];

    const SideFlags flags = side_flags(uav.x, q.x);
    const int flag = association.side[k] == Side::kLeft ? flags.left : flags.right;
    out.reflect_flag[k] = flag;
    if (surface == SurfaceKind::kReflectingOnly && flag == 0) {
      out.composite[k] = out.h_ue_ubs[k];
    } else {
      out.composite[k] = composite_channel(out.h_ris_ubs[i], out.h_ue_ris[k],
                                           phases.theta_t[i], phases.theta_r[i], flag,
                                           out.h_ue_ubs[k]);
    }
  }
  return out;
}

}  // namespace starris
