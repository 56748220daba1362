#pragma once

// Analytic forcing profiles. Spatial shape is a radial gaussian bump,
// optionally carrying an angular cosine mode in d = 2; time dependence is
// constant or cosine, so T-periodicity is exact by construction.

#include "hypbq/fields.hpp"

#include <optional>
#include <random>
#include <string>

namespace hypbq {

struct BumpProfile {
  enum class Mod { constant, cosine };

  double amplitude = 0.0;
  double center_tau = 0.0;
  double width = 1.0;
  int angular_mode = 0;
  Mod modulation = Mod::constant;
  double period = 0.0;
  double phase = 0.0;

  void validate(const std::string& name) const {
    if (amplitude != 0.0 && !(width > 0.0))
      throw std::invalid_argument(name + ".width must be positive");
    if (center_tau < 0.0)
      throw std::invalid_argument(name + ".center_tau must be >= 0");
    if (angular_mode < 0)
      throw std::invalid_argument(name + ".angular_mode must be >= 0");
    if (modulation == Mod::cosine && !(period > 0.0))
      throw std::invalid_argument(name + ".period must be positive for cosine modulation");
  }

  bool active() const { return amplitude != 0.0; }

  double time_factor(double t) const {
    if (modulation == Mod::constant) return 1.0;
    return std::cos(2.0 * M_PI * t / period + phase);
  }

  double shape(double tau, double phi, int d) const {
    const double z = (tau - center_tau) / width;
    double s = amplitude * std::exp(-0.5 * z * z);
    if (d == 2 && angular_mode > 0) s *= std::cos(angular_mode * phi);
    return s;
  }

  ScalarField scalar_field(const ManifoldGrid& g) const {
    ScalarField f = ScalarField::zero(g);
    for (int j = 0; j < g.n_tau; ++j)
      for (int k = 0; k < g.n_omega; ++k)
        f.values[g.idx(j, k)] = shape(g.tau_nodes[j], g.phi_nodes[k], g.d);
    return f;
  }

  // Bump placed in the radial frame component.
  VectorField vector_field(const ManifoldGrid& g) const {
    VectorField v = VectorField::zero(g);
    for (int j = 0; j < g.n_tau; ++j)
      for (int k = 0; k < g.n_omega; ++k)
        v.comps[g.idx(j, k)] = shape(g.tau_nodes[j], g.phi_nodes[k], g.d);
    return v;
  }

  // Bump placed in the (tau, tau) component.
  TensorField tensor_field(const ManifoldGrid& g) const {
    TensorField T = TensorField::zero(g);
    for (int j = 0; j < g.n_tau; ++j)
      for (int k = 0; k < g.n_omega; ++k)
        T.comps[T.block(0, 0) + g.idx(j, k)] = shape(g.tau_nodes[j], g.phi_nodes[k], g.d);
    return T;
  }
};

// Time-dependent forcing data (h, F, f) with optional exact period.
struct ForcingSet {
  const ManifoldGrid* grid = nullptr;
  BumpProfile h_profile, F_profile, f_profile;
  std::optional<double> period;
  VectorField h_base, f_base;
  TensorField F_base;

  static ForcingSet build(const ManifoldGrid& g, const BumpProfile& hp,
                          const BumpProfile& Fp, const BumpProfile& fp) {
    hp.validate("h");
    Fp.validate("F");
    fp.validate("f");
    ForcingSet s;
    s.grid = &g;
    s.h_profile = hp;
    s.F_profile = Fp;
    s.f_profile = fp;
    s.h_base = hp.vector_field(g);
    s.F_base = Fp.tensor_field(g);
    s.f_base = fp.vector_field(g);
    std::optional<double> T;
    for (const BumpProfile* p : {&hp, &Fp, &fp}) {
      if (!p->active() || p->modulation != BumpProfile::Mod::cosine) continue;
      if (T && std::abs(*T - p->period) > 1e-14 * *T)
        throw std::invalid_argument("forcing: cosine profiles must share one period");
      T = p->period;
    }
    s.period = T;
    return s;
  }

  static ForcingSet zero(const ManifoldGrid& g) {
    return build(g, BumpProfile{}, BumpProfile{}, BumpProfile{});
  }

  bool is_zero() const {
    return !h_profile.active() && !F_profile.active() && !f_profile.active();
  }

  VectorField h_at(double t) const {
    VectorField v = h_base;
    v.comps *= h_profile.time_factor(t);
    return v;
  }
  TensorField F_at(double t) const {
    TensorField T = F_base;
    T.comps *= F_profile.time_factor(t);
    return T;
  }
  VectorField f_at(double t) const {
    VectorField v = f_base;
    v.comps *= f_profile.time_factor(t);
    return v;
  }
};

// Random smooth fields: superpositions of a few bumps with random centers,
// widths and low angular modes. Used by the verification suites, which need
// grid-resolvable inputs.
inline ScalarField random_smooth_scalar(const ManifoldGrid& g, std::mt19937_64& rng,
                                        double amplitude, int n_bumps = 3) {
  std::uniform_real_distribution<double> uc(0.25 * g.tau_max, 0.7 * g.tau_max);
  std::uniform_real_distribution<double> uw(0.35, 1.0);
  std::uniform_real_distribution<double> ua(-1.0, 1.0);
  std::uniform_int_distribution<int> um(0, 3);
  ScalarField f = ScalarField::zero(g);
  for (int b = 0; b < n_bumps; ++b) {
    BumpProfile p;
    p.center_tau = uc(rng);
    p.width = uw(rng);
    p.amplitude = amplitude * ua(rng);
    p.angular_mode = (g.d == 2) ? um(rng) : 0;
    f.values += p.scalar_field(g).values;
  }
  return f;
}

inline VectorField random_smooth_vector(const ManifoldGrid& g, std::mt19937_64& rng,
                                        double amplitude, int n_bumps = 3) {
  VectorField v = VectorField::zero(g);
  const int nc = VectorField::n_comp(g);
  for (int c = 0; c < nc; ++c) {
    ScalarField f = random_smooth_scalar(g, rng, amplitude, n_bumps);
    v.comps.segment(c * g.n_nodes(), g.n_nodes()) = f.values;
  }
  return v;
}

inline TensorField random_smooth_tensor(const ManifoldGrid& g, std::mt19937_64& rng,
                                        double amplitude, int n_bumps = 2) {
  TensorField T = TensorField::zero(g);
  for (int r = 0; r < g.d; ++r)
    for (int c = 0; c < g.d; ++c) {
      if (g.d == 3 && (r > 0 || c > 0) && r != c) continue;
      ScalarField f = random_smooth_scalar(g, rng, amplitude, n_bumps);
      T.comps.segment(T.block(r, c), g.n_nodes()) = f.values;
    }
  return T;
}

// Node-wise uniform noise, for exact-algebra identities.
inline ScalarField random_noise_scalar(const ManifoldGrid& g, std::mt19937_64& rng,
                                       double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  ScalarField f = ScalarField::zero(g);
  for (int i = 0; i < g.n_nodes(); ++i) f.values[i] = u(rng);
  return f;
}

inline VectorField random_noise_vector(const ManifoldGrid& g, std::mt19937_64& rng,
                                       double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  VectorField v = VectorField::zero(g);
  for (int i = 0; i < static_cast<int>(v.comps.size()); ++i) v.comps[i] = u(rng);
  return v;
}

}  // namespace hypbq
