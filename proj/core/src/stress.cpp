#include "mmf/stress.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace mmf {

namespace {

constexpr double kFloor = 1e-8;

std::vector<SymMatrix2> sample1(const std::function<SymMatrix2(double)>& fn, const MicroManifold& mm) {
  std::vector<SymMatrix2> out(static_cast<std::size_t>(mm.n_m));
  for (int m = 0; m < mm.n_m; ++m) out[static_cast<std::size_t>(m)] = fn(mm.theta(m));
  return out;
}

// Largest |c_k| for k >= n/4 of a sampled periodic sequence.
double tail_of(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<Complex> spec(static_cast<std::size_t>(n / 2 + 1));
  detail::forward_1d(n, 1, v.data(), spec.data());
  double t = 0.0;
  for (int k = n / 4; k <= n / 2; ++k) t = std::max(t, std::abs(spec[static_cast<std::size_t>(k)]));
  return t;
}

}  // namespace

double SymMatrix2::frobenius() const noexcept { return std::sqrt(a11 * a11 + 2.0 * a12 * a12 + a22 * a22); }

const ScalarField2D& StressField::operator()(int a, int b) const noexcept {
  if (a == 0 && b == 0) return s11;
  if (a == 1 && b == 1) return s22;
  return s12;
}

ScalarField2D& StressField::operator()(int a, int b) noexcept {
  if (a == 0 && b == 0) return s11;
  if (a == 1 && b == 1) return s22;
  return s12;
}

ScalarField2D StressField::magnitude() const {
  ScalarField2D out(grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const SymMatrix2 m{s11.values()[p], s12.values()[p], s22.values()[p]};
    out.values()[p] = m.frobenius();
  }
  return out;
}

StressField& StressField::operator+=(const StressField& other) {
  s11 += other.s11;
  s12 += other.s12;
  s22 += other.s22;
  return *this;
}

StressField& StressField::operator*=(double s) noexcept {
  s11 *= s;
  s12 *= s;
  s22 *= s;
  return *this;
}

StressCoefficients StressCoefficients::rods() {
  StressCoefficients c;
  c.gamma1 = [](double th) {
    const double co = std::cos(th), si = std::sin(th);
    return SymMatrix2{co * co - 0.5, co * si, si * si - 0.5};
  };
  c.order2 = Order2::Zero;
  c.k_max = 2;
  return c;
}

void StressCoefficients::validate() const {
  if (k_max != 1 && k_max != 2) throw Error(ErrorKind::InvalidParameter, "stress truncation order must be 1 or 2");
  if (!gamma1) throw Error(ErrorKind::InvalidParameter, "gamma1 is empty");
  if (order2 == Order2::Dense && !gamma2) throw Error(ErrorKind::InvalidParameter, "dense gamma2 is empty");
  if (order2 == Order2::Separable && (!gamma2_left || !gamma2_right))
    throw Error(ErrorKind::InvalidParameter, "separable gamma2 factors are empty");
}

SymMatrix2 StressCoefficients::gamma2_at(double t1, double t2) const {
  switch (order2) {
    case Order2::Zero:
      return {};
    case Order2::Dense:
      return gamma2(t1, t2);
    case Order2::Separable: {
      const SymMatrix2 a = gamma2_left(t1);
      const double b = gamma2_right(t2);
      return {a.a11 * b, a.a12 * b, a.a22 * b};
    }
  }
  return {};
}

double StressCoefficients::gamma1_sup(const MicroManifold& mm) const {
  double s = 0.0;
  for (const auto& g : sample1(gamma1, mm)) s = std::max(s, g.frobenius());
  return s;
}

double StressCoefficients::gamma2_sup(const MicroManifold& mm) const {
  if (order2 == Order2::Zero) return 0.0;
  double s = 0.0;
  for (int a = 0; a < mm.n_m; ++a)
    for (int b = 0; b < mm.n_m; ++b) s = std::max(s, gamma2_at(mm.theta(a), mm.theta(b)).frobenius());
  return s;
}

double StressCoefficients::gamma1_gradient_constant(const MicroManifold& mm) const {
  const auto g = sample1(gamma1, mm);
  const int n = mm.n_m;
  std::vector<double> col(static_cast<std::size_t>(n));
  std::vector<Complex> spec(static_cast<std::size_t>(mm.n_modes()));
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int m = 0; m < n; ++m) {
      const auto& e = g[static_cast<std::size_t>(m)];
      col[static_cast<std::size_t>(m)] = c == 0 ? e.a11 : c == 1 ? e.a12 : e.a22;
    }
    detail::forward_1d(n, 1, col.data(), spec.data());
    double s = 0.0;
    for (int k = 0; k < mm.n_modes(); ++k) {
      const double inv = 1.0 / mm.r_multiplier(k);
      s += mm.mode_weight(k) * std::norm(spec[static_cast<std::size_t>(k)]) * inv * inv;
    }
    total += (c == 1 ? 2.0 : 1.0) * kTwoPi * s;
  }
  return std::sqrt(total);
}

double StressCoefficients::spectral_tail(const MicroManifold& mm) const {
  const auto g = sample1(gamma1, mm);
  const int n = mm.n_m;
  double t = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      const auto& e = g[static_cast<std::size_t>(m)];
      col[static_cast<std::size_t>(m)] = c == 0 ? e.a11 : c == 1 ? e.a12 : e.a22;
    }
    t = std::max(t, tail_of(std::move(col)));
  }
  if (order2 == Order2::Zero) return t;
  // rows and columns of gamma2 as functions of one angle
  for (int fixed = 0; fixed < n; ++fixed)
    for (int c = 0; c < 3; ++c) {
      std::vector<double> row(static_cast<std::size_t>(n)), column(static_cast<std::size_t>(n));
      for (int m = 0; m < n; ++m) {
        const SymMatrix2 r = gamma2_at(mm.theta(fixed), mm.theta(m));
        const SymMatrix2 q = gamma2_at(mm.theta(m), mm.theta(fixed));
        row[static_cast<std::size_t>(m)] = c == 0 ? r.a11 : c == 1 ? r.a12 : r.a22;
        column[static_cast<std::size_t>(m)] = c == 0 ? q.a11 : c == 1 ? q.a12 : q.a22;
      }
      t = std::max({t, tail_of(std::move(row)), tail_of(std::move(column))});
    }
  return t;
}

StressField stress_order1(const PhaseField& f, const StressCoefficients& coeffs) {
  coeffs.validate();
  const MicroManifold& mm = f.manifold();
  const auto g = sample1(coeffs.gamma1, mm);
  StressField out(f.grid());
  const double dth = mm.dtheta();
  for (std::size_t p = 0; p < f.point_count(); ++p) {
    const auto col = f.column(p);
    double a = 0.0, b = 0.0, c = 0.0;
    for (int m = 0; m < mm.n_m; ++m) {
      const double v = col[static_cast<std::size_t>(m)];
      const auto& e = g[static_cast<std::size_t>(m)];
      a += e.a11 * v;
      b += e.a12 * v;
      c += e.a22 * v;
    }
    out.s11.values()[p] = a * dth;
    out.s12.values()[p] = b * dth;
    out.s22.values()[p] = c * dth;
  }
  return out;
}

StressField stress_order2(const PhaseField& f, const StressCoefficients& coeffs) {
  coeffs.validate();
  const MicroManifold& mm = f.manifold();
  const int n = mm.n_m;
  const double dth = mm.dtheta();
  StressField out(f.grid());
  if (coeffs.order2 == StressCoefficients::Order2::Zero) return out;

  if (coeffs.order2 == StressCoefficients::Order2::Separable) {
    const auto left = sample1(coeffs.gamma2_left, mm);
    std::vector<double> right(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) right[static_cast<std::size_t>(m)] = coeffs.gamma2_right(mm.theta(m));
    for (std::size_t p = 0; p < f.point_count(); ++p) {
      const auto col = f.column(p);
      double a = 0.0, b = 0.0, c = 0.0, r = 0.0;
      for (int m = 0; m < n; ++m) {
        const double v = col[static_cast<std::size_t>(m)];
        const auto& e = left[static_cast<std::size_t>(m)];
        a += e.a11 * v;
        b += e.a12 * v;
        c += e.a22 * v;
        r += right[static_cast<std::size_t>(m)] * v;
      }
      const double w = r * dth * dth;
      out.s11.values()[p] = a * w;
      out.s12.values()[p] = b * w;
      out.s22.values()[p] = c * w;
    }
    return out;
  }

  std::vector<SymMatrix2> table(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) table[static_cast<std::size_t>(a) * n + b] = coeffs.gamma2(mm.theta(a), mm.theta(b));
  for (std::size_t p = 0; p < f.point_count(); ++p) {
    const auto col = f.column(p);
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double fa = col[static_cast<std::size_t>(a)];
      double r11 = 0.0, r12 = 0.0, r22 = 0.0;
      for (int b = 0; b < n; ++b) {
        const double fb = col[static_cast<std::size_t>(b)];
        const auto& e = table[static_cast<std::size_t>(a) * n + b];
        r11 += e.a11 * fb;
        r12 += e.a12 * fb;
        r22 += e.a22 * fb;
      }
      a11 += fa * r11;
      a12 += fa * r12;
      a22 += fa * r22;
    }
    out.s11.values()[p] = a11 * dth * dth;
    out.s12.values()[p] = a12 * dth * dth;
    out.s22.values()[p] = a22 * dth * dth;
  }
  return out;
}

StressField added_stress(const PhaseField& f, const StressCoefficients& coeffs) {
  StressField tau = stress_order1(f, coeffs);
  if (coeffs.k_max >= 2 && coeffs.order2 != StressCoefficients::Order2::Zero) tau += stress_order2(f, coeffs);
  return tau;
}

StressField total_sigma(const PhaseField& f, const StressCoefficients& coeffs, const ModelParams& params) {
  params.validate();
  StressField sigma = added_stress(f, coeffs);
  sigma *= params.tau / (params.delta * params.nu);
  return sigma;
}

ScalarField2D stress_gradient_magnitude(const StressField& tau) {
  const VectorField2D g11 = spectral_gradient(tau.s11);
  const VectorField2D g12 = spectral_gradient(tau.s12);
  const VectorField2D g22 = spectral_gradient(tau.s22);
  ScalarField2D out(tau.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double a = g11[k].values()[p], b = g12[k].values()[p], c = g22[k].values()[p];
      s += a * a + 2.0 * b * b + c * c;
    }
    out.values()[p] = std::sqrt(s);
  }
  return out;
}

VectorField2D stress_divergence(const StressField& sigma) {
  const VectorField2D g11 = spectral_gradient(sigma.s11);
  const VectorField2D g12 = spectral_gradient(sigma.s12);
  const VectorField2D g22 = spectral_gradient(sigma.s22);
  return VectorField2D(g11[0] + g12[1], g12[0] + g22[1]);
}

StressBoundReport check_stress_bounds(const StressField& tau_p, const ScalarField2D& rho, const ScalarField2D& N,
                                      const StressCoefficients& coeffs, const MicroManifold& manifold) {
  require_same_grid(tau_p.grid(), rho.grid(), "check_stress_bounds");
  require_same_grid(tau_p.grid(), N.grid(), "check_stress_bounds");
  coeffs.validate();
  StressBoundReport r;
  r.gamma1_sup = coeffs.gamma1_sup(manifold);
  r.gamma2_sup = coeffs.k_max >= 2 ? coeffs.gamma2_sup(manifold) : 0.0;
  r.gradient_constant = coeffs.gamma1_gradient_constant(manifold);

  const ScalarField2D mag = tau_p.magnitude();
  const ScalarField2D grad = stress_gradient_magnitude(tau_p);
  for (std::size_t p = 0; p < mag.size(); ++p) {
    const double rh = rho.values()[p];
    const double c = r.gamma1_sup + r.gamma2_sup * std::max(rh, 0.0);
    r.c_gamma = std::max(r.c_gamma, c);
    if (rh > kFloor) {
      r.max_rho_ratio = std::max(r.max_rho_ratio, mag.values()[p] / rh);
      if (mag.values()[p] > c * (1.0 + 1e-6) * rh) r.exceeded = true;
    }
    if (N.values()[p] > kFloor) r.max_N_ratio = std::max(r.max_N_ratio, grad.values()[p] / N.values()[p]);
  }
  return r;
}

}  // namespace mmf
