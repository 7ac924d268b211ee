#pragma once

// Ground state Q of  Q'' + (n-1)/r Q' - Q + Q^p = 0,  Q'(0) = 0, Q > 0,
// Q decreasing, computed by shooting on Q(0) with bisection. The origin is
// started from the series Q(r) = a + c2 r^2 + c4 r^4 which removes the
// (n-1)/r singularity. Beyond the radius where the trajectory has decayed to
// ~1e-6 of the peak the tail is replaced by the asymptotic
// c r^((1-n)/2) e^(-r) branch, so the stored profile decays monotonically to
// below 1e-10 * Q(0) at r_max.

#include <algorithm>
#include <cmath>
#include <mutex>
#include <map>
#include <vector>

#include "rnls/errors.hpp"
#include "rnls/fd_ops.hpp"
#include "rnls/field.hpp"

namespace rnls {

struct RadialProfile {
  int dim = 0;
  double p = 0.0;
  double dr = 0.0;
  std::vector<double> r;   // uniform samples 0, dr, 2 dr, ...
  std::vector<double> q;   // Q(r), strictly positive and decreasing
  std::vector<double> dq;  // Q'(r)

  double qmax = 0.0;          // Q(0)
  double massQ = 0.0;         // ||Q||_2^2
  double gradQ = 0.0;         // ||grad Q||_2
  double lp_pp = 0.0;         // ||Q||_{p+1}^{p+1}
  double second_moment = 0.0; // int |x|^2 Q^2 dx

  double r_max() const { return r.empty() ? 0.0 : r.back(); }

  // Cubic (Catmull-Rom) interpolation; Q is even so samples reflect at r=0,
  // and the exponential tail continues past r_max.
  double value(double rad) const { return interp(q, rad, true); }
  double deriv(double rad) const { return interp(dq, rad, false); }

 private:
  double interp(const std::vector<double>& s, double rad, bool even) const {
    rad = std::abs(rad);
    const std::size_t n = s.size();
    if (rad >= r.back()) {
      // asymptotic continuation ~ r^((1-n)/2) e^(-r)
      const double scale = std::pow(rad / r.back(), 0.5 * (1 - dim)) * std::exp(-(rad - r.back()));
      return s.back() * scale;
    }
    const double u = rad / dr;
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(u);
    if (i >= static_cast<std::ptrdiff_t>(n) - 2) i = static_cast<std::ptrdiff_t>(n) - 2;
    const double t = u - static_cast<double>(i);
    auto at = [&](std::ptrdiff_t k) -> double {
      if (k < 0) return even ? s[static_cast<std::size_t>(-k)] : -s[static_cast<std::size_t>(-k)];
      if (k >= static_cast<std::ptrdiff_t>(n)) return s[n - 1];
      return s[static_cast<std::size_t>(k)];
    };
    const double f0 = at(i - 1), f1 = at(i), f2 = at(i + 1), f3 = at(i + 2);
    const double t2 = t * t, t3 = t2 * t;
    return 0.5 * ((2.0 * f1) + (-f0 + f2) * t + (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) * t2 +
                  (-f0 + 3.0 * f1 - 3.0 * f2 + f3) * t3);
  }
};

struct ShootingOptions {
  double r_max = 25.0;
  double dr = 1e-3;
  double q0_min = 1.0 + 1e-9;
  double q0_max = 64.0;
  int max_bisect = 200;
};

namespace detail {

// Surface area of the unit sphere in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

struct ShotResult {
  int verdict = 0;        // -1 undershoot (turns back up), +1 overshoot (crosses zero)
  std::vector<double> q;  // samples up to the event (or r_max)
  std::vector<double> dq;
};

// Integrate the radial ODE from the series start with classical RK4.
inline ShotResult shoot(double a, int n, double p, const ShootingOptions& opt, bool record) {
  const double c2 = (a - std::pow(a, p)) / (2.0 * n);
  const double c4 = c2 * (1.0 - p * std::pow(a, p - 1.0)) / (4.0 * (n + 2.0));
  const double h = opt.dr;
  const int steps = static_cast<int>(std::llround(opt.r_max / h));

  ShotResult res;
  if (record) {
    res.q.reserve(steps + 1);
    res.dq.reserve(steps + 1);
    res.q.push_back(a);
    res.dq.push_back(0.0);
  }

  auto rhs = [&](double r, double y, double z, double& fy, double& fz) {
    fy = z;
    fz = -(n - 1) / r * z + y - std::pow(std::abs(y), p - 1.0) * y;
  };

  // first node at r = h from the series
  double y = a + c2 * h * h + c4 * h * h * h * h;
  double z = 2.0 * c2 * h + 4.0 * c4 * h * h * h;
  if (record) {
    res.q.push_back(y);
    res.dq.push_back(z);
  }

  for (int k = 1; k < steps; ++k) {
    const double r = k * h;
    double k1y, k1z, k2y, k2z, k3y, k3z, k4y, k4z;
    rhs(r, y, z, k1y, k1z);
    rhs(r + 0.5 * h, y + 0.5 * h * k1y, z + 0.5 * h * k1z, k2y, k2z);
    rhs(r + 0.5 * h, y + 0.5 * h * k2y, z + 0.5 * h * k2z, k3y, k3z);
    rhs(r + h, y + h * k3y, z + h * k3z, k4y, k4z);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);

    if (!std::isfinite(y) || !std::isfinite(z) || std::abs(y) > 4.0 * a) {
      res.verdict = (y < 0.0) ? +1 : -1;
      return res;
    }
    if (y < 0.0) {
      res.verdict = +1;
      return res;
    }
    if (z > 0.0) {
      res.verdict = -1;
      return res;
    }
    if (record) {
      res.q.push_back(y);
      res.dq.push_back(z);
    }
  }
  // Reached r_max still positive and decreasing: will eventually turn up.
  res.verdict = -1;
  return res;
}

}  // namespace detail

inline RadialProfile solve_ground_state(int n, double p, double tol = 1e-9,
                                        const ShootingOptions& opt = {}) {
  if (n < 1 || n > 12) throw Error("ground state dimension must be in 1..12");
  if (!(p > 1.0)) throw Error("ground state power must exceed 1");
  if (!(tol > 0.0)) throw Error("tolerance must be positive");

  // Bracket: low end just above 1 always undershoots; scan upward for an
  // overshoot.
  double lo = opt.q0_min;
  if (detail::shoot(lo, n, p, opt, false).verdict != -1)
    throw ShootingBracketFailure("low end of bracket does not undershoot");
  double hi = lo;
  bool found = false;
  for (double a = 1.5; a <= opt.q0_max; a *= 1.5) {
    if (detail::shoot(a, n, p, opt, false).verdict == +1) {
      hi = a;
      found = true;
      break;
    }
    lo = a;
  }
  if (!found)
    throw ShootingBracketFailure("no sign change of the far-field value up to q0_max");

  int it = 0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket exhausted at machine precision
    if (++it > opt.max_bisect) throw NonConvergence("bisection depth exceeded");
    if (detail::shoot(mid, n, p, opt, false).verdict == +1)
      hi = mid;
    else
      lo = mid;
  }
  const double a = 0.5 * (lo + hi);

  detail::ShotResult run = detail::shoot(a, n, p, opt, true);

  RadialProfile prof;
  prof.dim = n;
  prof.p = p;
  prof.dr = opt.dr;
  prof.qmax = a;

  // Keep the trajectory while it is trustworthy, then graft the asymptotic
  // exponential tail out to r_max.
  const std::size_t total = static_cast<std::size_t>(std::llround(opt.r_max / opt.dr)) + 1;
  std::size_t keep = run.q.size();
  const double floor_val = 1e-6 * a;
  for (std::size_t k = 0; k < run.q.size(); ++k) {
    if (run.q[k] < floor_val) {
      keep = k + 1;
      break;
    }
  }
  prof.r.resize(total);
  prof.q.resize(total);
  prof.dq.resize(total);
  for (std::size_t k = 0; k < total; ++k) prof.r[k] = k * opt.dr;
  for (std::size_t k = 0; k < std::min(keep, total); ++k) {
    prof.q[k] = run.q[k];
    prof.dq[k] = run.dq[k];
  }
  if (keep < total) {
    const double rc = prof.r[keep - 1];
    const double qc = prof.q[keep - 1];
    for (std::size_t k = keep; k < total; ++k) {
      const double rr = prof.r[k];
      const double s = std::pow(rr / rc, 0.5 * (1 - n)) * std::exp(-(rr - rc));
      prof.q[k] = qc * s;
      prof.dq[k] = prof.q[k] * (-1.0 + 0.5 * (1 - n) / rr);
    }
  }

  // Residual check of the stored profile (away from the grafted tail).
  double resid = 0.0;
  for (std::size_t k = 1; k + 1 < std::min(keep, total); ++k) {
    const double rr = prof.r[k];
    const double d2 = (prof.q[k + 1] - 2.0 * prof.q[k] + prof.q[k - 1]) / (opt.dr * opt.dr);
    const double d1 = (prof.q[k + 1] - prof.q[k - 1]) / (2.0 * opt.dr);
    resid = std::max(resid, std::abs(d2 + (n - 1) / rr * d1 - prof.q[k] + std::pow(prof.q[k], p)));
  }
  // Second-order FD residual; the limit is quadrature noise, not the solve.
  const double resid_scale = std::max(1.0, a);
  if (resid > std::max(tol, 1e-4) * resid_scale)
    throw NonConvergence("ODE residual above tolerance");

  // Norms by composite Simpson over the radial samples.
  const double area = detail::sphere_area(n);
  auto radial_integral = [&](auto f) {
    double acc = 0.0;
    const std::size_t m = total - 1;  // even number of intervals if total odd
    for (std::size_t k = 0; k + 2 <= m; k += 2) {
      const double f0 = f(k), f1 = f(k + 1), f2 = f(k + 2);
      acc += (opt.dr / 3.0) * (f0 + 4.0 * f1 + f2);
    }
    if (m % 2 == 1) {  // trapezoid for a leftover interval
      acc += 0.5 * opt.dr * (f(m - 1) + f(m));
    }
    return area * acc;
  };
  auto rpow = [&](std::size_t k) { return std::pow(prof.r[k], n - 1.0); };
  prof.massQ = radial_integral([&](std::size_t k) { return prof.q[k] * prof.q[k] * rpow(k); });
  const double grad_sq = radial_integral([&](std::size_t k) { return prof.dq[k] * prof.dq[k] * rpow(k); });
  prof.gradQ = std::sqrt(grad_sq);
  prof.lp_pp = radial_integral([&](std::size_t k) { return std::pow(prof.q[k], p + 1.0) * rpow(k); });
  prof.second_moment = radial_integral(
      [&](std::size_t k) { return prof.r[k] * prof.r[k] * prof.q[k] * prof.q[k] * rpow(k); });

  return prof;
}

// Solve-once cache keyed on (n, p); profiles are immutable once built.
inline const RadialProfile& ground_state_cached(int n, double p) {
  static std::mutex mu;
  static std::map<std::pair<int, long long>, RadialProfile> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, static_cast<long long>(std::llround(p * 1e12)));
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, solve_ground_state(n, p)).first;
  return it->second;
}

// Free energy  E(u) = ||grad u||_2^2 - n/(n+2) ||u||_{2+4/n}^{2+4/n}
// at the mass-critical exponent.
inline double free_energy(const RadialProfile& prof) {
  if (std::abs(prof.p - (1.0 + 4.0 / prof.dim)) > 1e-12)
    throw ExponentMismatch("free energy requires p = 1 + 4/n");
  return prof.gradQ * prof.gradQ - prof.dim / (prof.dim + 2.0) * prof.lp_pp;
}

inline double free_energy(const ComplexField& f, int n = 2) {
  const double q = 2.0 + 4.0 / n;
  Norms nm = norms(f, {q});
  return nm.grad_l2 * nm.grad_l2 - n / (n + 2.0) * std::pow(nm.lp[q], q);
}

// Sharp Gagliardo-Nirenberg constant  c_GN = (n+2)/n ||Q||_2^(-4/n).
inline double gn_constant(const RadialProfile& prof) {
  const int n = prof.dim;
  return (n + 2.0) / n * std::pow(prof.massQ, -2.0 / n);
}

// Slack of the sharp inequality for a 2d field:
//   c_GN ||u||_2^(4/n) ||grad u||_2^2 - ||u||_{2+4/n}^{2+4/n}  >= 0.
inline double check_gn(const ComplexField& f, const RadialProfile& prof) {
  const int n = prof.dim;
  const double q = 2.0 + 4.0 / n;
  Norms nm = norms(f, {q});
  return gn_constant(prof) * std::pow(nm.l2, 4.0 / n) * nm.grad_l2 * nm.grad_l2 -
         std::pow(nm.lp[q], q);
}

// Mass-preserving rescaling  Q_lambda(x) = lambda^(-n/2) Q(x / lambda).
struct RescaledQ {
  const RadialProfile* base = nullptr;
  double lambda = 1.0;
  std::vector<double> center;  // size = dim

  double operator()(const std::vector<double>& x) const {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - (k < center.size() ? center[k] : 0.0);
      r2 += d * d;
    }
    return std::pow(lambda, -0.5 * base->dim) * base->value(std::sqrt(r2) / lambda);
  }
};

}  // namespace rnls
