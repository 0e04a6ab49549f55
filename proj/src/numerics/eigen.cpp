// SPDX-License-Identifier: Apache-2.0
#include "kjepa/numerics/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kjepa {

void hessenberg_reduce(std::span<double> a, std::size_t n) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += at(i, k) * at(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (at(k + 1, k) > 0) alpha = -alpha;
    // v = x - alpha e1, normalized.
    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = at(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = at(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    // A <- H A with H = I - 2 v v^T / (v^T v)
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * at(i, c);
      s *= 2.0 / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) at(i, c) -= s * v[i];
    }
    // A <- A H
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += at(r, i) * v[i];
      s *= 2.0 / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) at(r, i) -= s * v[i];
    }
    for (std::size_t i = k + 2; i < n; ++i) at(i, k) = 0.0;
  }
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr layout),
// eigenvalues only. Works on the active window [lo, hi] and deflates from the bottom.
void hessenberg_qr(std::vector<double>& a, std::size_t n, std::vector<std::complex<double>>& out,
                   std::vector<bool>& valid) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };

  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > 0 ? i - 1 : 0); j < n; ++j) anorm += std::fabs(at(i, j));

  const std::size_t max_sweeps = 100 * n;
  std::size_t sweeps = 0;
  auto nn = static_cast<long>(n) - 1;
  double t = 0.0;  // accumulated exceptional shift
  int its = 0;

  while (nn >= 0) {
    long l = nn;
    // Look for a negligible subdiagonal element.
    for (; l >= 1; --l) {
      double s = std::fabs(at(l - 1, l - 1)) + std::fabs(at(l, l));
      if (s == 0.0) s = anorm;
      if (std::fabs(at(l, l - 1)) <= kEps * s) {
        at(l, l - 1) = 0.0;
        break;
      }
    }
    const double x = at(nn, nn);
    if (l == nn) {  // one root
      out[nn] = {x + t, 0.0};
      valid[nn] = true;
      --nn;
      its = 0;
      continue;
    }
    const double y = at(nn - 1, nn - 1);
    const double w = at(nn, nn - 1) * at(nn - 1, nn);
    if (l == nn - 1) {  // two roots
      const double p = 0.5 * (y - x);
      const double q = p * p + w;
      const double z = std::sqrt(std::fabs(q));
      const double xs = x + t;
      if (q >= 0.0) {
        const double zz = p + (p >= 0 ? z : -z);
        double r1 = xs + zz;
        double r2 = r1;
        if (zz != 0.0) r2 = xs - w / zz;
        out[nn - 1] = {r1, 0.0};
        out[nn] = {r2, 0.0};
      } else {
        out[nn - 1] = {xs + p, z};
        out[nn] = {xs + p, -z};
      }
      valid[nn - 1] = valid[nn] = true;
      nn -= 2;
      its = 0;
      continue;
    }

    if (sweeps >= max_sweeps) throw EigenConvergenceError(out, valid);
    ++sweeps;

    double xx = x, yy = y, ww = w;
    if (its == 10 || its == 20) {  // exceptional shift
      t += xx;
      for (long i = 0; i <= nn; ++i) at(i, i) -= xx;
      const double s = std::fabs(at(nn, nn - 1)) + std::fabs(at(nn - 1, nn - 2));
      xx = yy = 0.75 * s;
      ww = -0.4375 * s * s;
    }
    ++its;

    // Find two consecutive small subdiagonal elements.
    long m = nn - 2;
    double p = 0, q = 0, r = 0, z = 0;
    for (; m >= l; --m) {
      z = at(m, m);
      const double rr = xx - z;
      const double ss = yy - z;
      p = (rr * ss - ww) / at(m + 1, m) + at(m, m + 1);
      q = at(m + 1, m + 1) - z - rr - ss;
      r = at(m + 2, m + 1);
      const double s = std::fabs(p) + std::fabs(q) + std::fabs(r);
      p /= s;
      q /= s;
      r /= s;
      if (m == l) break;
      const double u = std::fabs(at(m, m - 1)) * (std::fabs(q) + std::fabs(r));
      const double v = std::fabs(p) * (std::fabs(at(m - 1, m - 1)) + std::fabs(z) +
                                       std::fabs(at(m + 1, m + 1)));
      if (u <= kEps * v) break;
    }
    for (long i = m + 2; i <= nn; ++i) {
      at(i, i - 2) = 0.0;
      if (i != m + 2) at(i, i - 3) = 0.0;
    }
    // Double QR step on rows l..nn and columns m..nn.
    for (long k = m; k <= nn - 1; ++k) {
      if (k != m) {
        p = at(k, k - 1);
        q = at(k + 1, k - 1);
        r = 0.0;
        if (k != nn - 1) r = at(k + 2, k - 1);
        xx = std::fabs(p) + std::fabs(q) + std::fabs(r);
        if (xx != 0.0) {
          p /= xx;
          q /= xx;
          r /= xx;
        }
      }
      const double s0 = std::sqrt(p * p + q * q + r * r);
      const double s = p >= 0 ? s0 : -s0;
      if (s == 0.0) continue;
      if (k == m) {
        if (l != m) at(k, k - 1) = -at(k, k - 1);
      } else {
        at(k, k - 1) = -s * xx;
      }
      p += s;
      xx = p / s;
      yy = q / s;
      z = r / s;
      q /= p;
      r /= p;
      for (long j = k; j <= nn; ++j) {  // row modification
        double pp = at(k, j) + q * at(k + 1, j);
        if (k != nn - 1) {
          pp += r * at(k + 2, j);
          at(k + 2, j) -= pp * z;
        }
        at(k + 1, j) -= pp * yy;
        at(k, j) -= pp * xx;
      }
      const long mmin = nn < k + 3 ? nn : k + 3;
      for (long i = l; i <= mmin; ++i) {  // column modification
        double pp = xx * at(i, k) + yy * at(i, k + 1);
        if (k != nn - 1) {
          pp += z * at(i, k + 2);
          at(i, k + 2) -= pp * r;
        }
        at(i, k + 1) -= pp * q;
        at(i, k) -= pp;
      }
    }
  }
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(std::span<const double> m, std::size_t n) {
  if (n == 0) return {};
  if (n > 64) throw ContractError("eigenvalues: n must be <= 64");
  if (m.size() != n * n)
    throw DimensionError("eigenvalues: expected " + std::to_string(n * n) + " entries");
  for (double v : m)
    if (!std::isfinite(v)) throw NumericError("eigenvalues: non-finite entry");

  std::vector<double> a(m.begin(), m.end());
  hessenberg_reduce(a, n);
  std::vector<std::complex<double>> ev(n);
  std::vector<bool> valid(n, false);
  try {
    hessenberg_qr(a, n, ev, valid);
  } catch (EigenConvergenceError&) {
    throw EigenConvergenceError(ev, valid);
  }
  std::stable_sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) {
    return std::abs(x) > std::abs(y);
  });
  return ev;
}

}  // namespace kjepa
