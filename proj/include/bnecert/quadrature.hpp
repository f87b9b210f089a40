// Copyright 2026 The bnecert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Adaptive composite Simpson quadrature with recursive bisection.
//
// Each panel is compared against its two half-panel Simpson estimates. The
// half-panel sum is kept and |S_halves - S_whole| is charged as that panel's
// error. For smooth integrands the true error is about 1/15 of this, and for
// a panel containing a kink it still over-covers the error of the halves, so
// the summed charge is a usable a posteriori bound for piecewise-smooth
// integrands. Panels accept once their charge fits their share (by width) of
// the tolerance.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bnecert/error.hpp"
#include "bnecert/parallel.hpp"

namespace bnecert {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // summed per-panel error charges
  std::size_t panels = 0;
};

struct QuadratureOptions {
  std::size_t max_panels = 1'000'000;
  int min_depth = 2;
  int max_depth = 48;
};

namespace detail {

template <typename F>
class SimpsonIntegrator {
 public:
  SimpsonIntegrator(const F& f, double tol_density, const QuadratureOptions& opt)
      : f_(f), tol_density_(tol_density), opt_(opt) {}

  QuadratureResult run(double a, double b) {
    const double fa = f_(a);
    const double fm = f_(0.5 * (a + b));
    const double fb = f_(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    result_ = {};
    recurse(a, b, fa, fm, fb, whole, 0);
    return result_;
  }

 private:
  void recurse(double a, double b, double fa, double fm, double fb,
               double whole, int depth) {
    if (++result_.panels > opt_.max_panels) {
      throw QuadratureFailure("panel budget of " +
                              std::to_string(opt_.max_panels) + " exceeded");
    }
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f_(lm);
    const double frm = f_(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double halves = left + right;
    const double charge = std::fabs(halves - whole);
    if (!std::isfinite(halves)) throw NonFinite("integrand is not finite");
    const bool fine_enough = charge <= tol_density_ * (b - a);
    if ((depth >= opt_.min_depth && fine_enough) || depth >= opt_.max_depth ||
        m <= a || m >= b) {
      result_.value += halves;
      result_.error += charge;
      return;
    }
    recurse(a, m, fa, flm, fm, left, depth + 1);
    recurse(m, b, fm, frm, fb, right, depth + 1);
  }

  const F& f_;
  double tol_density_;
  QuadratureOptions opt_;
  QuadratureResult result_;
};

}  // namespace detail

// Integrates f over [a, b]; the returned error charge is <= tol unless the
// depth cap was hit, in which case QuadratureFailure is thrown.
template <typename F>
QuadratureResult integrate(const F& f, double a, double b, double tol,
                           const QuadratureOptions& opt = {}) {
  if (!(tol > 0.0)) throw InvalidArgument("quadrature tolerance must be > 0");
  if (!(b > a)) return {};
  detail::SimpsonIntegrator<F> integrator(f, tol / (b - a), opt);
  QuadratureResult r = integrator.run(a, b);
  if (r.error > tol) {
    throw QuadratureFailure("tolerance " + std::to_string(tol) +
                            " unreachable (error charge " +
                            std::to_string(r.error) + ")");
  }
  return r;
}

// Integrates over [breaks.front(), breaks.back()] with a mandatory split at
// every breakpoint. Pieces run in parallel; each gets tolerance proportional
// to its width and the sum is taken in breakpoint order, so the result does
// not depend on the thread count.
template <typename F>
QuadratureResult integrate_pieces(const F& f, std::span<const double> breaks,
                                  double tol, const QuadratureOptions& opt = {},
                                  unsigned threads = num_threads()) {
  if (!(tol > 0.0)) throw InvalidArgument("quadrature tolerance must be > 0");
  if (breaks.size() < 2) return {};
  const double total = breaks.back() - breaks.front();
  if (!(total > 0.0)) return {};
  const std::size_t pieces = breaks.size() - 1;
  std::vector<QuadratureResult> parts(pieces);
  parallel_for(
      pieces,
      [&](std::size_t k) {
        const double a = breaks[k];
        const double b = breaks[k + 1];
        if (!(b > a)) return;
        detail::SimpsonIntegrator<F> integrator(f, tol / total, opt);
        parts[k] = integrator.run(a, b);
      },
      threads);
  QuadratureResult out;
  for (const auto& p : parts) {
    out.value += p.value;
    out.error += p.error;
    out.panels += p.panels;
  }
  if (out.panels > opt.max_panels) {
    throw QuadratureFailure("panel budget of " + std::to_string(opt.max_panels) +
                            " exceeded");
  }
  if (out.error > tol) {
    throw QuadratureFailure("tolerance " + std::to_string(tol) +
                            " unreachable (error charge " +
                            std::to_string(out.error) + ")");
  }
  return out;
}

// Iterated integral over the unit square: inner adaptive integrals feed an
// outer adaptive integral. Used for prior normalization, where the integrand
// is smooth and an approximate error figure is enough.
template <typename F>
QuadratureResult integrate_unit_square(const F& f, double tol,
                                       const QuadratureOptions& opt = {}) {
  double inner_error = 0.0;
  const double inner_tol = tol * 1e-2;
  auto inner = [&](double x) {
    auto row = [&](double y) { return f(x, y); };
    QuadratureResult r = integrate(row, 0.0, 1.0, inner_tol, opt);
    if (r.error > inner_error) inner_error = r.error;
    return r.value;
  };
  QuadratureResult outer = integrate(inner, 0.0, 1.0, 0.5 * tol, opt);
  outer.error += inner_error;
  return outer;
}

}  // namespace bnecert
