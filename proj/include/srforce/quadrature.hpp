#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace srf::quad {

template <typename Scalar>
struct Result {
  Scalar value{0};
  Scalar abs_error{0};
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK abscissae).
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar>
struct Segment {
  Scalar a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename Scalar, typename F>
Segment<Scalar> gk15(F& f, Scalar a, Scalar b) {
  const Scalar half = (b - a) / 2;
  const Scalar mid = (a + b) / 2;
  const Scalar fc = f(mid);
  Scalar kronrod = fc * Scalar(kronrod_weights[7]);
  Scalar gauss = fc * Scalar(gauss_weights[3]);
  for (int j = 0; j < 7; ++j) {
    const Scalar dx = half * Scalar(kronrod_nodes[j]);
    const Scalar sum = f(mid - dx) + f(mid + dx);
    kronrod += Scalar(kronrod_weights[j]) * sum;
    if (j % 2 == 1) gauss += Scalar(gauss_weights[j / 2]) * sum;
  }
  using std::abs;
  return {a, b, kronrod * half, abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// Bisects the segment with the largest error estimate until the summed error
/// is below max(abs_tol, rel_tol * |value|).
template <typename Scalar, typename F>
Result<Scalar> gauss_kronrod(F&& f, Scalar a, Scalar b, Scalar rel_tol, Scalar abs_tol = Scalar(0),
                             int max_subdivisions = 2000) {
  using std::abs;
  Result<Scalar> out;
  if (a == b) return out;
  std::priority_queue<detail::Segment<Scalar>> heap;
  auto first = detail::gk15<Scalar>(f, a, b);
  out.evaluations = 15;
  Scalar value = first.value;
  Scalar error = first.error;
  heap.push(first);
  int splits = 0;
  while (error > std::max(abs_tol, rel_tol * abs(value))) {
    if (splits >= max_subdivisions) {
      out.converged = false;
      break;
    }
    auto worst = heap.top();
    heap.pop();
    const Scalar m = (worst.a + worst.b) / 2;
    auto left = detail::gk15<Scalar>(f, worst.a, m);
    auto right = detail::gk15<Scalar>(f, m, worst.b);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum from the segments to shed the drift of the running updates.
  value = Scalar(0);
  error = Scalar(0);
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.abs_error = error;
  return out;
}

/// Integral over [a, b] split at the interior `breaks` (outside points ignored).
template <typename Scalar, typename F>
Result<Scalar> gauss_kronrod_split(F&& f, Scalar a, Scalar b, std::vector<Scalar> breaks, Scalar rel_tol,
                                   Scalar abs_tol = Scalar(0)) {
  std::erase_if(breaks, [&](Scalar x) { return !(x > a && x < b); });
  std::sort(breaks.begin(), breaks.end());
  breaks.insert(breaks.begin(), a);
  breaks.push_back(b);
  Result<Scalar> out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto piece = gauss_kronrod(f, breaks[i], breaks[i + 1], rel_tol, abs_tol);
    out.value += piece.value;
    out.abs_error += piece.abs_error;
    out.evaluations += piece.evaluations;
    out.converged = out.converged && piece.converged;
  }
  return out;
}

/// Integral over [a, inf) of an integrand that decays at least exponentially.
/// Integrates successive chunks of doubling width and stops once the integrand
/// at a chunk end has fallen below `cutoff` times the largest value seen and
/// the chunk added nothing at the requested tolerance.
template <typename Scalar, typename F>
Result<Scalar> integrate_decaying(F&& f, Scalar a, Scalar first_width, Scalar rel_tol,
                                  Scalar cutoff = Scalar(1e-16), int max_chunks = 64) {
  using std::abs;
  Result<Scalar> out;
  Scalar peak = abs(f(a));
  Scalar lo = a;
  Scalar width = first_width;
  for (int chunk = 0; chunk < max_chunks; ++chunk) {
    const Scalar hi = lo + width;
    auto piece = gauss_kronrod(f, lo, hi, rel_tol, rel_tol * abs(out.value));
    out.value += piece.value;
    out.abs_error += piece.abs_error;
    out.evaluations += piece.evaluations + 1;
    out.converged = out.converged && piece.converged;
    const Scalar end_value = abs(f(hi));
    peak = std::max({peak, end_value, abs(piece.value) / width});
    if (end_value <= cutoff * peak && abs(piece.value) <= rel_tol * abs(out.value)) return out;
    lo = hi;
    width *= 2;
  }
  out.converged = false;
  return out;
}

}  // namespace srf::quad
