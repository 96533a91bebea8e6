#pragma once

// Scalar-generic kernel sums and intrinsic quadratic forms on flat row-major
// arrays (n points x d). Instantiated for double and Dual.

#include <cmath>
#include <type_traits>
#include <utility>
#include <vector>

#include "geomatch/dual.hpp"
#include "geomatch/error.hpp"

namespace geomatch::detail {

template <class T>
using Flat = std::vector<T>;

/// out_i = sum_j k(q_i, q_j) a_j.
template <class T>
Flat<T> kernel_apply(const Flat<T>& q, const Flat<T>& a, int n, int d, double sigma) {
  using std::exp;
  const double inv_s2 = 1.0 / (sigma * sigma);
  Flat<T> out(static_cast<std::size_t>(n) * d, T(0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      T r2(0.0);
      for (int c = 0; c < d; ++c) {
        const T diff = q[i * d + c] - q[j * d + c];
        r2 += diff * diff;
      }
      const T k = exp(-r2 * inv_s2);
      for (int c = 0; c < d; ++c) out[i * d + c] += k * a[j * d + c];
    }
  }
  return out;
}

/// Gradient in q of a^T K(q) b with a, b held fixed.
template <class T>
Flat<T> kernel_bilinear_grad_q(const Flat<T>& q, const Flat<T>& a, const Flat<T>& b, int n, int d,
                               double sigma) {
  using std::exp;
  const double inv_s2 = 1.0 / (sigma * sigma);
  Flat<T> out(static_cast<std::size_t>(n) * d, T(0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      T r2(0.0), ab(0.0);
      for (int c = 0; c < d; ++c) {
        const T diff = q[i * d + c] - q[j * d + c];
        r2 += diff * diff;
        ab += a[i * d + c] * b[j * d + c] + a[j * d + c] * b[i * d + c];
      }
      const T coef = -2.0 * inv_s2 * exp(-r2 * inv_s2) * ab;
      for (int c = 0; c < d; ++c) out[i * d + c] += coef * (q[i * d + c] - q[j * d + c]);
    }
  }
  return out;
}

enum class QuadVariant { full, tangential };

/// Discrete H^1 energy of a vertex field h on a curve (arity 2) or triangle
/// mesh (arity 3). Optional gradients in q and h are accumulated (+=).
template <class T>
T intrinsic_quadform_t(const Flat<T>& q, const Flat<T>& h, int d, const std::vector<int>& cells,
                       int arity, QuadVariant variant, Flat<T>* gq, Flat<T>* gh) {
  using std::sqrt;
  const int ns = static_cast<int>(cells.size()) / arity;
  T total(0.0);
  if (arity == 2) {
    for (int s = 0; s < ns; ++s) {
      const int i = cells[2 * s], j = cells[2 * s + 1];
      T e[3], dh[3];
      T len2(0.0);
      for (int c = 0; c < d; ++c) {
        e[c] = q[j * d + c] - q[i * d + c];
        dh[c] = h[j * d + c] - h[i * d + c];
        len2 += e[c] * e[c];
      }
      const T len = sqrt(len2);
      if (!(value_of(len) > 1e-14)) throw DegenerateSimplex(s, value_of(len));
      if (variant == QuadVariant::full) {
        T dh2(0.0);
        for (int c = 0; c < d; ++c) dh2 += dh[c] * dh[c];
        total += dh2 / len;
        for (int c = 0; c < d; ++c) {
          if (gh) {
            const T g = 2.0 * dh[c] / len;
            (*gh)[j * d + c] += g;
            (*gh)[i * d + c] -= g;
          }
          if (gq) {
            const T g = -dh2 / (len2 * len) * e[c];
            (*gq)[j * d + c] += g;
            (*gq)[i * d + c] -= g;
          }
        }
      } else {
        T proj(0.0);
        for (int c = 0; c < d; ++c) proj += dh[c] * e[c];
        const T len3 = len2 * len;
        total += proj * proj / len3;
        for (int c = 0; c < d; ++c) {
          if (gh) {
            const T g = 2.0 * proj * e[c] / len3;
            (*gh)[j * d + c] += g;
            (*gh)[i * d + c] -= g;
          }
          if (gq) {
            const T g = 2.0 * proj * dh[c] / len3 - 3.0 * proj * proj * e[c] / (len3 * len2);
            (*gq)[j * d + c] += g;
            (*gq)[i * d + c] -= g;
          }
        }
      }
    }
    return total;
  }

  for (int s = 0; s < ns; ++s) {
    const int vid[3] = {cells[3 * s], cells[3 * s + 1], cells[3 * s + 2]};
    T p[3][3], f[3][3], edge[3][3];
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        p[a][c] = q[vid[a] * 3 + c];
        f[a][c] = h[vid[a] * 3 + c];
      }
    }
    // Edge opposite to each vertex: i -> q_k - q_j, j -> q_i - q_k, k -> q_j - q_i.
    for (int c = 0; c < 3; ++c) {
      edge[0][c] = p[2][c] - p[1][c];
      edge[1][c] = p[0][c] - p[2][c];
      edge[2][c] = p[1][c] - p[0][c];
    }
    T m[3][3];
    T frob(0.0);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        m[r][c] = f[0][r] * edge[0][c] + f[1][r] * edge[1][c] + f[2][r] * edge[2][c];
        frob += m[r][c] * m[r][c];
      }
    }
    T e1[3], e2[3];
    for (int c = 0; c < 3; ++c) {
      e1[c] = p[1][c] - p[0][c];
      e2[c] = p[2][c] - p[0][c];
    }
    const T nrm[3] = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                      e1[0] * e2[1] - e1[1] * e2[0]};
    const T nn = sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]);
    if (!(0.5 * value_of(nn) > 1e-14)) throw DegenerateSimplex(s, 0.5 * value_of(nn));
    // 4 * area = 2 |n|.
    const T denom = 2.0 * nn;
    total += frob / denom;
    if (gh) {
      for (int a = 0; a < 3; ++a) {
        for (int r = 0; r < 3; ++r) {
          T acc(0.0);
          for (int c = 0; c < 3; ++c) acc += m[r][c] * edge[a][c];
          (*gh)[vid[a] * 3 + r] += 2.0 * acc / denom;
        }
      }
    }
    if (gq) {
      // M^T h_a for each vertex field.
      T mth[3][3];
      for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 3; ++c) {
          T acc(0.0);
          for (int r = 0; r < 3; ++r) acc += m[r][c] * f[a][r];
          mth[a][c] = acc;
        }
      }
      T u[3];
      for (int c = 0; c < 3; ++c) u[c] = nrm[c] / nn;
      // d|n|/dq_j = e2 x u, d|n|/dq_k = u x e1.
      const T dj[3] = {e2[1] * u[2] - e2[2] * u[1], e2[2] * u[0] - e2[0] * u[2],
                       e2[0] * u[1] - e2[1] * u[0]};
      const T dk[3] = {u[1] * e1[2] - u[2] * e1[1], u[2] * e1[0] - u[0] * e1[2],
                       u[0] * e1[1] - u[1] * e1[0]};
      const T scale_s = 1.0 / denom;
      const T scale_n = -2.0 * frob / (denom * denom);
      for (int c = 0; c < 3; ++c) {
        const T ds_i = 2.0 * (mth[1][c] - mth[2][c]);
        const T ds_j = 2.0 * (mth[2][c] - mth[0][c]);
        const T ds_k = 2.0 * (mth[0][c] - mth[1][c]);
        (*gq)[vid[0] * 3 + c] += scale_s * ds_i - scale_n * (dj[c] + dk[c]);
        (*gq)[vid[1] * 3 + c] += scale_s * ds_j + scale_n * dj[c];
        (*gq)[vid[2] * 3 + c] += scale_s * ds_k + scale_n * dk[c];
      }
    }
  }
  return total;
}

/// Solves A x = b in place by Gaussian elimination with partial pivoting
/// (pivot chosen on the value part). A is m x m row-major.
template <class T>
Flat<T> dense_solve(Flat<T> a, Flat<T> b, int m) {
  for (int col = 0; col < m; ++col) {
    int piv = col;
    double best = std::abs(value_of(a[col * m + col]));
    for (int r = col + 1; r < m; ++r) {
      const double cand = std::abs(value_of(a[r * m + col]));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (!(best > 0.0)) throw Error("singular momentum system in hybrid Hamiltonian");
    if (piv != col) {
      for (int c = 0; c < m; ++c) std::swap(a[col * m + c], a[piv * m + c]);
      std::swap(b[col], b[piv]);
    }
    const T inv = T(1.0) / a[col * m + col];
    for (int r = col + 1; r < m; ++r) {
      const T factor = a[r * m + col] * inv;
      if (value_of(factor) == 0.0 && std::is_same_v<T, double>) continue;
      for (int c = col; c < m; ++c) a[r * m + c] -= factor * a[col * m + c];
      b[r] -= factor * b[col];
    }
  }
  Flat<T> x(m, T(0.0));
  for (int r = m - 1; r >= 0; --r) {
    T acc = b[r];
    for (int c = r + 1; c < m; ++c) acc -= a[r * m + c] * x[c];
    x[r] = acc / a[r * m + r];
  }
  return x;
}

}  // namespace geomatch::detail
