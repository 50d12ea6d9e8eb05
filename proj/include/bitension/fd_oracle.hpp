#pragma once

// Finite-difference reference values for the jet pipeline. Central
// differences with one Richardson level (steps h and h/2) throughout.

#include <cmath>
#include <span>
#include <vector>

#include "bitension/chart.hpp"
#include "bitension/extrinsic.hpp"

namespace bitension::fd {

inline constexpr double kDefaultStep = 1e-4;

struct FdGeometry {
  Mat tangents;              // columns d_i phi
  std::vector<Vec> second;   // [i * m + j] = d_i d_j phi
  Mat metric;
  Mat christoffel_flat;      // row k, column i * m + j
  std::vector<Vec> B;        // [i * m + j], normal projection of d_i d_j phi
  Vec H;
};

namespace detail {

inline double stencil_margin(const ChartSpec& chart) { return 0.5 * chart.singular_margin; }

template <typename F>
auto richardson(F&& central, double h) {
  auto coarse = central(h);
  auto fine = central(0.5 * h);
  return ((4.0 * fine - coarse) / 3.0).eval();
}

inline Vec position(const ChartSpec& chart, std::vector<double> p) {
  return bitension::detail::to_vec(eval_point(chart, p, stencil_margin(chart)));
}

inline std::vector<double> shifted(std::span<const double> p, int i, double di, int j = -1, double dj = 0.0) {
  std::vector<double> q(p.begin(), p.end());
  q[i] += di;
  if (j >= 0) q[j] += dj;
  return q;
}

// Ambient projection onto the normal space of the immersion in S^n.
inline Vec normal_part(const Vec& v, const Vec& phi, const Mat& T, const Mat& ginv) {
  Vec out = v - v.dot(phi) * phi;
  out -= T * (ginv * (T.transpose() * v));
  return out;
}

}  // namespace detail

inline FdGeometry fd_geometry(const ChartSpec& chart, std::span<const double> point, double h = kDefaultStep) {
  using detail::position;
  using detail::shifted;
  const int m = chart.m;
  const Vec phi = position(chart, {point.begin(), point.end()});
  FdGeometry g;
  g.tangents.resize(phi.size(), m);
  for (int i = 0; i < m; ++i) {
    g.tangents.col(i) = detail::richardson(
        [&](double s) { return Vec((position(chart, shifted(point, i, s)) - position(chart, shifted(point, i, -s))) / (2 * s)); },
        h);
  }
  g.second.assign(m * m, Vec());
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      Vec d;
      if (i == j) {
        d = detail::richardson(
            [&](double s) {
              return Vec((position(chart, shifted(point, i, s)) - 2.0 * phi + position(chart, shifted(point, i, -s))) /
                         (s * s));
            },
            h);
      } else {
        d = detail::richardson(
            [&](double s) {
              return Vec((position(chart, shifted(point, i, s, j, s)) - position(chart, shifted(point, i, s, j, -s)) -
                          position(chart, shifted(point, i, -s, j, s)) + position(chart, shifted(point, i, -s, j, -s))) /
                         (4 * s * s));
            },
            h);
      }
      g.second[i * m + j] = d;
      g.second[j * m + i] = d;
    }
  }
  g.metric = g.tangents.transpose() * g.tangents;
  const Mat ginv = g.metric.inverse();
  // Gamma^k_ij = g^{kl} <d_i d_j phi, d_l phi> for a metric induced from Euclidean space.
  g.christoffel_flat.resize(m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g.christoffel_flat.col(i * m + j) = ginv * (g.tangents.transpose() * g.second[i * m + j]);
  g.B.resize(m * m);
  g.H = Vec::Zero(phi.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      g.B[i * m + j] = detail::normal_part(g.second[i * m + j], phi, g.tangents, ginv);
      g.H += ginv(i, j) * g.B[i * m + j] / m;
    }
  return g;
}

/// Laplacian (positive-spectrum convention) of the mean curvature function
/// f = <H, eta> in divergence form, -(1/sqrt g) d_i (sqrt g g^ij d_j f):
/// one central difference of the flux assembled from jet values at stencil
/// points, normal sign aligned with the centre.
inline double fd_laplacian_f(const ChartSpec& chart, std::span<const double> point, double h = kDefaultStep) {
  if (chart.n != chart.m + 1) throw GeometryError("mean curvature function needs a hypersurface");
  const int m = chart.m;
  const double margin = detail::stencil_margin(chart);
  const PointGeometry centre = compute_geometry(chart, point, margin);
  const Vec eta0 = centre.hypersurface->eta;
  auto flux = [&](std::vector<double> p) -> Vec {
    const PointGeometry geo = compute_geometry(chart, p, margin);
    const double sign = geo.hypersurface->eta.dot(eta0) >= 0 ? 1.0 : -1.0;
    const Vec df = sign * (geo.coord_tangents.transpose() * geo.hypersurface->grad_f);
    return std::sqrt(geo.metric.g.determinant()) * geo.metric.g.ldlt().solve(df);
  };
  using detail::shifted;
  auto scalar = [](double v) { return Eigen::Matrix<double, 1, 1>(v); };
  double div = 0.0;
  for (int i = 0; i < m; ++i) {
    div += detail::richardson(
        [&](double s) { return scalar((flux(shifted(point, i, s))[i] - flux(shifted(point, i, -s))[i]) / (2 * s)); },
        h)(0);
  }
  return -div / std::sqrt(centre.metric.g.determinant());
}

/// Columns nabla^perp_{d_i} H (coordinate directions) from jet values of H
/// at stencil points.
inline Mat fd_nabla_perp_H(const ChartSpec& chart, std::span<const double> point, double h = kDefaultStep) {
  const int m = chart.m;
  const PointGeometry centre = compute_geometry(chart, point, detail::stencil_margin(chart));
  auto H_at = [&](std::vector<double> p) { return compute_geometry(chart, p, detail::stencil_margin(chart)).H; };
  const Mat ginv = centre.metric.g.inverse();
  Mat out(centre.phi.size(), m);
  for (int i = 0; i < m; ++i) {
    const Vec dH = detail::richardson(
        [&](double s) {
          return Vec((H_at(detail::shifted(point, i, s)) - H_at(detail::shifted(point, i, -s))) / (2 * s));
        },
        h);
    out.col(i) = detail::normal_part(dH, centre.phi, centre.coord_tangents, ginv);
  }
  return out;
}

/// Covariant derivative of the scalar second fundamental form h_jk =
/// <B(d_j, d_k), eta> in coordinates, index order (i, j, k) = nabla_i h_jk.
inline std::vector<double> fd_nabla_A(const ChartSpec& chart, std::span<const double> point,
                                      double h = kDefaultStep) {
  if (chart.n != chart.m + 1) throw GeometryError("nabla A needs a hypersurface");
  const int m = chart.m;
  const PointGeometry centre = compute_geometry(chart, point, detail::stencil_margin(chart));
  const Vec eta0 = centre.hypersurface->eta;
  auto h_at = [&](std::vector<double> p) {
    const PointGeometry geo = compute_geometry(chart, p, detail::stencil_margin(chart));
    const double sign = geo.hypersurface->eta.dot(eta0) >= 0 ? 1.0 : -1.0;
    Vec out(m * m);
    for (int k = 0; k < m * m; ++k) out[k] = sign * geo.second_form_coords[k].dot(geo.hypersurface->eta);
    return out;
  };
  Vec h0(m * m);
  for (int k = 0; k < m * m; ++k) h0[k] = centre.second_form_coords[k].dot(eta0);
  const FdGeometry g = fd_geometry(chart, point, h);
  std::vector<double> out(m * m * m);
  for (int i = 0; i < m; ++i) {
    const Vec dh = detail::richardson(
        [&](double s) {
          return Vec((h_at(detail::shifted(point, i, s)) - h_at(detail::shifted(point, i, -s))) / (2 * s));
        },
        h);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double v = dh[j * m + k];
        for (int l = 0; l < m; ++l) {
          v -= g.christoffel_flat(l, i * m + j) * h0[l * m + k] + g.christoffel_flat(l, i * m + k) * h0[j * m + l];
        }
        out[(i * m + j) * m + k] = v;
      }
  }
  return out;
}

}  // namespace bitension::fd
