#pragma once

// Extrinsic and intrinsic geometry of a chart at one point.
//
// All quantities are assembled from the order-4 jets of phi. Ambient
// vectors live in R^{n+1}. The unit-sphere connection is realized in
// ambient coordinates as D_X Y + <X, Y> phi, Laplacians use the sign
// convention Delta = -trace nabla^2, and the curvature operator is
// R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y].

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bitension/chart.hpp"
#include "bitension/error.hpp"
#include "bitension/jet.hpp"

namespace bitension {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Degree-2 Taylor data of the induced metric in chart coordinates.
struct MetricJet {
  Mat g;
  std::vector<Mat> dg;                // dg[p](i, j) = d_p g_ij
  std::vector<std::vector<Mat>> ddg;  // ddg[p][q](i, j) = d_p d_q g_ij
};

struct HypersurfaceData {
  Vec eta;  // unit normal chosen by Gram-Schmidt
  double f = 0.0;
  Vec grad_f;
  double laplacian_f = 0.0;
  // <(nabla_{e_i} A)(e_j), e_k> at index (i * m + j) * m + k
  std::vector<double> nabla_A;

  double nabla_A_at(int m, int i, int j, int k) const { return nabla_A[(i * m + j) * m + k]; }
};

struct PointGeometry {
  std::vector<double> point;
  int m = 0;
  int n = 0;
  Vec phi;
  MetricJet metric;
  Mat christoffel_flat;  // row k, column i * m + j: Gamma^k_ij
  Mat coord_tangents;    // columns d_i phi
  Mat tangent_frame;     // columns e_a, orthonormal
  Mat frame_coeffs;      // e_a = sum_i frame_coeffs(a, i) d_i phi
  Mat normal_frame;      // columns xi_alpha
  std::vector<Mat> second_form;       // [alpha](a, b) = <B(e_a, e_b), xi_alpha>
  std::vector<Vec> second_form_coords;  // [i * m + j] = B(d_i, d_j)
  Vec H;
  double H_norm = 0.0;
  double B_norm2 = 0.0;
  double A_norm2 = 0.0;
  Vec laplacian_H;         // rough Laplacian in phi^{-1} T S^n
  Vec normal_laplacian_H;  // Laplacian of the normal connection
  Mat nabla_perp_H;        // columns nabla^perp_{e_a} H
  Vec grad_H2;             // grad |H|^2 as an ambient vector
  std::optional<HypersurfaceData> hypersurface;

  int codim() const { return n - m; }

  /// A_xi in the tangent frame: <A_xi e_a, e_b> = <B(e_a, e_b), xi>.
  Mat shape_operator(const Vec& xi) const {
    Mat A = Mat::Zero(m, m);
    for (int a = 0; a < codim(); ++a) A += xi.dot(normal_frame.col(a)) * second_form[a];
    return A;
  }

  Mat A_H() const { return shape_operator(H); }

  /// B(e_a, e_b) as an ambient vector.
  Vec B(int a, int b) const {
    Vec v = Vec::Zero(n + 1);
    for (int k = 0; k < codim(); ++k) v += second_form[k](a, b) * normal_frame.col(k);
    return v;
  }

  /// Tangent vector with frame components c.
  Vec tangent(const Vec& c) const { return tangent_frame * c; }
};

struct IntrinsicCurvature {
  int m = 0;
  std::vector<double> riemann;  // <R(e_a, e_b) e_d, e_c> at ((a * m + b) * m + c) * m + d
  Mat ricci;
  double scalar = 0.0;
  Mat sectional;

  double operator()(int a, int b, int c, int d) const { return riemann[((a * m + b) * m + c) * m + d]; }
};

namespace detail {

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), v.size()); }

template <int M>
Vec values(const std::vector<Jet<M>>& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

template <int M>
std::vector<Jet<M>> derivative(const std::vector<Jet<M>>& v, int var) {
  std::vector<Jet<M>> out;
  out.reserve(v.size());
  for (const auto& c : v) out.push_back(c.derivative(var));
  return out;
}

// Modified Gram-Schmidt with column pivoting on the columns of `cols`.
// Returns the chosen orthonormal vectors and the coefficient rows expressing
// each in terms of the original columns.
inline void pivoted_gram_schmidt(const Mat& cols, int count, double tol, Mat& basis, Mat& coeffs,
                                 const char* what) {
  const int k = static_cast<int>(cols.cols());
  Mat work = cols;
  Mat comb = Mat::Identity(k, k);
  std::vector<bool> used(k, false);
  basis.resize(cols.rows(), count);
  coeffs.resize(count, k);
  for (int s = 0; s < count; ++s) {
    int best = -1;
    double best_norm = -1.0;
    for (int j = 0; j < k; ++j) {
      if (used[j]) continue;
      const double nj = work.col(j).norm();
      if (nj > best_norm) {
        best_norm = nj;
        best = j;
      }
    }
    if (best < 0 || best_norm < tol) {
      throw GeometryError(std::string("degenerate ") + what + " during Gram-Schmidt");
    }
    used[best] = true;
    const Vec q = work.col(best) / best_norm;
    const Vec qc = comb.col(best) / best_norm;
    basis.col(s) = q;
    coeffs.row(s) = qc.transpose();
    for (int j = 0; j < k; ++j) {
      if (used[j]) continue;
      const double d = q.dot(work.col(j));
      work.col(j) -= d * q;
      comb.col(j) -= d * qc;
    }
  }
}

template <int M>
PointGeometry compute_geometry_impl(const ChartSpec& chart, std::span<const double> point,
                                    std::optional<double> margin) {
  using J = Jet<M>;
  using JVec = std::vector<J>;
  const int D = chart.n + 1;
  const int n = chart.n;

  const JVec phi = eval_jet<M>(chart, point, margin);

  // |phi|^2 = 1 must hold as a jet, not only at the point.
  {
    const J norm2 = dot(phi, phi) - 1.0;
    double scale = 0.0;
    for (const auto& c : phi) {
      double s = 0.0;
      for (double x : c.coefficients()) s += std::abs(x);
      scale += s * s;
    }
    for (double x : norm2.coefficients()) {
      if (std::abs(x) > chart.sphere_tol * (1.0 + scale)) {
        throw ChartError("chart does not stay on the unit sphere near " + format_point(point));
      }
    }
  }

  std::array<JVec, M> dphi;
  for (int i = 0; i < M; ++i) dphi[i] = derivative(phi, i);

  std::array<std::array<J, M>, M> g;
  for (int i = 0; i < M; ++i) {
    for (int j = i; j < M; ++j) {
      g[i][j] = dot(dphi[i], dphi[j]);
      g[j][i] = g[i][j];
    }
  }

  Mat g0(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) g0(i, j) = g[i][j].value();
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(g0, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > chart.rank_tol * lmax)) {
      throw GeometryError("rank deficiency of dphi at " + format_point(point));
    }
    if (lmax / lmin > 1e10) {
      throw GeometryError("ill-conditioned metric at " + format_point(point));
    }
  }

  // Inverse metric as jets (Gauss-Jordan; g is positive definite).
  std::array<std::array<J, M>, M> ginv;
  {
    auto a = g;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) ginv[i][j] = J(i == j ? 1.0 : 0.0);
    for (int c = 0; c < M; ++c) {
      const J piv = recip(a[c][c]);
      for (int j = 0; j < M; ++j) {
        a[c][j] = a[c][j] * piv;
        ginv[c][j] = ginv[c][j] * piv;
      }
      for (int r = 0; r < M; ++r) {
        if (r == c) continue;
        const J f = a[r][c];
        for (int j = 0; j < M; ++j) {
          a[r][j] -= f * a[c][j];
          ginv[r][j] -= f * ginv[c][j];
        }
      }
    }
  }
  Mat ginv0(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) ginv0(i, j) = ginv[i][j].value();

  PointGeometry geo;
  geo.point.assign(point.begin(), point.end());
  geo.m = M;
  geo.n = n;
  geo.phi = values(phi);

  geo.metric.g = g0;
  geo.metric.dg.assign(M, Mat(M, M));
  geo.metric.ddg.assign(M, std::vector<Mat>(M, Mat(M, M)));
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      for (int p = 0; p < M; ++p) {
        const J d = g[i][j].derivative(p);
        geo.metric.dg[p](i, j) = d.value();
        for (int q = 0; q < M; ++q) geo.metric.ddg[p][q](i, j) = d.derivative(q).value();
      }
    }
  }

  // Christoffel symbols at the point: Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij).
  Mat gamma(M, M * M);
  for (int k = 0; k < M; ++k) {
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        double s = 0.0;
        for (int l = 0; l < M; ++l) {
          s += ginv0(k, l) *
               (geo.metric.dg[i](j, l) + geo.metric.dg[j](i, l) - geo.metric.dg[l](i, j));
        }
        gamma(k, i * M + j) = 0.5 * s;
      }
    }
  }
  geo.christoffel_flat = gamma;

  Mat T0(D, M);
  for (int i = 0; i < M; ++i) T0.col(i) = values(dphi[i]);
  geo.coord_tangents = T0;

  // Projection onto the normal space of M in S^n.
  auto project = [&](const JVec& v) {
    const J c_phi = dot(v, phi);
    std::array<J, M> t;
    for (int b = 0; b < M; ++b) t[b] = dot(dphi[b], v);
    JVec out = v;
    for (int k = 0; k < D; ++k) out[k] -= c_phi * phi[k];
    for (int a = 0; a < M; ++a) {
      J s;
      for (int b = 0; b < M; ++b) s += ginv[a][b] * t[b];
      for (int k = 0; k < D; ++k) out[k] -= s * dphi[a][k];
    }
    return out;
  };
  const Mat P0 = Mat::Identity(D, D) - geo.phi * geo.phi.transpose() - T0 * ginv0 * T0.transpose();

  // Second fundamental form B(d_i, d_j) = normal part of d_i d_j phi.
  std::array<std::array<JVec, M>, M> B;
  for (int i = 0; i < M; ++i) {
    for (int j = i; j < M; ++j) {
      B[i][j] = project(derivative(dphi[i], j));
      B[j][i] = B[i][j];
    }
  }
  geo.second_form_coords.resize(M * M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) geo.second_form_coords[i * M + j] = values(B[i][j]);

  JVec H(D, J(0.0));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < D; ++k) H[k] += ginv[i][j] * B[i][j][k];
  for (auto& h : H) h /= static_cast<double>(M);
  geo.H = values(H);
  geo.H_norm = geo.H.norm();

  // Orthonormal tangent frame.
  {
    Mat basis;
    Mat coeffs;
    pivoted_gram_schmidt(T0, M, 1e-12, basis, coeffs, "tangent frame");
    geo.tangent_frame = basis;
    geo.frame_coeffs = coeffs;
  }
  const Mat& E = geo.frame_coeffs;

  // Normal frame as jets: pivoted Gram-Schmidt on the projected ambient
  // basis, with pivots chosen from degree-0 norms.
  const int codim = n - M;
  std::vector<JVec> normal_jets;
  {
    std::vector<JVec> cand;
    for (int k = 0; k < D; ++k) {
      JVec ek(D, J(0.0));
      ek[k] = J(1.0);
      cand.push_back(project(ek));
    }
    std::vector<bool> used(D, false);
    for (int s = 0; s < codim; ++s) {
      int best = -1;
      double best_norm = -1.0;
      for (int k = 0; k < D; ++k) {
        if (used[k]) continue;
        const double nk = std::sqrt(dot(cand[k], cand[k]).value());
        if (nk > best_norm) {
          best_norm = nk;
          best = k;
        }
      }
      if (best < 0 || best_norm < 1e-8) {
        throw GeometryError("degenerate normal complement at " + format_point(point));
      }
      used[best] = true;
      const J inv = recip(sqrt(dot(cand[best], cand[best])));
      JVec xi = cand[best];
      for (auto& c : xi) c = c * inv;
      for (int k = 0; k < D; ++k) {
        if (used[k]) continue;
        const J d = dot(cand[k], xi);
        for (int l = 0; l < D; ++l) cand[k][l] -= d * xi[l];
      }
      normal_jets.push_back(std::move(xi));
    }
  }
  geo.normal_frame.resize(D, codim);
  for (int a = 0; a < codim; ++a) geo.normal_frame.col(a) = values(normal_jets[a]);

  geo.second_form.assign(codim, Mat::Zero(M, M));
  for (int al = 0; al < codim; ++al) {
    Mat coord(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) coord(i, j) = geo.second_form_coords[i * M + j].dot(geo.normal_frame.col(al));
    geo.second_form[al] = E * coord * E.transpose();
  }
  geo.B_norm2 = 0.0;
  for (const auto& b : geo.second_form) geo.B_norm2 += b.squaredNorm();
  geo.A_norm2 = geo.B_norm2;

  // Rough Laplacian of H in the pull-back of the sphere connection.
  std::array<JVec, M> W;
  for (int j = 0; j < M; ++j) {
    W[j] = derivative(H, j);
    const J c = dot(dphi[j], H);
    for (int k = 0; k < D; ++k) W[j][k] += c * phi[k];
  }
  {
    Vec lap = Vec::Zero(D);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        Vec nab = values(derivative(W[j], i));
        nab += T0.col(i).dot(values(W[j])) * geo.phi;
        for (int k = 0; k < M; ++k) nab -= gamma(k, i * M + j) * values(W[k]);
        lap -= ginv0(i, j) * nab;
      }
    }
    geo.laplacian_H = lap;
  }

  // Normal connection and its Laplacian.
  std::array<JVec, M> NH;
  for (int j = 0; j < M; ++j) NH[j] = project(derivative(H, j));
  {
    Vec lap = Vec::Zero(D);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        Vec nab = P0 * values(derivative(NH[j], i));
        for (int k = 0; k < M; ++k) nab -= gamma(k, i * M + j) * values(NH[k]);
        lap -= ginv0(i, j) * nab;
      }
    }
    geo.normal_laplacian_H = lap;
    Mat coordNH(D, M);
    for (int i = 0; i < M; ++i) coordNH.col(i) = values(NH[i]);
    geo.nabla_perp_H = coordNH * E.transpose();
  }

  {
    const J h2 = dot(H, H);
    Vec dh2(M);
    for (int k = 0; k < M; ++k) dh2[k] = h2.derivative(k).value();
    geo.grad_H2 = T0 * (ginv0 * dh2);
  }

  if (codim == 1) {
    HypersurfaceData hs;
    const JVec& eta = normal_jets[0];
    hs.eta = values(eta);
    const J f = dot(H, eta);
    hs.f = f.value();
    Vec df(M);
    for (int k = 0; k < M; ++k) df[k] = f.derivative(k).value();
    hs.grad_f = T0 * (ginv0 * df);
    double lap = 0.0;
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        double hess = f.derivative(i).derivative(j).value();
        for (int k = 0; k < M; ++k) hess -= gamma(k, i * M + j) * df[k];
        lap -= ginv0(i, j) * hess;
      }
    }
    hs.laplacian_f = lap;

    // nabla_i h_jk = d_i h_jk - Gamma^l_ij h_lk - Gamma^l_ik h_jl, h_jk = <B_jk, eta>.
    std::vector<double> h0(M * M);
    std::vector<double> dh(M * M * M);
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < M; ++k) {
        const J hjk = dot(B[j][k], eta);
        h0[j * M + k] = hjk.value();
        for (int i = 0; i < M; ++i) dh[(i * M + j) * M + k] = hjk.derivative(i).value();
      }
    }
    std::vector<double> cov(M * M * M);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        for (int k = 0; k < M; ++k) {
          double s = dh[(i * M + j) * M + k];
          for (int l = 0; l < M; ++l) {
            s -= gamma(l, i * M + j) * h0[l * M + k] + gamma(l, i * M + k) * h0[j * M + l];
          }
          cov[(i * M + j) * M + k] = s;
        }
      }
    }
    hs.nabla_A.assign(M * M * M, 0.0);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b)
        for (int c = 0; c < M; ++c) {
          double s = 0.0;
          for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
              for (int k = 0; k < M; ++k) s += E(a, i) * E(b, j) * E(c, k) * cov[(i * M + j) * M + k];
          hs.nabla_A[(a * M + b) * M + c] = s;
        }
    geo.hypersurface = std::move(hs);
  }
  return geo;
}

}  // namespace detail

/// Full extrinsic package of `chart` at `point`.
inline PointGeometry compute_geometry(const ChartSpec& chart, std::span<const double> point,
                                      std::optional<double> margin = std::nullopt) {
  switch (chart.m) {
    case 1: return detail::compute_geometry_impl<1>(chart, point, margin);
    case 2: return detail::compute_geometry_impl<2>(chart, point, margin);
    case 3: return detail::compute_geometry_impl<3>(chart, point, margin);
    case 4: return detail::compute_geometry_impl<4>(chart, point, margin);
    case 5: return detail::compute_geometry_impl<5>(chart, point, margin);
    case 6: return detail::compute_geometry_impl<6>(chart, point, margin);
    default: throw ChartError("unsupported domain dimension " + std::to_string(chart.m));
  }
}

inline PointGeometry compute_geometry(const ChartSpec& chart, const std::vector<double>& point) {
  return compute_geometry(chart, std::span<const double>(point));
}

/// Riemann, Ricci, scalar and sectional curvature from the metric 2-jet.
inline IntrinsicCurvature intrinsic_curvature(const PointGeometry& geo) {
  const int m = geo.m;
  const MetricJet& mj = geo.metric;
  Eigen::LDLT<Mat> ldlt(mj.g);
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(mj.g, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() > 1e10) {
      throw GeometryError("metric inversion ill-conditioned");
    }
  }
  const Mat ginv = ldlt.solve(Mat::Identity(m, m));
  auto idx3 = [m](int a, int b, int c) { return (a * m + b) * m + c; };

  // S_ijl = d_i g_jl + d_j g_il - d_l g_ij and its derivatives.
  std::vector<double> S(m * m * m);
  std::vector<double> dS(m * m * m * m);  // [p][i][j][l]
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) {
        S[idx3(i, j, l)] = mj.dg[i](j, l) + mj.dg[j](i, l) - mj.dg[l](i, j);
        for (int p = 0; p < m; ++p) {
          dS[p * m * m * m + idx3(i, j, l)] =
              mj.ddg[p][i](j, l) + mj.ddg[p][j](i, l) - mj.ddg[p][l](i, j);
        }
      }
  std::vector<Mat> dginv(m);
  for (int p = 0; p < m; ++p) dginv[p] = -ginv * mj.dg[p] * ginv;

  std::vector<double> gam(m * m * m);       // [k][i][j]
  std::vector<double> dgam(m * m * m * m);  // [p][k][i][j]
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int l = 0; l < m; ++l) s += ginv(k, l) * S[idx3(i, j, l)];
        gam[idx3(k, i, j)] = 0.5 * s;
        for (int p = 0; p < m; ++p) {
          double d = 0.0;
          for (int l = 0; l < m; ++l) {
            d += dginv[p](k, l) * S[idx3(i, j, l)] + ginv(k, l) * dS[p * m * m * m + idx3(i, j, l)];
          }
          dgam[p * m * m * m + idx3(k, i, j)] = 0.5 * d;
        }
      }

  // Rm(i, j, k, l) = <R(d_i, d_j) d_k, d_l>.
  const int m4 = m * m * m * m;
  std::vector<double> Rup(m4);  // [l][i][j][k] coefficient of d_l in R(d_i, d_j) d_k
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          double r = dgam[i * m * m * m + idx3(l, j, k)] - dgam[j * m * m * m + idx3(l, i, k)];
          for (int p = 0; p < m; ++p) {
            r += gam[idx3(p, j, k)] * gam[idx3(l, i, p)] - gam[idx3(p, i, k)] * gam[idx3(l, j, p)];
          }
          Rup[l * m * m * m + idx3(i, j, k)] = r;
        }
  std::vector<double> Rm(m4, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = 0.0;
          for (int q = 0; q < m; ++q) s += mj.g(l, q) * Rup[q * m * m * m + idx3(i, j, k)];
          Rm[((i * m + j) * m + k) * m + l] = s;
        }

  // Change to the orthonormal frame one slot at a time.
  const Mat& E = geo.frame_coeffs;
  std::vector<double> cur = Rm;
  for (int slot = 0; slot < 4; ++slot) {
    std::vector<double> next(m4, 0.0);
    int stride = 1;
    for (int s = slot + 1; s < 4; ++s) stride *= m;
    for (int flat = 0; flat < m4; ++flat) {
      const int a = (flat / stride) % m;
      const int base = flat - a * stride;
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += E(a, i) * cur[base + i * stride];
      next[flat] = s;
    }
    cur = std::move(next);
  }

  IntrinsicCurvature ic;
  ic.m = m;
  ic.riemann.assign(m4, 0.0);
  // riemann(a, b, c, d) = <R(e_a, e_b) e_d, e_c> = Rm_frame(a, b, d, c)
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) ic.riemann[((a * m + b) * m + c) * m + d] = cur[((a * m + b) * m + d) * m + c];
  ic.ricci = Mat::Zero(m, m);
  ic.sectional = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) ic.ricci(a, b) += ic(c, a, c, b);
      ic.sectional(a, b) = a == b ? 0.0 : ic(a, b, a, b);
    }
  ic.scalar = ic.ricci.trace();
  return ic;
}

/// Gauss equation for hypersurfaces of S^{m+1}:
/// ricci(X, Y) = (m - 1) <X, Y> + <A X, Y> trace A - <A X, A Y>.
inline double gauss_ricci_check(const PointGeometry& geo) {
  if (!geo.hypersurface) throw GeometryError("Gauss-Ricci identity needs a hypersurface");
  const int m = geo.m;
  const IntrinsicCurvature ic = intrinsic_curvature(geo);
  const Mat& A = geo.second_form[0];
  const Mat predicted = (m - 1.0) * Mat::Identity(m, m) + A * A.trace() - A * A;
  return (ic.ricci - predicted).cwiseAbs().maxCoeff();
}

struct NablaASymmetry {
  double sym_residual = 0.0;
  double trace_residual = 0.0;
};

/// Total symmetry of <(nabla A)(., .), .> and trace(nabla A) = m grad f.
inline NablaASymmetry nabla_A_symmetry_check(const PointGeometry& geo) {
  if (!geo.hypersurface) throw GeometryError("nabla A symmetry needs a hypersurface");
  const int m = geo.m;
  const auto& hs = *geo.hypersurface;
  NablaASymmetry r;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double t = hs.nabla_A_at(m, i, j, k);
        for (double other : {hs.nabla_A_at(m, j, i, k), hs.nabla_A_at(m, i, k, j), hs.nabla_A_at(m, k, j, i),
                             hs.nabla_A_at(m, j, k, i), hs.nabla_A_at(m, k, i, j)}) {
          r.sym_residual = std::max(r.sym_residual, std::abs(t - other));
        }
      }
  const Vec grad_frame = geo.tangent_frame.transpose() * hs.grad_f;
  Vec diff(m);
  for (int c = 0; c < m; ++c) {
    double s = 0.0;
    for (int a = 0; a < m; ++a) s += hs.nabla_A_at(m, a, a, c);
    diff[c] = s - m * grad_frame[c];
  }
  r.trace_residual = diff.norm();
  return r;
}

/// |H|^2 |B|^2 - |A_H|^2, non-negative for every immersion.
inline double ah_bound_slack(const PointGeometry& geo) {
  return geo.H_norm * geo.H_norm * geo.B_norm2 - geo.A_H().squaredNorm();
}

}  // namespace bitension
