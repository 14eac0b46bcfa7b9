#include "spinmap/dynmap.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spinmap/errors.hpp"

namespace spinmap::dynmap {

Eigen::VectorXcd vec_rho(const Eigen::MatrixXcd& rho) {
  const Eigen::Index n = rho.rows();
  Eigen::VectorXcd v(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) v(i * n + j) = rho(i, j);
  return v;
}

Eigen::MatrixXcd unvec_rho(const Eigen::VectorXcd& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * n)
    throw std::invalid_argument("unvec_rho: length is not n^2");
  Eigen::MatrixXcd rho(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rho(i, j) = v(i * n + j);
  return rho;
}

Eigen::MatrixXcd apply_map(const Eigen::MatrixXcd& phi, const Eigen::MatrixXcd& rho) {
  const int n = static_cast<int>(rho.rows());
  if (phi.rows() != phi.cols() || phi.rows() != static_cast<Eigen::Index>(n) * n)
    throw std::invalid_argument("apply_map: map and state dimensions do not match");
  return unvec_rho(phi * vec_rho(rho), n);
}

double trace_preservation_defect(const Eigen::MatrixXcd& phi, int n) {
  double worst = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      std::complex<double> sum = 0.0;
      for (int i = 0; i < n; ++i) sum += phi(i * n + i, k * n + l);
      if (k == l) sum -= 1.0;
      worst = std::max(worst, std::abs(sum));
    }
  return worst;
}

double hermiticity_defect(const Eigen::MatrixXcd& phi, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          worst = std::max(worst, std::abs(phi(i * n + j, k * n + l) -
                                           std::conj(phi(j * n + i, l * n + k))));
  return worst;
}

MapTensor reconstruct_map(const std::vector<propagator::Trajectory>& basis, double cond_limit) {
  if (basis.size() < 4)
    throw AnalysisError("reconstruct_map: need the four basis trajectories (up, down, +x, +y)");
  const auto& grid = basis[0].t;
  if (grid.empty() || grid.front() != 0.0)
    throw AnalysisError("reconstruct_map: trajectories must start at t = 0");
  for (int k = 1; k < 4; ++k)
    if (basis[static_cast<std::size_t>(k)].t != grid)
      throw AnalysisError("reconstruct_map: basis trajectories must share one time grid");

  Eigen::Matrix4cd x;
  for (int k = 0; k < 4; ++k)
    x.col(k) = vec_rho(basis[static_cast<std::size_t>(k)].rho.front());
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(x);
  const double cond = svd.singularValues()(0) / svd.singularValues()(3);
  if (!(cond < cond_limit))
    throw AnalysisError("reconstruct_map: initial states are too close to linearly dependent "
                        "(condition number " + std::to_string(cond) + ")");
  const Eigen::Matrix4cd x_inv = x.inverse();

  MapTensor maps;
  maps.dim = 2;
  maps.t = grid;
  maps.phi.reserve(grid.size());
  Eigen::Matrix4cd y;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    for (int k = 0; k < 4; ++k) y.col(k) = vec_rho(basis[static_cast<std::size_t>(k)].rho[s]);
    maps.phi.emplace_back(y * x_inv);
  }
  return maps;
}

AffineBlochMap tensor_to_affine(const MapTensor& maps, double tp_tol) {
  const int n = maps.dim;
  const bloch::GeneratorSet gens(n);
  const int d = static_cast<int>(gens.size());

  AffineBlochMap out;
  out.dim = n;
  out.t = maps.t;
  out.m.reserve(maps.phi.size());
  out.b.reserve(maps.phi.size());

  const Eigen::MatrixXcd id_over_n =
      Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n);
  for (std::size_t s = 0; s < maps.phi.size(); ++s) {
    const auto& phi = maps.phi[s];
    const double tp = trace_preservation_defect(phi, n);
    if (tp > tp_tol)
      throw AnalysisError("tensor_to_affine: map at t = " + std::to_string(maps.t[s]) +
                          " violates trace preservation (defect " + std::to_string(tp) + ")");
    Eigen::MatrixXd m(d, d);
    Eigen::VectorXd b(d);
    const Eigen::MatrixXcd image_id = apply_map(phi, id_over_n);
    for (int r = 0; r < d; ++r)
      b(r) = (gens[static_cast<std::size_t>(r)] * image_id).trace().real();
    for (int c = 0; c < d; ++c) {
      const Eigen::MatrixXcd image = apply_map(phi, gens[static_cast<std::size_t>(c)]);
      for (int r = 0; r < d; ++r)
        m(r, c) = 0.5 * (gens[static_cast<std::size_t>(r)] * image).trace().real();
    }
    out.m.push_back(std::move(m));
    out.b.push_back(std::move(b));
  }
  return out;
}

SvdSeries svd_series(const AffineBlochMap& affine) {
  SvdSeries out;
  out.dim = affine.dim;
  out.t = affine.t;
  out.b = affine.b;
  out.s.reserve(affine.m.size());
  out.v.reserve(affine.m.size());
  out.w.reserve(affine.m.size());
  for (std::size_t k = 0; k < affine.m.size(); ++k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(affine.m[k],
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd s = svd.singularValues();
    Eigen::MatrixXd v = svd.matrixU();
    Eigen::MatrixXd w = svd.matrixV();
    if (k > 0) {
      // Keep the factor series continuous: flip any singular pair whose direction
      // reversed relative to the previous sample.
      const Eigen::MatrixXd& v_prev = out.v.back();
      for (Eigen::Index j = 0; j < v.cols(); ++j)
        if (v_prev.col(j).dot(v.col(j)) < 0.0) {
          v.col(j) *= -1.0;
          w.col(j) *= -1.0;
        }
    }
    out.s.push_back(std::move(s));
    out.v.push_back(std::move(v));
    out.w.push_back(std::move(w));
  }
  return out;
}

std::vector<double> delta_observable(const propagator::Trajectory& t1,
                                     const propagator::Trajectory& t2,
                                     const bloch::Observable& o) {
  if (t1.t != t2.t)
    throw AnalysisError("delta_observable: trajectories must share one time grid");
  if (o.dim() != 2)
    throw std::invalid_argument("delta_observable: expected a spin observable");
  std::vector<double> out;
  out.reserve(t1.t.size());
  for (std::size_t k = 0; k < t1.t.size(); ++k)
    out.push_back(std::abs((o.matrix() * (t1.rho[k] - t2.rho[k])).trace().real()));
  return out;
}

BoundReport bound_check(const SvdSeries& svd, const Eigen::VectorXd& a1,
                        const Eigen::VectorXd& a2, const bloch::Observable& o,
                        const std::vector<double>& delta, double slack) {
  if (delta.size() != svd.t.size())
    throw AnalysisError("bound_check: delta series and SVD series lengths differ");
  const int n = svd.dim;
  const double norm_da = (a1 - a2).norm();
  const double general_coeff =
      std::pow(static_cast<double>(n), 1.5) / std::sqrt(2.0) * o.max_abs_eigenvalue() * norm_da;

  // Generator coordinates of the observable for the Cauchy-Schwarz (sharp) variant.
  const bloch::GeneratorSet gens(n);
  double o_vec_sq = 0.0;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const double c = (gens[k] * o.matrix()).trace().real();
    o_vec_sq += c * c;
  }
  const double sharp_coeff = 0.5 * std::sqrt(o_vec_sq) * norm_da;

  BoundReport rep;
  rep.t = svd.t;
  rep.delta = delta;
  rep.bound_general.reserve(delta.size());
  rep.bound_sharp.reserve(delta.size());
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_idx = 0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double s_max = svd.s_max(k);
    rep.bound_general.push_back(general_coeff * s_max);
    rep.bound_sharp.push_back(sharp_coeff * s_max);
    const double margin = rep.bound_general.back() - delta[k];
    if (margin < worst) {
      worst = margin;
      worst_idx = k;
    }
  }
  rep.worst_margin = worst;
  if (worst < -slack)
    throw AnalysisError("bound_check: bound violated at t = " + std::to_string(svd.t[worst_idx]) +
                        " by " + std::to_string(-worst) +
                        " — reconstruction or propagation is inconsistent");
  return rep;
}

const char* to_string(AsymptoticClass c) {
  switch (c) {
    case AsymptoticClass::kUniqueAsymptotic: return "unique_asymptotic";
    case AsymptoticClass::kInitialStateDependent: return "initial_state_dependent";
    case AsymptoticClass::kNonStationary: return "non_stationary";
  }
  return "unknown";
}

AsymptoticReport classify_asymptotics(const SvdSeries& svd, AsymptoticOptions opt) {
  const std::size_t len = svd.t.size();
  if (!(opt.window_fraction > 0.0) || opt.window_fraction > 1.0)
    throw std::invalid_argument("classify_asymptotics: window fraction must be in (0, 1]");
  const auto window = static_cast<std::size_t>(std::ceil(opt.window_fraction * len));
  if (window < 2)
    throw AnalysisError("classify_asymptotics: trailing window has fewer than two samples");
  const std::size_t begin = len - window;
  const int d = static_cast<int>(svd.s.front().size());

  AsymptoticReport rep;
  rep.window_begin = begin;

  Eigen::VectorXd s_min = svd.s[begin], s_max = svd.s[begin];
  Eigen::VectorXd b_min = svd.b[begin], b_max = svd.b[begin];
  Eigen::MatrixXd m_mean = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b_mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd s_mean = Eigen::VectorXd::Zero(d);
  for (std::size_t k = begin; k < len; ++k) {
    s_min = s_min.cwiseMin(svd.s[k]);
    s_max = s_max.cwiseMax(svd.s[k]);
    b_min = b_min.cwiseMin(svd.b[k]);
    b_max = b_max.cwiseMax(svd.b[k]);
    m_mean += svd.v[k] * svd.s[k].asDiagonal() * svd.w[k].transpose();
    b_mean += svd.b[k];
    s_mean += svd.s[k];
  }
  const double inv = 1.0 / static_cast<double>(window);
  rep.m_inf = m_mean * inv;
  rep.b_inf = b_mean * inv;
  rep.s_inf = s_mean * inv;
  rep.max_fluctuation_s = (s_max - s_min).maxCoeff();
  rep.max_fluctuation_b = (b_max - b_min).maxCoeff();

  const bool stationary = rep.max_fluctuation_s < opt.tol_stationary &&
                          rep.max_fluctuation_b < opt.tol_stationary;
  rep.rank = 0;
  for (int j = 0; j < d; ++j)
    if (rep.s_inf(j) >= opt.tol_zero) ++rep.rank;
  if (!stationary)
    rep.classification = AsymptoticClass::kNonStationary;
  else if (rep.rank == 0)
    rep.classification = AsymptoticClass::kUniqueAsymptotic;
  else
    rep.classification = AsymptoticClass::kInitialStateDependent;
  return rep;
}

RankOneProjection asymptotic_projection(const AsymptoticReport& report, double tol_zero) {
  if (report.classification != AsymptoticClass::kInitialStateDependent)
    throw AnalysisError("asymptotic_projection: report is not stationary with a surviving "
                        "direction");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(report.m_inf,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j)
    if (s(j) >= tol_zero) ++rank;
  if (rank != 1)
    throw AnalysisError("asymptotic_projection: surviving map has rank " +
                        std::to_string(rank) + ", not 1");
  RankOneProjection p;
  p.s1 = s(0);
  p.v1 = svd.matrixU().col(0);
  p.w1 = svd.matrixV().col(0);
  // Deterministic sign: largest-magnitude component of w1 is positive.
  Eigen::Index imax = 0;
  p.w1.cwiseAbs().maxCoeff(&imax);
  if (p.w1(imax) < 0.0) {
    p.w1 *= -1.0;
    p.v1 *= -1.0;
  }
  return p;
}

Eigen::VectorXd asymptotic_state(const AsymptoticReport& report, const Eigen::VectorXd& a0) {
  if (report.classification == AsymptoticClass::kNonStationary)
    throw AnalysisError("asymptotic_state: dynamics did not reach a stationary map");
  if (a0.size() != report.b_inf.size())
    throw std::invalid_argument("asymptotic_state: initial vector has wrong dimension");
  return report.m_inf * a0 + report.b_inf;
}

}  // namespace spinmap::dynmap
