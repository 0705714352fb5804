#pragma once

// Linearization, controllability spectrum and Riccati machinery behind the
// spectral expansion operator.

#include "sets/mdp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sets {

struct StateJacobian {
  Matrix A;  // ∂f/∂x
  Matrix B;  // ∂f/∂u
};

/// Central finite differences with step ε·max(1, |x_j|).
template <typename Fn>
StateJacobian jacobian(const Fn& f, const Vector& x, const Vector& u, double eps = 1e-6) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = u.size();
  StateJacobian J;
  Vector xp = x;
  Vector up = u;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = eps * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    const Vector fp = f(xp, u);
    xp[j] = x[j] - h;
    const Vector fm = f(xp, u);
    xp[j] = x[j];
    if (j == 0) J.A.resize(fp.size(), n);
    J.A.col(j) = (fp - fm) / (2.0 * h);
    if (!J.A.col(j).allFinite()) {
      throw std::runtime_error("jacobian: non-finite derivative with respect to state coordinate " + std::to_string(j));
    }
  }
  J.B.resize(J.A.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = eps * std::max(1.0, std::abs(u[j]));
    up[j] = u[j] + h;
    const Vector fp = f(x, up);
    up[j] = u[j] - h;
    const Vector fm = f(x, up);
    up[j] = u[j];
    J.B.col(j) = (fp - fm) / (2.0 * h);
    if (!J.B.col(j).allFinite()) {
      throw std::runtime_error("jacobian: non-finite derivative with respect to action coordinate " + std::to_string(j));
    }
  }
  return J;
}

/// z_{k+1} = A_k z_k + B_k u_k + c_k along a nominal trajectory.
struct Linearization {
  std::vector<Matrix> A_seq;
  std::vector<Matrix> B_seq;
  std::vector<Vector> c_seq;
  std::vector<Vector> nominal_states;   // H + 1 entries
  std::vector<Vector> nominal_actions;  // H entries

  int horizon() const { return static_cast<int>(A_seq.size()); }

  Vector apply(int k, const Vector& z, const Vector& u) const { return A_seq[k] * z + B_seq[k] * u + c_seq[k]; }

  /// Simulates the affine model from z0.
  std::vector<Vector> simulate(const Vector& z0, const std::vector<Vector>& us) const {
    std::vector<Vector> zs{z0};
    zs.reserve(us.size() + 1);
    for (std::size_t k = 0; k < us.size(); ++k) zs.push_back(apply(static_cast<int>(k), zs.back(), us[k]));
    return zs;
  }
};

/// Linearizes the MDP dynamics along the rollout of `nominal_actions` from x0.
/// With `time_invariant` the first step's model is reused for every k.
inline Linearization linearize_along(const MdpDefinition& mdp, const Vector& x0, const std::vector<Vector>& nominal_actions,
                                     bool time_invariant = false) {
  if (nominal_actions.empty()) throw std::invalid_argument("linearize_along: horizon must be at least 1");
  const int H = static_cast<int>(nominal_actions.size());
  Linearization lin;
  lin.nominal_actions = nominal_actions;
  lin.nominal_states.reserve(H + 1);
  lin.nominal_states.push_back(x0);
  for (int k = 0; k < H; ++k) {
    const Vector& xk = lin.nominal_states.back();
    const Vector& uk = nominal_actions[k];
    if (k == 0 || !time_invariant) {
      StateJacobian J = jacobian(mdp.dynamics, xk, uk);
      const Vector fx = mdp.dynamics(xk, uk);
      if (!fx.allFinite()) throw std::runtime_error("linearize_along: nominal rollout produced non-finite state");
      lin.c_seq.push_back(fx - J.A * xk - J.B * uk);
      lin.A_seq.push_back(std::move(J.A));
      lin.B_seq.push_back(std::move(J.B));
      lin.nominal_states.push_back(fx);
    } else {
      lin.A_seq.push_back(lin.A_seq.front());
      lin.B_seq.push_back(lin.B_seq.front());
      lin.c_seq.push_back(lin.c_seq.front());
      lin.nominal_states.push_back(lin.apply(k, xk, uk));
    }
  }
  return lin;
}

/// Spectrum of the input-normalized controllability matrix
///   C = [(A_{H-1}…A_1) B_0 S, …, A_{H-1} B_{H-2} S, B_{H-1} S]
/// with physical inputs u = S w + u_c, so ‖w‖_∞ ≤ 1 covers the action box.
struct ControllabilityDecomposition {
  Matrix ctrl_matrix;
  Vector singular_values;  // n entries, descending, zero padded
  Matrix singular_vectors;  // n × n, column i is v_i
  Matrix right_vectors;     // (mH) × r thin right singular vectors
  Vector drift_endpoint;
  Vector input_scale;   // diagonal of S
  Vector input_center;  // u_c
  int horizon = 0;

  int state_dim() const { return static_cast<int>(singular_values.size()); }
  int input_dim() const { return static_cast<int>(input_scale.size()); }
  double gramian_eigenvalue(int i) const { return singular_values[i] * singular_values[i]; }
  Vector mode(int i) const { return singular_vectors.col(i); }
};

inline ControllabilityDecomposition controllability(const Linearization& lin, const IntervalBox& action_box) {
  const int H = lin.horizon();
  if (H == 0 || action_box.dim() == 0) throw std::invalid_argument("controllability: empty input sequence");
  const Eigen::Index n = lin.A_seq.front().rows();
  const Eigen::Index m = action_box.dim();

  ControllabilityDecomposition out;
  out.horizon = H;
  out.input_scale = action_box.half_width();
  out.input_center = action_box.center();
  out.ctrl_matrix.resize(n, m * H);

  // Blocks are filled from the last step backwards while accumulating the
  // product of the trailing A_k.
  Matrix trailing = Matrix::Identity(n, n);
  for (int i = H - 1; i >= 0; --i) {
    out.ctrl_matrix.middleCols(i * m, m) = trailing * lin.B_seq[i] * out.input_scale.asDiagonal();
    trailing = trailing * lin.A_seq[i];
  }

  Vector z = lin.nominal_states.front();
  for (int k = 0; k < H; ++k) z = lin.apply(k, z, out.input_center);
  out.drift_endpoint = z;

  Eigen::JacobiSVD<Matrix> svd(out.ctrl_matrix, Eigen::ComputeFullU | Eigen::ComputeThinV);
  const Eigen::Index r = svd.singularValues().size();
  out.singular_values = Vector::Zero(n);
  out.singular_values.head(r) = svd.singularValues();
  out.singular_vectors = svd.matrixU();
  out.right_vectors = svd.matrixV();
  // Fix signs so the largest-magnitude entry of each v_i is positive.
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    out.singular_vectors.col(i).cwiseAbs().maxCoeff(&arg);
    if (out.singular_vectors(arg, i) < 0.0) {
      out.singular_vectors.col(i) *= -1.0;
      if (i < r) out.right_vectors.col(i) *= -1.0;
    }
  }
  return out;
}

struct ReferenceInputs {
  std::vector<Vector> normalized;  // w_k
  std::vector<Vector> actions;     // clip(S w_k + u_c, U)
};

/// Minimum-norm w with C w = target - drift; singular values below
/// 1e-8·σ_1 are truncated.
inline ReferenceInputs min_energy_inputs(const ControllabilityDecomposition& d, const Vector& target,
                                         const IntervalBox& action_box) {
  const Vector rhs = target - d.drift_endpoint;
  const Eigen::Index r = d.right_vectors.cols();
  const double cutoff = 1e-8 * (d.singular_values.size() > 0 ? d.singular_values[0] : 0.0);
  Vector w = Vector::Zero(d.ctrl_matrix.cols());
  for (Eigen::Index i = 0; i < r; ++i) {
    const double s = d.singular_values[i];
    if (s <= cutoff || s == 0.0) continue;
    w += d.right_vectors.col(i) * (d.singular_vectors.col(i).dot(rhs) / s);
  }
  const int m = d.input_dim();
  ReferenceInputs out;
  for (int k = 0; k < d.horizon; ++k) {
    Vector wk = w.segment(k * m, m);
    out.actions.push_back(clip_action(d.input_scale.cwiseProduct(wk) + d.input_center, action_box));
    out.normalized.push_back(std::move(wk));
  }
  return out;
}

class DareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DareMethod { kDoubling, kFixedPoint };

struct DareOptions {
  double tol = 1e-9;
  /// Cap on equivalent Riccati iterations.
  int max_iterations = 10000;
  DareMethod method = DareMethod::kDoubling;
};

/// Frobenius norm of AᵀMA − AᵀMB(Gu+BᵀMB)⁻¹BᵀMA + Gx − M.
inline double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Gx, const Matrix& Gu, const Matrix& M) {
  const Matrix BtM = B.transpose() * M;
  const Matrix gain = (Gu + BtM * B).ldlt().solve(BtM * A);
  const Matrix next = A.transpose() * M * A - A.transpose() * M * B * gain + Gx;
  return (next - M).norm();
}

namespace detail {

inline Matrix riccati_map(const Matrix& A, const Matrix& B, const Matrix& Gx, const Matrix& Gu, const Matrix& M) {
  const Matrix BtM = B.transpose() * M;
  const Matrix AtM = A.transpose() * M;
  Matrix next = AtM * A - AtM * B * (Gu + BtM * B).ldlt().solve(BtM * A) + Gx;
  return 0.5 * (next + next.transpose());
}

inline Matrix dare_fixed_point(const Matrix& A, const Matrix& B, const Matrix& Gx, const Matrix& Gu, Matrix M,
                               const DareOptions& opts) {
  for (int it = 0; it < opts.max_iterations; ++it) {
    Matrix next = riccati_map(A, B, Gx, Gu, M);
    const double change = (next - M).norm();
    M = std::move(next);
    if (!M.allFinite()) break;
    // Roundoff bounds the attainable step size relative to |M|.
    const double floor = std::max(1e-3 * opts.tol, 1e-12 * M.norm());
    if (change <= floor && dare_residual(A, B, Gx, Gu, M) <= opts.tol) return M;
  }
  throw DareError("DARE did not converge");
}

// Structure-preserving doubling: after k steps H_k equals the 2^k-th iterate
// of the Riccati map started from Gx.
inline Matrix dare_doubling(const Matrix& A, const Matrix& B, const Matrix& Gx, const Matrix& Gu,
                            const DareOptions& opts) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix Ak = A;
  Matrix Gk = B * Gu.ldlt().solve(B.transpose());
  Matrix Hk = Gx;
  long equivalent = 1;
  while (equivalent <= opts.max_iterations) {
    const Eigen::PartialPivLU<Matrix> W(I + Gk * Hk);
    const Matrix WinvA = W.solve(Ak);
    const Matrix WinvG = W.solve(Gk);
    Matrix Hn = Hk + Ak.transpose() * Hk * WinvA;
    Matrix Gn = Gk + Ak * WinvG * Ak.transpose();
    Matrix An = Ak * WinvA;
    Hn = 0.5 * (Hn + Hn.transpose());
    Gn = 0.5 * (Gn + Gn.transpose());
    if (!Hn.allFinite() || !An.allFinite()) break;
    const double change = (Hn - Hk).norm();
    Hk = std::move(Hn);
    Gk = std::move(Gn);
    Ak = std::move(An);
    equivalent *= 2;
    if (change <= 1e-14 * std::max(1.0, Hk.norm())) {
      // Polish with a few plain iterations if roundoff left residual above tol.
      for (int polish = 0; polish < 5 && dare_residual(A, B, Gx, Gu, Hk) > opts.tol; ++polish) {
        Hk = riccati_map(A, B, Gx, Gu, Hk);
      }
      if (dare_residual(A, B, Gx, Gu, Hk) <= opts.tol) return Hk;
      break;
    }
  }
  throw DareError("DARE did not converge");
}

}  // namespace detail

/// Stabilizing solution of M = AᵀMA − AᵀMB(Gu+BᵀMB)⁻¹BᵀMA + Gx, iterated from
/// M₀ = Gx. Throws DareError when the pair is not stabilizable within the cap.
inline Matrix dare_solve(const Matrix& A, const Matrix& B, const Matrix& Gx, const Matrix& Gu,
                         const DareOptions& opts = {}) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || Gx.rows() != A.rows() || Gu.rows() != B.cols()) {
    throw std::invalid_argument("dare_solve: dimension mismatch");
  }
  if (opts.method == DareMethod::kFixedPoint) return detail::dare_fixed_point(A, B, Gx, Gu, Gx, opts);
  return detail::dare_doubling(A, B, Gx, Gu, opts);
}

/// Fixed-point iteration from an explicit starting matrix.
inline Matrix dare_solve_from(const Matrix& A, const Matrix& B, const Matrix& Gx, const Matrix& Gu, const Matrix& M0,
                              const DareOptions& opts = {}) {
  return detail::dare_fixed_point(A, B, Gx, Gu, M0, opts);
}

/// K = (Gu + BᵀMB)⁻¹ BᵀMA.
inline Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& M, const Matrix& Gu) {
  const Matrix lhs = Gu + B.transpose() * M * B;
  const Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) throw std::runtime_error("lqr_gain: Gu + BᵀMB is singular");
  return lu.solve(B.transpose() * M * A);
}

/// Time-varying gains from the backward Riccati recursion over a finite
/// window with terminal cost Gx. Always defined, including for pairs with
/// uncontrollable marginal modes.
inline std::vector<Matrix> finite_horizon_gains(const std::vector<Matrix>& A_seq, const std::vector<Matrix>& B_seq,
                                                const Matrix& Gx, const Matrix& Gu) {
  const int H = static_cast<int>(A_seq.size());
  std::vector<Matrix> gains(H);
  Matrix P = Gx;
  for (int k = H - 1; k >= 0; --k) {
    gains[k] = lqr_gain(A_seq[k], B_seq[k], P, Gu);
    Matrix next = Gx + A_seq[k].transpose() * P * (A_seq[k] - B_seq[k] * gains[k]);
    P = 0.5 * (next + next.transpose());
  }
  return gains;
}

inline double spectral_radius(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace sets
