#pragma once

// Matrix-free constraint-wise resolutions.
//
// Every participant i of constraint j holds a copy z_ij of the constraint
// velocity and a scalar weight beta_i. The copies are tied to the shared
// impulse through
//
//     beta_i * z_ij = y_ij + lambda_j            for every i in S_j,
//
// so each kind reduces to a scalar (or 3-vector, for contact) relation
// between lambda_j and the weighted sum  s = sum_i y_ij / beta_i  with
// total compliance  w = sum_i 1 / beta_i.  All routines below are pure.

#include <subadmm/types.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace subadmm {

// phi(a, b) = a + b - sqrt(a^2 + b^2); zero iff 0 <= a  _|_  b >= 0.
template <typename Scalar>
Scalar fischer_burmeister(Scalar a, Scalar b) {
  using std::hypot;
  return a + b - hypot(a, b);
}

// Euclidean projection onto K = {(n, t1, t2) : |t| <= mu * n}.
template <typename Derived>
Vector3T<typename Derived::Scalar> project_friction_cone(
    const Eigen::MatrixBase<Derived>& c, typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  const Scalar cn = c(0);
  const Scalar ct = std::hypot(c(1), c(2));
  if (cn >= Scalar(0) && ct <= mu * cn) return c;  // inside K
  if (mu * ct + cn <= Scalar(0)) return Vector3T<Scalar>::Zero();  // polar cone
  const Scalar ln = (mu * ct + cn) / (mu * mu + Scalar(1));
  Vector3T<Scalar> out;
  out(0) = ln;
  // ct > 0 here: ct == 0 with cn > 0 is inside K, with cn <= 0 is polar.
  out.template tail<2>() = (mu * ln / ct) * c.template tail<2>();
  return out;
}

// Per-kind impulse from the weighted sum s and total compliance w.

template <typename DerivedS, typename DerivedE>
VectorXT<typename DerivedS::Scalar> hard_inequality_impulse(
    const Eigen::MatrixBase<DerivedS>& s, typename DerivedS::Scalar w,
    const Eigen::MatrixBase<DerivedE>& e) {
  using Scalar = typename DerivedS::Scalar;
  return (-(s + e) / w).cwiseMax(Scalar(0));
}

template <typename DerivedS, typename DerivedE>
VectorXT<typename DerivedS::Scalar> hard_equality_impulse(
    const Eigen::MatrixBase<DerivedS>& s, typename DerivedS::Scalar w,
    const Eigen::MatrixBase<DerivedE>& e) {
  return -(s + e) / w;
}

// lambda = -k (e + alpha * sum z), solved jointly with the tie relation.
template <typename DerivedS, typename DerivedE, typename DerivedK, typename DerivedA>
VectorXT<typename DerivedS::Scalar> soft_impulse(
    const Eigen::MatrixBase<DerivedS>& s, typename DerivedS::Scalar w,
    const Eigen::MatrixBase<DerivedE>& e, const Eigen::MatrixBase<DerivedK>& k,
    const Eigen::MatrixBase<DerivedA>& alpha) {
  using Scalar = typename DerivedS::Scalar;
  const auto num = k.cwiseProduct(e + alpha.cwiseProduct(s));
  const auto den = (w * alpha.cwiseProduct(k)).array() + Scalar(1);
  return -(num.array() / den).matrix();
}

template <typename DerivedS, typename DerivedE>
Vector3T<typename DerivedS::Scalar> contact_impulse(
    const Eigen::MatrixBase<DerivedS>& s, typename DerivedS::Scalar w,
    const Eigen::MatrixBase<DerivedE>& e, typename DerivedS::Scalar mu) {
  using Scalar = typename DerivedS::Scalar;
  const Vector3T<Scalar> candidate = -(s + e) / w;
  return project_friction_cone(candidate, mu);
}

// Per-participant input/output of one constraint's local solve.
template <typename Scalar>
struct LocalSolveIO {
  std::vector<VectorXT<Scalar>> y;  // one rows-vector per participant
  std::vector<Scalar> beta;         // matching positive weights
  VectorXT<Scalar> lambda;          // out
  std::vector<VectorXT<Scalar>> z;  // out, one per participant

  Index rows() const { return y.empty() ? 0 : y.front().size(); }
};

namespace detail {

template <typename Scalar>
void weighted_sum(const LocalSolveIO<Scalar>& io, VectorXT<Scalar>& s, Scalar& w) {
  if (io.y.empty() || io.y.size() != io.beta.size())
    throw UsageError("local solve: participant count mismatch");
  s = VectorXT<Scalar>::Zero(io.rows());
  w = Scalar(0);
  for (std::size_t i = 0; i < io.y.size(); ++i) {
    if (!(io.beta[i] > Scalar(0))) throw UsageError("local solve: beta must be > 0");
    if (io.y[i].size() != io.rows()) throw UsageError("local solve: row count mismatch");
    s += io.y[i] / io.beta[i];
    w += Scalar(1) / io.beta[i];
  }
}

template <typename Scalar>
void distribute(LocalSolveIO<Scalar>& io) {
  io.z.resize(io.y.size());
  for (std::size_t i = 0; i < io.y.size(); ++i) io.z[i] = (io.y[i] + io.lambda) / io.beta[i];
}

}  // namespace detail

template <typename Scalar, typename DerivedE>
void local_solve_hard_inequality(LocalSolveIO<Scalar>& io, const Eigen::MatrixBase<DerivedE>& e) {
  VectorXT<Scalar> s;
  Scalar w;
  detail::weighted_sum(io, s, w);
  io.lambda = hard_inequality_impulse(s, w, e);
  detail::distribute(io);
}

template <typename Scalar, typename DerivedE>
void local_solve_hard_equality(LocalSolveIO<Scalar>& io, const Eigen::MatrixBase<DerivedE>& e) {
  VectorXT<Scalar> s;
  Scalar w;
  detail::weighted_sum(io, s, w);
  io.lambda = hard_equality_impulse(s, w, e);
  detail::distribute(io);
}

template <typename Scalar, typename DerivedE, typename DerivedK, typename DerivedA>
void local_solve_soft(LocalSolveIO<Scalar>& io, const Eigen::MatrixBase<DerivedE>& e,
                      const Eigen::MatrixBase<DerivedK>& k,
                      const Eigen::MatrixBase<DerivedA>& alpha) {
  VectorXT<Scalar> s;
  Scalar w;
  detail::weighted_sum(io, s, w);
  io.lambda = soft_impulse(s, w, e, k, alpha);
  detail::distribute(io);
}

template <typename Scalar, typename DerivedE>
void local_solve_contact(LocalSolveIO<Scalar>& io, const Eigen::MatrixBase<DerivedE>& e, Scalar mu) {
  if (mu < Scalar(0)) throw ConfigurationError("contact: friction coefficient must be >= 0");
  if (io.rows() != 3) throw UsageError("contact: expected 3 rows (normal, t1, t2)");
  VectorXT<Scalar> s;
  Scalar w;
  detail::weighted_sum(io, s, w);
  io.lambda = contact_impulse(s.template head<3>(), w, e.template head<3>(), mu);
  detail::distribute(io);
}

}  // namespace subadmm
