#include "random_problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace subadmm::testing {

namespace {

Real uniform(std::mt19937_64& rng, Real lo, Real hi) {
  return std::uniform_real_distribution<Real>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

MatX random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  MatX m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
  return m;
}

VecX random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<Real> g(0.0, 1.0);
  VecX v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

Problem random_problem(std::mt19937_64& rng, const ProblemOptions& o) {
  Problem p;
  const int ns = uniform_int(rng, o.min_subsystems, o.max_subsystems);
  std::vector<VecX> target;
  Index total_dim = 0;
  for (int i = 0; i < ns; ++i) {
    const int n = uniform_int(rng, o.min_dim, o.max_dim);
    const MatX r = random_matrix(rng, n, n);
    const Real scale = std::pow(10.0, uniform(rng, -1.0, 1.0));
    SubsystemDynamics d;
    d.A = scale * (r * r.transpose() + 0.5 * n * MatX::Identity(n, n));
    d.b = d.A * random_vector(rng, n);
    d.v_prev = random_vector(rng, n);
    p.dynamics.push_back(d);
    target.push_back(random_vector(rng, n));
    total_dim += n;
  }

  std::vector<ConstraintKind> kinds;
  if (o.soft) kinds.push_back(ConstraintKind::soft);
  if (o.equality) kinds.push_back(ConstraintKind::hard_equality);
  if (o.inequality) kinds.push_back(ConstraintKind::hard_inequality);
  if (o.contact) kinds.push_back(ConstraintKind::contact);
  if (kinds.empty()) return p;

  const int nc = uniform_int(rng, 1, o.max_constraints);
  Index hard_rows = 0;
  int contacts = 0, inequalities = 0;
  for (int j = 0; j < nc; ++j) {
    ConstraintKind kind = kinds[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(kinds.size()) - 1))];
    if (kind == ConstraintKind::contact && contacts >= o.max_contacts) continue;
    if (kind == ConstraintKind::hard_inequality && inequalities >= o.max_inequalities) continue;
    const Index rows = kind == ConstraintKind::contact ? 3 : 1;
    if (kind != ConstraintKind::soft) {
      if (hard_rows + rows > total_dim - 1) continue;
      hard_rows += rows;
    }
    contacts += kind == ConstraintKind::contact;
    inequalities += kind == ConstraintKind::hard_inequality;

    ConstraintSpec c;
    c.id = static_cast<std::uint64_t>(p.constraints.size() + 1);
    c.kind = kind;
    std::vector<int> subs{uniform_int(rng, 0, ns - 1)};
    if (ns > 1 && uniform(rng, 0.0, 1.0) < 0.5) {
      int other = uniform_int(rng, 0, ns - 2);
      if (other >= subs[0]) ++other;
      subs.push_back(other);
    }
    VecX jv = VecX::Zero(rows);
    for (int s : subs) {
      const Index n = p.dynamics[s].A.rows();
      JacobianBlock b{s, 0, random_matrix(rng, rows, n)};
      jv += b.block * target[s];
      c.blocks.push_back(b);
    }
    switch (kind) {
      case ConstraintKind::soft:
        c.stiffness = VecX::Constant(1, std::pow(10.0, uniform(rng, -1.0, 2.0)));
        c.alpha = VecX::Constant(1, 1.0 + uniform(rng, 0.0, 2.0));
        c.error = random_vector(rng, 1);
        break;
      case ConstraintKind::hard_equality:
        c.error = -jv;
        break;
      case ConstraintKind::hard_inequality:
        c.error = VecX::Constant(1, uniform(rng, 0.05, 1.0)) - jv;
        break;
      case ConstraintKind::contact: {
        c.friction = uniform(rng, 0.0, 1.0) < 0.2 ? 0.0 : uniform(rng, 0.05, 1.0);
        const Real sn = uniform(rng, 0.2, 1.0);
        const Real phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const Real st = c.friction > 0.0 ? uniform(rng, 0.0, 0.9) * sn / c.friction
                                         : uniform(rng, 0.0, 1.0);
        VecX s(3);
        s << sn, st * std::cos(phi), st * std::sin(phi);
        c.error = s - jv;
        break;
      }
    }
    p.constraints.push_back(c);
  }
  return p;
}

DenseSystem dense_system(const Problem& p) {
  DenseSystem d;
  Index n = 0;
  for (const auto& s : p.dynamics) {
    d.sub_offset.push_back(n);
    n += s.A.rows();
  }
  Index m = 0;
  for (const auto& c : p.constraints) {
    d.row_offset.push_back(m);
    m += c.rows();
  }
  d.A = MatX::Zero(n, n);
  d.b = VecX::Zero(n);
  for (std::size_t i = 0; i < p.dynamics.size(); ++i) {
    const Index k = p.dynamics[i].A.rows();
    d.A.block(d.sub_offset[i], d.sub_offset[i], k, k) = p.dynamics[i].A;
    d.b.segment(d.sub_offset[i], k) = p.dynamics[i].b;
  }
  d.J = MatX::Zero(m, n);
  d.e = VecX::Zero(m);
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    const auto& c = p.constraints[j];
    d.e.segment(d.row_offset[j], c.rows()) = c.error;
    for (const auto& b : c.blocks)
      d.J.block(d.row_offset[j], d.sub_offset[b.subsystem] + b.col, c.rows(), b.block.cols()) +=
          b.block;
  }
  return d;
}

VecX stack(const std::vector<VecX>& parts) {
  Index n = 0;
  for (const auto& v : parts) n += v.size();
  VecX out(n);
  n = 0;
  for (const auto& v : parts) {
    out.segment(n, v.size()) = v;
    n += v.size();
  }
  return out;
}

VecX dynamics_residual(const DenseSystem& d, const VecX& v, const VecX& lambda) {
  return d.A * v - d.b - d.J.transpose() * lambda;
}

namespace {

enum class State { inactive, active, open, stick, slide };

struct Enumerator {
  const Problem& p;
  DenseSystem d;
  MatX G;  // J A^-1 J^T
  VecX w;  // J A^-1 b + e: constraint velocity at lambda = 0
  Real tol;

  Enumerator(const Problem& problem, Real t) : p(problem), d(dense_system(problem)), tol(t) {
    const Eigen::LLT<MatX> llt(d.A);
    const MatX ainv_jt = llt.solve(d.J.transpose());
    G = d.J * ainv_jt;
    w = d.J * llt.solve(d.b) + d.e;
  }

  struct Candidate {
    VecX lambda;
    VecX slip_speed;  // b per sliding contact
    VecX f;           // direction mismatch per sliding contact
    bool ok = false;
  };

  // Linear system for fixed states and slip angles.
  Candidate solve(const std::vector<State>& states, const std::vector<Real>& theta) const {
    const Index m = G.rows();
    const int slides = static_cast<int>(theta.size());
    const Index n = m + slides;
    MatX M = MatX::Zero(n, n);
    VecX rhs = VecX::Zero(n);
    Index eq = 0;
    int slide = 0;
    std::vector<std::pair<Index, Vec3>> perp;  // (row offset, d_perp) per slide
    for (std::size_t j = 0; j < p.constraints.size(); ++j) {
      const auto& c = p.constraints[j];
      const Index r = d.row_offset[j];
      auto velocity_row = [&](Index row, Real scale) {
        M.row(eq).head(m) += scale * G.row(row);
        rhs(eq) -= scale * w(row);
      };
      if (c.kind == ConstraintKind::hard_equality) {
        for (Index k = 0; k < c.rows(); ++k, ++eq) velocity_row(r + k, 1.0);
        continue;
      }
      if (c.kind == ConstraintKind::soft) {
        // lambda + k (e + alpha J v) = 0 with J v = s - e.
        for (Index k = 0; k < c.rows(); ++k, ++eq) {
          const Real kk = c.stiffness(k), a = c.alpha(k);
          M(eq, r + k) = 1.0;
          M.row(eq).head(m) += kk * a * G.row(r + k);
          rhs(eq) = -kk * (c.error(k) + a * (w(r + k) - c.error(k)));
        }
        continue;
      }
      switch (states[j]) {
        case State::active:  // s = 0
          for (Index k = 0; k < c.rows(); ++k, ++eq) velocity_row(r + k, 1.0);
          break;
        case State::inactive:
        case State::open:  // lambda = 0
          for (Index k = 0; k < c.rows(); ++k, ++eq) M(eq, r + k) = 1.0;
          break;
        case State::stick:
          for (Index k = 0; k < 3; ++k, ++eq) velocity_row(r + k, 1.0);
          break;
        case State::slide: {
          const Real th = theta[static_cast<std::size_t>(slide)];
          const Real d1 = std::cos(th), d2 = std::sin(th), mu = c.friction;
          const Index bcol = m + slide;
          M(eq, r + 1) = 1.0;  // lambda_t = mu lambda_n d
          M(eq, r) = -mu * d1;
          ++eq;
          M(eq, r + 2) = 1.0;
          M(eq, r) = -mu * d2;
          ++eq;
          velocity_row(r, 1.0);  // s_n = mu b
          M(eq, bcol) -= mu;
          ++eq;
          velocity_row(r + 1, d1);  // d . s_t = -b
          velocity_row(r + 2, d2);
          M(eq, bcol) += 1.0;
          ++eq;
          perp.emplace_back(r, Vec3(0.0, -d2, d1));
          ++slide;
          break;
        }
      }
    }
    Candidate out;
    const Eigen::FullPivLU<MatX> lu(M);
    if (!lu.isInvertible()) return out;
    const VecX x = lu.solve(rhs);
    if (!(M * x - rhs).allFinite() || (M * x - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) return out;
    out.lambda = x.head(m);
    out.slip_speed = x.tail(slides);
    const VecX s = G * out.lambda + w;
    out.f.resize(slides);
    for (int k = 0; k < slides; ++k) {
      const auto& [r, dp] = perp[static_cast<std::size_t>(k)];
      out.f(k) = dp.dot(s.segment<3>(r));
    }
    out.ok = true;
    return out;
  }

  bool valid(const std::vector<State>& states, const Candidate& c) const {
    if (!c.ok) return false;
    const VecX s = G * c.lambda + w;
    const Real lt = tol * (1.0 + c.lambda.cwiseAbs().maxCoeff());
    const Real st = tol * (1.0 + s.cwiseAbs().maxCoeff());
    if (c.f.size() > 0 && c.f.cwiseAbs().maxCoeff() > st) return false;
    if (c.slip_speed.size() > 0 && c.slip_speed.minCoeff() < -st) return false;
    for (std::size_t j = 0; j < p.constraints.size(); ++j) {
      const auto& con = p.constraints[j];
      if (con.kind == ConstraintKind::soft || con.kind == ConstraintKind::hard_equality) continue;
      const Index r = d.row_offset[j];
      const Real mu = con.friction;
      switch (states[j]) {
        case State::inactive:
          if (s(r) < -st) return false;
          break;
        case State::active:
          if (c.lambda(r) < -lt) return false;
          break;
        case State::open:
          if (s(r) - mu * s.segment<2>(r + 1).norm() < -st) return false;
          break;
        case State::stick:
        case State::slide:
          if (c.lambda(r) < -lt) return false;
          if (c.lambda.segment<2>(r + 1).norm() - mu * c.lambda(r) > lt) return false;
          break;
      }
    }
    return true;
  }

  // Roots of the slip-direction mismatch for the sliding contacts.
  std::vector<Candidate> slide_roots(const std::vector<State>& states, int slides) const {
    std::vector<Candidate> found;
    const Real two_pi = 2.0 * std::numbers::pi;
    if (slides == 1) {
      const int n = 2000;
      std::vector<Real> f(n + 1, std::numeric_limits<Real>::quiet_NaN());
      for (int i = 0; i <= n; ++i) {
        const Candidate c = solve(states, {two_pi * i / n});
        if (c.ok) f[i] = c.f(0);
      }
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(f[i]) || !std::isfinite(f[i + 1]) || f[i] * f[i + 1] > 0.0) continue;
        Real lo = two_pi * i / n, hi = two_pi * (i + 1) / n, flo = f[i];
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
          const Real mid = 0.5 * (lo + hi);
          const Candidate c = solve(states, {mid});
          if (!c.ok) break;
          if ((c.f(0) < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = c.f(0);
          } else {
            hi = mid;
          }
        }
        found.push_back(solve(states, {0.5 * (lo + hi)}));
      }
      return found;
    }
    // Two sliding contacts: Newton from the best grid points.
    const int n = 72;
    std::vector<std::pair<Real, std::vector<Real>>> starts;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const std::vector<Real> th{two_pi * i / n, two_pi * k / n};
        const Candidate c = solve(states, th);
        if (c.ok) starts.emplace_back(c.f.norm(), th);
      }
    std::sort(starts.begin(), starts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (starts.size() > 40) starts.resize(40);
    for (auto& [unused, th] : starts) {
      (void)unused;
      for (int it = 0; it < 60; ++it) {
        const Candidate c = solve(states, th);
        if (!c.ok) break;
        if (c.f.norm() < 1e-14) break;
        Eigen::Matrix2d jac;
        const Real h = 1e-7;
        for (int k = 0; k < 2; ++k) {
          std::vector<Real> tp = th;
          tp[static_cast<std::size_t>(k)] += h;
          const Candidate cp = solve(states, tp);
          if (!cp.ok) break;
          jac.col(k) = (cp.f - c.f) / h;
        }
        const Eigen::Vector2d step = jac.fullPivLu().solve(-c.f.head<2>());
        if (!step.allFinite()) break;
        th[0] += std::clamp(step(0), -0.3, 0.3);
        th[1] += std::clamp(step(1), -0.3, 0.3);
      }
      found.push_back(solve(states, th));
    }
    return found;
  }

  std::optional<VecX> run() const {
    std::vector<std::size_t> choice_idx;
    std::vector<std::vector<State>> choices;
    for (const auto& c : p.constraints) {
      switch (c.kind) {
        case ConstraintKind::hard_inequality: choices.push_back({State::inactive, State::active}); break;
        case ConstraintKind::contact: choices.push_back({State::open, State::stick, State::slide}); break;
        default: choices.push_back({State::active}); break;
      }
    }
    std::vector<State> states(choices.size());
    std::function<std::optional<VecX>(std::size_t)> rec = [&](std::size_t j) -> std::optional<VecX> {
      if (j == choices.size()) {
        const int slides = static_cast<int>(std::count(states.begin(), states.end(), State::slide));
        std::vector<Candidate> cands;
        if (slides == 0)
          cands.push_back(solve(states, {}));
        else
          cands = slide_roots(states, slides);
        for (const auto& c : cands)
          if (valid(states, c)) {
            const Eigen::LLT<MatX> llt(d.A);
            return VecX(llt.solve(d.b + d.J.transpose() * c.lambda));
          }
        return std::nullopt;
      }
      for (State s : choices[j]) {
        states[j] = s;
        if (auto v = rec(j + 1)) return v;
      }
      return std::nullopt;
    };
    return rec(0);
  }
};

}  // namespace

std::optional<VecX> enumerate_active_sets(const Problem& p, Real tol) {
  return Enumerator(p, tol).run();
}

}  // namespace subadmm::testing
