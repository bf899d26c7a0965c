#include "pidsyn/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pidsyn::sdp {

namespace {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

constexpr long double kTiny = 1e-300L;

// Row-major upper-triangle order of a 3x3 symmetric block.
constexpr int kTri[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

// Symmetric placement of structured variable `var` inside the 7x7 W.
Matrix7d placement(int var) {
  Matrix7d p = Matrix7d::Zero();
  if (var < 6) {
    p(kTri[var][0], kTri[var][1]) = 1.0;
    p(kTri[var][1], kTri[var][0]) = 1.0;
  } else if (var < 12) {
    p(kTri[var - 6][0] + 3, kTri[var - 6][1] + 3) = 1.0;
    p(kTri[var - 6][1] + 3, kTri[var - 6][0] + 3) = 1.0;
  } else if (var < 15) {
    p(var - 9, 6) = 1.0;  // var 12 -> row 3, 13 -> 4, 14 -> 5
    p(6, var - 9) = 1.0;
  } else if (var == 15) {
    p(6, 6) = 1.0;
  } else {
    throw std::out_of_range("placement: variable index out of range");
  }
  return p;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

// ---------------------------------------------------------------------------
// Presolve: substitution of a fixed objective variable, elimination of
// barrier-flat variables, and removal of constant blocks.

struct ElimSnap {
  int var = -1;      // original variable index
  double coeff = 0;  // its positive diagonal coefficient
  int row = 0;       // row/column it relaxes, in snapshot coordinates
  Eigen::MatrixXd C;                // block right before the removal
  std::vector<Eigen::MatrixXd> A;  // per original variable, same snapshot
};

struct Reduced {
  std::vector<int> keep;            // original indices of kept variables
  std::vector<ElimSnap> elims;      // eliminated flat variables
  std::vector<Eigen::MatrixXd> C;   // reduced blocks
  std::vector<std::vector<Eigen::MatrixXd>> A;  // [block][original var]
  Eigen::VectorXd c;                // original-size objective
  bool infeasible_const = false;    // some constant block is not PSD
  bool bad = false;                 // ill-posed (free variable in objective)
};

bool is_positive_diagonal_singleton(const Eigen::MatrixXd& a, int* row,
                                    double* coeff) {
  int found = -1;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) {
        if (i != j || found >= 0) return false;
        found = i;
      }
    }
  }
  if (found < 0 || a(found, found) <= 0.0) return false;
  *row = found;
  *coeff = a(found, found);
  return true;
}

void remove_row_col(Eigen::MatrixXd& m, int j) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(n - 1, n - 1);
  int r = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == j) continue;
    int cidx = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j) continue;
      out(r, cidx++) = m(i, k);
    }
    ++r;
  }
  m = std::move(out);
}

Reduced reduce(const SdpProblem& prob, bool fix_last, double fixed_value) {
  const int n = prob.nvars();
  const int nb = prob.nblocks();
  Reduced red;
  red.c = prob.c;
  red.C.resize(nb);
  red.A.resize(nb);
  for (int k = 0; k < nb; ++k) {
    red.C[k] = symmetrized(prob.C[k]);
    red.A[k].resize(n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(prob.A[k].size()) != n) {
        red.bad = true;
        return red;
      }
      red.A[k][i] = symmetrized(prob.A[k][i]);
    }
  }

  std::vector<bool> active(n, true);
  if (fix_last) {
    const int last = n - 1;
    for (int k = 0; k < nb; ++k) {
      red.C[k] += fixed_value * red.A[k][last];
      red.A[k][last].setZero();
    }
    active[last] = false;
  }

  // Flat-variable elimination to a fixpoint: a variable with zero objective
  // coefficient whose only appearance is a single positive diagonal entry of
  // a single block makes the log-det barrier unbounded in its direction; the
  // row/column it relaxes is deleted and the variable completed afterwards.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n && !changed; ++i) {
      if (!active[i]) continue;
      int nblk = -1, nhits = 0;
      for (int k = 0; k < nb; ++k) {
        if (!red.A[k][i].isZero(0.0)) {
          nblk = k;
          ++nhits;
        }
      }
      if (nhits == 0) {
        if (red.c(i) != 0.0) {
          red.bad = true;  // objective is unbounded in a free direction
          return red;
        }
        active[i] = false;
        changed = true;
        continue;
      }
      if (nhits != 1 || red.c(i) != 0.0) continue;
      int row = 0;
      double coeff = 0;
      if (!is_positive_diagonal_singleton(red.A[nblk][i], &row, &coeff)) {
        continue;
      }
      ElimSnap snap;
      snap.var = i;
      snap.coeff = coeff;
      snap.row = row;
      snap.C = red.C[nblk];
      snap.A = red.A[nblk];
      red.elims.push_back(std::move(snap));
      remove_row_col(red.C[nblk], row);
      for (int v = 0; v < n; ++v) remove_row_col(red.A[nblk][v], row);
      active[i] = false;
      changed = true;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (active[i]) red.keep.push_back(i);
  }

  // Drop blocks no kept variable touches, verifying the constants.
  std::vector<Eigen::MatrixXd> keptC;
  std::vector<std::vector<Eigen::MatrixXd>> keptA;
  for (int k = 0; k < nb; ++k) {
    if (red.C[k].rows() == 0) continue;
    bool touched = false;
    for (int i : red.keep) {
      if (!red.A[k][i].isZero(0.0)) {
        touched = true;
        break;
      }
    }
    if (!touched) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(red.C[k]);
      if (es.eigenvalues().minCoeff() < 0.0) red.infeasible_const = true;
      continue;
    }
    keptC.push_back(red.C[k]);
    keptA.push_back(red.A[k]);
  }
  red.C = std::move(keptC);
  red.A = std::move(keptA);
  return red;
}

// ---------------------------------------------------------------------------
// Long-double barrier engine on the reduced problem.

struct Engine {
  int n = 0;      // internal variables (kept + optional slack)
  int nk = 0;     // kept original variables
  int slack = -1; // internal slack index or -1
  long double nu = 0;  // sum of block orders
  std::vector<LMat> Cs;                                    // scaled blocks
  std::vector<std::vector<std::pair<int, LMat>>> As;       // nonzeros
  LVec d;      // variable scales; real value = d(j) * y(j)
  LVec y;      // current point, internal units
  LVec creal;  // real objective coefficient per internal variable
};

Engine build_engine(const Reduced& red, bool add_slack) {
  Engine e;
  e.nk = static_cast<int>(red.keep.size());
  e.n = e.nk + (add_slack ? 1 : 0);
  e.slack = add_slack ? e.nk : -1;
  const int nb = static_cast<int>(red.C.size());

  std::vector<long double> beta(nb, 1.0L);
  for (int k = 0; k < nb; ++k) {
    double m = red.C[k].norm();
    for (int i : red.keep) m = std::max(m, red.A[k][i].norm());
    beta[k] = 1.0L / std::max<long double>(m, kTiny);
  }

  e.d = LVec::Ones(e.n);
  for (int j = 0; j < e.nk; ++j) {
    long double col = 0;
    for (int k = 0; k < nb; ++k) {
      col = std::max(col, beta[k] * (long double)red.A[k][red.keep[j]].norm());
    }
    long double dj = 1.0L / std::max(col, kTiny);
    e.d(j) = std::clamp(dj, 1e-10L, 1e10L);
  }

  e.Cs.resize(nb);
  e.As.resize(nb);
  for (int k = 0; k < nb; ++k) {
    e.Cs[k] = beta[k] * red.C[k].cast<long double>();
    for (int j = 0; j < e.nk; ++j) {
      const Eigen::MatrixXd& a = red.A[k][red.keep[j]];
      if (a.isZero(0.0)) continue;
      e.As[k].emplace_back(j, (beta[k] * e.d(j)) * a.cast<long double>());
    }
    if (add_slack) {
      e.As[k].emplace_back(
          e.slack, LMat::Identity(red.C[k].rows(), red.C[k].rows()) * beta[k]);
    }
    e.nu += static_cast<long double>(red.C[k].rows());
  }
  if (add_slack) {  // bound block  1 + s >= 0
    e.Cs.push_back(LMat::Constant(1, 1, 1.0L));
    e.As.emplace_back();
    e.As.back().emplace_back(e.slack, LMat::Constant(1, 1, 1.0L));
    e.nu += 1.0L;
  }

  e.creal = LVec::Zero(e.n);
  for (int j = 0; j < e.nk; ++j) e.creal(j) = red.c(red.keep[j]);
  e.y = LVec::Zero(e.n);
  return e;
}

LMat block_at(const Engine& e, int k, const LVec& y) {
  LMat s = e.Cs[k];
  for (const auto& [j, a] : e.As[k]) s += y(j) * a;
  return s;
}

bool factor_all(const Engine& e, const LVec& y,
                std::vector<Eigen::LLT<LMat>>& lls, long double* logdet) {
  const int nb = static_cast<int>(e.Cs.size());
  lls.resize(nb);
  long double ld = 0;
  for (int k = 0; k < nb; ++k) {
    LMat s = block_at(e, k, y);
    s = 0.5L * (s + s.transpose()).eval();
    lls[k].compute(s);
    if (lls[k].info() != Eigen::Success) return false;
    const auto& l = lls[k].matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      const long double piv = l(i, i);
      if (!(piv > 0) || !std::isfinite((double)piv)) return false;
      ld += std::log(piv);
    }
  }
  *logdet = 2.0L * ld;
  return true;
}

struct CenterOut {
  bool converged = false;
  bool hard = false;
  int steps = 0;
};

// Damped Newton centering of  t * cint.y - sum_k log det S_k(y).
CenterOut center(Engine& e, long double t, const LVec& cint,
                 const SolverOptions& o) {
  CenterOut out;
  const int n = e.n;
  const int nb = static_cast<int>(e.Cs.size());
  std::vector<Eigen::LLT<LMat>> lls, trial;
  const long double gtol =
      (long double)o.newton_tol * (1.0L + t * cint.norm());
  int noise_hits = 0;  // consecutive accepted steps with sub-noise decrease
  int ray_hits = 0;    // consecutive full steps with the ray signature
  long double prev_lam2 = -1.0L, prev_fdec = 0.0L;

  for (int it = 0; it < o.max_newton; ++it) {
    long double logdet = 0;
    if (!factor_all(e, e.y, lls, &logdet)) {
      out.hard = true;
      return out;
    }
    const long double f = t * cint.dot(e.y) - logdet;

    LVec g = t * cint;
    LMat h = LMat::Zero(n, n);
    for (int k = 0; k < nb; ++k) {
      const auto l = lls[k].matrixLLT().triangularView<Eigen::Lower>();
      std::vector<LMat> ms;
      std::vector<int> idx;
      ms.reserve(e.As[k].size());
      for (const auto& [j, a] : e.As[k]) {
        LMat x = l.solve(a);
        LMat m = l.solve(x.transpose());  // L^-1 A L^-T, symmetric
        g(j) -= m.trace();
        idx.push_back(j);
        ms.push_back(std::move(m));
      }
      for (std::size_t a1 = 0; a1 < ms.size(); ++a1) {
        for (std::size_t a2 = 0; a2 <= a1; ++a2) {
          const long double v = (ms[a1].array() * ms[a2].array()).sum();
          h(idx[a1], idx[a2]) += v;
          if (a1 != a2) h(idx[a2], idx[a1]) += v;
        }
      }
    }

    if (g.norm() <= gtol) {
      out.converged = true;
      return out;
    }

    Eigen::LDLT<LMat> ldlt(h);
    LVec dx;
    bool solved = false;
    if (ldlt.info() == Eigen::Success) {
      dx = ldlt.solve(-g);
      dx += ldlt.solve(-g - h * dx);  // one step of iterative refinement
      solved = dx.allFinite();
    }
    if (!solved) {
      const long double reg = 1e-14L * (h.trace() / n + 1.0L);
      Eigen::LDLT<LMat> ldlt2(h + reg * LMat::Identity(n, n));
      if (ldlt2.info() != Eigen::Success) return out;  // stall
      dx = ldlt2.solve(-g);
      if (!dx.allFinite()) return out;
    }

    const long double lam2 = -g.dot(dx);
    if (!(lam2 > 1e-14L)) {
      out.converged = lam2 > -1e-8L;  // at center up to roundoff
      return out;
    }
    // Roundoff floor of the potential t*c.y - logdet: once the Newton-model
    // decrease lam2/2 drops below what the evaluation can resolve, the
    // iterate is centered to working precision and the line search would
    // only chase noise.
    const long double fnoise =
        std::numeric_limits<long double>::epsilon() *
        (std::abs(t * cint.dot(e.y)) + std::abs(logdet) + 1.0L);
    if (0.5L * lam2 <= 16.0L * fnoise) {
      out.converged = true;
      return out;
    }

    const long double slope = g.dot(dx);
    long double alpha = 1.0L;
    bool accepted = false;
    long double fdec = 0;
    for (int ls = 0; ls < 60; ++ls) {
      LVec cand = e.y + alpha * dx;
      long double ld2 = 0;
      if (factor_all(e, cand, trial, &ld2)) {
        const long double fc = t * cint.dot(cand) - ld2;
        if (fc <= f + 0.25L * alpha * slope) {
          e.y = std::move(cand);
          accepted = true;
          fdec = f - fc;
          break;
        }
      }
      alpha *= 0.5L;
    }
    if (!accepted) {
      // Line search exhausted: centered to the evaluation's resolution when
      // the remaining model decrease is at the noise floor, else a hard stall.
      out.converged = 0.5L * lam2 <= 1024.0L * fnoise;
      return out;
    }
    ++out.steps;
    // Approximately centered (Newton decrement lam <= 1/4, where the n/t gap
    // bound already holds) and the accepted steps have stopped decreasing the
    // potential by more than its evaluation can resolve: further iterations
    // only chase noise through the Armijo test.
    if (lam2 <= 0.0625L) {
      if (fdec <= 4.0L * fnoise) {
        if (++noise_hits >= 2) {
          out.converged = true;
          return out;
        }
      } else {
        noise_hits = 0;
      }
    }
    // When the feasible cross-section recedes along a direction that inflates
    // the block determinants, the potential has no minimizer: the log barrier
    // is scale-invariant along the ray, so full Newton steps repeat with the
    // decrement and the per-step decrease both frozen.  The objective has no
    // component along such a ray (the decrease is t-independent), so the
    // iterate is as centered as the geometry admits; riding further only
    // inflates the iterate exponentially.
    if (alpha == 1.0L && lam2 > 1.0L && prev_lam2 > 0.0L &&
        std::abs(lam2 - prev_lam2) <= 1e-3L * lam2 &&
        std::abs(fdec - prev_fdec) <= 1e-3L * std::abs(fdec) &&
        fdec > 16.0L * fnoise) {
      if (++ray_hits >= 6) {
        out.converged = true;
        return out;
      }
    } else {
      ray_hits = 0;
    }
    prev_lam2 = lam2;
    prev_fdec = fdec;
  }
  return out;  // Newton budget exhausted
}


void re_equilibrate(Engine& e) {
  for (int j = 0; j < e.n; ++j) {
    const long double m =
        std::clamp(std::abs(e.y(j)), 1e-6L, 1e6L);
    if (m == 1.0L) continue;
    e.d(j) *= m;
    e.y(j) /= m;
    for (auto& blk : e.As) {
      for (auto& [idx, a] : blk) {
        if (idx == j) a *= m;
      }
    }
  }
  for (std::size_t k = 0; k < e.Cs.size(); ++k) {
    const long double nf = block_at(e, static_cast<int>(k), e.y).norm();
    const long double b = 1.0L / std::max(nf, 1e-30L);
    if (std::isfinite((double)b) && b != 1.0L) {
      e.Cs[k] *= b;
      for (auto& [idx, a] : e.As[k]) a *= b;
    }
  }
}

// Deterministic initial point: x = alpha * u over a geometric grid of alpha,
// where u marks variables appearing as nonnegative diagonals in the first
// block; the slack absorbs whatever margin the best candidate still needs.
// When the objective variable is free (mu_idx >= 0) it starts at mu_init.
void init_phase_point(Engine& e, const Reduced& red, int mu_idx,
                      double mu_init) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(e.nk);
  if (!red.C.empty()) {
    for (int j = 0; j < e.nk; ++j) {
      const Eigen::MatrixXd& a = red.A[0][red.keep[j]];
      if (a.isZero(0.0)) continue;
      bool diag = true;
      double mx = 0;
      for (int r = 0; r < a.rows() && diag; ++r) {
        for (int c = 0; c < a.cols(); ++c) {
          if (r != c && a(r, c) != 0.0) {
            diag = false;
            break;
          }
        }
        if (a(r, r) < 0.0) diag = false;
        mx = std::max(mx, a(r, r));
      }
      if (diag && mx > 0.0) u(j) = 1.0;
    }
  }

  double best_need = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(e.nk);
  for (int j = -20; j <= 20; ++j) {
    const double alpha = std::ldexp(1.0, j);
    Eigen::VectorXd xk = alpha * u;
    if (mu_idx >= 0) xk(mu_idx) = mu_init;
    double need = 0;
    for (std::size_t k = 0; k < red.C.size(); ++k) {
      Eigen::MatrixXd s = red.C[k];
      for (int q = 0; q < e.nk; ++q) {
        if (xk(q) != 0.0) s += xk(q) * red.A[k][red.keep[q]];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(s));
      need = std::max(need, -es.eigenvalues().minCoeff());
    }
    if (need < best_need) {
      best_need = need;
      best_x = xk;
    }
  }

  for (int j = 0; j < e.nk; ++j) e.y(j) = (long double)best_x(j) / e.d(j);
  const double s0 =
      std::max(-0.9, best_need + 0.5 * std::max(1.0, std::abs(best_need)));
  e.y(e.slack) = (long double)s0 / e.d(e.slack);
}

enum class PhaseKind { Success, Certified, Inconclusive, Hard };

struct PhaseOut {
  PhaseKind kind = PhaseKind::Inconclusive;
  LVec xreal;             // real values of internal variables at exit
  long double s_real = 0;  // slack at exit
  long double best_s = std::numeric_limits<long double>::infinity();
  int steps = 0;
};

PhaseOut run_phase(Engine& e, const SolverOptions& o) {
  PhaseOut out;
  long double t = 1.0L;
  for (int outer = 0; outer < o.max_outer; ++outer) {
    LVec cint = LVec::Zero(e.n);
    cint(e.slack) = e.d(e.slack);
    const CenterOut co = center(e, t, cint, o);
    out.steps += co.steps;
    const long double s = e.d(e.slack) * e.y(e.slack);
    out.s_real = s;
    out.best_s = std::min(out.best_s, s);
    if (co.hard) {
      out.kind = PhaseKind::Hard;
      break;
    }
    if (s <= -(long double)o.strict_margin) {
      out.kind = PhaseKind::Success;
      break;
    }
    if (co.converged && s - e.nu / t > 0.0L) {
      out.kind = PhaseKind::Certified;
      break;
    }
    if (!co.converged) {
      out.kind = PhaseKind::Inconclusive;
      break;
    }
    t *= (long double)o.barrier_factor;
    re_equilibrate(e);
  }
  out.xreal = (e.d.array() * e.y.array()).matrix();
  return out;
}

struct PathOut {
  SolveStatus status = SolveStatus::NumericalFailure;
  bool have = false;   // at least one centered iterate
  LVec xreal;          // best centered iterate, real units (kept variables)
  long double mu = 0;  // objective there
  double gap_rel = std::numeric_limits<double>::infinity();
  int steps = 0;
  std::vector<double> mu_path;
};

PathOut run_path(Engine& e, const SolverOptions& o) {
  PathOut out;
  long double t = 1.0L;
  for (int outer = 0; outer < o.max_outer; ++outer) {
    const LVec cint = -(e.creal.array() * e.d.array()).matrix();
    const CenterOut co = center(e, t, cint, o);
    out.steps += co.steps;
    if (co.hard) {
      out.status = out.have ? SolveStatus::MaxIterations
                            : SolveStatus::NumericalFailure;
      return out;
    }
    if (!co.converged) {
      out.status = out.have ? SolveStatus::MaxIterations
                            : SolveStatus::NumericalFailure;
      return out;
    }
    const long double mu =
        (e.creal.array() * e.d.array() * e.y.array()).sum();
    if (!std::isfinite((double)mu)) {
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    out.have = true;
    out.xreal = (e.d.array() * e.y.array()).matrix();
    out.mu = mu;
    out.gap_rel =
        (double)(e.nu / t / std::max(std::abs(mu), kTiny));
    out.mu_path.push_back((double)mu);
    if (out.gap_rel <= o.gap_tol) {
      out.status = SolveStatus::Optimal;
      return out;
    }
    t *= (long double)o.barrier_factor;
    re_equilibrate(e);
  }
  out.status = SolveStatus::MaxIterations;
  return out;
}

// Complete eliminated flat variables, in reverse elimination order, from the
// Schur complement of the row each one relaxes, with a trace margin.
void complete_elims(const Reduced& red, Eigen::VectorXd& x) {
  for (auto it = red.elims.rbegin(); it != red.elims.rend(); ++it) {
    const ElimSnap& es = *it;
    Eigen::MatrixXd s = es.C;
    for (int v = 0; v < static_cast<int>(es.A.size()); ++v) {
      if (v == es.var || es.A[v].isZero(0.0)) continue;
      s += x(v) * es.A[v];
    }
    s = symmetrized(s);
    const int m = static_cast<int>(s.rows());
    const int j = es.row;
    Eigen::MatrixXd minor(m - 1, m - 1);
    Eigen::VectorXd r(m - 1);
    int ri = 0;
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      r(ri) = s(i, j);
      int ci = 0;
      for (int k = 0; k < m; ++k) {
        if (k == j) continue;
        minor(ri, ci++) = s(i, k);
      }
      ++ri;
    }
    double quad = 0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(minor);
    if (ldlt.info() == Eigen::Success) {
      quad = r.dot(ldlt.solve(r));
    }
    x(es.var) = (quad + minor.trace() - s(j, j)) / es.coeff;
  }
}

void check_validity(const SdpProblem& prob) {
  const int n = prob.nvars();
  if (n <= 0) throw std::invalid_argument("sdp: problem has no variables");
  if (prob.C.empty()) throw std::invalid_argument("sdp: problem has no blocks");
  if (prob.A.size() != prob.C.size()) {
    throw std::invalid_argument("sdp: C and A block counts differ");
  }
  for (std::size_t k = 0; k < prob.C.size(); ++k) {
    if (prob.C[k].rows() != prob.C[k].cols()) {
      throw std::invalid_argument("sdp: blocks must be square");
    }
    if (static_cast<int>(prob.A[k].size()) != n) {
      throw std::invalid_argument("sdp: A[k] must have one entry per variable");
    }
    for (const auto& a : prob.A[k]) {
      if (a.rows() != prob.C[k].rows() || a.cols() != prob.C[k].cols()) {
        throw std::invalid_argument("sdp: A[k][i] size mismatch with C[k]");
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd SdpProblem::block_value(int k, const Eigen::VectorXd& x) const {
  if (k < 0 || k >= nblocks()) {
    throw std::out_of_range("block_value: block index out of range");
  }
  if (x.size() != c.size()) {
    throw std::invalid_argument("block_value: x has wrong dimension");
  }
  Eigen::MatrixXd s = C[k];
  for (int i = 0; i < nvars(); ++i) {
    if (x(i) != 0.0) s += x(i) * A[k][i];
  }
  return s;
}

SdpProblem assemble(const std::array<model::AugmentedSystem, 4>& vertices,
                    double mu_min) {
  for (const auto& v : vertices) {
    if (v.D.norm() == 0.0) {
      throw std::invalid_argument(
          "assemble: control-rate weight r must be nonzero (D loses rank)");
    }
  }
  SdpProblem prob;
  const int nv = 17;
  prob.c = Eigen::VectorXd::Zero(nv);
  prob.c(16) = 1.0;
  prob.mu_min = mu_min;

  std::array<lmi::LiftedData, 4> lift;
  for (int v = 0; v < 4; ++v) lift[v] = lmi::build_fqr(vertices[v]);

  prob.C.push_back(Eigen::MatrixXd::Zero(7, 7));
  for (int v = 0; v < 4; ++v) {
    Eigen::MatrixXd ck = Eigen::MatrixXd::Zero(13, 13);
    ck.bottomRightCorner(7, 7).setIdentity();
    prob.C.push_back(ck);
  }
  prob.C.push_back(Eigen::MatrixXd::Constant(1, 1, -mu_min));

  prob.A.resize(6);
  for (int k = 0; k < 6; ++k) {
    prob.A[k].assign(
        nv, Eigen::MatrixXd::Zero(prob.C[k].rows(), prob.C[k].cols()));
  }
  for (int var = 0; var < 16; ++var) {
    const Matrix7d p = placement(var);
    prob.A[0][var] = p;
    for (int v = 0; v < 4; ++v) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(13, 13);
      const Matrix7d fp = lift[v].F * p;
      a.topLeftCorner(6, 6) =
          -fp.topLeftCorner<6, 6>() - fp.topLeftCorner<6, 6>().transpose();
      const Eigen::Matrix<double, 6, 7> tr = (p * lift[v].Rhalf).topRows<6>();
      a.topRightCorner(6, 7) = tr;
      a.bottomLeftCorner(7, 6) = tr.transpose();
      prob.A[1 + v][var] = a;
    }
  }
  for (int v = 0; v < 4; ++v) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(13, 13);
    a.topLeftCorner(6, 6) = -lift[v].Q.topLeftCorner<6, 6>();
    prob.A[1 + v][16] = a;
  }
  prob.A[5][16] = Eigen::MatrixXd::Constant(1, 1, 1.0);

  prob.block_scale.resize(6);
  for (int k = 0; k < 6; ++k) {
    double m = prob.C[k].norm();
    for (const auto& a : prob.A[k]) m = std::max(m, a.norm());
    prob.block_scale[k] = 1.0 / std::max(m, 1e-300);
  }
  return prob;
}

SdpSolution solve(const SdpProblem& prob, const SolverOptions& opts) {
  check_validity(prob);
  SdpSolution sol;
  sol.x = Eigen::VectorXd::Zero(prob.nvars());

  const Reduced red = reduce(prob, false, 0.0);
  if (red.bad) return sol;  // NumericalFailure
  if (red.infeasible_const) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  if (!red.keep.empty() && !red.C.empty()) {
    Engine ea = build_engine(red, true);
    int mu_idx = -1;
    for (int j = 0; j < ea.nk; ++j) {
      if (red.keep[j] == prob.nvars() - 1) mu_idx = j;
    }
    init_phase_point(ea, red, mu_idx, 2.0 * prob.mu_min);
    const PhaseOut pa = run_phase(ea, opts);
    sol.iterations += pa.steps;
    if (pa.kind == PhaseKind::Certified) {
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    if (pa.kind == PhaseKind::Hard) return sol;  // NumericalFailure
    if (pa.kind == PhaseKind::Inconclusive) {
      sol.status = SolveStatus::MaxIterations;
      return sol;
    }

    Engine eb = build_engine(red, false);
    for (int j = 0; j < eb.nk; ++j) eb.y(j) = pa.xreal(j) / eb.d(j);
    PathOut pp = run_path(eb, opts);
    sol.iterations += pp.steps;
    sol.mu_path = std::move(pp.mu_path);
    if (!pp.have) {
      sol.status = pp.status;
      return sol;
    }
    sol.status = pp.status;
    sol.gap = pp.gap_rel;
    for (int j = 0; j < eb.nk; ++j) {
      sol.x(red.keep[j]) = static_cast<double>(pp.xreal(j));
    }
  } else {
    // Nothing left to optimize: constants were verified in reduce().
    sol.status = SolveStatus::Optimal;
    sol.gap = 0.0;
  }

  complete_elims(red, sol.x);
  sol.objective = prob.c.dot(sol.x);
  sol.dual_bound =
      sol.objective + sol.gap * std::max(std::abs(sol.objective), 1e-300);

  if (sol.status == SolveStatus::Optimal) {
    for (int k = 0; k < prob.nblocks(); ++k) {
      const Eigen::MatrixXd s = symmetrized(prob.block_value(k, sol.x));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
      const double floor = -opts.feas_tol * std::max(1.0, s.norm());
      if (es.eigenvalues().minCoeff() < floor) {
        sol.status = SolveStatus::NumericalFailure;
        break;
      }
    }
  }
  return sol;
}

namespace {

Phase1Result phase1_impl(const SdpProblem& prob, bool fix_mu, double mu_fixed,
                         const SolverOptions& opts) {
  Phase1Result res;
  res.x = Eigen::VectorXd::Zero(prob.nvars());

  const Reduced red = reduce(prob, fix_mu, mu_fixed);
  if (red.bad) return res;
  if (red.infeasible_const) {
    res.certified_infeasible = true;
    return res;
  }
  if (red.C.empty()) {  // all constraints were constant and PSD
    res.feasible = true;
    if (fix_mu) res.x(prob.nvars() - 1) = mu_fixed;
    complete_elims(red, res.x);
    return res;
  }

  Engine e = build_engine(red, true);
  int mu_idx = -1;
  if (!fix_mu) {
    for (int j = 0; j < e.nk; ++j) {
      if (red.keep[j] == prob.nvars() - 1) mu_idx = j;
    }
  }
  init_phase_point(e, red, mu_idx, 2.0 * prob.mu_min);
  const PhaseOut p = run_phase(e, opts);
  res.iterations = p.steps;
  res.slack = static_cast<double>(p.best_s);
  if (p.kind == PhaseKind::Certified) {
    res.certified_infeasible = true;
    return res;
  }
  if (p.kind != PhaseKind::Success) return res;

  res.feasible = true;
  for (int j = 0; j < e.nk; ++j) {
    res.x(red.keep[j]) = static_cast<double>(p.xreal(j));
  }
  if (fix_mu) res.x(prob.nvars() - 1) = mu_fixed;
  complete_elims(red, res.x);
  return res;
}

}  // namespace

Phase1Result phase1(const SdpProblem& prob, double mu_fixed,
                    const SolverOptions& opts) {
  check_validity(prob);
  return phase1_impl(prob, true, mu_fixed, opts);
}

Phase1Result phase1(const SdpProblem& prob, const SolverOptions& opts) {
  check_validity(prob);
  return phase1_impl(prob, false, 0.0, opts);
}

BisectResult bisect(const SdpProblem& prob, const SolverOptions& opts) {
  check_validity(prob);
  BisectResult res;
  res.x = Eigen::VectorXd::Zero(prob.nvars());

  const auto probe = [&](double mu) {
    ++res.phase1_calls;
    return phase1_impl(prob, true, mu, opts);
  };

  const double mu0 = std::max(2.0 * prob.mu_min, 1e-12);
  Phase1Result p = probe(mu0);
  if (!p.feasible) {
    res.status = p.certified_infeasible ? SolveStatus::Infeasible
                                        : SolveStatus::NumericalFailure;
    return res;
  }
  res.mu_lo = mu0;
  res.x = p.x;

  double hi = mu0;
  bool bracketed = false;
  for (int i = 0; i < 60 && res.phase1_calls < opts.max_bisect; ++i) {
    hi *= 2.0;
    p = probe(hi);
    if (p.feasible) {
      res.mu_lo = hi;
      res.x = p.x;
    } else {
      res.hi_certified = p.certified_infeasible;
      bracketed = true;
      break;
    }
  }
  res.mu_hi = hi;
  if (!bracketed) {
    res.status = SolveStatus::MaxIterations;
    res.gap = std::numeric_limits<double>::infinity();
    return res;
  }

  while (res.mu_hi - res.mu_lo > opts.bisect_tol * res.mu_hi &&
         res.phase1_calls < opts.max_bisect) {
    const double mid = 0.5 * (res.mu_lo + res.mu_hi);
    p = probe(mid);
    if (p.feasible) {
      res.mu_lo = mid;
      res.x = p.x;
    } else {
      res.mu_hi = mid;
      res.hi_certified = p.certified_infeasible;
    }
  }
  res.gap = (res.mu_hi - res.mu_lo) / res.mu_hi;
  res.status = res.mu_hi - res.mu_lo <= opts.bisect_tol * res.mu_hi
                   ? SolveStatus::Optimal
                   : SolveStatus::MaxIterations;
  return res;
}

lmi::Certificate to_certificate(const Eigen::VectorXd& x) {
  if (x.size() != 17) {
    throw std::invalid_argument("to_certificate: expected 17 variables");
  }
  lmi::Certificate cert;
  for (int v = 0; v < 6; ++v) {
    cert.W1(kTri[v][0], kTri[v][1]) = x(v);
    cert.W1(kTri[v][1], kTri[v][0]) = x(v);
    cert.W1(kTri[v][0] + 3, kTri[v][1] + 3) = x(6 + v);
    cert.W1(kTri[v][1] + 3, kTri[v][0] + 3) = x(6 + v);
  }
  cert.W2(3) = x(12);
  cert.W2(4) = x(13);
  cert.W2(5) = x(14);
  cert.W3 = x(15);
  cert.mu = x(16);
  return cert;
}

Eigen::VectorXd from_certificate(const lmi::Certificate& cert) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(17);
  for (int v = 0; v < 6; ++v) {
    x(v) = cert.W1(kTri[v][0], kTri[v][1]);
    x(6 + v) = cert.W1(kTri[v][0] + 3, kTri[v][1] + 3);
  }
  x(12) = cert.W2(3);
  x(13) = cert.W2(4);
  x(14) = cert.W2(5);
  x(15) = cert.W3;
  x(16) = cert.mu;
  return x;
}

}  // namespace pidsyn::sdp
