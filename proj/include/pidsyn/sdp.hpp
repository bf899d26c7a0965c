#pragma once

#include <array>
#include <vector>

#include "pidsyn/linalg.hpp"
#include "pidsyn/lmi.hpp"
#include "pidsyn/model.hpp"

namespace pidsyn::sdp {

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

struct SolverOptions {
  double gap_tol = 1e-9;         // relative duality-gap target
  double feas_tol = 1e-10;       // relative block-eigenvalue tolerance
  double mu_min = 1e-12;         // lower bound on the objective variable
  int max_outer = 200;           // barrier parameter updates
  int max_newton = 100;          // Newton steps per centering
  double barrier_factor = 10.0;  // barrier parameter multiplier
  double newton_tol = 1e-10;     // centering gradient-norm tolerance
  double strict_margin = 1e-9;   // phase-1 slack margin declaring feasibility
  double bisect_tol = 1e-4;      // relative bracket width target
  int max_bisect = 80;           // phase-1 calls budget for bisection
};

// Linear SDP in standard primal form: maximize c.x subject to
//   S_k(x) = C[k] + sum_i x[i] * A[k][i]  >= 0  for every block k.
//
// Problems produced by assemble() use the fixed 17-variable basis
//   x[0..5]   upper triangle of the reference block W1(0:2, 0:2)
//             in row-major order (0,0),(0,1),(0,2),(1,1),(1,2),(2,2),
//   x[6..11]  upper triangle of the error block W1(3:5, 3:5), same order,
//   x[12..14] W2(3), W2(4), W2(5),
//   x[15]     W3,
//   x[16]     mu,
// and the fixed block order
//   block 0      7x7   W >= 0,
//   blocks 1..4  13x13 Schur forms of theta1 <= 0 at the four vertices,
//   block 5      1x1   mu - mu_min >= 0.
// The placements are disjoint: every variable touches a distinct set of
// entries of W, so the basis is a coordinate system, not a parameterization.
//
// block_scale records the Frobenius normalization 1 / max_i ||A[k][i]||_F
// that the solver applies internally to each block; the stored C and A are
// unscaled and all reported quantities are in unscaled units.
struct SdpProblem {
  std::vector<Eigen::MatrixXd> C;
  std::vector<std::vector<Eigen::MatrixXd>> A;  // A[block][var]
  Eigen::VectorXd c;
  double mu_min = 0.0;
  std::vector<double> block_scale;

  [[nodiscard]] int nvars() const { return static_cast<int>(c.size()); }
  [[nodiscard]] int nblocks() const { return static_cast<int>(C.size()); }

  // S_k(x) for one block.
  [[nodiscard]] Eigen::MatrixXd block_value(int k,
                                            const Eigen::VectorXd& x) const;
};

struct SdpSolution {
  Eigen::VectorXd x;          // primal point (flat variables completed)
  double objective = 0.0;     // c.x at the reported point
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;         // total Newton steps across all phases
  double gap = 0.0;           // relative duality-gap estimate at the point
  double dual_bound = 0.0;    // upper bound objective * (1 + gap) implied
  std::vector<double> mu_path;  // centered objective after each outer step
};

struct Phase1Result {
  bool feasible = false;              // witness with slack <= -strict_margin
  bool certified_infeasible = false;  // lower bound on min-slack is positive
  Eigen::VectorXd x;                  // strictly feasible witness if feasible
  double slack = 0.0;                 // best centered slack (scaled units)
  int iterations = 0;
};

struct BisectResult {
  double mu_lo = 0.0;         // largest certified-feasible mu
  double mu_hi = 0.0;         // smallest mu where phase-1 does not succeed
  bool hi_certified = false;  // mu_hi carries an infeasibility certificate
  Eigen::VectorXd x;          // witness at mu_lo
  int phase1_calls = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double gap = 0.0;           // relative bracket width (mu_hi-mu_lo)/mu_hi
};

// Build the synthesis SDP for the four vertex systems: maximize mu subject
// to W >= 0, the four 13x13 Schur blocks, and mu >= mu_min, over the
// structured 17-variable basis documented on SdpProblem.
[[nodiscard]] SdpProblem assemble(
    const std::array<model::AugmentedSystem, 4>& vertices,
    double mu_min = 1e-12);

// Interior-point solve: a feasibility phase (all-variables slack
// minimization) followed by log-det barrier path following on the objective.
// The solver first eliminates barrier-flat variables — variables with zero
// objective coefficient whose only appearance is one positive diagonal entry
// of one block (for assembled problems: W3, which the projection removes
// from every Schur block).  Such a variable makes the log-det barrier
// unbounded in its direction; the block row/column it relaxes is removed and
// the variable is completed after the solve from the Schur complement of the
// remaining block, with a trace margin keeping the witness strictly
// feasible.  Deterministic: identical inputs give identical outputs.
[[nodiscard]] SdpSolution solve(const SdpProblem& prob,
                                const SolverOptions& opts = {});

// Feasibility probe at a fixed value of the objective variable (the last
// variable by convention): minimize the common slack s over
// S_k(x) + s I >= 0, s >= -1, stopping as soon as the centered slack is
// comfortably negative.  Declares certified infeasibility when the centered
// slack minus the barrier gap is positive, which lower-bounds the true
// minimum slack above zero.
[[nodiscard]] Phase1Result phase1(const SdpProblem& prob, double mu_fixed,
                                  const SolverOptions& opts = {});

// Free-objective feasibility probe: same slack minimization with the last
// variable left free, started from the documented initial guess (structured
// alpha grid, objective variable at 2 * mu_min).
[[nodiscard]] Phase1Result phase1(const SdpProblem& prob,
                                  const SolverOptions& opts = {});

// Bisection on mu with phase-1 as the feasibility oracle: grows mu_hi by
// doubling from a feasible mu_lo, then bisects the bracket to bisect_tol
// relative width.  Serves as the fallback entry point when path following
// stalls before reaching gap_tol.
[[nodiscard]] BisectResult bisect(const SdpProblem& prob,
                                  const SolverOptions& opts = {});

// Mapping between the structured 17-variable basis and certificates.
[[nodiscard]] lmi::Certificate to_certificate(const Eigen::VectorXd& x);
[[nodiscard]] Eigen::VectorXd from_certificate(const lmi::Certificate& cert);

}  // namespace pidsyn::sdp
