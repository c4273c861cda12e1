#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eecdma/system.hpp"

namespace eecdma {

struct TmseConfig {
  int max_iters = 5000;            ///< full receiver+code sweeps
  double tmse_tol = 1e-10;         ///< stop when the relative TMSE decrease of a sweep is below this
  double code_tol = 1e-10;         ///< and no code entry may move by more than this in that sweep
  double mu_tol = 1e-10;           ///< accepted | ||s_k|| - 1 | in the multiplier search
  double pseudo_rank_tol = 1e-12;  ///< eigenvalues below this * lambda_max are treated as zero
  bool record_steps = false;       ///< also record TMSE after every receiver sweep and code update

  void validate() const;
};

struct TmseResult {
  Eigen::MatrixXd codes;
  Eigen::MatrixXd receivers;          ///< MMSE receivers for `codes`
  std::vector<double> tmse_trace;     ///< TMSE after each sweep
  std::vector<double> step_trace;     ///< per-step TMSE, filled when record_steps is set
  int sweeps = 0;
  int rank_escapes = 0;               ///< break_rank_deficiency rotations applied
  double last_code_change = 0.0;      ///< max code entry change in the last sweep
  bool converged = false;
};

/// Sum of per-user MSEs with the receivers stored in `state`.
double tmse(const NetworkState& state, const SystemConfig& cfg);

/// MMSE receivers for every user, sqrt(p_i) h_i M^{-1} s_i.
Eigen::MatrixXd receiver_sweep(const NetworkState& state, const SystemConfig& cfg);

/// Norm of sqrt(p) h sum_i z(lambda_i, mu) u_i u_i^T d for eigenvalues
/// `eigvals` of p h^2 D D^T and projections u_i^T d.
double code_norm(std::span<const double> eigvals, std::span<const double> projections, double amplitude,
                 double mu);

/// Multiplier mu* making the code update unit norm.
///
/// Searches mu on (-lambda_min, inf), where the norm falls monotonically from
/// +inf to 0. When d has no component along the lambda_min eigenspace and the
/// norm limit at -lambda_min is already <= 1, returns -lambda_min (the code
/// update then completes the norm inside that eigenspace).
/// Throws InvalidArgument("code update undefined") if every projection is zero.
double mu_search(std::span<const double> eigvals, std::span<const double> projections, double amplitude,
                 const TmseConfig& cfg);

/// Unit-norm code sqrt(p) h (p h^2 D D^T + mu* I)^+ d minimizing TMSE over s_k
/// for fixed receivers D. `d` is user k's receiver (a column of D).
Eigen::VectorXd code_update(const Eigen::VectorXd& d, const Eigen::MatrixXd& D, double p, double h,
                            const TmseConfig& cfg);

/// Alternates receiver sweeps and per-user code updates until the relative
/// TMSE decrease drops below cfg.tmse_tol and codes stop moving. A run that
/// settles on rank-deficient codes is nudged by break_rank_deficiency (at most
/// min(N, K) times, and only when the nudge plus a receiver sweep does not
/// raise TMSE) and continues. Requires every p_i > 0.
TmseResult optimize(const NetworkState& state, const SystemConfig& cfg, const TmseConfig& tcfg = {});

/// Codes that span fewer than min(N, K) dimensions keep that span under
/// receiver and code updates, so orthogonal or WBE sets stay out of reach.
/// Rotates the code most involved in the linear dependency by `angle` toward
/// a direction orthogonal to span(S). Returns false when S has full rank,
/// judged by sigma_min(S) > rank_tol * sigma_max(S).
bool break_rank_deficiency(Eigen::MatrixXd& codes, double angle = 1e-4, double rank_tol = 1e-6);

/// max |S^T S - I|.
double orthogonality_residual(const Eigen::MatrixXd& codes);

/// max |S A S^T - (tr(A)/N) I| / (tr(A)/N) with A = diag(p h^2); zero for
/// WBE sequences at equal received power.
double wbe_residual(const NetworkState& state);

}  // namespace eecdma
