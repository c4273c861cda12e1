#include "eecdma/tmse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eecdma/error.hpp"
#include "eecdma/model.hpp"
#include "eecdma/roots.hpp"

namespace eecdma {
namespace {

// Solves for mu* and assembles the unit-norm code in the eigenbasis `basis`
// of p h^2 D D^T (eigenvalues `scaled`, projections u_i^T d in `proj`).
Eigen::VectorXd build_code(const Eigen::MatrixXd& basis, const Eigen::VectorXd& scaled,
                           const Eigen::VectorXd& proj, double amplitude, const TmseConfig& cfg) {
  const double mu = mu_search(std::span<const double>(scaled.data(), static_cast<std::size_t>(scaled.size())),
                              std::span<const double>(proj.data(), static_cast<std::size_t>(proj.size())),
                              amplitude, cfg);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(basis.rows());
  Eigen::Index pole = -1;
  for (Eigen::Index i = 0; i < scaled.size(); ++i) {
    const double denom = scaled[i] + mu;
    if (denom == 0.0) {
      if (pole < 0) pole = i;
      continue;
    }
    if (proj[i] != 0.0) s += (amplitude * proj[i] / denom) * basis.col(i);
  }
  const double norm_sq = s.squaredNorm();
  if (pole >= 0 && norm_sq < 1.0) {
    // Boundary solution: the deficit goes along the smallest-eigenvalue direction.
    s += std::sqrt(1.0 - norm_sq) * basis.col(pole);
  }
  return s / s.norm();
}

// Eigenbasis of D D^T shared by every code update of one sweep; the scaled
// matrix p_k h_k^2 D D^T only rescales its eigenvalues.
class CodeUpdater {
 public:
  CodeUpdater(const Eigen::MatrixXd& D, const TmseConfig& cfg) : cfg_(cfg) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D * D.transpose());
    basis_ = eig.eigenvectors();
    eigvals_ = eig.eigenvalues();
    const double lam_max = eigvals_.size() > 0 ? eigvals_.maxCoeff() : 0.0;
    projections_ = basis_.transpose() * D;
    for (Eigen::Index i = 0; i < eigvals_.size(); ++i) {
      if (eigvals_[i] <= cfg.pseudo_rank_tol * lam_max) {
        // Receivers lie in range(D); their null-space components are roundoff.
        eigvals_[i] = 0.0;
        projections_.row(i).setZero();
      }
    }
  }

  Eigen::VectorXd update(Eigen::Index k, double p, double h) const {
    const Eigen::VectorXd scaled = (p * h * h) * eigvals_;
    return build_code(basis_, scaled, projections_.col(k), std::sqrt(p) * h, cfg_);
  }

 private:
  const TmseConfig& cfg_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigvals_;
  Eigen::MatrixXd projections_;
};

void require_active(const NetworkState& state) {
  for (Eigen::Index i = 0; i < state.users(); ++i) {
    if (!(state.powers[i] > 0.0)) throw InvalidArgument("TMSE optimization needs every p_i > 0");
  }
}

}  // namespace

void TmseConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("TmseConfig: max_iters must be >= 1");
  if (!(tmse_tol > 0.0) || !(code_tol > 0.0) || !(mu_tol > 0.0) || !(pseudo_rank_tol > 0.0)) {
    throw InvalidArgument("TmseConfig: tolerances must be > 0");
  }
}

double tmse(const NetworkState& state, const SystemConfig& cfg) {
  const Eigen::MatrixXd m = covariance(state, cfg);
  const Eigen::MatrixXd md = m * state.receivers;
  double total = 0.0;
  for (Eigen::Index k = 0; k < state.users(); ++k) {
    const auto d = state.receivers.col(k);
    total += 1.0 + d.dot(md.col(k)) - 2.0 * std::sqrt(state.powers[k]) * state.gains[k] * d.dot(state.codes.col(k));
  }
  return total;
}

Eigen::MatrixXd receiver_sweep(const NetworkState& state, const SystemConfig& cfg) {
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance(state, cfg));
  const Eigen::VectorXd amp = (state.powers.array().sqrt() * state.gains.array()).matrix();
  return llt.solve(state.codes) * amp.asDiagonal();
}

double code_norm(std::span<const double> eigvals, std::span<const double> projections, double amplitude,
                 double mu) {
  double sum = 0.0;
  for (std::size_t i = 0; i < eigvals.size(); ++i) {
    if (projections[i] == 0.0) continue;
    const double denom = eigvals[i] + mu;
    if (denom == 0.0) continue;
    const double term = projections[i] / denom;
    sum += term * term;
  }
  return amplitude * std::sqrt(sum);
}

double mu_search(std::span<const double> eigvals, std::span<const double> projections, double amplitude,
                 const TmseConfig& cfg) {
  if (eigvals.size() != projections.size()) throw InvalidArgument("mu_search: size mismatch");
  double lam_min = std::numeric_limits<double>::infinity();
  double total = 0.0;
  bool pole_active = false;
  for (std::size_t i = 0; i < eigvals.size(); ++i) lam_min = std::min(lam_min, eigvals[i]);
  for (std::size_t i = 0; i < eigvals.size(); ++i) {
    total += projections[i] * projections[i];
    if (eigvals[i] == lam_min && projections[i] != 0.0) pole_active = true;
  }
  if (total == 0.0 || !(amplitude > 0.0)) throw InvalidArgument("code update undefined");

  // Work with the offset t = mu + lam_min > 0 so lambda_i + mu never cancels.
  std::vector<double> shifted(eigvals.size());
  for (std::size_t i = 0; i < eigvals.size(); ++i) shifted[i] = eigvals[i] - lam_min;
  auto excess = [&](double t) {
    if (t == 0.0 && pole_active) return std::numeric_limits<double>::infinity();
    return code_norm(shifted, projections, amplitude, t) - 1.0;
  };

  if (!pole_active && excess(0.0) <= cfg.mu_tol) return -lam_min;

  // Every denominator is >= t, so the norm is <= amplitude * ||proj|| / t.
  const double t_hi = roots::expand_upper(excess, 0.0, amplitude * std::sqrt(total));
  const double t = roots::bisect(excess, 0.0, t_hi, 1e-15);
  if (std::abs(excess(t)) > cfg.mu_tol) {
    throw NumericalError("mu_search: norm residual above mu_tol");
  }
  return t - lam_min;
}

Eigen::VectorXd code_update(const Eigen::VectorXd& d, const Eigen::MatrixXd& D, double p, double h,
                            const TmseConfig& cfg) {
  const double d_norm = d.norm();
  if (d_norm == 0.0) throw InvalidArgument("code update undefined for a zero receiver");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D * D.transpose());
  Eigen::VectorXd lam = eig.eigenvalues();
  Eigen::VectorXd proj = eig.eigenvectors().transpose() * d;
  const double lam_max = lam.size() > 0 ? lam.maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] <= cfg.pseudo_rank_tol * lam_max) {
      lam[i] = 0.0;
      if (std::abs(proj[i]) <= 1e-12 * d_norm) proj[i] = 0.0;
    }
  }
  return build_code(eig.eigenvectors(), (p * h * h) * lam, proj, std::sqrt(p) * h, cfg);
}

TmseResult optimize(const NetworkState& state, const SystemConfig& cfg, const TmseConfig& tcfg) {
  tcfg.validate();
  require_active(state);
  NetworkState work = state;
  TmseResult result;
  auto record_step = [&] {
    if (tcfg.record_steps) result.step_trace.push_back(tmse(work, cfg));
  };
  record_step();

  const int max_escapes = static_cast<int>(std::min(work.dim(), work.users()));
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int sweep = 0; sweep < tcfg.max_iters; ++sweep) {
    work.receivers = receiver_sweep(work, cfg);
    record_step();
    const CodeUpdater updater(work.receivers, tcfg);
    double code_change = 0.0;
    for (Eigen::Index k = 0; k < work.users(); ++k) {
      const Eigen::VectorXd next = updater.update(k, work.powers[k], work.gains[k]);
      code_change = std::max(code_change, (next - work.codes.col(k)).cwiseAbs().maxCoeff());
      work.codes.col(k) = next;
      record_step();
    }
    const double current = tmse(work, cfg);
    result.tmse_trace.push_back(current);
    result.sweeps = sweep + 1;
    result.last_code_change = code_change;
    if (sweep > 0 && previous - current <= tcfg.tmse_tol * previous && code_change <= tcfg.code_tol) {
      if (result.rank_escapes < max_escapes) {
        NetworkState nudged = work;
        if (break_rank_deficiency(nudged.codes)) {
          nudged.receivers = receiver_sweep(nudged, cfg);
          if (tmse(nudged, cfg) <= current) {
            work = std::move(nudged);
            ++result.rank_escapes;
            record_step();
            previous = std::numeric_limits<double>::quiet_NaN();
            continue;
          }
        }
      }
      result.converged = true;
      break;
    }
    previous = current;
  }
  work.receivers = receiver_sweep(work, cfg);
  record_step();
  result.codes = std::move(work.codes);
  result.receivers = std::move(work.receivers);
  return result;
}

bool break_rank_deficiency(Eigen::MatrixXd& codes, double angle, double rank_tol) {
  const Eigen::Index r = std::min(codes.rows(), codes.cols());
  if (r == 0) return false;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(codes, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv[r - 1] > rank_tol * sv[0]) return false;
  // S v ~ 0 names the dependent codes; S^T u ~ 0 gives the unused direction.
  const Eigen::VectorXd u = svd.matrixU().col(r - 1);
  Eigen::Index k = 0;
  svd.matrixV().col(r - 1).cwiseAbs().maxCoeff(&k);
  Eigen::VectorXd moved = std::cos(angle) * codes.col(k) + std::sin(angle) * u;
  codes.col(k) = moved / moved.norm();
  return true;
}

double orthogonality_residual(const Eigen::MatrixXd& codes) {
  const Eigen::MatrixXd gram = codes.transpose() * codes;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double wbe_residual(const NetworkState& state) {
  const Eigen::VectorXd a = state.received_powers();
  const double level = a.sum() / static_cast<double>(state.dim());
  Eigen::MatrixXd total = state.codes * a.asDiagonal() * state.codes.transpose();
  total.diagonal().array() -= level;
  return total.cwiseAbs().maxCoeff() / level;
}

}  // namespace eecdma
