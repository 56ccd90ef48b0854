#include "conecoord/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "conecoord/errors.hpp"

namespace conecoord {

double feasibility_dist(const ConeSpec& cone, const Eigen::VectorXd& theta) {
  return project_dual_cone(cone, theta).norm();
}

double lyapunov_value(const ProblemSpec& spec, const AugLagParams& params,
                      const BlockVector& u, const Eigen::VectorXd& p,
                      double eps, const SaddleReference& reference) {
  const double n_blocks = static_cast<double>(spec.block_count());
  const double gap = lagrangian_value(spec, u, reference.p_star) -
                     lagrangian_value(spec, reference.u_star, reference.p_star);
  return bregman_d(spec.core, reference.u_star, u) +
         eps / (2.0 * params.gamma * n_blocks) *
             (reference.p_star - p).squaredNorm() +
         eps * gap;
}

QualityReport kkt_report(const ProblemSpec& spec, const AugLagParams& params,
                         const BlockVector& u, const Eigen::VectorXd& p,
                         const SaddleReference* reference,
                         std::optional<double> eps_k,
                         std::optional<double> optimal_value) {
  if (eps_k && !reference)
    throw ConfigError("Lyapunov value requested without a reference saddle");

  QualityReport report;
  const double objective = spec.objective(u);
  if (optimal_value) {
    report.suboptimality = std::abs(objective - *optimal_value);
  } else if (reference) {
    report.suboptimality = std::abs(objective - spec.objective(reference->u_star));
  } else {
    report.suboptimality = objective;
    report.suboptimality_is_raw_objective = true;
  }

  const Eigen::VectorXd theta = theta_value(spec, u);
  report.feasibility = feasibility_dist(spec.cone, theta);
  report.kkt_complementarity = std::abs(p.dot(theta));

  const double cap = max_step_bound(spec, params.gamma);
  const double eps_test = std::min(1e-3, cap / 2.0);
  const BlockVector mapped = full_primal_update(spec, params, u, p, eps_test);
  report.kkt_stationarity = (u.flat() - mapped.flat()).norm() / eps_test;

  if (reference && eps_k)
    report.lyapunov = lyapunov_value(spec, params, u, p, *eps_k, *reference);
  return report;
}

RateFit fit_rate(const std::vector<IterationTrace>& traces, RateMetric metric,
                 double alpha, double burn_in_fraction) {
  if (traces.empty()) throw ConfigError("fit_rate needs at least one trace");
  if (!(alpha > 0.5 && alpha < 1.0))
    throw ConfigError("fit_rate: alpha must lie in (1/2, 1)");

  // Align on the shortest trace; records are at identical iteration indices
  // for runs sharing a config.
  std::size_t n_records = traces.front().records.size();
  for (const auto& t : traces) n_records = std::min(n_records, t.records.size());

  auto metric_at = [&](const TraceRecord& rec) {
    if (metric == RateMetric::Suboptimality)
      return rec.suboptimality ? *rec.suboptimality : rec.objective;
    return rec.feasibility;
  };

  std::vector<double> ks, values;
  for (std::size_t r = 0; r < n_records; ++r) {
    const long k = traces.front().records[r].k;
    if (k < 1) continue;  // log(0)
    double mean = 0.0;
    for (const auto& t : traces) mean += metric_at(t.records[r]);
    mean /= static_cast<double>(traces.size());
    ks.push_back(static_cast<double>(k));
    values.push_back(mean);
  }

  const auto burn =
      static_cast<std::size_t>(burn_in_fraction * static_cast<double>(ks.size()));
  if (ks.size() - burn < 10)
    throw ConfigError("fit_rate: fewer than 10 records after burn-in");

  RateFit fit;
  fit.target_exponent =
      traces.size() > 1 ? -(1.0 - alpha) : -(1.0 - alpha) / 2.0;
  fit.window_begin_k = static_cast<long>(ks[burn]);
  fit.window_end_k = static_cast<long>(ks.back());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double envelope = 0.0;
  std::size_t count = 0;
  for (std::size_t r = burn; r < ks.size(); ++r) {
    double v = values[r];
    if (v < 1e-16) {
      v = 1e-16;
      fit.clipped_nonpositive = true;
    }
    const double x = std::log(ks[r]);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
    envelope = std::max(
        envelope, values[r] * std::pow(ks[r], -fit.target_exponent));
  }
  const double n = static_cast<double>(count);
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.envelope_constant = envelope;
  return fit;
}

Lemma52Report lemma52_check(const ProblemSpec& spec, const AugLagParams& params,
                            const BlockVector& u,
                            const SaddleReference& reference) {
  const double gap =
      eval_L_gamma(spec, params, u, reference.p_star) -
      eval_L_gamma(spec, params, reference.u_star, reference.p_star);
  const double gap_pos = std::max(gap, 0.0);
  const double two_over_gamma = 2.0 / params.gamma;

  Lemma52Report report;
  const Eigen::VectorXd theta = theta_value(spec, u);
  const Eigen::VectorXd xi = xi_opt(spec, params, u, reference.p_star);
  report.slack_distance = {(theta - xi).squaredNorm(), two_over_gamma * gap_pos};
  report.suboptimality = {
      std::abs(spec.objective(u) - spec.objective(reference.u_star)),
      gap_pos + reference.p_star.norm() * std::sqrt(two_over_gamma * gap_pos)};
  report.feasibility = {project_dual_cone(spec.cone, theta).squaredNorm(),
                        two_over_gamma * gap_pos};
  return report;
}

}  // namespace conecoord
