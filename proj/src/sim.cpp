#include "lago/sim.hpp"

#include <cmath>
#include <limits>
#include <thread>

#include "lago/errors.hpp"
#include "lago/inference.hpp"
#include "lago/model.hpp"
#include "lago/optimizer.hpp"
#include "lago/rng.hpp"
#include "lago/stats.hpp"

namespace lago {

double eta_from_rho(double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw RhoOutOfRange(rho);
  return rho / std::sqrt(1.0 - rho * rho);
}

Eigen::VectorXd centre_characteristics(const ScenarioConfig& config,
                                       int replicate) {
  if (config.centre_Z_mode == CentreZMode::fixed_list) {
    return config.Z_values.head(config.J);
  }
  SubstreamRng rng(config.seed, static_cast<std::uint64_t>(replicate), 0,
                   StreamPurpose::centre_z);
  Eigen::VectorXd Z(config.J);
  for (int j = 0; j < config.J; ++j) Z[j] = rng.normal();
  return Z;
}

TrialDataset simulate_stage(const ScenarioConfig& config, int stage,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& Z,
                            int replicate) {
  const int P = config.P;
  Eigen::VectorXd etas(P);
  for (int p = 0; p < P; ++p) etas[p] = eta_from_rho(config.rho_targets[p]);

  const auto rep = static_cast<std::uint64_t>(replicate);
  const auto stg = static_cast<std::uint64_t>(stage);
  SubstreamRng arms(config.seed, rep, stg, StreamPurpose::arms);
  SubstreamRng xi(config.seed, rep, stg, StreamPurpose::intervention_noise);
  SubstreamRng eps(config.seed, rep, stg, StreamPurpose::outcome_noise);

  const bool have_offsets = config.eta_offsets.size() != 0;
  TrialDataset ds;
  for (int j = 0; j < config.J; ++j) {
    const int n = config.n_by_centre_stage(j, stage - 1);
    const int n_int = (n * config.arm_ratio.intervention) /
                      (config.arm_ratio.intervention + config.arm_ratio.control);
    const std::vector<int> perm = arms.permutation(n);
    std::vector<std::uint8_t> is_intervention(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n_int; ++i) {
      is_intervention[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = 1;
    }
    for (int i = 0; i < n; ++i) {
      TrialRecord r;
      r.stage = stage;
      r.centre = j + 1;
      const double eps_i = config.noise_sd * eps.normal();
      if (is_intervention[static_cast<std::size_t>(i)]) {
        r.arm = Arm::intervention;
        Eigen::VectorXd a(P);
        for (int p = 0; p < P; ++p) {
          double mean = x[p] + etas[p] * Z[j];
          if (have_offsets) mean += config.eta_offsets(j, p);
          a[p] = mean + config.a_noise_sd * xi.normal();
        }
        r.actual = a;
        r.outcome = config.beta_true.dot(a) + config.beta_z * Z[j] + eps_i;
      } else {
        r.arm = Arm::control;
        r.actual = Eigen::VectorXd::Zero(P);
        r.outcome = config.beta_z * Z[j] + eps_i;
      }
      ds.records.push_back(std::move(r));
    }
  }
  ds.finalize();
  return ds;
}

Eigen::VectorXd scenario_weights(const ScenarioConfig& config) {
  if (config.weights_mode == WeightsMode::equal) {
    return Eigen::VectorXd::Constant(config.J, 1.0 / config.J);
  }
  return planned_weights(config.n_by_centre_stage);
}

namespace {

OptimizationProblem base_problem(const ScenarioConfig& config,
                                 const Eigen::VectorXd& weights) {
  OptimizationProblem problem;
  problem.cost = config.cost;
  problem.goal = config.goal;
  problem.direction = config.direction;
  problem.bounds = config.bounds;
  problem.weights = weights;
  problem.include_eta = true;
  problem.lower_bound_policy = config.lower_bound_policy;
  return problem;
}

struct StageSummary {
  double mean_cost_actual = 0.0;
  double exp_out_actual = 0.0;
  double avg_obs_out = 0.0;
};

// Equal-centre-weighted summaries of the delivered interventions in a stage.
StageSummary summarize_stage(const ScenarioConfig& config,
                             const TrialDataset& ds, double gamma_bar_eq) {
  StageSummary s;
  Eigen::MatrixXd abar = Eigen::MatrixXd::Zero(config.J, config.P);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(config.J);
  double cost_sum = 0.0;
  double y_sum = 0.0;
  double n_int = 0.0;
  for (const auto& r : ds.records) {
    if (r.arm != Arm::intervention) continue;
    abar.row(r.centre - 1) += r.actual.transpose();
    count[r.centre - 1] += 1.0;
    cost_sum += evaluate_cost(config.cost, r.actual);
    y_sum += r.outcome;
    n_int += 1.0;
  }
  Eigen::VectorXd mean_a = Eigen::VectorXd::Zero(config.P);
  int centres_with_data = 0;
  for (int j = 0; j < config.J; ++j) {
    if (count[j] > 0.0) {
      mean_a += abar.row(j).transpose() / count[j];
      ++centres_with_data;
    }
  }
  if (centres_with_data > 0) mean_a /= static_cast<double>(centres_with_data);
  s.exp_out_actual = config.beta_true.dot(mean_a) + gamma_bar_eq;
  s.mean_cost_actual = n_int > 0.0 ? cost_sum / n_int : 0.0;
  s.avg_obs_out = n_int > 0.0 ? y_sum / n_int : 0.0;
  return s;
}

}  // namespace

OptimizationProblem true_problem(const ScenarioConfig& config,
                                 const Eigen::VectorXd& Z,
                                 const Eigen::VectorXd& weights) {
  OptimizationProblem problem = base_problem(config, weights);
  problem.lower_bound_policy = LowerBoundPolicy::none;
  problem.coefficients.beta_A = config.beta_true;
  problem.coefficients.gamma = config.beta_z * Z;
  problem.coefficients.eta = Eigen::VectorXd();
  return problem;
}

ReplicateMetrics run_replicate(const ScenarioConfig& config, int replicate) {
  ReplicateMetrics m;
  m.replicate = replicate;
  const int P = config.P;
  try {
    const Eigen::VectorXd Z = centre_characteristics(config, replicate);
    const Eigen::VectorXd w = scenario_weights(config);
    const Eigen::VectorXd gamma_true = config.beta_z * Z;
    const double gamma_bar_eq = gamma_true.mean();

    // Stage 1 and the interim analysis.
    const TrialDataset ds1 =
        simulate_stage(config, 1, config.x_stage1, Z, replicate);
    const ModelFit fit1 = fit(ds1);

    const OptimizationProblem base = base_problem(config, w);
    Recommendation prev;
    prev.x.components = config.x_stage1;
    prev.x.bounds = config.bounds;
    prev.feasible = true;
    prev.cost = evaluate_cost(config.cost, config.x_stage1);

    Eigen::VectorXd x2 = config.x_stage1;
    if (config.use_lago) {
      const SandwichCovariance cov1 = sandwich(fit1, ds1);
      const Recommendation rec2 = recommend_next_stage(
          fit1, cov1, base, prev, config.lower_bound_policy);
      x2 = rec2.x.components;
      m.interim_shrunk = rec2.shrunk_to_previous;
    }
    m.xopt_stage2 = x2;

    // Stage 2 and the combined analysis.
    const TrialDataset ds2 = simulate_stage(config, 2, x2, Z, replicate);
    TrialDataset combined;
    combined.records = ds1.records;
    combined.records.insert(combined.records.end(), ds2.records.begin(),
                            ds2.records.end());
    combined.finalize();
    const ModelFit cfit = fit(combined);
    const SandwichCovariance scov = sandwich(cfit, combined);

    const double zq = stats::normal_quantile(0.5 + config.level / 2.0);
    m.beta_hat = cfit.beta_A;
    m.se.resize(P);
    m.covered.assign(static_cast<std::size_t>(P), 0);
    m.rej_individual.assign(static_cast<std::size_t>(P), 0);
    for (int p = 0; p < P; ++p) {
      m.se[p] = std::sqrt(std::max(0.0, scov.cov_beta(p, p)));
      m.covered[static_cast<std::size_t>(p)] =
          std::fabs(cfit.beta_A[p] - config.beta_true[p]) <= zq * m.se[p] ? 1 : 0;
      m.rej_individual[static_cast<std::size_t>(p)] =
          wald_individual(cfit, scov, p + 1).p_value < 0.05 ? 1 : 0;
    }
    const TestResult joint = wald_joint(cfit, scov);
    m.p_joint = joint.p_value;
    m.rej_joint = joint.p_value < 0.05;
    m.p_delta = delta_test(combined).p_value;

    // Final optimization on the combined fit.
    OptimizationProblem final_problem = base;
    final_problem.coefficients.beta_A = cfit.beta_A;
    final_problem.coefficients.gamma = cfit.gamma;
    final_problem.coefficients.eta = cfit.eta;
    final_problem.include_eta = true;
    if (config.lower_bound_policy == LowerBoundPolicy::previous_recommendation) {
      for (int p = 0; p < P; ++p) {
        auto& bb = final_problem.bounds[static_cast<std::size_t>(p)];
        bb.lower = std::min(std::max(bb.lower, x2[p]), bb.upper);
      }
    }
    try {
      m.xopt_final = optimize(final_problem).x.components;
    } catch (const Infeasible&) {
      m.xopt_final = x2;
      m.final_shrunk = true;
    }

    // Truth-based quantities.
    const OptimizationProblem truth = true_problem(config, Z, w);
    try {
      m.true_xopt = optimize(truth).x.components;
    } catch (const Infeasible&) {
      m.true_xopt = max_gain_corner(truth);
    }
    m.true_mean_at_stage2 = config.beta_true.dot(x2) + w.dot(gamma_true);
    m.true_mean_at_final =
        config.beta_true.dot(m.xopt_final) + w.dot(gamma_true);

    if (config.compute_set_band) {
      const ConfidenceSetResult set =
          confidence_set(cfit, scov, base, config.grid_resolution, config.level);
      m.set_fraction = set.set_perc / 100.0;
      m.set_covers_true = ci_mean_contains(cfit, scov, m.true_xopt, w,
                                           config.level, config.goal);
      const ConfidenceBandResult band =
          confidence_band(cfit, scov, w, config.bounds, config.grid_resolution,
                          config.level, config.band_df_policy);
      const double gamma_part = w.dot(gamma_true);
      bool all_inside = true;
      const std::size_t total = band.grid.size();
      for (std::size_t i = 0; i < total && all_inside; ++i) {
        const Eigen::VectorXd x = band.grid.point(i);
        const double truth_mean = config.beta_true.dot(x) + gamma_part;
        all_inside = std::fabs(band.centre[i] - truth_mean) <= band.half_width[i];
      }
      m.band_covers_all = all_inside;
    }

    // Equal-centre-weighted outcome/cost summaries.
    const StageSummary s1 = summarize_stage(config, ds1, gamma_bar_eq);
    const StageSummary s2 = summarize_stage(config, ds2, gamma_bar_eq);
    m.cost_actual_s1 = s1.mean_cost_actual;
    m.cost_actual_s2 = s2.mean_cost_actual;
    m.exp_out_act_s1 = s1.exp_out_actual;
    m.exp_out_act_s2 = s2.exp_out_actual;
    m.avg_obs_out_s1 = s1.avg_obs_out;
    m.avg_obs_out_s2 = s2.avg_obs_out;
    m.cost_rec_s1 = evaluate_cost(config.cost, config.x_stage1);
    m.cost_rec_s2 = evaluate_cost(config.cost, x2);
    m.exp_out_rec_s1 = config.beta_true.dot(config.x_stage1) + gamma_bar_eq;
    m.exp_out_rec_s2 = config.beta_true.dot(x2) + gamma_bar_eq;
    m.exp_out_estopt = config.beta_true.dot(m.xopt_final) + gamma_bar_eq;
  } catch (const Error& e) {
    m.failed = true;
    m.failure = e.what();
  }
  return m;
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

AggregateReport run_scenario(const ScenarioConfig& config,
                             std::vector<ReplicateMetrics>* per_replicate_out) {
  config.validate();
  const int R = config.replicates;
  std::vector<ReplicateMetrics> rows(static_cast<std::size_t>(R));

  const int threads = std::min(config.threads, R);
  if (threads <= 1) {
    for (int r = 0; r < R; ++r) {
      rows[static_cast<std::size_t>(r)] = run_replicate(config, r);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        for (int r = t; r < R; r += threads) {
          rows[static_cast<std::size_t>(r)] = run_replicate(config, r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  AggregateReport agg;
  agg.replicates_requested = R;
  const int P = config.P;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<std::vector<double>> beta(static_cast<std::size_t>(P));
  std::vector<std::vector<double>> se(static_cast<std::size_t>(P));
  std::vector<double> covered(static_cast<std::size_t>(P), 0.0);
  std::vector<double> rej_ind(static_cast<std::size_t>(P), 0.0);
  double rej_joint = 0.0, rej_delta = 0.0;
  Eigen::VectorXd bias2 = Eigen::VectorXd::Zero(P);
  Eigen::VectorXd biasf = Eigen::VectorXd::Zero(P);
  double sq2 = 0.0, sqf = 0.0;
  std::vector<double> trueopt2, trueoptf;
  double set_cov = 0.0, set_frac = 0.0, band_cov = 0.0;
  double ca1 = 0.0, ca2 = 0.0, cr1 = 0.0, cr2 = 0.0;
  double ea1 = 0.0, ea2 = 0.0, er1 = 0.0, er2 = 0.0, eopt = 0.0;
  double ao1 = 0.0, ao2 = 0.0;

  int used = 0;
  for (const auto& m : rows) {
    if (m.failed) {
      ++agg.failed_replicates;
      continue;
    }
    ++used;
    for (int p = 0; p < P; ++p) {
      beta[static_cast<std::size_t>(p)].push_back(m.beta_hat[p]);
      se[static_cast<std::size_t>(p)].push_back(m.se[p]);
      covered[static_cast<std::size_t>(p)] += m.covered[static_cast<std::size_t>(p)];
      rej_ind[static_cast<std::size_t>(p)] +=
          m.rej_individual[static_cast<std::size_t>(p)];
    }
    rej_joint += m.rej_joint ? 1.0 : 0.0;
    rej_delta += m.p_delta < 0.05 ? 1.0 : 0.0;
    bias2 += m.xopt_stage2 - m.true_xopt;
    biasf += m.xopt_final - m.true_xopt;
    sq2 += (m.xopt_stage2 - m.true_xopt).squaredNorm();
    sqf += (m.xopt_final - m.true_xopt).squaredNorm();
    trueopt2.push_back(m.true_mean_at_stage2);
    trueoptf.push_back(m.true_mean_at_final);
    set_cov += m.set_covers_true ? 1.0 : 0.0;
    set_frac += m.set_fraction;
    band_cov += m.band_covers_all ? 1.0 : 0.0;
    ca1 += m.cost_actual_s1;
    ca2 += m.cost_actual_s2;
    cr1 += m.cost_rec_s1;
    cr2 += m.cost_rec_s2;
    ea1 += m.exp_out_act_s1;
    ea2 += m.exp_out_act_s2;
    er1 += m.exp_out_rec_s1;
    er2 += m.exp_out_rec_s2;
    eopt += m.exp_out_estopt;
    ao1 += m.avg_obs_out_s1;
    ao2 += m.avg_obs_out_s2;
    agg.interim_shrunk_count += m.interim_shrunk ? 1 : 0;
    agg.final_shrunk_count += m.final_shrunk ? 1 : 0;
  }
  agg.replicates_run = used;

  agg.rel_bias_pct = Eigen::VectorXd::Constant(P, nan);
  agg.se_over_empsd_pct = Eigen::VectorXd::Constant(P, nan);
  agg.cp95 = Eigen::VectorXd::Constant(P, nan);
  agg.alpha_individual = Eigen::VectorXd::Constant(P, nan);
  agg.bias_x_stage2 = Eigen::VectorXd::Constant(P, nan);
  agg.bias_x_final = Eigen::VectorXd::Constant(P, nan);
  if (used == 0) {
    agg.alpha_joint = agg.alpha_delta = nan;
    agg.rmse_x_stage2 = agg.rmse_x_final = nan;
    agg.trueopt_stage2_q025 = agg.trueopt_stage2_q975 = nan;
    agg.trueopt_final_q025 = agg.trueopt_final_q975 = nan;
    agg.set_cp95 = agg.set_perc_mean = agg.bands_cp95 = nan;
    agg.mean_cost_actual_s1 = agg.mean_cost_actual_s2 = nan;
    agg.mean_cost_rec_s1 = agg.mean_cost_rec_s2 = nan;
    agg.exp_out_act_s1 = agg.exp_out_act_s2 = nan;
    agg.exp_out_rec_s1 = agg.exp_out_rec_s2 = agg.exp_out_estopt = nan;
    agg.avg_obs_out_s1 = agg.avg_obs_out_s2 = nan;
    if (per_replicate_out) *per_replicate_out = std::move(rows);
    return agg;
  }

  const double dn = static_cast<double>(used);
  for (int p = 0; p < P; ++p) {
    const auto sp = static_cast<std::size_t>(p);
    const double mean_beta = mean_of(beta[sp]);
    const double empsd = sd_of(beta[sp]);
    if (config.beta_true[p] != 0.0) {
      agg.rel_bias_pct[p] =
          100.0 * (mean_beta - config.beta_true[p]) / config.beta_true[p];
    }
    agg.se_over_empsd_pct[p] = 100.0 * mean_of(se[sp]) / empsd;
    agg.cp95[p] = 100.0 * covered[sp] / dn;
    agg.alpha_individual[p] = rej_ind[sp] / dn;
    agg.bias_x_stage2[p] = bias2[p] / dn;
    agg.bias_x_final[p] = biasf[p] / dn;
  }
  agg.alpha_joint = rej_joint / dn;
  agg.alpha_delta = rej_delta / dn;
  agg.rmse_x_stage2 = std::sqrt(sq2 / dn);
  agg.rmse_x_final = std::sqrt(sqf / dn);
  agg.trueopt_stage2_q025 = stats::quantile_type7(trueopt2, 0.025);
  agg.trueopt_stage2_q975 = stats::quantile_type7(trueopt2, 0.975);
  agg.trueopt_final_q025 = stats::quantile_type7(trueoptf, 0.025);
  agg.trueopt_final_q975 = stats::quantile_type7(trueoptf, 0.975);
  agg.set_cp95 = 100.0 * set_cov / dn;
  agg.set_perc_mean = 100.0 * set_frac / dn;
  agg.bands_cp95 = 100.0 * band_cov / dn;
  agg.mean_cost_actual_s1 = ca1 / dn;
  agg.mean_cost_actual_s2 = ca2 / dn;
  agg.mean_cost_rec_s1 = cr1 / dn;
  agg.mean_cost_rec_s2 = cr2 / dn;
  agg.exp_out_act_s1 = ea1 / dn;
  agg.exp_out_act_s2 = ea2 / dn;
  agg.exp_out_rec_s1 = er1 / dn;
  agg.exp_out_rec_s2 = er2 / dn;
  agg.exp_out_estopt = eopt / dn;
  agg.avg_obs_out_s1 = ao1 / dn;
  agg.avg_obs_out_s2 = ao2 / dn;

  if (per_replicate_out) *per_replicate_out = std::move(rows);
  return agg;
}

}  // namespace lago
