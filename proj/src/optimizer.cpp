#include "lago/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lago/errors.hpp"
#include "lago/model.hpp"

namespace lago {

namespace {

constexpr double kConstraintTol = 1e-9;
constexpr double kCostTieTol = 1e-9;

// Canonicalized constraint: sum_p gain[p] * x_p >= need.
struct CanonicalConstraint {
  Eigen::VectorXd gain;
  double need = 0.0;
  double offset = 0.0;  // weighted gamma (+ eta) term of the mean
  double sign = 1.0;    // +1 for at_least, -1 for at_most
};

CanonicalConstraint canonicalize(const OptimizationProblem& problem) {
  const auto& coef = problem.coefficients;
  const int P = static_cast<int>(coef.beta_A.size());
  if (static_cast<int>(problem.bounds.size()) != P) {
    throw ValidationError("bounds must cover every intervention component");
  }
  if (problem.weights.size() != coef.gamma.size()) {
    throw WeightDimensionMismatch(
        static_cast<std::size_t>(problem.weights.size()),
        static_cast<std::size_t>(coef.gamma.size()));
  }
  CanonicalConstraint c;
  c.sign = (problem.direction == GoalDirection::at_least) ? 1.0 : -1.0;
  c.offset = problem.weights.dot(coef.gamma);
  if (problem.include_eta && coef.eta.size() > 0) {
    c.offset += coef.eta[coef.eta.size() - 1];
  }
  c.gain = c.sign * coef.beta_A;
  c.need = c.sign * (problem.goal - c.offset);
  return c;
}

double max_gain(const CanonicalConstraint& c, const std::vector<Bounds>& b) {
  double total = 0.0;
  for (int p = 0; p < c.gain.size(); ++p) {
    total += c.gain[p] * (c.gain[p] > 0.0 ? b[static_cast<std::size_t>(p)].upper
                                          : b[static_cast<std::size_t>(p)].lower);
  }
  return total;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int p = 0; p < a.size(); ++p) {
    if (a[p] < b[p]) return true;
    if (a[p] > b[p]) return false;
  }
  return false;
}

Eigen::VectorXd solve_linear_cost(const OptimizationProblem& problem,
                                  const CanonicalConstraint& c) {
  const int P = static_cast<int>(c.gain.size());
  const auto& b = problem.bounds;
  Eigen::VectorXd x(P);
  for (int p = 0; p < P; ++p) x[p] = b[static_cast<std::size_t>(p)].lower;

  double remaining = c.need - c.gain.dot(x);
  if (remaining <= kConstraintTol) return x;  // goal already met at the floor

  // Helpers in decreasing cost-effectiveness; later index first on ties so
  // earlier components stay as small as possible (lexicographic rule).
  // Effectiveness gain/cost is compared by cross-products so that zero costs
  // (infinite effectiveness) need no special value and common cost scalings
  // cannot reorder the fill.
  std::vector<int> order;
  for (int p = 0; p < P; ++p) {
    if (c.gain[p] > 0.0) order.push_back(p);
  }
  std::sort(order.begin(), order.end(), [&](int a, int bb) {
    const double ca = problem.cost.linear[a];
    const double cb = problem.cost.linear[bb];
    if (ca == 0.0 || cb == 0.0) {
      if (ca == 0.0 && cb == 0.0) return a > bb;
      return ca == 0.0;
    }
    const double lhs = c.gain[a] * cb;
    const double rhs = c.gain[bb] * ca;
    if (lhs != rhs) return lhs > rhs;
    return a > bb;
  });

  for (int p : order) {
    if (remaining <= 0.0) break;
    const double room = b[static_cast<std::size_t>(p)].upper -
                        b[static_cast<std::size_t>(p)].lower;
    const double take = std::min(room, remaining / c.gain[p]);
    x[p] += take;
    remaining -= c.gain[p] * take;
  }
  return x;
}

double poly_value(const std::vector<PolyTerm>& terms, double t) {
  double acc = 0.0;
  for (const auto& term : terms) {
    acc += term.coefficient * std::pow(t, term.power);
  }
  return acc;
}

// Dense sample plus golden-section refinement of a scalar function on
// [lo, hi]. Leftmost minimizer wins among ties.
template <typename F>
double minimize_scalar(const F& f, double lo, double hi) {
  if (hi - lo < 1e-14) return lo;
  const int samples = 256;
  double best_t = lo;
  double best_f = f(lo);
  for (int i = 1; i <= samples; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(samples);
    const double ft = f(t);
    if (ft < best_f) {
      best_f = ft;
      best_t = t;
    }
  }
  // Golden-section around the best sample's bracket.
  const double step = (hi - lo) / static_cast<double>(samples);
  double a = std::max(lo, best_t - step);
  double d = std::min(hi, best_t + step);
  const double inv_phi = 0.6180339887498949;
  double b1 = d - inv_phi * (d - a);
  double b2 = a + inv_phi * (d - a);
  double f1 = f(b1);
  double f2 = f(b2);
  for (int iter = 0; iter < 80 && (d - a) > 1e-11; ++iter) {
    if (f1 <= f2) {
      d = b2;
      b2 = b1;
      f2 = f1;
      b1 = d - inv_phi * (d - a);
      f1 = f(b1);
    } else {
      a = b1;
      b1 = b2;
      f1 = f2;
      b2 = a + inv_phi * (d - a);
      f2 = f(b2);
    }
  }
  const double mid = 0.5 * (a + d);
  if (f(mid) <= best_f) return mid;
  return best_t;
}

double minimize_1d(const std::vector<PolyTerm>& terms, double lo, double hi) {
  return minimize_scalar([&](double t) { return poly_value(terms, t); }, lo,
                         hi);
}

// Intersects {t : delta_lo <= a * t <= delta_hi} into [t_lo, t_hi].
void intersect_step_interval(double a, double delta_lo, double delta_hi,
                             double* t_lo, double* t_hi) {
  if (a > 0.0) {
    *t_lo = std::max(*t_lo, delta_lo / a);
    *t_hi = std::min(*t_hi, delta_hi / a);
  } else {
    *t_lo = std::max(*t_lo, delta_hi / a);
    *t_hi = std::min(*t_hi, delta_lo / a);
  }
}

Eigen::VectorXd coordinate_descent(const OptimizationProblem& problem,
                                   const CanonicalConstraint& c,
                                   Eigen::VectorXd x) {
  const int P = static_cast<int>(c.gain.size());
  const auto& b = problem.bounds;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double max_change = 0.0;
    for (int p = 0; p < P; ++p) {
      const double other_gain = c.gain.dot(x) - c.gain[p] * x[p];
      const double tgain = c.need - other_gain;
      double lo = b[static_cast<std::size_t>(p)].lower;
      double hi = b[static_cast<std::size_t>(p)].upper;
      if (c.gain[p] > 1e-15) {
        lo = std::max(lo, tgain / c.gain[p]);
      } else if (c.gain[p] < -1e-15) {
        hi = std::min(hi, tgain / c.gain[p]);
      } else if (tgain > kConstraintTol) {
        continue;  // this component cannot restore feasibility
      }
      if (lo > hi) continue;
      const double t =
          minimize_1d(problem.cost.terms[static_cast<std::size_t>(p)], lo, hi);
      max_change = std::max(max_change, std::fabs(t - x[p]));
      x[p] = t;
    }
    // Gain-preserving pairwise exchanges (x_p += gain_q t, x_q -= gain_p t)
    // slide the iterate along a binding constraint, where single-coordinate
    // moves stall: every point on the constraint boundary is coordinate-wise
    // optimal once the per-component costs are increasing.
    for (int p = 0; p < P; ++p) {
      for (int q = p + 1; q < P; ++q) {
        const double gp = c.gain[p];
        const double gq = c.gain[q];
        if (std::fabs(gp) < 1e-15 || std::fabs(gq) < 1e-15) continue;
        const auto& bp = b[static_cast<std::size_t>(p)];
        const auto& bq = b[static_cast<std::size_t>(q)];
        double t_lo = -std::numeric_limits<double>::infinity();
        double t_hi = std::numeric_limits<double>::infinity();
        intersect_step_interval(gq, bp.lower - x[p], bp.upper - x[p], &t_lo,
                                &t_hi);
        intersect_step_interval(-gp, bq.lower - x[q], bq.upper - x[q], &t_lo,
                                &t_hi);
        if (t_lo > t_hi) continue;
        const auto& terms_p = problem.cost.terms[static_cast<std::size_t>(p)];
        const auto& terms_q = problem.cost.terms[static_cast<std::size_t>(q)];
        const auto pair_cost = [&](double t) {
          return poly_value(terms_p, x[p] + gq * t) +
                 poly_value(terms_q, x[q] - gp * t);
        };
        const double t = minimize_scalar(pair_cost, t_lo, t_hi);
        if (pair_cost(t) < pair_cost(0.0)) {
          x[p] += gq * t;
          x[q] -= gp * t;
          max_change = std::max(
              max_change, std::max(std::fabs(gq * t), std::fabs(gp * t)));
        }
      }
    }
    if (max_change < 1e-7) break;
  }
  return x;
}

Eigen::VectorXd solve_polynomial_cost(const OptimizationProblem& problem,
                                      const CanonicalConstraint& c) {
  const int P = static_cast<int>(c.gain.size());
  const auto& b = problem.bounds;

  // Coarse grid seeding at 0.01 per component (coarsened when the grid would
  // be unreasonably large for many components).
  double res = 0.01;
  for (;;) {
    double total = 1.0;
    for (int p = 0; p < P; ++p) {
      total *= std::floor((b[static_cast<std::size_t>(p)].upper -
                           b[static_cast<std::size_t>(p)].lower) /
                              res +
                          1e-9) +
               1.0;
    }
    if (total <= 2e6) break;
    res *= 2.0;
  }
  const GridSpec grid = GridSpec::over(b, res);

  struct Seed {
    double cost;
    Eigen::VectorXd x;
  };
  std::vector<Seed> seeds;
  const std::size_t total = grid.size();
  for (std::size_t i = 0; i < total; ++i) {
    const Eigen::VectorXd x = grid.point(i);
    if (c.gain.dot(x) < c.need - kConstraintTol) continue;
    const double cost = evaluate_cost(problem.cost, x);
    seeds.push_back({cost, x});
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& s) {
    if (a.cost != s.cost) return a.cost < s.cost;
    return lex_less(a.x, s.x);
  });
  if (seeds.size() > 8) seeds.resize(8);

  // Always include the max-gain corner (feasible whenever the problem is).
  {
    Eigen::VectorXd corner(P);
    for (int p = 0; p < P; ++p) {
      corner[p] = c.gain[p] > 0.0 ? b[static_cast<std::size_t>(p)].upper
                                  : b[static_cast<std::size_t>(p)].lower;
    }
    seeds.push_back({evaluate_cost(problem.cost, corner), corner});
  }

  bool have_best = false;
  double best_cost = 0.0;
  Eigen::VectorXd best_x;
  for (const auto& seed : seeds) {
    const Eigen::VectorXd x = coordinate_descent(problem, c, seed.x);
    if (c.gain.dot(x) < c.need - kConstraintTol) continue;
    const double cost = evaluate_cost(problem.cost, x);
    if (!have_best || cost < best_cost - kCostTieTol ||
        (std::fabs(cost - best_cost) <= kCostTieTol && lex_less(x, best_x))) {
      have_best = true;
      best_cost = cost;
      best_x = x;
    }
  }
  if (!have_best) {
    throw Infeasible("no feasible point found by the polynomial search");
  }
  return best_x;
}

}  // namespace

double evaluate_cost(const CostFunction& cost, const Eigen::VectorXd& x) {
  if (x.size() != cost.P()) {
    throw ValidationError("cost function covers " + std::to_string(cost.P()) +
                          " components, package has " + std::to_string(x.size()));
  }
  if (cost.kind == CostFunction::Kind::linear) {
    return cost.linear.dot(x);
  }
  double acc = 0.0;
  for (int p = 0; p < x.size(); ++p) {
    for (const auto& term : cost.terms[static_cast<std::size_t>(p)]) {
      acc += term.coefficient * std::pow(x[p], term.power);
    }
  }
  return acc;
}

Recommendation optimize(const OptimizationProblem& problem) {
  problem.cost.validate();
  const CanonicalConstraint c = canonicalize(problem);
  const int P = static_cast<int>(c.gain.size());
  if (problem.cost.P() != P) {
    throw ValidationError("cost function and coefficients disagree on P");
  }

  if (max_gain(c, problem.bounds) < c.need - kConstraintTol) {
    throw Infeasible("maximum attainable mean misses the goal");
  }

  Eigen::VectorXd x = (problem.cost.kind == CostFunction::Kind::linear)
                          ? solve_linear_cost(problem, c)
                          : solve_polynomial_cost(problem, c);
  // Guard against floating drift at the box edge.
  for (int p = 0; p < P; ++p) {
    const auto& bb = problem.bounds[static_cast<std::size_t>(p)];
    x[p] = std::min(std::max(x[p], bb.lower), bb.upper);
  }

  Recommendation rec;
  rec.x.components = x;
  rec.x.bounds = problem.bounds;
  rec.feasible = true;
  rec.cost = evaluate_cost(problem.cost, x);
  rec.achieved_mean = problem.coefficients.beta_A.dot(x) + c.offset;
  rec.shrunk_to_previous = false;
  return rec;
}

Recommendation recommend_next_stage(const ModelFit& fit,
                                    const SandwichCovariance& cov,
                                    const OptimizationProblem& problem,
                                    const Recommendation& previous,
                                    LowerBoundPolicy policy) {
  (void)cov;  // the point recommendation depends on the fit alone
  OptimizationProblem next = problem;
  next.coefficients.beta_A = fit.beta_A;
  next.coefficients.gamma = fit.gamma;
  next.coefficients.eta = fit.eta;
  next.include_eta = false;  // no estimate for the upcoming stage yet
  next.lower_bound_policy = policy;
  if (policy == LowerBoundPolicy::previous_recommendation) {
    for (int p = 0; p < static_cast<int>(next.bounds.size()); ++p) {
      auto& bb = next.bounds[static_cast<std::size_t>(p)];
      bb.lower = std::min(std::max(bb.lower, previous.x.components[p]), bb.upper);
    }
  }
  try {
    return optimize(next);
  } catch (const Infeasible&) {
    Recommendation rec;
    rec.x.components = previous.x.components;
    rec.x.bounds = next.bounds;
    rec.feasible = false;
    rec.cost = evaluate_cost(next.cost, previous.x.components);
    const CanonicalConstraint c = canonicalize(next);
    rec.achieved_mean =
        next.coefficients.beta_A.dot(previous.x.components) + c.offset;
    rec.shrunk_to_previous = true;
    return rec;
  }
}

Eigen::VectorXd max_gain_corner(const OptimizationProblem& problem) {
  const CanonicalConstraint c = canonicalize(problem);
  const int P = static_cast<int>(c.gain.size());
  Eigen::VectorXd corner(P);
  for (int p = 0; p < P; ++p) {
    corner[p] = c.gain[p] > 0.0 ? problem.bounds[static_cast<std::size_t>(p)].upper
                                : problem.bounds[static_cast<std::size_t>(p)].lower;
  }
  return corner;
}

}  // namespace lago
