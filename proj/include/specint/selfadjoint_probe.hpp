#pragma once

// Finite-scale probes of the range machinery: ramp functions c_k, their
// polynomial approximations, the range/indicator experiment, the T^k
// commutation check and a cross-N self-adjointness heuristic.

#include <specint/direct_integral.hpp>
#include <specint/pvm.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace specint {

struct RampSpec {
  double a = 0.0;
  double b = 1.0;
  int k = 1;

  void validate() const {
    if (!(a < b)) throw ValidationError("ramp: need a < b");
    if (k < 1) throw ValidationError("ramp: need k >= 1");
  }
};

/// 1 on [a,b], linear down to 0 on (a - 1/k, a) and (b, b + 1/k), 0 elsewhere.
inline double ramp_eval(const RampSpec& r, double t) {
  const double k = r.k;
  if (t >= r.a && t <= r.b) return 1.0;
  if (t > r.a - 1.0 / k && t < r.a) return 1.0 + k * (t - r.a);
  if (t > r.b && t < r.b + 1.0 / k) return 1.0 + k * (r.b - t);
  return 0.0;
}

/// Chebyshev series sum_k c_k T_k(x) on [lo, hi], evaluated by Clenshaw.
class ChebyshevSeries {
 public:
  ChebyshevSeries(double lo, double hi, std::vector<double> coefficients)
      : lo_(lo), hi_(hi), c_(std::move(coefficients)) {}

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const { return c_; }

  double operator()(double t) const {
    const double x = (2.0 * t - lo_ - hi_) / (hi_ - lo_);
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = c_.size(); k-- > 1;) {
      const double b0 = 2.0 * x * b1 - b2 + c_[k];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c_[0];
  }

  /// Interpolant of f at the degree + 1 Chebyshev points of the first kind.
  template <class F>
  static ChebyshevSeries interpolate(F&& f, double lo, double hi, int degree) {
    const int n = degree + 1;
    std::vector<double> values(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double x = std::cos(std::numbers::pi * (i + 0.5) / n);
      values[i] = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
    }
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += values[i] * std::cos(std::numbers::pi * k * (i + 0.5) / n);
      c[k] = (k == 0 ? 1.0 : 2.0) * sum / n;
    }
    return ChebyshevSeries(lo, hi, std::move(c));
  }

 private:
  double lo_;
  double hi_;
  std::vector<double> c_;
};

inline constexpr int kRampGridPoints = 2048;

struct RampFit {
  ChebyshevSeries polynomial;
  double grid_error = 0.0;
};

/// Uniform grid of kRampGridPoints points on [lo, hi], endpoints included.
template <class F, class G>
double grid_sup_error(F&& f, G&& g, double lo, double hi) {
  double err = 0.0;
  for (int i = 0; i < kRampGridPoints; ++i) {
    const double t = lo + (hi - lo) * i / (kRampGridPoints - 1);
    err = std::max(err, std::abs(f(t) - g(t)));
  }
  return err;
}

/// Chebyshev interpolant of c_k with grid sup-error <= 1/k on [lo, hi],
/// doubling the degree (0, 1, 2, 4, ...) until the criterion holds. The
/// interval normally contains [a - 1/k, b + 1/k] but this is not enforced.
inline RampFit fit_ramp_polynomial(const RampSpec& r, double lo, double hi, int max_degree) {
  r.validate();
  if (!(lo < hi)) throw ValidationError("fit_ramp_polynomial: need lo < hi");
  const auto ramp = [&r](double t) { return ramp_eval(r, t); };
  const double target = 1.0 / r.k;
  double best = std::numeric_limits<double>::infinity();
  for (int degree = 0; degree <= max_degree; degree = degree == 0 ? 1 : 2 * degree) {
    auto p = ChebyshevSeries::interpolate(ramp, lo, hi, degree);
    const double err = grid_sup_error(p, ramp, lo, hi);
    if (err <= target) return RampFit{std::move(p), err};
    best = std::min(best, err);
  }
  throw DegreeExhausted("fit_ramp_polynomial: grid error " + std::to_string(best) + " > 1/k at degree " +
                            std::to_string(max_degree),
                        best);
}

/// Moves a truncation radius n outward when an atom sits on +-n.
template <FieldScalar S>
double nudge_radius(const DirectIntegral<S>& di, double n) {
  if (di.atom_count() == 0) return n;
  const double spread = di.lambda(di.atom_count() - 1) - di.lambda(0);
  const double step = 1e-9 * std::max(spread, 1.0);
  for (int guard = 0; guard < 64; ++guard) {
    bool collision = false;
    for (std::size_t a = 0; a < di.atom_count(); ++a) {
      if (std::abs(std::abs(di.lambda(a)) - n) <= step * 1e-3) collision = true;
    }
    if (!collision) return n;
    n += step;
  }
  return n;
}

struct RangeExperimentRow {
  int k = 0;
  int degree = 0;
  double distance = 0.0;   // || p_k X_n - proj(1_[a,b] Z_n) ||
  double xn_norm = 0.0;    // || X_n ||
  double ramp_defect = 0.0;  // || (c_k - 1_[a,b]) X_n ||, zero when no atom sits in a ramp
  double grid_error = 0.0;
  /// (1/k) ||X_n|| + ramp_defect, which bounds distance when m = N.
  double bound() const { return xn_norm / k + ramp_defect; }
};

struct RangeExperiment {
  double radius = 0.0;
  std::vector<RangeExperimentRow> rows;
};

/// Z_n = 1_[-n,n] X, X_n = proj_m Z_n, and for each k the distance between
/// p_k X_n and proj_m(1_[a,b] Z_n), where p_k approximates c_k to 1/k on
/// [-n-k, n+k] and is cut off outside that interval.
template <FieldScalar S>
RangeExperiment range_indicator_experiment(const DirectIntegral<S>& di, Index m, double a, double b,
                                           double n, const std::vector<int>& k_list,
                                           const Section<S>& x, int max_degree = 8192) {
  if (!(n > 0.0)) throw ValidationError("range_indicator_experiment: n must be positive");
  RangeExperiment out;
  out.radius = nudge_radius(di, n);
  const double radius = out.radius;
  const auto in_window = [radius](double t) { return t >= -radius && t <= radius ? 1.0 : 0.0; };
  const auto indicator = [a, b](double t) { return t >= a && t <= b ? 1.0 : 0.0; };

  const Section<S> z = multiply(di, in_window, x);
  const Section<S> xn = project_onto_range(di, m, z);
  const Section<S> target = project_onto_range(di, m, multiply(di, indicator, z));
  const double xn_norm = norm_mu(di, xn);

  for (int k : k_list) {
    const RampSpec ramp{a, b, k};
    const double lo = -radius - k;
    const double hi = radius + k;
    auto fit = fit_ramp_polynomial(ramp, lo, hi, max_degree);
    // p_k is trusted only on its fit interval; outside it the product is 0.
    // X_n lives in [-n, n] when m = N, so this changes nothing but roundoff there.
    const auto pk = [&fit, lo, hi](double t) { return t >= lo && t <= hi ? fit.polynomial(t) : 0.0; };
    const Section<S> pk_xn = multiply(di, pk, xn);
    const auto ramp_gap = [&](double t) { return ramp_eval(ramp, t) - indicator(t); };
    RangeExperimentRow row;
    row.k = k;
    row.degree = fit.polynomial.degree();
    row.distance = norm_mu(di, pk_xn - target);
    row.xn_norm = xn_norm;
    row.ramp_defect = norm_mu(di, multiply(di, ramp_gap, xn));
    row.grid_error = fit.grid_error;
    out.rows.push_back(row);
  }
  return out;
}

struct CommutationRow {
  int k = 0;
  double defect = 0.0;
  double bound = 0.0;
  bool asserted = false;  // only the full-range case (m = N) is asserted
  bool pass() const { return !asserted || defect <= bound; }
};

/// || T^k X_n - proj_m(T^k Z_n) || for k = 1..k_max. The identity holds
/// exactly only when the range is T-invariant (m = N); otherwise the defect
/// is recorded, not asserted.
template <FieldScalar S>
std::vector<CommutationRow> tk_commutation_check(const DirectIntegral<S>& di, Index m,
                                                 const Section<S>& x, int k_max, double n) {
  const double radius = nudge_radius(di, n);
  const auto in_window = [radius](double t) { return t >= -radius && t <= radius ? 1.0 : 0.0; };
  const Section<S> z = multiply(di, in_window, x);
  Section<S> tk_xn = project_onto_range(di, m, z);
  Section<S> tk_z = z;
  const double x_norm = norm_mu(di, x);
  std::vector<CommutationRow> rows;
  for (int k = 1; k <= k_max; ++k) {
    tk_xn = multiply_identity(di, tk_xn);
    tk_z = multiply_identity(di, tk_z);
    CommutationRow row;
    row.k = k;
    row.defect = norm_mu(di, tk_xn - project_onto_range(di, m, tk_z));
    row.bound = 1e-8 * std::pow(radius + 1.0, k) * x_norm;
    row.asserted = m == di.dimension();
    rows.push_back(row);
  }
  return rows;
}

struct HeuristicRow {
  std::string label;
  Index n_previous = 0;
  Index n = 0;
  double distance = 0.0;
};

/// Kolmogorov distance between nu^{x,x} (normalised) at successive N for
/// every dictionary vector. Stable sequences are consistent with essential
/// self-adjointness; this is a HEURISTIC, never a verdict.
template <FieldScalar S>
std::vector<HeuristicRow> essential_selfadjointness_heuristic(
    const OperatorSpec<S>& spec, const std::vector<Index>& n_list,
    const std::vector<std::pair<std::string, std::vector<S>>>& dictionary,
    const ModelTolerances& tol = {}) {
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw ValidationError("heuristic: N_list must be increasing");
  }
  std::vector<SpectralModel<S>> models;
  models.reserve(n_list.size());
  for (Index n : n_list) models.push_back(build_spectral_model(QuasiSampling<S>::from_spec(spec, n), tol));

  std::vector<HeuristicRow> rows;
  for (const auto& [label, coefficients] : dictionary) {
    std::vector<AtomicMeasure<double>> measures;
    for (const auto& model : models) {
      const Index n = model.dimension();
      if (static_cast<Index>(coefficients.size()) > n) {
        throw DimensionError("heuristic: dictionary vector longer than N");
      }
      Vector<S> x = Vector<S>::Zero(n);
      for (std::size_t i = 0; i < coefficients.size(); ++i) x(static_cast<Index>(i)) = coefficients[i];
      measures.push_back(to_probability(nu_measure(model, x, x)));
    }
    for (std::size_t i = 1; i < measures.size(); ++i) {
      rows.push_back({label, n_list[i - 1], n_list[i], kolmogorov_distance(measures[i - 1], measures[i])});
    }
  }
  return rows;
}

}  // namespace specint
