#pragma once

#include "qpo/report.hpp"

#include <json.hpp>

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qpo {

using cplx = std::complex<double>;

/// Finite zero set in the unit disc ordered by non-decreasing modulus.
class ZeroSequence {
 public:
  ZeroSequence() = default;
  explicit ZeroSequence(std::vector<cplx> points, double complete_below = 1.0);

  const std::vector<cplx>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  /// Radius below which the stored prefix is the full zero set.
  double complete_below() const { return complete_below_; }

  /// Sum of (1 - |a_k|)^{s+1} over the stored points.
  double genus_sum(int s) const;
  /// Slope of log n(r) against log 1/(1-r) over the outer half of the stored
  /// points, minus one and clipped at zero.
  double convergence_exponent() const;

  void write_csv(const std::string& path) const;
  static ZeroSequence read_csv(const std::string& path);

 private:
  std::vector<cplx> points_;
  double complete_below_ = 1.0;
};

enum class ClosedForm {
  constant,     // c
  monomial,     // c z^k
  exp_pole,     // exp(c (1 - z)^{-k})
  exp_cayley,   // exp(c (1 + z) / (1 - z))
  pole_power,   // scale (1 - z)^{-a} + offset
};

/// Evaluator for an analytic function on {|z| <= r_max}. All evaluation is
/// carried in log form: Re log_eval(z) = log|f(z)|.
class AnalyticFunctionModel {
 public:
  static AnalyticFunctionModel power_series(std::vector<cplx> coefficients, double r_max);
  /// Sum of exp(log_coeff_j) z^{exponent_j} with positive coefficients.
  /// `dropped_*` describe terms beyond the degree cap, used for the
  /// truncation bound only.
  static AnalyticFunctionModel gap_series(std::vector<double> exponents,
                                          std::vector<double> log_coeffs, double r_max,
                                          std::vector<double> dropped_exponents = {},
                                          std::vector<double> dropped_log_coeffs = {});
  static AnalyticFunctionModel closed_form(ClosedForm id, std::vector<double> params,
                                           double r_max);
  static AnalyticFunctionModel canonical_product(ZeroSequence zeros, int genus, double r_max);

  cplx log_eval(cplx z) const;
  double log_abs(cplx z) const { return log_eval(z).real(); }
  cplx eval(cplx z) const { return std::exp(log_eval(z)); }
  /// Derivative over value, f'/f, for Newton steps.
  cplx log_derivative(cplx z) const;

  double r_max() const { return r_max_; }
  cplx value_at_origin() const { return eval(0.0); }
  const std::optional<ZeroSequence>& zeros() const { return zeros_; }
  void set_zeros(ZeroSequence z) { zeros_ = std::move(z); }
  /// Upper bound for |omitted terms| on |z| = r (log form); -inf when nothing
  /// was omitted or the model is not a truncated series.
  double log_truncation_bound(double r) const;

  std::string kind() const;
  const std::vector<double>& exponents() const { return exps_; }
  const std::vector<double>& log_coefficients() const { return logc_; }
  nlohmann::json to_json() const;

 private:
  enum class Kind { power_series, gap_series, closed_form, canonical_product };
  Kind kind_ = Kind::closed_form;
  double r_max_ = 0.0;
  std::vector<cplx> coeffs_;
  std::vector<double> exps_, logc_, dropped_exps_, dropped_logc_;
  ClosedForm form_ = ClosedForm::constant;
  std::vector<double> params_;
  int genus_ = 1;
  std::optional<ZeroSequence> zeros_;
  void check_domain(cplx z) const;
};

// ---- radial grids ---------------------------------------------------------

struct DiscGrid {
  std::vector<double> radii;
  int n_theta = 256;

  /// r_j = 1 - 2^{-j} for j in [j_min, j_max].
  static DiscGrid geometric(int j_min, int j_max, int n_theta = 256);
  /// 1 - r uniform in log scale from gap_max down to gap_min.
  static DiscGrid log_gaps(double gap_max, double gap_min, double per_decade,
                           int n_theta = 256);
};

// ---- growth on circles ------------------------------------------------------

/// log M(r, f): angular grid maximum refined by golden-section search.
double log_max_modulus(const AnalyticFunctionModel& f, double r, int n_theta = 256);
double max_modulus(const AnalyticFunctionModel& f, double r, int n_theta = 256);

struct MeanResult {
  double value;
  int n_theta;
  double rel_change;
  double radius;
};

/// m_p(r, log|f|) by trapezoidal quadrature with doubling until the relative
/// change drops below `rel_tol` or the resolution reaches 2^20.
MeanResult integral_mean_p(const AnalyticFunctionModel& f, double r, double p,
                           int n_theta = 256, double rel_tol = 1e-6);
/// Several p from one set of samples; doubling stops when every p has settled.
std::vector<MeanResult> integral_means(const AnalyticFunctionModel& f, double r,
                                       const std::vector<double>& p_list, int n_theta = 256,
                                       double rel_tol = 1e-6);

enum class OrderEstimator {
  ratio,  // sup/inf of log^+ q(r) / log(1/(1-r)) over the tail
  slope,  // sup/inf of windowed least-squares slopes against log(1/(1-r))
};

struct DiscOrderRow {
  double r;
  double log_quantity;  // log M(r) or log m_p(r)
  double ratio;         // log^+ (log_quantity^+) / log(1/(1-r)) style ratio
};

struct DiscOrderEstimate {
  double upper = 0.0;
  double lower = 0.0;
  std::vector<DiscOrderRow> rows;
  std::vector<double> window_values;
};

/// Estimates of sigma_M and lambda_M over the tail half of the grid.
DiscOrderEstimate disc_orders(const AnalyticFunctionModel& f, const DiscGrid& grid,
                              OrderEstimator est = OrderEstimator::ratio, int windows = 4);
/// Estimates of rho_p and lambda_p over the tail half of the grid.
DiscOrderEstimate mean_orders(const AnalyticFunctionModel& f, double p, const DiscGrid& grid,
                              OrderEstimator est = OrderEstimator::ratio, int windows = 4);
/// Same estimators applied to precomputed (r, log q(r)) samples.
DiscOrderEstimate orders_from_samples(const std::vector<double>& radii,
                                      const std::vector<double>& log_quantity,
                                      OrderEstimator est, int windows = 4);

/// (1-R)^{-1/alpha} (int_0^R log^+ M(t) (R-t)^{1/alpha-1} dt + log^+ M(R0)).
double smoothing_integral_I_alpha(const AnalyticFunctionModel& f, double R, double alpha,
                                  double R0, int n_theta = 256);

// ---- zeros -----------------------------------------------------------------

/// Max over phi of #{a : r <= |a| <= (1+r)/2, |arg a - phi| <= (pi/4)(1-r)}.
int zero_count_polar(const ZeroSequence& zeros, double r, double angle_tol = 1e-12);
/// The same maximum over `anchors` equally spaced values of phi.
int zero_count_polar_brute(const ZeroSequence& zeros, double r, int anchors,
                           double angle_tol = 1e-12);
/// #{a : |a - center| <= h}.
int zero_count_disc(const ZeroSequence& zeros, cplx center, double h);

// ---- canonical products ------------------------------------------------------

/// E(w, s) = (1 - w) exp(w + ... + w^s / s).
cplx weierstrass_factor(cplx w, int s);
/// log E(w, s); -inf real part at w = 1.
cplx log_weierstrass_factor(cplx w, int s);
/// A(z, zeta) = (1 - |zeta|^2) / (1 - z conj(zeta)).
cplx interpolation_kernel(cplx z, cplx zeta);

struct CanonicalValue {
  double log_modulus;
  double argument;
  /// 2^{s+2} sum |A(z, a_k)|^{s+1}.
  double upper_bound;
  /// Bound on |log|P|| contributed by the outer tenth of the stored zeros.
  double tail_bound;
};

CanonicalValue canonical_product(cplx z, const ZeroSequence& zeros, int s);
double tsuji_sum(cplx z, const ZeroSequence& zeros, double exponent);

struct ExceptionalDisc {
  cplx center;
  double radius;
  bool contains(cplx z) const { return std::abs(z - center) < radius; }
};

/// Discs D(a_k, (1 - |a_k|^2)^{mu + 4}).
std::vector<ExceptionalDisc> exceptional_discs(const ZeroSequence& zeros, double mu);
bool in_exceptional_set(cplx z, const std::vector<ExceptionalDisc>& discs);

/// Fitted constant K with log|P(z)| >= K log(1-|z|) sum |A(z,a_k)|^{mu+1+eps}
/// at the sample points outside the exceptional discs. Reported trend-only.
PropertyCheck fit_tsuji_lower_constant(const ZeroSequence& zeros, int s, double mu, double eps,
                                       const std::vector<cplx>& samples);

// ---- Polya order and related -----------------------------------------------------

/// psi given through u -> log psi(e^u).
using LogPsi = std::function<double(double)>;

struct PolyaResult {
  double order;            // +inf when the doubling check fails
  double doubling_sup;     // sup psi(2x)/psi(x) on the sampled x
  bool doubling_bounded;
};

/// Sup of rho with max over (C, x) pairs of psi(Cx)/(C^rho psi(x)) above the
/// threshold, bisected to `resolution`. Pairs use log C and log x lists; only
/// pairs with log x + log C <= log_x_max are used.
PolyaResult polya_order(const LogPsi& log_psi, const std::vector<double>& log_c,
                        const std::vector<double>& log_x, double log_x_max,
                        double threshold = 1e3, double resolution = 0.01,
                        double doubling_limit = 1e6);

/// int_1^t psi(x)/x dx.
double psi_tilde(const std::function<double(double)>& psi, double t, double rel_tol = 1e-12);

/// Union of disjoint sorted intervals [a, b) inside [0, 1).
class RadialSet {
 public:
  RadialSet() = default;
  explicit RadialSet(std::vector<std::pair<double, double>> intervals);
  /// Lebesgue measure of the set intersected with [r, 1).
  double measure_from(double r) const;
  const std::vector<std::pair<double, double>>& intervals() const { return iv_; }

 private:
  std::vector<std::pair<double, double>> iv_;
};

/// Max over the tail half of r_grid of m(E cap [r,1)) / (1 - r).
double upper_density(const RadialSet& e, const std::vector<double>& r_grid);

// ---- gap series from a growth profile ----------------------------------------

struct GapSeriesBuild {
  AnalyticFunctionModel model;
  /// Radii where the hull touches the profile.
  std::vector<double> contact_radii;
  /// Sample radii removed because the profile was not convex in log r there.
  std::vector<double> dropped_radii;
};

/// Coefficients log a_n = min over samples of (B(r) - n log r) for exponents
/// n read off the lower convex hull of (log r, B(r)).
GapSeriesBuild gap_series_from_profile(const std::function<double(double)>& profile,
                                       const std::vector<double>& sample_radii,
                                       double degree_cap = 1e15, double r_max = 0.0);

/// log of the maximal term max_n a_n r^n.
double log_max_term(const AnalyticFunctionModel& series, double r);

/// Zeros of a positive-coefficient gap series near the circles where two
/// consecutive dominant terms balance, polished by Newton's method. Circles
/// beyond `radius_limit` or zeros beyond `max_count` are left out; the
/// result records the radius below which it is complete.
ZeroSequence gap_series_zeros(const AnalyticFunctionModel& series, double radius_limit,
                              std::size_t max_count = 200000);

}  // namespace qpo
