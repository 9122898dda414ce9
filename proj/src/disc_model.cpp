#include "qpo/csv.hpp"
#include "qpo/disc.hpp"
#include "qpo/errors.hpp"
#include "qpo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace qpo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

// log sum_j exp(w_j) for complex w_j, scaled by the largest real part.
cplx log_sum_exp(const std::vector<cplx>& w) {
  double m = -kInf;
  for (const auto& v : w) m = std::max(m, v.real());
  if (!std::isfinite(m)) return {-kInf, 0.0};
  cplx s = 0.0;
  for (const auto& v : w) s += std::exp(v - m);
  return std::log(s) + m;
}

}  // namespace

ZeroSequence::ZeroSequence(std::vector<cplx> points, double complete_below)
    : points_(std::move(points)), complete_below_(complete_below) {
  for (const auto& a : points_)
    if (!(std::abs(a) < 1.0)) throw ParameterError("zero sequence: every point must satisfy |a| < 1");
  std::stable_sort(points_.begin(), points_.end(), [](cplx a, cplx b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
}

double ZeroSequence::genus_sum(int s) const {
  double sum = 0.0;
  for (const auto& a : points_) sum += std::pow(1.0 - std::abs(a), s + 1);
  return sum;
}

double ZeroSequence::convergence_exponent() const {
  const std::size_t n = points_.size();
  if (n < 4) return 0.0;
  std::vector<double> x, y;
  for (std::size_t k = n / 2; k < n; ++k) {
    x.push_back(std::log(1.0 / (1.0 - std::abs(points_[k]))));
    y.push_back(std::log(static_cast<double>(k + 1)));
  }
  if (x.back() - x.front() <= 0.0) return 0.0;
  return std::max(0.0, least_squares_slope(x, y) - 1.0);
}

void ZeroSequence::write_csv(const std::string& path) const {
  CsvTable t{{"re", "im"}, {}};
  for (const auto& a : points_) t.rows.push_back({a.real(), a.imag()});
  qpo::write_csv(path, t);
}

ZeroSequence ZeroSequence::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("re,im", 0) != 0) throw ParameterError(path + ": expected header re,im");
  std::vector<cplx> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParameterError(path + ": malformed row '" + line + "'");
    pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return ZeroSequence(std::move(pts));
}

AnalyticFunctionModel AnalyticFunctionModel::power_series(std::vector<cplx> coefficients,
                                                          double r_max) {
  if (coefficients.empty()) throw ParameterError("power series: no coefficients");
  if (!(r_max >= 0.0 && r_max < 1.0)) throw ParameterError("power series: r_max must lie in [0, 1)");
  AnalyticFunctionModel m;
  m.kind_ = Kind::power_series;
  m.coeffs_ = std::move(coefficients);
  m.r_max_ = r_max;
  return m;
}

AnalyticFunctionModel AnalyticFunctionModel::gap_series(std::vector<double> exponents,
                                                        std::vector<double> log_coeffs,
                                                        double r_max,
                                                        std::vector<double> dropped_exponents,
                                                        std::vector<double> dropped_log_coeffs) {
  if (exponents.empty() || exponents.size() != log_coeffs.size())
    throw ParameterError("gap series: need matching non-empty exponent and coefficient lists");
  if (dropped_exponents.size() != dropped_log_coeffs.size())
    throw ParameterError("gap series: dropped lists differ in length");
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (!(exponents[i] >= 0.0) || exponents[i] != std::floor(exponents[i]))
      throw ParameterError("gap series: exponents must be non-negative integers");
    if (i > 0 && !(exponents[i] > exponents[i - 1]))
      throw ParameterError("gap series: exponents must increase strictly");
  }
  if (!(r_max >= 0.0 && r_max < 1.0)) throw ParameterError("gap series: r_max must lie in [0, 1)");
  AnalyticFunctionModel m;
  m.kind_ = Kind::gap_series;
  m.exps_ = std::move(exponents);
  m.logc_ = std::move(log_coeffs);
  m.dropped_exps_ = std::move(dropped_exponents);
  m.dropped_logc_ = std::move(dropped_log_coeffs);
  m.r_max_ = r_max;
  return m;
}

AnalyticFunctionModel AnalyticFunctionModel::closed_form(ClosedForm id, std::vector<double> params,
                                                         double r_max) {
  std::size_t need = 0;
  switch (id) {
    case ClosedForm::constant: need = 1; break;
    case ClosedForm::monomial: need = 2; break;
    case ClosedForm::exp_pole: need = 2; break;
    case ClosedForm::exp_cayley: need = 1; break;
    case ClosedForm::pole_power: need = 3; break;
  }
  if (params.size() != need) {
    std::ostringstream msg;
    msg << "closed form: expected " << need << " parameters, got " << params.size();
    throw ParameterError(msg.str());
  }
  if (!(r_max >= 0.0 && r_max < 1.0)) throw ParameterError("closed form: r_max must lie in [0, 1)");
  AnalyticFunctionModel m;
  m.kind_ = Kind::closed_form;
  m.form_ = id;
  m.params_ = std::move(params);
  m.r_max_ = r_max;
  return m;
}

AnalyticFunctionModel AnalyticFunctionModel::canonical_product(ZeroSequence zeros, int genus,
                                                               double r_max) {
  if (genus < 0) throw ParameterError("canonical product: genus must be non-negative");
  if (!(r_max >= 0.0 && r_max < 1.0))
    throw ParameterError("canonical product: r_max must lie in [0, 1)");
  AnalyticFunctionModel m;
  m.kind_ = Kind::canonical_product;
  m.genus_ = genus;
  m.zeros_ = std::move(zeros);
  m.r_max_ = r_max;
  return m;
}

void AnalyticFunctionModel::check_domain(cplx z) const {
  if (!(std::abs(z) <= r_max_ * (1.0 + 1e-15))) {
    std::ostringstream msg;
    msg << "analytic model evaluated at |z| = " << std::abs(z) << " > r_max = " << r_max_;
    throw DomainError(msg.str());
  }
}

cplx AnalyticFunctionModel::log_eval(cplx z) const {
  check_domain(z);
  switch (kind_) {
    case Kind::power_series: {
      cplx s = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = s * z + *it;
      if (s == 0.0) return {-kInf, 0.0};
      return std::log(s);
    }
    case Kind::gap_series: {
      if (z == 0.0) return exps_.front() == 0.0 ? cplx(logc_.front(), 0.0) : cplx(-kInf, 0.0);
      const cplx lz = std::log(z);
      double m = -kInf;
      for (std::size_t j = 0; j < exps_.size(); ++j) m = std::max(m, logc_[j] + exps_[j] * lz.real());
      // Terms below e^-40 of the largest vanish in double precision; with a
      // single survivor the log is that term's exponent.
      int active = 0;
      std::size_t lead = 0;
      for (std::size_t j = 0; j < exps_.size(); ++j) {
        const double re = logc_[j] - m + exps_[j] * lz.real();
        if (re < -40.0) continue;
        ++active;
        if (re == 0.0) lead = j;
      }
      if (active == 1) return {m, exps_[lead] * lz.imag()};
      cplx s = 0.0;
      for (std::size_t j = 0; j < exps_.size(); ++j) {
        const double re = logc_[j] - m + exps_[j] * lz.real();
        if (re >= -40.0) s += std::polar(std::exp(re), exps_[j] * lz.imag());
      }
      return std::log(s) + m;
    }
    case Kind::closed_form: {
      const auto& p = params_;
      switch (form_) {
        case ClosedForm::constant: return std::log(cplx(p[0]));
        case ClosedForm::monomial:
          if (z == 0.0) return p[1] == 0.0 ? std::log(cplx(p[0])) : cplx(-kInf, 0.0);
          return std::log(cplx(p[0])) + p[1] * std::log(z);
        case ClosedForm::exp_pole: return p[0] * std::exp(-p[1] * std::log(1.0 - z));
        case ClosedForm::exp_cayley: return p[0] * (1.0 + z) / (1.0 - z);
        case ClosedForm::pole_power: {
          const cplx v = p[1] * std::exp(-p[0] * std::log(1.0 - z)) + p[2];
          if (v == 0.0) return {-kInf, 0.0};
          return std::log(v);
        }
      }
      break;
    }
    case Kind::canonical_product: {
      const auto c = qpo::canonical_product(z, *zeros_, genus_);
      return {c.log_modulus, c.argument};
    }
  }
  return {-kInf, 0.0};
}

cplx AnalyticFunctionModel::log_derivative(cplx z) const {
  check_domain(z);
  switch (kind_) {
    case Kind::power_series: {
      cplx s = 0.0, ds = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        ds = ds * z + s;
        s = s * z + *it;
      }
      return ds / s;
    }
    case Kind::gap_series: {
      const cplx lz = std::log(z);
      std::vector<cplx> w(exps_.size());
      double m = -kInf;
      for (std::size_t j = 0; j < exps_.size(); ++j) {
        w[j] = logc_[j] + exps_[j] * lz;
        m = std::max(m, w[j].real());
      }
      cplx s = 0.0, ds = 0.0;
      for (std::size_t j = 0; j < exps_.size(); ++j) {
        const cplx e = std::exp(w[j] - m);
        s += e;
        ds += exps_[j] * e;
      }
      return ds / (s * z);
    }
    case Kind::closed_form: {
      const auto& p = params_;
      switch (form_) {
        case ClosedForm::constant: return 0.0;
        case ClosedForm::monomial: return p[1] / z;
        case ClosedForm::exp_pole: return p[0] * p[1] * std::exp(-(p[1] + 1.0) * std::log(1.0 - z));
        case ClosedForm::exp_cayley: return 2.0 * p[0] / ((1.0 - z) * (1.0 - z));
        case ClosedForm::pole_power: {
          const cplx pw = std::exp(-p[0] * std::log(1.0 - z));
          return p[1] * p[0] * pw / (1.0 - z) / (p[1] * pw + p[2]);
        }
      }
      break;
    }
    case Kind::canonical_product: {
      cplx sum = 0.0;
      for (const auto& a : zeros_->points()) {
        const cplx w = interpolation_kernel(z, a);
        const cplx dw = (1.0 - std::norm(a)) * std::conj(a) /
                        ((1.0 - z * std::conj(a)) * (1.0 - z * std::conj(a)));
        sum += -std::pow(w, genus_) / (1.0 - w) * dw;
      }
      return sum;
    }
  }
  return 0.0;
}

double AnalyticFunctionModel::log_truncation_bound(double r) const {
  if (kind_ != Kind::gap_series || dropped_exps_.empty() || r <= 0.0) return -kInf;
  std::vector<cplx> w;
  for (std::size_t j = 0; j < dropped_exps_.size(); ++j)
    w.emplace_back(dropped_logc_[j] + dropped_exps_[j] * std::log(r), 0.0);
  return log_sum_exp(w).real();
}

std::string AnalyticFunctionModel::kind() const {
  switch (kind_) {
    case Kind::power_series: return "power_series";
    case Kind::gap_series: return "gap_series";
    case Kind::closed_form: return "closed_form";
    case Kind::canonical_product: return "canonical_product";
  }
  return "unknown";
}

nlohmann::json AnalyticFunctionModel::to_json() const {
  nlohmann::json j{{"kind", kind()}, {"r_max", r_max_}};
  switch (kind_) {
    case Kind::power_series: {
      nlohmann::json c = nlohmann::json::array();
      for (const auto& v : coeffs_) c.push_back({v.real(), v.imag()});
      j["coefficients"] = c;
      break;
    }
    case Kind::gap_series:
      j["exponents"] = exps_;
      j["log_coefficients"] = logc_;
      j["dropped_exponents"] = dropped_exps_;
      j["dropped_log_coefficients"] = dropped_logc_;
      break;
    case Kind::closed_form: {
      static const char* names[] = {"constant", "monomial", "exp_pole", "exp_cayley", "pole_power"};
      j["id"] = names[static_cast<int>(form_)];
      j["params"] = params_;
      break;
    }
    case Kind::canonical_product:
      j["genus"] = genus_;
      j["zero_count"] = zeros_->size();
      break;
  }
  return j;
}

cplx log_weierstrass_factor(cplx w, int s) {
  if (s < 0) throw ParameterError("primary factor: genus must be non-negative");
  if (w == 1.0) return {-kInf, 0.0};
  if (std::abs(w) < 0.5) {
    // log E(w, s) = -sum_{j > s} w^j / j; avoids cancellation for small w.
    cplx term = std::pow(w, s + 1);
    cplx sum = 0.0;
    for (int j = s + 1; j < s + 200; ++j) {
      const cplx add = term / static_cast<double>(j);
      sum += add;
      if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
      term *= w;
    }
    return -sum;
  }
  cplx sum = std::log(1.0 - w);
  cplx term = 1.0;
  for (int j = 1; j <= s; ++j) {
    term *= w;
    sum += term / static_cast<double>(j);
  }
  return sum;
}

cplx weierstrass_factor(cplx w, int s) {
  if (w == 1.0) return 0.0;
  return std::exp(log_weierstrass_factor(w, s));
}

cplx interpolation_kernel(cplx z, cplx zeta) {
  const cplx den = 1.0 - z * std::conj(zeta);
  if (den == 0.0) throw DomainError("interpolation kernel: z conj(zeta) = 1");
  return (1.0 - std::norm(zeta)) / den;
}

CanonicalValue canonical_product(cplx z, const ZeroSequence& zeros, int s) {
  CanonicalValue out{0.0, 0.0, 0.0, 0.0};
  cplx sum = 0.0;
  bool at_zero = false;
  const auto& pts = zeros.points();
  const std::size_t outer = pts.size() - pts.size() / 10;
  double bound_sum = 0.0, tail_sum = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const cplx w = interpolation_kernel(z, pts[k]);
    const double pw = std::pow(std::abs(w), s + 1);
    bound_sum += pw;
    if (k >= outer) tail_sum += pw;
    if (std::abs(z - pts[k]) <= 1e-13) {
      at_zero = true;
      continue;
    }
    sum += log_weierstrass_factor(w, s);
  }
  const double scale = std::pow(2.0, s + 2);
  out.upper_bound = scale * bound_sum;
  out.tail_bound = scale * tail_sum;
  out.log_modulus = at_zero ? -kInf : sum.real();
  out.argument = at_zero ? 0.0 : wrap_angle(sum.imag());
  return out;
}

double tsuji_sum(cplx z, const ZeroSequence& zeros, double exponent) {
  if (!(exponent > 0.0)) throw ParameterError("tsuji sum: exponent must be positive");
  double s = 0.0;
  for (const auto& a : zeros.points()) s += std::pow(std::abs(interpolation_kernel(z, a)), exponent);
  return s;
}

std::vector<ExceptionalDisc> exceptional_discs(const ZeroSequence& zeros, double mu) {
  if (!(mu >= 0.0)) throw ParameterError("exceptional discs: mu must be non-negative");
  std::vector<ExceptionalDisc> out;
  out.reserve(zeros.size());
  for (const auto& a : zeros.points())
    out.push_back({a, std::pow(1.0 - std::norm(a), mu + 4.0)});
  return out;
}

bool in_exceptional_set(cplx z, const std::vector<ExceptionalDisc>& discs) {
  return std::any_of(discs.begin(), discs.end(),
                     [z](const ExceptionalDisc& d) { return d.contains(z); });
}

PropertyCheck fit_tsuji_lower_constant(const ZeroSequence& zeros, int s, double mu, double eps,
                                       const std::vector<cplx>& samples) {
  const auto discs = exceptional_discs(zeros, mu);
  PropertyCheck c("tsuji_lower_constant");
  c.status = CheckStatus::trend_only;
  double K = 0.0;
  int used = 0;
  for (const auto& z : samples) {
    if (std::abs(z) < 0.5 || std::abs(z) >= 1.0 || in_exceptional_set(z, discs)) continue;
    const double lp = canonical_product(z, zeros, s).log_modulus;
    const double den = std::log(1.0 - std::abs(z)) * tsuji_sum(z, zeros, mu + 1.0 + eps);
    if (den == 0.0 || !std::isfinite(lp)) continue;
    ++used;
    if (lp / den > K) {
      K = lp / den;
      c.worst_location = std::abs(z);
    }
  }
  c.measured = K;
  c.bound = kInf;
  c.note = "fitted K over " + std::to_string(used) + " points outside the exceptional discs";
  return c;
}

}  // namespace qpo
