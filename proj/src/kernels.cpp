#include "nwboost/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nwboost {

namespace {

constexpr double kGaussTruncSigmas = 8.0;  // tails below double relevance
constexpr double kTwoPi = 6.283185307179586476925287;

double gaussian_density(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(kTwoPi);
}

double epanechnikov_density(double u) {
  const double a = std::abs(u);
  return a <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

using Component = std::pair<double, double>;  // (coefficient, variance)

//! Signed-mixture evaluation in extended precision. Twicing coefficients are
//! alternating binomials that cancel massively; long double keeps the
//! cancellation error negligible through r = 5.
double mixture_eval(const std::vector<MixtureTerm>& terms,
                    const std::vector<double>& variances, double u) {
  long double acc = 0.0L;
  const long double u2 = static_cast<long double>(u) * u;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const long double v = variances[i];
    acc += static_cast<long double>(terms[i].coef) * std::exp(-0.5L * u2 / v) /
           std::sqrt(2.0L * 3.14159265358979323846264L * v);
  }
  return static_cast<double>(acc);
}

//! Combines components with (numerically) equal variances, sorted ascending.
std::vector<Component> merge_components(std::vector<Component> comps) {
  std::sort(comps.begin(), comps.end(),
            [](const Component& a, const Component& b) { return a.second < b.second; });
  std::vector<Component> out;
  for (const auto& c : comps) {
    if (!out.empty() &&
        std::abs(out.back().second - c.second) <=
            1e-9 * std::max(1.0, std::max(out.back().second, c.second))) {
      out.back().first += c.first;
      continue;
    }
    out.push_back(c);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Component& c) { return c.first == 0.0; }),
            out.end());
  return out;
}

double trapezoid_sum(const std::vector<double>& v, double step) {
  if (v.size() < 2) return 0.0;
  double acc = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) acc += v[i];
  return acc * step;
}

}  // namespace

KernelSpec KernelSpec::gaussian() {
  KernelSpec k;
  k.form_ = KernelForm::Plain;
  k.base_ = BaseKernel::Gaussian;
  return k;
}

KernelSpec KernelSpec::epanechnikov() {
  KernelSpec k;
  k.form_ = KernelForm::Plain;
  k.base_ = BaseKernel::Epanechnikov;
  return k;
}

KernelSpec KernelSpec::from_components(std::vector<Component> comps) {
  if (comps.empty()) throw std::invalid_argument("gaussian_mixture: no terms");
  double coef_sum = 0.0;
  for (const auto& [coef, variance] : comps) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(coef))
      throw std::invalid_argument("gaussian_mixture: invalid term");
    coef_sum += coef;
  }
  if (std::abs(coef_sum - 1.0) > 1e-6)
    throw std::invalid_argument("gaussian_mixture: coefficients must sum to 1");
  comps = merge_components(std::move(comps));
  KernelSpec k;
  k.form_ = KernelForm::GaussianMixture;
  k.base_ = BaseKernel::Gaussian;
  k.terms_.reserve(comps.size());
  k.variances_.reserve(comps.size());
  for (const auto& [coef, variance] : comps) {
    k.terms_.push_back({coef, std::sqrt(variance)});
    k.variances_.push_back(variance);
  }
  return k;
}

KernelSpec KernelSpec::gaussian_mixture(std::vector<MixtureTerm> terms) {
  std::vector<Component> comps;
  comps.reserve(terms.size());
  for (const auto& t : terms) {
    if (!(t.scale > 0.0) || !std::isfinite(t.scale))
      throw std::invalid_argument("gaussian_mixture: scales must be positive");
    comps.emplace_back(t.coef, t.scale * t.scale);
  }
  return from_components(std::move(comps));
}

KernelSpec KernelSpec::tabulated(double lo, double hi, std::vector<double> values) {
  if (values.size() < 2) throw std::invalid_argument("tabulated: need >= 2 values");
  if (!(hi > lo)) throw std::invalid_argument("tabulated: need hi > lo");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("tabulated: non-finite value");
  KernelSpec k;
  k.form_ = KernelForm::Tabulated;
  k.lo_ = lo;
  k.hi_ = hi;
  k.step_ = (hi - lo) / static_cast<double>(values.size() - 1);
  k.table_ = std::move(values);
  const double integral = trapezoid_sum(k.table_, k.step_);
  if (std::abs(integral - 1.0) > 1e-6)
    throw std::invalid_argument("tabulated: trapezoid integral " + std::to_string(integral) +
                                " not within 1e-6 of 1");
  return k;
}

KernelSpec KernelSpec::parse(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "gaussian") return gaussian();
  if (s == "epanechnikov") return epanechnikov();
  throw std::invalid_argument("unknown kernel '" + s + "' (expected gaussian|epanechnikov)");
}

bool KernelSpec::gaussian_family() const {
  return form_ == KernelForm::GaussianMixture ||
         (form_ == KernelForm::Plain && base_ == BaseKernel::Gaussian);
}

double KernelSpec::support_radius() const {
  switch (form_) {
    case KernelForm::Plain:
      return base_ == BaseKernel::Gaussian ? kGaussTruncSigmas : 1.0;
    case KernelForm::GaussianMixture: {
      double max_scale = 0.0;
      for (const auto& t : terms_) max_scale = std::max(max_scale, t.scale);
      return kGaussTruncSigmas * max_scale;
    }
    case KernelForm::Tabulated:
      return std::max(std::abs(lo_), std::abs(hi_));
  }
  return 0.0;
}

double KernelSpec::operator()(double u) const {
  switch (form_) {
    case KernelForm::Plain:
      if (base_ == BaseKernel::Gaussian)
        return std::abs(u) > kGaussTruncSigmas ? 0.0 : gaussian_density(u);
      return epanechnikov_density(u);
    case KernelForm::GaussianMixture:
      return std::abs(u) > support_radius() ? 0.0 : mixture_eval(terms_, variances_, u);
    case KernelForm::Tabulated: {
      if (u < lo_ || u > hi_) return 0.0;
      const double pos = (u - lo_) / step_;
      const auto i = static_cast<std::size_t>(pos);
      if (i + 1 >= table_.size()) return table_.back();
      const double frac = pos - static_cast<double>(i);
      return table_[i] + frac * (table_[i + 1] - table_[i]);
    }
  }
  return 0.0;
}

std::string KernelSpec::describe() const {
  switch (form_) {
    case KernelForm::Plain:
      return base_ == BaseKernel::Gaussian ? "gaussian" : "epanechnikov";
    case KernelForm::GaussianMixture:
      return "gaussian-mixture[" + std::to_string(terms_.size()) + "]";
    case KernelForm::Tabulated:
      return "tabulated[" + std::to_string(lo_) + "," + std::to_string(hi_) + "]";
  }
  return "?";
}

double eval(const KernelSpec& k, double u) { return k(u); }

namespace {

//! (coefficient, variance) components of a Gaussian-family kernel.
std::vector<std::pair<double, double>> as_components(const KernelSpec& k) {
  if (k.form() == KernelForm::GaussianMixture) {
    std::vector<std::pair<double, double>> comps;
    comps.reserve(k.terms().size());
    for (std::size_t i = 0; i < k.terms().size(); ++i)
      comps.emplace_back(k.terms()[i].coef, k.variances()[i]);
    return comps;
  }
  return {{1.0, 1.0}};  // plain standard Gaussian
}

//! Support interval of a kernel: tabulated keeps its grid bounds, everything
//! else is symmetric about zero.
void support_interval(const KernelSpec& k, double& lo, double& hi) {
  if (k.form() == KernelForm::Tabulated) {
    lo = k.table_lo();
    hi = k.table_hi();
  } else {
    hi = k.support_radius();
    lo = -hi;
  }
}

constexpr int kDefaultGridPoints = 4096;  // support_width / 4096 step

//! Trapezoid-quadrature convolution. The output grid covers the Minkowski
//! sum of the supports at the default resolution; the integration grid over
//! `a`'s support is chosen independently (a's native grid when tabulated,
//! its own support_width/4096 otherwise) so the quadrature stays accurate
//! when the output support is much wider than `a`'s.
KernelSpec grid_convolve(const KernelSpec& a, const KernelSpec& b) {
  double a_lo, a_hi, b_lo, b_hi;
  support_interval(a, a_lo, a_hi);
  support_interval(b, b_lo, b_hi);
  const double out_lo = a_lo + b_lo;
  const double out_hi = a_hi + b_hi;

  double out_step;
  if (a.form() == KernelForm::Tabulated && b.form() == KernelForm::Tabulated) {
    const double sa = a.table_step(), sb = b.table_step();
    if (std::abs(sa - sb) > 1e-9 * std::max(sa, sb))
      throw std::invalid_argument("convolve: tabulated grids have mismatched steps (" +
                                  std::to_string(sa) + " vs " + std::to_string(sb) + ")");
    out_step = sa;
  } else if (a.form() == KernelForm::Tabulated) {
    out_step = a.table_step();
  } else if (b.form() == KernelForm::Tabulated) {
    out_step = b.table_step();
  } else {
    out_step = (out_hi - out_lo) / kDefaultGridPoints;
  }

  std::size_t n_src;
  double src_step;
  if (a.form() == KernelForm::Tabulated) {
    n_src = a.table().size();
    src_step = a.table_step();
  } else {
    n_src = kDefaultGridPoints + 1;
    src_step = (a_hi - a_lo) / kDefaultGridPoints;
  }
  std::vector<double> src(n_src);
  for (std::size_t j = 0; j < n_src; ++j) src[j] = a(a_lo + static_cast<double>(j) * src_step);

  const auto n_out = static_cast<std::size_t>(std::ceil((out_hi - out_lo) / out_step)) + 1;
  std::vector<double> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = out_lo + static_cast<double>(k) * out_step;
    double acc = 0.5 * (src.front() * b(t - a_lo) +
                        src.back() * b(t - (a_lo + static_cast<double>(n_src - 1) * src_step)));
    for (std::size_t j = 1; j + 1 < n_src; ++j)
      acc += src[j] * b(t - (a_lo + static_cast<double>(j) * src_step));
    out[k] = acc * src_step;
  }
  return KernelSpec::tabulated(out_lo, out_lo + static_cast<double>(n_out - 1) * out_step,
                               std::move(out));
}

//! Canonical operand order so convolve(a,b) and convolve(b,a) run the exact
//! same quadrature (commutativity holds bitwise, not just approximately).
bool quadrature_first(const KernelSpec& a, const KernelSpec& b) {
  const double ra = a.support_radius(), rb = b.support_radius();
  if (ra != rb) return ra < rb;
  return static_cast<int>(a.form()) <= static_cast<int>(b.form());
}

}  // namespace

KernelSpec convolve(const KernelSpec& a, const KernelSpec& b) {
  if (a.gaussian_family() && b.gaussian_family()) {
    const auto ca = as_components(a);
    const auto cb = as_components(b);
    std::vector<std::pair<double, double>> out;
    out.reserve(ca.size() * cb.size());
    for (const auto& [xc, xv] : ca)
      for (const auto& [yc, yv] : cb) out.emplace_back(xc * yc, xv + yv);
    return KernelSpec::from_components(std::move(out));
  }
  return quadrature_first(a, b) ? grid_convolve(a, b) : grid_convolve(b, a);
}

KernelSpec twicing_step(const KernelSpec& k) {
  if (k.gaussian_family()) {
    const auto self = as_components(k);
    std::vector<std::pair<double, double>> out;
    out.reserve(self.size() * (self.size() + 2));
    for (const auto& [c, v] : self) out.emplace_back(2.0 * c, v);
    for (const auto& [xc, xv] : self)
      for (const auto& [yc, yv] : self) out.emplace_back(-xc * yc, xv + yv);
    return KernelSpec::from_components(std::move(out));
  }
  const KernelSpec conv = convolve(k, k);
  std::vector<double> vals(conv.table().size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double t = conv.table_lo() + static_cast<double>(i) * conv.table_step();
    vals[i] = 2.0 * k(t) - conv.table()[i];
  }
  return KernelSpec::tabulated(conv.table_lo(), conv.table_hi(), std::move(vals));
}

KernelSpec higher_order_kernel(const KernelSpec& base, int r) {
  if (r < 0) throw std::invalid_argument("higher_order_kernel: r must be >= 0");
  if (base.form() != KernelForm::Plain)
    throw std::invalid_argument("higher_order_kernel: base must be a plain kernel");
  KernelSpec k = base;
  for (int i = 0; i < r; ++i) k = twicing_step(k);
  return k;
}

namespace {

double double_factorial(int p) {
  double acc = 1.0;
  for (int v = p; v > 1; v -= 2) acc *= v;
  return acc;
}

double adaptive_trapezoid_moment(const KernelSpec& k, int p) {
  double lo, hi;
  support_interval(k, lo, hi);
  const auto f = [&](double u) { return std::pow(u, p) * k(u); };
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 4096; n <= (1u << 20); n *= 2) {
    const double step = (hi - lo) / static_cast<double>(n);
    double acc = 0.5 * (f(lo) + f(hi));
    for (std::size_t j = 1; j < n; ++j) acc += f(lo + static_cast<double>(j) * step);
    const double integral = acc * step;
    if (!std::isnan(prev) && std::abs(integral - prev) <= 1e-10 * std::max(1.0, std::abs(integral)))
      return integral;
    prev = integral;
  }
  return prev;
}

}  // namespace

double kernel_moment(const KernelSpec& k, int p) {
  if (p < 0 || p > 8) throw std::invalid_argument("kernel_moment: need 0 <= p <= 8");
  if (k.gaussian_family()) {
    if (p % 2 == 1) return 0.0;
    const double dfact = double_factorial(p - 1);
    // variance powers keep the twicing family's alternating sums exact
    long double acc = 0.0L;
    for (const auto& [coef, variance] : as_components(k)) {
      long double power = 1.0L;
      for (int e = 0; e < p / 2; ++e) power *= variance;
      acc += static_cast<long double>(coef) * power;
    }
    return static_cast<double>(acc) * dfact;
  }
  return adaptive_trapezoid_moment(k, p);
}

KernelSpec tabulate(const KernelSpec& k, double step, double radius) {
  if (!(step > 0.0)) throw std::invalid_argument("tabulate: step must be positive");
  if (radius <= 0.0) radius = k.support_radius();
  const auto half = static_cast<std::size_t>(std::ceil(radius / step));
  const double actual_step = radius / static_cast<double>(half);
  std::vector<double> vals(2 * half + 1);
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = k(-radius + static_cast<double>(i) * actual_step);
  return KernelSpec::tabulated(-radius, radius, std::move(vals));
}

}  // namespace nwboost
