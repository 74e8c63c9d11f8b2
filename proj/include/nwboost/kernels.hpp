#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nwboost {

enum class BaseKernel { Gaussian, Epanechnikov };
enum class KernelForm { Plain, GaussianMixture, Tabulated };

//! One component of a signed Gaussian mixture: coef * phi_scale(u), where
//! phi_s is the centered normal density with standard deviation s.
struct MixtureTerm {
  double coef;
  double scale;
};

//! A kernel function. Three representations:
//!   Plain           - a named symmetric density (Gaussian or Epanechnikov),
//!   GaussianMixture - a finite signed sum of scaled Gaussians; this family
//!                     is closed under convolution, so the twicing recursion
//!                     stays exact for a Gaussian base,
//!   Tabulated       - values on a uniform grid, linearly interpolated,
//!                     zero outside the stated support.
//! Instances are immutable after construction and safe to share across
//! threads.
class KernelSpec {
 public:
  static KernelSpec gaussian();
  static KernelSpec epanechnikov();
  static KernelSpec gaussian_mixture(std::vector<MixtureTerm> terms);
  static KernelSpec tabulated(double lo, double hi, std::vector<double> values);
  //! Accepts "gaussian" or "epanechnikov" (case-insensitive).
  static KernelSpec parse(std::string_view name);

  KernelForm form() const { return form_; }
  BaseKernel base() const { return base_; }
  const std::vector<MixtureTerm>& terms() const { return terms_; }
  //! Component variances (scale^2). The convolution algebra adds variances,
  //! so these stay exact (small integers for a twiced standard Gaussian)
  //! where the scales themselves are irrational.
  const std::vector<double>& variances() const { return variances_; }
  const std::vector<double>& table() const { return table_; }
  double table_lo() const { return lo_; }
  double table_hi() const { return hi_; }
  double table_step() const { return step_; }

  //! True for Plain Gaussian and GaussianMixture (closed-form convolutions).
  bool gaussian_family() const;

  //! Radius beyond which evaluation returns exactly zero. Gaussians are
  //! truncated at 8 standard deviations of the widest component.
  double support_radius() const;

  double operator()(double u) const;

  std::string describe() const;

 private:
  KernelSpec() = default;
  //! Builds a mixture from (coef, variance) pairs; the canonical internal
  //! representation, used by convolve/twicing to avoid sqrt round trips.
  static KernelSpec from_components(std::vector<std::pair<double, double>> comps);
  friend KernelSpec convolve(const KernelSpec&, const KernelSpec&);
  friend KernelSpec twicing_step(const KernelSpec&);

  KernelForm form_ = KernelForm::Plain;
  BaseKernel base_ = BaseKernel::Gaussian;
  std::vector<MixtureTerm> terms_;            // GaussianMixture (derived view)
  std::vector<double> variances_;             // GaussianMixture (canonical)
  std::vector<double> table_;                 // Tabulated
  double lo_ = 0.0, hi_ = 0.0, step_ = 0.0;   // Tabulated grid
};

//! Bandwidth-scaled view: value(u) = K(u/h)/h.
struct ScaledKernel {
  const KernelSpec& spec;
  double h;
  double operator()(double u) const { return spec(u / h) / h; }
};

double eval(const KernelSpec& k, double u);

//! Convolution a*b. Gaussian-family pairs convolve in closed form
//! (phi_s * phi_t = phi_sqrt(s^2+t^2), extended bilinearly); every other
//! pair is computed by trapezoid quadrature on a uniform grid covering the
//! Minkowski sum of the supports. Two tabulated inputs must share a grid
//! step (within 1e-9 relative), otherwise std::invalid_argument.
KernelSpec convolve(const KernelSpec& a, const KernelSpec& b);

//! One step of the twicing recursion: 2*k - k*k.
KernelSpec twicing_step(const KernelSpec& k);

//! K^(r): r applications of the twicing recursion to a plain base kernel.
//! K^(0) is the base itself; K^(r) is a kernel of order 2(r+1).
KernelSpec higher_order_kernel(const KernelSpec& base, int r);

//! p-th moment, integral of u^p K(u) du, for p <= 8. Closed form for the
//! Gaussian family, adaptive trapezoid quadrature otherwise.
double kernel_moment(const KernelSpec& k, int p);

//! Resamples k onto a uniform symmetric grid with approximately the given
//! step. radius <= 0 means the kernel's own support radius; a smaller radius
//! crops negligible tails (the result must still integrate to 1 within 1e-6).
KernelSpec tabulate(const KernelSpec& k, double step, double radius = 0.0);

//! Evaluation view that hoists the representation dispatch out of tight
//! loops. Holds pointers into the viewed KernelSpec, which must outlive it.
class KernelView {
 public:
  explicit KernelView(const KernelSpec& k) : k_(&k) {
    if (k.form() == KernelForm::Tabulated) {
      tab_ = k.table().data();
      n_ = k.table().size();
      lo_ = k.table_lo();
      hi_ = k.table_hi();
      inv_step_ = 1.0 / k.table_step();
    }
  }

  double operator()(double u) const {
    if (tab_ != nullptr) {
      if (u < lo_ || u > hi_) return 0.0;
      const double pos = (u - lo_) * inv_step_;
      const auto i = static_cast<std::size_t>(pos);
      if (i + 1 >= n_) return tab_[n_ - 1];
      const double frac = pos - static_cast<double>(i);
      return tab_[i] + frac * (tab_[i + 1] - tab_[i]);
    }
    return (*k_)(u);
  }

 private:
  const KernelSpec* k_;
  const double* tab_ = nullptr;
  std::size_t n_ = 0;
  double lo_ = 0.0, hi_ = 0.0, inv_step_ = 0.0;
};

}  // namespace nwboost
