#include "randsec/weights.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "randsec/error.hpp"

namespace randsec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fs_radial_fraction(double r) {
  if (std::isinf(r)) return 1.0;
  if (r <= 1.0) return r * r / (1.0 + r * r);
  return 1.0 / (1.0 + 1.0 / (r * r));
}

// Smallest value of (1 + |z|^2) / (1 + |z - c|^2) over P^1.
double translated_ratio_min(Complex c) {
  const double a = std::abs(c);
  return (2.0 + a * a - a * std::sqrt(4.0 + a * a)) / 2.0;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

double fs_potential_value(Complex z) {
  const double r = std::abs(z);
  if (r <= 1.0) return 0.5 * std::log1p(r * r);
  return std::log(r) + 0.5 * std::log1p(1.0 / (r * r));
}

struct Weight::Impl {
  WeightKind kind = WeightKind::Custom;
  std::string name;
  std::string description;
  double alpha = 0.0;
  Complex translation{0.0, 0.0};
  std::function<double(Complex)> eval;
  std::function<double(Complex)> curvature;
  std::function<double(double)> radial_mass;
  bool is_radial = false;
  Complex center{0.0, 0.0};
  double lelong_constant = 0.0;
  double strict_positivity = 0.0;
  double total_mass = 1.0;
  double fd_step = 1e-3;
};

Weight::Weight(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Weight Weight::fubini_study() {
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::FubiniStudy;
  impl->name = "fubini_study";
  impl->description = "fubini_study";
  impl->alpha = 1.0;
  impl->eval = [](Complex z) { return fs_potential_value(z); };
  impl->curvature = [](Complex) { return 1.0; };
  impl->radial_mass = [](double r) { return fs_radial_fraction(r); };
  impl->is_radial = true;
  impl->lelong_constant = 0.5 * std::numbers::ln2;
  impl->strict_positivity = 1.0;
  impl->total_mass = 1.0;
  return Weight(std::move(impl));
}

Weight Weight::scaled_fs(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidConfiguration("scaled_fs: alpha must lie in (0, 1], got " +
                               format_double(alpha));
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::ScaledFS;
  impl->name = "scaled_fs";
  impl->description = "scaled_fs(" + format_double(alpha) + ")";
  impl->alpha = alpha;
  impl->eval = [alpha](Complex z) { return alpha * fs_potential_value(z); };
  impl->curvature = [alpha](Complex) { return alpha; };
  impl->radial_mass = [alpha](double r) { return alpha * fs_radial_fraction(r); };
  impl->is_radial = true;
  impl->lelong_constant = alpha * 0.5 * std::numbers::ln2;
  impl->strict_positivity = alpha;
  impl->total_mass = alpha;
  return Weight(std::move(impl));
}

Weight Weight::translated_fs(Complex c) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
    throw InvalidConfiguration("translated_fs: center must be finite");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::TranslatedFS;
  impl->name = "translated_fs";
  impl->description = "translated_fs(" + format_double(c.real()) + "," +
                      format_double(c.imag()) + ")";
  impl->alpha = 1.0;
  impl->translation = c;
  impl->eval = [c](Complex z) { return fs_potential_value(z - c); };
  // ((1 + |z|^2) / (1 + |z - c|^2))^2, the FS form moved to c measured
  // against the FS form at the origin.
  impl->curvature = [c](Complex z) {
    return std::exp(4.0 * (fs_potential_value(z) - fs_potential_value(z - c)));
  };
  impl->radial_mass = [](double r) { return fs_radial_fraction(r); };
  impl->is_radial = true;
  impl->center = c;
  const double a = std::abs(c);
  impl->lelong_constant = 0.5 * std::log1p((1.0 + a) * (1.0 + a));
  const double m = translated_ratio_min(c);
  impl->strict_positivity = m * m;
  impl->total_mass = 1.0;
  return Weight(std::move(impl));
}

Weight Weight::custom(CustomWeightSpec spec) {
  if (!spec.eval) throw InvalidConfiguration("custom weight requires eval");
  if (!(spec.fd_step > 0.0)) {
    throw InvalidConfiguration("custom weight: fd_step must be positive");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::Custom;
  impl->name = spec.name;
  impl->description = "custom(" + spec.name + ")";
  impl->eval = std::move(spec.eval);
  impl->curvature = std::move(spec.curvature_density);
  impl->radial_mass = std::move(spec.radial_mass);
  impl->is_radial = spec.is_radial;
  impl->center = spec.center;
  impl->lelong_constant = spec.lelong_constant;
  impl->strict_positivity = spec.strict_positivity;
  impl->total_mass = spec.total_mass;
  impl->fd_step = spec.fd_step;
  return Weight(std::move(impl));
}

Weight Weight::blend(double a, const Weight& u, double b, const Weight& v) {
  if (!(a >= 0.0 && b >= 0.0) || (a == 0.0 && b == 0.0)) {
    throw InvalidConfiguration("blend: coefficients must be nonnegative and not both zero");
  }
  // Vanishing components are dropped.
  if (b == 0.0) return blend(0.0, v, a, u);
  auto impl = std::make_shared<Impl>();
  impl->kind = WeightKind::Custom;
  if (a == 0.0) {
    const Impl& src = *v.impl_;
    impl->name = "blend";
    impl->description = format_double(b) + "*" + src.description;
    impl->eval = [b, v](Complex z) { return b * v.eval(z); };
    if (src.curvature) impl->curvature = [b, v](Complex z) { return b * v.curvature_density(z); };
    if (src.radial_mass) impl->radial_mass = [b, v](double r) { return b * v.radial_mass(r); };
    impl->is_radial = src.is_radial;
    impl->center = src.center;
    impl->lelong_constant = b * src.lelong_constant;
    impl->strict_positivity = b * src.strict_positivity;
    impl->total_mass = b * src.total_mass;
    impl->fd_step = src.fd_step;
    return Weight(std::move(impl));
  }
  const Impl& su = *u.impl_;
  const Impl& sv = *v.impl_;
  impl->name = "blend";
  impl->description = format_double(a) + "*" + su.description + "+" +
                      format_double(b) + "*" + sv.description;
  impl->eval = [a, u, b, v](Complex z) { return a * u.eval(z) + b * v.eval(z); };
  if (su.curvature && sv.curvature) {
    impl->curvature = [a, u, b, v](Complex z) {
      return a * u.curvature_density(z) + b * v.curvature_density(z);
    };
  }
  impl->is_radial = su.is_radial && sv.is_radial && su.center == sv.center;
  impl->center = su.center;
  if (impl->is_radial) {
    impl->radial_mass = [a, u, b, v](double r) {
      return a * u.radial_mass(r) + b * v.radial_mass(r);
    };
  }
  impl->lelong_constant = a * su.lelong_constant + b * sv.lelong_constant;
  impl->strict_positivity = a * su.strict_positivity + b * sv.strict_positivity;
  impl->total_mass = a * su.total_mass + b * sv.total_mass;
  impl->fd_step = std::min(su.fd_step, sv.fd_step);
  return Weight(std::move(impl));
}

WeightKind Weight::kind() const { return impl_->kind; }
const std::string& Weight::name() const { return impl_->name; }
std::string Weight::describe() const { return impl_->description; }
std::uint64_t Weight::hash() const { return fnv1a(impl_->description); }

double Weight::eval(Complex z) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw OutOfRange("weight evaluated at a non-finite point");
  }
  const double value = impl_->eval(z);
  if (!std::isfinite(value)) {
    throw OutOfRange("weight value overflowed at |z| = " + format_double(std::abs(z)));
  }
  return value;
}

bool Weight::has_curvature_density() const { return static_cast<bool>(impl_->curvature); }

double Weight::curvature_density(Complex z) const {
  if (impl_->curvature) return impl_->curvature(z);
  return fd_curvature_density(z);
}

double Weight::fd_curvature_density(Complex z) const {
  const double h = impl_->fd_step * std::max(1.0, std::abs(z));
  const Complex dx(h, 0.0);
  const Complex dy(0.0, h);
  const double lap = (impl_->eval(z + dx) + impl_->eval(z - dx) + impl_->eval(z + dy) +
                      impl_->eval(z - dy) - 4.0 * impl_->eval(z)) /
                     (h * h);
  const double r2 = std::norm(z);
  return 0.5 * lap * (1.0 + r2) * (1.0 + r2);
}

bool Weight::is_radial() const { return impl_->is_radial; }
Complex Weight::center() const { return impl_->center; }
bool Weight::has_closed_form_radial_mass() const {
  return static_cast<bool>(impl_->radial_mass);
}

double Weight::radial_mass(double r) const {
  if (!impl_->is_radial) {
    throw UnsupportedOperation("radial mass requested for non-radial weight " +
                               impl_->description);
  }
  if (!(r >= 0.0)) throw OutOfRange("radial mass requires r >= 0");
  if (impl_->radial_mass) return impl_->radial_mass(r);
  if (std::isinf(r)) return impl_->total_mass;
  if (r == 0.0) return 0.0;
  // r * phi'(r) by a centered difference along the positive real direction.
  const double h = std::min(impl_->fd_step * std::max(1.0, r), 0.5 * r);
  const Complex c = impl_->center;
  const double dphi =
      (impl_->eval(c + Complex(r + h, 0.0)) - impl_->eval(c + Complex(r - h, 0.0))) /
      (2.0 * h);
  return r * dphi;
}

double Weight::lelong_constant() const { return impl_->lelong_constant; }
double Weight::strict_positivity() const { return impl_->strict_positivity; }
double Weight::total_mass() const { return impl_->total_mass; }
double Weight::fd_step() const { return impl_->fd_step; }
double Weight::alpha() const { return impl_->alpha; }
Complex Weight::translation() const { return impl_->translation; }

double eval_weight(const Weight& w, Complex z) { return w.eval(z); }

double curvature_radial_mass(const Weight& w, double r) { return w.radial_mass(r); }

WeightSequence::WeightSequence(Weight base, RegularizerRule rule)
    : base_(std::move(base)), rule_(rule) {
  if (rule_ == RegularizerRule::Table) {
    throw InvalidConfiguration("table regularizer requires explicit counts");
  }
}

WeightSequence::WeightSequence(Weight base, std::map<int, int> table)
    : base_(std::move(base)), rule_(RegularizerRule::Table), table_(std::move(table)) {}

int WeightSequence::regularizer_count(int p) const {
  if (p < 1) throw InvalidConfiguration("p must be positive");
  int n = 0;
  switch (rule_) {
    case RegularizerRule::None:
      n = 0;
      break;
    case RegularizerRule::Sqrt:
      n = static_cast<int>(std::floor(std::sqrt(static_cast<double>(p))));
      break;
    case RegularizerRule::Log:
      n = static_cast<int>(std::floor(std::log(static_cast<double>(p)))) + 1;
      break;
    case RegularizerRule::Table: {
      auto it = table_.find(p);
      if (it == table_.end()) {
        throw InvalidConfiguration("regularizer table has no entry for p = " +
                                   std::to_string(p));
      }
      n = it->second;
      break;
    }
  }
  if (n < 0 || n > p) {
    throw InvalidConfiguration("regularizer count n_p = " + std::to_string(n) +
                               " outside [0, p] for p = " + std::to_string(p));
  }
  return n;
}

Weight effective_weight(const WeightSequence& ws, int p) {
  const int n = ws.regularizer_count(p);
  if (n == 0) return Weight::blend(static_cast<double>(p), ws.base(), 0.0, ws.base());
  return Weight::blend(static_cast<double>(p - n), ws.base(), static_cast<double>(n),
                       Weight::fubini_study());
}

namespace {

Weight make_quartic() {
  CustomWeightSpec spec;
  spec.name = "quartic";
  spec.eval = [](Complex z) {
    const double r2 = std::norm(z);
    if (r2 <= 1.0) return 0.25 * std::log1p(r2 * r2);
    return std::log(r2) * 0.5 + 0.25 * std::log1p(1.0 / (r2 * r2));
  };
  spec.is_radial = true;
  spec.lelong_constant = 0.25 * std::numbers::ln2;
  spec.strict_positivity = 0.0;  // curvature vanishes at the origin
  spec.total_mass = 1.0;
  spec.fd_step = 1e-4;
  return Weight::custom(std::move(spec));
}

Weight make_two_center() {
  const Complex c(1.0, 0.0);
  CustomWeightSpec spec;
  spec.name = "two_center";
  spec.eval = [c](Complex z) {
    return 0.5 * fs_potential_value(z - c) + 0.5 * fs_potential_value(z + c);
  };
  spec.curvature_density = [c](Complex z) {
    const double base = fs_potential_value(z);
    return 0.5 * (std::exp(4.0 * (base - fs_potential_value(z - c))) +
                  std::exp(4.0 * (base - fs_potential_value(z + c))));
  };
  spec.is_radial = false;
  spec.lelong_constant = 0.5 * std::log(5.0);
  const double m = translated_ratio_min(c);
  spec.strict_positivity = m * m;
  spec.total_mass = 1.0;
  return Weight::custom(std::move(spec));
}

const std::map<std::string, Weight, std::less<>>& registry() {
  static const std::map<std::string, Weight, std::less<>> weights = {
      {"quartic", make_quartic()},
      {"two_center", make_two_center()},
  };
  return weights;
}

}  // namespace

const Weight& custom_weight(std::string_view name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    throw InvalidConfiguration("unknown custom weight '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> custom_weight_names() {
  std::vector<std::string> names;
  for (const auto& [name, w] : registry()) names.push_back(name);
  return names;
}

}  // namespace randsec
