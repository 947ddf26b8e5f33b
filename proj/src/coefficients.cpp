#include "sdms/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sdms {

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_admissible(double eps, double p) {
  if (!(eps > 0.0)) throw EllipticityError("oscillation period must be positive");
  if (!(p >= 0.0 && p < 2.0)) throw EllipticityError("oscillation magnitude P must lie in [0, 2), got " + fmt(p));
}
}  // namespace

ConstantCoefficient::ConstantCoefficient(double value) : value_(value) {
  if (!(value > 0.0)) throw EllipticityError("constant coefficient must be positive");
}

std::string ConstantCoefficient::id() const { return "constant(" + fmt(value_) + ")"; }

Example1Coefficient::Example1Coefficient(double eps, double p) : eps_(eps), p_(p) { require_admissible(eps, p); }

std::string Example1Coefficient::id() const { return "example1(P=" + fmt(p_) + ",eps=" + fmt(eps_) + ")"; }

double Example1Coefficient::eval(double x, double y) const {
  const double w = 2.0 * std::numbers::pi / eps_;
  return 1.0 / ((2.0 + p_ * std::sin(w * x)) * (2.0 + p_ * std::sin(w * y)));
}

Example2Coefficient::Example2Coefficient(double eps, double p) : eps_(eps), p_(p) { require_admissible(eps, p); }

std::string Example2Coefficient::id() const { return "example2(P=" + fmt(p_) + ",eps=" + fmt(eps_) + ")"; }

double Example2Coefficient::eval(double x, double y) const {
  const double w = 2.0 * std::numbers::pi / eps_;
  return 1.0 / (4.0 + p_ * (std::sin(w * x) + std::sin(w * y)));
}

TabulatedCoefficient::TabulatedCoefficient(int nx, int ny, std::vector<double> values, std::string name)
    : nx_(nx), ny_(ny), values_(std::move(values)), name_(std::move(name)) {
  if (nx < 2 || ny < 2 || values_.size() != static_cast<std::size_t>(nx) * ny) {
    throw std::invalid_argument("tabulated coefficient: grid needs nx, ny >= 2 and nx*ny values");
  }
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  min_ = *lo;
  max_ = *hi;
  if (!(min_ > 0.0)) throw EllipticityError("tabulated coefficient has non-positive values");
}

std::shared_ptr<TabulatedCoefficient> TabulatedCoefficient::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coefficient grid " + path);
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw std::runtime_error("coefficient grid " + path + ": bad header");
  std::vector<double> v(static_cast<std::size_t>(std::max(nx, 0)) * std::max(ny, 0));
  for (auto& x : v) {
    if (!(in >> x)) throw std::runtime_error("coefficient grid " + path + ": too few values");
  }
  return std::make_shared<TabulatedCoefficient>(nx, ny, std::move(v), "tabulated:" + path);
}

std::string TabulatedCoefficient::id() const { return name_ + "(" + std::to_string(nx_) + "x" + std::to_string(ny_) + ")"; }

double TabulatedCoefficient::eval(double x, double y) const {
  const double fx = std::clamp(x, 0.0, 1.0) * (nx_ - 1), fy = std::clamp(y, 0.0, 1.0) * (ny_ - 1);
  const int i = std::min(static_cast<int>(fx), nx_ - 2), j = std::min(static_cast<int>(fy), ny_ - 2);
  const double s = fx - i, t = fy - j;
  auto at = [&](int a, int b) { return values_[static_cast<std::size_t>(b) * nx_ + a]; };
  return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) + s * t * at(i + 1, j + 1);
}

CoefficientPtr make_coefficient(const std::string& kind, double eps, double p) {
  if (kind == "constant") return std::make_shared<ConstantCoefficient>(p);
  if (kind == "example1") return std::make_shared<Example1Coefficient>(eps, p);
  if (kind == "example2") return std::make_shared<Example2Coefficient>(eps, p);
  throw std::invalid_argument("unknown coefficient kind '" + kind + "'");
}

}  // namespace sdms
