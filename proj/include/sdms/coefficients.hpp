#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdms {

class EllipticityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar permeability field K(x, y) with closed-form ellipticity bounds.
class CoefficientField {
 public:
  virtual ~CoefficientField() = default;
  /// Identifier including all parameters; used in cache fingerprints.
  virtual std::string id() const = 0;
  virtual double eval(double x, double y) const = 0;
  virtual double lambda_min() const = 0;
  virtual double lambda_max() const = 0;
  /// Oscillation period (0 for non-oscillatory fields).
  virtual double epsilon() const { return 0.0; }

  /// eval() that rejects non-positive values.
  double checked(double x, double y) const {
    const double k = eval(x, y);
    if (!(k > 0.0)) throw EllipticityError("coefficient " + id() + " is not positive at a quadrature point");
    return k;
  }
};

using CoefficientPtr = std::shared_ptr<const CoefficientField>;

class ConstantCoefficient final : public CoefficientField {
 public:
  explicit ConstantCoefficient(double value);
  std::string id() const override;
  double eval(double, double) const override { return value_; }
  double lambda_min() const override { return value_; }
  double lambda_max() const override { return value_; }

 private:
  double value_;
};

/// 1 / ((2 + P sin(2πx/ε)) (2 + P sin(2πy/ε))), admissible for 0 <= P < 2.
class Example1Coefficient final : public CoefficientField {
 public:
  Example1Coefficient(double eps, double p);
  std::string id() const override;
  double eval(double x, double y) const override;
  double lambda_min() const override { return 1.0 / ((2.0 + p_) * (2.0 + p_)); }
  double lambda_max() const override { return 1.0 / ((2.0 - p_) * (2.0 - p_)); }
  double epsilon() const override { return eps_; }

 private:
  double eps_, p_;
};

/// 1 / (4 + P (sin(2πx/ε) + sin(2πy/ε))), admissible for 0 <= P < 2.
class Example2Coefficient final : public CoefficientField {
 public:
  Example2Coefficient(double eps, double p);
  std::string id() const override;
  double eval(double x, double y) const override;
  double lambda_min() const override { return 1.0 / (4.0 + 2.0 * p_); }
  double lambda_max() const override { return 1.0 / (4.0 - 2.0 * p_); }
  double epsilon() const override { return eps_; }

 private:
  double eps_, p_;
};

/// Bilinear interpolation of values on a uniform (nx x ny) grid over the unit square.
class TabulatedCoefficient final : public CoefficientField {
 public:
  TabulatedCoefficient(int nx, int ny, std::vector<double> values, std::string name = "tabulated");
  /// Text format: header `nx ny`, then nx*ny values in row-major order (row = y index).
  static std::shared_ptr<TabulatedCoefficient> load(const std::string& path);
  std::string id() const override;
  double eval(double x, double y) const override;
  double lambda_min() const override { return min_; }
  double lambda_max() const override { return max_; }

 private:
  int nx_, ny_;
  std::vector<double> values_;
  std::string name_;
  double min_, max_;
};

/// Builds a registered field: "constant" (value = p), "example1", "example2".
CoefficientPtr make_coefficient(const std::string& kind, double eps, double p);

}  // namespace sdms
