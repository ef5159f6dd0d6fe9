#pragma once

#include <string>
#include <utility>
#include <vector>

namespace subgauss {

/// Space-time scale function F: (0,inf) -> (0,inf), strictly increasing
/// with F(0+)=0, F(inf)=inf. Three kinds: pure power r^beta, a two-piece
/// power law with breakpoint at r=1, and a tabulated curve interpolated
/// (and extrapolated) log-log.
class ScaleFunction {
public:
  enum class Kind { power, two_piece, tabulated };

  static ScaleFunction power(double beta);
  static ScaleFunction two_piece(double beta1, double beta2);
  // Pairs (r, F(r)), both columns strictly increasing.
  static ScaleFunction tabulated(std::vector<std::pair<double, double>> table);
  static ScaleFunction tabulated_csv(const std::string& path);

  double operator()(double r) const;  // F(r)
  double inverse(double t) const;     // R(t), F(R(t)) = t
  Kind kind() const { return kind_; }
  double beta1() const { return b1_; }
  double beta2() const { return b2_; }

private:
  ScaleFunction() = default;
  Kind kind_ = Kind::power;
  double b1_ = 2.0, b2_ = 2.0;
  // tabulated: log r / log F knots plus end slopes for continuation
  std::vector<double> lr_, lf_;
};

struct Regularity {
  double beta;        // lower exponent of (R/r)^beta <= F(R)/F(r)
  double beta_prime;  // upper exponent
  double C;           // constant making both bounds hold on the grid
};

/// Tightest power-law envelope over all grid pairs; throws
/// regularity_error when the fitted beta <= 1.
Regularity regularity_check(const ScaleFunction& f,
                            const std::vector<double>& grid);

struct ProfilePoint {
  double s = 0.0;
  double phi = 0.0;
  double argmax_r = 0.0;
  bool boundary = false;  // supremum pinned at the scan boundary
};

/// Phi(s) = sup_{r>0} { s/r - 1/F(r) }, by coarse log-grid scan plus
/// golden-section refinement.
ProfilePoint phi_point(const ScaleFunction& f, double s);

/// Phi(R,t) = t * Phi(R/t).
double phi_Rt(const ScaleFunction& f, double R, double t);

struct PhiLowerBound {
  double c;  // largest c with Phi(R,t) >= c*min{(F(R)/t)^{1/(b'-1)}, ^{1/(b-1)}}
  double worst_R = 0.0, worst_t = 0.0;
};

PhiLowerBound phi_lower_bound_check(
    const ScaleFunction& f, const Regularity& reg,
    const std::vector<std::pair<double, double>>& samples);

struct ScaleFit {
  ScaleFunction f;     // power(beta_hat)
  double beta = 0.0;   // fitted exponent
  double prefactor = 1.0;
  double spread = 1.0;  // multiplicative spread of data around the fit
};

/// Log-log least squares on (r, E) exit-time pairs; needs >= 4 pairs
/// spanning at least one decade in r.
ScaleFit fit_F_from_exit_times(
    const std::vector<std::pair<double, double>>& data);

}  // namespace subgauss
