#pragma once

#include <cstdint>
#include <vector>

namespace harbench {

struct SvmConfig {
  double c = 1.0;
  double gamma = 0.0;  // 0 selects 1/(D * var(features))
  double tol = 1e-3;   // KKT tolerance
  long max_iterations = 100000;  // successful alpha-pair updates
};

/// One binary soft-margin RBF machine trained by sequential minimal
/// optimization. Decision f(x) = sum_i alpha_i y_i k(x_i, x) + b.
struct BinarySvm {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;  // alpha_i * y_i
  double bias = 0.0;
  double gamma = 0.0;
  bool converged = true;
  long iterations = 0;

  double decision(const std::vector<double>& x) const;
};

struct SmoDiagnostics {
  double max_kkt_violation = 0.0;
  double alpha_dot_y = 0.0;  // should be ~0
  bool box_respected = true;
};

/// One-vs-rest multiclass wrapper.
class SvmOvr {
 public:
  void fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           size_t n_classes, const SvmConfig& config);

  /// (argmax label, per-class decision values).
  std::pair<int, std::vector<double>> predict(const std::vector<double>& v) const;

  const std::vector<BinarySvm>& machines() const { return machines_; }
  std::vector<BinarySvm>& machines() { return machines_; }
  size_t n_features() const { return n_features_; }
  void set_n_features(size_t d) { n_features_ = d; }
  bool converged() const;
  double effective_gamma() const { return gamma_; }

  /// KKT / box / equality diagnostics for one binary machine against its
  /// training set (diagnostics only; requires the full alpha vector).
  static SmoDiagnostics check_kkt(const std::vector<std::vector<double>>& x,
                                  const std::vector<int>& y_signed,
                                  const std::vector<double>& alphas, double bias,
                                  double gamma, double c);

  /// Trains one binary machine; exposed for the diagnostics tests.
  static BinarySvm train_binary(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y_signed, const SvmConfig& config,
                                double gamma, std::vector<double>* out_alphas = nullptr);

 private:
  std::vector<BinarySvm> machines_;
  size_t n_features_ = 0;
  double gamma_ = 0.0;
};

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma);

}  // namespace harbench
