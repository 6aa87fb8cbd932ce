#include "harbench/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "harbench/util.hpp"

namespace harbench {

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double BinarySvm::decision(const std::vector<double>& x) const {
  double acc = bias;
  for (size_t i = 0; i < support_vectors.size(); ++i) {
    acc += coefficients[i] * rbf_kernel(support_vectors[i], x, gamma);
  }
  return acc;
}

namespace {

// Platt-style SMO for one binary problem. f(x) = sum alpha_i y_i k(x_i,x) + b.
class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
            const SvmConfig& cfg, double gamma)
      : x_(x), y_(y), c_(cfg.c), tol_(cfg.tol), max_iter_(cfg.max_iterations),
        gamma_(gamma), n_(x.size()), alpha_(n_, 0.0), u_(n_, 0.0) {
    if (n_ <= 4096) {
      kcache_.resize(n_ * n_);
      for (size_t i = 0; i < n_; ++i) {
        for (size_t j = i; j < n_; ++j) {
          double v = rbf_kernel(x_[i], x_[j], gamma_);
          kcache_[i * n_ + j] = v;
          kcache_[j * n_ + i] = v;
        }
      }
    }
  }

  void solve() {
    bool examine_all = true;
    size_t changed = 0;
    while ((changed > 0 || examine_all) && !budget_exhausted()) {
      changed = 0;
      for (size_t i = 0; i < n_ && !budget_exhausted(); ++i) {
        if (!examine_all && !is_free(alpha_[i])) continue;
        changed += examine(i) ? 1 : 0;
      }
      if (examine_all) {
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
    converged_ = !budget_exhausted();
  }

  const std::vector<double>& alphas() const { return alpha_; }
  double bias() const { return b_; }
  bool converged() const { return converged_; }
  long iterations() const { return iterations_; }

 private:
  bool budget_exhausted() const { return iterations_ >= max_iter_; }
  bool is_free(double a) const { return a > 0.0 && a < c_; }
  double kernel(size_t i, size_t j) const {
    if (!kcache_.empty()) return kcache_[i * n_ + j];
    return rbf_kernel(x_[i], x_[j], gamma_);
  }
  double error(size_t i) const { return u_[i] + b_ - y_[i]; }

  bool examine(size_t i2) {
    double y2 = y_[i2];
    double alph2 = alpha_[i2];
    double e2 = error(i2);
    double r2 = e2 * y2;
    bool violates = (r2 < -tol_ && alph2 < c_) || (r2 > tol_ && alph2 > 0.0);
    if (!violates) return false;

    // second-choice heuristic: largest |E1 - E2| among free multipliers
    size_t best = n_;
    double best_gap = -1.0;
    for (size_t i = 0; i < n_; ++i) {
      if (!is_free(alpha_[i])) continue;
      double gap = std::fabs(error(i) - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return true;

    // sweep free multipliers from a rotating start, then the whole set
    size_t start = rotation_++ % n_;
    for (size_t k = 0; k < n_; ++k) {
      size_t i1 = (start + k) % n_;
      if (!is_free(alpha_[i1])) continue;
      if (take_step(i1, i2)) return true;
    }
    for (size_t k = 0; k < n_; ++k) {
      size_t i1 = (start + k) % n_;
      if (take_step(i1, i2)) return true;
    }
    return false;
  }

  bool take_step(size_t i1, size_t i2) {
    if (i1 == i2) return false;
    double alph1 = alpha_[i1], alph2 = alpha_[i2];
    double y1 = y_[i1], y2 = y_[i2];
    double s = y1 * y2;
    double e1 = error(i1), e2 = error(i2);

    double low, high;
    if (s < 0.0) {
      low = std::max(0.0, alph2 - alph1);
      high = std::min(c_, c_ + alph2 - alph1);
    } else {
      low = std::max(0.0, alph1 + alph2 - c_);
      high = std::min(c_, alph1 + alph2);
    }
    if (low >= high) return false;

    double k11 = kernel(i1, i1), k12 = kernel(i1, i2), k22 = kernel(i2, i2);
    double eta = k11 + k22 - 2.0 * k12;
    if (eta < 1e-12) return false;  // coincident points under the RBF kernel

    double a2 = alph2 + y2 * (e1 - e2) / eta;
    a2 = std::clamp(a2, low, high);
    if (std::fabs(a2 - alph2) < 1e-8 * (a2 + alph2 + 1e-8)) return false;

    double a1 = alph1 + s * (alph2 - a2);
    // snap rounding residue at the box edge, preserving alpha1*y1+alpha2*y2
    if (a1 < 1e-12) {
      a1 = 0.0;
      a2 = alph2 + s * (alph1 - a1);
    } else if (a1 > c_ - 1e-12) {
      a1 = c_;
      a2 = alph2 + s * (alph1 - a1);
    }

    double d1 = (a1 - alph1) * y1;
    double d2 = (a2 - alph2) * y2;
    double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    if (is_free(a1)) {
      b_ = b1;
    } else if (is_free(a2)) {
      b_ = b2;
    } else {
      b_ = 0.5 * (b1 + b2);
    }

    for (size_t j = 0; j < n_; ++j) {
      u_[j] += d1 * kernel(i1, j) + d2 * kernel(i2, j);
    }
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    ++iterations_;
    return true;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<int>& y_;
  double c_, tol_;
  long max_iter_;
  double gamma_;
  size_t n_;
  std::vector<double> alpha_, u_;
  std::vector<double> kcache_;
  double b_ = 0.0;
  long iterations_ = 0;
  size_t rotation_ = 0;
  bool converged_ = true;
};

}  // namespace

BinarySvm SvmOvr::train_binary(const std::vector<std::vector<double>>& x,
                               const std::vector<int>& y_signed, const SvmConfig& config,
                               double gamma, std::vector<double>* out_alphas) {
  SmoSolver solver(x, y_signed, config, gamma);
  solver.solve();

  BinarySvm m;
  m.gamma = gamma;
  m.bias = solver.bias();
  m.converged = solver.converged();
  m.iterations = solver.iterations();
  const auto& alphas = solver.alphas();
  for (size_t i = 0; i < x.size(); ++i) {
    if (alphas[i] > 0.0) {
      m.support_vectors.push_back(x[i]);
      m.coefficients.push_back(alphas[i] * y_signed[i]);
    }
  }
  if (out_alphas) *out_alphas = alphas;
  return m;
}

void SvmOvr::fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                 size_t n_classes, const SvmConfig& config) {
  if (x.empty() || x.size() != y.size()) fail("svm: bad training set");
  n_features_ = x.front().size();

  gamma_ = config.gamma;
  if (gamma_ <= 0.0) {
    // 1/(D * var), var = mean per-dimension population variance
    double var = 0.0;
    for (size_t d = 0; d < n_features_; ++d) {
      double m = 0.0;
      for (const auto& row : x) m += row[d];
      m /= static_cast<double>(x.size());
      double s = 0.0;
      for (const auto& row : x) s += (row[d] - m) * (row[d] - m);
      var += s / static_cast<double>(x.size());
    }
    var /= static_cast<double>(n_features_);
    gamma_ = var > 0.0 ? 1.0 / (static_cast<double>(n_features_) * var)
                       : 1.0 / static_cast<double>(n_features_);
  }

  machines_.clear();
  for (size_t k = 0; k < n_classes; ++k) {
    std::vector<int> y_signed(y.size());
    size_t positives = 0;
    for (size_t i = 0; i < y.size(); ++i) {
      y_signed[i] = (static_cast<size_t>(y[i]) == k) ? 1 : -1;
      positives += y_signed[i] > 0 ? 1 : 0;
    }
    if (positives == 0 || positives == y.size()) {
      fail("svm: class " + std::to_string(k) + " has no two-sided training data");
    }
    machines_.push_back(train_binary(x, y_signed, config, gamma_));
  }
}

std::pair<int, std::vector<double>> SvmOvr::predict(const std::vector<double>& v) const {
  if (machines_.empty()) fail("svm: model not trained");
  if (v.size() != n_features_) {
    fail("svm: input dimension " + std::to_string(v.size()) + " does not match model (" +
         std::to_string(n_features_) + ")");
  }
  std::vector<double> scores(machines_.size());
  for (size_t k = 0; k < machines_.size(); ++k) scores[k] = machines_[k].decision(v);
  size_t best = 0;
  for (size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return {static_cast<int>(best), scores};
}

bool SvmOvr::converged() const {
  for (const auto& m : machines_) {
    if (!m.converged) return false;
  }
  return true;
}

SmoDiagnostics SvmOvr::check_kkt(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y_signed,
                                 const std::vector<double>& alphas, double bias,
                                 double gamma, double c) {
  SmoDiagnostics diag;
  size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    double f = bias;
    for (size_t j = 0; j < n; ++j) {
      if (alphas[j] > 0.0) {
        f += alphas[j] * y_signed[j] * rbf_kernel(x[j], x[i], gamma);
      }
    }
    double margin = y_signed[i] * f;
    double violation = 0.0;
    if (alphas[i] <= 0.0) {
      violation = std::max(0.0, 1.0 - margin);       // want margin >= 1
    } else if (alphas[i] >= c) {
      violation = std::max(0.0, margin - 1.0);       // want margin <= 1
    } else {
      violation = std::fabs(margin - 1.0);           // want margin == 1
    }
    diag.max_kkt_violation = std::max(diag.max_kkt_violation, violation);
    diag.alpha_dot_y += alphas[i] * y_signed[i];
    if (alphas[i] < -1e-12 || alphas[i] > c + 1e-12) diag.box_respected = false;
  }
  return diag;
}

}  // namespace harbench
