#include "harbench/features.hpp"

#include <algorithm>
#include <cmath>

#include "harbench/util.hpp"

namespace harbench {

namespace {

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double std_of(const std::vector<double>& x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return std::sqrt(s / static_cast<double>(x.size()));
}

// linear-interpolated quantile over a sorted copy
double quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  double pos = q * static_cast<double>(x.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = static_cast<size_t>(std::ceil(pos));
  double frac = pos - std::floor(pos);
  return x[lo] * (1.0 - frac) + x[hi] * frac;
}

double zero_crossing_rate(const std::vector<double>& x, double mean) {
  if (x.size() < 2) return 0.0;
  size_t crossings = 0;
  for (size_t i = 1; i < x.size(); ++i) {
    double a = x[i - 1] - mean, b = x[i] - mean;
    if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(x.size() - 1);
}

// returns {dominant frequency Hz, non-DC spectral energy}
std::pair<double, double> spectrum_stats(const std::vector<double>& x, double rate_hz) {
  size_t n = x.size();
  size_t half = n / 2;
  double best_mag = -1.0;
  size_t best_k = 1;
  double energy = 0.0;
  for (size_t k = 1; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    for (size_t t = 0; t < n; ++t) {
      re += x[t] * std::cos(w * static_cast<double>(t));
      im -= x[t] * std::sin(w * static_cast<double>(t));
    }
    double mag2 = re * re + im * im;
    energy += mag2;
    if (mag2 > best_mag) {
      best_mag = mag2;
      best_k = k;
    }
  }
  double freq = rate_hz * static_cast<double>(best_k) / static_cast<double>(n);
  return {freq, energy / (static_cast<double>(n) * static_cast<double>(n))};
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = mean_of(a), mb = mean_of(b);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

double dominant_frequency(const std::vector<double>& x, double rate_hz) {
  return spectrum_stats(x, rate_hz).first;
}

FeatureVector extract_features(const SensorWindow& window) {
  size_t channels = window.channel_count();
  std::vector<std::vector<double>> series(channels, std::vector<double>(window.n));
  for (size_t c = 0; c < channels; ++c) {
    for (size_t t = 0; t < window.n; ++t) series[c][t] = window.channel_at(t, c);
  }
  static const char* channel_names[6] = {"ax", "ay", "az", "gx", "gy", "gz"};

  FeatureVector fv;
  for (size_t c = 0; c < channels; ++c) {
    const auto& x = series[c];
    std::string base = channel_names[c];
    double m = mean_of(x);
    auto [freq, energy] = spectrum_stats(x, window.rate_hz);
    fv.values.push_back(m);
    fv.names.push_back(base + "_mean");
    fv.values.push_back(std_of(x, m));
    fv.names.push_back(base + "_std");
    fv.values.push_back(*std::min_element(x.begin(), x.end()));
    fv.names.push_back(base + "_min");
    fv.values.push_back(*std::max_element(x.begin(), x.end()));
    fv.names.push_back(base + "_max");
    fv.values.push_back(quantile(x, 0.75) - quantile(x, 0.25));
    fv.names.push_back(base + "_iqr");
    fv.values.push_back(zero_crossing_rate(x, m));
    fv.names.push_back(base + "_zcr");
    fv.values.push_back(freq);
    fv.names.push_back(base + "_domfreq");
    fv.values.push_back(energy);
    fv.names.push_back(base + "_spec_energy");
  }
  for (size_t a = 0; a < channels; ++a) {
    for (size_t b = a + 1; b < channels; ++b) {
      fv.values.push_back(correlation(series[a], series[b]));
      fv.names.push_back(std::string("corr_") + channel_names[a] + "_" + channel_names[b]);
    }
  }
  // signal-magnitude-area over the accelerometer
  double sma = 0.0;
  for (size_t t = 0; t < window.n; ++t) {
    sma += std::fabs(window.accel_at(t, 0)) + std::fabs(window.accel_at(t, 1)) +
           std::fabs(window.accel_at(t, 2));
  }
  fv.values.push_back(sma / static_cast<double>(window.n));
  fv.names.push_back("sma");

  for (double v : fv.values) {
    if (!std::isfinite(v)) fail("features: non-finite value extracted");
  }
  return fv;
}

Standardizer fit_standardizer(const std::vector<FeatureVector>& train) {
  if (train.size() < 2) fail("standardizer: need at least 2 training vectors");
  size_t d = train.front().dim();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (const auto& v : train) {
    if (v.dim() != d) fail("standardizer: inconsistent dimensions");
    for (size_t i = 0; i < d; ++i) s.mean[i] += v.values[i];
  }
  for (size_t i = 0; i < d; ++i) s.mean[i] /= static_cast<double>(train.size());
  for (const auto& v : train) {
    for (size_t i = 0; i < d; ++i) {
      double dlt = v.values[i] - s.mean[i];
      s.stddev[i] += dlt * dlt;
    }
  }
  for (size_t i = 0; i < d; ++i) {
    s.stddev[i] = std::sqrt(s.stddev[i] / static_cast<double>(train.size()));
  }
  return s;
}

FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v) {
  if (v.dim() != s.mean.size()) fail("standardizer: dimension mismatch");
  FeatureVector out = v;
  for (size_t i = 0; i < v.dim(); ++i) {
    double centered = v.values[i] - s.mean[i];
    out.values[i] = (s.stddev[i] > 0.0) ? centered / s.stddev[i] : centered;
  }
  return out;
}

std::string features_to_csv(const std::vector<FeatureVector>& rows,
                            const std::vector<std::string>& labels) {
  if (rows.empty()) return "";
  std::string out = "label";
  for (const auto& name : rows.front().names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (size_t r = 0; r < rows.size(); ++r) {
    out += labels.empty() ? std::string("?") : labels[r];
    for (double v : rows[r].values) {
      out += ',';
      out += format_fixed(v, 6);
    }
    out += '\n';
  }
  return out;
}

}  // namespace harbench
