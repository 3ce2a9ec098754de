#pragma once

#include <string>
#include <vector>

namespace nonstatcov {

/// Fitted power-law profile: norm(lag) ~ constant * weight(lag)^exponent.
struct DecayProfile {
  double constant = 0.0;
  double exponent = 0.0;
  std::vector<long> lags;
  std::vector<double> norms;
  std::vector<double> residuals;
  /// Norms beyond `band_lag` are zero to working precision.
  bool band_limited = false;
  long band_lag = -1;
};

/// Measured discrepancies paired with the shape of a theoretical envelope.
/// `constant` is the smallest K with measured <= K * envelope at every index
/// where the envelope is positive. Some results are stated with two envelope
/// shapes; the second one, when present, goes in `envelope_alt`.
struct GapReport {
  std::string quantity;
  std::vector<long> t;
  std::vector<long> tau;
  std::vector<double> measured;
  std::vector<double> envelope;
  std::vector<double> envelope_alt;
  double constant = 0.0;
  double constant_alt = 0.0;

  void add(long t_index, long tau_index, double value, double shape) {
    t.push_back(t_index);
    tau.push_back(tau_index);
    measured.push_back(value);
    envelope.push_back(shape);
    if (shape > 0.0 && value / shape > constant) constant = value / shape;
  }

  void add(long t_index, long tau_index, double value, double shape, double alt_shape) {
    add(t_index, tau_index, value, shape);
    envelope_alt.push_back(alt_shape);
    if (alt_shape > 0.0 && value / alt_shape > constant_alt) constant_alt = value / alt_shape;
  }

  std::size_t size() const { return measured.size(); }

  double max_measured() const {
    double m = 0.0;
    for (double v : measured) m = v > m ? v : m;
    return m;
  }
};

}  // namespace nonstatcov
