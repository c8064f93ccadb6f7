#include "emgpipe/butterworth.hpp"

#include <cmath>
#include <complex>

#include "emgpipe/errors.hpp"

namespace emg {

void FilterCoefficients::validate() const {
  if (denominator[0] != 1.0) throw DomainError("denominator must be monic");
  // poles of z^2 + a1 z + a2
  const std::complex<double> disc =
      std::sqrt(std::complex<double>(denominator[1] * denominator[1] -
                                     4.0 * denominator[2]));
  const std::complex<double> p1 = 0.5 * (-denominator[1] + disc);
  const std::complex<double> p2 = 0.5 * (-denominator[1] - disc);
  if (std::abs(p1) >= 1.0 || std::abs(p2) >= 1.0) {
    throw DomainError("filter poles are not strictly inside the unit circle");
  }
  const double dc = (numerator[0] + numerator[1] + numerator[2]) /
                    (denominator[0] + denominator[1] + denominator[2]);
  if (std::abs(dc - 1.0) > 1e-9) throw DomainError("filter DC gain is not 1");
}

FilterCoefficients design_butterworth_lowpass(double cutoff_hz, double sample_rate_hz) {
  if (sample_rate_hz <= 0.0) throw DomainError("sample rate must be positive");
  if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0) {
    throw DomainError("cutoff must lie strictly between 0 and the Nyquist frequency");
  }

  // Bilinear transform of 1 / (s^2 + sqrt(2) s + 1) with the cutoff pre-warped
  // so the analog -3 dB point maps exactly onto cutoff_hz.
  const double k = std::tan(3.14159265358979323846 * cutoff_hz / sample_rate_hz);
  const double k2 = k * k;
  const double sqrt2 = std::sqrt(2.0);
  const double norm = 1.0 + sqrt2 * k + k2;

  FilterCoefficients c;
  c.cutoff_hz = cutoff_hz;
  c.sample_rate_hz = sample_rate_hz;
  c.numerator = {k2 / norm, 2.0 * k2 / norm, k2 / norm};
  c.denominator = {1.0, 2.0 * (k2 - 1.0) / norm, (1.0 - sqrt2 * k + k2) / norm};
  c.validate();
  return c;
}

std::vector<double> filter_channel(const FilterCoefficients& coeffs,
                                   std::span<const double> x) {
  const double b0 = coeffs.numerator[0];
  const double b1 = coeffs.numerator[1];
  const double b2 = coeffs.numerator[2];
  const double a1 = coeffs.denominator[1];
  const double a2 = coeffs.denominator[2];

  std::vector<double> y(x.size());
  double s1 = 0.0, s2 = 0.0;  // direct form II transposed state
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = b0 * x[i] + s1;
    s1 = b1 * x[i] - a1 * yi + s2;
    s2 = b2 * x[i] - a2 * yi;
    y[i] = yi;
  }
  return y;
}

LabeledSignal apply_filter(const FilterCoefficients& coeffs, const LabeledSignal& signal) {
  coeffs.validate();
  LabeledSignal out = signal;
  for (int c = 0; c < kNumChannels; ++c) {
    out.channels[c] = filter_channel(coeffs, signal.channels[c]);
  }
  return out;
}

double frequency_response(const FilterCoefficients& coeffs, double frequency_hz) {
  if (frequency_hz < 0.0 || frequency_hz > coeffs.sample_rate_hz / 2.0) {
    throw DomainError("frequency outside 0..Nyquist");
  }
  const double omega =
      2.0 * 3.14159265358979323846 * frequency_hz / coeffs.sample_rate_hz;
  const std::complex<double> z_inv = std::polar(1.0, -omega);
  const std::complex<double> z_inv2 = z_inv * z_inv;
  const std::complex<double> num =
      coeffs.numerator[0] + coeffs.numerator[1] * z_inv + coeffs.numerator[2] * z_inv2;
  const std::complex<double> den =
      coeffs.denominator[0] + coeffs.denominator[1] * z_inv + coeffs.denominator[2] * z_inv2;
  return std::abs(num / den);
}

}  // namespace emg
