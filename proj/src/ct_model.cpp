#include "ct_model.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ctcal::model {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Characteristic {
  double emf;
  double composite_error;
  double in_phase_fraction;
};

// Piecewise-linear lookup; operating points outside the tabulated span are an
// error rather than an extrapolation.
Characteristic interpolate(const std::vector<ExcitationPoint>& points, double op) {
  const double lo = points.front().operating_point;
  const double hi = points.back().operating_point;
  if (!(op >= lo && op <= hi)) {
    throw Error(ErrorCode::OutOfRange, "operating point " + fmt(op) + " outside the magnetizing characteristic span [" +
                                           fmt(lo) + ", " + fmt(hi) + "]; extend the characteristic");
  }
  auto upper = std::lower_bound(points.begin(), points.end(), op,
                                [](const ExcitationPoint& p, double x) { return p.operating_point < x; });
  if (upper->operating_point == op) return {upper->emf, upper->composite_error, upper->in_phase_fraction};
  auto lower = std::prev(upper);
  const double t = (op - lower->operating_point) / (upper->operating_point - lower->operating_point);
  auto lerp = [t](double a, double b) { return a + t * (b - a); };
  return {lerp(lower->emf, upper->emf), lerp(lower->composite_error, upper->composite_error),
          lerp(lower->in_phase_fraction, upper->in_phase_fraction)};
}

struct Branch {
  std::complex<double> emf;      // phasor, secondary current at angle 0
  std::complex<double> current;  // excitation current phasor
  double conductance;
  double susceptance;  // inductive, at the evaluation frequency
};

Branch evaluate(const Transformer& ct, double op, double frequency) {
  if (!positive_finite(frequency)) throw Error(ErrorCode::InvalidArgument, "frequency must be > 0");
  if (!(std::isfinite(op) && op > 0.0)) throw Error(ErrorCode::OutOfRange, "operating point must be > 0");

  const double rated_f = ct.nameplate.rated_frequency;
  const double i2 = op * ct.nameplate.rated_secondary_current;
  const std::complex<double> emf = i2 * ct.circuit.series_impedance(frequency / rated_f);

  if (ct.circuit.excitation_points.empty()) return {emf, {0.0, 0.0}, 0.0, 0.0};

  // The characteristic fixes the magnetizing impedance at rated frequency;
  // the circuit's own EMF then drives current through it.
  const Characteristic c = interpolate(ct.circuit.excitation_points, op);
  const double y_rated = c.composite_error * i2 / c.emf;
  const double p = c.in_phase_fraction;
  const double q = std::sqrt(std::max(0.0, 1.0 - p * p));
  const double g = y_rated * p;
  const double b = y_rated * q * (rated_f / frequency);
  return {emf, emf * std::complex<double>(g, -b), g, b};
}

}  // namespace

void Nameplate::validate() const {
  if (!positive_finite(rated_primary_current) || !positive_finite(rated_secondary_current) ||
      !positive_finite(rated_burden_va) || !positive_finite(rated_frequency)) {
    throw Error(ErrorCode::InvalidArgument, "nameplate ratings must be strictly positive");
  }
  if (accuracy_class.empty()) throw Error(ErrorCode::InvalidArgument, "nameplate accuracy class is empty");
}

std::complex<double> EquivalentCircuit::series_impedance(double frequency_ratio) const {
  return {secondary_resistance + burden_resistance,
          (secondary_leakage_reactance + burden_reactance) * frequency_ratio};
}

EquivalentCircuit EquivalentCircuit::with_burden_fraction(double fraction) const {
  if (!(std::isfinite(fraction) && fraction >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "burden fraction must be >= 0");
  }
  EquivalentCircuit out = *this;
  out.burden_resistance *= fraction;
  out.burden_reactance *= fraction;
  return out;
}

void EquivalentCircuit::validate() const {
  for (double v : {secondary_resistance, secondary_leakage_reactance, burden_resistance, burden_reactance}) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "circuit impedances must be finite and >= 0");
  }
  if (!(std::abs(series_impedance()) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "total series impedance must be non-zero");
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < excitation_points.size(); ++i) {
    const auto& p = excitation_points[i];
    if (!positive_finite(p.operating_point) || (i > 0 && !(p.operating_point > prev))) {
      throw Error(ErrorCode::InvalidArgument, "excitation points must be strictly ascending in operating point");
    }
    if (!positive_finite(p.emf)) throw Error(ErrorCode::InvalidArgument, "excitation emf must be > 0");
    if (!(p.composite_error > 0.0 && p.composite_error < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "composite error fraction must lie in (0, 1)");
    }
    if (!(p.in_phase_fraction >= 0.0 && p.in_phase_fraction <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "in-phase fraction must lie in [0, 1]");
    }
    prev = p.operating_point;
  }
}

ErrorPair operator-(const ErrorPair& a, const ErrorPair& b) {
  return {a.ratio_error_pct - b.ratio_error_pct, a.phase_error_min - b.phase_error_min};
}

double secondary_emf(const EquivalentCircuit& circuit, double secondary_current) {
  if (!(secondary_current >= 0.0)) throw Error(ErrorCode::InvalidArgument, "secondary current must be >= 0");
  return secondary_current * std::abs(circuit.series_impedance());
}

ExcitationState excitation_state(const Transformer& ct, double operating_point, double frequency) {
  const Branch br = evaluate(ct, operating_point, frequency);
  ExcitationState s;
  s.emf = std::abs(br.emf);
  s.excitation_current_magnitude = std::abs(br.current);
  if (s.excitation_current_magnitude == 0.0) {
    s.excitation_impedance_magnitude = std::numeric_limits<double>::infinity();
    s.in_phase_fraction = 1.0;
    s.quadrature_fraction = 0.0;
    return s;
  }
  s.excitation_impedance_magnitude = s.emf / s.excitation_current_magnitude;
  const double y = std::hypot(br.conductance, br.susceptance);
  s.in_phase_fraction = br.conductance / y;
  s.quadrature_fraction = br.susceptance / y;
  return s;
}

double composite_error(const Transformer& ct, double operating_point, double frequency) {
  const ExcitationState s = excitation_state(ct, operating_point, frequency);
  return 100.0 * s.excitation_current_magnitude / (operating_point * ct.nameplate.rated_secondary_current);
}

ErrorPair complex_error(const Transformer& ct, double operating_point, double frequency) {
  const Branch br = evaluate(ct, operating_point, frequency);
  const double i2 = operating_point * ct.nameplate.rated_secondary_current;
  return {-100.0 * br.current.real() / i2, -br.current.imag() / i2 * kArcMinutesPerRadian};
}

ErrorPair additional_error(const Transformer& ct, double operating_point, double test_frequency,
                           double rated_frequency) {
  if (!positive_finite(test_frequency) || !positive_finite(rated_frequency)) {
    throw Error(ErrorCode::InvalidArgument, "frequencies must be > 0");
  }
  return complex_error(ct, operating_point, test_frequency) - complex_error(ct, operating_point, rated_frequency);
}

ErrorPair translate_to_rated(const ErrorPair& low, const ErrorPair& high) {
  return {0.5 * (low.ratio_error_pct + high.ratio_error_pct), 0.5 * (low.phase_error_min + high.phase_error_min)};
}

ErrorPair translate_to_rated(std::span<const ErrorPair> errors) {
  if (errors.empty()) throw Error(ErrorCode::InvalidArgument, "no per-frequency errors to combine");
  if (errors.size() == 2) return translate_to_rated(errors[0], errors[1]);
  ErrorPair sum;
  for (const auto& e : errors) {
    sum.ratio_error_pct += e.ratio_error_pct;
    sum.phase_error_min += e.phase_error_min;
  }
  const double n = static_cast<double>(errors.size());
  return {sum.ratio_error_pct / n, sum.phase_error_min / n};
}

}  // namespace ctcal::model
