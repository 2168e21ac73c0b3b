#pragma once

#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace ctcal::model {

inline constexpr double kArcMinutesPerRadian = 10800.0 / std::numbers::pi;

struct Nameplate {
  double rated_primary_current = 0.0;    // A
  double rated_secondary_current = 0.0;  // A
  double rated_burden_va = 0.0;          // VA
  std::string accuracy_class;
  double rated_frequency = 50.0;  // Hz

  /// Burden impedance implied by the VA rating: S / I2n^2.
  double rated_burden_ohms() const { return rated_burden_va / (rated_secondary_current * rated_secondary_current); }

  void validate() const;

  bool operator==(const Nameplate&) const = default;
};

/// One measured point of the magnetizing characteristic at rated frequency.
struct ExcitationPoint {
  double operating_point = 0.0;  // fraction of rated secondary current
  double emf = 0.0;              // V, excitation EMF at that point
  double composite_error = 0.0;  // fraction, |I0| / I2
  // Share of the excitation current in phase with the EMF (core loss). The
  // remainder is the lagging magnetizing share: q = sqrt(1 - p^2).
  double in_phase_fraction = std::numbers::sqrt2 / 2.0;

  bool operator==(const ExcitationPoint&) const = default;
};

struct EquivalentCircuit {
  double secondary_resistance = 0.0;        // ohm
  double secondary_leakage_reactance = 0.0;  // ohm at rated frequency
  double burden_resistance = 0.0;           // ohm
  double burden_reactance = 0.0;            // ohm at rated frequency
  // Sorted by operating_point. Empty means an ideal core with no excitation
  // current at all.
  std::vector<ExcitationPoint> excitation_points;

  /// Series impedance of winding plus burden. Reactances scale linearly with
  /// frequency_ratio = f / f_rated.
  std::complex<double> series_impedance(double frequency_ratio = 1.0) const;

  /// Copy with the burden impedance scaled, e.g. 0.25 for quarter burden.
  EquivalentCircuit with_burden_fraction(double fraction) const;

  void validate() const;

  bool operator==(const EquivalentCircuit&) const = default;
};

struct Transformer {
  Nameplate nameplate;
  EquivalentCircuit circuit;

  void validate() const {
    nameplate.validate();
    circuit.validate();
  }
  bool operator==(const Transformer&) const = default;
};

struct ExcitationState {
  double emf = 0.0;                            // V
  double excitation_current_magnitude = 0.0;   // A
  double excitation_impedance_magnitude = 0.0;  // ohm
  double in_phase_fraction = 0.0;
  double quadrature_fraction = 0.0;
};

struct ErrorPair {
  double ratio_error_pct = 0.0;
  double phase_error_min = 0.0;

  bool operator==(const ErrorPair&) const = default;
};

ErrorPair operator-(const ErrorPair& a, const ErrorPair& b);

/// EMF the secondary current drives through the rated-frequency series impedance.
double secondary_emf(const EquivalentCircuit& circuit, double secondary_current);

ExcitationState excitation_state(const Transformer& ct, double operating_point, double frequency);

/// Composite error in percent of the secondary current.
double composite_error(const Transformer& ct, double operating_point, double frequency);

/// Ratio error and phase displacement caused by the excitation current.
///
/// The secondary current is the phase reference. The excitation current is
/// E * (G - jB) where E = I2 * Zs; its in-phase part is a ratio deficit and its
/// lagging part makes the secondary lead the primary (positive displacement).
ErrorPair complex_error(const Transformer& ct, double operating_point, double frequency);

/// Error at the test frequency minus the error at the rated frequency.
ErrorPair additional_error(const Transformer& ct, double operating_point, double test_frequency,
                           double rated_frequency);

ErrorPair translate_to_rated(const ErrorPair& low, const ErrorPair& high);
ErrorPair translate_to_rated(std::span<const ErrorPair> errors);

}  // namespace ctcal::model
