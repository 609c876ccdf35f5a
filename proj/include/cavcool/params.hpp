#pragma once

// System parameters in trap-frequency units (nu = 1, hbar = 1) and their
// construction from SI inputs.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavcool {

inline constexpr double hbar_si = 1.054571817e-34;  // J s

// All rates and detunings in units of the trap frequency nu.
struct SystemParams {
    double delta = 0.0;    // atom-laser detuning Delta
    double delta_c = 0.0;  // cavity-laser detuning delta_c
    double g = 0.0;        // atom-cavity coupling at trap center
    double omega = 0.0;    // laser Rabi frequency (coefficient of sigma^+ in H)
    double gamma = 0.0;    // dipole spontaneous-emission rate
    double kappa = 0.0;    // cavity decay rate
    double eta = 0.1;      // Lamb-Dicke parameter
    double phi_l = 1.0;    // laser recoil geometry factor, in [-1, 1]
    double phi_c = 1.0;    // cavity recoil geometry factor, in [-1, 1]
    double alpha = 0.4;    // angular dispersion of spontaneous recoil, in [0, 1]

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Raw SI inputs: rates/detunings in rad/s, mass in kg, wavenumber in 1/m.
struct PhysicalInputs {
    double mass = 0.0;
    double wavenumber = 0.0;
    double trap_freq = 0.0;
    double delta = 0.0;
    double delta_c = 0.0;
    double g = 0.0;
    double omega = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
    double phi_l = 1.0;
    double phi_c = 1.0;
    double alpha = 0.4;
};

inline double lamb_dicke(double mass, double wavenumber, double trap_freq) {
    if (!(mass > 0.0) || !(wavenumber > 0.0) || !(trap_freq > 0.0))
        throw std::domain_error("lamb_dicke: mass, wavenumber and trap_freq must be positive");
    return std::sqrt(hbar_si * wavenumber * wavenumber / (2.0 * mass * trap_freq));
}

inline double lamb_dicke(const PhysicalInputs& in) {
    return lamb_dicke(in.mass, in.wavenumber, in.trap_freq);
}

inline SystemParams normalize(const PhysicalInputs& in) {
    if (!(in.trap_freq > 0.0))
        throw std::domain_error("normalize: trap_freq must be positive");
    SystemParams p;
    p.delta = in.delta / in.trap_freq;
    p.delta_c = in.delta_c / in.trap_freq;
    p.g = in.g / in.trap_freq;
    p.omega = in.omega / in.trap_freq;
    p.gamma = in.gamma / in.trap_freq;
    p.kappa = in.kappa / in.trap_freq;
    p.eta = lamb_dicke(in);
    p.phi_l = in.phi_l;
    p.phi_c = in.phi_c;
    p.alpha = in.alpha;
    return p;
}

// Inverse of normalize. The wavenumber is reconstructed from eta, so the
// mass and trap frequency must be supplied.
inline PhysicalInputs denormalize(const SystemParams& p, double trap_freq, double mass) {
    if (!(trap_freq > 0.0) || !(mass > 0.0))
        throw std::domain_error("denormalize: trap_freq and mass must be positive");
    PhysicalInputs in;
    in.mass = mass;
    in.trap_freq = trap_freq;
    in.wavenumber = p.eta * std::sqrt(2.0 * mass * trap_freq / hbar_si);
    in.delta = p.delta * trap_freq;
    in.delta_c = p.delta_c * trap_freq;
    in.g = p.g * trap_freq;
    in.omega = p.omega * trap_freq;
    in.gamma = p.gamma * trap_freq;
    in.kappa = p.kappa * trap_freq;
    in.phi_l = p.phi_l;
    in.phi_c = p.phi_c;
    in.alpha = p.alpha;
    return in;
}

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool valid() const { return violations.empty(); }
};

// Lamb-Dicke expansions are trusted for eta well below this.
inline constexpr double lamb_dicke_warning_threshold = 0.3;

inline ValidationReport validate(const SystemParams& p) {
    ValidationReport r;
    auto bad = [&r](const std::string& s) { r.violations.push_back(s); };
    if (!(p.gamma >= 0.0)) bad("gamma must be >= 0");
    if (!(p.kappa >= 0.0)) bad("kappa must be >= 0");
    if (!(p.g >= 0.0)) bad("g must be >= 0");
    if (!(p.omega >= 0.0)) bad("omega must be >= 0");
    if (!(p.eta > 0.0)) bad("eta must be > 0");
    if (!(p.phi_l >= -1.0 && p.phi_l <= 1.0)) bad("phi_l must lie in [-1, 1]");
    if (!(p.phi_c >= -1.0 && p.phi_c <= 1.0)) bad("phi_c must lie in [-1, 1]");
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) bad("alpha must lie in [0, 1]");
    if (p.eta > lamb_dicke_warning_threshold)
        r.warnings.push_back("eta > 0.3: Lamb-Dicke expansion strained");
    return r;
}

// Laser at angle theta to the motional axis.
inline double phi_from_angle(double theta) { return std::cos(theta); }

}  // namespace cavcool
