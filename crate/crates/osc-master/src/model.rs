//! Physical parameters, the Drude–Ohmic bath and the reduction to (ω̃0, Ω̃, z).

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
/// Classical electron time constant τe = 2e²/(3mc³) in seconds.
pub const TAU_E_ELECTRON: f64 = 6.24e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    Validation {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Validation {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub mass: f64,
    pub omega0: f64,
}

impl OscillatorSpec {
    pub fn new(mass: f64, omega0: f64) -> Result<Self, ModelError> {
        check_positive("mass", mass)?;
        check_positive("omega0", omega0)?;
        Ok(Self { mass, omega0 })
    }

    /// The ħ = m = ω0 = 1 frame used by the dynamics module.
    pub fn natural() -> Self {
        Self { mass: 1.0, omega0: 1.0 }
    }

    pub fn spring_constant(&self) -> f64 {
        self.mass * self.omega0 * self.omega0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Temperature {
    Kelvin(f64),
    /// z = βΩ given directly.
    BetaOmega(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub cutoff_omega: f64,
    pub tau_e: f64,
    pub temperature: Temperature,
}

impl BathSpec {
    pub fn new(cutoff_omega: f64, tau_e: f64, temperature: Temperature) -> Result<Self, ModelError> {
        check_positive("cutoff_omega", cutoff_omega)?;
        check_positive("tau_e", tau_e)?;
        match temperature {
            Temperature::Kelvin(t) if !(t >= 0.0 && t.is_finite()) => {
                return Err(ModelError::Validation {
                    name: "temperature",
                    value: t,
                    reason: "must be finite and >= 0",
                })
            }
            Temperature::BetaOmega(z) if !(z > 0.0) => {
                return Err(ModelError::Validation {
                    name: "beta_Omega",
                    value: z,
                    reason: "must be > 0",
                })
            }
            _ => {}
        }
        Ok(Self {
            cutoff_omega,
            tau_e,
            temperature,
        })
    }

    /// Ω·τe; values above 1 violate the causality bound Ω ≤ 1/τe.
    pub fn causality_ratio(&self) -> f64 {
        self.cutoff_omega * self.tau_e
    }

    pub fn violates_causality(&self) -> bool {
        self.causality_ratio() > 1.0
    }

    pub fn beta_omega(&self) -> f64 {
        match self.temperature {
            Temperature::BetaOmega(z) => z,
            Temperature::Kelvin(t) => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    CoeffConventions::beta_from_temperature(t) * self.cutoff_omega
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaConvention {
    /// β ≡ ħ/(2 kB T), so that coth(βω0) is the thermal factor at ω0.
    HbarOverTwoKbT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffConventions {
    pub beta_convention: BetaConvention,
}

impl Default for CoeffConventions {
    fn default() -> Self {
        Self {
            beta_convention: BetaConvention::HbarOverTwoKbT,
        }
    }
}

impl CoeffConventions {
    /// β in seconds for temperature in kelvin.
    pub fn beta_from_temperature(t: f64) -> f64 {
        HBAR / (2.0 * K_B * t)
    }

    pub fn temperature_from_beta(beta: f64) -> f64 {
        HBAR / (2.0 * K_B * beta)
    }
}

/// The three dimensionless knobs that fix every coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// ω̃0 = ω0/Ω
    pub omega0_tilde: f64,
    /// Ω̃ = Ω·τe
    pub omega_tau_e: f64,
    /// z = βΩ, may be +∞ for T = 0
    pub z: f64,
}

impl ReducedParams {
    pub fn new(omega0_tilde: f64, omega_tau_e: f64, z: f64) -> Result<Self, ModelError> {
        check_positive("omega0_tilde", omega0_tilde)?;
        if !(omega_tau_e >= 0.0 && omega_tau_e.is_finite()) {
            return Err(ModelError::Validation {
                name: "Omega_tau_e",
                value: omega_tau_e,
                reason: "must be finite and >= 0",
            });
        }
        if !(z > 0.0) {
            return Err(ModelError::Validation {
                name: "beta_Omega",
                value: z,
                reason: "must be > 0 (may be infinite)",
            });
        }
        Ok(Self {
            omega0_tilde,
            omega_tau_e,
            z,
        })
    }

    pub fn beta_omega0(&self) -> f64 {
        self.z * self.omega0_tilde
    }

    /// f = 1/(1 + ω̃0²)
    pub fn f(&self) -> f64 {
        cutoff_factor(self.omega0_tilde)
    }

    /// δm/m = Ω̃
    pub fn dm(&self) -> f64 {
        self.omega_tau_e
    }

    /// γ/ω0 = ω̃0·Ω̃
    pub fn gamma_over_omega0(&self) -> f64 {
        self.omega0_tilde * self.omega_tau_e
    }

    /// γ/Ω = ω̃0²·Ω̃
    pub fn gamma_over_cutoff(&self) -> f64 {
        self.omega0_tilde * self.omega0_tilde * self.omega_tau_e
    }

    pub fn finite_temperature(&self) -> bool {
        self.z.is_finite()
    }

    pub fn exceeds_causality(&self) -> bool {
        self.omega_tau_e > 1.0
    }

    pub fn with_z(&self, z: f64) -> Self {
        Self { z, ..*self }
    }

    pub fn with_coupling(&self, omega_tau_e: f64) -> Self {
        Self { omega_tau_e, ..*self }
    }

    /// Rebuild SI specs for a chosen cutoff Ω and mass.
    pub fn to_si(&self, cutoff_omega: f64, mass: f64) -> (OscillatorSpec, BathSpec) {
        let osc = OscillatorSpec {
            mass,
            omega0: self.omega0_tilde * cutoff_omega,
        };
        let temperature = if self.z.is_finite() {
            Temperature::Kelvin(CoeffConventions::temperature_from_beta(self.z / cutoff_omega))
        } else {
            Temperature::Kelvin(0.0)
        };
        let bath = BathSpec {
            cutoff_omega,
            tau_e: self.omega_tau_e / cutoff_omega,
            temperature,
        };
        (osc, bath)
    }
}

pub fn reduce(osc: &OscillatorSpec, bath: &BathSpec) -> Result<ReducedParams, ModelError> {
    check_positive("mass", osc.mass)?;
    check_positive("omega0", osc.omega0)?;
    check_positive("cutoff_omega", bath.cutoff_omega)?;
    check_positive("tau_e", bath.tau_e)?;
    ReducedParams::new(
        osc.omega0 / bath.cutoff_omega,
        bath.cutoff_omega * bath.tau_e,
        bath.beta_omega(),
    )
}

/// J(ω) = m τe ω Ω²/(ω² + Ω²)
pub fn spectral_density(omega: f64, bath: &BathSpec, mass: f64) -> Result<f64, ModelError> {
    if !(omega >= 0.0) {
        return Err(ModelError::Validation {
            name: "omega",
            value: omega,
            reason: "must be >= 0",
        });
    }
    let c = bath.cutoff_omega;
    Ok(mass * bath.tau_e * omega * c * c / (omega * omega + c * c))
}

pub fn cutoff_factor(omega_tilde: f64) -> f64 {
    1.0 / (1.0 + omega_tilde * omega_tilde)
}

/// N = 1/(e^{2βω0} − 1), so that 1 + 2N = coth(βω0).
pub fn thermal_occupation(beta_omega0: f64) -> Result<f64, ModelError> {
    if !(beta_omega0 > 0.0) {
        return Err(ModelError::Validation {
            name: "beta_omega0",
            value: beta_omega0,
            reason: "must be > 0",
        });
    }
    let x = 2.0 * beta_omega0;
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio_points() {
        let osc = OscillatorSpec::new(1.0, 3.0e15).unwrap();
        let bath = BathSpec::new(3.0e15, 1.0 / 3.0e15, Temperature::BetaOmega(2.0)).unwrap();
        let p = reduce(&osc, &bath).unwrap();
        assert!((p.omega0_tilde - 1.0).abs() < 1e-15);
        assert!((p.omega_tau_e - 1.0).abs() < 1e-15);
        assert!((p.dm() - 1.0).abs() < 1e-15);
        assert_eq!(p.beta_omega0(), 2.0);
    }

    #[test]
    fn optical_interaction_strength_is_tiny() {
        let omega0 = 2.0 * std::f64::consts::PI * 5.0e14;
        let osc = OscillatorSpec::new(9.109e-31, omega0).unwrap();
        let bath = BathSpec::new(1.0e20, TAU_E_ELECTRON, Temperature::Kelvin(300.0)).unwrap();
        let p = reduce(&osc, &bath).unwrap();
        let g = p.gamma_over_omega0();
        assert!(g > 1e-9 && g < 1e-7 * 1e1, "γ/ω0 = {g}");
        assert!((g - omega0 * TAU_E_ELECTRON).abs() < 1e-20);
    }

    #[test]
    fn spectral_density_shape() {
        let bath = BathSpec::new(2.0, 0.1, Temperature::BetaOmega(1.0)).unwrap();
        assert_eq!(spectral_density(0.0, &bath, 3.0).unwrap(), 0.0);
        let peak = spectral_density(2.0, &bath, 3.0).unwrap();
        assert!((peak - 3.0 * 0.1 * 2.0 / 2.0).abs() < 1e-15);
        let v = spectral_density(6.0, &bath, 3.0).unwrap();
        assert!((v - 0.3 * 3.0 * 0.1 * 2.0).abs() < 1e-14);
        assert!(spectral_density(-1.0, &bath, 3.0).is_err());
    }

    #[test]
    fn cutoff_factor_values() {
        assert_eq!(cutoff_factor(0.0), 1.0);
        assert_eq!(cutoff_factor(1.0), 0.5);
        assert!((cutoff_factor(10.0) - 1.0 / 101.0).abs() < 1e-17);
    }

    #[test]
    fn thermal_occupation_values() {
        assert!((thermal_occupation(0.5).unwrap() - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(thermal_occupation(1e4).unwrap(), 0.0);
        assert!(thermal_occupation(0.0).is_err());
        for &x in &[0.1, 1.0, 10.0] {
            let lhs = 1.0 + 2.0 * thermal_occupation(x).unwrap();
            assert!((lhs - 1.0 / x.tanh()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_temperature_is_infinite_z() {
        let bath = BathSpec::new(1.0, 0.1, Temperature::Kelvin(0.0)).unwrap();
        assert!(bath.beta_omega().is_infinite());
        let p = reduce(&OscillatorSpec::new(1.0, 1.0).unwrap(), &bath).unwrap();
        assert!(!p.finite_temperature());
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(OscillatorSpec::new(0.0, 1.0).is_err());
        assert!(BathSpec::new(1.0, -1.0, Temperature::Kelvin(1.0)).is_err());
        assert!(ReducedParams::new(1.0, 0.1, 0.0).is_err());
        assert!(ReducedParams::new(1.0, 0.0, 1.0).is_ok());
    }
}
