//! Thermal-state preparation and temperature bookkeeping for stroke one.

use serde::{Deserialize, Serialize};

use crate::consts::h_nu_pev;
use crate::error::{Error, Result};
use crate::qcore::{HermitianOp, QState};

/// Working-substance Hamiltonian parameters: H = −(hν/2)σ_z with ν in kHz.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpinHamiltonianParams {
    pub nu_khz: f64,
}

impl SpinHamiltonianParams {
    pub fn new(nu_khz: f64) -> Result<Self> {
        if nu_khz <= 0.0 || !nu_khz.is_finite() {
            return Err(Error::Config(format!("nu must be positive, got {nu_khz}")));
        }
        Ok(Self { nu_khz })
    }

    /// Level splitting hν in peV.
    pub fn h_nu(&self) -> f64 {
        h_nu_pev(self.nu_khz)
    }

    pub fn hamiltonian(&self) -> HermitianOp {
        HermitianOp::sigma_z().scale(-self.h_nu() / 2.0)
    }
}

/// Spin temperature as k_B·T in peV.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThermalParams {
    pub kbt_pev: f64,
}

impl ThermalParams {
    pub fn new(kbt_pev: f64) -> Result<Self> {
        if kbt_pev <= 0.0 || !kbt_pev.is_finite() {
            return Err(Error::Config(format!(
                "kBT must be positive, got {kbt_pev}"
            )));
        }
        Ok(Self { kbt_pev })
    }

    /// Dimensionless βhν.
    pub fn beta_h_nu(&self, h: &SpinHamiltonianParams) -> f64 {
        h.h_nu() / self.kbt_pev
    }
}

/// Gibbs state exp[−βH]/Z: diag(p0, p1) with p0/p1 = e^{βhν}.
pub fn gibbs_state(h: &SpinHamiltonianParams, t: &ThermalParams) -> QState {
    let x = t.beta_h_nu(h);
    // p0 = e^x/(e^x + 1) written to stay finite for large x
    let p1 = 1.0 / ((x).exp() + 1.0);
    QState::qubit_diag(1.0 - p1, p1).expect("Gibbs populations are always a valid state")
}

/// Ω = 1 − e^{−βhν}, the temperature factor in the heating channel.
pub fn omega_factor(h: &SpinHamiltonianParams, t: &ThermalParams) -> f64 {
    1.0 - (-t.beta_h_nu(h)).exp()
}

/// Effective spin temperature inferred from a diagonal-dominant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinTemperature {
    /// k_B·T in peV.
    Finite(f64),
    /// Pure ground state: the +0 temperature limit.
    Zero,
}

/// Infer k_BT from a qubit state's populations so that `gibbs_state`
/// round-trips within 1e-10. Requires p0 > p1 (a genuinely cold state).
pub fn spin_temperature_of(rho: &QState, h: &SpinHamiltonianParams) -> Result<SpinTemperature> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch(rho.dim(), 2));
    }
    let p0 = rho.matrix()[(0, 0)].re;
    let p1 = rho.matrix()[(1, 1)].re;
    if p1 <= 0.0 {
        return Ok(SpinTemperature::Zero);
    }
    if p0 <= p1 {
        return Err(Error::NotThermal);
    }
    Ok(SpinTemperature::Finite(h.h_nu() / (p0 / p1).ln()))
}
