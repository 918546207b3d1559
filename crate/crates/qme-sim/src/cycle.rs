//! The three-stroke engine: fresh Gibbs state, heating channel, isentropic
//! work-extraction channel, with the full energy/entropy ledger.

use serde::{Deserialize, Serialize};

use crate::channels::{kraus_a, kraus_b, q_star, theta_of};
use crate::consts::TAU_CYCLE_DEFAULT;
use crate::error::{Error, Result};
use crate::pulsesim::{
    compile_channel_a, compile_composed_padded, simulate, NoiseModel,
};
use crate::qcore::{
    expectation, partial_trace, tensor_product_states, von_neumann_entropy, QState,
};
use crate::thermo::{gibbs_state, omega_factor, SpinHamiltonianParams, ThermalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    IdealKraus,
    PulseSim,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::IdealKraus => write!(f, "ideal"),
            Backend::PulseSim => write!(f, "pulse"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CycleConfig {
    pub nu_khz: f64,
    pub kbt_pev: f64,
    pub p: f64,
    pub tau_cycle: f64,
    pub backend: Backend,
    /// Relaxation model for the pulse backend; ignored by the ideal backend.
    pub noise: NoiseModel,
}

impl CycleConfig {
    pub fn ideal(nu_khz: f64, kbt_pev: f64, p: f64) -> Self {
        Self {
            nu_khz,
            kbt_pev,
            p,
            tau_cycle: TAU_CYCLE_DEFAULT,
            backend: Backend::IdealKraus,
            noise: NoiseModel::disabled(),
        }
    }

    pub fn pulse(nu_khz: f64, kbt_pev: f64, p: f64, noise: NoiseModel) -> Self {
        Self {
            nu_khz,
            kbt_pev,
            p,
            tau_cycle: TAU_CYCLE_DEFAULT,
            backend: Backend::PulseSim,
            noise,
        }
    }
}

/// Per-cycle ledger. Energies in peV, entropies in nats, power in peV/s.
#[derive(Debug, Clone)]
pub struct CycleReport {
    pub rho1: QState,
    pub rho2: QState,
    pub rho3: QState,
    pub heat_p: f64,
    pub work_ext: f64,
    pub heat_cold: f64,
    pub ds_a: f64,
    pub ds_b: f64,
    pub efficiency: f64,
    pub power_ext: f64,
    pub q_used: f64,
    /// False for diagnostic points with p ≤ 1/2, where the energy exchanged
    /// in stroke two lacks the heat classification.
    pub engine: bool,
}

/// Eq.-(1) closed form: ⟨Q^p⟩ = hν p tanh(βhν/2).
pub fn heat_absorbed(p: f64, nu_khz: f64, kbt_pev: f64) -> f64 {
    let h_nu = crate::consts::h_nu_pev(nu_khz);
    h_nu * p * (h_nu / (2.0 * kbt_pev)).tanh()
}

/// Eq.-(3) closed form: ⟨W_ext⟩ = hν (2p−1) tanh(βhν/2).
pub fn work_extracted(p: f64, nu_khz: f64, kbt_pev: f64) -> f64 {
    let h_nu = crate::consts::h_nu_pev(nu_khz);
    h_nu * (2.0 * p - 1.0) * (h_nu / (2.0 * kbt_pev)).tanh()
}

/// Eq.-(4) efficiency η = 2 − 1/p, defined on the engine regime [1/2, 1];
/// the p = 1/2 boundary returns 0.
pub fn efficiency(p: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::OutsideEngineRegime(p));
    }
    Ok(2.0 - 1.0 / p)
}

/// P_ext = ⟨W_ext⟩ / τ_cycle.
pub fn extracted_power(work_ext: f64, tau_cycle: f64) -> Result<f64> {
    if tau_cycle <= 0.0 {
        return Err(Error::DegenerateCycle(format!(
            "tau_cycle must be positive, got {tau_cycle}"
        )));
    }
    Ok(work_ext / tau_cycle)
}

/// Run one full cycle and account every flow from the simulated states.
pub fn run_cycle(cfg: &CycleConfig) -> Result<CycleReport> {
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(Error::InvalidStrength(format!("p = {}", cfg.p)));
    }
    let h = SpinHamiltonianParams::new(cfg.nu_khz)?;
    let t = ThermalParams::new(cfg.kbt_pev)?;
    let hamiltonian = h.hamiltonian();
    let omega = omega_factor(&h, &t);
    if omega <= f64::EPSILON {
        return Err(Error::DegenerateCycle(
            "tanh(beta h nu / 2) = 0: infinite temperature".into(),
        ));
    }
    let engine = cfg.p > 0.5;
    // Diagnostic points below the threshold run stroke three as a no-op
    // (q = 0) and report raw energy changes with the non-engine flag.
    let q = if cfg.p >= 0.5 {
        q_star(cfg.p, omega)?
    } else {
        0.0
    };

    let rho1 = gibbs_state(&h, &t);
    let (rho2, rho3) = match cfg.backend {
        Backend::IdealKraus => {
            let rho2 = kraus_a(cfg.p, omega)?.apply(&rho1)?;
            let rho3 = kraus_b(q)?.apply(&rho2)?;
            (rho2, rho3)
        }
        Backend::PulseSim => {
            let joint = tensor_product_states(&rho1, &QState::ket0())?;
            let seq_a = compile_channel_a(theta_of(cfg.p, omega)?)?;
            let rho2 = partial_trace(&simulate(&seq_a, &joint, &cfg.noise)?, 0)?;
            let rho3 = if cfg.p >= 0.5 {
                let seq = compile_composed_padded(cfg.p, omega, cfg.tau_cycle)?;
                partial_trace(&simulate(&seq, &joint, &cfg.noise)?, 0)?
            } else {
                rho2.clone()
            };
            (rho2, rho3)
        }
    };

    let e1 = expectation(&hamiltonian, &rho1)?;
    let e2 = expectation(&hamiltonian, &rho2)?;
    let e3 = expectation(&hamiltonian, &rho3)?;
    let heat_p = e2 - e1;
    let work_ext = -(e3 - e2);
    let heat_cold = work_ext - heat_p;
    let ds_a = von_neumann_entropy(&rho2) - von_neumann_entropy(&rho1);
    let ds_b = von_neumann_entropy(&rho3) - von_neumann_entropy(&rho2);
    let efficiency = if engine && heat_p > 0.0 {
        work_ext / heat_p
    } else {
        0.0
    };
    let power_ext = extracted_power(work_ext, cfg.tau_cycle)?;

    Ok(CycleReport {
        rho1,
        rho2,
        rho3,
        heat_p,
        work_ext,
        heat_cold,
        ds_a,
        ds_b,
        efficiency,
        power_ext,
        q_used: q,
        engine,
    })
}

/// One sweep point; errors are captured per point, never aborting the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p: f64,
    pub kbt_pev: f64,
    pub backend: Backend,
    pub report: Option<CycleReport>,
    pub flags: Vec<String>,
}

/// Evaluate the cycle over a strength grid for each temperature. Rows are
/// grouped by temperature, then ordered by p.
pub fn sweep(p_grid: &[f64], temps: &[f64], base: &CycleConfig) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(p_grid.len() * temps.len());
    for &kbt in temps {
        for &p in p_grid {
            let cfg = CycleConfig {
                p,
                kbt_pev: kbt,
                ..*base
            };
            let mut flags = Vec::new();
            let report = match run_cycle(&cfg) {
                Ok(r) => {
                    if !r.engine {
                        flags.push("non-engine".to_string());
                    }
                    Some(r)
                }
                Err(e) => {
                    flags.push(format!("error:{e}"));
                    None
                }
            };
            rows.push(SweepRow {
                p,
                kbt_pev: kbt,
                backend: cfg.backend,
                report,
                flags,
            });
        }
    }
    rows
}

/// Inclusive range grid with a fixed step (last point clamped to `stop`).
pub fn range_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || stop < start {
        return Err(Error::Config(format!(
            "bad range {start}:{stop}:{step}"
        )));
    }
    let mut grid = Vec::new();
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    for i in 0..=n {
        grid.push(start + step * i as f64);
    }
    if let Some(last) = grid.last_mut() {
        if (*last - stop).abs() < 1e-12 {
            *last = stop;
        }
    }
    Ok(grid)
}
