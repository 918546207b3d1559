//! Monte Carlo error bars: Gaussian perturbation of magnetization readouts
//! and state-tomography data, propagated through every derived quantity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::cycle::{run_cycle, CycleConfig};
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigenvalues, CMatrix, QState};
use num_complex::Complex64;

/// Gaussian widths for the two data channels plus sampling controls.
/// The experimental widths are not published; 0.01 is a configurable
/// default chosen to give error bars of comparable magnitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_mag: f64,
    pub sigma_qst: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma_mag: 0.01,
            sigma_qst: 0.01,
            n_samples: 100,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_mag < 0.0 || self.sigma_qst < 0.0 {
            return Err(Error::Config("sigmas must be non-negative".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::Config("n_samples must be at least 2".into()));
        }
        Ok(())
    }

    /// Independent, seed-derived substream for draw `index`; parallel and
    /// serial evaluation orders agree.
    pub fn stream(&self, index: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

fn gaussian(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    // Box-Muller; two uniforms per normal keeps the stream layout simple
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Element-wise Gaussian perturbation of tomography data: the diagonal and
/// lower triangle are perturbed and mirrored to keep Hermiticity, then the
/// result is projected back to the nearest valid state (eigenvalue clip and
/// trace renormalization).
pub fn perturb_state(rho: &QState, sigma_qst: f64, rng: &mut impl Rng) -> QState {
    if sigma_qst == 0.0 {
        return rho.clone();
    }
    let n = rho.dim();
    let mut m = rho.matrix().clone();
    for i in 0..n {
        m[(i, i)] += Complex64::new(gaussian(rng, sigma_qst), 0.0);
        for j in 0..i {
            let d = Complex64::new(gaussian(rng, sigma_qst), gaussian(rng, sigma_qst));
            m[(i, j)] += d;
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    project_to_state(&m)
}

/// Clip negative eigenvalues to zero and renormalize the trace.
fn project_to_state(m: &CMatrix) -> QState {
    let n = m.nrows();
    let total: f64 = hermitian_eigenvalues(m)
        .into_iter()
        .map(|ev| ev.max(0.0))
        .sum();
    // a fully clipped spectrum degenerates to the maximally mixed state
    let out = if total > 0.0 {
        crate::qcore::hermitian_apply(m, |ev| ev.max(0.0) / total)
    } else {
        CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0)
    };
    QState::new_unchecked(out)
}

/// Mean and standard deviation of `quantity` over seeded Gaussian draws.
/// Draws for which the quantity is undefined return `None` and are
/// discarded; more than 20% discards aborts with `UnstableEstimate`.
pub fn estimate<F>(quantity: F, spec: &NoiseSpec) -> Result<EstimateWithError>
where
    F: Fn(&mut ChaCha12Rng) -> Option<f64>,
{
    spec.validate()?;
    let mut values = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let mut rng = spec.stream(i as u64);
        if let Some(v) = quantity(&mut rng) {
            values.push(v);
        }
    }
    let discarded = spec.n_samples - values.len();
    if discarded * 5 > spec.n_samples {
        return Err(Error::UnstableEstimate {
            discarded,
            total: spec.n_samples,
        });
    }
    Ok(summarize(&values))
}

fn summarize(values: &[f64]) -> EstimateWithError {
    let n = values.len();
    // identical samples (e.g. zero-noise runs) collapse exactly, without
    // picking up accumulation rounding
    if values.windows(2).all(|w| w[0] == w[1]) {
        return EstimateWithError {
            mean: values[0],
            std: 0.0,
            n,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values
        .iter()
        .map(|v| (v - mean).powi(2))
        .sum::<f64>()
        / (n as f64 - 1.0);
    EstimateWithError {
        mean,
        std: var.max(0.0).sqrt(),
        n,
    }
}

/// Error-bar estimates for every ledger quantity of a cycle configuration.
#[derive(Debug, Clone, Serialize)]
pub struct McCycleReport {
    pub heat_p: EstimateWithError,
    pub work_ext: EstimateWithError,
    pub heat_cold: EstimateWithError,
    pub ds_a: EstimateWithError,
    pub ds_b: EstimateWithError,
    pub efficiency: EstimateWithError,
    pub power_ext: EstimateWithError,
    pub discarded: usize,
}

/// Run the backend once, then Monte Carlo the readout chain: QST noise on
/// each stroke state and magnetization noise on each ⟨σ_z⟩ used for the
/// energy ledger. Draws with non-positive perturbed heat are discarded
/// (efficiency undefined there).
pub fn estimate_cycle(cfg: &CycleConfig, spec: &NoiseSpec) -> Result<McCycleReport> {
    spec.validate()?;
    let base = run_cycle(cfg)?;
    let h_nu = crate::consts::h_nu_pev(cfg.nu_khz);

    let mut heat = Vec::new();
    let mut work = Vec::new();
    let mut cold = Vec::new();
    let mut dsa = Vec::new();
    let mut dsb = Vec::new();
    let mut eta = Vec::new();
    let mut power = Vec::new();

    for i in 0..spec.n_samples {
        let mut rng = spec.stream(i as u64);
        let r1 = perturb_state(&base.rho1, spec.sigma_qst, &mut rng);
        let r2 = perturb_state(&base.rho2, spec.sigma_qst, &mut rng);
        let r3 = perturb_state(&base.rho3, spec.sigma_qst, &mut rng);
        let z1 = r1.z_expectation().unwrap() + gaussian(&mut rng, spec.sigma_mag);
        let z2 = r2.z_expectation().unwrap() + gaussian(&mut rng, spec.sigma_mag);
        let z3 = r3.z_expectation().unwrap() + gaussian(&mut rng, spec.sigma_mag);
        // H = -(h nu / 2) sigma_z, so tr[H rho] = -(h nu / 2) z
        let q_p = -(h_nu / 2.0) * (z2 - z1);
        let w_ext = (h_nu / 2.0) * (z3 - z2);
        if q_p <= 0.0 {
            continue;
        }
        heat.push(q_p);
        work.push(w_ext);
        cold.push(w_ext - q_p);
        dsa.push(entropy_of(&r2) - entropy_of(&r1));
        dsb.push(entropy_of(&r3) - entropy_of(&r2));
        eta.push(w_ext / q_p);
        power.push(w_ext / cfg.tau_cycle);
    }

    let discarded = spec.n_samples - heat.len();
    if discarded * 5 > spec.n_samples {
        return Err(Error::UnstableEstimate {
            discarded,
            total: spec.n_samples,
        });
    }
    Ok(McCycleReport {
        heat_p: summarize(&heat),
        work_ext: summarize(&work),
        heat_cold: summarize(&cold),
        ds_a: summarize(&dsa),
        ds_b: summarize(&dsb),
        efficiency: summarize(&eta),
        power_ext: summarize(&power),
        discarded,
    })
}

fn entropy_of(rho: &QState) -> f64 {
    crate::qcore::von_neumann_entropy(rho)
}
