//! The two generalized measurement channels: construction, validation,
//! application, Stinespring dilation, and Choi-matrix verification.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{
    hermitian_eigenvalues, partial_trace_matrix, CMatrix, QState,
};

pub const COMPLETENESS_TOL: f64 = 1e-12;
const CHOI_TP_TOL: f64 = 1e-8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A finite Kraus decomposition of a non-selective generalized measurement.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<CMatrix>,
    label: String,
}

/// Measurement-strength parameters and their angle images.
#[derive(Debug, Clone, Copy)]
pub struct StrengthParams {
    pub p: f64,
    pub q: f64,
    pub omega: f64,
}

impl StrengthParams {
    pub fn new(p: f64, q: f64, omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidStrength(format!("p={p}, q={q}")));
        }
        if !(0.0..1.0).contains(&omega) && omega != 1.0 {
            return Err(Error::InvalidStrength(format!("omega={omega}")));
        }
        if p * omega > 1.0 {
            return Err(Error::InvalidStrength(format!("p*omega = {}", p * omega)));
        }
        Ok(Self { p, q, omega })
    }

    pub fn theta(&self) -> Result<f64> {
        theta_of(self.p, self.omega)
    }

    pub fn phi(&self) -> Result<f64> {
        phi_of(self.q)
    }
}

impl KrausChannel {
    /// Build a channel after checking the completeness relation Σ M†M = I.
    pub fn new(ops: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let dim = ops
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::InvalidStrength("empty Kraus set".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for op in &ops {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimMismatch(op.nrows(), dim));
            }
            sum += op.adjoint() * op;
        }
        let dev = (&sum - CMatrix::identity(dim, dim))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { dim, ops, label })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            ops: vec![CMatrix::identity(dim, dim)],
            label: "identity".into(),
        }
    }

    /// Σ MᵢρMᵢ† on a validated state.
    pub fn apply(&self, rho: &QState) -> Result<QState> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch(rho.dim(), self.dim));
        }
        QState::new(self.apply_matrix(rho.matrix()))
    }

    /// Kraus sum on a raw matrix (used for Choi probes).
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for op in &self.ops {
            out += op * m * op.adjoint();
        }
        out
    }
}

/// Heating channel 𝓜ᵃ: partial excitation |0⟩→|1⟩ with strength p·Ω.
/// M₁ = √(1−pΩ)|0⟩⟨0| + |1⟩⟨1|, M₂ = √(pΩ)|1⟩⟨0|.
pub fn kraus_a(p: f64, omega: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&omega) {
        return Err(Error::InvalidStrength(format!("p={p}, omega={omega}")));
    }
    let a = p * omega;
    if a > 1.0 {
        return Err(Error::InvalidStrength(format!("p*omega = {a}")));
    }
    let m1 = CMatrix::from_row_slice(2, 2, &[c((1.0 - a).sqrt()), c(0.0), c(0.0), c(1.0)]);
    let m2 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(a.sqrt()), c(0.0)]);
    KrausChannel::new(vec![m1, m2], "M^a")
}

/// Work-extraction channel 𝓜ᵇ: amplitude damping toward |0⟩ with strength q.
/// M₁ = |0⟩⟨0| + √(1−q)|1⟩⟨1|, M₂ = √q|0⟩⟨1|.
pub fn kraus_b(q: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidStrength(format!("q={q}")));
    }
    let m1 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - q).sqrt())]);
    let m2 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(q.sqrt()), c(0.0), c(0.0)]);
    KrausChannel::new(vec![m1, m2], "M^b")
}

/// Isentropy condition: q = (2p−1)Ω / ((p−1)Ω + 1). Defined for the engine
/// regime p ∈ [1/2, 1]; below 1/2 the formula yields a negative strength.
pub fn q_star(p: f64, omega: f64) -> Result<f64> {
    if omega <= 0.0 {
        return Err(Error::DegenerateCycle(
            "omega = 0: infinite temperature, no measurement back-action".into(),
        ));
    }
    if !(0.5..=1.0).contains(&p) {
        return Err(Error::OutsideEngineRegime(p));
    }
    Ok((2.0 * p - 1.0) * omega / ((p - 1.0) * omega + 1.0))
}

/// θ = arccos(1 − 2pΩ), the angle implementing 𝓜ᵃ.
pub fn theta_of(p: f64, omega: f64) -> Result<f64> {
    let x = 1.0 - 2.0 * p * omega;
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidStrength(format!(
            "arccos operand {x} out of range"
        )));
    }
    Ok(x.acos())
}

/// φ = arccos(1 − 2q), the angle implementing 𝓜ᵇ.
pub fn phi_of(q: f64) -> Result<f64> {
    let x = 1.0 - 2.0 * q;
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidStrength(format!(
            "arccos operand {x} out of range"
        )));
    }
    Ok(x.acos())
}

/// System–ancilla dilation of 𝓜ᵃ: a rotation by θ in the {|00⟩, |11⟩}
/// subspace (|0⟩ₛ|0⟩ₐ → cos(θ/2)|00⟩ + sin(θ/2)|11⟩), identity elsewhere.
pub fn dilation_unitary_a(theta: f64) -> CMatrix {
    givens_4x4(0, 3, theta)
}

/// Mirrored dilation of 𝓜ᵇ: rotation by φ in the {|10⟩, |01⟩} subspace
/// (|1⟩ₛ|0⟩ₐ → cos(φ/2)|10⟩ + sin(φ/2)|01⟩).
pub fn dilation_unitary_b(phi: f64) -> CMatrix {
    givens_4x4(2, 1, phi)
}

/// Real Givens rotation between basis indices `from` and `to` of a 4×4
/// identity: |from⟩ → cos(a/2)|from⟩ + sin(a/2)|to⟩.
fn givens_4x4(from: usize, to: usize, angle: f64) -> CMatrix {
    let mut u = CMatrix::identity(4, 4);
    let (cos, sin) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    u[(from, from)] = c(cos);
    u[(to, from)] = c(sin);
    u[(from, to)] = c(-sin);
    u[(to, to)] = c(cos);
    u
}

/// Channel induced by a dilation unitary with the ancilla in |0⟩⟨0|:
/// ρ ↦ Tr_anc[U(ρ ⊗ |0⟩⟨0|)U†], applied to a raw qubit matrix.
pub fn dilated_map(u: &CMatrix) -> impl Fn(&CMatrix) -> CMatrix + '_ {
    move |m: &CMatrix| {
        let anc = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let joint = m.kronecker(&anc);
        partial_trace_matrix(&(u * joint * u.adjoint()), 0)
    }
}

/// Choi matrix of a linear qubit map, normalized to unit trace:
/// C = (1/2) Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|). Errors if the map is not trace
/// preserving (output-traced Choi must equal I/2 within 1e-8).
pub fn choi_matrix<F: Fn(&CMatrix) -> CMatrix>(map: F) -> Result<CMatrix> {
    let mut choi = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let mut basis = CMatrix::zeros(2, 2);
            basis[(i, j)] = c(1.0);
            let out = map(&basis);
            for r in 0..2 {
                for s in 0..2 {
                    choi[(2 * i + r, 2 * j + s)] += out[(r, s)] * c(0.5);
                }
            }
        }
    }
    // trace preservation: Tr_out C = I/2
    let reduced = partial_trace_matrix(&choi, 0);
    let dev = (&reduced - CMatrix::identity(2, 2) * c(0.5))
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    if dev > CHOI_TP_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    Ok(choi)
}

/// Choi matrix of a Kraus channel.
pub fn choi_of_channel(ch: &KrausChannel) -> Result<CMatrix> {
    choi_matrix(|m| ch.apply_matrix(m))
}

/// Process fidelity between two qubit maps via the squared Uhlmann fidelity
/// of their unit-trace Choi matrices. Equals 1 iff the maps coincide.
pub fn process_fidelity(choi1: &CMatrix, choi2: &CMatrix) -> Result<f64> {
    if choi1.nrows() != choi2.nrows() {
        return Err(Error::DimMismatch(choi1.nrows(), choi2.nrows()));
    }
    // spectral square root of choi1
    let sr = crate::qcore::hermitian_apply(choi1, |ev| ev.max(0.0).sqrt());
    let inner = &sr * choi2 * &sr;
    let f: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|ev| ev.max(0.0).sqrt())
        .sum();
    Ok((f * f).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::h_nu_pev;
    use crate::qcore::{state_fidelity, von_neumann_entropy};
    use crate::thermo::{gibbs_state, omega_factor, SpinHamiltonianParams, ThermalParams};
    use approx::assert_abs_diff_eq;

    const OMEGA_298: f64 = 0.7503781114143707;
    const TANH_298: f64 = 0.6004841290541716;

    fn preset_298() -> (SpinHamiltonianParams, ThermalParams) {
        (
            SpinHamiltonianParams::new(1.0).unwrap(),
            ThermalParams::new(2.98).unwrap(),
        )
    }

    #[test]
    fn kraus_a_limits() {
        // p*omega = 0: identity map
        let ch = kraus_a(0.0, 0.5).unwrap();
        let rho = QState::qubit_diag(0.6, 0.4).unwrap();
        assert!(state_fidelity(&ch.apply(&rho).unwrap(), &rho).unwrap() > 1.0 - 1e-12);
        // p*omega = 1: full projection, M1 = |1><1|, M2 = |1><0|
        let ch = kraus_a(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(ch.ops()[0][(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.ops()[0][(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.ops()[1][(1, 0)].re, 1.0, epsilon = 1e-15);
        let out = ch.apply(&rho).unwrap();
        assert!(state_fidelity(&out, &QState::ket1()).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn kraus_a_povm_elements() {
        let (p, omega) = (0.75, OMEGA_298);
        let ch = kraus_a(p, omega).unwrap();
        let e1 = ch.ops()[0].adjoint() * &ch.ops()[0];
        let e2 = ch.ops()[1].adjoint() * &ch.ops()[1];
        assert_abs_diff_eq!(e1[(0, 0)].re, 1.0 - p * omega, epsilon = 1e-12);
        assert_abs_diff_eq!(e1[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e2[(0, 0)].re, p * omega, epsilon = 1e-12);
        assert_abs_diff_eq!(e2[(1, 1)].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kraus_b_limits_and_action() {
        let rho = QState::qubit_diag(0.3, 0.7).unwrap();
        let ch = kraus_b(0.0).unwrap();
        assert!(state_fidelity(&ch.apply(&rho).unwrap(), &rho).unwrap() > 1.0 - 1e-12);
        let ch = kraus_b(1.0).unwrap();
        assert!(state_fidelity(&ch.apply(&rho).unwrap(), &QState::ket0()).unwrap() > 1.0 - 1e-12);
        // q = 0.4618...: |1><1| maps to diag(q, 1-q)
        let q = 0.4618248751032179;
        let out = kraus_b(q).unwrap().apply(&QState::ket1()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, q, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, 1.0 - q, epsilon = 1e-12);
    }

    #[test]
    fn invalid_strengths_rejected() {
        assert!(kraus_a(1.5, 1.0).is_err());
        assert!(kraus_b(-0.1).is_err());
        assert!(kraus_b(1.1).is_err());
    }

    #[test]
    fn q_star_values() {
        assert_abs_diff_eq!(q_star(0.5, OMEGA_298).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q_star(1.0, OMEGA_298).unwrap(), OMEGA_298, epsilon = 1e-15);
        assert_abs_diff_eq!(
            q_star(0.75, OMEGA_298).unwrap(),
            0.4618248751032179,
            epsilon = 1e-12
        );
        assert!(matches!(
            q_star(0.4, OMEGA_298),
            Err(Error::OutsideEngineRegime(_))
        ));
        assert!(matches!(q_star(0.75, 0.0), Err(Error::DegenerateCycle(_))));
    }

    #[test]
    fn post_measurement_states_match_closed_forms() {
        let (h, t) = preset_298();
        let rho1 = gibbs_state(&h, &t);
        let omega = omega_factor(&h, &t);
        let p = 0.75;
        let rho2 = kraus_a(p, omega).unwrap().apply(&rho1).unwrap();
        let closed2 = QState::qubit_from_z_coeff((0.5 - p) * TANH_298).unwrap();
        assert!((rho2.matrix() - closed2.matrix()).norm() < 1e-12);
        let rho3 = kraus_b(q_star(p, omega).unwrap())
            .unwrap()
            .apply(&rho2)
            .unwrap();
        let closed3 = QState::qubit_from_z_coeff(-(0.5 - p) * TANH_298).unwrap();
        assert!((rho3.matrix() - closed3.matrix()).norm() < 1e-12);
    }

    #[test]
    fn isentropy_and_shared_spectrum_at_q_star() {
        let (h, t) = preset_298();
        let rho1 = gibbs_state(&h, &t);
        let omega = omega_factor(&h, &t);
        for i in 0..20 {
            let p = 0.5 + 0.5 * (i as f64 + 0.5) / 20.0;
            let rho2 = kraus_a(p, omega).unwrap().apply(&rho1).unwrap();
            let rho3 = kraus_b(q_star(p, omega).unwrap())
                .unwrap()
                .apply(&rho2)
                .unwrap();
            let ds = von_neumann_entropy(&rho3) - von_neumann_entropy(&rho2);
            assert!(ds.abs() < 1e-10, "dS^b = {ds} at p = {p}");
            let (s2, s3) = (rho2.spectrum(), rho3.spectrum());
            for (a, b) in s2.iter().zip(s3.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn angle_maps_round_trip() {
        assert_abs_diff_eq!(theta_of(0.0, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            theta_of(1.0, 1.0).unwrap(),
            std::f64::consts::PI,
            epsilon = 1e-12
        );
        let theta = theta_of(0.75, OMEGA_298).unwrap();
        assert_abs_diff_eq!(theta, 1.6966958293069618, epsilon = 1e-12);
        // p*omega = sin^2(theta/2) round trip
        assert_abs_diff_eq!(
            (theta / 2.0).sin().powi(2),
            0.75 * OMEGA_298,
            epsilon = 1e-12
        );
        let q = 0.4618248751032179;
        let phi = phi_of(q).unwrap();
        assert_abs_diff_eq!((phi / 2.0).sin().powi(2), q, epsilon = 1e-12);
    }

    #[test]
    fn dilation_limits() {
        let u = dilation_unitary_a(0.0);
        assert!((u.clone() - CMatrix::identity(4, 4)).norm() < 1e-15);
        // theta = pi: |00> -> |11>
        let u = dilation_unitary_a(std::f64::consts::PI);
        assert_abs_diff_eq!(u[(3, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(0, 0)].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dilation_matches_kraus_by_choi_fidelity() {
        let (p, omega) = (0.75, OMEGA_298);
        let ch = kraus_a(p, omega).unwrap();
        let u = dilation_unitary_a(theta_of(p, omega).unwrap());
        let choi_k = choi_of_channel(&ch).unwrap();
        let choi_d = choi_matrix(dilated_map(&u)).unwrap();
        assert!(process_fidelity(&choi_k, &choi_d).unwrap() > 1.0 - 1e-10);

        let q = q_star(p, omega).unwrap();
        let chb = kraus_b(q).unwrap();
        let ub = dilation_unitary_b(phi_of(q).unwrap());
        let choi_k = choi_of_channel(&chb).unwrap();
        let choi_d = choi_matrix(dilated_map(&ub)).unwrap();
        assert!(process_fidelity(&choi_k, &choi_d).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn partial_trace_of_dilated_action_equals_kraus_sum() {
        // the spec's cross-check at p = 0.75, omega from the 2.98 peV preset
        let (h, t) = preset_298();
        let rho1 = gibbs_state(&h, &t);
        let omega = omega_factor(&h, &t);
        assert_abs_diff_eq!(h_nu_pev(1.0) / 2.98, 1.3878079516778523, epsilon = 1e-12);
        let u = dilation_unitary_a(theta_of(0.75, omega).unwrap());
        let via_dilation = dilated_map(&u)(rho1.matrix());
        let via_kraus = kraus_a(0.75, omega).unwrap().apply_matrix(rho1.matrix());
        assert!((via_dilation - via_kraus).norm() < 1e-12);
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let choi = choi_of_channel(&KrausChannel::identity(2)).unwrap();
        // |Phi+><Phi+| has entries 1/2 at the four corners of the {00,11} block
        assert_abs_diff_eq!(choi[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(choi[(0, 3)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(choi[(3, 3)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(choi.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn choi_of_full_damping_is_rank_two() {
        let choi = choi_of_channel(&kraus_b(1.0).unwrap()).unwrap();
        let mut eigs = hermitian_eigenvalues(&choi);
        eigs.reverse();
        assert_abs_diff_eq!(eigs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 0.5, epsilon = 1e-12);
        assert!(eigs[2].abs() < 1e-12);
    }

    #[test]
    fn choi_rejects_non_tp_map() {
        // drop one Kraus term: not trace preserving
        let ch = kraus_b(0.5).unwrap();
        let m1 = ch.ops()[0].clone();
        let res = choi_matrix(|m| &m1 * m * m1.adjoint());
        assert!(matches!(res, Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn process_fidelity_is_one_for_equal_maps() {
        let choi = choi_of_channel(&kraus_a(0.6, 0.8).unwrap()).unwrap();
        assert_abs_diff_eq!(process_fidelity(&choi, &choi).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn completeness_over_parameter_grid() {
        let h = SpinHamiltonianParams::new(1.0).unwrap();
        for i in 0..50 {
            let p = (i as f64) / 49.0;
            let kbt = 0.5 + 9.5 * (i as f64) / 49.0;
            let omega = omega_factor(&h, &ThermalParams::new(kbt).unwrap());
            // constructors run the completeness check internally
            kraus_a(p, omega).unwrap();
            kraus_b(p).unwrap();
        }
    }
}
