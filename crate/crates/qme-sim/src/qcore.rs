//! Dense complex linear algebra for one- and two-qubit states: composition,
//! reduction, spectral functions, and distance/entropy measures.
//!
//! Qubit ordering is fixed as system (13C) ⊗ ancilla (1H) everywhere.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Eigenvalues below this contribute 0·ln 0 := 0 to the entropy.
pub const ENTROPY_EIG_FLOOR: f64 = 1e-14;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Density matrix of one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    matrix: CMatrix,
}

/// Hermitian operator (observable or Hamiltonian; energies in peV).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    matrix: CMatrix,
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let dev = max_abs_diff(m, &m.adjoint());
    if dev > HERMITICITY_TOL {
        return Err(Error::NotAState(format!(
            "not Hermitian (max deviation {dev:.3e})"
        )));
    }
    Ok(())
}

fn check_dim(m: &CMatrix) -> Result<usize> {
    let dim = m.nrows();
    if m.ncols() != dim || (dim != 2 && dim != 4) {
        return Err(Error::UnsupportedDimension(dim.max(m.ncols())));
    }
    Ok(dim)
}

/// Real-symmetric embedding of a complex Hermitian matrix: M = A + iB maps
/// to [[A, −B], [B, A]]. The embedding is an algebra homomorphism, so
/// spectral functions commute with it, and each eigenvalue of M appears
/// twice in the embedding. All Hermitian eigenwork goes through the real
/// solver: nalgebra's complex `SymmetricEigen` can silently return an
/// inconsistent decomposition for some Hermitian inputs.
fn real_embedding(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    let mut r = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
    }
    r
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(real_embedding(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // every eigenvalue is doubled by the embedding
    vals.into_iter().step_by(2).collect()
}

/// Spectral function f(M) of a Hermitian matrix, computed in the real
/// embedding.
pub fn hermitian_apply<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> CMatrix {
    let n = m.nrows();
    let eig = SymmetricEigen::new(real_embedding(m));
    let mut d = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        d[(i, i)] = f(ev);
    }
    let r = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = Complex64::new(
                0.5 * (r[(i, j)] + r[(i + n, j + n)]),
                0.5 * (r[(i + n, j)] - r[(i, j + n)]),
            );
        }
    }
    out
}

/// Hermitian square root via spectral decomposition; negative eigenvalues
/// (numerical noise) are clamped to zero.
fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_apply(m, |ev| ev.max(0.0).sqrt())
}

impl QState {
    /// Validate and wrap a density matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let _ = check_dim(&matrix)?;
        check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotAState(format!(
                "trace {} != 1",
                tr.re
            )));
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::NotAState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wrap without validation. Callers must guarantee the invariants.
    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// diag(p0, p1) from populations.
    pub fn qubit_diag(p0: f64, p1: f64) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(p0),
            c(p1),
        ])))
    }

    /// I/2 + coeff·σ_z, the closed-form family the engine states live in.
    pub fn qubit_from_z_coeff(coeff: f64) -> Result<Self> {
        Self::qubit_diag(0.5 + coeff, 0.5 - coeff)
    }

    /// ⟨σ_z⟩ = p0 − p1 for a qubit state.
    pub fn z_expectation(&self) -> Result<f64> {
        expectation(&HermitianOp::sigma_z(), self)
    }

    pub fn ket0() -> Self {
        Self::new_unchecked(projector(&[c(1.0), c(0.0)]))
    }

    pub fn ket1() -> Self {
        Self::new_unchecked(projector(&[c(0.0), c(1.0)]))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(CMatrix::identity(dim, dim) * c(1.0 / dim as f64))
    }

    /// Eigenvalues of the state, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// |ψ⟩⟨ψ| for an (unnormalized-tolerant) amplitude vector.
pub fn projector(amps: &[Complex64]) -> CMatrix {
    let n = amps.len();
    CMatrix::from_fn(n, n, |i, j| amps[i] * amps[j].conj())
}

impl HermitianOp {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let _ = check_dim(&matrix)?;
        check_hermitian(&matrix)?;
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sigma_x() -> Self {
        Self::new_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0), c(1.0), c(1.0), c(0.0)],
        ))
    }

    pub fn sigma_y() -> Self {
        Self::new_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                c(0.0),
            ],
        ))
    }

    pub fn sigma_z() -> Self {
        Self::new_unchecked(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), c(0.0), c(0.0), c(-1.0)],
        ))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(CMatrix::identity(dim, dim))
    }

    /// Scale by a real factor (e.g. to attach energy units).
    pub fn scale(&self, factor: f64) -> Self {
        Self::new_unchecked(&self.matrix * c(factor))
    }
}

/// Kronecker product of two states (product state) or two operators.
pub fn tensor_product_states(a: &QState, b: &QState) -> Result<QState> {
    let out_dim = a.dim() * b.dim();
    if out_dim > 4 {
        return Err(Error::UnsupportedDimension(out_dim));
    }
    Ok(QState::new_unchecked(a.matrix.kronecker(&b.matrix)))
}

pub fn tensor_product_ops(a: &HermitianOp, b: &HermitianOp) -> Result<HermitianOp> {
    let out_dim = a.dim() * b.dim();
    if out_dim > 4 {
        return Err(Error::UnsupportedDimension(out_dim));
    }
    Ok(HermitianOp::new_unchecked(a.matrix.kronecker(&b.matrix)))
}

/// Reduce a two-qubit state to one factor. `keep = 0` keeps the system
/// (first factor), `keep = 1` keeps the ancilla.
pub fn partial_trace(rho: &QState, keep: usize) -> Result<QState> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    if keep > 1 {
        return Err(Error::BadSubsystem(keep));
    }
    Ok(QState::new_unchecked(partial_trace_matrix(
        rho.matrix(),
        keep,
    )))
}

/// Partial trace on a raw 4×4 matrix (no state validation); used for maps
/// applied to non-positive probe combinations.
pub fn partial_trace_matrix(m: &CMatrix, keep: usize) -> CMatrix {
    // index (s, a) -> 2*s + a
    let mut out = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                let (r, cidx) = if keep == 0 {
                    (2 * i + k, 2 * j + k)
                } else {
                    (2 * k + i, 2 * k + j)
                };
                acc += m[(r, cidx)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// S(ρ) = −tr(ρ ln ρ) in nats.
pub fn von_neumann_entropy(rho: &QState) -> f64 {
    rho.spectrum()
        .into_iter()
        .filter(|&ev| ev > ENTROPY_EIG_FLOOR)
        .map(|ev| -ev * ev.ln())
        .sum()
}

/// tr(Aρ); the imaginary residue (≤ 1e-10 for valid inputs) is discarded.
pub fn expectation(a: &HermitianOp, rho: &QState) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::DimMismatch(a.dim(), rho.dim()));
    }
    Ok((a.matrix() * rho.matrix()).trace().re)
}

/// UρU† after verifying U†U = I within 1e-12.
pub fn evolve_unitary(rho: &QState, u: &CMatrix) -> Result<QState> {
    if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
        return Err(Error::DimMismatch(u.nrows(), rho.dim()));
    }
    let dev = max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(u.nrows(), u.ncols()));
    if dev > 1e-12 {
        return Err(Error::NotUnitary(dev));
    }
    Ok(QState::new_unchecked(u * rho.matrix() * u.adjoint()))
}

/// Uhlmann fidelity F(ρ, σ) = tr √(√ρ σ √ρ), clamped to [0, 1].
pub fn state_fidelity(rho: &QState, sigma: &QState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(rho.dim(), sigma.dim()));
    }
    let sr = hermitian_sqrt(rho.matrix());
    let inner = &sr * sigma.matrix() * &sr;
    let f: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|ev| ev.max(0.0).sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell_phi_plus() -> QState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        QState::new(projector(&[c(s), c(0.0), c(0.0), c(s)])).unwrap()
    }

    #[test]
    fn tensor_of_mixed_factors_is_mixed() {
        let half = QState::maximally_mixed(2);
        let joint = tensor_product_states(&half, &half).unwrap();
        assert_eq!(joint.dim(), 4);
        for i in 0..4 {
            assert_abs_diff_eq!(joint.matrix()[(i, i)].re, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_basis_projectors() {
        let joint = tensor_product_states(&QState::ket0(), &QState::ket1()).unwrap();
        // ordering |q1 q2>: |01> is index 1
        assert_abs_diff_eq!(joint.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(joint.matrix().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn tensor_sigma_z_sigma_z() {
        let zz = tensor_product_ops(&HermitianOp::sigma_z(), &HermitianOp::sigma_z()).unwrap();
        let expected = [1.0, -1.0, -1.0, 1.0];
        for (i, &e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(zz.matrix()[(i, i)].re, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_dimension_overflow() {
        let four = QState::maximally_mixed(4);
        let two = QState::maximally_mixed(2);
        assert!(matches!(
            tensor_product_states(&four, &two),
            Err(Error::UnsupportedDimension(8))
        ));
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = QState::qubit_diag(0.7, 0.3).unwrap();
        let b = QState::ket1();
        let joint = tensor_product_states(&a, &b).unwrap();
        let reduced = partial_trace(&joint, 0).unwrap();
        assert!(state_fidelity(&reduced, &a).unwrap() > 1.0 - 1e-12);
        let reduced_b = partial_trace(&joint, 1).unwrap();
        assert!(state_fidelity(&reduced_b, &b).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_mixed() {
        let reduced = partial_trace(&bell_phi_plus(), 0).unwrap();
        assert!(state_fidelity(&reduced, &QState::maximally_mixed(2)).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_subsystem() {
        assert!(matches!(
            partial_trace(&bell_phi_plus(), 2),
            Err(Error::BadSubsystem(2))
        ));
    }

    #[test]
    fn entropy_of_pure_state_is_zero() {
        assert_abs_diff_eq!(von_neumann_entropy(&QState::ket0()), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn entropy_of_maximally_mixed_qubit() {
        assert_abs_diff_eq!(
            von_neumann_entropy(&QState::maximally_mixed(2)),
            std::f64::consts::LN_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn entropy_of_thermal_populations() {
        // binary entropy of the rounded populations the experiment reports
        let rho = QState::qubit_diag(0.8003, 0.1997).unwrap();
        assert_abs_diff_eq!(
            von_neumann_entropy(&rho),
            0.4999862538742974,
            epsilon = 1e-12
        );
    }

    #[test]
    fn expectation_of_traceless_on_mixed() {
        let v = expectation(&HermitianOp::sigma_z(), &QState::maximally_mixed(2)).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_of_hamiltonian_on_ground_state() {
        use crate::consts::h_nu_pev;
        let h = HermitianOp::sigma_z().scale(-h_nu_pev(1.0) / 2.0);
        let v = expectation(&h, &QState::ket0()).unwrap();
        assert_abs_diff_eq!(v, -2.067833848, epsilon = 1e-9);
    }

    #[test]
    fn expectation_dim_mismatch() {
        assert!(matches!(
            expectation(&HermitianOp::sigma_z(), &QState::maximally_mixed(4)),
            Err(Error::DimMismatch(2, 4))
        ));
    }

    #[test]
    fn evolve_identity_is_noop() {
        let rho = QState::qubit_diag(0.6, 0.4).unwrap();
        let out = evolve_unitary(&rho, &CMatrix::identity(2, 2)).unwrap();
        assert!(state_fidelity(&out, &rho).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn evolve_x_pi_flips_qubit() {
        // R_x(pi) = -i X: acts as a bit flip on populations
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, -1.0),
                c(0.0),
            ],
        );
        let out = evolve_unitary(&QState::ket0(), &u).unwrap();
        assert!(state_fidelity(&out, &QState::ket1()).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn evolve_rejects_non_unitary() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(2.0)]);
        assert!(matches!(
            evolve_unitary(&QState::ket0(), &m),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn fidelity_limits() {
        let rho = QState::qubit_diag(0.6, 0.4).unwrap();
        assert_abs_diff_eq!(state_fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            state_fidelity(&QState::ket0(), &QState::ket1()).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            state_fidelity(&QState::maximally_mixed(2), &QState::ket0()).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn state_validation_catches_bad_trace_and_negativity() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.9), c(0.0), c(0.0), c(0.3)]);
        assert!(QState::new(m).is_err());
        let m = CMatrix::from_row_slice(2, 2, &[c(1.2), c(0.0), c(0.0), c(-0.2)]);
        assert!(QState::new(m).is_err());
    }
}
