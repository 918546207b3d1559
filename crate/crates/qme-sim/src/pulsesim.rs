//! Two-spin pulse-level backend: compiles each measurement channel into
//! local rotations and J-coupling intervals, propagates with optional T1/T2
//! relaxation, and verifies the induced 13C map against the ideal channel.
//!
//! Qubit ordering matches the rest of the crate: system 13C first, ancilla
//! 1H second. A J-coupling interval of duration t applies
//! exp(−i (πJt/2) σ_z⊗σ_z).

use num_complex::Complex64;
use std::fmt::Write as _;

use crate::channels::{choi_matrix, q_star};
use crate::consts::{J_COUPLING_HZ, TAU_CYCLE_DEFAULT};
use crate::error::{Error, Result};
use crate::qcore::{partial_trace_matrix, CMatrix, QState};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    H,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One program step: an instantaneous local rotation, a free evolution
/// under the scalar coupling, or a gradient dephasing pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseOp {
    Rotation { spin: Spin, axis: Axis, angle: f64 },
    JEvolution { duration: f64 },
    Gradient,
}

impl PulseOp {
    /// Wall-clock duration in seconds. Rotations are instantaneous unless a
    /// finite nutation rate is configured on the sequence.
    pub fn duration(&self, nutation_rate_rad_per_s: Option<f64>) -> f64 {
        match self {
            PulseOp::Rotation { angle, .. } => match nutation_rate_rad_per_s {
                Some(rate) => angle.abs() / rate,
                None => 0.0,
            },
            PulseOp::JEvolution { duration } => *duration,
            PulseOp::Gradient => 0.0,
        }
    }
}

/// Ordered pulse program for the two-spin system.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub ops: Vec<PulseOp>,
    /// rf nutation rate in rad/s; `None` models instantaneous rotations.
    pub nutation_rate_rad_per_s: Option<f64>,
}

impl PulseSequence {
    pub fn new(ops: Vec<PulseOp>) -> Result<Self> {
        for op in &ops {
            match op {
                PulseOp::Rotation { angle, .. } => {
                    if !(*angle > -2.0 * std::f64::consts::PI
                        && *angle <= 2.0 * std::f64::consts::PI)
                    {
                        return Err(Error::BadSequence(format!(
                            "rotation angle {angle} outside (-2pi, 2pi]"
                        )));
                    }
                }
                PulseOp::JEvolution { duration } => {
                    if *duration < 0.0 || !duration.is_finite() {
                        return Err(Error::BadSequence(format!(
                            "negative or non-finite duration {duration}"
                        )));
                    }
                }
                PulseOp::Gradient => {}
            }
        }
        Ok(Self {
            ops,
            nutation_rate_rad_per_s: None,
        })
    }

    pub fn empty() -> Self {
        Self {
            ops: Vec::new(),
            nutation_rate_rad_per_s: None,
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.ops
            .iter()
            .map(|op| op.duration(self.nutation_rate_rad_per_s))
            .sum()
    }

    /// Line-oriented text form: `ROT <spin> <axis> <angle_rad>` |
    /// `JEV <seconds>` | `GRAD`, `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            match op {
                PulseOp::Rotation { spin, axis, angle } => {
                    let s = match spin {
                        Spin::H => "H",
                        Spin::C => "C",
                    };
                    let a = match axis {
                        Axis::X => "x",
                        Axis::Y => "y",
                        Axis::Z => "z",
                    };
                    let _ = writeln!(out, "ROT {s} {a} {angle:.17e}");
                }
                PulseOp::JEvolution { duration } => {
                    let _ = writeln!(out, "JEV {duration:.17e}");
                }
                PulseOp::Gradient => {
                    let _ = writeln!(out, "GRAD");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let bad = |msg: &str| Error::BadSequence(format!("line {}: {msg}", lineno + 1));
            match parts.next() {
                Some("ROT") => {
                    let spin = match parts.next() {
                        Some("H") => Spin::H,
                        Some("C") => Spin::C,
                        _ => return Err(bad("expected spin H or C")),
                    };
                    let axis = match parts.next() {
                        Some("x") => Axis::X,
                        Some("y") => Axis::Y,
                        Some("z") => Axis::Z,
                        _ => return Err(bad("expected axis x, y, or z")),
                    };
                    let angle: f64 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected rotation angle"))?;
                    ops.push(PulseOp::Rotation { spin, axis, angle });
                }
                Some("JEV") => {
                    let duration: f64 = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad("expected duration"))?;
                    ops.push(PulseOp::JEvolution { duration });
                }
                Some("GRAD") => ops.push(PulseOp::Gradient),
                Some(other) => return Err(bad(&format!("unknown op {other}"))),
                None => {}
            }
        }
        Self::new(ops)
    }
}

/// Per-spin relaxation constants. The stationary state of the model is the
/// maximally mixed state on each spin (the high-temperature limit relevant
/// for room-temperature NMR polarizations).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub t1_h: f64,
    pub t1_c: f64,
    pub t2_h: f64,
    pub t2_c: f64,
    pub enabled: bool,
}

impl NoiseModel {
    pub fn new(t1_h: f64, t1_c: f64, t2_h: f64, t2_c: f64, enabled: bool) -> Result<Self> {
        for (t1, t2, name) in [(t1_h, t2_h, "H"), (t1_c, t2_c, "C")] {
            if t1 <= 0.0 || t2 <= 0.0 {
                return Err(Error::InvalidNoise(format!(
                    "relaxation times for {name} must be positive"
                )));
            }
            if t2 > 2.0 * t1 {
                return Err(Error::InvalidNoise(format!(
                    "T2 = {t2} exceeds 2*T1 = {} for spin {name}",
                    2.0 * t1
                )));
            }
        }
        Ok(Self {
            t1_h,
            t1_c,
            t2_h,
            t2_c,
            enabled,
        })
    }

    /// The sodium-formate sample constants.
    pub fn sample_defaults() -> Self {
        use crate::consts::{T1_C, T1_H, T2_C, T2_H};
        Self::new(T1_H, T1_C, T2_H, T2_C, true).expect("sample constants are valid")
    }

    pub fn disabled() -> Self {
        let mut n = Self::sample_defaults();
        n.enabled = false;
        n
    }
}

fn rotation_matrix_2x2(axis: Axis, angle: f64) -> CMatrix {
    let (cos, sin) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    match axis {
        Axis::X => CMatrix::from_row_slice(
            2,
            2,
            &[
                c(cos),
                Complex64::new(0.0, -sin),
                Complex64::new(0.0, -sin),
                c(cos),
            ],
        ),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[c(cos), c(-sin), c(sin), c(cos)]),
        Axis::Z => {
            let e = Complex64::new(0.0, -angle / 2.0).exp();
            CMatrix::from_row_slice(2, 2, &[e, c(0.0), c(0.0), e.conj()])
        }
    }
}

fn rotation_matrix_4x4(spin: Spin, axis: Axis, angle: f64) -> CMatrix {
    let r = rotation_matrix_2x2(axis, angle);
    let id = CMatrix::identity(2, 2);
    match spin {
        Spin::C => r.kronecker(&id),
        Spin::H => id.kronecker(&r),
    }
}

/// exp(−i α σ_z⊗σ_z) with α = πJt/2 for a free evolution of duration t.
fn j_evolution_matrix(duration: f64, j_hz: f64) -> CMatrix {
    let alpha = std::f64::consts::PI * j_hz * duration / 2.0;
    let minus = Complex64::new(0.0, -alpha).exp();
    let plus = minus.conj();
    let mut u = CMatrix::zeros(4, 4);
    u[(0, 0)] = minus;
    u[(1, 1)] = plus;
    u[(2, 2)] = plus;
    u[(3, 3)] = minus;
    u
}

/// Total z angular-momentum coherence order of a computational basis index.
fn coherence_m(index: usize) -> i32 {
    let b1 = ((index >> 1) & 1) as i32;
    let b0 = (index & 1) as i32;
    (1 - 2 * b1) + (1 - 2 * b0)
}

/// Erase matrix elements between basis states of unequal coherence order
/// (spatial averaging over a z-gradient); populations and zero-quantum
/// coherences survive. Idempotent.
pub fn gradient_dephase_matrix(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for i in 0..4 {
        for j in 0..4 {
            if coherence_m(i) != coherence_m(j) {
                out[(i, j)] = c(0.0);
            }
        }
    }
    out
}

pub fn gradient_dephase(rho: &QState) -> Result<QState> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    QState::new(gradient_dephase_matrix(rho.matrix()))
}

const PAULIS: [[[Complex64; 2]; 2]; 4] = {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mone = Complex64::new(-1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mi = Complex64::new(0.0, -1.0);
    [
        [[one, zero], [zero, one]],   // I
        [[zero, one], [one, zero]],   // X
        [[zero, mi], [i, zero]],      // Y
        [[one, zero], [zero, mone]],  // Z
    ]
};

/// Per-spin Markovian relaxation over dt applied to a raw 4×4 matrix:
/// diagonal in the two-spin Pauli basis, each spin contributing a factor
/// 1 (I), e^{−dt/T2} (X, Y) or e^{−dt/T1} (Z). This is amplitude damping
/// toward the maximally mixed state at rate 1/T1 combined with pure
/// dephasing at rate 1/T2 − 1/(2T1), and composes exactly:
/// step(dt1)∘step(dt2) = step(dt1+dt2).
pub fn relaxation_step_matrix(m: &CMatrix, dt: f64, noise: &NoiseModel) -> CMatrix {
    if dt == 0.0 {
        return m.clone();
    }
    let factor = |k: usize, t1: f64, t2: f64| -> f64 {
        match k {
            0 => 1.0,
            1 | 2 => (-dt / t2).exp(),
            _ => (-dt / t1).exp(),
        }
    };
    let pauli = |k: usize, r: usize, s: usize| PAULIS[k][r][s];
    let mut out = CMatrix::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            // coefficient of P_a (C) ⊗ P_b (H): tr[(P_a⊗P_b) m] / 4
            let mut coeff = Complex64::new(0.0, 0.0);
            for r in 0..2 {
                for s in 0..2 {
                    for rp in 0..2 {
                        for sp in 0..2 {
                            coeff += pauli(a, r, rp) * pauli(b, s, sp) * m[(2 * rp + sp, 2 * r + s)];
                        }
                    }
                }
            }
            coeff *= 0.25 * factor(a, noise.t1_c, noise.t2_c) * factor(b, noise.t1_h, noise.t2_h);
            if coeff.norm() == 0.0 {
                continue;
            }
            for r in 0..2 {
                for s in 0..2 {
                    for rp in 0..2 {
                        for sp in 0..2 {
                            out[(2 * r + s, 2 * rp + sp)] += coeff * pauli(a, r, rp) * pauli(b, s, sp);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn relaxation_step(rho: &QState, dt: f64, noise: &NoiseModel) -> Result<QState> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    if dt < 0.0 {
        return Err(Error::InvalidNoise(format!("negative dt {dt}")));
    }
    QState::new(relaxation_step_matrix(rho.matrix(), dt, noise))
}

/// Linear propagation of an arbitrary 4×4 matrix through the sequence.
/// Each op is followed by relaxation over its own duration when noise is
/// enabled.
pub fn propagate_matrix(seq: &PulseSequence, m: &CMatrix, noise: &NoiseModel) -> CMatrix {
    let mut state = m.clone();
    for op in &seq.ops {
        state = match op {
            PulseOp::Rotation { spin, axis, angle } => {
                let u = rotation_matrix_4x4(*spin, *axis, *angle);
                &u * state * u.adjoint()
            }
            PulseOp::JEvolution { duration } => {
                let u = j_evolution_matrix(*duration, J_COUPLING_HZ);
                &u * state * u.adjoint()
            }
            PulseOp::Gradient => gradient_dephase_matrix(&state),
        };
        if noise.enabled {
            let dt = op.duration(seq.nutation_rate_rad_per_s);
            if dt > 0.0 {
                state = relaxation_step_matrix(&state, dt, noise);
            }
        }
    }
    state
}

/// Propagate a two-qubit state through the sequence.
pub fn simulate(seq: &PulseSequence, rho: &QState, noise: &NoiseModel) -> Result<QState> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    QState::new(propagate_matrix(seq, rho.matrix(), noise))
}

#[derive(Debug, Clone, Copy)]
enum BlockKind {
    /// exp(−i α X_C ⊗ Y_H)
    Xy,
    /// exp(−i α Y_C ⊗ X_H)
    Yx,
}

/// Rotation-conjugated ZZ interval implementing exp(−i α G) for the block's
/// two-spin generator G. Negative α is absorbed by flipping the sign of the
/// 13C pre/post rotations (Z → −X or Z → −Y under the flipped conjugation).
fn interaction_block(kind: BlockKind, alpha: f64) -> Vec<PulseOp> {
    if alpha.abs() < 1e-15 {
        return Vec::new();
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let sign = if alpha >= 0.0 { 1.0 } else { -1.0 };
    let duration = 2.0 * alpha.abs() / (std::f64::consts::PI * J_COUPLING_HZ);
    let (c_axis, c_angle, h_axis, h_angle) = match kind {
        BlockKind::Xy => (Axis::Y, sign * half_pi, Axis::X, -half_pi),
        BlockKind::Yx => (Axis::X, -sign * half_pi, Axis::Y, half_pi),
    };
    vec![
        PulseOp::Rotation {
            spin: Spin::C,
            axis: c_axis,
            angle: c_angle,
        },
        PulseOp::Rotation {
            spin: Spin::H,
            axis: h_axis,
            angle: h_angle,
        },
        PulseOp::JEvolution { duration },
        PulseOp::Rotation {
            spin: Spin::C,
            axis: c_axis,
            angle: -c_angle,
        },
        PulseOp::Rotation {
            spin: Spin::H,
            axis: h_axis,
            angle: -h_angle,
        },
    ]
}

/// Sequence implementing the dilation unitary of 𝓜ᵃ(θ):
/// exp(−i(θ/4)(X⊗Y)) · exp(−i(θ/4)(Y⊗X)).
pub fn compile_channel_a(theta: f64) -> Result<PulseSequence> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidStrength(format!("theta = {theta}")));
    }
    let mut ops = interaction_block(BlockKind::Xy, theta / 4.0);
    ops.extend(interaction_block(BlockKind::Yx, theta / 4.0));
    PulseSequence::new(ops)
}

/// Sequence implementing the dilation unitary of 𝓜ᵇ(φ):
/// exp(−i(φ/4)(X⊗Y)) · exp(+i(φ/4)(Y⊗X)).
pub fn compile_channel_b(phi: f64) -> Result<PulseSequence> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::InvalidStrength(format!("phi = {phi}")));
    }
    let mut ops = interaction_block(BlockKind::Xy, phi / 4.0);
    ops.extend(interaction_block(BlockKind::Yx, -phi / 4.0));
    PulseSequence::new(ops)
}

/// Effective angles for the single-shot two-channel sequence.
///
/// A fresh-ancilla composition 𝓜ᵇ∘𝓜ᵃ cannot be realized exactly by one
/// unitary on system plus a single reused ancilla (the composite map has
/// Kraus rank above two). The shared-ancilla sequence instead uses angles
/// chosen so the engine input ρ⁽¹⁾ ⊗ |0⟩⟨0| maps exactly to the ideal
/// post-cycle state ρ⁽³⁾: the work stroke keeps φ = arccos(1−2q*), and the
/// heating angle is re-solved from the target populations.
fn composed_angles(p: f64, omega: f64) -> Result<(f64, f64)> {
    let q = q_star(p, omega)?;
    let r0 = 1.0 / (2.0 - omega);
    let r1 = 1.0 - r0;
    let tanh = omega / (2.0 - omega);
    let rho3_p0 = 0.5 + (p - 0.5) * tanh;
    let c0 = ((rho3_p0 - r1 * q) / r0).clamp(0.0, 1.0);
    let theta_eff = 2.0 * c0.sqrt().acos();
    let phi_eff = 2.0 * q.sqrt().asin();
    Ok((theta_eff, phi_eff))
}

/// Single optimized sequence for the sequential channels 𝓜ᵃ then 𝓜ᵇ,
/// with the work-stroke strength tied to p by the isentropy condition.
/// Commuting interaction terms are merged, so the program is strictly
/// shorter than concatenating the two single-channel sequences; a spin-echo
/// delay pads the total duration to `tau_target` (default 7.7 ms).
pub fn compile_composed_padded(p: f64, omega: f64, tau_target: f64) -> Result<PulseSequence> {
    let (theta, phi) = composed_angles(p, omega)?;
    let mut ops = interaction_block(BlockKind::Xy, (theta + phi) / 4.0);
    ops.extend(interaction_block(BlockKind::Yx, (theta - phi) / 4.0));
    let seq = PulseSequence::new(ops)?;
    let pad = tau_target - seq.total_duration();
    let mut ops = seq.ops;
    if pad > 1e-12 {
        // ZZ-refocused delay: JEV(pad/2) · pi pulse on C · JEV(pad/2) · pi
        // pulse on C is the identity map up to a global phase.
        ops.push(PulseOp::JEvolution { duration: pad / 2.0 });
        ops.push(PulseOp::Rotation {
            spin: Spin::C,
            axis: Axis::X,
            angle: std::f64::consts::PI,
        });
        ops.push(PulseOp::JEvolution { duration: pad / 2.0 });
        ops.push(PulseOp::Rotation {
            spin: Spin::C,
            axis: Axis::X,
            angle: std::f64::consts::PI,
        });
    }
    PulseSequence::new(ops)
}

pub fn compile_composed(p: f64, omega: f64) -> Result<PulseSequence> {
    compile_composed_padded(p, omega, TAU_CYCLE_DEFAULT)
}

/// Choi matrix of the 13C map induced by the sequence with the ancilla
/// prepared in |0⟩⟨0|.
pub fn effective_channel(seq: &PulseSequence, noise: &NoiseModel) -> Result<CMatrix> {
    let anc = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    choi_matrix(|m| {
        let joint = m.kronecker(&anc);
        partial_trace_matrix(&propagate_matrix(seq, &joint, noise), 0)
    })
}
