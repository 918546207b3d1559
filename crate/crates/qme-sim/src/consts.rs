/// Planck constant in peV·s. All energies in this crate are carried in peV
/// and all times in seconds; this is the one place the conversion lives.
pub const PLANCK_PEV_S: f64 = 4.135667696e-3;

/// h·ν in peV for a frequency given in kHz.
pub fn h_nu_pev(nu_khz: f64) -> f64 {
    PLANCK_PEV_S * nu_khz * 1e3
}

/// Working-substance (13C) / ancilla (1H) scalar coupling constant, Hz.
pub const J_COUPLING_HZ: f64 = 194.65;

/// Default running time of the composed two-channel pulse sequence, seconds.
pub const TAU_CYCLE_DEFAULT: f64 = 7.7e-3;

/// Relaxation times from inversion-recovery / CPMG measurements, seconds.
pub const T1_H: f64 = 11.67;
pub const T1_C: f64 = 22.97;
pub const T2_H: f64 = 1.31;
pub const T2_C: f64 = 2.57;

/// Experimental spin-temperature presets, k_B·T in peV.
pub const KBT_PRESET_1: f64 = 1.88;
pub const KBT_PRESET_2: f64 = 2.98;

/// Working frequency offset, kHz.
pub const NU_DEFAULT_KHZ: f64 = 1.0;
