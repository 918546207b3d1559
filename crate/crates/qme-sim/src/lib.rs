//! Simulator and analysis toolkit for a measurement-powered three-stroke
//! quantum heat engine on a single spin, with an ideal Kraus backend, a
//! two-spin NMR pulse-sequence backend with relaxation, Monte Carlo error
//! propagation, and a small CLI.

pub mod channels;
pub mod cli;
pub mod consts;
pub mod cycle;
pub mod error;
pub mod mc_errors;
pub mod pulsesim;
pub mod qcore;
pub mod thermo;

pub use channels::{
    choi_matrix, choi_of_channel, dilated_map, dilation_unitary_a, dilation_unitary_b, kraus_a,
    kraus_b, phi_of, process_fidelity, q_star, theta_of, KrausChannel, StrengthParams,
};
pub use consts::{h_nu_pev, J_COUPLING_HZ, PLANCK_PEV_S, TAU_CYCLE_DEFAULT};
pub use cycle::{
    efficiency, extracted_power, heat_absorbed, range_grid, run_cycle, sweep, work_extracted,
    Backend, CycleConfig, CycleReport, SweepRow,
};
pub use error::{Error, Result};
pub use mc_errors::{estimate, estimate_cycle, perturb_state, EstimateWithError, NoiseSpec};
pub use pulsesim::{
    compile_channel_a, compile_channel_b, compile_composed, compile_composed_padded,
    effective_channel, simulate, Axis, NoiseModel, PulseOp, PulseSequence, Spin,
};
pub use qcore::{
    partial_trace, state_fidelity, tensor_product_states, von_neumann_entropy, QState,
};
pub use thermo::{
    gibbs_state, omega_factor, spin_temperature_of, SpinHamiltonianParams, SpinTemperature,
    ThermalParams,
};
