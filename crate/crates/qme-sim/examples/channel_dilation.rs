//! The three equivalent channel representations: Kraus sums, closed-form
//! output states, and a unitary on system + ancilla followed by a partial
//! trace.

use qme_sim::channels::{dilation_unitary_a, dilation_unitary_b};
use qme_sim::qcore::evolve_unitary;
use qme_sim::{
    gibbs_state, kraus_a, kraus_b, omega_factor, partial_trace, phi_of, q_star, state_fidelity,
    tensor_product_states, theta_of, QState, SpinHamiltonianParams, ThermalParams,
};

fn main() {
    let (p, kbt) = (0.75, 2.98);
    let h = SpinHamiltonianParams::new(1.0).unwrap();
    let t = ThermalParams::new(kbt).unwrap();
    let omega = omega_factor(&h, &t);
    let q = q_star(p, omega).unwrap();
    let tanh = (h.h_nu() / (2.0 * kbt)).tanh();
    let rho1 = gibbs_state(&h, &t);

    // Kraus route
    let rho2_k = kraus_a(p, omega).unwrap().apply(&rho1).unwrap();
    let rho3_k = kraus_b(q).unwrap().apply(&rho2_k).unwrap();

    // closed-form route
    let rho2_c = QState::qubit_from_z_coeff((0.5 - p) * tanh).unwrap();
    let rho3_c = QState::qubit_from_z_coeff((p - 0.5) * tanh).unwrap();

    // dilation route: rotate with a fresh ancilla, then trace it out
    let anc = QState::ket0();
    let joint = tensor_product_states(&rho1, &anc).unwrap();
    let u_a = dilation_unitary_a(theta_of(p, omega).unwrap());
    let rho2_d = partial_trace(&evolve_unitary(&joint, &u_a).unwrap(), 0).unwrap();
    let joint = tensor_product_states(&rho2_d, &anc).unwrap();
    let u_b = dilation_unitary_b(phi_of(q).unwrap());
    let rho3_d = partial_trace(&evolve_unitary(&joint, &u_b).unwrap(), 0).unwrap();

    println!("p = {p}, kBT = {kbt} peV, Omega = {omega:.6}, q* = {q:.6}");
    for (label, a, b) in [
        ("rho2: kraus vs closed-form", &rho2_k, &rho2_c),
        ("rho2: kraus vs dilation   ", &rho2_k, &rho2_d),
        ("rho3: kraus vs closed-form", &rho3_k, &rho3_c),
        ("rho3: kraus vs dilation   ", &rho3_k, &rho3_d),
    ] {
        println!("  {label}  fidelity 1 - {:.2e}", 1.0 - state_fidelity(a, b).unwrap());
    }
}
