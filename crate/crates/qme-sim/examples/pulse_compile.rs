//! Compile the measurement channels to an NMR pulse program, print the
//! program text, and verify the induced channel against the ideal one,
//! with and without relaxation.

use qme_sim::pulsesim::NoiseModel;
use qme_sim::{
    choi_of_channel, compile_channel_a, compile_composed, effective_channel, kraus_a,
    process_fidelity, theta_of,
};

fn main() {
    let (p, omega) = (0.75, 0.7503781114143707);
    let theta = theta_of(p, omega).unwrap();

    let seq = compile_channel_a(theta).unwrap();
    println!("heating channel at theta = {theta:.6} rad compiles to:");
    print!("{}", seq.to_text());

    let ideal = choi_of_channel(&kraus_a(p, omega).unwrap()).unwrap();
    let clean = effective_channel(&seq, &NoiseModel::disabled()).unwrap();
    let noisy = effective_channel(&seq, &NoiseModel::sample_defaults()).unwrap();
    println!();
    println!(
        "process fidelity vs ideal: noiseless 1 - {:.2e}, with T1/T2 {:.6}",
        1.0 - process_fidelity(&clean, &ideal).unwrap(),
        process_fidelity(&noisy, &ideal).unwrap()
    );

    let composed = compile_composed(p, omega).unwrap();
    println!();
    println!(
        "full-cycle sequence: {} ops, padded to {:.2} ms with a refocused delay",
        composed.ops.len(),
        composed.total_duration() * 1e3
    );
}
