//! Thermal-state preparation and spin-temperature readout for the two
//! experimental presets.

use qme_sim::thermo::{spin_temperature_of, SpinTemperature};
use qme_sim::{
    gibbs_state, omega_factor, von_neumann_entropy, SpinHamiltonianParams, ThermalParams,
};

fn main() {
    let h = SpinHamiltonianParams::new(1.0).unwrap();
    println!("level splitting h*nu = {:.6} peV", h.h_nu());
    println!();
    println!("{:>10} {:>12} {:>12} {:>10} {:>12}", "kBT (peV)", "p0", "p1", "Omega", "S (nats)");
    for kbt in [1.88, 2.98] {
        let t = ThermalParams::new(kbt).unwrap();
        let rho = gibbs_state(&h, &t);
        let m = rho.matrix();
        println!(
            "{:>10.2} {:>12.6} {:>12.6} {:>10.6} {:>12.6}",
            kbt,
            m[(0, 0)].re,
            m[(1, 1)].re,
            omega_factor(&h, &t),
            von_neumann_entropy(&rho)
        );
        match spin_temperature_of(&rho, &h).unwrap() {
            SpinTemperature::Finite(est) => {
                println!("{:>10} inferred spin temperature: {est:.6} peV", "")
            }
            SpinTemperature::Zero => println!("{:>10} ground state", ""),
        }
    }
}
