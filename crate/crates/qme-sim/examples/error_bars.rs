//! Monte Carlo error bars: Gaussian readout noise propagated through the
//! whole cycle ledger, with seeded, reproducible sampling.

use qme_sim::mc_errors::{estimate_cycle, NoiseSpec};
use qme_sim::CycleConfig;

fn main() {
    let spec = NoiseSpec {
        sigma_mag: 0.01,
        sigma_qst: 0.01,
        n_samples: 2000,
        seed: 42,
    };
    println!(
        "sigma_mag = sigma_qst = {}, {} samples, seed {}",
        spec.sigma_mag, spec.n_samples, spec.seed
    );
    println!("{:>6} {:>22} {:>22} {:>20}", "p", "heat (peV)", "work (peV)", "eta");
    for p in [0.6, 0.75, 0.9, 1.0] {
        let cfg = CycleConfig::ideal(1.0, 2.98, p);
        let est = estimate_cycle(&cfg, &spec).expect("stable estimate");
        println!(
            "{:>6.2} {:>14.5} ± {:<7.5} {:>13.5} ± {:<7.5} {:>12.5} ± {:<7.5}",
            p,
            est.heat_p.mean,
            est.heat_p.std,
            est.work_ext.mean,
            est.work_ext.std,
            est.efficiency.mean,
            est.efficiency.std,
        );
    }
}
