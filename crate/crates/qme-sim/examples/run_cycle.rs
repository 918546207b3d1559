//! Single engine cycle: prepare the thermal state, apply both measurement
//! channels, and print the full energy/entropy ledger.

use qme_sim::{run_cycle, CycleConfig};

fn main() {
    let cfg = CycleConfig::ideal(1.0, 2.98, 0.75);
    let r = run_cycle(&cfg).expect("valid configuration");

    println!("three-stroke cycle at p = {}, kBT = {} peV", cfg.p, cfg.kbt_pev);
    println!("  stroke populations:");
    for (label, rho) in [("rho1", &r.rho1), ("rho2", &r.rho2), ("rho3", &r.rho3)] {
        let m = rho.matrix();
        println!("    {label}: diag({:.5}, {:.5})", m[(0, 0)].re, m[(1, 1)].re);
    }
    println!("  heat absorbed     {:+.6} peV", r.heat_p);
    println!("  work extracted    {:+.6} peV", r.work_ext);
    println!("  heat to cold bath {:+.6} peV", r.heat_cold);
    println!("  dS heating stroke {:+.6} nats", r.ds_a);
    println!("  dS work stroke    {:+.6e} nats (isentropic)", r.ds_b);
    println!("  efficiency        {:.6} (law: 2 - 1/p = {:.6})", r.efficiency, 2.0 - 1.0 / cfg.p);
    println!("  extracted power   {:.3} peV/s over {} ms", r.power_ext, cfg.tau_cycle * 1e3);
}
