//! Sweep the measurement strength for both temperature presets and print
//! the efficiency and power curves.

use qme_sim::{range_grid, sweep, CycleConfig};

fn main() {
    let grid = range_grid(0.55, 1.0, 0.05).expect("valid range");
    let base = CycleConfig::ideal(1.0, 2.98, 0.75);
    let rows = sweep(&grid, &[1.88, 2.98], &base);

    println!("{:>6} {:>8} {:>10} {:>10} {:>10} {:>12}", "p", "kBT", "heat", "work", "eta", "power");
    for row in &rows {
        let r = row.report.as_ref().expect("engine regime");
        println!(
            "{:>6.2} {:>8.2} {:>10.5} {:>10.5} {:>10.5} {:>12.3}",
            row.p, row.kbt_pev, r.heat_p, r.work_ext, r.efficiency, r.power_ext
        );
    }
    println!();
    println!("efficiency is temperature-independent; heat, work, and power scale with tanh(h nu / 2 kBT)");
}
