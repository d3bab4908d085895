//! Collisions per second on the reference lattice.

use std::time::Instant;

use lorentz_core::rng::stream;
use lorentz_core::wall::HoleSchedule;
use lorentz_core::{run_trajectory, LorentzConfig};

fn main() {
    let cfg = LorentzConfig::reference();
    let n = 100_000;
    let start = Instant::now();
    let rec = run_trajectory(&mut stream(1, 0), &cfg, &HoleSchedule::no_wall(), n).unwrap();
    let secs = start.elapsed().as_secs_f64();
    println!("{:.0} collisions/s, S_n = {:.3}", n as f64 / secs, rec.s[n]);
}
