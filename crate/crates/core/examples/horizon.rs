//! Prints the certified free-flight bound of the reference lattice.

use lorentz_core::ScattererLattice;

fn main() {
    let lattice = ScattererLattice::reference();
    match lattice.validate_finite_horizon() {
        Ok(bound) => println!("{bound:.10}"),
        Err(e) => eprintln!("{e}"),
    }
}
