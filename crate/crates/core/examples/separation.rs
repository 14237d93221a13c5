//! Strong separation of the bundled systems.

use atl::ifs::check_strong_separation;
use atl::{systems, Budget};

fn main() -> atl::Result<()> {
    for sys in systems::all_bundled() {
        let rep = check_strong_separation(&sys, 6, 1e-9, &Budget::default())?;
        println!("{:<20} holds={:<5} regime={:?} min_gap={:.3e}", sys.name, rep.holds, rep.regime, rep.min_gap);
    }
    Ok(())
}
