//! Domination and irreducibility of the linear parts.

use atl::semigroup::{classify_reducibility, is_dominated};
use atl::systems;

fn main() -> atl::Result<()> {
    for sys in systems::all_bundled() {
        let dom = is_dominated(&sys, 8)?;
        let red = classify_reducibility(&sys.matrices(), 1e-9);
        println!(
            "{:<20} dominated={:<5} tau={:.4} class={:?}",
            sys.name,
            dom.dominated(),
            dom.tau,
            red.class
        );
    }
    Ok(())
}
