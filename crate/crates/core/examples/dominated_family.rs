//! The three-map dominated family: conditions, slack and a lattice search.

use atl::systems::DominatedParams;

fn main() {
    let p = DominatedParams::default();
    for c in p.conditions() {
        println!("({:<3}) {:<72} slack {:+.4}", c.id, c.statement, c.slack);
    }
    let bad = DominatedParams { lambda: 0.55, ..p };
    match bad.system() {
        Ok(_) => println!("lambda = 0.55 accepted"),
        Err(e) => println!("lambda = 0.55 rejected: {e}"),
    }
    if let Some(found) = DominatedParams::search() {
        println!("first lattice point: {found:?}");
    }
}
