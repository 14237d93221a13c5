//! Projection condition along Furstenberg directions.

use atl::geometry::check_projection_condition;
use atl::semigroup::{self, DirectionSet};
use atl::{systems, Budget, Direction};

fn main() -> atl::Result<()> {
    let sys = systems::dominated3();
    let xf = semigroup::estimate_xf(&sys, 10, 32);
    let rep = check_projection_condition(&sys, &xf, 8, &Budget::default())?;
    println!("{}: holds on {} directions: {}", sys.name, xf.len(), rep.holds);

    let gapped = systems::carpet_missing_col();
    let vertical = DirectionSet::from_samples(vec![Direction::y_axis()]);
    let rep = check_projection_condition(&gapped, &vertical, 8, &Budget::default())?;
    println!("{}: holds {}, largest gap {:.4}", gapped.name, rep.holds, rep.max_gap());
    Ok(())
}
