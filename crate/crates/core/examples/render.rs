//! Writes an SVG of an attractor to standard output.

use atl::ifs::attractor_cloud;
use atl::{cli, systems, Budget};

fn main() -> atl::Result<()> {
    let sys = systems::diag2();
    let cloud = attractor_cloud(&sys, 12, &Budget::default())?;
    print!("{}", cli::render_svg(&cloud.points, sys.bounding_box, &[], "diag2 at depth 12", None));
    Ok(())
}
