//! Blow-ups along returns of a generic word to a fixed target.

use atl::stream::WordStream;
use atl::tangent::{self, MaintechOptions};
use atl::{systems, Direction, Word};

fn main() -> atl::Result<()> {
    let sys = systems::carpet23();
    let mut target = WordStream::periodic(Word(vec![0]));
    let mut generic = WordStream::breadth_first(sys.len());
    let opts = MaintechOptions { tangent: false, ..Default::default() };
    let res = tangent::maintech_tangent(&sys, &mut target, &mut generic, Direction::y_axis(), &opts)?;
    println!("k      r_k       n_k  norm ratio  kernel angle");
    for s in &res.steps {
        println!("{:<2} {:>9.5} {:>9} {:>11.6} {:>13.3e}", s.k, s.r, s.n, s.norm_ratio, s.kernel_angle);
    }
    println!("kernel angles nonincreasing: {}", res.kernel_monotone(2, 1e-9));
    Ok(())
}
