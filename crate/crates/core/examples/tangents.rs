//! Tangent sets at random points and their comb structure.

use atl::ergodic::BernoulliMeasure;
use atl::geometry::comb_fit;
use atl::systems;
use atl::tangent::{self, TangentOptions};

fn main() -> atl::Result<()> {
    let sys = systems::dominated3();
    let nu = BernoulliMeasure::uniform(sys.len());
    let diam = sys.bounding_box.diameter();
    let scales: Vec<f64> = [24, 30, 36].iter().map(|&e| diam * 0.5f64.powi(e)).collect();
    for i in 0..5 {
        let base = tangent::random_base(&sys, &nu, 0, i)?;
        let opts = TangentOptions { theta1: Some(base.theta1), ..Default::default() };
        let seq = tangent::tangent_sequence(&sys, base.point, &scales, &opts)?;
        let last = seq.tangents.last().expect("one tangent per scale");
        match comb_fit(&tangent::rotate_to_comb(last)?, 0.05) {
            Some(c) => println!("base {i}: {:?} comb, {} teeth, fit {:.3}", c.variant, c.teeth_positions.len(), c.fit_distance),
            None => println!("base {i}: no comb"),
        }
    }
    Ok(())
}
