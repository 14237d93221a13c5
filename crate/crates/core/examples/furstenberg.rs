//! Furstenberg directions and a stationarity check.

use atl::ergodic::{self, BernoulliMeasure};
use atl::semigroup;
use atl::systems;

fn main() -> atl::Result<()> {
    let sys = systems::dominated3();
    let nu = BernoulliMeasure::uniform(sys.len());
    let sample = ergodic::furstenberg_sample(&sys, &nu, 64, 2000, 0)?;
    let st = ergodic::check_stationarity(&sys, &nu, &sample.directions, &ergodic::trig_battery(4))?;
    let (lo, hi) = sample
        .directions
        .iter()
        .map(|d| d.angle)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
    println!("angles in [{lo:.4}, {hi:.4}], stationarity discrepancy {:.2e}", st.max_discrepancy);

    let xf = semigroup::estimate_xf(&sys, 10, 32);
    println!("X_F: {} directions within {:.2e}", xf.len(), xf.radius);
    Ok(())
}
