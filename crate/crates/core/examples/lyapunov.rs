//! Lyapunov exponents, entropy and Lyapunov dimension of the uniform measure.

use atl::ergodic::{self, BernoulliMeasure};
use atl::systems;

fn main() -> atl::Result<()> {
    let sys = systems::dominated3();
    let nu = BernoulliMeasure::uniform(sys.len());
    let est = ergodic::lyapunov(&sys, &nu, 2000, 400, 0)?;
    let h = ergodic::entropy(&nu);
    println!("chi1 = {:.5} ± {:.1e}", est.chi1, est.stderr1);
    println!("chi2 = {:.5} ± {:.1e}", est.chi2, est.stderr2);
    println!("entropy = {h:.5}");
    println!("lyapunov dimension = {:.5}", ergodic::lyapunov_dimension(h, est.chi1, est.chi2)?);
    Ok(())
}
