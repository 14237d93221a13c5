//! Box and Assouad dimension estimates for a Bedford-McMullen carpet.

use atl::dimension::{self, BoxOptions, DirectOptions, FormulaOptions};
use atl::{semigroup, systems};

fn main() -> atl::Result<()> {
    let sys = systems::carpet23();
    let boxd = dimension::box_dimension(&sys, &BoxOptions::default())?;
    let direct = dimension::assouad_direct(&sys, &DirectOptions { samples: 16, ..Default::default() })?;
    let xf = semigroup::estimate_xf(&sys, 10, 32);
    let formula = dimension::assouad_formula(&sys, &xf, &FormulaOptions { projection_holds: Some(true), ..Default::default() })?;

    println!("box     {:.4}  (exact {:.4})", boxd.value, (2f64.powf(2f64.ln() / 3f64.ln()) + 1.0).log2());
    println!("direct  {:.4}", direct.value);
    println!("formula {:.4}  (exact {:.4})", formula.value, 1.0 + 2f64.ln() / 3f64.ln());
    print!("{}", direct.table_csv());
    Ok(())
}
