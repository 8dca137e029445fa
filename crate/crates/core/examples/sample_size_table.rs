//! Sufficient sample sizes for α = 0.01 over a grid of correlations and
//! failure probabilities.

use ordsel::gbound::{n_star_optimized, InversionSpec};

fn main() -> Result<(), ordsel::Error> {
    let alpha = 0.01;
    let deltas = [0.01, 0.05, 0.1];
    println!("{:>6} {:>24} {:>24} {:>24}", "rho", "delta=0.01", "delta=0.05", "delta=0.1");
    for rho in [0.99, 0.9, 0.6, 0.3, 0.01] {
        let mut row = format!("{rho:>6}");
        for delta in deltas {
            let spec = InversionSpec::new(alpha, rho, delta)?;
            let cell = match n_star_optimized(&spec)? {
                Some(r) => match r.size.exact_n {
                    Some(n) => format!("{n} (w={:.4})", r.omega.unwrap_or(f64::NAN)),
                    None => format!("10^{:.3} (w={:.4})", r.size.log10_n, r.omega.unwrap_or(f64::NAN)),
                },
                None => "inf".to_string(),
            };
            row.push_str(&format!(" {cell:>24}"));
        }
        println!("{row}");
    }
    Ok(())
}
