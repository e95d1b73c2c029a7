use std::time::Instant;

use fewzero_core::density::{g_eval, g_grad};
use fewzero_core::distribution::d_mc_oracle;
use fewzero_core::RadialPoint;

fn main() {
    let rho3 = RadialPoint::new(vec![0.5, -0.8, 0.2]).unwrap();
    let t0 = Instant::now();
    let v = g_eval(4, &rho3).unwrap();
    println!("g_eval m=3: {v:.6} in {:?}", t0.elapsed());
    let t0 = Instant::now();
    let g = g_grad(4, &rho3).unwrap();
    println!("g_grad m=3: {g:?} in {:?}", t0.elapsed());
    let t0 = Instant::now();
    let est = d_mc_oracle(0.3, &rho3, 1_000_000, 5);
    println!(
        "oracle m=3 1e6: {:.6} +- {:.2e} in {:?}",
        est.value, est.std_err, t0.elapsed()
    );
    let rho1 = RadialPoint::new(vec![0.7]).unwrap();
    let t0 = Instant::now();
    let est = d_mc_oracle(0.2, &rho1, 1_000_000, 5);
    println!(
        "oracle m=1 1e6: {:.6} +- {:.2e} in {:?}",
        est.value, est.std_err, t0.elapsed()
    );
}
