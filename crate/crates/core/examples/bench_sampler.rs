// Temporary micro-bench; removed before release.
use iaml_core::geometry::BBox;
use iaml_core::payoff::PayoffBins;
use iaml_core::sampler::{collect_bins_into, derive_stream, sample_from_bins};
use std::time::Instant;

fn main() {
    let b = BBox::new(0.30, 0.20, 0.55, 0.45).unwrap();
    let calls: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let n: u32 = 10_000;
    let mut bins = PayoffBins::new();
    let t0 = Instant::now();
    let mut acc = 0.0;
    for i in 0..calls {
        let mut rng = derive_stream(1, i as u64, 0, 1);
        collect_bins_into(&mut bins, &b, 0.05, n, &mut rng).unwrap();
        let out = sample_from_bins(&bins, 3.0, &mut rng).unwrap();
        acc += out.x_min();
    }
    let dt = t0.elapsed();
    let per = dt.as_nanos() as f64 / (calls as f64 * n as f64);
    println!("{} calls x {} trials: {:?} ({per:.1} ns/perturb)  [{acc:.1}]", calls, n, dt);
    println!("projected 1e5 calls: {:.1} s", per * 1e9 / 1e9 * 100_000.0 * n as f64 / 1e9);
}
