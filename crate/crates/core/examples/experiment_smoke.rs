//! A reduced knapsack sweep: SAA against row generation and the distorted
//! sample, written to CSV and SVG under `target/experiment_smoke`.

use std::path::Path;

use wdro::experiments::{run_experiment, ExperimentConfig, Method};

fn main() -> wdro::Result<()> {
    let config = ExperimentConfig {
        n: 20,
        sample_size: 10,
        samples: 3,
        alpha: 0.2,
        epsilon_grid: vec![0.01, 0.02, 0.05, 0.1],
        mc_size: 10_000,
        ..ExperimentConfig::exp1(7)
    };
    let result = run_experiment(&config, None)?;
    for s in 0..config.samples {
        let saa = result.saa_q90(s).unwrap_or(f64::NAN);
        let best = |m| {
            result
                .curve(s, m)
                .into_iter()
                .fold(f64::INFINITY, |acc, (_, q)| acc.min(q))
        };
        println!(
            "sample {s}: SAA q90 {saa:.4}, best RowGen q90 {:.4}, best Distort q90 {:.4}",
            best(Method::RowGen),
            best(Method::Distort)
        );
    }
    for path in result.write_outputs(Path::new("target/experiment_smoke"), false)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
