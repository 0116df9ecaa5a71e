//! Simulate a periodically correlated series and inspect its second-order
//! structure phase by phase.
//!
//! ```sh
//! cargo run --release --example simulate_series
//! ```

use apc_spectra::models::PeriodicMAModel;

fn main() {
    let model = PeriodicMAModel::pma1(4).unwrap();
    let n = 2000;
    let x = model.simulate(n, 42).unwrap();

    println!("simulated {n} samples of a period-4 moving-average model (seed 42)");
    println!("first ten: {:?}", &x.samples()[..10]);

    // The variance cycles with the phase t mod 4; compare the sample
    // variance per phase with the exact model autocovariance.
    println!("\nphase | sample variance | exact B(t, 0)");
    for phase in 0..4i64 {
        let vals: Vec<f64> = (0..n)
            .filter(|&i| x.absolute_index(i).rem_euclid(4) == phase)
            .map(|i| x.samples()[i])
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
        println!(
            "  {phase}   |     {var:8.3}    |   {:8.3}",
            model.autocovariance(phase, 0)
        );
    }

    // Blocks are views with shifted absolute time, the shape subsampling
    // relies on.
    let block = x.block(100, 500).unwrap();
    println!(
        "\nblock(100, 500): start_index {} (absolute times {}..{})",
        block.start_index(),
        block.absolute_index(0),
        block.absolute_index(block.len() - 1)
    );
}
