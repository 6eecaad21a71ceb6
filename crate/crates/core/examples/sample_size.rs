//! Number of sampled plans needed for a PF estimate.

use qobench::sampling::{required_sample_size, SamplingConfig};

fn main() -> qobench::Result<()> {
    let base = SamplingConfig::default();
    println!("95% / 0.05: {}", required_sample_size(&base)?);
    for (conf, e) in [(0.90, 0.05), (0.99, 0.05), (0.95, 0.01)] {
        let cfg = SamplingConfig {
            confidence_z: SamplingConfig::z_for_confidence(conf)?,
            precision: e,
            ..base
        };
        println!("{conf} / {e}: {}", required_sample_size(&cfg)?);
    }
    // with a known plan-space size the correction shrinks n
    let small = SamplingConfig {
        population: Some(1000),
        ..base
    };
    println!("95% / 0.05, N=1000: {}", required_sample_size(&small)?);
    Ok(())
}
