//! How each population strategy samples the score distribution. One class,
//! 200 scored samples, quota 20: prints which score ranges every strategy
//! keeps, then exports a snapshot CSV.
//!
//! ```bash
//! cargo run --release --example buffer_anatomy
//! ```

use std::collections::BTreeMap;

use clmem::memory::{MemoryBuffer, MemoryItem, Strategy};
use clmem::rng;
use rand::Rng;

fn histogram(items: &[MemoryItem]) -> String {
    let mut bins = [0usize; 10];
    for it in items {
        bins[((it.score * 10.0) as usize).min(9)] += 1;
    }
    bins.iter()
        .enumerate()
        .map(|(i, &n)| format!("[{:.1},{:.1}):{n:>2}", i as f64 / 10.0, (i + 1) as f64 / 10.0))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> clmem::Result<()> {
    // Scores skewed to the top, like an easy dataset: most samples are
    // consistently learned, a long tail is not.
    let mut score_rng = rng::stream(0, "anatomy");
    let pool: Vec<MemoryItem> = (0..200)
        .map(|index| {
            let u: f64 = score_rng.gen();
            MemoryItem {
                index,
                score: 1.0 - u * u, // density rises towards 1.0
            }
        })
        .collect();

    let strategies = [
        Strategy::Random,
        Strategy::HighC,
        Strategy::LowC,
        Strategy::Cobs { num_bins: 5 },
        Strategy::Caws { delta: 0.7 },
    ];

    println!("200 samples, quota 20, scores skewed towards 1.0\n");
    for strategy in strategies {
        let mut buffer = MemoryBuffer::new(20, strategy)?;
        let mut rng = rng::stream(42, "select");
        buffer.populate_task(&BTreeMap::from([(0usize, pool.clone())]), &mut rng)?;
        println!("{:<18}{}", clmem::harness::strategy_label(&strategy), histogram(buffer.class_items(0)));
    }

    let mut buffer = MemoryBuffer::new(20, Strategy::Caws { delta: 0.7 })?;
    buffer.populate_task(&BTreeMap::from([(0usize, pool)]), &mut rng::stream(42, "select"))?;
    let out = std::env::temp_dir().join("clmem-buffer-anatomy.csv");
    buffer.write_snapshot(&out)?;
    println!("\nsnapshot written to {}", out.display());
    Ok(())
}
