// scratch probe - will be replaced
use std::path::Path;
use clmem::harness::{build_context, run_experiment_in_context, ExperimentConfig};

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset");
    let mut cfg = ExperimentConfig::mnist_5split(&data);
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let tasks: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(5);
    let mbs: usize = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(32);
    cfg.train.epochs = epochs;
    cfg.scenario.num_tasks = tasks;
    cfg.method.memory_batch_size = mbs;
    let ctx = build_context(&cfg).unwrap();
    let t0 = std::time::Instant::now();
    let r = run_experiment_in_context(&cfg, &ctx, seed, None).unwrap();
    println!("epochs={epochs} seed={seed} tasks={tasks} mbs={mbs} acc={:.4} mean_forget={:?} time={:.1}s",
        r.avg_accuracy, r.mean_forgetting, t0.elapsed().as_secs_f64());
    for t in 0..tasks {
        let row: Vec<String> = (0..=t).map(|i| format!("{:.3}", r.accuracy.get(t, i).unwrap())).collect();
        println!("  after task {t}: {}", row.join(" "));
    }
}
