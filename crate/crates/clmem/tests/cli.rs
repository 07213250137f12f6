//! End-to-end checks of the command-line surface: subcommands, file
//! outputs, and exit codes (0 success, 1 config error, 2 run failure,
//! 3 i/o error).

use std::path::Path;
use std::process::Command;

fn clmem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clmem"))
}

fn write_quick_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("quick.toml");
    std::fs::write(
        &path,
        r#"
schema_version = 1
name = "cli-quick"
capacity = 30
seeds = [1, 2]
hidden_layers = [12]

[dataset]
kind = "synth"
classes = 3
train_per_class = 20
test_per_class = 8
dim = 6
spread = 0.8
data_seed = 0

[scores]
kind = "estimate"
k_models = 4
subset_ratio = 0.5
hidden_layers = [8]
epochs = 4
learning_rate = 0.05

[scenario]
num_tasks = 3

[method]
kind = "er"
memory_batch_size = 8

[train]
learning_rate = 0.05
momentum = 0.9
batch_size = 8
epochs = 2

[strategy]
kind = "caws"
delta = 0.5

[grid]
strategies = [{ kind = "random" }, { kind = "caws", delta = 0.5 }]
"#,
    )
    .unwrap();
    path
}

#[test]
fn run_produces_outputs_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out = dir.path().join("out");

    let status = clmem()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .arg("--jobs")
        .arg("1")
        .status()
        .unwrap();
    assert!(status.success());

    let results = std::fs::read_to_string(out.join("results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 2); // 2 seeds, single cell
    assert!(out.join("aggregate.csv").exists());
    assert!(out.join("curves.csv").exists());
    // `run` ignores the [grid] section.
    let aggregate = std::fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 2); // header + one cell

    // Snapshot per task per seed.
    let dump = clmem()
        .arg("snapshot-dump")
        .arg(&out)
        .args(["--task", "1", "--seed", "2"])
        .output()
        .unwrap();
    assert!(dump.status.success());
    let text = String::from_utf8(dump.stdout).unwrap();
    assert!(text.contains("class,sample_index,score"), "{text}");
}

#[test]
fn grid_runs_the_declared_axes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out = dir.path().join("grid-out");

    let status = clmem()
        .args(["grid", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .arg("--jobs")
        .arg("1")
        .status()
        .unwrap();
    assert!(status.success());
    let results = std::fs::read_to_string(out.join("results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 4); // 2 strategies x 2 seeds
}

#[test]
fn seeds_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out = dir.path().join("out");

    let status = clmem()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--seeds", "7"])
        .status()
        .unwrap();
    assert!(status.success());
    let results = std::fs::read_to_string(out.join("results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 1);
    assert!(results.contains("\"seed\":7"));
}

#[test]
fn estimate_cscores_writes_csv_and_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out = dir.path().join("scores.csv");

    let status = clmem()
        .args(["estimate-cscores", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("index,score\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 20); // header + samples

    // The emitted file loads back as a valid score source.
    let scored_config = dir.path().join("scored.toml");
    let original = std::fs::read_to_string(&config).unwrap();
    let replaced = original.replace(
        "[scores]\nkind = \"estimate\"\nk_models = 4\nsubset_ratio = 0.5\nhidden_layers = [8]\nepochs = 4\nlearning_rate = 0.05",
        &format!("[scores]\nkind = \"file\"\npath = {:?}", out.to_str().unwrap()),
    );
    assert!(replaced.contains("kind = \"file\""), "replacement failed");
    std::fs::write(&scored_config, replaced).unwrap();
    let status = clmem()
        .args(["run", "--config"])
        .arg(&scored_config)
        .arg("--out")
        .arg(dir.path().join("out2"))
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema_version = 99\n").unwrap();
    let status = clmem()
        .args(["run", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // Missing output directory is a config error too.
    let config = write_quick_config(dir.path());
    let status = clmem()
        .args(["run", "--config"])
        .arg(&config)
        .env_remove("CLMEM_OUT")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn out_env_var_supplies_default_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_quick_config(dir.path());
    let out = dir.path().join("env-out");
    let status = clmem()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--seeds", "1"])
        .env("CLMEM_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("results.jsonl").exists());
}

#[test]
fn snapshot_dump_missing_task_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let status = clmem()
        .arg("snapshot-dump")
        .arg(dir.path())
        .args(["--task", "9"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
