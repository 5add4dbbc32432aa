//! `sgdsamp gen`: write a synthetic dataset as a LIBSVM file.

use std::path::Path;

use anyhow::{Context, Result};

use crate::dataset::{gen_synthetic, write_libsvm, SyntheticTask};

pub fn run(task: SyntheticTask, n: usize, d: usize, seed: u64, out: &Path) -> Result<()> {
    anyhow::ensure!(n >= 1 && d >= 1, "need n >= 1 and d >= 1");
    let dataset = gen_synthetic(task, n, d, seed);
    write_libsvm(&dataset, out)
        .with_context(|| format!("cannot write dataset to {}", out.display()))?;
    println!(
        "wrote {} dataset: n = {n}, d = {d}, seed = {seed} -> {}",
        task.label(),
        out.display()
    );
    Ok(())
}
