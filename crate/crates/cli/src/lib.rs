//! Batch commands behind the `segunc` binary.
//!
//! Each command is a plain function taking a config struct so the same code
//! paths are exercised by the binary and by tests.

pub mod compare;
pub mod entropy;
pub mod eval;
pub mod scenario;
pub mod synth;

/// Version of every JSON document the commands write.
pub const SCHEMA_VERSION: u32 = 1;

/// Runs `f` on a dedicated pool of `workers` threads (0 means one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    Ok(pool.install(f))
}

pub(crate) fn write_json<T: serde::Serialize>(
    value: &T,
    path: &std::path::Path,
) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    segunc_core::io::atomic_write(path, &bytes)?;
    Ok(())
}
