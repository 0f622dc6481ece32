//! Worker pools for independent Monte-Carlo tasks.

use crate::error::{Error, Result};

/// Runs `f` inside a rayon pool with `workers` threads (`None` uses the
/// global default). Results collected with indexed parallel iterators keep
/// their input order, so aggregation is schedule independent.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Config("worker count must be positive".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
