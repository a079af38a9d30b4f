//! Worker-thread pool setup. `OLDB_THREADS` caps the rayon pool; all
//! reductions in the crate are computed in a fixed order, so results are
//! bit-identical for any pool size.

use std::sync::Once;

static INIT: Once = Once::new();

/// Build the global rayon pool once, honouring `OLDB_THREADS` when set.
/// Safe to call from multiple entry points; later calls are no-ops.
pub fn ensure_init() {
    INIT.call_once(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = requested_threads() {
            builder = builder.num_threads(n);
        }
        // An Err here means a pool already exists (e.g. the test harness
        // touched rayon first); that pool is just as good.
        let _ = builder.build_global();
    });
}

fn requested_threads() -> Option<usize> {
    let raw = std::env::var("OLDB_THREADS").ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Some(n),
        _ => None,
    }
}
