use std::sync::OnceLock;

use crate::{Error, Result};

/// Default cap on the number of cells in any dense table.
pub const DEFAULT_CELL_CAPACITY: usize = 10_000_000;

/// Cap on `|support(mu)| * |support(nu)|` in the transportation solver.
pub const TRANSPORT_PAIR_CAPACITY: usize = 1_000_000;

static CELL_CAPACITY: OnceLock<usize> = OnceLock::new();

/// The cell cap in force: `CORRLAB_CAPACITY` from the environment if set
/// to a positive integer, otherwise [`DEFAULT_CELL_CAPACITY`].  Read once
/// per process.
pub fn cell_capacity() -> usize {
    *CELL_CAPACITY.get_or_init(|| {
        std::env::var("CORRLAB_CAPACITY")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(DEFAULT_CELL_CAPACITY)
    })
}

pub fn ensure_cells(needed: usize) -> Result<()> {
    let cap = cell_capacity();
    if needed > cap {
        return Err(Error::CapacityExceeded { needed, cap });
    }
    Ok(())
}
