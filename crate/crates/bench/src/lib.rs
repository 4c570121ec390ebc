//! Fixtures shared by the benchmarks.

use robfda::{generate_curves, generate_masks, Dataset, Grid, MissingScheme, ProcessModel};

/// `n` curves from preset `model` on an `m`-point grid, observed on random
/// intervals.
pub fn fixture(model: u32, n: usize, m: usize, seed: u64) -> Dataset {
    let grid = Grid::uniform(m).expect("grid");
    let model = ProcessModel::preset(model).expect("preset");
    let values = generate_curves(&model, n, &grid, seed).expect("curves");
    let scheme = MissingScheme::random_interval(0.3, 0.3).expect("scheme");
    let masks = generate_masks(&scheme, n, &grid, seed ^ 1).expect("masks").masks;
    Dataset::from_rows(grid, values, masks).expect("dataset")
}
