//! Seeded band-limited random fields for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real field built from modes with |n| <= `max_mode` on every axis, scaled
/// so its largest sample has magnitude `amplitude`.
pub fn band_limited<R: Rng>(grid: &Grid, max_mode: usize, amplitude: f64, rng: &mut R) -> Vec<f64> {
    let m = max_mode as i64;
    let modes: Vec<Vec<i64>> = match grid.dim() {
        1 => (0..=m).map(|a| vec![a]).collect(),
        _ => (0..=m)
            .flat_map(|a| (-m..=m).map(move |b| vec![a, b]))
            .filter(|v| v[0] > 0 || v[1] >= 0)
            .collect(),
    };
    let coords: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.coordinates(a)).collect();
    let mut f = vec![0.0; grid.len()];
    for mode in &modes {
        if mode.iter().all(|&v| v == 0) {
            continue;
        }
        let (c, s): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for (i, fi) in f.iter_mut().enumerate() {
            let mut arg = 0.0;
            for (a, &n) in mode.iter().enumerate() {
                let ax = grid.axis(a);
                arg += 2.0 * std::f64::consts::PI * n as f64 / ax.length * coords[a][i];
            }
            *fi += c * arg.cos() + s * arg.sin();
        }
    }
    let peak = crate::max_abs(&f);
    if peak > 0.0 {
        f.iter_mut().for_each(|v| *v *= amplitude / peak);
    }
    f
}
