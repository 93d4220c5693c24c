//! Finite-difference derivatives on uniform grids.
//!
//! Interior nodes use central stencils of the grid's accuracy; on line grids
//! the stencil narrows towards the ends and the two end nodes use one-sided
//! second-order formulas. Periodic grids wrap around.

use super::{Grid, Sample};
use crate::error::{ensure, Result};

// (offset, weight) pairs, weights in units of 1/h or 1/h².
const D1_C2: &[(isize, f64)] = &[(-1, -0.5), (1, 0.5)];
const D1_C4: &[(isize, f64)] = &[
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D1_C6: &[(isize, f64)] = &[
    (-3, -1.0 / 60.0),
    (-2, 9.0 / 60.0),
    (-1, -45.0 / 60.0),
    (1, 45.0 / 60.0),
    (2, -9.0 / 60.0),
    (3, 1.0 / 60.0),
];
const D1_LEFT: &[(isize, f64)] = &[(0, -1.5), (1, 2.0), (2, -0.5)];
const D1_RIGHT: &[(isize, f64)] = &[(0, 1.5), (-1, -2.0), (-2, 0.5)];

const D2_C2: &[(isize, f64)] = &[(-1, 1.0), (0, -2.0), (1, 1.0)];
const D2_C4: &[(isize, f64)] = &[
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
const D2_C6: &[(isize, f64)] = &[
    (-3, 2.0 / 180.0),
    (-2, -27.0 / 180.0),
    (-1, 270.0 / 180.0),
    (0, -490.0 / 180.0),
    (1, 270.0 / 180.0),
    (2, -27.0 / 180.0),
    (3, 2.0 / 180.0),
];
const D2_LEFT: &[(isize, f64)] = &[(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)];
const D2_RIGHT: &[(isize, f64)] = &[(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)];

fn central(order: usize, half: usize) -> &'static [(isize, f64)] {
    match (order, half) {
        (1, 1) => D1_C2,
        (1, 2) => D1_C4,
        (1, _) => D1_C6,
        (_, 1) => D2_C2,
        (_, 2) => D2_C4,
        _ => D2_C6,
    }
}

/// Derivative of order 1 or 2 of grid samples.
pub fn differentiate<T: Sample>(grid: &Grid, samples: &[T], order: usize) -> Result<Vec<T>> {
    ensure!(
        order == 1 || order == 2,
        "differentiate supports order 1 or 2, got {order}"
    );
    ensure!(
        samples.len() == grid.len(),
        "sample length {} does not match grid length {}",
        samples.len(),
        grid.len()
    );
    let mut out = vec![T::zero(); samples.len()];
    differentiate_strided(grid, samples, 0, 1, order, &mut out);
    Ok(out)
}

/// Differentiate the `n = grid.len()` samples `data[start + k * stride]`,
/// writing into the same positions of `out`.
pub(crate) fn differentiate_strided<T: Sample>(
    grid: &Grid,
    data: &[T],
    start: usize,
    stride: usize,
    order: usize,
    out: &mut [T],
) {
    let n = grid.len();
    let h = grid.spacing();
    let scale = if order == 1 { 1.0 / h } else { 1.0 / (h * h) };
    let half = grid.stencil().half_width();
    let at = |k: usize| data[start + k * stride];

    let apply = |i: usize, stencil: &[(isize, f64)], wrap: bool| -> T {
        stencil.iter().fold(T::zero(), |acc, &(off, w)| {
            let j = if wrap {
                (i as isize + off).rem_euclid(n as isize) as usize
            } else {
                (i as isize + off) as usize
            };
            acc + at(j) * w
        }) * scale
    };

    if grid.is_periodic() {
        let st = central(order, half);
        for i in 0..n {
            out[start + i * stride] = apply(i, st, true);
        }
        return;
    }

    for i in 0..n {
        let room = i.min(n - 1 - i);
        let value = if room == 0 {
            let st = match (order, i == 0) {
                (1, true) => D1_LEFT,
                (1, false) => D1_RIGHT,
                (_, true) => D2_LEFT,
                (_, false) => D2_RIGHT,
            };
            apply(i, st, false)
        } else {
            apply(i, central(order, room.min(half)), false)
        };
        out[start + i * stride] = value;
    }
}
