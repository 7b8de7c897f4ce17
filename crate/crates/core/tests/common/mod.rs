#![allow(dead_code)]

use defectivity::flow::{nonzero_mask, StructureMode};
use defectivity::oracle::random_matrix;
use defectivity::{CMatrix, Mask, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mask with roughly `density` of the entries set, always including the diagonal.
pub fn random_mask(rng: &mut impl Rng, n: usize, density: f64) -> Mask {
    Mask::from_fn(n, n, |i, j| i == j || rng.random_bool(density))
}

pub const MODE_NAMES: [&str; 4] = ["complex", "real", "pattern-complex", "pattern-real"];

/// A random matrix of the right field for mode `which` (index into `MODE_NAMES`),
/// together with the structure mode itself.
pub fn random_problem(rng: &mut impl Rng, which: usize, n: usize) -> (CMatrix, StructureMode) {
    let real = which % 2 == 1;
    let a = random_matrix(rng, n, n, real);
    let mode = match which {
        0 => StructureMode::ComplexFull,
        1 => StructureMode::RealFull,
        2 => StructureMode::ComplexPattern(random_mask(rng, n, 0.6)),
        _ => StructureMode::RealPattern(random_mask(rng, n, 0.6)),
    };
    (a, mode)
}

pub fn grcar_modes() -> (CMatrix, [StructureMode; 4]) {
    let g = defectivity::io::gallery::grcar(6);
    let m = nonzero_mask(&g);
    let modes = [
        StructureMode::ComplexFull,
        StructureMode::RealFull,
        StructureMode::ComplexPattern(m.clone()),
        StructureMode::RealPattern(m),
    ];
    (g, modes)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
