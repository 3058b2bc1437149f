#![allow(dead_code)]

use dtc_core::{Atom, DensityPiece, KernelModel, MixedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_kernel(rng: &mut ChaCha8Rng) -> KernelModel {
    match rng.random_range(0..3) {
        0 => KernelModel::lognormal(rng.random_range(-0.5..0.5), rng.random_range(0.1..1.5)),
        1 => {
            let a = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.05..1.0) };
            KernelModel::uniform(a, a + rng.random_range(0.2..2.0))
        }
        _ => KernelModel::shifted_exponential(
            if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.05..1.0) },
            rng.random_range(0.5..3.0),
        ),
    }
    .unwrap()
}

fn sorted_distinct(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn split(rng: &mut ChaCha8Rng, n: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s * total).collect()
}

/// Nonnegative polynomial on `[lo, hi]` with degree ≤ 3 and the given mass.
fn piece(rng: &mut ChaCha8Rng, lo: f64, hi: f64, mass: f64) -> DensityPiece {
    // nonnegative combination of 1, z, z², (1−z)³ stays nonnegative on [0,1]
    let (w0, w1, w2, w3) = (
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
    );
    let raw = [w0 + w3, w1 - 3.0 * w3, w2 + 3.0 * w3, -w3];
    let anti = |z: f64| raw[0] * z + raw[1] * z * z / 2.0 + raw[2] * z.powi(3) / 3.0 + raw[3] * z.powi(4) / 4.0;
    let scale = mass / (anti(hi) - anti(lo));
    DensityPiece {
        lo,
        hi,
        coef: raw.iter().map(|c| c * scale).collect(),
    }
}

/// Random atomic or mixed measure whose support lies in `[lo, 1]`.
pub fn random_measure(rng: &mut ChaCha8Rng, lo: f64) -> MixedMeasure {
    let mixed = rng.random_bool(0.5);
    let n_atoms = rng.random_range(1..=4);
    let locs = sorted_distinct(rng, n_atoms, lo.max(0.01), 0.99);
    let atom_total = if mixed { rng.random_range(0.2..0.8) } else { 1.0 };
    let atom_total = if locs.is_empty() { 0.0 } else { atom_total };
    let masses = split(rng, locs.len(), atom_total);
    let atoms = locs
        .into_iter()
        .zip(masses)
        .map(|(loc, mass)| Atom { loc, mass })
        .collect();
    let mut density = Vec::new();
    if mixed || atom_total < 1.0 {
        let rest = 1.0 - atom_total;
        if rng.random_bool(0.5) {
            density.push(piece(rng, lo, 1.0, rest));
        } else {
            let cut = rng.random_range(lo + 0.05..0.95);
            let upper = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(cut + 0.01..1.0) };
            let share = rng.random_range(0.2..0.8);
            density.push(piece(rng, lo, cut, rest * share));
            density.push(piece(rng, cut, upper, rest * (1.0 - share)));
        }
    }
    MixedMeasure::new(atoms, density).expect("generator builds valid measures")
}

/// Atom-free measure with one to three polynomial pieces covering `[0, 1]`.
pub fn random_density_measure(rng: &mut ChaCha8Rng) -> MixedMeasure {
    let n = rng.random_range(1..=3);
    let mut edges = vec![0.0];
    edges.extend(sorted_distinct(rng, n - 1, 0.05, 0.95));
    edges.push(1.0);
    let masses = split(rng, edges.len() - 1, 1.0);
    let density = edges
        .windows(2)
        .zip(masses)
        .map(|(w, mass)| piece(rng, w[0], w[1], mass))
        .collect();
    MixedMeasure::new(Vec::new(), density).expect("generator builds valid measures")
}
