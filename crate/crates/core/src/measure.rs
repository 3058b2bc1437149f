//! Probability measures on `[0,1]`: finitely many atoms plus a piecewise
//! polynomial density.
//!
//! Tail masses `m([c,1])` are evaluated exactly: atoms through a suffix sum and
//! density pieces through their antiderivatives. Near `c = 1` the density part
//! is integrated in the reflected variable `t = 1 − z` so that tails of length
//! `1e−18` keep full relative precision.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::TailPoint;

/// Total-mass tolerance for a valid measure.
pub const MASS_TOL: f64 = 1e-12;
/// Atoms lighter than this are rejected as degenerate.
pub const MIN_ATOM_MASS: f64 = 1e-14;
/// Highest admissible polynomial degree of a density piece.
pub const MAX_DEGREE: usize = 3;

const NEGATIVE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub loc: f64,
    pub mass: f64,
}

/// Density `Σ coef[j]·z^j` on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub coef: Vec<f64>,
}

impl DensityPiece {
    pub fn eval(&self, z: f64) -> f64 {
        horner(&self.coef, z)
    }

    fn antiderivative(&self, z: f64) -> f64 {
        antiderivative(&self.coef, z)
    }

    /// `∫_a^b` of this piece, with `[a, b]` clipped to the piece.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if b <= a {
            0.0
        } else {
            self.antiderivative(b) - self.antiderivative(a)
        }
    }

    /// Location and value of the minimum over `[lo, hi]`.
    fn minimum(&self) -> (f64, f64) {
        let mut points = vec![self.lo, self.hi];
        let c = |j: usize| self.coef.get(j).copied().unwrap_or(0.0);
        // p'(z) = c1 + 2 c2 z + 3 c3 z²
        let (a, b, k) = (3.0 * c(3), 2.0 * c(2), c(1));
        if a != 0.0 {
            let disc = b * b - 4.0 * a * k;
            if disc >= 0.0 {
                let r = disc.sqrt();
                points.push((-b + r) / (2.0 * a));
                points.push((-b - r) / (2.0 * a));
            }
        } else if b != 0.0 {
            points.push(-k / b);
        }
        points
            .into_iter()
            .filter(|z| z.is_finite() && *z >= self.lo && *z <= self.hi)
            .map(|z| (z, self.eval(z)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((self.lo, self.eval(self.lo)))
    }
}

fn horner(coef: &[f64], z: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

fn antiderivative(coef: &[f64], z: f64) -> f64 {
    coef.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (j, &c)| acc * z + c / (j + 1) as f64)
        * z
}

/// Coefficients of `p(1 − t)` as a polynomial in `t`.
fn reflect(coef: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; coef.len()];
    for (j, &c) in coef.iter().enumerate() {
        let mut binom = 1.0;
        for (i, slot) in out.iter_mut().enumerate().take(j + 1) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            *slot += c * binom * sign;
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
    }
    out
}

/// A single defect found by [`MeasureSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TotalMass { total: f64 },
    AtomLocation { index: usize, loc: f64 },
    AtomMass { index: usize, mass: f64 },
    AtomOrder { index: usize, loc: f64 },
    PieceBounds { index: usize, lo: f64, hi: f64 },
    PieceDegree { index: usize, degree: usize },
    PieceOverlap { index: usize, at: f64 },
    NegativeDensity { index: usize, at: f64, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TotalMass { total } => write!(f, "total mass {total} differs from 1"),
            Violation::AtomLocation { index, loc } => {
                write!(f, "atom {index} at {loc} lies outside [0,1]")
            }
            Violation::AtomMass { index, mass } => {
                write!(f, "atom {index} has mass {mass}, expected a value in [{MIN_ATOM_MASS:e}, 1]")
            }
            Violation::AtomOrder { index, loc } => {
                write!(f, "atom {index} at {loc} does not strictly follow the previous atom")
            }
            Violation::PieceBounds { index, lo, hi } => {
                write!(f, "density piece {index} has bounds [{lo}, {hi}] not inside [0,1]")
            }
            Violation::PieceDegree { index, degree } => {
                write!(f, "density piece {index} has degree {degree} > {MAX_DEGREE}")
            }
            Violation::PieceOverlap { index, at } => {
                write!(f, "density piece {index} overlaps its predecessor at {at}")
            }
            Violation::NegativeDensity { index, at, value } => {
                write!(f, "density piece {index} is negative at {at} (value {value})")
            }
        }
    }
}

/// Unvalidated measure description, the JSON wire form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub density: Vec<DensityPiece>,
}

impl MeasureSpec {
    /// Lists every defect; an empty list means the spec describes a probability measure.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut total = 0.0;
        for (index, a) in self.atoms.iter().enumerate() {
            if !(a.loc.is_finite() && (0.0..=1.0).contains(&a.loc)) {
                out.push(Violation::AtomLocation { index, loc: a.loc });
            }
            if !(a.mass.is_finite() && a.mass >= MIN_ATOM_MASS && a.mass <= 1.0) {
                out.push(Violation::AtomMass { index, mass: a.mass });
            }
            if index > 0 && !(a.loc > self.atoms[index - 1].loc) {
                out.push(Violation::AtomOrder { index, loc: a.loc });
            }
            if a.mass.is_finite() {
                total += a.mass;
            }
        }

        let mut order: Vec<usize> = (0..self.density.len()).collect();
        order.sort_by(|&i, &j| self.density[i].lo.total_cmp(&self.density[j].lo));
        let mut prev_hi: Option<f64> = None;
        for index in order {
            let p = &self.density[index];
            let bounds_ok = p.lo.is_finite() && p.hi.is_finite() && 0.0 <= p.lo && p.lo < p.hi && p.hi <= 1.0;
            if !bounds_ok {
                out.push(Violation::PieceBounds { index, lo: p.lo, hi: p.hi });
                continue;
            }
            if p.coef.len() > MAX_DEGREE + 1 {
                out.push(Violation::PieceDegree {
                    index,
                    degree: p.coef.len() - 1,
                });
                continue;
            }
            if let Some(h) = prev_hi {
                if p.lo < h {
                    out.push(Violation::PieceOverlap { index, at: p.lo });
                }
            }
            prev_hi = Some(prev_hi.map_or(p.hi, |h| h.max(p.hi)));
            let (at, value) = p.minimum();
            if value < -NEGATIVE_TOL {
                out.push(Violation::NegativeDensity { index, at, value });
            }
            total += p.integral(p.lo, p.hi);
        }

        if !((total - 1.0).abs() <= MASS_TOL) {
            out.push(Violation::TotalMass { total });
        }
        out
    }
}

/// A validated probability measure on `[0,1]`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpec", into = "MeasureSpec")]
pub struct MixedMeasure {
    atoms: Vec<Atom>,
    density: Vec<DensityPiece>,
    atom_suffix: Vec<f64>,
    reflected: Vec<Vec<f64>>,
}

impl TryFrom<MeasureSpec> for MixedMeasure {
    type Error = Error;

    fn try_from(spec: MeasureSpec) -> Result<Self> {
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidMeasure(violations));
        }
        let MeasureSpec { atoms, mut density } = spec;
        density.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut atom_suffix = vec![0.0; atoms.len() + 1];
        for i in (0..atoms.len()).rev() {
            atom_suffix[i] = atom_suffix[i + 1] + atoms[i].mass;
        }
        let reflected = density.iter().map(|p| reflect(&p.coef)).collect();
        Ok(Self {
            atoms,
            density,
            atom_suffix,
            reflected,
        })
    }
}

impl From<MixedMeasure> for MeasureSpec {
    fn from(m: MixedMeasure) -> Self {
        MeasureSpec {
            atoms: m.atoms,
            density: m.density,
        }
    }
}

impl MixedMeasure {
    pub fn new(atoms: Vec<Atom>, density: Vec<DensityPiece>) -> Result<Self> {
        MeasureSpec { atoms, density }.try_into()
    }

    /// Point mass at `loc`.
    pub fn dirac(loc: f64) -> Result<Self> {
        Self::new(vec![Atom { loc, mass: 1.0 }], Vec::new())
    }

    /// Lebesgue measure on `[0,1]`.
    pub fn uniform() -> Self {
        Self::new(
            Vec::new(),
            vec![DensityPiece {
                lo: 0.0,
                hi: 1.0,
                coef: vec![1.0],
            }],
        )
        .expect("uniform density is a valid measure")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn to_spec(&self) -> MeasureSpec {
        self.clone().into()
    }

    /// `m([c,1])`.
    pub fn tail_mass(&self, c: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Domain {
                name: "c",
                value: c,
                domain: "[0, 1]",
            });
        }
        Ok(if c >= 0.5 {
            self.upper_tail_mass(1.0 - c)
        } else {
            self.tail_mass_direct(c)
        })
    }

    /// `m([1−s, 1])` for a tail length `s ∈ [0, 1]`, accurate for tiny `s`.
    pub fn upper_tail_mass(&self, s: f64) -> f64 {
        if s >= 0.5 {
            return self.tail_mass_direct(1.0 - s);
        }
        let idx = self.atoms.partition_point(|a| 1.0 - a.loc > s);
        let atoms = self.atom_suffix[idx];
        let dens: f64 = self
            .density
            .iter()
            .zip(&self.reflected)
            .map(|(p, r)| {
                // the piece spans t ∈ [1 − hi, 1 − lo]
                let t_lo = 1.0 - p.hi;
                let t_hi = (1.0 - p.lo).min(s);
                if t_hi <= t_lo {
                    0.0
                } else {
                    antiderivative(r, t_hi) - antiderivative(r, t_lo)
                }
            })
            .sum();
        atoms + dens
    }

    pub(crate) fn tail_mass_at(&self, p: TailPoint) -> f64 {
        if p.c >= 0.5 {
            self.upper_tail_mass(p.s)
        } else {
            self.tail_mass_direct(p.c)
        }
    }

    fn tail_mass_direct(&self, c: f64) -> f64 {
        let idx = self.atoms.partition_point(|a| a.loc < c);
        let dens: f64 = self.density.iter().map(|p| p.integral(c, p.hi)).sum();
        self.atom_suffix[idx] + dens
    }

    /// `∫_a^b` of the density part only.
    pub fn density_mass(&self, a: f64, b: f64) -> f64 {
        self.density.iter().map(|p| p.integral(a, b)).sum()
    }

    /// Density value at the point, summed over pieces containing it.
    pub fn density_at(&self, z: f64) -> f64 {
        self.density
            .iter()
            .filter(|p| p.lo <= z && z <= p.hi)
            .map(|p| p.eval(z))
            .next()
            .unwrap_or(0.0)
    }

    /// Left limit of the density at `z = 1`.
    pub fn density_at_one(&self) -> f64 {
        self.density
            .iter()
            .filter(|p| p.hi == 1.0)
            .map(|p| p.eval(1.0))
            .next()
            .unwrap_or(0.0)
    }

    /// Sorted interior atom locations (those in `(0,1)` with positive mass).
    pub fn atom_locations(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .filter(|a| a.loc > 0.0 && a.loc < 1.0)
            .map(|a| a.loc)
            .collect()
    }

    /// `m({0})`.
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms.iter().filter(|a| a.loc == 0.0).map(|a| a.mass).sum()
    }

    /// `m({1})`.
    pub fn mass_at_one(&self) -> f64 {
        self.atoms.iter().filter(|a| a.loc == 1.0).map(|a| a.mass).sum()
    }

    /// Points in `(0,1)` where `c ↦ m([c,1])` may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .atom_locations()
            .into_iter()
            .chain(self.density.iter().flat_map(|p| [p.lo, p.hi]))
            .filter(|&c| c > 0.0 && c < 1.0)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `∫ z m(dz)`.
    pub fn mean(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.loc * a.mass).sum();
        let dens: f64 = self
            .density
            .iter()
            .map(|p| {
                let shifted: Vec<f64> = std::iter::once(0.0).chain(p.coef.iter().copied()).collect();
                antiderivative(&shifted, p.hi) - antiderivative(&shifted, p.lo)
            })
            .sum();
        atoms + dens
    }

    /// True when the measure has no density part.
    pub fn is_atomic(&self) -> bool {
        self.density.is_empty()
    }
}
