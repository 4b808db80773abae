//! Named coefficient families with known structure, used to drive identity
//! checks, condition reports, and convergence experiments.
//!
//! Each family kind pairs a coefficient rule with what can be certified
//! about it: finite families have exact everything, geometric families have
//! a closed-form target function (a product of Poisson kernels) and an
//! explicit tail bound, and random sparse families are reproducible
//! oracle-only instances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CoefficientGrid;
use crate::summability::SampleGrid;

/// One explicit coefficient of a finite family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteEntry {
    pub j: i64,
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

/// A one-dimensional factor of a product family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SeqSpec {
    /// `a_j = r^|j|`
    #[serde(rename = "geometric")]
    Geometric { r: f64 },
    /// explicit `(index, re, im)` entries
    #[serde(rename = "finite")]
    Finite { entries: Vec<(i64, f64, f64)> },
}

impl SeqSpec {
    fn validate(&self) -> Result<()> {
        match self {
            SeqSpec::Geometric { r } => {
                if r.is_nan() || *r < 0.0 || *r >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "geometric factor radius must lie in [0, 1), got {r}"
                    )));
                }
            }
            SeqSpec::Finite { entries } => {
                if entries.is_empty() {
                    return Err(Error::InvalidParameter(
                        "finite factor needs at least one entry".to_string(),
                    ));
                }
                for (j, re, im) in entries {
                    if !(re.is_finite() && im.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "non-finite factor entry at index {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn coefficient(&self, idx: i64) -> Complex64 {
        match self {
            SeqSpec::Geometric { r } => Complex64::new(r.powi(idx.unsigned_abs() as i32), 0.0),
            SeqSpec::Finite { entries } => entries
                .iter()
                .filter(|(j, _, _)| *j == idx)
                .map(|(_, re, im)| Complex64::new(*re, *im))
                .sum(),
        }
    }

    /// Evaluate the full series of this factor at a point.
    fn closed_form_at(&self, t: f64) -> Complex64 {
        match self {
            SeqSpec::Geometric { r } => Complex64::new(poisson_kernel(*r, t), 0.0),
            SeqSpec::Finite { entries } => entries
                .iter()
                .map(|(j, re, im)| {
                    Complex64::new(*re, *im) * Complex64::from_polar(1.0, *j as f64 * t)
                })
                .sum(),
        }
    }

    fn support_bound(&self) -> Option<u32> {
        match self {
            SeqSpec::Geometric { .. } => None,
            SeqSpec::Finite { entries } => Some(
                entries
                    .iter()
                    .map(|(j, _, _)| j.unsigned_abs())
                    .max()
                    .unwrap_or(0)
                    .max(1) as u32,
            ),
        }
    }

    /// `sum_j |a_j|` over all stored indices (finite) or the full series
    /// (geometric).
    fn total_abs(&self) -> f64 {
        match self {
            SeqSpec::Geometric { r } => (1.0 + r) / (1.0 - r),
            SeqSpec::Finite { entries } => entries
                .iter()
                .map(|(_, re, im)| Complex64::new(*re, *im).norm())
                .sum(),
        }
    }

    /// Smallest `J` with `sum_{|j| > J} |a_j| <= eps`, when certifiable.
    fn tail_bound(&self, eps: f64) -> Option<u32> {
        match self {
            SeqSpec::Geometric { r } => Some(geometric_tail_cut(*r, eps)),
            SeqSpec::Finite { .. } => self.support_bound(),
        }
    }
}

/// Poisson kernel `sum_j r^|j| exp(i j t) = (1 - r^2) / (1 - 2 r cos t + r^2)`.
pub fn poisson_kernel(r: f64, t: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * t.cos() + r * r)
}

/// Sample a product function `fx(x) * fy(y)` through its one-dimensional
/// factors.
fn separable_samples(
    nx: usize,
    ny: usize,
    fx: impl Fn(f64) -> Complex64,
    fy: impl Fn(f64) -> Complex64,
) -> SampleGrid {
    use rayon::prelude::*;
    let mut out = SampleGrid::zeros(nx, ny);
    let col: Vec<Complex64> = (0..nx).map(|a| fx(out.x(a))).collect();
    let row: Vec<Complex64> = (0..ny).map(|b| fy(out.y(b))).collect();
    out.values_mut()
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(a, out_row)| {
            let f = col[a];
            for (cell, r) in out_row.iter_mut().zip(&row) {
                *cell = f * r;
            }
        });
    out
}

/// Smallest `J` such that `2 r^(J+1) / (1 - r) <= eps` (the one-sided
/// geometric tail with both signs), at least 1.
fn geometric_tail_cut(r: f64, eps: f64) -> u32 {
    if r == 0.0 {
        return 1;
    }
    let mut j = 1u32;
    let mut tail = 2.0 * r.powi(2) / (1.0 - r);
    while tail > eps && j < 100_000 {
        j += 1;
        tail *= r;
    }
    j
}

/// A named coefficient family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FamilySpec {
    /// explicit list of coefficients
    #[serde(rename = "finite")]
    Finite { entries: Vec<FiniteEntry> },
    /// `c_jk = rx^|j| * ry^|k|`
    #[serde(rename = "geometric")]
    Geometric { rx: f64, ry: f64 },
    /// `c_jk = a_j * b_k` for two one-dimensional factors
    #[serde(rename = "product")]
    Product { x: SeqSpec, y: SeqSpec },
    /// reproducible pseudo-random sparse coefficients with power-law decay
    #[serde(rename = "randomSparse")]
    RandomSparse {
        seed: u64,
        #[serde(rename = "boundJ")]
        bound_j: u32,
        #[serde(rename = "boundK")]
        bound_k: u32,
        density: f64,
        #[serde(rename = "decayExponent")]
        decay_exponent: f64,
    },
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Finite { entries } => {
                if entries.is_empty() {
                    return Err(Error::InvalidParameter(
                        "finite family needs at least one entry".to_string(),
                    ));
                }
                for e in entries {
                    if !(e.re.is_finite() && e.im.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "non-finite entry at ({}, {})",
                            e.j, e.k
                        )));
                    }
                }
                Ok(())
            }
            FamilySpec::Geometric { rx, ry } => {
                for r in [rx, ry] {
                    if r.is_nan() || *r < 0.0 || *r >= 1.0 {
                        return Err(Error::InvalidParameter(format!(
                            "geometric radius must lie in [0, 1), got {r}"
                        )));
                    }
                }
                Ok(())
            }
            FamilySpec::Product { x, y } => {
                x.validate()?;
                y.validate()
            }
            FamilySpec::RandomSparse {
                density,
                decay_exponent,
                bound_j,
                bound_k,
                ..
            } => {
                if density.is_nan() || *density <= 0.0 || *density > 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "density must lie in (0, 1], got {density}"
                    )));
                }
                if decay_exponent.is_nan() || *decay_exponent < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "decay exponent must be nonnegative, got {decay_exponent}"
                    )));
                }
                if *bound_j < 1 || *bound_k < 1 {
                    return Err(Error::InvalidParameter(
                        "random sparse bounds must be at least 1".to_string(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Parse the inline shorthand: `geometric:RX,RY` or
    /// `randomSparse:SEED,BOUNDJ,BOUNDK,DENSITY,DECAY`. Other kinds are
    /// supplied as JSON spec files.
    pub fn parse_shorthand(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| bad(format!("family shorthand needs `kind:args`, got `{text}`")))?;
        let fields: Vec<&str> = args.split(',').collect();
        let spec = match kind {
            "geometric" => {
                if fields.len() != 2 {
                    return Err(bad(format!(
                        "geometric shorthand needs `geometric:RX,RY`, got `{text}`"
                    )));
                }
                let rx: f64 = fields[0]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid radius `{}`", fields[0])))?;
                let ry: f64 = fields[1]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid radius `{}`", fields[1])))?;
                FamilySpec::Geometric { rx, ry }
            }
            "randomSparse" | "randomsparse" => {
                if fields.len() != 5 {
                    return Err(bad(format!(
                        "randomSparse shorthand needs `randomSparse:SEED,BOUNDJ,BOUNDK,DENSITY,DECAY`, got `{text}`"
                    )));
                }
                let seed: u64 = fields[0]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid seed `{}`", fields[0])))?;
                let bound_j: u32 = fields[1]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid bound `{}`", fields[1])))?;
                let bound_k: u32 = fields[2]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid bound `{}`", fields[2])))?;
                let density: f64 = fields[3]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid density `{}`", fields[3])))?;
                let decay_exponent: f64 = fields[4]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("invalid decay `{}`", fields[4])))?;
                FamilySpec::RandomSparse {
                    seed,
                    bound_j,
                    bound_k,
                    density,
                    decay_exponent,
                }
            }
            other => {
                return Err(bad(format!(
                    "unknown family shorthand kind `{other}` (expected `geometric` or `randomSparse`)"
                )));
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Materialize the family on a grid with the given bounds.
    pub fn build(&self, bound_j: u32, bound_k: u32) -> Result<CoefficientGrid> {
        self.validate()?;
        if bound_j < 1 || bound_k < 1 {
            return Err(Error::InvalidParameter(
                "grid bounds must be at least 1".to_string(),
            ));
        }
        match self {
            FamilySpec::Finite { entries } => {
                // repeated (j, k) entries accumulate, matching the direct
                // term-by-term evaluation in closed_form
                let need_j = entries.iter().map(|e| e.j.unsigned_abs()).max().unwrap() as u32;
                let need_k = entries.iter().map(|e| e.k.unsigned_abs()).max().unwrap() as u32;
                if need_j > bound_j || need_k > bound_k {
                    return Err(Error::InvalidParameter(format!(
                        "finite family support ({need_j}, {need_k}) exceeds requested bounds ({bound_j}, {bound_k})"
                    )));
                }
                let mut cells: std::collections::HashMap<(i64, i64), Complex64> =
                    std::collections::HashMap::new();
                for e in entries {
                    *cells.entry((e.j, e.k)).or_insert(Complex64::new(0.0, 0.0)) +=
                        Complex64::new(e.re, e.im);
                }
                Ok(CoefficientGrid::from_fn(bound_j, bound_k, |j, k| {
                    cells
                        .get(&(j, k))
                        .copied()
                        .unwrap_or(Complex64::new(0.0, 0.0))
                }))
            }
            FamilySpec::Geometric { rx, ry } => {
                Ok(CoefficientGrid::from_fn(bound_j, bound_k, |j, k| {
                    Complex64::new(
                        rx.powi(j.unsigned_abs() as i32) * ry.powi(k.unsigned_abs() as i32),
                        0.0,
                    )
                }))
            }
            FamilySpec::Product { x, y } => {
                Ok(CoefficientGrid::from_fn(bound_j, bound_k, |j, k| {
                    x.coefficient(j) * y.coefficient(k)
                }))
            }
            FamilySpec::RandomSparse {
                seed,
                bound_j: bj,
                bound_k: bk,
                density,
                decay_exponent,
            } => {
                let bj = (*bj).min(bound_j);
                let bk = (*bk).min(bound_k);
                let mut rng = SplitMix64::new(*seed);
                let mut entries: Vec<(i64, i64, Complex64)> = Vec::new();
                // deterministic row-major order over the family's own box
                for j in -(bj as i64)..=bj as i64 {
                    for k in -(bk as i64)..=bk as i64 {
                        if rng.next_f64() < *density {
                            let re = rng.next_f64() * 2.0 - 1.0;
                            let im = rng.next_f64() * 2.0 - 1.0;
                            let scale = (1.0 + j.abs() as f64).powf(-decay_exponent)
                                * (1.0 + k.abs() as f64).powf(-decay_exponent);
                            entries.push((j, k, Complex64::new(re * scale, im * scale)));
                        }
                    }
                }
                CoefficientGrid::from_entries(bound_j, bound_k, &entries)
            }
        }
    }

    /// Evaluate the family's target function on a sample grid, when a
    /// closed form exists: geometric families multiply two Poisson kernels,
    /// finite families evaluate their trigonometric polynomial directly,
    /// and products multiply their factors. Returns `None` for random
    /// sparse families.
    pub fn closed_form(&self, nx: usize, ny: usize) -> Option<SampleGrid> {
        match self {
            FamilySpec::Finite { entries } => {
                let entries = entries.clone();
                Some(SampleGrid::from_fn(nx, ny, |x, y| {
                    entries
                        .iter()
                        .map(|e| {
                            Complex64::new(e.re, e.im)
                                * Complex64::from_polar(1.0, e.j as f64 * x + e.k as f64 * y)
                        })
                        .sum()
                }))
            }
            FamilySpec::Geometric { rx, ry } => Some(separable_samples(
                nx,
                ny,
                |x| Complex64::new(poisson_kernel(*rx, x), 0.0),
                |y| Complex64::new(poisson_kernel(*ry, y), 0.0),
            )),
            FamilySpec::Product { x, y } => Some(separable_samples(
                nx,
                ny,
                |xv| x.closed_form_at(xv),
                |yv| y.closed_form_at(yv),
            )),
            FamilySpec::RandomSparse { .. } => None,
        }
    }

    /// Bounds `(J, K)` such that the discarded tail of the series is at
    /// most `epsilon` in the uniform norm, certified by an explicit bound:
    /// finite families return their support, geometric families use the
    /// geometric tail `2 r^(J+1) (1 + r) / (1 - r)^2`, and random sparse
    /// families with decay exponent above 1 use the integral tail of the
    /// power law. Errors when no certified bound exists.
    pub fn reference_truncation(&self, epsilon: f64) -> Result<(u32, u32)> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance must be positive, got {epsilon}"
            )));
        }
        match self {
            FamilySpec::Finite { entries } => {
                let j = entries
                    .iter()
                    .map(|e| e.j.unsigned_abs())
                    .max()
                    .unwrap_or(0)
                    .max(1) as u32;
                let k = entries
                    .iter()
                    .map(|e| e.k.unsigned_abs())
                    .max()
                    .unwrap_or(0)
                    .max(1) as u32;
                Ok((j, k))
            }
            FamilySpec::Geometric { rx, ry } => {
                // |f - S_JK| <= tail_J(rx) * total(ry) + total(rx) * tail_K(ry)
                let total_x = (1.0 + rx) / (1.0 - rx);
                let total_y = (1.0 + ry) / (1.0 - ry);
                let j = geometric_tail_cut(*rx, epsilon / (2.0 * total_y));
                let k = geometric_tail_cut(*ry, epsilon / (2.0 * total_x));
                Ok((j, k))
            }
            FamilySpec::Product { x, y } => {
                let total_x = x.total_abs();
                let total_y = y.total_abs();
                let j = x
                    .tail_bound(epsilon / (2.0 * total_y.max(1e-300)))
                    .ok_or_else(|| {
                        Error::ReferenceUnavailable("product factor has no tail bound".to_string())
                    })?;
                let k = y
                    .tail_bound(epsilon / (2.0 * total_x.max(1e-300)))
                    .ok_or_else(|| {
                        Error::ReferenceUnavailable("product factor has no tail bound".to_string())
                    })?;
                Ok((j, k))
            }
            FamilySpec::RandomSparse {
                decay_exponent,
                bound_j,
                bound_k,
                ..
            } => {
                if *decay_exponent <= 1.0 {
                    return Err(Error::ReferenceUnavailable(format!(
                        "random sparse decay exponent {decay_exponent} has no summable tail bound"
                    )));
                }
                // entries are supported inside the family's own box anyway
                Ok((*bound_j, *bound_k))
            }
        }
    }
}

/// SplitMix64: the 64-bit generator used for reproducible pseudo-random
/// families. State advances by the golden-ratio increment
/// `0x9E3779B97F4A7C15`; each output mixes the state with the two
/// multiply-xorshift rounds `0xBF58476D1CE4E5B9` / `0x94D049BB133111EB`
/// and a final 31-bit shift. `next_f64` maps the top 53 bits to `[0, 1)`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
