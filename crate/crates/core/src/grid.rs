//! Truncated double Fourier coefficient grids and the directional
//! difference calculus on them.
//!
//! Index convention: a [`SignedIndex`] carries an explicit sign, so magnitude
//! zero exists twice, as `0+` and `0-`. Sums written over `|j| = a..b`
//! iterate both signs of every magnitude in the range; the two signed zeros
//! are kept apart because differences taken at `0+` step toward `+1` while
//! differences at `0-` step toward `-1`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction of a signed index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// +1 or -1.
    pub fn unit(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// An integer frequency index with an explicit sign, so that `0+` and `0-`
/// are distinct values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedIndex {
    sign: Sign,
    magnitude: u32,
}

impl SignedIndex {
    pub fn new(sign: Sign, magnitude: u32) -> Self {
        Self { sign, magnitude }
    }

    pub fn plus(magnitude: u32) -> Self {
        Self::new(Sign::Plus, magnitude)
    }

    pub fn minus(magnitude: u32) -> Self {
        Self::new(Sign::Minus, magnitude)
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    pub fn magnitude(self) -> u32 {
        self.magnitude
    }

    /// The plain integer value `sign * magnitude`. Both signed zeros map to 0.
    pub fn value(self) -> i64 {
        self.sign.unit() * i64::from(self.magnitude)
    }

    /// Step `by` positions away from zero, keeping the sign.
    pub fn step_out(self, by: u32) -> Self {
        Self::new(self.sign, self.magnitude + by)
    }
}

impl fmt::Display for SignedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Plus => write!(f, "{}+", self.magnitude),
            Sign::Minus => write!(f, "{}-", self.magnitude),
        }
    }
}

/// Iterate both signs of every magnitude in `lo..=hi`, magnitude ascending,
/// plus before minus. Empty when `lo > hi` (bounds are `i64` so callers can
/// pass `m - 1` with `m = 0` and get the empty range).
pub fn signed_range(lo: i64, hi: i64) -> impl Iterator<Item = SignedIndex> {
    let lo = lo.max(0);
    (lo..=hi.max(lo - 1)).flat_map(|m| {
        let m = m as u32;
        [SignedIndex::plus(m), SignedIndex::minus(m)]
    })
}

/// Difference order `(p, q)` with `p, q <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffOrder {
    p: u8,
    q: u8,
}

impl DiffOrder {
    pub const D00: DiffOrder = DiffOrder { p: 0, q: 0 };
    pub const D10: DiffOrder = DiffOrder { p: 1, q: 0 };
    pub const D01: DiffOrder = DiffOrder { p: 0, q: 1 };
    pub const D11: DiffOrder = DiffOrder { p: 1, q: 1 };

    pub fn new(p: u8, q: u8) -> Result<Self> {
        if p > 2 || q > 2 {
            return Err(Error::InvalidParameter(format!(
                "difference order ({p}, {q}) exceeds the supported maximum (2, 2)"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn p(self) -> u8 {
        self.p
    }

    pub fn q(self) -> u8 {
        self.q
    }
}

/// Dense two-sided coefficient array `c_jk` for `|j| <= bound_j`,
/// `|k| <= bound_k`, extended by zero outside its bounds.
///
/// Grids are immutable once constructed; every operation on them is a pure
/// read, so shared references are safe across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    bound_j: u32,
    bound_k: u32,
    values: Vec<Complex64>,
}

impl CoefficientGrid {
    /// All-zero grid. Bounds must be at least 1.
    pub fn zeros(bound_j: u32, bound_k: u32) -> Self {
        assert!(bound_j >= 1 && bound_k >= 1, "grid bounds must be positive");
        let len = (2 * bound_j as usize + 1) * (2 * bound_k as usize + 1);
        Self {
            bound_j,
            bound_k,
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Build a grid by evaluating `f` at every stored index.
    ///
    /// Panics if `f` produces a non-finite value; stored coefficients are
    /// always finite.
    pub fn from_fn(bound_j: u32, bound_k: u32, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let mut grid = Self::zeros(bound_j, bound_k);
        for j in -(bound_j as i64)..=bound_j as i64 {
            for k in -(bound_k as i64)..=bound_k as i64 {
                let v = f(j, k);
                assert!(
                    v.re.is_finite() && v.im.is_finite(),
                    "non-finite coefficient at ({j}, {k})"
                );
                let idx = grid.flat_index(j, k);
                grid.values[idx] = v;
            }
        }
        grid
    }

    /// Build a grid from explicit entries; indices must fit in the bounds and
    /// values must be finite.
    pub fn from_entries(
        bound_j: u32,
        bound_k: u32,
        entries: &[(i64, i64, Complex64)],
    ) -> Result<Self> {
        let mut grid = Self::zeros(bound_j, bound_k);
        for &(j, k, v) in entries {
            if j.unsigned_abs() > u64::from(bound_j) || k.unsigned_abs() > u64::from(bound_k) {
                return Err(Error::InvalidParameter(format!(
                    "entry ({j}, {k}) lies outside grid bounds ({bound_j}, {bound_k})"
                )));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite coefficient at ({j}, {k})"
                )));
            }
            let idx = grid.flat_index(j, k);
            grid.values[idx] = v;
        }
        Ok(grid)
    }

    pub fn bound_j(&self) -> u32 {
        self.bound_j
    }

    pub fn bound_k(&self) -> u32 {
        self.bound_k
    }

    fn flat_index(&self, j: i64, k: i64) -> usize {
        let row = (j + self.bound_j as i64) as usize;
        let col = (k + self.bound_k as i64) as usize;
        row * (2 * self.bound_k as usize + 1) + col
    }

    /// Stored value inside the bounds, zero outside.
    pub fn get(&self, j: i64, k: i64) -> Complex64 {
        if j.unsigned_abs() > u64::from(self.bound_j) || k.unsigned_abs() > u64::from(self.bound_k)
        {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[self.flat_index(j, k)]
        }
    }

    /// Directional difference of order `(p, q)` at the signed index `(j, k)`.
    ///
    /// First-order steps move away from zero: at `j` with sign plus the step
    /// is `c_jk - c_{j+1,k}`, with sign minus it is `c_jk - c_{j-1,k}`, and
    /// likewise in `k`. Higher orders compose first-order steps; order (0,0)
    /// is a plain lookup.
    pub fn diff(&self, order: DiffOrder, j: SignedIndex, k: SignedIndex) -> Complex64 {
        self.diff_rec(order.p, order.q, j, k)
    }

    fn diff_rec(&self, p: u8, q: u8, j: SignedIndex, k: SignedIndex) -> Complex64 {
        if p > 0 {
            self.diff_rec(p - 1, q, j, k) - self.diff_rec(p - 1, q, j.step_out(1), k)
        } else if q > 0 {
            self.diff_rec(p, q - 1, j, k) - self.diff_rec(p, q - 1, j, k.step_out(1))
        } else {
            self.get(j.value(), k.value())
        }
    }

    /// One row of the grid as a two-sided sequence in `k` (fixed `j`).
    pub fn row(&self, j: i64) -> CoefficientSeq {
        CoefficientSeq::from_fn(self.bound_k, |k| self.get(j, k))
    }

    /// One column of the grid as a two-sided sequence in `j` (fixed `k`).
    pub fn column(&self, k: i64) -> CoefficientSeq {
        CoefficientSeq::from_fn(self.bound_j, |j| self.get(j, k))
    }

    /// Parse the text coefficient format: one `j k re im` entry per line,
    /// `#` comments and blank lines ignored, whitespace separated.
    ///
    /// Bounds become `max(1, max |j|)` and `max(1, max |k|)` over the parsed
    /// entries. Duplicate indices and malformed lines are errors (reported
    /// with their 1-based line number), as is input without any data line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut entries: Vec<(i64, i64, Complex64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let data = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let fields: Vec<&str> = data.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 4 fields `j k re im`, found {}", fields.len()),
                });
            }
            let j: i64 = fields[0].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid integer index `{}`", fields[0]),
            })?;
            let k: i64 = fields[1].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid integer index `{}`", fields[1]),
            })?;
            let re: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid decimal `{}`", fields[2]),
            })?;
            let im: f64 = fields[3].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid decimal `{}`", fields[3]),
            })?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::Parse {
                    line,
                    msg: "coefficient must be finite".to_string(),
                });
            }
            if !seen.insert((j, k)) {
                return Err(Error::DuplicateIndex { j, k, line });
            }
            entries.push((j, k, Complex64::new(re, im)));
        }
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        let bound_j = entries
            .iter()
            .map(|e| e.0.unsigned_abs())
            .max()
            .unwrap()
            .max(1) as u32;
        let bound_k = entries
            .iter()
            .map(|e| e.1.unsigned_abs())
            .max()
            .unwrap()
            .max(1) as u32;
        Self::from_entries(bound_j, bound_k, &entries)
    }

    /// Serialize every stored cell (including zeros) sorted by `(j, k)`, in
    /// the same `j k re im` text format `parse` reads. The round trip is
    /// exact, bounds included.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for j in -(self.bound_j as i64)..=self.bound_j as i64 {
            for k in -(self.bound_k as i64)..=self.bound_k as i64 {
                let v = self.get(j, k);
                out.push_str(&format!("{} {} {} {}\n", j, k, v.re, v.im));
            }
        }
        out
    }

    /// Largest coefficient modulus; zero for the all-zero grid.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise linear combination `alpha * self + beta * other` on the
    /// union of the two bound boxes.
    pub fn linear_combination(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Self {
        let bj = self.bound_j.max(other.bound_j);
        let bk = self.bound_k.max(other.bound_k);
        Self::from_fn(bj, bk, |j, k| {
            alpha * self.get(j, k) + beta * other.get(j, k)
        })
    }
}

/// Two-sided one-dimensional coefficient sequence `c_k`, `|k| <= bound`,
/// extended by zero, with the same directional difference convention as the
/// grids.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeq {
    bound: u32,
    values: Vec<Complex64>,
}

impl CoefficientSeq {
    pub fn zeros(bound: u32) -> Self {
        Self {
            bound,
            values: vec![Complex64::new(0.0, 0.0); 2 * bound as usize + 1],
        }
    }

    pub fn from_fn(bound: u32, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let mut seq = Self::zeros(bound);
        for k in -(bound as i64)..=bound as i64 {
            let v = f(k);
            assert!(
                v.re.is_finite() && v.im.is_finite(),
                "non-finite coefficient at {k}"
            );
            seq.values[(k + bound as i64) as usize] = v;
        }
        seq
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() > u64::from(self.bound) {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(k + self.bound as i64) as usize]
        }
    }

    /// First-order directional difference away from zero at a signed index.
    pub fn diff(&self, k: SignedIndex) -> Complex64 {
        self.get(k.value()) - self.get(k.step_out(1).value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: u8, r: u8) -> f64 {
        // small n only (n <= 2 here)
        let (n, r) = (n as u64, r as u64);
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..r {
            num *= n - i;
            den *= i + 1;
        }
        (num / den) as f64
    }

    /// Independent oracle: the binomial expansion of the directional
    /// difference, with signs per direction.
    fn diff_binomial_oracle(
        grid: &CoefficientGrid,
        order: DiffOrder,
        j: SignedIndex,
        k: SignedIndex,
    ) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..=order.p() {
            for t in 0..=order.q() {
                let sign = if (s + t) % 2 == 0 { 1.0 } else { -1.0 };
                let weight = sign * binomial(order.p(), s) * binomial(order.q(), t);
                let jj = j.step_out(u32::from(s)).value();
                let kk = k.step_out(u32::from(t)).value();
                acc += weight * grid.get(jj, kk);
            }
        }
        acc
    }

    fn seeded_grid(bound: u32, seed: u64) -> CoefficientGrid {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        CoefficientGrid::from_fn(bound, bound, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn stored_value_round_trip() {
        let grid =
            CoefficientGrid::from_entries(3, 3, &[(1, 2, Complex64::new(3.0, 4.0))]).unwrap();
        assert_eq!(grid.get(1, 2), Complex64::new(3.0, 4.0));
    }

    #[test]
    fn out_of_bounds_reads_zero() {
        let grid =
            CoefficientGrid::from_entries(3, 3, &[(1, 2, Complex64::new(3.0, 4.0))]).unwrap();
        assert_eq!(grid.get(3 + 5, 0), Complex64::new(0.0, 0.0));
        assert_eq!(
            CoefficientGrid::zeros(1, 1).get(0, 0),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn differences_annihilate_constants() {
        let grid = CoefficientGrid::from_fn(4, 4, |_, _| Complex64::new(7.0, 0.0));
        // interior signed indices whose full stencil stays inside the bounds
        for j in signed_range(0, 2) {
            for k in signed_range(0, 2) {
                assert_eq!(grid.diff(DiffOrder::D11, j, k), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn forward_difference_of_linear_sequence() {
        let grid = CoefficientGrid::from_fn(3, 3, |j, _| Complex64::new(j as f64, 0.0));
        let d = grid.diff(DiffOrder::D10, SignedIndex::plus(1), SignedIndex::plus(0));
        assert_eq!(d, Complex64::new(1.0 - 2.0, 0.0));
    }

    #[test]
    fn signed_zero_steps_in_opposite_directions() {
        let grid =
            CoefficientGrid::from_fn(2, 2, |j, _| Complex64::new((j * j) as f64 + j as f64, 0.0));
        let at_plus = grid.diff(DiffOrder::D10, SignedIndex::plus(0), SignedIndex::plus(0));
        let at_minus = grid.diff(DiffOrder::D10, SignedIndex::minus(0), SignedIndex::plus(0));
        // c_0 - c_1 = 0 - 2, c_0 - c_{-1} = 0 - 0
        assert_eq!(at_plus, Complex64::new(-2.0, 0.0));
        assert_eq!(at_minus, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn diff_matches_binomial_expansion_oracle() {
        let grid = seeded_grid(6, 42);
        for p in 0..=2u8 {
            for q in 0..=2u8 {
                let order = DiffOrder::new(p, q).unwrap();
                for j in signed_range(0, 4) {
                    for k in signed_range(0, 4) {
                        let got = grid.diff(order, j, k);
                        let want = diff_binomial_oracle(&grid, order, j, k);
                        assert!(
                            (got - want).norm() <= 1e-12 * want.norm().max(1.0),
                            "order ({p},{q}) at ({j},{k}): {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn diff_zero_order_is_get() {
        let grid = seeded_grid(3, 7);
        for j in signed_range(0, 3) {
            for k in signed_range(0, 3) {
                assert_eq!(
                    grid.diff(DiffOrder::D00, j, k),
                    grid.get(j.value(), k.value())
                );
            }
        }
    }

    #[test]
    fn first_order_telescopes_back() {
        // diff(D10) + c_{j+1,k} = c_{jk}, here exact because the values are
        // dyadic-friendly random doubles and the identity is one subtraction
        let grid = seeded_grid(4, 99);
        for j in signed_range(0, 3) {
            for k in signed_range(0, 3) {
                let d = grid.diff(DiffOrder::D10, j, k);
                let back = d + grid.get(j.step_out(1).value(), k.value());
                let want = grid.get(j.value(), k.value());
                assert!((back - want).norm() <= 1e-14 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn diff_is_linear_in_the_grid() {
        let a = seeded_grid(4, 1);
        let b = seeded_grid(4, 2);
        let alpha = Complex64::new(0.3, -1.1);
        let beta = Complex64::new(-2.0, 0.7);
        let combo = a.linear_combination(alpha, &b, beta);
        for j in signed_range(0, 2) {
            for k in signed_range(0, 2) {
                let got = combo.diff(DiffOrder::D11, j, k);
                let want =
                    alpha * a.diff(DiffOrder::D11, j, k) + beta * b.diff(DiffOrder::D11, j, k);
                assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn composition_order_is_consistent() {
        // D11 via D10-then-D01 equals D01-then-D10
        let grid = seeded_grid(4, 11);
        for j in signed_range(0, 2) {
            for k in signed_range(0, 2) {
                let jk1 =
                    grid.diff(DiffOrder::D10, j, k) - grid.diff(DiffOrder::D10, j, k.step_out(1));
                let jk2 =
                    grid.diff(DiffOrder::D01, j, k) - grid.diff(DiffOrder::D01, j.step_out(1), k);
                let d11 = grid.diff(DiffOrder::D11, j, k);
                assert!((jk1 - d11).norm() <= 1e-14 * d11.norm().max(1.0));
                assert!((jk2 - d11).norm() <= 1e-14 * d11.norm().max(1.0));
            }
        }
    }

    #[test]
    fn diff_order_rejects_large_orders() {
        assert!(DiffOrder::new(3, 0).is_err());
        assert!(DiffOrder::new(0, 3).is_err());
        assert!(DiffOrder::new(2, 2).is_ok());
    }

    #[test]
    fn parse_single_entry_applies_minimum_bound() {
        let grid = CoefficientGrid::parse("0 0 1 0").unwrap();
        assert_eq!(grid.bound_j(), 1);
        assert_eq!(grid.bound_k(), 1);
        assert_eq!(grid.get(0, 0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn parse_rejects_duplicates() {
        let err = CoefficientGrid::parse("0 0 1 0\n0 0 2 0").unwrap_err();
        match err {
            Error::DuplicateIndex {
                j: 0,
                k: 0,
                line: 2,
            } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = CoefficientGrid::parse("x y z").unwrap_err();
        match err {
            Error::Parse { line: 1, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_empty_input() {
        assert!(matches!(
            CoefficientGrid::parse("# only a comment\n\n"),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let grid = seeded_grid(3, 1234);
        let reparsed = CoefficientGrid::parse(&grid.to_text()).unwrap();
        assert_eq!(grid, reparsed);
    }

    #[test]
    fn signed_range_is_empty_below_zero_span() {
        assert_eq!(signed_range(0, -1).count(), 0);
        let idx: Vec<SignedIndex> = signed_range(0, 1).collect();
        assert_eq!(
            idx,
            vec![
                SignedIndex::plus(0),
                SignedIndex::minus(0),
                SignedIndex::plus(1),
                SignedIndex::minus(1)
            ]
        );
    }

    #[test]
    fn sequence_directional_difference() {
        let seq = CoefficientSeq::from_fn(3, |k| Complex64::new(k as f64, 0.0));
        assert_eq!(seq.diff(SignedIndex::plus(1)), Complex64::new(-1.0, 0.0));
        assert_eq!(seq.diff(SignedIndex::minus(1)), Complex64::new(1.0, 0.0));
        // at the edge the out-of-bounds neighbor reads zero
        assert_eq!(seq.diff(SignedIndex::plus(3)), Complex64::new(3.0, 0.0));
    }
}
