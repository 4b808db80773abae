//! Tauberian condition checkers: windowed coefficient-difference sums for
//! single sequences and double grids, plus the weighted coefficient-decay
//! diagnostic.
//!
//! The checkers report evidence, not proofs: each produces a finite profile
//! of nonnegative sums over a probe lattice and a deterministic trend
//! verdict. Sums written over `|j| = 0±..` include both signed zero
//! directions at full weight, so a difference taken at `0+` (stepping to
//! `+1`) and one at `0-` (stepping to `-1`) both contribute.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{signed_range, CoefficientGrid, CoefficientSeq, DiffOrder, SignedIndex};
use crate::kernels::{lambda_index_checked, log_weight};

/// Stable identifiers for the condition checkers, used in report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionId {
    /// single-variable power-weighted window sum
    HK13,
    /// single-variable log-weighted window sum
    LIM14,
    /// row differences summed over `j`, profiled in `|k|`
    C31,
    /// column differences summed over `k`, profiled in `|j|`
    C32,
    /// mixed differences over a `k`-window, `j` summed out
    C33,
    /// mixed differences over a `j`-window, `k` summed out
    C34,
    /// weighted coefficient decay
    DECAY,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::HK13 => "HK13",
            ConditionId::LIM14 => "LIM14",
            ConditionId::C31 => "C31",
            ConditionId::C32 => "C32",
            ConditionId::C33 => "C33",
            ConditionId::C34 => "C34",
            ConditionId::DECAY => "DECAY",
        }
    }
}

/// Deterministic trend classification of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "vanishing-trend")]
    VanishingTrend,
    #[serde(rename = "non-vanishing-trend")]
    NonVanishingTrend,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::VanishingTrend => "vanishing-trend",
            Verdict::NonVanishingTrend => "non-vanishing-trend",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// What a profile point is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProfileKey {
    /// probed shell `|k| = value`
    KMag(u32),
    /// probed shell `|j| = value`
    JMag(u32),
    /// window `(lambda, start)`
    Window { lambda: f64, start: u32 },
    /// `max(|j|, |k|) = value` shell
    Shell(u32),
    /// diagonal `|j| = |k| = value`
    Diagonal(u32),
}

impl ProfileKey {
    /// The lambda column for file output, when the key carries one.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            ProfileKey::Window { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    /// The integer index column for file output.
    pub fn index(&self) -> u32 {
        match self {
            ProfileKey::KMag(v)
            | ProfileKey::JMag(v)
            | ProfileKey::Shell(v)
            | ProfileKey::Diagonal(v) => *v,
            ProfileKey::Window { start, .. } => *start,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub key: ProfileKey,
    pub value: f64,
}

/// A condition checker's output: the probed profile and its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    /// Cap applied to sums written as infinite.
    pub truncation: u32,
    pub profile: Vec<ProfilePoint>,
    pub verdict: Verdict,
}

/// Probe lattice shared by the condition checkers: the window scales, the
/// probed start indices, and the truncation cap for sums written as
/// infinite.
#[derive(Debug, Clone)]
pub struct ConditionParams {
    /// Exponent for the power-weighted single-variable sum, in (1, 2].
    p: Option<f64>,
    /// Window scales, stored sorted ascending; all must exceed 1.
    lambdas: Vec<f64>,
    /// Probed start indices (window starts or shell magnitudes).
    n_range: Vec<u32>,
    /// Cap for sums written as infinite.
    truncation: u32,
}

impl ConditionParams {
    pub fn new(
        p: Option<f64>,
        mut lambdas: Vec<f64>,
        n_range: Vec<u32>,
        truncation: u32,
    ) -> Result<Self> {
        if let Some(p) = p {
            if p.is_nan() || p <= 1.0 || p > 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "exponent p must lie in (1, 2], got {p}"
                )));
            }
        }
        if lambdas.is_empty() {
            return Err(Error::InvalidParameter(
                "no window scales given".to_string(),
            ));
        }
        for l in &lambdas {
            if !l.is_finite() || *l <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "window scale lambda must exceed 1, got {l}"
                )));
            }
        }
        lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite lambdas"));
        if n_range.is_empty() {
            return Err(Error::InvalidParameter("empty probe range".to_string()));
        }
        if n_range.contains(&0) {
            return Err(Error::InvalidParameter(
                "probe indices must be positive".to_string(),
            ));
        }
        let max_probe = *n_range.iter().max().unwrap();
        if truncation < max_probe {
            return Err(Error::InvalidParameter(format!(
                "truncation {truncation} is below the largest probed index {max_probe}"
            )));
        }
        Ok(Self {
            p,
            lambdas,
            n_range,
            truncation,
        })
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n_range(&self) -> &[u32] {
        &self.n_range
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }
}

/// Trend rule: vanishing when the last value has dropped below a tenth of
/// the peak and the final three values are nonincreasing; non-vanishing
/// when the final three values all sit within ten percent of the peak;
/// inconclusive otherwise. The all-zero profile is vanishing.
pub fn trend_verdict(values: &[f64]) -> Verdict {
    if values.is_empty() {
        return Verdict::Inconclusive;
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Verdict::VanishingTrend;
    }
    let last = *values.last().unwrap();
    let tail = &values[values.len().saturating_sub(3)..];
    let tail_nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-15 * max);
    if last < 0.1 * max && tail_nonincreasing {
        return Verdict::VanishingTrend;
    }
    if tail.len() == 3 && tail.iter().all(|v| *v >= 0.9 * max) {
        return Verdict::NonVanishingTrend;
    }
    Verdict::Inconclusive
}

fn combine_verdicts(verdicts: &[Verdict]) -> Verdict {
    if verdicts.iter().all(|v| *v == Verdict::VanishingTrend) {
        Verdict::VanishingTrend
    } else if verdicts.contains(&Verdict::NonVanishingTrend) {
        Verdict::NonVanishingTrend
    } else {
        Verdict::Inconclusive
    }
}

/// Power-weighted window sum
/// `sum_{|k| = n..floor(lambda n)} |k|^(p-1) |diff c_k|^p`
/// with directional differences, both signs of each magnitude.
pub fn hk_single(seq: &CoefficientSeq, p: f64, lambda: f64, n: u32) -> Result<f64> {
    if p.is_nan() || p <= 1.0 || p > 2.0 {
        return Err(Error::InvalidParameter(format!(
            "exponent p must lie in (1, 2], got {p}"
        )));
    }
    let ln = lambda_index_checked(lambda, n)?;
    let mut acc = 0.0;
    for k in signed_range(i64::from(n), i64::from(ln)) {
        let d = seq.diff(k).norm();
        acc += f64::from(k.magnitude()).powf(p - 1.0) * d.powf(p);
    }
    Ok(acc)
}

/// Log-scaled window sum `ln(n) * sum_{|k| = n..floor(lambda n)} |diff c_k|`.
pub fn lim_single(seq: &CoefficientSeq, lambda: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "window start must be at least 2, got {n}"
        )));
    }
    let ln = lambda_index_checked(lambda, n)?;
    let mut acc = 0.0;
    for k in signed_range(i64::from(n), i64::from(ln)) {
        acc += seq.diff(k).norm();
    }
    Ok(f64::from(n).ln() * acc)
}

/// Assemble the single-variable power-weighted profile over the
/// `(lambda, n)` lattice.
pub fn hk_report(
    seq: &CoefficientSeq,
    p: f64,
    params: &ConditionParams,
) -> Result<ConditionReport> {
    lattice_report(ConditionId::HK13, params, |lambda, n| {
        hk_single(seq, p, lambda, n)
    })
}

/// Assemble the single-variable log-scaled profile over the lattice.
pub fn lim_report(seq: &CoefficientSeq, params: &ConditionParams) -> Result<ConditionReport> {
    lattice_report(ConditionId::LIM14, params, |lambda, n| {
        lim_single(seq, lambda, n)
    })
}

fn lattice_report(
    condition: ConditionId,
    params: &ConditionParams,
    mut value: impl FnMut(f64, u32) -> Result<f64>,
) -> Result<ConditionReport> {
    let mut profile = Vec::new();
    let mut verdicts = Vec::new();
    for &lambda in params.lambdas() {
        let mut column = Vec::new();
        for &n in params.n_range() {
            let v = value(lambda, n)?;
            profile.push(ProfilePoint {
                key: ProfileKey::Window { lambda, start: n },
                value: v,
            });
            column.push(v);
        }
        verdicts.push(trend_verdict(&column));
    }
    Ok(ConditionReport {
        condition,
        truncation: params.truncation(),
        profile,
        verdict: combine_verdicts(&verdicts),
    })
}

/// Shared core of the two strip profiles: for one probed shell of the outer
/// variable, sum `w(inner) w(outer) |diff c|` over signed inner indices up
/// to the cap and both signs of the outer shell.
fn strip_shell_value(
    grid: &CoefficientGrid,
    diff: DiffOrder,
    inner_is_j: bool,
    shell: u32,
    cap: u32,
) -> f64 {
    let mut acc = 0.0;
    let w_outer = log_weight(shell);
    for outer_sign in [SignedIndex::plus(shell), SignedIndex::minus(shell)] {
        for inner in signed_range(0, i64::from(cap)) {
            let (j, k) = if inner_is_j {
                (inner, outer_sign)
            } else {
                (outer_sign, inner)
            };
            let d = grid.diff(diff, j, k).norm();
            acc += log_weight(inner.magnitude()) * w_outer * d;
        }
    }
    acc
}

/// Row-difference profile: for each probed `|k|`, the sum over signed `j`
/// up to the truncation of `w(j) w(k) |diff_10 c_jk|`, both signs of `k`.
pub fn cond31_profile(grid: &CoefficientGrid, params: &ConditionParams) -> Result<ConditionReport> {
    if params.truncation() > grid.bound_j() {
        return Err(Error::GridTooSmall {
            bound_j: grid.bound_j(),
            bound_k: grid.bound_k(),
            need_j: params.truncation(),
            need_k: 0,
        });
    }
    let mut profile = Vec::new();
    let mut values = Vec::new();
    for &shell in params.n_range() {
        let v = strip_shell_value(grid, DiffOrder::D10, true, shell, params.truncation());
        profile.push(ProfilePoint {
            key: ProfileKey::KMag(shell),
            value: v,
        });
        values.push(v);
    }
    Ok(ConditionReport {
        condition: ConditionId::C31,
        truncation: params.truncation(),
        profile,
        verdict: trend_verdict(&values),
    })
}

/// Column-difference profile: mirror of [`cond31_profile`] with the roles
/// of `j` and `k` swapped.
pub fn cond32_profile(grid: &CoefficientGrid, params: &ConditionParams) -> Result<ConditionReport> {
    if params.truncation() > grid.bound_k() {
        return Err(Error::GridTooSmall {
            bound_j: grid.bound_j(),
            bound_k: grid.bound_k(),
            need_j: 0,
            need_k: params.truncation(),
        });
    }
    let mut profile = Vec::new();
    let mut values = Vec::new();
    for &shell in params.n_range() {
        let v = strip_shell_value(grid, DiffOrder::D01, false, shell, params.truncation());
        profile.push(ProfilePoint {
            key: ProfileKey::JMag(shell),
            value: v,
        });
        values.push(v);
    }
    Ok(ConditionReport {
        condition: ConditionId::C32,
        truncation: params.truncation(),
        profile,
        verdict: trend_verdict(&values),
    })
}

/// Mixed-difference window sum for fixed `(lambda, n)`:
/// `sum_{|j| = 0±..J} sum_{|k| = n..floor(lambda n)} w(j) w(k) |diff_11 c_jk|`.
pub fn cond33_value(grid: &CoefficientGrid, lambda: f64, n: u32, j_cap: u32) -> Result<f64> {
    if j_cap > grid.bound_j() {
        return Err(Error::GridTooSmall {
            bound_j: grid.bound_j(),
            bound_k: grid.bound_k(),
            need_j: j_cap,
            need_k: 0,
        });
    }
    let ln = lambda_index_checked(lambda, n)?;
    let mut acc = 0.0;
    for k in signed_range(i64::from(n), i64::from(ln)) {
        let wk = log_weight(k.magnitude());
        for j in signed_range(0, i64::from(j_cap)) {
            acc += log_weight(j.magnitude()) * wk * grid.diff(DiffOrder::D11, j, k).norm();
        }
    }
    Ok(acc)
}

/// Mirror of [`cond33_value`]: a `j`-window with `k` summed out.
pub fn cond34_value(grid: &CoefficientGrid, lambda: f64, m: u32, k_cap: u32) -> Result<f64> {
    if k_cap > grid.bound_k() {
        return Err(Error::GridTooSmall {
            bound_j: grid.bound_j(),
            bound_k: grid.bound_k(),
            need_j: 0,
            need_k: k_cap,
        });
    }
    let lm = lambda_index_checked(lambda, m)?;
    let mut acc = 0.0;
    for j in signed_range(i64::from(m), i64::from(lm)) {
        let wj = log_weight(j.magnitude());
        for k in signed_range(0, i64::from(k_cap)) {
            acc += wj * log_weight(k.magnitude()) * grid.diff(DiffOrder::D11, j, k).norm();
        }
    }
    Ok(acc)
}

/// Assemble [`cond33_value`] over the `(lambda, n)` lattice.
pub fn cond33_report(grid: &CoefficientGrid, params: &ConditionParams) -> Result<ConditionReport> {
    let cap = params.truncation();
    lattice_report(ConditionId::C33, params, |lambda, n| {
        cond33_value(grid, lambda, n, cap)
    })
}

/// Assemble [`cond34_value`] over the `(lambda, m)` lattice.
pub fn cond34_report(grid: &CoefficientGrid, params: &ConditionParams) -> Result<ConditionReport> {
    let cap = params.truncation();
    lattice_report(ConditionId::C34, params, |lambda, m| {
        cond34_value(grid, lambda, m, cap)
    })
}

/// Weighted coefficient-decay diagnostic: the supremum of
/// `w(j) w(k) |c_jk|` along `max(|j|, |k|)` shells and along the diagonal.
/// The verdict comes from the shell profile.
pub fn decay_diagnostic(grid: &CoefficientGrid) -> ConditionReport {
    let max_shell = grid.bound_j().max(grid.bound_k());
    let diag_top = grid.bound_j().min(grid.bound_k());
    let mut profile = Vec::new();
    let mut shell_values = Vec::new();

    for t in 0..=max_shell {
        let mut sup: f64 = 0.0;
        let ti = i64::from(t);
        // walk the boundary of the square max(|j|, |k|) = t
        for j in -ti..=ti {
            for &k in &[-ti, ti] {
                sup = sup.max(weighted_modulus(grid, j, k));
            }
        }
        for k in -ti..=ti {
            for &j in &[-ti, ti] {
                sup = sup.max(weighted_modulus(grid, j, k));
            }
        }
        profile.push(ProfilePoint {
            key: ProfileKey::Shell(t),
            value: sup,
        });
        shell_values.push(sup);
    }
    for t in 0..=diag_top {
        let ti = i64::from(t);
        let sup = [(ti, ti), (ti, -ti), (-ti, ti), (-ti, -ti)]
            .iter()
            .map(|&(j, k)| weighted_modulus(grid, j, k))
            .fold(0.0, f64::max);
        profile.push(ProfilePoint {
            key: ProfileKey::Diagonal(t),
            value: sup,
        });
    }

    ConditionReport {
        condition: ConditionId::DECAY,
        truncation: max_shell,
        profile,
        verdict: trend_verdict(&shell_values),
    }
}

fn weighted_modulus(grid: &CoefficientGrid, j: i64, k: i64) -> f64 {
    log_weight(j.unsigned_abs() as u32)
        * log_weight(k.unsigned_abs() as u32)
        * grid.get(j, k).norm()
}
