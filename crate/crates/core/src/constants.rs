//! The slice-rank constants `J(t)` and `Gamma_q`, the set-partition counts
//! `P(k, l)`, and every size threshold used by the finders.
//!
//! `J(t) = (1/t) min_{0<x<1} (1 + x + ... + x^{t-1}) / x^{(t-1)/3}`.
//! With `x = e^u` the logarithm of the objective is convex in `u`, so the
//! minimizer is the unique root of its derivative. Each evaluation scans for
//! descent basins first and fails if it sees more than one.
//!
//! All thresholds are "size at least" bounds, so they round up and are always
//! computed from the upper end of the certified interval for `Gamma_q`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::prime_power;

pub const DEFAULT_TOL: f64 = 1e-10;

const X_LO: f64 = 1e-9;
const X_HI: f64 = 1.0 - 1e-9;
const SCAN_POINTS: usize = 2048;
/// Relative slack added to every floating-point evaluation of the objective.
const EVAL_SLACK: f64 = 1e-13;

/// A certified enclosure `lo <= value <= hi` of `J(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JValue {
    pub t: u64,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub minimizer: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// `q J(q)`.
    Flat,
    /// `(p J(p))^s` for `q = p^s`.
    Tower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaValue {
    pub q: u64,
    pub mode: GammaMode,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Set when tower mode was requested for a prime `q`, where it equals flat mode.
    pub tower_is_flat: bool,
}

/// `ln` of the objective and its derivative with respect to `u = ln x`.
fn log_objective(t: u64, u: f64) -> (f64, f64) {
    let x = u.exp();
    let mut s = 0.0f64;
    let mut ds = 0.0f64;
    let mut p = 1.0f64;
    for i in 0..t {
        s += p;
        ds += i as f64 * p;
        p *= x;
        if p == 0.0 {
            break;
        }
    }
    let e = (t - 1) as f64 / 3.0;
    (s.ln() - e * u, ds / s - e)
}

/// Certified `J(t)` with `hi - lo <= tol`.
pub fn compute_j(t: u64, tol: f64) -> Result<JValue> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("J(t) needs t >= 2, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), JValue>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (t, tol.to_bits());
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Ok(*v);
    }
    let v = compute_j_uncached(t, tol)?;
    cache.lock().unwrap().insert(key, v);
    Ok(v)
}

fn compute_j_uncached(t: u64, tol: f64) -> Result<JValue> {
    let (a, b) = (X_LO.ln(), X_HI.ln());
    let step = (b - a) / (SCAN_POINTS - 1) as f64;
    let hs: Vec<f64> = (0..SCAN_POINTS).map(|i| log_objective(t, a + step * i as f64).0).collect();
    let mut basins = Vec::new();
    for i in 0..SCAN_POINTS {
        let left = i == 0 || hs[i - 1] > hs[i];
        let right = i + 1 == SCAN_POINTS || hs[i + 1] >= hs[i];
        if left && right {
            basins.push(i);
        }
    }
    if basins.len() != 1 {
        return Err(Error::Numeric(format!("J({t}): scan found {} descent basins", basins.len())));
    }
    let i0 = basins[0];
    let mut lo = a + step * i0.saturating_sub(1) as f64;
    let mut hi = (a + step * (i0 + 1) as f64).min(b);
    if log_objective(t, lo).1 > 0.0 || log_objective(t, hi).1 < 0.0 {
        return Err(Error::Numeric(format!("J({t}): derivative does not change sign in bracket")));
    }
    let tf = t as f64;
    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (h, dh) = log_objective(t, mid);
        if dh > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        let slack = EVAL_SLACK * (1.0 + h.abs() + tf.ln());
        let h_lo = h - dh.abs() * (hi - lo) - slack;
        let h_hi = h + slack;
        let v = JValue {
            t,
            value: h.exp() / tf,
            lo: h_lo.exp() / tf,
            hi: h_hi.exp() / tf,
            minimizer: mid.exp(),
        };
        best = Some(v);
        if v.hi - v.lo <= tol && hi - lo < 1e-12 {
            break;
        }
    }
    let v = best.unwrap();
    if v.hi - v.lo > tol {
        return Err(Error::Numeric(format!("J({t}): could not reach tolerance {tol:e}")));
    }
    Ok(v)
}

/// `Gamma_q` in the requested mode.
pub fn gamma(q: u64, mode: GammaMode, tol: f64) -> Result<GammaValue> {
    let (p, s) = prime_power(q).ok_or(Error::NotPrime(q))?;
    let (value, lo, hi) = match mode {
        GammaMode::Tower if s > 1 => {
            let j = compute_j(p as u64, tol / (s as f64 * (p as f64).powi(s as i32)))?;
            let pf = p as f64;
            let up = 1.0 + 4.0 * f64::EPSILON * s as f64;
            (
                (pf * j.value).powi(s as i32),
                (pf * j.lo).powi(s as i32) / up,
                (pf * j.hi).powi(s as i32) * up,
            )
        }
        _ => {
            let j = compute_j(q, tol / q as f64)?;
            let qf = q as f64;
            (qf * j.value, qf * j.lo, qf * j.hi)
        }
    };
    Ok(GammaValue { q, mode, value, lo, hi, tower_is_flat: mode == GammaMode::Tower && s == 1 })
}

/// `Gamma_q` in flat mode at the default tolerance.
pub fn gamma_flat(q: u64) -> Result<GammaValue> {
    gamma(q, GammaMode::Flat, DEFAULT_TOL)
}

/// Number of partitions of a `k`-set into `l` nonempty parts.
pub fn stirling_partitions(k: u32, l: u32) -> Result<u128> {
    if l == 0 || l > k {
        return Err(Error::InvalidArgument(format!("P({k},{l}) needs 1 <= l <= k")));
    }
    let (k, l) = (k as usize, l as usize);
    let mut row = vec![0u128; l + 1];
    row[0] = 1;
    for _ in 0..k {
        for j in (1..=l).rev() {
            row[j] = (j as u128)
                .checked_mul(row[j])
                .and_then(|v| v.checked_add(row[j - 1]))
                .ok_or_else(|| Error::Numeric("P(k,l) overflows u128".into()))?;
        }
        row[0] = 0;
    }
    Ok(row[l])
}

/// `beta_lambda` from the shape-growing induction with `beta_1 = base`.
pub fn beta(k: u32, lambda: u32, base: u128) -> Result<u128> {
    if lambda == 0 || lambda > k {
        return Err(Error::InvalidArgument(format!("beta({lambda}) needs 1 <= lambda <= k = {k}")));
    }
    let mut b = base;
    for l in 1..lambda {
        b = b.saturating_add(stirling_partitions(k, l)?.saturating_mul(k as u128));
    }
    Ok(b)
}

/// `ceil(q^{1 + (1 - 1/k) n})`, exactly.
pub fn pigeonhole_threshold(q: u64, k: u32, n: u32) -> u128 {
    assert!(k >= 1);
    let big = BigUint::from(q).pow(k + (k - 1) * n);
    let r = big.nth_root(k);
    let r = if r.pow(k) == big { r } else { r + 1u32 };
    u128::try_from(r).unwrap_or(u128::MAX)
}

fn ceil_sat(x: f64) -> u128 {
    if !x.is_finite() || x >= u128::MAX as f64 {
        u128::MAX
    } else if x <= 0.0 {
        0
    } else {
        x.ceil() as u128
    }
}

/// Inputs shared by the threshold formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub q: u64,
    pub k: u32,
    pub n: u32,
    /// Number of column classes.
    pub ell: u32,
    pub mode: GammaMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "arg")]
pub enum ThresholdKind {
    /// Both tuples of the matrix pigeonhole lemma.
    Pigeonhole,
    /// The multiplier `beta_lambda` of the shape induction (clause (i) base).
    Beta(u32),
    /// `N_t` of the generic-solution induction.
    Temperate(u64),
    /// `N_t` of the high-rank induction.
    Rank(u64),
    /// List length for `t` recombinations from one anchor.
    Replacement(u64),
}

impl ThresholdKind {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once('(') {
            Some((n, rest)) => (n, Some(rest.trim_end_matches(')'))),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u64> {
            a.ok_or_else(|| Error::Parse(format!("threshold kind {name} needs an argument")))?
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad threshold argument in {s}")))
        };
        match name.trim() {
            "pigeonhole" => Ok(ThresholdKind::Pigeonhole),
            "beta" => Ok(ThresholdKind::Beta(num(arg)? as u32)),
            "temperate" => Ok(ThresholdKind::Temperate(num(arg)?)),
            "rank" => Ok(ThresholdKind::Rank(num(arg)?)),
            "replacement" => Ok(ThresholdKind::Replacement(num(arg)?)),
            other => Err(Error::Unknown { what: "threshold kind", name: other.into() }),
        }
    }
}

/// Upper end of the certified `Gamma_q^n`.
pub fn gamma_pow_hi(q: u64, n: u32, mode: GammaMode) -> Result<f64> {
    Ok(gamma(q, mode, DEFAULT_TOL)?.hi.powi(n as i32))
}

/// The threshold of the given kind.
pub fn thresholds(p: &ThresholdParams, kind: ThresholdKind) -> Result<u128> {
    let gn = gamma_pow_hi(p.q, p.n, p.mode)?;
    let qk = (p.q as f64).powi(p.k as i32);
    match kind {
        ThresholdKind::Pigeonhole => Ok(pigeonhole_threshold(p.q, p.k, p.n)),
        ThresholdKind::Beta(l) => beta(p.k, l, 1),
        ThresholdKind::Temperate(t) => {
            let base = pigeonhole_threshold(p.q, p.ell.max(1), p.n) as f64;
            Ok(ceil_sat(base + t as f64 * 4.0 * p.k as f64 * qk * gn))
        }
        ThresholdKind::Rank(t) => Ok(ceil_sat(t as f64 * 4.0 * p.k as f64 * qk * gn)),
        ThresholdKind::Replacement(t) => Ok(ceil_sat(4.0 * t as f64 * gn)),
    }
}

/// `|S|` needed for one collision from a list: `ceil(Gamma_q^n)`.
pub fn single_replacement_length(q: u64, n: u32, mode: GammaMode) -> Result<u128> {
    Ok(ceil_sat(gamma_pow_hi(q, n, mode)?))
}

/// List length that guarantees a recombination avoiding a given pair break.
pub fn breaking_pair_length(q: u64, k: u32, n: u32, mode: GammaMode) -> Result<u128> {
    Ok(ceil_sat(4.0 * (q as f64).powi(k as i32) * gamma_pow_hi(q, n, mode)?))
}

/// `|S|` for the dedicated W-shape construction: `4 Gamma_q^n`.
pub fn w_shape_threshold(q: u64, n: u32, mode: GammaMode) -> Result<u128> {
    Ok(ceil_sat(4.0 * gamma_pow_hi(q, n, mode)?))
}

/// `|S|` that guarantees a shape through the induction: `beta_k * base^n`,
/// where clause (ii) uses `beta_1 = q` and `base = max(Gamma_q, q^{(k-1)/k})`.
pub fn shape_threshold(q: u64, k: u32, n: u32, clause_ii: bool, mode: GammaMode) -> Result<u128> {
    let g = gamma(q, mode, DEFAULT_TOL)?.hi;
    if clause_ii {
        let base = g.max((q as f64).powf((k as f64 - 1.0) / k as f64));
        let b = beta(k, k, q as u128)?;
        Ok(ceil_sat(b as f64 * base.powi(n as i32)))
    } else {
        let b = beta(k, k, 1)?;
        Ok(ceil_sat(b as f64 * g.powi(n as i32)))
    }
}

/// Recombination bound for shapes: `max(N_1, k_1 + N_2)`.
pub fn reducible_shape_threshold(n1: u128, k1: u32, n2: u128) -> u128 {
    n1.max(n2.saturating_add(k1 as u128))
}

/// Recombination bound for generic solutions: `max(q n N_1, n q^{k_1} N_2)`.
pub fn reducible_generic_threshold(q: u64, n: u32, n1: u128, k1: u32, n2: u128) -> u128 {
    let qn = (q as u128).saturating_mul(n as u128);
    let nqk = (n as u128).saturating_mul((q as u128).saturating_pow(k1));
    qn.saturating_mul(n1).max(nqk.saturating_mul(n2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j2_closed() -> f64 {
        3.0 * 2f64.powf(-5.0 / 3.0)
    }

    fn j3_closed() -> f64 {
        let x = (-1.0 + 33f64.sqrt()) / 8.0;
        (1.0 + x + x * x) / x.powf(2.0 / 3.0) / 3.0
    }

    #[test]
    fn j2_matches_closed_form() {
        let j = compute_j(2, 1e-12).unwrap();
        assert!((j.value - j2_closed()).abs() < 1e-10);
        assert!(j.lo <= j2_closed() && j2_closed() <= j.hi);
        assert!((j.minimizer - 0.5).abs() < 1e-6);
        assert!((j.value - 0.944940).abs() < 1e-6);
    }

    #[test]
    fn j3_matches_quadratic_root_and_grid() {
        let j = compute_j(3, 1e-12).unwrap();
        assert!((j.value - j3_closed()).abs() < 1e-10);
        assert!((j.value - 0.918369).abs() < 1e-6);
        let grid = (1..1_000_000)
            .map(|i| {
                let x = i as f64 / 1e6;
                (1.0 + x + x * x) / x.powf(2.0 / 3.0) / 3.0
            })
            .fold(f64::INFINITY, f64::min);
        assert!(grid >= j.lo - 1e-12);
        assert!(grid - j.value < 1e-9);
    }

    #[test]
    fn j_decreasing() {
        let vals: Vec<f64> = (2..=50).map(|t| compute_j(t, 1e-10).unwrap().value).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn gamma_examples() {
        let g2 = gamma_flat(2).unwrap();
        assert!((g2.value - 3.0 * 2f64.powf(-2.0 / 3.0)).abs() < 1e-9);
        assert!((g2.value - 1.88988).abs() < 1e-5);
        let g3 = gamma_flat(3).unwrap();
        assert!((g3.value - 3.0 * j3_closed()).abs() < 1e-9);
        assert!((g3.value - 2.75510).abs() < 1e-5);
        let g4t = gamma(4, GammaMode::Tower, DEFAULT_TOL).unwrap();
        let g4f = gamma_flat(4).unwrap();
        assert!((g4t.value - (2.0 * j2_closed()).powi(2)).abs() < 1e-9);
        assert!((g4t.value - 3.57166).abs() < 1e-4);
        assert!(g4t.value < g4f.value);
        assert!(gamma(5, GammaMode::Tower, DEFAULT_TOL).unwrap().tower_is_flat);
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41, 43, 47, 49] {
            let g = gamma_flat(q).unwrap();
            assert!(g.hi < 0.945 * q as f64, "q={q}");
            assert!(g.lo <= g.value && g.value <= g.hi);
        }
    }

    #[test]
    fn j_rejects_small_t() {
        assert!(compute_j(1, 1e-10).is_err());
        assert!(compute_j(2, 0.0).is_err());
    }

    #[test]
    fn large_t_is_finite() {
        let j = compute_j(65536, 1e-8).unwrap();
        assert!(j.value > 0.0 && j.value < compute_j(2, 1e-10).unwrap().value);
    }

    fn set_partitions_count(k: usize, l: usize) -> u128 {
        // restricted growth strings
        fn go(pos: usize, k: usize, used: usize, l: usize) -> u128 {
            if pos == k {
                return (used == l) as u128;
            }
            let mut total = 0;
            for c in 0..=used.min(l - 1) {
                total += go(pos + 1, k, used.max(c + 1), l);
            }
            total
        }
        go(0, k, 0, l)
    }

    #[test]
    fn stirling_examples() {
        assert_eq!(stirling_partitions(5, 1).unwrap(), 1);
        assert_eq!(stirling_partitions(3, 2).unwrap(), 3);
        assert_eq!(stirling_partitions(4, 2).unwrap(), 7);
        for k in 1..=8u32 {
            for l in 1..=k {
                assert_eq!(stirling_partitions(k, l).unwrap(), set_partitions_count(k as usize, l as usize));
            }
        }
        assert!(stirling_partitions(3, 4).is_err());
        assert!(stirling_partitions(3, 0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(pigeonhole_threshold(3, 3, 6), 243);
        assert_eq!(pigeonhole_threshold(3, 2, 1), 6);
        assert_eq!(pigeonhole_threshold(3, 3, 3), 27);
        let p = ThresholdParams { q: 5, k: 5, n: 1, ell: 3, mode: GammaMode::Flat };
        assert_eq!(thresholds(&p, ThresholdKind::Beta(1)).unwrap(), 1);
        assert_eq!(thresholds(&p, ThresholdKind::Beta(2)).unwrap(), 6);
        assert_eq!(thresholds(&p, ThresholdKind::Pigeonhole).unwrap(), pigeonhole_threshold(5, 5, 1));
        assert!(ThresholdKind::parse("bogus").is_err());
        assert_eq!(ThresholdKind::parse("temperate(2)").unwrap(), ThresholdKind::Temperate(2));
    }

    #[test]
    fn thresholds_monotone() {
        for q in [2u64, 3, 5] {
            for k in 2..5u32 {
                let mut prev: Vec<u128> = vec![0; 5];
                for n in 1..6u32 {
                    let p = ThresholdParams { q, k, n, ell: 2, mode: GammaMode::Flat };
                    let kinds = [
                        ThresholdKind::Pigeonhole,
                        ThresholdKind::Temperate(1),
                        ThresholdKind::Rank(1),
                        ThresholdKind::Replacement(1),
                        ThresholdKind::Replacement(3),
                    ];
                    for (i, kind) in kinds.iter().enumerate() {
                        let v = thresholds(&p, *kind).unwrap();
                        assert!(v >= prev[i]);
                        prev[i] = v;
                    }
                    let t1 = thresholds(&p, ThresholdKind::Temperate(1)).unwrap();
                    let t2 = thresholds(&p, ThresholdKind::Temperate(2)).unwrap();
                    assert!(t2 >= t1);
                }
            }
        }
    }
}
