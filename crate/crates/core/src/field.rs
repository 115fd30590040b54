//! Exact arithmetic in `F_q` for prime powers `q = p^s <= 2^16`, plus the
//! canonical encoding of vectors in `F_q^n`.
//!
//! Elements are integers in `[0, q)`. For `s > 1` the base-`p` digits of an
//! element are the coefficients (low degree first) of a polynomial modulo a
//! fixed monic primitive polynomial of degree `s`. The polynomial is the
//! first primitive one in the order of its low coefficients read as a base-`p`
//! integer, so for example `F_4` uses `x^2 + x + 1`, `F_8` uses `x^3 + x + 1`
//! and `F_9` uses `x^2 + x + 2`. Multiplication uses log/antilog tables and
//! addition uses a Zech logarithm table, so every operation is a table lookup.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A field element under the canonical encoding.
pub type Elem = u16;

pub const MAX_ORDER: u64 = 1 << 16;

const NO_LOG: u32 = u32::MAX;

struct Tables {
    p: u32,
    s: u32,
    q: u32,
    /// Low coefficients `c_0..c_{s-1}` of the modulus `x^s + sum c_i x^i`.
    modulus: Vec<u32>,
    /// `exp[i] = g^i` for `i` in `[0, 2(q-1))`.
    exp: Vec<Elem>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
    /// `zech[i] = log(1 + g^i)`, or `NO_LOG` when `1 + g^i = 0`. Only for `s > 1`.
    zech: Vec<u32>,
    neg: Vec<Elem>,
}

/// Arithmetic context for `F_q`. Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct FieldCtx {
    t: Arc<Tables>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.label())
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.t.p == other.t.p && self.t.s == other.t.s
    }
}

impl Eq for FieldCtx {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, s)` with `q = p^s`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut s = 0;
    while rest % p == 0 {
        rest /= p;
        s += 1;
    }
    (rest == 1).then_some((p as u32, s))
}

fn digits(mut a: u32, p: u32, s: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(s as usize);
    for _ in 0..s {
        d.push(a % p);
        a /= p;
    }
    d
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Digit-wise (polynomial) addition, used to build the Zech table.
fn poly_add(a: u32, b: u32, p: u32, s: u32) -> u32 {
    let da = digits(a, p, s);
    let db = digits(b, p, s);
    let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
    undigits(&sum, p)
}

/// Multiplies the polynomial encoded by `a` by `x`, reducing by the modulus.
fn poly_mulx(a: u32, modulus: &[u32], p: u32, s: u32) -> u32 {
    let d = digits(a, p, s);
    let top = d[s as usize - 1];
    let mut out = vec![0u32; s as usize];
    for i in (1..s as usize).rev() {
        out[i] = d[i - 1];
    }
    if top != 0 {
        for (i, o) in out.iter_mut().enumerate() {
            // x^s = -sum c_i x^i
            let sub = (top * modulus[i]) % p;
            *o = (*o + p - sub) % p;
        }
    }
    undigits(&out, p)
}

/// Powers of `x` modulo the candidate, if `x` has multiplicative order `q - 1`.
fn primitive_powers(modulus: &[u32], p: u32, s: u32) -> Option<Vec<Elem>> {
    let q = p.pow(s);
    let mut powers = Vec::with_capacity(q as usize - 1);
    let mut e = 1u32;
    for i in 0..q - 1 {
        if i > 0 && e == 1 {
            return None;
        }
        powers.push(e as Elem);
        e = poly_mulx(e, modulus, p, s);
    }
    (e == 1).then_some(powers)
}

fn primitive_root_mod(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= p as u64;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r
    };
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow(g as u64, ((p - 1) / f) as u64) != 1))
        .expect("every prime has a primitive root")
}

impl FieldCtx {
    /// Builds `F_{p^s}`.
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if s == 0 {
            return Err(Error::InvalidArgument("extension degree must be at least 1".into()));
        }
        let q = (p as u128).checked_pow(s).unwrap_or(u128::MAX);
        if q > MAX_ORDER as u128 {
            return Err(Error::FieldOrderOutOfRange(q.min(u64::MAX as u128) as u64));
        }
        let (p, q) = (p as u32, q as u32);
        let (modulus, cycle) = if s == 1 {
            let g = primitive_root_mod(p);
            let mut cycle = Vec::with_capacity(p as usize - 1);
            let mut e = 1u32;
            for _ in 0..p - 1 {
                cycle.push(e as Elem);
                e = e * g % p;
            }
            (vec![(p - g) % p], cycle)
        } else {
            let mut found = None;
            for c in 0..q {
                let coeffs = digits(c, p, s);
                if coeffs[0] == 0 {
                    continue;
                }
                if let Some(pw) = primitive_powers(&coeffs, p, s) {
                    found = Some((coeffs, pw));
                    break;
                }
            }
            found.expect("a primitive polynomial exists for every (p, s)")
        };
        let order = q as usize - 1;
        let mut exp = Vec::with_capacity(2 * order);
        exp.extend_from_slice(&cycle);
        exp.extend_from_slice(&cycle);
        let mut log = vec![NO_LOG; q as usize];
        for (i, &e) in cycle.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        let zech = if s > 1 {
            cycle
                .iter()
                .map(|&e| {
                    let sum = poly_add(1, e as u32, p, s);
                    if sum == 0 {
                        NO_LOG
                    } else {
                        log[sum as usize]
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        let neg = (0..q)
            .map(|a| {
                let d: Vec<u32> = digits(a, p, s).iter().map(|&c| (p - c) % p).collect();
                undigits(&d, p) as Elem
            })
            .collect();
        Ok(FieldCtx {
            t: Arc::new(Tables { p, s, q, modulus, exp, log, zech, neg }),
        })
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn of_order(q: u64) -> Result<Self> {
        match prime_power(q) {
            Some((p, s)) => FieldCtx::new(p as u64, s),
            None if q > MAX_ORDER => Err(Error::FieldOrderOutOfRange(q)),
            None => Err(Error::NotPrime(q)),
        }
    }

    pub fn p(&self) -> u32 {
        self.t.p
    }

    pub fn s(&self) -> u32 {
        self.t.s
    }

    pub fn q(&self) -> u32 {
        self.t.q
    }

    /// `q` as written in file headers: `p` for prime fields, `p^s` otherwise.
    pub fn label(&self) -> String {
        if self.t.s == 1 {
            self.t.p.to_string()
        } else {
            format!("{}^{}", self.t.p, self.t.s)
        }
    }

    /// Low coefficients of the defining polynomial (for `s = 1`, `x - g` for
    /// the primitive root `g` used by the log tables).
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    pub fn is_valid(&self, a: u32) -> bool {
        a < self.t.q
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let t = &*self.t;
        if t.s == 1 {
            let r = a as u32 + b as u32;
            return if r >= t.p { (r - t.p) as Elem } else { r as Elem };
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let la = t.log[a as usize];
        let lb = t.log[b as usize];
        let ord = t.q - 1;
        let d = if lb >= la { lb - la } else { lb + ord - la };
        let z = t.zech[d as usize];
        if z == NO_LOG {
            0
        } else {
            t.exp[(la + z) as usize]
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.t.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        let t = &*self.t;
        if a == 0 || b == 0 {
            return 0;
        }
        if t.s == 1 {
            return ((a as u32 * b as u32) % t.p) as Elem;
        }
        t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero");
        let t = &*self.t;
        let l = t.log[a as usize];
        t.exp[((t.q - 1 - l) % (t.q - 1)) as usize]
    }

    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    /// Embeds an integer through the prime subfield.
    pub fn from_i64(&self, v: i64) -> Elem {
        v.rem_euclid(self.t.p as i64) as Elem
    }

    /// Generator of the multiplicative group used by the log tables.
    pub fn generator(&self) -> Elem {
        self.t.exp[1 % self.t.exp.len().max(1)]
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.t.q as Elem
    }

    // -- vector helpers --

    /// `acc += c * x`, coordinate-wise.
    #[inline]
    pub fn axpy(&self, acc: &mut [Elem], c: Elem, x: &[Elem]) {
        if c == 0 {
            return;
        }
        for (a, &xi) in acc.iter_mut().zip(x) {
            *a = self.add(*a, self.mul(c, xi));
        }
    }

    pub fn vec_add(&self, x: &[Elem], y: &[Elem]) -> Vec<Elem> {
        x.iter().zip(y).map(|(&a, &b)| self.add(a, b)).collect()
    }

    pub fn vec_sub(&self, x: &[Elem], y: &[Elem]) -> Vec<Elem> {
        x.iter().zip(y).map(|(&a, &b)| self.sub(a, b)).collect()
    }

    pub fn vec_scale(&self, c: Elem, x: &[Elem]) -> Vec<Elem> {
        x.iter().map(|&a| self.mul(c, a)).collect()
    }

    pub fn dot(&self, x: &[Elem], y: &[Elem]) -> Elem {
        x.iter().zip(y).fold(0, |acc, (&a, &b)| self.add(acc, self.mul(a, b)))
    }

    /// `sum_j b_j x_j` for a coefficient row `b` and points `x_j` of dimension `n`.
    pub fn combine(&self, b: &[Elem], xs: &[FqVector], n: usize) -> Vec<Elem> {
        let mut acc = vec![0; n];
        for (&c, x) in b.iter().zip(xs) {
            self.axpy(&mut acc, c, &x.0);
        }
        acc
    }

    /// Base-`q` index of a vector, most significant coordinate first.
    pub fn vec_index(&self, v: &[Elem]) -> Result<u64> {
        let q = self.t.q as u64;
        let mut idx: u64 = 0;
        for &c in v {
            if c as u64 >= q {
                return Err(Error::InvalidArgument(format!("coordinate {c} not in [0, {q})")));
            }
            idx = idx
                .checked_mul(q)
                .and_then(|x| x.checked_add(c as u64))
                .ok_or_else(|| Error::InvalidArgument("vector index overflows u64".into()))?;
        }
        Ok(idx)
    }

    /// Inverse of [`FieldCtx::vec_index`].
    pub fn vec_from_index(&self, n: usize, idx: u64) -> Result<FqVector> {
        let q = self.t.q as u64;
        let total = self.space_size(n);
        if total.is_none_or(|t| idx >= t) {
            return Err(Error::IndexOutOfRange { idx, q: self.t.q, n });
        }
        let mut coords = vec![0; n];
        let mut rest = idx;
        for c in coords.iter_mut().rev() {
            *c = (rest % q) as Elem;
            rest /= q;
        }
        Ok(FqVector(coords))
    }

    /// `q^n`, if it fits in a `u64`.
    pub fn space_size(&self, n: usize) -> Option<u64> {
        (self.t.q as u64).checked_pow(n as u32)
    }
}

/// A vector in `F_q^n` under the canonical element encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FqVector(pub Vec<Elem>);

impl FqVector {
    pub fn zero(n: usize) -> Self {
        FqVector(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Elem] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl From<Vec<Elem>> for FqVector {
    fn from(v: Vec<Elem>) -> Self {
        FqVector(v)
    }
}
