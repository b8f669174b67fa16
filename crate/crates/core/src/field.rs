//! Finite fields `F_q = F_p[t]/(modulus)` with dense integer element encoding.
//!
//! An element with coefficient vector `(c_0, ..., c_{l-1})` is stored as the
//! index `c_0 + c_1 p + ... + c_{l-1} p^{l-1}`. Index 0 is zero and index 1 is
//! one. Multiplication goes through discrete log tables built once at
//! construction, so every downstream routine can use flat length-`q` arrays.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default upper bound on `q`; `SUMPROD_CAP` overrides it.
pub const DEFAULT_CAP: u64 = 1 << 20;

/// Reads the field-size cap from `SUMPROD_CAP`, falling back to [`DEFAULT_CAP`].
pub fn cap_from_env() -> u64 {
    std::env::var("SUMPROD_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

/// A field element, identified by its index in `[0, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

/// The field `F_{p^l}` together with its arithmetic tables.
///
/// Immutable after construction.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    l: u32,
    q: u32,
    /// `l + 1` coefficients, constant term first, leading coefficient 1.
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    roots: Vec<Complex64>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("l", &self.l)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.l == other.l && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn checked_order(p: u64, l: u32, cap: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    if l == 0 || l > 64 {
        return Err(Error::DegreeOutOfRange(l));
    }
    let mut q: u128 = 1;
    for _ in 0..l {
        q *= p as u128;
        if q > cap as u128 || q > u32::MAX as u128 {
            let order = (p as u128).checked_pow(l).unwrap_or(u128::MAX);
            return Err(Error::FieldTooLarge { order, cap });
        }
    }
    Ok(q as u32)
}

/// Builds `F_{p^l}` with the irreducible modulus of smallest encoding, using
/// the cap from the environment.
pub fn make_field(p: u64, l: u32) -> Result<FieldSpec> {
    FieldSpec::new(p, l, cap_from_env())
}

impl FieldSpec {
    /// Builds `F_{p^l}` with the irreducible modulus of smallest encoding.
    pub fn new(p: u64, l: u32, cap: u64) -> Result<Self> {
        let q = checked_order(p, l, cap)?;
        let p = p as u32;
        let modulus = (0..q)
            .map(|low| {
                let mut m = digits(low, p, l);
                m.push(1);
                m
            })
            .find(|m| poly::is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists");
        Ok(Self::build(p, l, q, modulus))
    }

    /// Builds `F_{p^l}` over an explicit monic irreducible modulus, given by
    /// its encoding `sum c_i p^i` including the leading term.
    pub fn with_modulus(p: u64, l: u32, encoding: u64, cap: u64) -> Result<Self> {
        let q = checked_order(p, l, cap)?;
        let p = p as u32;
        let q64 = q as u64;
        if encoding < q64 || encoding >= 2 * q64 {
            return Err(Error::BadModulus(format!(
                "encoding {encoding} is not a monic polynomial of degree {l} over F_{p}"
            )));
        }
        let mut modulus = digits((encoding - q64) as u32, p, l);
        modulus.push(1);
        if !poly::is_irreducible(&modulus, p) {
            return Err(Error::BadModulus(format!(
                "encoding {encoding} is reducible over F_{p}"
            )));
        }
        Ok(Self::build(p, l, q, modulus))
    }

    fn build(p: u32, l: u32, q: u32, modulus: Vec<u32>) -> Self {
        let n = q as usize;
        let slow = SlowMul {
            p,
            l: l as usize,
            modulus: &modulus,
        };

        // Discrete log tables from a primitive element.
        let generator = if q == 2 {
            1
        } else {
            let factors = prime_factors(q as u64 - 1);
            (2..q)
                .find(|&g| {
                    factors
                        .iter()
                        .all(|&r| slow.pow(g, (q as u64 - 1) / r) != 1)
                })
                .expect("multiplicative group is cyclic")
        };
        let mut exp = vec![0u32; n - 1];
        let mut log = vec![0u32; n];
        let mut cur = 1u32;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = cur;
            log[cur as usize] = i as u32;
            cur = slow.mul(cur, generator);
        }
        debug_assert_eq!(cur, 1);

        let mut field = FieldSpec {
            p,
            l,
            q,
            modulus,
            exp,
            log,
            trace: Vec::new(),
            roots: (0..p)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64))
                .collect(),
        };

        // Tr is F_p-linear: tabulate it on the basis t^i, then extend.
        let basis: Vec<u32> = (0..l)
            .map(|i| field.frobenius_trace(Elem(p.pow(i))))
            .collect();
        field.trace = (0..q)
            .map(|a| {
                digits(a, p, l)
                    .iter()
                    .zip(&basis)
                    .map(|(&c, &t)| c as u64 * t as u64)
                    .sum::<u64>() as u32
                    % p
            })
            .collect();
        field
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Size of the field as a `usize`, for sizing flat arrays.
    pub fn order(&self) -> usize {
        self.q as usize
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Modulus encoded as `sum c_i p^i`, leading coefficient included.
    pub fn modulus_encoding(&self) -> u64 {
        self.modulus
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.q).map(Elem)
    }

    pub fn elem(&self, index: u64) -> Result<Elem> {
        if index < self.q as u64 {
            Ok(Elem(index as u32))
        } else {
            Err(Error::ElementOutOfRange {
                index,
                order: self.q,
            })
        }
    }

    /// Coefficients `(c_0, ..., c_{l-1})` of an element.
    pub fn coefficients(&self, a: Elem) -> Vec<u32> {
        digits(a.0, self.p, self.l)
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> Elem {
        Elem(
            coeffs
                .iter()
                .rev()
                .fold(0u32, |acc, &c| acc * self.p + c % self.p),
        )
    }

    /// Embeds an integer into the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.l == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= self.p { s - self.p } else { s });
        }
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        while x != 0 || y != 0 {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place *= self.p;
            x /= self.p;
            y /= self.p;
        }
        Elem(out)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.l == 1 {
            return Elem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        while x != 0 {
            let d = x % self.p;
            if d != 0 {
                out += (self.p - d) * place;
            }
            place *= self.p;
            x /= self.p;
        }
        Elem(out)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        if self.l == 1 {
            return Elem((a.0 as u64 * b.0 as u64 % self.p as u64) as u32);
        }
        let n = self.q - 1;
        let s = self.log[a.index()] + self.log[b.index()];
        Elem(self.exp[(if s >= n { s - n } else { s }) as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.q - 1;
        let lg = self.log[a.index()];
        Ok(Elem(self.exp[((n - lg) % n) as usize]))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.0 == 0 {
            return Elem::ZERO;
        }
        let n = (self.q - 1) as u64;
        let lg = self.log[a.index()] as u64;
        Elem(self.exp[((lg * (e % n)) % n) as usize])
    }

    /// Single entry point over the arithmetic operations; `b` is required
    /// for the binary ones.
    pub fn apply(&self, op: ArithOp, a: Elem, b: Option<Elem>) -> Result<Elem> {
        self.check(a)?;
        let rhs = || -> Result<Elem> {
            let b = b.ok_or(Error::EmptyInput("second operand"))?;
            self.check(b)?;
            Ok(b)
        };
        Ok(match op {
            ArithOp::Add => self.add(a, rhs()?),
            ArithOp::Sub => self.sub(a, rhs()?),
            ArithOp::Mul => self.mul(a, rhs()?),
            ArithOp::Neg => self.neg(a),
            ArithOp::Inv => self.inv(a)?,
        })
    }

    fn check(&self, a: Elem) -> Result<()> {
        self.elem(a.0 as u64).map(|_| ())
    }

    /// Absolute trace `Tr(a)` into the prime subfield, as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: Elem) -> u32 {
        self.trace[a.index()]
    }

    /// `a + a^p + ... + a^{p^{l-1}}` evaluated by repeated Frobenius.
    fn frobenius_trace(&self, a: Elem) -> u32 {
        let mut sum = Elem::ZERO;
        let mut cur = a;
        for _ in 0..self.l {
            sum = self.add(sum, cur);
            cur = self.pow(cur, self.p as u64);
        }
        debug_assert!(sum.0 < self.p, "trace must land in the prime subfield");
        sum.0
    }

    /// `exp(2 pi i k / p)` for `k` reduced mod `p`.
    #[inline]
    pub fn root_of_unity(&self, k: u32) -> Complex64 {
        self.roots[(k % self.p) as usize]
    }

    /// The canonical additive character `chi(a) = exp(2 pi i Tr(a) / p)`.
    #[inline]
    pub fn chi(&self, a: Elem) -> Complex64 {
        self.roots[self.trace(a) as usize]
    }

    /// Gram matrix `G[i][j] = Tr(t^{i+j})` of the trace form in the
    /// coefficient basis. `Tr(x m) = coeffs(x)^T G coeffs(m) mod p`.
    pub fn trace_gram(&self) -> Vec<Vec<u32>> {
        let l = self.l as usize;
        let basis: Vec<Elem> = (0..l).map(|i| Elem(self.p.pow(i as u32))).collect();
        (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| self.trace(self.mul(basis[i], basis[j])))
                    .collect()
            })
            .collect()
    }

    /// Fixed points of `x -> x^{p^d}`: the copy of `F_{p^d}` inside this field.
    pub fn subfield(&self, d: u32) -> Result<Vec<Elem>> {
        if d == 0 || !self.l.is_multiple_of(d) {
            return Err(Error::BadDescriptor(format!(
                "subfield degree {d} does not divide {}",
                self.l
            )));
        }
        let e = (self.p as u64).pow(d);
        Ok(self.elements().filter(|&x| self.pow(x, e) == x).collect())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}/{}", self.p, self.l, self.modulus_encoding())
    }
}

/// Parses `"p^l"` or `"p^l/modulus-encoding"`, with the cap from the environment.
impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_field(s, cap_from_env())
    }
}

pub fn parse_field(s: &str, cap: u64) -> Result<FieldSpec> {
    let bad = || Error::Parse(format!("field descriptor {s:?}, expected p^l or p^l/modulus"));
    let s = s.trim();
    let (order, modulus) = match s.split_once('/') {
        Some((o, m)) => (o, Some(m)),
        None => (s, None),
    };
    let (p, l) = match order.split_once('^') {
        Some((p, l)) => (p, l),
        None => (order, "1"),
    };
    let p: u64 = p.trim().parse().map_err(|_| bad())?;
    let l: u32 = l.trim().parse().map_err(|_| bad())?;
    match modulus {
        Some(m) => {
            let enc: u64 = m.trim().parse().map_err(|_| bad())?;
            FieldSpec::with_modulus(p, l, enc, cap)
        }
        None => FieldSpec::new(p, l, cap),
    }
}

fn digits(mut x: u32, p: u32, l: u32) -> Vec<u32> {
    (0..l)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

/// Schoolbook multiplication used only while building the log tables.
struct SlowMul<'a> {
    p: u32,
    l: usize,
    modulus: &'a [u32],
}

impl SlowMul<'_> {
    fn mul(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let a = digits(a, self.p, self.l as u32);
        let b = digits(b, self.p, self.l as u32);
        let mut prod = vec![0u64; 2 * self.l];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for k in (self.l..2 * self.l).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in self.modulus[..self.l].iter().enumerate() {
                let idx = k - self.l + i;
                prod[idx] = (prod[idx] + (p - c) * m as u64) % p;
            }
        }
        prod[..self.l]
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * p + c) as u32
    }

    fn pow(&self, mut base: u32, mut e: u64) -> u32 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Dense polynomials over `F_p`, constant term first.
pub(crate) mod poly {
    fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod(a: u32, p: u32) -> u32 {
        // p is prime: a^(p-2)
        let (mut acc, mut base, mut e) = (1u64, a as u64 % p as u64, p as u64 - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        acc as u32
    }

    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let mut r = trim(a.to_vec());
        let f = trim(f.to_vec());
        let df = f.len() - 1;
        let lead_inv = inv_mod(f[df], p) as u64;
        while r.len() > df {
            let k = r.len() - 1;
            let c = r[k] as u64 * lead_inv % p as u64;
            for (i, &fi) in f.iter().enumerate() {
                let idx = k - df + i;
                r[idx] = ((r[idx] as u64 + (p as u64 - c) * fi as u64) % p as u64) as u32;
            }
            r = trim(r);
        }
        r
    }

    fn mul_mod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, f, p)
    }

    fn pow_mod(base: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
        let mut acc = vec![1];
        let mut base = rem(base, f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(&acc, &base, f, p);
            }
            base = mul_mod(&base, &base, f, p);
            e >>= 1;
        }
        acc
    }

    fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    (x + p - y) % p
                })
                .collect(),
        )
    }

    /// `t^{p^k} mod f`.
    fn frobenius_power(k: u32, f: &[u32], p: u32) -> Vec<u32> {
        let mut h = rem(&[0, 1], f, p);
        for _ in 0..k {
            h = pow_mod(&h, p as u64, f, p);
        }
        h
    }

    /// Rabin's irreducibility test for a monic `f` of degree `l >= 1`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let f = trim(f.to_vec());
        if f.len() < 2 {
            return false;
        }
        let l = (f.len() - 1) as u32;
        if l == 1 {
            return true;
        }
        let x = [0, 1];
        if sub(&frobenius_power(l, &f, p), &x, p) != rem(&[], &f, p) {
            return false;
        }
        super::prime_factors(l as u64).into_iter().all(|r| {
            let h = frobenius_power(l / r as u32, &f, p);
            gcd(&f, &sub(&h, &x, p), p).len() == 1
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64, l: u32) -> FieldSpec {
        FieldSpec::new(p, l, DEFAULT_CAP).unwrap()
    }

    /// Brute-force irreducibility: no monic factor of degree 1..=l/2.
    fn reducible_by_search(f: &[u32], p: u32) -> bool {
        let l = (f.len() - 1) as u32;
        (1..=l / 2).any(|d| {
            (0..p.pow(d)).any(|low| {
                let mut g = digits(low, p, d);
                g.push(1);
                poly::rem(f, &g, p).is_empty()
            })
        })
    }

    #[test]
    fn smallest_moduli() {
        assert_eq!(field(5, 1).modulus(), &[0, 1]);
        assert_eq!(field(2, 2).modulus(), &[1, 1, 1]);
        assert_eq!(field(3, 2).modulus(), &[1, 0, 1]);
        assert_eq!(field(3, 2).to_string(), "3^2/10");
        assert_eq!(field(2, 2).to_string(), "2^2/7");
    }

    #[test]
    fn rabin_agrees_with_trial_division() {
        for (p, l) in [(2u32, 2u32), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (2, 6)] {
            for low in 0..p.pow(l) {
                let mut f = digits(low, p, l);
                f.push(1);
                assert_eq!(
                    poly::is_irreducible(&f, p),
                    !reducible_by_search(&f, p),
                    "p={p} f={f:?}"
                );
            }
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(FieldSpec::new(6, 1, DEFAULT_CAP), Err(Error::NonPrime(6))));
        assert!(matches!(FieldSpec::new(1, 1, DEFAULT_CAP), Err(Error::NonPrime(1))));
        assert!(matches!(
            FieldSpec::new(5, 0, DEFAULT_CAP),
            Err(Error::DegreeOutOfRange(0))
        ));
        assert!(matches!(
            FieldSpec::new(2, 21, DEFAULT_CAP),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(matches!(
            FieldSpec::new(1_048_583, 1, DEFAULT_CAP),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(FieldSpec::new(101, 1, 100).is_err());
    }

    #[test]
    fn explicit_modulus() {
        let f = FieldSpec::with_modulus(3, 2, 10, DEFAULT_CAP).unwrap();
        assert_eq!(f, field(3, 2));
        // t^2 + 2 = (t+1)(t+2) over F_3
        assert!(matches!(
            FieldSpec::with_modulus(3, 2, 11, DEFAULT_CAP),
            Err(Error::BadModulus(_))
        ));
        assert!(FieldSpec::with_modulus(3, 2, 5, DEFAULT_CAP).is_err());
        // t^2 + 2t + 2 is irreducible over F_3 and gives an isomorphic field
        let g = FieldSpec::with_modulus(3, 2, 2 + 6 + 9, DEFAULT_CAP).unwrap();
        assert_eq!(g.to_string(), "3^2/17");
    }

    #[test]
    fn parse_descriptors() {
        assert_eq!(parse_field("3^2/10", DEFAULT_CAP).unwrap(), field(3, 2));
        assert_eq!(parse_field("3^2", DEFAULT_CAP).unwrap(), field(3, 2));
        assert_eq!(parse_field("7", DEFAULT_CAP).unwrap(), field(7, 1));
        assert!(parse_field("x^2", DEFAULT_CAP).is_err());
        let f = field(2, 4);
        assert_eq!(parse_field(&f.to_string(), DEFAULT_CAP).unwrap(), f);
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = field(5, 1);
        assert_eq!(f5.add(Elem(2), Elem(4)), Elem(1));
        let f4 = field(2, 2);
        // t * t = t + 1
        assert_eq!(f4.mul(Elem(2), Elem(2)), Elem(3));
        let f7 = field(7, 1);
        assert_eq!(f7.inv(Elem(3)).unwrap(), Elem(5));
        assert!(matches!(f7.inv(Elem::ZERO), Err(Error::DivisionByZero)));
        assert!(matches!(
            f7.apply(ArithOp::Inv, Elem::ZERO, None),
            Err(Error::DivisionByZero)
        ));
        assert_eq!(f7.apply(ArithOp::Neg, Elem(3), None).unwrap(), Elem(4));
        assert_eq!(f7.apply(ArithOp::Sub, Elem(3), Some(Elem(5))).unwrap(), Elem(5));
        assert!(f7.apply(ArithOp::Add, Elem(9), Some(Elem(1))).is_err());
        assert!(f7.apply(ArithOp::Mul, Elem(2), None).is_err());
    }

    #[test]
    fn table_mul_matches_schoolbook() {
        for (p, l) in [(2, 3), (3, 2), (5, 2), (3, 3), (2, 4)] {
            let f = field(p, l);
            let slow = SlowMul {
                p: p as u32,
                l: l as usize,
                modulus: f.modulus(),
            };
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b).0, slow.mul(a.0, b.0));
                }
            }
        }
    }

    #[test]
    fn trace_examples() {
        let f5 = field(5, 1);
        for x in f5.elements() {
            assert_eq!(f5.trace(x), x.0);
        }
        let f4 = field(2, 2);
        assert_eq!(f4.trace(Elem(2)), 1);
        let f9 = field(3, 2);
        assert_eq!(f9.trace(Elem(3)), 0);
    }

    #[test]
    fn trace_table_matches_frobenius_sum() {
        for (p, l) in [(2, 3), (3, 2), (5, 2), (3, 3), (2, 4), (7, 2)] {
            let f = field(p, l);
            for a in f.elements() {
                assert_eq!(f.trace(a), f.frobenius_trace(a));
            }
        }
    }

    #[test]
    fn character_examples() {
        for (p, l) in [(5, 1), (2, 2), (3, 2)] {
            let f = field(p, l);
            assert!((f.chi(Elem::ZERO) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let f5 = field(5, 1);
        let want = Complex64::from_polar(1.0, 2.0 * PI / 5.0);
        assert!((f5.chi(Elem(1)) - want).norm() < 1e-15);
        let f4 = field(2, 2);
        assert!((f4.chi(Elem(2)) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn character_is_additive_and_nondegenerate() {
        for (p, l) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3), (7, 2)] {
            let f = field(p, l);
            for a in f.elements() {
                for b in f.elements() {
                    let lhs = f.chi(f.add(a, b));
                    assert!((lhs - f.chi(a) * f.chi(b)).norm() < 1e-12);
                    assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % f.p());
                }
                for c in 0..f.p() {
                    let ca = f.mul(Elem(c), a);
                    assert_eq!(f.trace(ca), c * f.trace(a) % f.p());
                }
                if a != Elem::ZERO {
                    assert!(f.elements().any(|x| f.trace(f.mul(a, x)) != 0));
                }
            }
        }
    }

    #[test]
    fn gram_reproduces_trace_form() {
        let f = field(3, 3);
        let g = f.trace_gram();
        for x in f.elements().step_by(5) {
            for m in f.elements().step_by(3) {
                let (cx, cm) = (f.coefficients(x), f.coefficients(m));
                let mut s = 0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += cx[i] * g[i][j] * cm[j];
                    }
                }
                assert_eq!(s % 3, f.trace(f.mul(x, m)));
            }
        }
    }

    #[test]
    fn subfields() {
        let f9 = field(3, 2);
        assert_eq!(f9.subfield(1).unwrap(), vec![Elem(0), Elem(1), Elem(2)]);
        assert_eq!(f9.subfield(2).unwrap().len(), 9);
        assert!(f9.subfield(3).is_err());
        assert_eq!(field(2, 4).subfield(2).unwrap().len(), 4);
    }

    #[test]
    fn large_binary_field_builds() {
        let f = field(2, 16);
        let a = Elem(0x1234);
        assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        fn fields() -> &'static [FieldSpec] {
            static F: OnceLock<Vec<FieldSpec>> = OnceLock::new();
            F.get_or_init(|| {
                [(2, 1), (13, 1), (2, 5), (3, 4), (5, 3), (7, 2), (101, 1)]
                    .into_iter()
                    .map(|(p, l)| field(p, l))
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn field_axioms(k in 0usize..7, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
                let f = &fields()[k];
                let (a, b, c) = (Elem(a % f.q()), Elem(b % f.q()), Elem(c % f.q()));
                prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                prop_assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
                prop_assert_eq!(f.sub(f.add(a, b), b), a);
                if a != Elem::ZERO {
                    prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
                }
            }
        }
    }
}
