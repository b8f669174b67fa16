//! Subsets of `F_q`, pinned line families and their image sets, the
//! representation function `r_{L(A)}` and the third-moment energy `E_3(L, A)`.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::{parse_field, Elem, FieldSpec};

/// A subset of `F_q` stored as a length-`q` bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetFq {
    universe: usize,
    bits: Vec<u64>,
    size: usize,
}

impl fmt::Debug for SubsetFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}

impl SubsetFq {
    pub fn empty(universe: usize) -> Self {
        SubsetFq {
            universe,
            bits: vec![0; universe.div_ceil(64)],
            size: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for x in 0..universe {
            s.insert(Elem(x as u32));
        }
        s
    }

    /// Builds a subset of `field`, rejecting out-of-range indices.
    pub fn from_indices(field: &FieldSpec, indices: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::empty(field.order());
        for i in indices {
            s.insert(field.elem(i)?);
        }
        Ok(s)
    }

    pub fn from_elems(universe: usize, elems: impl IntoIterator<Item = Elem>) -> Self {
        let mut s = Self::empty(universe);
        for e in elems {
            s.insert(e);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn contains(&self, e: Elem) -> bool {
        let i = e.index();
        i < self.universe && self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Returns whether the element was newly inserted.
    pub fn insert(&mut self, e: Elem) -> bool {
        let i = e.index();
        assert!(i < self.universe, "element {i} outside F_{}", self.universe);
        let word = &mut self.bits[i / 64];
        let mask = 1u64 << (i % 64);
        let fresh = *word & mask == 0;
        *word |= mask;
        self.size += fresh as usize;
        fresh
    }

    pub fn remove(&mut self, e: Elem) -> bool {
        if !self.contains(e) {
            return false;
        }
        let i = e.index();
        self.bits[i / 64] &= !(1u64 << (i % 64));
        self.size -= 1;
        true
    }

    pub fn without(&self, e: Elem) -> Self {
        let mut s = self.clone();
        s.remove(e);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros();
                word &= word - 1;
                Some(Elem((w * 64) as u32 + bit))
            })
        })
    }

    pub fn to_vec(&self) -> Vec<Elem> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let bits: Vec<u64> = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        let size = bits.iter().map(|w| w.count_ones() as usize).sum();
        SubsetFq {
            universe: self.universe,
            bits,
            size,
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// `S + s`.
    pub fn translate(&self, field: &FieldSpec, s: Elem) -> Self {
        Self::from_elems(self.universe, self.iter().map(|x| field.add(x, s)))
    }

    /// `lambda * S`.
    pub fn dilate(&self, field: &FieldSpec, lambda: Elem) -> Self {
        Self::from_elems(self.universe, self.iter().map(|x| field.mul(x, lambda)))
    }
}

pub fn sumset(field: &FieldSpec, a: &SubsetFq, b: &SubsetFq) -> SubsetFq {
    let mut out = SubsetFq::empty(field.order());
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            out.insert(field.add(x, y));
        }
    }
    out
}

pub fn productset(field: &FieldSpec, a: &SubsetFq, b: &SubsetFq) -> SubsetFq {
    let mut out = SubsetFq::empty(field.order());
    let bs = b.to_vec();
    for x in a.iter() {
        for &y in &bs {
            out.insert(field.mul(x, y));
        }
    }
    out
}

/// `BA + C`, via the intermediate set `BA`.
pub fn ba_plus_c(field: &FieldSpec, a: &SubsetFq, b: &SubsetFq, c: &SubsetFq) -> SubsetFq {
    sumset(field, &productset(field, b, a), c)
}

/// `B(A + C)`, via the intermediate set `A + C`.
pub fn b_a_plus_c(field: &FieldSpec, a: &SubsetFq, b: &SubsetFq, c: &SubsetFq) -> SubsetFq {
    productset(field, b, &sumset(field, a, c))
}

/// How a line family is indexed, which decides which bounds apply to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyShape {
    /// `P = B x C`, lines `x -> b x + c`.
    Product { b: usize, c: usize },
    /// `P = {(b, b c)}`, lines `x -> b (x + c)`; in bijection with `B x C`.
    Sheared { b: usize, c: usize },
    General,
}

/// Lines `l_{m,b}(x) = m x + b` pinned at a point set `P` avoiding `(0, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineFamily {
    lines: Vec<(Elem, Elem)>,
    all_slopes_nonzero: bool,
    shape: FamilyShape,
}

impl LineFamily {
    /// A general family; rejects `(0, 0)` and repeated points.
    pub fn new(lines: Vec<(Elem, Elem)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(lines.len());
        for &pt in &lines {
            if pt == (Elem::ZERO, Elem::ZERO) {
                return Err(Error::InvalidLineFamily("(0, 0) is not a valid point".into()));
            }
            if !seen.insert(pt) {
                return Err(Error::InvalidLineFamily(format!(
                    "duplicate point ({}, {})",
                    pt.0, pt.1
                )));
            }
        }
        Ok(Self::unchecked(lines, FamilyShape::General))
    }

    fn unchecked(lines: Vec<(Elem, Elem)>, shape: FamilyShape) -> Self {
        let all_slopes_nonzero = lines.iter().all(|&(m, _)| m != Elem::ZERO);
        LineFamily {
            lines,
            all_slopes_nonzero,
            shape,
        }
    }

    pub fn lines(&self) -> &[(Elem, Elem)] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn all_slopes_nonzero(&self) -> bool {
        self.all_slopes_nonzero
    }

    pub fn shape(&self) -> FamilyShape {
        self.shape
    }

    /// Lines with nonzero slope only. Keeps the indexing shape when the
    /// slopes come from a set `B`, since dropping `0` from `B` keeps the
    /// product structure.
    pub fn nonzero_slopes(&self) -> Self {
        if self.all_slopes_nonzero {
            return self.clone();
        }
        let lines: Vec<_> = self.lines.iter().copied().filter(|&(m, _)| m != Elem::ZERO).collect();
        let shape = match self.shape {
            FamilyShape::Product { b, c } => FamilyShape::Product { b: b - 1, c },
            FamilyShape::Sheared { b, c } => FamilyShape::Sheared { b: b - 1, c },
            FamilyShape::General => FamilyShape::General,
        };
        Self::unchecked(lines, shape)
    }
}

/// `P = (B x C) \ {(0, 0)}`.
pub fn lines_from_bc(b: &SubsetFq, c: &SubsetFq) -> LineFamily {
    let cs = c.to_vec();
    let lines: Vec<_> = b
        .iter()
        .flat_map(|m| cs.iter().map(move |&k| (m, k)))
        .filter(|&pt| pt != (Elem::ZERO, Elem::ZERO))
        .collect();
    let shape = if b.contains(Elem::ZERO) && c.contains(Elem::ZERO) {
        // B x C minus a point is not a product.
        FamilyShape::General
    } else {
        FamilyShape::Product {
            b: b.len(),
            c: c.len(),
        }
    };
    LineFamily::unchecked(lines, shape)
}

/// `P = {(b, b c) : b in B \ {0}, c in C}`, whose image on `A` is
/// `(B \ {0})(A + C)`.
pub fn lines_b_a_plus_c(field: &FieldSpec, b: &SubsetFq, c: &SubsetFq) -> LineFamily {
    let b = b.without(Elem::ZERO);
    let cs = c.to_vec();
    let lines = b
        .iter()
        .flat_map(|m| cs.iter().map(move |&k| (m, field.mul(m, k))))
        .collect();
    LineFamily::unchecked(
        lines,
        FamilyShape::Sheared {
            b: b.len(),
            c: c.len(),
        },
    )
}

/// `L(A) = {m a + b : (m, b) in P, a in A}`.
pub fn image_set(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> SubsetFq {
    let mut out = SubsetFq::empty(field.order());
    let xs = a.to_vec();
    for &(m, k) in lines.lines() {
        for &x in &xs {
            out.insert(field.add(field.mul(m, x), k));
        }
    }
    out
}

/// `r(x) = #{((m, b), a) in P x A : m a + b = x}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepFunction {
    counts: Vec<u64>,
}

impl RepFunction {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn support(&self) -> SubsetFq {
        SubsetFq::from_elems(
            self.counts.len(),
            self.counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(x, _)| Elem(x as u32)),
        )
    }

    /// `sum_x r(x)^3`, exact.
    pub fn third_moment(&self) -> BigUint {
        self.counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let c = BigUint::from(c);
                &c * &c * &c
            })
            .sum()
    }

    /// `sum_x r(x)^2`, exact.
    pub fn second_moment(&self) -> BigUint {
        self.counts
            .iter()
            .map(|&c| BigUint::from(c) * BigUint::from(c))
            .sum()
    }
}

fn accumulate(field: &FieldSpec, lines: &[(Elem, Elem)], xs: &[Elem], counts: &mut [u64]) {
    for &(m, k) in lines {
        for &x in xs {
            counts[field.add(field.mul(m, x), k).index()] += 1;
        }
    }
}

pub fn rep_function(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> RepFunction {
    let xs = a.to_vec();
    let q = field.order();

    #[cfg(feature = "parallel")]
    if lines.len() * xs.len() >= 1 << 16 {
        use rayon::prelude::*;
        let counts = lines
            .lines()
            .par_chunks(64)
            .fold(
                || vec![0u64; q],
                |mut acc, chunk| {
                    accumulate(field, chunk, &xs, &mut acc);
                    acc
                },
            )
            .reduce(
                || vec![0u64; q],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        return RepFunction { counts };
    }

    let mut counts = vec![0u64; q];
    accumulate(field, lines.lines(), &xs, &mut counts);
    RepFunction { counts }
}

/// `E_3(L, A) = sum_x r(x)^3`.
pub fn energy3(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> BigUint {
    rep_function(field, lines, a).third_moment()
}

/// `E_3(L, A)` by enumerating every triple of `(line, a)` pairs.
/// Cubic in `|L| |A|`; meant for small instances.
pub fn energy3_bruteforce(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> BigUint {
    let values: Vec<Elem> = lines
        .lines()
        .iter()
        .flat_map(|&(m, k)| a.iter().map(move |x| field.add(field.mul(m, x), k)))
        .collect();
    let mut count: u64 = 0;
    for &u in &values {
        for &v in &values {
            if u != v {
                continue;
            }
            count += values.iter().filter(|&&w| w == u).count() as u64;
        }
    }
    BigUint::from(count)
}

/// Writes the subset file format: a `field p^l/modulus` header followed by
/// one element index per line.
pub fn format_subset(field: &FieldSpec, set: &SubsetFq) -> String {
    let mut out = format!("field {field}\n");
    for e in set.iter() {
        out.push_str(&e.0.to_string());
        out.push('\n');
    }
    out
}

/// Parses the subset file format. Blank lines and `#` comments are skipped.
pub fn parse_subset(text: &str, cap: u64) -> Result<(FieldSpec, SubsetFq)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing `field` header".into()))?;
    let desc = header
        .strip_prefix("field")
        .filter(|rest| rest.starts_with(char::is_whitespace))
        .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
    let field = parse_field(desc, cap)?;
    let indices = lines
        .map(|l| {
            l.parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad element {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let set = SubsetFq::from_indices(&field, indices)?;
    Ok((field, set))
}

pub fn read_subset(path: &std::path::Path, cap: u64) -> Result<(FieldSpec, SubsetFq)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_subset(&text, cap)
}
