//! Instance-level checks of the inequality chain
//!
//! ```text
//! |L|^3 |A|^3 / |L(A)|^2  <=  E_3(L, A)  <=  |L|^3 |A|^3 / q^2 + 3 |L|^2 |A| q
//! ```
//!
//! Everything with rational sides is compared in exact integer or rational
//! arithmetic with denominators cleared. Only the Fourier tail is a float,
//! compared with a fixed absolute slack of [`TAIL_SLACK`].

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::setstats::{
    b_a_plus_c, ba_plus_c, image_set, lines_b_a_plus_c, lines_from_bc, rep_function,
    FamilyShape, LineFamily, SubsetFq,
};
use crate::spectral::{fourier_fast, DensityFn};

/// Absolute slack allowed when comparing the Fourier tail to its bound.
pub const TAIL_SLACK: f64 = 1e-9;

/// Which triple-image set an instance measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "BA+C")]
    BaPlusC,
    #[serde(rename = "B(A+C)")]
    BTimesAPlusC,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::BaPlusC => "BA+C",
            Mode::BTimesAPlusC => "B(A+C)",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "BA+C" => Ok(Mode::BaPlusC),
            "B(A+C)" => Ok(Mode::BTimesAPlusC),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolderCheck {
    /// `|L|^3 |A|^3`
    pub lhs: BigUint,
    /// `E_3(L, A) |L(A)|^2`
    pub rhs: BigUint,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCheck {
    pub tail_sum: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyUpperCheck {
    pub e3: BigUint,
    pub rhs: BigRational,
    pub pass: bool,
}

fn big(n: usize) -> BigUint {
    BigUint::from(n)
}

fn require_nonempty(lines: &LineFamily, a: &SubsetFq) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptyInput("A"));
    }
    if lines.is_empty() {
        return Err(Error::EmptyInput("line family"));
    }
    Ok(())
}

/// `|L|^3 |A|^3 <= E_3(L, A) |L(A)|^2`, which holds for any family.
pub fn holder_check(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> Result<HolderCheck> {
    require_nonempty(lines, a)?;
    let r = rep_function(field, lines, a);
    let image = big(r.support().len());
    let pairs = big(lines.len() * a.len());
    let lhs = &pairs * &pairs * &pairs;
    let rhs = r.third_moment() * &image * &image;
    let pass = lhs <= rhs;
    Ok(HolderCheck { lhs, rhs, pass })
}

/// Moment inequality for a nonnegative `f` on a finite domain:
///
/// `sum f^n <= |F| (|f|_1/|F|)^n + n(n-1)/2 |f|_inf^{n-2} sum (f - |f|_1/|F|)^2`
pub fn third_moment_check(values: &[BigRational], n: u32) -> Result<MomentCheck> {
    if values.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if n < 2 {
        return Err(Error::BadExponent(n));
    }
    if let Some(i) = values.iter().position(|v| v.is_negative()) {
        return Err(Error::NegativeValue(i));
    }
    let size = BigRational::from_integer(values.len().into());
    let total: BigRational = values.iter().sum();
    let mean = &total / &size;
    let max = values.iter().max().cloned().unwrap_or_else(BigRational::zero);
    let n_int = n as i32;

    let lhs: BigRational = values.iter().map(|v| num_traits::pow(v.clone(), n as usize)).sum();
    let variance_sum: BigRational = values
        .iter()
        .map(|v| {
            let d = v - &mean;
            &d * &d
        })
        .sum();
    let coeff = BigRational::from_integer((n_int * (n_int - 1) / 2).into());
    let rhs = &size * num_traits::pow(mean, n as usize)
        + coeff * num_traits::pow(max, (n - 2) as usize) * variance_sum;
    let pass = lhs <= rhs;
    Ok(MomentCheck { lhs, rhs, pass })
}

/// [`third_moment_check`] on integer counts, e.g. a representation function.
pub fn moment_check_counts(counts: &[u64], n: u32) -> Result<MomentCheck> {
    let values: Vec<BigRational> = counts
        .iter()
        .map(|&c| BigRational::from_integer(c.into()))
        .collect();
    third_moment_check(&values, n)
}

fn require_pinned(lines: &LineFamily) -> Result<()> {
    if !lines.all_slopes_nonzero() {
        return Err(Error::ZeroSlopePresent);
    }
    match lines.shape() {
        FamilyShape::Product { .. } | FamilyShape::Sheared { .. } => Ok(()),
        FamilyShape::General => Err(Error::NonProductFamily),
    }
}

/// `sum_{xi != 0} |f^(xi)|^2 <= |L| |A|` for `f = r_{L(A)}` on a family
/// indexed by `B x C` with nonzero slopes.
pub fn family_tail_check(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> Result<TailCheck> {
    require_nonempty(lines, a)?;
    require_pinned(lines)?;
    let r = rep_function(field, lines, a);
    let f = DensityFn::from_real(r.counts().iter().map(|&c| c as f64));
    let tail_sum = fourier_fast(field, &f)?.nonzero_energy();
    let bound = (lines.len() * a.len()) as f64;
    Ok(TailCheck {
        tail_sum,
        bound,
        pass: tail_sum <= bound + TAIL_SLACK,
    })
}

/// Fourier tail of `r_{L(A)}` for `L = B x C`, against `|A||B||C|`.
pub fn fourier_tail_check(
    field: &FieldSpec,
    a: &SubsetFq,
    b: &SubsetFq,
    c: &SubsetFq,
) -> Result<TailCheck> {
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::EmptyInput("A, B and C must be nonempty"));
    }
    if b.contains(Elem::ZERO) {
        return Err(Error::ZeroSlopePresent);
    }
    family_tail_check(field, &lines_from_bc(b, c), a)
}

/// `E_3(L, A) <= |L|^3 |A|^3 / q^2 + 3 |L|^2 |A| q`.
pub fn energy_upper_check(
    field: &FieldSpec,
    lines: &LineFamily,
    a: &SubsetFq,
) -> Result<EnergyUpperCheck> {
    require_nonempty(lines, a)?;
    require_pinned(lines)?;
    let e3 = rep_function(field, lines, a).third_moment();
    let (nl, na, q) = (big(lines.len()), big(a.len()), BigUint::from(field.q()));
    let q2 = &q * &q;
    let numer = &nl * &nl * &nl * &na * &na * &na + 3u32 * &nl * &nl * &na * &q * &q2;
    let pass = &e3 * &q2 <= numer;
    let rhs = BigRational::new(numer.into(), q2.into());
    Ok(EnergyUpperCheck { e3, rhs, pass })
}

/// Constant-free lower bound for `|L(A)|` from combining the two ends of the
/// chain: `sqrt(|L|^3|A|^3 / (|L|^3|A|^3/q^2 + 3|L|^2|A|q))`.
pub fn exact_lower_bound(q: u64, size_l: u64, size_a: u64) -> Result<f64> {
    if q == 0 || size_l == 0 || size_a == 0 {
        return Err(Error::ZeroSize);
    }
    let (q, l, a) = (q as f64, size_l as f64, size_a as f64);
    // divided through by |L|^2 |A|
    Ok((l * a * a * q * q / (l * a * a + 3.0 * q * q * q)).sqrt())
}

/// Exact form of `image >= exact_lower_bound(q, size_l, size_a)`.
pub fn exact_lower_bound_holds(q: u64, size_l: u64, size_a: u64, image: u64) -> bool {
    let (q, l, a, img) = (
        BigUint::from(q),
        BigUint::from(size_l),
        BigUint::from(size_a),
        BigUint::from(image),
    );
    let la2 = &l * &a * &a;
    &img * &img * (&la2 + 3u32 * &q * &q * &q) >= la2 * &q * &q
}

/// `min{q, sqrt(|B||C|) |A| / sqrt(q)}`.
pub fn asymptotic_bound(q: u64, size_a: u64, size_b: u64, size_c: u64) -> f64 {
    let q = q as f64;
    let scaled = ((size_b * size_c) as f64).sqrt() * size_a as f64 / q.sqrt();
    q.min(scaled)
}

fn triple_image(field: &FieldSpec, a: &SubsetFq, b: &SubsetFq, c: &SubsetFq, mode: Mode) -> SubsetFq {
    match mode {
        Mode::BaPlusC => ba_plus_c(field, a, b, c),
        Mode::BTimesAPlusC => b_a_plus_c(field, a, b, c),
    }
}

/// Attained size of the triple-image set over `min{q, sqrt(|B||C|)|A|/sqrt(q)}`.
pub fn asymptotic_ratio(
    field: &FieldSpec,
    a: &SubsetFq,
    b: &SubsetFq,
    c: &SubsetFq,
    mode: Mode,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::EmptyInput("A, B and C must be nonempty"));
    }
    let size = triple_image(field, a, b, c, mode).len();
    let bound = asymptotic_bound(field.q() as u64, a.len() as u64, b.len() as u64, c.len() as u64);
    Ok(size as f64 / bound)
}

/// The family the bound chain runs on: nonzero slopes only, indexed by
/// `(B \ {0}) x C`.
pub fn checked_family(field: &FieldSpec, b: &SubsetFq, c: &SubsetFq, mode: Mode) -> LineFamily {
    match mode {
        Mode::BaPlusC => lines_from_bc(&b.without(Elem::ZERO), c),
        Mode::BTimesAPlusC => lines_b_a_plus_c(field, b, c),
    }
}

mod as_string {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Every quantity of the bound chain for one `(A, B, C)` instance.
///
/// The chain runs on the nonzero-slope family `L'` (see [`checked_family`]);
/// `size_l` is the nominal `|B||C|` and `size_image` the size of the full
/// triple-image set. Chain fields are `None` when `L'` is empty. Big
/// integers and rationals serialize as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub field: String,
    pub q: u64,
    pub p: u32,
    pub l: u32,
    pub family: String,
    pub mode: Mode,
    pub size_a: u64,
    pub size_b: u64,
    pub size_c: u64,
    pub size_l: u64,
    pub size_l_checked: u64,
    pub size_image: u64,
    pub size_image_checked: u64,
    #[serde(with = "as_string")]
    pub e3: Option<BigUint>,
    #[serde(with = "as_string")]
    pub lemma1_lhs: Option<BigUint>,
    #[serde(with = "as_string")]
    pub lemma1_rhs: Option<BigUint>,
    pub lemma1_pass: Option<bool>,
    #[serde(with = "as_string")]
    pub lemma2_lhs: Option<BigRational>,
    #[serde(with = "as_string")]
    pub lemma2_rhs: Option<BigRational>,
    pub lemma2_pass: Option<bool>,
    pub tail_sum: Option<f64>,
    pub tail_bound: Option<f64>,
    pub tail_pass: Option<bool>,
    #[serde(with = "as_string")]
    pub energy_upper_rhs: Option<BigRational>,
    pub energy_upper_pass: Option<bool>,
    pub exact_lower_bound: Option<f64>,
    pub exact_bound_pass: Option<bool>,
    pub asymptotic_bound: f64,
    pub ratio: f64,
    pub all_slopes_nonzero: bool,
    pub checks_passed: bool,
    pub seed: u64,
    pub status: String,
}

impl BoundReport {
    /// A report for `field` with every size zero and no chain results.
    pub fn blank(field: &FieldSpec, mode: Mode) -> Self {
        BoundReport {
            field: field.to_string(),
            q: field.q() as u64,
            p: field.p(),
            l: field.l(),
            family: String::new(),
            mode,
            size_a: 0,
            size_b: 0,
            size_c: 0,
            size_l: 0,
            size_l_checked: 0,
            size_image: 0,
            size_image_checked: 0,
            e3: None,
            lemma1_lhs: None,
            lemma1_rhs: None,
            lemma1_pass: None,
            lemma2_lhs: None,
            lemma2_rhs: None,
            lemma2_pass: None,
            tail_sum: None,
            tail_bound: None,
            tail_pass: None,
            energy_upper_rhs: None,
            energy_upper_pass: None,
            exact_lower_bound: None,
            exact_bound_pass: None,
            asymptotic_bound: 0.0,
            ratio: 0.0,
            all_slopes_nonzero: false,
            checks_passed: true,
            seed: 0,
            status: String::new(),
        }
    }

    fn chain_flags(&self) -> [Option<bool>; 5] {
        [
            self.lemma1_pass,
            self.lemma2_pass,
            self.tail_pass,
            self.energy_upper_pass,
            self.exact_bound_pass,
        ]
    }

    /// Names of the chain checks that ran and failed.
    pub fn failed_checks(&self) -> Vec<&'static str> {
        const NAMES: [&str; 5] = ["lemma1", "lemma2", "tail", "energy_upper", "exact_bound"];
        NAMES
            .iter()
            .zip(self.chain_flags())
            .filter(|(_, f)| *f == Some(false))
            .map(|(n, _)| *n)
            .collect()
    }

    /// Whether the stored pass flags agree with the stored sides.
    pub fn is_consistent(&self) -> bool {
        let lemma1 = match (&self.lemma1_lhs, &self.lemma1_rhs, self.lemma1_pass) {
            (Some(l), Some(r), Some(p)) => (l <= r) == p,
            (None, None, None) => true,
            _ => false,
        };
        let lemma2 = match (&self.lemma2_lhs, &self.lemma2_rhs, self.lemma2_pass) {
            (Some(l), Some(r), Some(p)) => (l <= r) == p,
            (None, None, None) => true,
            _ => false,
        };
        let upper = match (&self.e3, &self.energy_upper_rhs, self.energy_upper_pass) {
            (Some(e), Some(r), Some(p)) => {
                (BigRational::from_integer(e.clone().into()) <= *r) == p
            }
            (_, None, None) => true,
            _ => false,
        };
        let tail = match (self.tail_sum, self.tail_bound, self.tail_pass) {
            (Some(t), Some(b), Some(p)) => (t <= b + TAIL_SLACK) == p,
            (None, None, None) => true,
            _ => false,
        };
        let exact = match self.exact_bound_pass {
            Some(p) => {
                exact_lower_bound_holds(
                    self.q,
                    self.size_l_checked,
                    self.size_a,
                    self.size_image_checked,
                ) == p
                    && (self.size_image >= self.size_image_checked)
            }
            None => true,
        };
        let all = self.chain_flags().iter().all(|f| *f != Some(false));
        lemma1 && lemma2 && upper && tail && exact && all == self.checks_passed
    }
}

/// Runs the whole chain on one instance.
pub fn verify_instance(
    field: &FieldSpec,
    a: &SubsetFq,
    b: &SubsetFq,
    c: &SubsetFq,
    mode: Mode,
) -> Result<BoundReport> {
    let ratio = asymptotic_ratio(field, a, b, c, mode)?;
    let q = field.q() as u64;
    let (na, nb, nc) = (a.len() as u64, b.len() as u64, c.len() as u64);
    let image = triple_image(field, a, b, c, mode);
    let lines = checked_family(field, b, c, mode);

    let mut report = BoundReport::blank(field, mode);
    report.size_a = na;
    report.size_b = nb;
    report.size_c = nc;
    report.size_l = nb * nc;
    report.size_l_checked = lines.len() as u64;
    report.size_image = image.len() as u64;
    report.asymptotic_bound = asymptotic_bound(q, na, nb, nc);
    report.ratio = ratio;
    report.all_slopes_nonzero = !b.contains(Elem::ZERO);

    if lines.is_empty() {
        report.status = "skipped: no nonzero-slope lines".into();
        return Ok(report);
    }

    let checked_image = image_set(field, &lines, a);
    report.size_image_checked = checked_image.len() as u64;
    let r = rep_function(field, &lines, a);

    let holder = holder_check(field, &lines, a)?;
    let moment = moment_check_counts(r.counts(), 3)?;
    let tail = family_tail_check(field, &lines, a)?;
    let upper = energy_upper_check(field, &lines, a)?;
    let nl = lines.len() as u64;
    let exact = exact_lower_bound(q, nl, na)?;
    let exact_pass = exact_lower_bound_holds(q, nl, na, report.size_image_checked)
        && checked_image.is_subset(&image);

    report.e3 = Some(upper.e3);
    report.lemma1_lhs = Some(holder.lhs);
    report.lemma1_rhs = Some(holder.rhs);
    report.lemma1_pass = Some(holder.pass);
    report.lemma2_lhs = Some(moment.lhs);
    report.lemma2_rhs = Some(moment.rhs);
    report.lemma2_pass = Some(moment.pass);
    report.tail_sum = Some(tail.tail_sum);
    report.tail_bound = Some(tail.bound);
    report.tail_pass = Some(tail.pass);
    report.energy_upper_rhs = Some(upper.rhs);
    report.energy_upper_pass = Some(upper.pass);
    report.exact_lower_bound = Some(exact);
    report.exact_bound_pass = Some(exact_pass);

    let failed = report.failed_checks();
    report.checks_passed = failed.is_empty();
    report.status = if failed.is_empty() {
        "ok".into()
    } else {
        format!("failed: {}", failed.join(","))
    };
    Ok(report)
}

/// `q^{-1} sum r^2 - (|L||A|/q)^2`: the Fourier tail by Parseval, without
/// any transform.
pub fn parseval_tail(field: &FieldSpec, lines: &LineFamily, a: &SubsetFq) -> f64 {
    let r = rep_function(field, lines, a);
    let q = BigRational::from_integer(field.q().into());
    let mean = BigRational::new((lines.len() * a.len()).into(), field.q().into());
    let exact = BigRational::from_integer(r.second_moment().into()) / q - &mean * &mean;
    exact.to_f64().unwrap_or(f64::NAN)
}

/// `1 / sqrt(6)`, the constant relating [`exact_lower_bound`] to
/// `min{q, sqrt(|L|) |A| / sqrt(q)}`.
pub fn inverse_sqrt_six() -> f64 {
    1.0 / 6f64.sqrt()
}
