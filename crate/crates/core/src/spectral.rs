//! Fourier analysis on `(F_q, +)` with the forward normalization
//! `f^(m) = q^{-1} sum_x chi(-x m) f(x)`.
//!
//! [`fourier_forward`] is the direct `O(q^2)` sum and serves as the oracle.
//! [`fourier_fast`] views `F_q` as the grid `(Z/p)^l`, runs a length-`p` DFT
//! along each axis and then permutes frequencies by the Gram matrix of the
//! trace form.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::{Elem, FieldSpec};
use crate::setstats::SubsetFq;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A function `F_q -> C`, indexed by element.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityFn(pub Vec<Complex64>);

/// Fourier coefficients indexed by frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum(pub Vec<Complex64>);

impl DensityFn {
    pub fn indicator(set: &SubsetFq) -> Self {
        DensityFn(
            (0..set.universe())
                .map(|x| {
                    if set.contains(Elem(x as u32)) {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect(),
        )
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        DensityFn(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Spectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    /// `sum_{m != 0} |f^(m)|^2`.
    pub fn nonzero_energy(&self) -> f64 {
        self.0.iter().skip(1).map(|c| c.norm_sqr()).sum()
    }
}

fn check_len(field: &FieldSpec, got: usize) -> Result<()> {
    if got != field.order() {
        return Err(Error::LengthMismatch {
            expected: field.order(),
            got,
        });
    }
    Ok(())
}

/// `sum_x chi(sign * x m) v(x)` for every `m`, by direct summation.
fn character_sums(field: &FieldSpec, values: &[Complex64], sign: i64) -> Vec<Complex64> {
    let p = field.p() as i64;
    let term = |m: u32| -> Complex64 {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
            .map(|(x, v)| {
                let t = field.trace(field.mul(Elem(x as u32), Elem(m))) as i64;
                field.root_of_unity((sign * t).rem_euclid(p) as u32) * v
            })
            .sum()
    };
    let q = field.q();
    #[cfg(feature = "parallel")]
    {
        (0..q).into_par_iter().map(term).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..q).map(term).collect()
    }
}

/// Direct `O(q^2)` transform.
pub fn fourier_forward(field: &FieldSpec, f: &DensityFn) -> Result<Spectrum> {
    check_len(field, f.len())?;
    let scale = 1.0 / field.q() as f64;
    Ok(Spectrum(
        character_sums(field, f.values(), -1)
            .into_iter()
            .map(|c| c * scale)
            .collect(),
    ))
}

/// Inverse transform `f(x) = sum_m chi(x m) f^(m)`.
pub fn fourier_inverse(field: &FieldSpec, spectrum: &Spectrum) -> Result<DensityFn> {
    check_len(field, spectrum.values().len())?;
    Ok(DensityFn(character_sums(field, spectrum.values(), 1)))
}

/// Grid transform: `O(q l p)` work for small `p`, `O(q log q)` for prime fields.
pub fn fourier_fast(field: &FieldSpec, f: &DensityFn) -> Result<Spectrum> {
    check_len(field, f.len())?;
    let p = field.p() as usize;
    let l = field.l() as usize;
    let q = field.order();

    // Unnormalized DFT on (Z/p)^l with kernel exp(-2 pi i <x, k> / p).
    let mut grid = f.values().to_vec();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(p);
    let mut line = vec![Complex64::new(0.0, 0.0); p];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut stride = 1;
    for _ in 0..l {
        let block = stride * p;
        for base in (0..q).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = grid[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    grid[start + j * stride] = *v;
                }
            }
        }
        stride = block;
    }

    // Tr(x m) = <x, G m> in coordinates, so f^(m) = grid[G m] / q.
    let gram = field.trace_gram();
    let scale = 1.0 / q as f64;
    let values = field
        .elements()
        .map(|m| {
            let cm = field.coefficients(m);
            let k: Vec<u32> = gram
                .iter()
                .map(|row| {
                    (row.iter()
                        .zip(&cm)
                        .map(|(&g, &c)| g as u64 * c as u64)
                        .sum::<u64>()
                        % p as u64) as u32
                })
                .collect();
            grid[field.from_coefficients(&k).index()] * scale
        })
        .collect();
    Ok(Spectrum(values))
}

/// `sum_x chi(x s)`, which is `q` at `s = 0` and vanishes elsewhere.
pub fn orthogonality_sum(field: &FieldSpec, s: Elem) -> Complex64 {
    field.elements().map(|x| field.chi(field.mul(x, s))).sum()
}

/// `|sum_m |f^(m)|^2 - q^{-1} sum_x |f(x)|^2|`, using the direct transform.
pub fn plancherel_defect(field: &FieldSpec, f: &DensityFn) -> Result<f64> {
    let spectrum = fourier_forward(field, f)?;
    let lhs: f64 = spectrum.values().iter().map(|c| c.norm_sqr()).sum();
    let rhs: f64 = f.values().iter().map(|c| c.norm_sqr()).sum::<f64>() / field.q() as f64;
    Ok((lhs - rhs).abs())
}
