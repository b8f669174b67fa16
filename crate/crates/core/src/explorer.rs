//! Seeded sweeps over fields, set families and sizes, running the bound chain
//! on every cell and emitting CSV or JSON reports.
//!
//! Each cell `(field, family, size, trial)` gets its own seed derived from the
//! master seed and the cell index, so results do not depend on the order in
//! which cells execute.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{verify_instance, BoundReport, Mode};
use crate::error::{Error, Result};
use crate::field::{cap_from_env, Elem, FieldSpec};
use crate::setstats::{read_subset, SubsetFq};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyDescriptor {
    /// `size` distinct elements drawn uniformly.
    Random,
    /// The copy of `F_{p^degree}`; ignores the size.
    Subfield { degree: u32 },
    /// `start, start + step, start + 2 step, ...`
    Interval { start: u32, step: u32 },
    /// `start, start * ratio, start * ratio^2, ...`
    Geometric {
        ratio: u32,
        #[serde(default = "one")]
        start: u32,
    },
    /// A subset file; ignores the size.
    CustomFile { path: PathBuf },
}

fn one() -> u32 {
    1
}

impl FamilyDescriptor {
    pub fn label(&self) -> &'static str {
        match self {
            FamilyDescriptor::Random => "random",
            FamilyDescriptor::Subfield { .. } => "subfield",
            FamilyDescriptor::Interval { .. } => "interval",
            FamilyDescriptor::Geometric { .. } => "geometric",
            FamilyDescriptor::CustomFile { .. } => "custom-file",
        }
    }
}

/// Target cardinality: an explicit count, a density in `(0, 1]`, or
/// `{"exponent": e}` for `ceil(q^e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    Count(u64),
    Fraction(f64),
    Exponent { exponent: f64 },
}

impl SizeSpec {
    pub fn resolve(&self, q: u64) -> Result<u64> {
        match *self {
            SizeSpec::Count(n) => Ok(n),
            SizeSpec::Fraction(x) if x > 0.0 && x <= 1.0 => Ok(((x * q as f64).round() as u64).max(1)),
            SizeSpec::Fraction(x) => Err(Error::BadDescriptor(format!("density {x} outside (0, 1]"))),
            SizeSpec::Exponent { exponent } if exponent >= 0.0 => {
                let v = (q as f64).powf(exponent);
                let near = v.round();
                Ok(if (v - near).abs() < 1e-9 { near } else { v.ceil() } as u64)
            }
            SizeSpec::Exponent { exponent } => {
                Err(Error::BadDescriptor(format!("negative exponent {exponent}")))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeSelection {
    #[serde(rename = "BA+C")]
    BaPlusC,
    #[serde(rename = "B(A+C)")]
    BTimesAPlusC,
    #[serde(rename = "both")]
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> &'static [Mode] {
        match self {
            ModeSelection::BaPlusC => &[Mode::BaPlusC],
            ModeSelection::BTimesAPlusC => &[Mode::BTimesAPlusC],
            ModeSelection::Both => &[Mode::BaPlusC, Mode::BTimesAPlusC],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `[p, l]` pairs.
    pub fields: Vec<(u64, u32)>,
    pub families: Vec<FamilyDescriptor>,
    pub sizes: Vec<SizeSpec>,
    pub trials_per_cell: u32,
    pub master_seed: u64,
    pub mode: ModeSelection,
    #[serde(default)]
    pub output: OutputSpec,
    /// Draw `A`, `B`, `C` independently instead of taking `A = B = C`.
    #[serde(default)]
    pub independent_sets: bool,
    /// Redraw random `B` from the nonzero elements.
    #[serde(default)]
    pub nonzero_slopes: bool,
}

impl ExperimentConfig {
    /// Reads a JSON config; relative paths inside it are taken relative to
    /// the config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.output.path.as_mut() {
            rebase(p);
        }
        for fam in &mut cfg.families {
            if let FamilyDescriptor::CustomFile { path } = fam {
                rebase(path);
            }
        }
        Ok(cfg)
    }

    fn build_fields(&self, cap: u64) -> Result<Vec<FieldSpec>> {
        if self.trials_per_cell == 0 {
            return Err(Error::BadDescriptor("trials_per_cell must be at least 1".into()));
        }
        self.fields
            .iter()
            .map(|&(p, l)| FieldSpec::new(p, l, cap))
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit seed for cell `index` under `master`.
pub fn cell_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

fn progression(
    field: &FieldSpec,
    size: u64,
    start: Elem,
    next: impl Fn(Elem) -> Elem,
    what: &str,
) -> Result<SubsetFq> {
    let mut set = SubsetFq::empty(field.order());
    let mut cur = start;
    for _ in 0..size {
        if !set.insert(cur) {
            return Err(Error::BadDescriptor(format!(
                "{what} repeats after {} elements, {size} requested",
                set.len()
            )));
        }
        cur = next(cur);
    }
    Ok(set)
}

/// Deterministic in `(field, descriptor, size, seed)`.
pub fn generate_family(
    field: &FieldSpec,
    desc: &FamilyDescriptor,
    size: u64,
    seed: u64,
) -> Result<SubsetFq> {
    let q = field.q();
    let in_range = |v: u32| field.elem(v as u64).map_err(|e| Error::BadDescriptor(e.to_string()));
    let sized = || -> Result<()> {
        if size > q as u64 {
            Err(Error::SizeTooLarge {
                requested: size,
                order: q,
            })
        } else {
            Ok(())
        }
    };
    match desc {
        FamilyDescriptor::Random => {
            sized()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks = index::sample(&mut rng, q as usize, size as usize);
            Ok(SubsetFq::from_elems(
                field.order(),
                picks.into_iter().map(|i| Elem(i as u32)),
            ))
        }
        FamilyDescriptor::Subfield { degree } => Ok(SubsetFq::from_elems(
            field.order(),
            field.subfield(*degree)?,
        )),
        FamilyDescriptor::Interval { start, step } => {
            sized()?;
            let (start, step) = (in_range(*start)?, in_range(*step)?);
            progression(field, size, start, |x| field.add(x, step), "interval")
        }
        FamilyDescriptor::Geometric { ratio, start } => {
            sized()?;
            let (start, ratio) = (in_range(*start)?, in_range(*ratio)?);
            progression(field, size, start, |x| field.mul(x, ratio), "geometric progression")
        }
        FamilyDescriptor::CustomFile { path } => {
            let (file_field, set) = read_subset(path, u64::MAX)?;
            if file_field != *field {
                return Err(Error::BadDescriptor(format!(
                    "{} is over {file_field}, expected {field}",
                    path.display()
                )));
            }
            Ok(set)
        }
    }
}

/// Random subset of the nonzero elements.
fn random_nonzero(field: &FieldSpec, size: u64, seed: u64) -> Result<SubsetFq> {
    let q = field.q();
    if size >= q as u64 {
        return Err(Error::SizeTooLarge {
            requested: size,
            order: q - 1,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = index::sample(&mut rng, q as usize - 1, size as usize);
    Ok(SubsetFq::from_elems(
        field.order(),
        picks.into_iter().map(|i| Elem(i as u32 + 1)),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub rows: usize,
    pub ok: usize,
    pub failed: usize,
    pub skipped: usize,
    pub errors: usize,
    pub min_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    /// Largest `c` with `|set| >= c min{q, sqrt(|B||C|)|A|/sqrt(q)}` on every
    /// row, i.e. the minimum ratio.
    pub c_min: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub rows: Vec<BoundReport>,
    pub summary: SuiteSummary,
}

struct Cell<'a> {
    index: u64,
    field: &'a FieldSpec,
    family: &'a FamilyDescriptor,
    size: &'a SizeSpec,
}

fn error_row(field: &FieldSpec, family: &str, mode: Mode, seed: u64, err: &Error) -> BoundReport {
    let mut r = BoundReport::blank(field, mode);
    r.family = family.to_string();
    r.seed = seed;
    r.checks_passed = false;
    r.status = format!("error: {err}");
    r
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell<'_>) -> Vec<BoundReport> {
    let seed = cell_seed(cfg.master_seed, cell.index);
    let label = cell.family.label();
    let sets = (|| -> Result<(SubsetFq, SubsetFq, SubsetFq, bool)> {
        let size = cell.size.resolve(cell.field.q() as u64)?;
        let draw = |k: u64| generate_family(cell.field, cell.family, size, cell_seed(seed, k));
        let a = draw(0)?;
        let (mut b, c) = if cfg.independent_sets {
            (draw(1)?, draw(2)?)
        } else {
            (a.clone(), a.clone())
        };
        let mut resampled = false;
        if cfg.nonzero_slopes
            && *cell.family == FamilyDescriptor::Random
            && b.contains(Elem::ZERO)
        {
            b = random_nonzero(cell.field, b.len() as u64, cell_seed(seed, 3))?;
            resampled = true;
        }
        Ok((a, b, c, resampled))
    })();

    cfg.mode
        .modes()
        .iter()
        .map(|&mode| match &sets {
            Err(e) => error_row(cell.field, label, mode, seed, e),
            Ok((a, b, c, resampled)) => match verify_instance(cell.field, a, b, c, mode) {
                Ok(mut r) => {
                    r.family = label.to_string();
                    r.seed = seed;
                    if *resampled {
                        r.status.push_str(";resampled-B");
                    }
                    r
                }
                Err(e) => error_row(cell.field, label, mode, seed, &e),
            },
        })
        .collect()
}

/// Runs every cell with the cap from the environment.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    run_suite_with_cap(cfg, cap_from_env())
}

pub fn run_suite_with_cap(cfg: &ExperimentConfig, cap: u64) -> Result<SuiteOutput> {
    let fields = cfg.build_fields(cap)?;
    let mut cells = Vec::new();
    for field in &fields {
        for family in &cfg.families {
            for size in &cfg.sizes {
                for _ in 0..cfg.trials_per_cell {
                    cells.push(Cell {
                        index: cells.len() as u64,
                        field,
                        family,
                        size,
                    });
                }
            }
        }
    }

    #[cfg(feature = "parallel")]
    let per_cell: Vec<Vec<BoundReport>> = cells.par_iter().map(|c| run_cell(cfg, c)).collect();
    #[cfg(not(feature = "parallel"))]
    let per_cell: Vec<Vec<BoundReport>> = cells.iter().map(|c| run_cell(cfg, c)).collect();

    let rows: Vec<BoundReport> = per_cell.into_iter().flatten().collect();
    let summary = summarize(&rows);
    Ok(SuiteOutput { rows, summary })
}

pub fn summarize(rows: &[BoundReport]) -> SuiteSummary {
    let is_error = |r: &BoundReport| r.status.starts_with("error");
    let is_skip = |r: &BoundReport| r.status.starts_with("skipped");
    let failed = rows
        .iter()
        .filter(|r| !is_error(r) && !is_skip(r) && !r.checks_passed)
        .count();
    let skipped = rows.iter().filter(|r| is_skip(r)).count();
    let errors = rows.iter().filter(|r| is_error(r)).count();

    let mut ratios: Vec<f64> = rows.iter().filter(|r| !is_error(r)).map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = match ratios.len() {
        0 => None,
        n if n % 2 == 1 => Some(ratios[n / 2]),
        n => Some((ratios[n / 2 - 1] + ratios[n / 2]) / 2.0),
    };
    SuiteSummary {
        rows: rows.len(),
        ok: rows.len() - failed - skipped - errors,
        failed,
        skipped,
        errors,
        min_ratio: ratios.first().copied(),
        median_ratio: median,
        c_min: ratios.first().copied(),
    }
}

pub const CSV_HEADER: [&str; 20] = [
    "q",
    "p",
    "l",
    "family",
    "mode",
    "size_A",
    "size_B",
    "size_C",
    "size_L",
    "size_image",
    "E3",
    "lemma1_pass",
    "lemma2_pass",
    "tail_pass",
    "energy_upper_pass",
    "exact_bound",
    "asymptotic_bound",
    "ratio",
    "seed",
    "status",
];

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(T::to_string).unwrap_or_default()
}

fn csv_record(r: &BoundReport) -> [String; 20] {
    [
        r.q.to_string(),
        r.p.to_string(),
        r.l.to_string(),
        r.family.clone(),
        r.mode.to_string(),
        r.size_a.to_string(),
        r.size_b.to_string(),
        r.size_c.to_string(),
        r.size_l.to_string(),
        r.size_image.to_string(),
        fmt_opt(&r.e3),
        fmt_opt(&r.lemma1_pass),
        fmt_opt(&r.lemma2_pass),
        fmt_opt(&r.tail_pass),
        fmt_opt(&r.energy_upper_pass),
        r.exact_lower_bound.map(fmt_f64).unwrap_or_default(),
        fmt_f64(r.asymptotic_bound),
        fmt_f64(r.ratio),
        r.seed.to_string(),
        r.status.clone(),
    ]
}

/// Writes rows as CSV (fixed column order) or as a JSON array of reports.
pub fn write_report<W: Write>(rows: &[BoundReport], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record(csv_record(r))?;
            }
            w.flush().map_err(|e| Error::io("<csv>", e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n").map_err(|e| Error::io("<json>", e))?;
        }
    }
    Ok(())
}

pub fn render_report(rows: &[BoundReport], format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_report(rows, format, &mut buf)?;
    Ok(buf)
}

/// Writes the report to `path`.
pub fn emit_report(rows: &[BoundReport], format: Format, path: &Path) -> Result<()> {
    let bytes = render_report(rows, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
