//! The fixed verification suite behind `sumprod verify`.
//!
//! Every check uses hard-coded seeds, so two runs produce the same rows.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    energy_upper_check, exact_lower_bound, exact_lower_bound_holds, holder_check,
    moment_check_counts, verify_instance, BoundReport, Mode,
};
use crate::error::Result;
use crate::explorer::{cell_seed, render_report, Format};
use crate::field::{Elem, FieldSpec, DEFAULT_CAP};
use crate::setstats::{
    ba_plus_c, energy3, energy3_bruteforce, image_set, lines_from_bc, rep_function, SubsetFq,
};
use crate::spectral::{fourier_fast, fourier_forward, orthogonality_sum, plancherel_defect, DensityFn};

/// Fields used by the transform checks.
pub const TRANSFORM_FIELDS: [(u64, u32); 10] = [
    (2, 1),
    (3, 1),
    (2, 2),
    (5, 1),
    (7, 1),
    (2, 3),
    (3, 2),
    (2, 4),
    (5, 2),
    (3, 3),
];

pub const FLOAT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {}: {} ({:.0} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64() * 1e3
        )
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub criteria: Vec<CriterionOutcome>,
    /// Instance rows from the tightness and large-set checks.
    pub rows: Vec<BoundReport>,
}

impl VerifyOutcome {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

fn field(p: u64, l: u32) -> FieldSpec {
    FieldSpec::new(p, l, DEFAULT_CAP).expect("fixed suite fields are valid")
}

fn random_subset(rng: &mut ChaCha8Rng, f: &FieldSpec, lo: usize, hi: usize, avoid_zero: bool) -> SubsetFq {
    let pool: Vec<Elem> = f.elements().filter(|&e| !(avoid_zero && e == Elem::ZERO)).collect();
    let n = rng.random_range(lo..=hi.min(pool.len()));
    let picks = rand::seq::index::sample(rng, pool.len(), n);
    SubsetFq::from_elems(f.order(), picks.into_iter().map(|i| pool[i]))
}

fn timed(
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    body: impl FnOnce() -> (bool, String),
) -> CriterionOutcome {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    CriterionOutcome {
        id,
        name,
        pass: ok && in_time,
        detail: if in_time {
            detail
        } else {
            format!("{detail}; over time limit {:?}", limit.unwrap())
        },
        elapsed,
        limit,
    }
}

pub fn orthogonality() -> (bool, String) {
    let mut worst = 0.0f64;
    for (p, l) in TRANSFORM_FIELDS {
        let f = field(p, l);
        for s in f.elements() {
            let want = if s == Elem::ZERO { f.q() as f64 } else { 0.0 };
            worst = worst.max((orthogonality_sum(&f, s) - Complex64::new(want, 0.0)).norm());
        }
    }
    (worst < FLOAT_TOL, format!("max deviation {worst:.3e}"))
}

pub fn plancherel(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut defect, mut fast_dev) = (0.0f64, 0.0f64);
    for (p, l) in TRANSFORM_FIELDS {
        let f = field(p, l);
        for _ in 0..100 {
            let g = DensityFn(
                (0..f.order())
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            );
            defect = defect.max(plancherel_defect(&f, &g).expect("length matches"));
            let slow = fourier_forward(&f, &g).expect("length matches");
            let fast = fourier_fast(&f, &g).expect("length matches");
            for (x, y) in slow.values().iter().zip(fast.values()) {
                fast_dev = fast_dev.max((x - y).norm());
            }
        }
    }
    (
        defect < FLOAT_TOL && fast_dev < FLOAT_TOL,
        format!("max defect {defect:.3e}, fast vs direct {fast_dev:.3e}"),
    )
}

pub fn energy_oracle(seed: u64) -> (bool, String) {
    let fields: Vec<FieldSpec> = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1)]
        .into_iter()
        .map(|(p, l)| field(p, l))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for i in 0..100 {
        let f = &fields[i % fields.len()];
        let a = random_subset(&mut rng, f, 1, 5, false);
        let b = random_subset(&mut rng, f, 1, 5, false);
        let c = random_subset(&mut rng, f, 1, 5, false);
        let lines = lines_from_bc(&b, &c);
        if energy3(f, &lines, &a) != energy3_bruteforce(f, &lines, &a) {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("{mismatches} mismatches in 100 instances"))
}

pub fn exhaustive_f3() -> (bool, String) {
    let f = field(3, 1);
    let subsets: Vec<SubsetFq> = (1u32..8)
        .map(|mask| SubsetFq::from_elems(3, (0..3).filter(|i| mask >> i & 1 == 1).map(Elem)))
        .collect();
    let (mut triples, mut chains, mut failures) = (0, 0, 0);
    for a in &subsets {
        for b in &subsets {
            for c in &subsets {
                triples += 1;
                let full = lines_from_bc(b, c);
                if !full.is_empty() {
                    let h = holder_check(&f, &full, a).expect("nonempty");
                    let m = moment_check_counts(rep_function(&f, &full, a).counts(), 3).expect("nonempty");
                    failures += (!h.pass) as u32 + (!m.pass) as u32;
                }
                let lines = lines_from_bc(&b.without(Elem::ZERO), c);
                if lines.is_empty() {
                    continue;
                }
                chains += 1;
                let h = holder_check(&f, &lines, a).expect("nonempty");
                let m = moment_check_counts(rep_function(&f, &lines, a).counts(), 3).expect("nonempty");
                let u = energy_upper_check(&f, &lines, a).expect("pinned product family");
                let img = image_set(&f, &lines, a).len() as u64;
                let exact = exact_lower_bound_holds(3, lines.len() as u64, a.len() as u64, img)
                    && ba_plus_c(&f, a, b, c).len() as u64 >= img;
                failures += [h.pass, m.pass, u.pass, exact].iter().filter(|p| !**p).count() as u32;
            }
        }
    }
    (
        failures == 0 && triples == 343,
        format!("{triples} triples, {chains} with nonzero slopes, {failures} failed checks"),
    )
}

pub fn randomized_chain(seed: u64) -> (bool, String) {
    let fields: Vec<FieldSpec> = [5, 7, 11, 13].into_iter().map(|p| field(p, 1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut failed) = (0, 0);
    for i in 0..500 {
        let f = &fields[i % fields.len()];
        let q = f.order();
        let a = random_subset(&mut rng, f, 1, q, false);
        let b = random_subset(&mut rng, f, 1, q, false);
        let c = random_subset(&mut rng, f, 1, q, false);
        let r = verify_instance(f, &a, &b, &c, Mode::BaPlusC).expect("nonempty sets");
        if r.e3.is_some() {
            checked += 1;
        }
        if !r.checks_passed {
            failed += 1;
        }
    }
    (
        failed == 0 && checked >= 450,
        format!("{checked} chains checked, {failed} failed"),
    )
}

pub fn lemma2_standalone(seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut failed, mut unequal) = (0, 0);
    for i in 0..1000 {
        let n = 2 + (i % 3) as u32;
        let len = rng.random_range(2..=50);
        let values: Vec<u64> = (0..len).map(|_| rng.random_range(0..100)).collect();
        let m = moment_check_counts(&values, n).expect("valid domain");
        failed += (!m.pass) as u32;
        if n == 2 && m.lhs != m.rhs {
            unequal += 1;
        }
    }
    (
        failed == 0 && unequal == 0,
        format!("{failed} failures, {unequal} non-equalities at n=2"),
    )
}

/// Returns the pass flag, a detail line and the instance rows.
pub fn tightness() -> (bool, String, Vec<BoundReport>) {
    let mut rows = Vec::new();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [2u64, 3, 5] {
        let f = field(p, 2);
        let sub = SubsetFq::from_elems(f.order(), f.subfield(1).expect("1 divides 2"));
        for mode in [Mode::BaPlusC, Mode::BTimesAPlusC] {
            let mut r = verify_instance(&f, &sub, &sub, &sub, mode).expect("nonempty");
            r.family = "subfield".into();
            ok &= r.size_image == p && r.ratio == 1.0 && r.checks_passed;
            if mode == Mode::BaPlusC {
                parts.push(format!("q={}: |AA+A|={} ratio={:?}", p * p, r.size_image, r.ratio));
            }
            rows.push(r);
        }
    }
    (ok, parts.join("; "), rows)
}

pub fn large_sets(master: u64) -> (bool, String, Vec<BoundReport>) {
    let mut rows = Vec::new();
    let mut ok = true;
    let mut min_ratio = f64::INFINITY;
    for (k, q) in [101u64, 257].into_iter().enumerate() {
        let f = field(q, 1);
        let size = (q as f64).powf(0.75).ceil() as usize;
        for trial in 0..20 {
            let seed = cell_seed(master, (k * 20 + trial) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks = rand::seq::index::sample(&mut rng, q as usize, size);
            let a = SubsetFq::from_elems(f.order(), picks.into_iter().map(|i| Elem(i as u32)));
            let mut r = verify_instance(&f, &a, &a, &a, Mode::BaPlusC).expect("nonempty");
            r.family = "random".into();
            r.seed = seed;
            let bound = exact_lower_bound(q, r.size_l_checked, size as u64).expect("nonzero sizes");
            ok &= r.size_image as f64 >= bound && r.checks_passed;
            min_ratio = min_ratio.min(r.ratio);
            rows.push(r);
        }
    }
    (ok, format!("empirical min ratio {min_ratio:.4}"), rows)
}

const SEED: u64 = 0x5eed_2024;

/// Runs the whole suite.
pub fn run_verify() -> Result<VerifyOutcome> {
    let secs = Duration::from_secs;
    let mut criteria = vec![
        timed(1, "orthogonality", Some(secs(1)), orthogonality),
        timed(2, "plancherel and fast transform", Some(secs(5)), || plancherel(SEED)),
        timed(3, "energy oracle equivalence", Some(secs(10)), || energy_oracle(SEED)),
        timed(4, "exhaustive chain over F_3", Some(secs(5)), exhaustive_f3),
        timed(5, "randomized chain q in {5,7,11,13}", Some(secs(30)), || randomized_chain(SEED)),
        timed(6, "moment inequality standalone", Some(secs(5)), || lemma2_standalone(SEED)),
    ];

    let mut rows = Vec::new();
    let mut instance_rows = |id, name, limit, body: fn() -> (bool, String, Vec<BoundReport>)| {
        let mut produced = Vec::new();
        let outcome = timed(id, name, limit, || {
            let (ok, detail, r) = body();
            produced = r;
            (ok, detail)
        });
        rows.extend(produced);
        outcome
    };
    criteria.push(instance_rows(7, "subfield tightness", Some(secs(1)), tightness));
    criteria.push(instance_rows(8, "large-set regime", Some(secs(60)), || large_sets(SEED)));

    let first = render_report(&rows, Format::Csv)?;
    criteria.push(timed(9, "determinism", None, || {
        let again: Vec<BoundReport> = tightness().2.into_iter().chain(large_sets(SEED).2).collect();
        match render_report(&again, Format::Csv) {
            Ok(bytes) => (bytes == first, format!("{} CSV bytes compared", first.len())),
            Err(e) => (false, e.to_string()),
        }
    }));

    Ok(VerifyOutcome { criteria, rows })
}
