//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Runs without the libtest harness so the lines are
//! never captured: `cargo test -p sumprod --test acceptance`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sumprod::bounds::{
    asymptotic_ratio, energy_upper_check, exact_lower_bound, exact_lower_bound_holds, holder_check,
    moment_check_counts, parseval_tail, verify_instance, Mode, TAIL_SLACK,
};
use sumprod::field::{Elem, FieldSpec, DEFAULT_CAP};
use sumprod::setstats::{
    ba_plus_c, energy3, energy3_bruteforce, image_set, lines_from_bc, rep_function, SubsetFq,
};
use sumprod::spectral::{fourier_fast, fourier_forward, orthogonality_sum, plancherel_defect, DensityFn};

const TOL: f64 = 1e-9;

const FIELDS: [(u64, u32); 10] = [
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

fn field(p: u64, l: u32) -> FieldSpec {
    FieldSpec::new(p, l, DEFAULT_CAP).unwrap()
}

/// Trace by summing Frobenius powers, independent of the trace table.
fn frobenius_trace(f: &FieldSpec, a: Elem) -> u32 {
    let mut sum = Elem::ZERO;
    let mut cur = a;
    for _ in 0..f.l() {
        sum = f.add(sum, cur);
        cur = f.pow(cur, f.p() as u64);
    }
    assert!(sum.0 < f.p());
    sum.0
}

fn chi_oracle(f: &FieldSpec, a: Elem) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * frobenius_trace(f, a) as f64 / f.p() as f64)
}

fn random_subset(rng: &mut ChaCha8Rng, q: usize, lo: usize, hi: usize) -> Vec<u32> {
    let n = rng.random_range(lo..=hi.min(q));
    rand::seq::index::sample(rng, q, n).into_iter().map(|i| i as u32).collect()
}

fn subset(f: &FieldSpec, xs: &[u32]) -> SubsetFq {
    SubsetFq::from_elems(f.order(), xs.iter().map(|&x| Elem(x)))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(
    results: &mut Vec<(u32, &'static str, bool)>,
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    body: impl FnOnce() -> Outcome,
) {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = out.pass && in_time;
    println!(
        "[{}] criterion {id} ({name}): {}; {:.0} ms{}",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64() * 1e3,
        match limit {
            Some(l) => format!(" (limit {} s)", l.as_secs()),
            None => String::new(),
        }
    );
    results.push((id, name, pass));
}

fn c1_orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    for (p, l) in FIELDS {
        let f = field(p, l);
        for s in f.elements() {
            let want = if s == Elem::ZERO { f.q() as f64 } else { 0.0 };
            worst = worst.max((orthogonality_sum(&f, s) - Complex64::new(want, 0.0)).norm());
            let oracle: Complex64 = f.elements().map(|x| chi_oracle(&f, f.mul(x, s))).sum();
            worst = worst.max((oracle - Complex64::new(want, 0.0)).norm());
        }
    }
    Outcome {
        pass: worst < TOL,
        detail: format!("max |sum - expected| = {worst:.2e} < {TOL:e}"),
    }
}

fn c2_plancherel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut defect, mut fast_dev, mut oracle_dev) = (0.0f64, 0.0f64, 0.0f64);
    for (p, l) in FIELDS {
        let f = field(p, l);
        let q = f.order();
        // chi(-x m) tabulated once through the Frobenius trace.
        let kernel: Vec<Vec<Complex64>> = (0..q)
            .map(|m| {
                (0..q)
                    .map(|x| chi_oracle(&f, f.neg(f.mul(Elem(x as u32), Elem(m as u32)))))
                    .collect()
            })
            .collect();
        for _ in 0..100 {
            let g = DensityFn(
                (0..q)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            );
            defect = defect.max(plancherel_defect(&f, &g).unwrap());
            let slow = fourier_forward(&f, &g).unwrap();
            let fast = fourier_fast(&f, &g).unwrap();
            for (m, row) in kernel.iter().enumerate() {
                fast_dev = fast_dev.max((slow.values()[m] - fast.values()[m]).norm());
                let want: Complex64 = row.iter().zip(g.values()).map(|(k, v)| k * v).sum::<Complex64>() / q as f64;
                oracle_dev = oracle_dev.max((slow.values()[m] - want).norm());
            }
        }
    }
    Outcome {
        pass: defect < TOL && fast_dev < TOL && oracle_dev < TOL,
        detail: format!(
            "plancherel defect {defect:.2e}, fast vs direct {fast_dev:.2e}, direct vs oracle {oracle_dev:.2e}"
        ),
    }
}

fn c3_energy_oracle() -> Outcome {
    let fields: Vec<FieldSpec> = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1)]
        .into_iter()
        .map(|(p, l)| field(p, l))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for i in 0..100 {
        let f = &fields[i % fields.len()];
        let q = f.order();
        let (a, b, c) = (
            random_subset(&mut rng, q, 1, 5),
            random_subset(&mut rng, q, 1, 5),
            random_subset(&mut rng, q, 1, 5),
        );
        let (sa, sb, sc) = (subset(f, &a), subset(f, &b), subset(f, &c));
        let lines = lines_from_bc(&sb, &sc);
        let fast = energy3(f, &lines, &sa);
        let brute = energy3_bruteforce(f, &lines, &sa);
        if fast != brute {
            mismatches += 1;
        }
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("{mismatches} mismatches over 100 instances"),
    }
}

/// Everything over F_3 recomputed with plain `% 3` arithmetic.
fn c4_exhaustive_f3() -> Outcome {
    let f = field(3, 1);
    let masks: Vec<Vec<u32>> = (1u32..8).map(|m| (0..3).filter(|i| m >> i & 1 == 1).collect()).collect();
    let (mut triples, mut chains, mut failures, mut disagreements) = (0, 0, 0, 0);
    for a in &masks {
        for b in &masks {
            for c in &masks {
                triples += 1;
                let (sa, sb, sc) = (subset(&f, a), subset(&f, b), subset(&f, c));

                // Full family, slope zero allowed: Hölder and the moment bound.
                let full = lines_from_bc(&sb, &sc);
                if !full.is_empty() {
                    let h = holder_check(&f, &full, &sa).unwrap();
                    let m = moment_check_counts(rep_function(&f, &full, &sa).counts(), 3).unwrap();
                    failures += (!h.pass) as u32 + (!m.pass) as u32;
                }

                // Nonzero-slope family used by the chain.
                let lines: Vec<(u32, u32)> = b
                    .iter()
                    .filter(|&&m| m != 0)
                    .flat_map(|&m| c.iter().map(move |&k| (m, k)))
                    .collect();
                if lines.is_empty() {
                    continue;
                }
                chains += 1;
                let values: Vec<u32> = lines
                    .iter()
                    .flat_map(|&(m, k)| a.iter().map(move |&x| (m * x + k) % 3))
                    .collect();
                let mut r = [0u64; 3];
                for &v in &values {
                    r[v as usize] += 1;
                }
                // E_3 by direct triple enumeration.
                let mut e3 = 0u64;
                for &u in &values {
                    for &v in &values {
                        for &w in &values {
                            e3 += (u == v && v == w) as u64;
                        }
                    }
                }
                let image = r.iter().filter(|&&x| x > 0).count() as u64;
                let (nl, na, q) = (lines.len() as u64, a.len() as u64, 3u64);
                let holder_ok = (nl * na).pow(3) <= e3 * image * image;
                let total = nl * na;
                // Moment bound with n = 3 over the q = 3 values of r, scaled by 27.
                let max = *r.iter().max().unwrap();
                let spread: u64 = r.iter().map(|&x| (3 * x).abs_diff(total).pow(2)).sum();
                let moment_ok = 27 * e3 <= 3 * total.pow(3) + 9 * max * spread;
                let upper_ok = e3 * q * q <= nl.pow(3) * na.pow(3) + 3 * nl * nl * na * q.pow(3);
                let direct: std::collections::BTreeSet<u32> = b
                    .iter()
                    .flat_map(|&m| a.iter().flat_map(move |&x| c.iter().map(move |&k| (m * x + k) % 3)))
                    .collect();
                let exact_ok = image * image * (nl * na * na + 3 * q.pow(3)) >= nl * na * na * q * q
                    && direct.len() as u64 >= image;

                let lf = lines_from_bc(&sb.without(Elem::ZERO), &sc);
                let h = holder_check(&f, &lf, &sa).unwrap();
                let m = moment_check_counts(rep_function(&f, &lf, &sa).counts(), 3).unwrap();
                let u = energy_upper_check(&f, &lf, &sa).unwrap();
                let lib_image = image_set(&f, &lf, &sa).len() as u64;
                let lib_exact = exact_lower_bound_holds(3, lf.len() as u64, na, lib_image)
                    && ba_plus_c(&f, &sa, &sb, &sc).len() as u64 >= lib_image;

                failures += [holder_ok, moment_ok, upper_ok, exact_ok].iter().filter(|x| !**x).count() as u32;
                disagreements += (u.e3 != BigUint::from(e3)) as u32
                    + (lib_image != image) as u32
                    + (h.pass != holder_ok) as u32
                    + (m.pass != moment_ok) as u32
                    + (u.pass != upper_ok) as u32
                    + (lib_exact != exact_ok) as u32;
            }
        }
    }
    Outcome {
        pass: triples == 343 && failures == 0 && disagreements == 0,
        detail: format!(
            "{triples} triples, {chains} nonzero-slope chains, {failures} failed checks, {disagreements} library/oracle disagreements"
        ),
    }
}

fn c5_randomized_chain() -> Outcome {
    let fields: Vec<FieldSpec> = [5, 7, 11, 13].into_iter().map(|p| field(p, 1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut chains, mut failed, mut tail_failed) = (0, 0, 0);
    let mut parseval_dev = 0.0f64;
    for i in 0..600 {
        let f = &fields[i % 4];
        let q = f.order();
        let a = subset(f, &random_subset(&mut rng, q, 1, q));
        let b = subset(f, &random_subset(&mut rng, q, 1, q));
        let c = subset(f, &random_subset(&mut rng, q, 1, q));
        let r = verify_instance(f, &a, &b, &c, Mode::BaPlusC).unwrap();
        if r.e3.is_none() {
            continue;
        }
        chains += 1;
        let passed = r.lemma1_pass == Some(true)
            && r.lemma2_pass == Some(true)
            && r.energy_upper_pass == Some(true)
            && r.exact_bound_pass == Some(true)
            && r.size_image as f64 >= r.exact_lower_bound.unwrap();
        failed += (!passed) as u32;

        let lines = lines_from_bc(&b.without(Elem::ZERO), &c);
        let tail = r.tail_sum.unwrap();
        parseval_dev = parseval_dev.max((tail - parseval_tail(f, &lines, &a)).abs());
        let bound = (a.len() * lines.len()) as f64;
        tail_failed += (tail > bound + TAIL_SLACK || r.tail_pass != Some(true)) as u32;
    }
    Outcome {
        pass: chains >= 500 && failed == 0 && tail_failed == 0 && parseval_dev < TOL,
        detail: format!(
            "{chains} chains, {failed} exact-check failures, {tail_failed} tail failures, tail vs Parseval {parseval_dev:.2e}"
        ),
    }
}

fn c6_moment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut failed, mut unequal, mut disagreements) = (0, 0, 0);
    for i in 0..1000 {
        let n = 2 + (i % 3) as u32;
        let size = rng.random_range(2..=50usize);
        let values: Vec<u64> = (0..size).map(|_| rng.random_range(0..100)).collect();
        let m = moment_check_counts(&values, n).unwrap();
        failed += (!m.pass) as u32;

        // Multiply both sides by N^n: N^n sum f^n vs N S^n + c M^{n-2} N^{n-2} sum (N f - S)^2.
        let big_n = size as i128;
        let s: i128 = values.iter().map(|&v| v as i128).sum();
        let max = *values.iter().max().unwrap() as i128;
        let lhs = big_n.pow(n) * values.iter().map(|&v| (v as i128).pow(n)).sum::<i128>();
        let spread: i128 = values.iter().map(|&v| (big_n * v as i128 - s).pow(2)).sum();
        let coeff = (n * (n - 1) / 2) as i128;
        let rhs = big_n * s.pow(n) + coeff * max.pow(n - 2) * big_n.pow(n - 2) * spread;
        disagreements += (m.pass != (lhs <= rhs)) as u32;
        if n == 2 {
            unequal += (m.lhs != m.rhs || lhs != rhs) as u32;
        }
    }
    Outcome {
        pass: failed == 0 && unequal == 0 && disagreements == 0,
        detail: format!("{failed} failures, {unequal} inexact n=2 cases, {disagreements} oracle disagreements"),
    }
}

fn c7_tightness() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [2u64, 3, 5] {
        let f = field(p, 2);
        let sub = SubsetFq::from_elems(f.order(), f.subfield(1).unwrap());
        // the prime subfield is {0, ..., p-1} in the coefficient encoding
        ok &= sub.iter().map(|e| e.0 as u64).eq(0..p);
        let size = ba_plus_c(&f, &sub, &sub, &sub).len() as u64;
        let ratio = asymptotic_ratio(&f, &sub, &sub, &sub, Mode::BaPlusC).unwrap();
        let ratio2 = asymptotic_ratio(&f, &sub, &sub, &sub, Mode::BTimesAPlusC).unwrap();
        ok &= size == p && ratio == 1.0 && ratio2 == 1.0;
        parts.push(format!("q={}: |AA+A|={size}, ratio={ratio:?}", p * p));
    }
    Outcome {
        pass: ok,
        detail: parts.join("; "),
    }
}

fn c8_large_sets() -> Outcome {
    let mut ok = true;
    let mut min_ratio = f64::INFINITY;
    let mut parts = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for q in [101u64, 257] {
        let f = field(q, 1);
        let size = (q as f64).powf(0.75).ceil() as usize;
        let mut field_min = f64::INFINITY;
        for _ in 0..20 {
            let a: Vec<u32> = rand::seq::index::sample(&mut rng, q as usize, size)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            let mut direct = vec![false; q as usize];
            for &x in &a {
                for &y in &a {
                    for &z in &a {
                        direct[((x as u64 * y as u64 + z as u64) % q) as usize] = true;
                    }
                }
            }
            let image = direct.iter().filter(|&&v| v).count() as u64;
            let sa = subset(&f, &a);
            let r = verify_instance(&f, &sa, &sa, &sa, Mode::BaPlusC).unwrap();
            let bound = exact_lower_bound(q, r.size_l_checked, size as u64).unwrap();
            ok &= image == r.size_image && image as f64 >= bound && r.checks_passed;
            field_min = field_min.min(r.ratio);
        }
        min_ratio = min_ratio.min(field_min);
        parts.push(format!("q={q} |A|={size}: min ratio {field_min:.4}"));
    }
    Outcome {
        pass: ok,
        detail: format!("{}; empirical min asymptotic ratio {min_ratio:.4}", parts.join(", ")),
    }
}

fn c9_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_sumprod");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{
  "fields": [[3, 2], [5, 2], [13, 1], [101, 1]],
  "families": [{"kind": "subfield", "degree": 1}, {"kind": "random"}, {"kind": "interval", "start": 1, "step": 1}],
  "sizes": [3, {"exponent": 0.75}],
  "trials_per_cell": 3,
  "master_seed": 20240607,
  "mode": "both",
  "independent_sets": true,
  "output": {"format": "csv"}
}"#,
    )
    .unwrap();

    let mut outputs: HashMap<&str, Vec<Vec<u8>>> = HashMap::new();
    let mut ok = true;
    for run in 0..2 {
        let verify_csv = dir.path().join(format!("verify{run}.csv"));
        let status = Command::new(bin)
            .args(["verify", "--csv"])
            .arg(&verify_csv)
            .output()
            .unwrap();
        ok &= status.status.success();
        outputs.entry("verify").or_default().push(std::fs::read(&verify_csv).unwrap());

        let exp_csv = dir.path().join(format!("exp{run}.csv"));
        let status = Command::new(bin)
            .args(["experiment", "--config"])
            .arg(&config)
            .arg("--output")
            .arg(&exp_csv)
            .output()
            .unwrap();
        ok &= status.status.success();
        outputs.entry("experiment").or_default().push(std::fs::read(&exp_csv).unwrap());
    }
    let same = outputs.values().all(|v| v[0] == v[1] && !v[0].is_empty());
    Outcome {
        pass: ok && same,
        detail: format!(
            "verify CSV {} bytes, experiment CSV {} bytes, identical across runs: {same}",
            outputs["verify"][0].len(),
            outputs["experiment"][0].len()
        ),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    criterion(&mut results, 1, "orthogonality", Some(secs(1)), c1_orthogonality);
    criterion(&mut results, 2, "plancherel + fast transform", Some(secs(5)), c2_plancherel);
    criterion(&mut results, 3, "energy oracle equivalence", Some(secs(10)), c3_energy_oracle);
    criterion(&mut results, 4, "exhaustive chain at q=3", Some(secs(5)), c4_exhaustive_f3);
    criterion(&mut results, 5, "randomized chain", Some(secs(30)), c5_randomized_chain);
    criterion(&mut results, 6, "moment inequality standalone", Some(secs(5)), c6_moment);
    criterion(&mut results, 7, "subfield tightness", Some(secs(1)), c7_tightness);
    criterion(&mut results, 8, "large-set regime", Some(secs(60)), c8_large_sets);
    criterion(&mut results, 9, "determinism", None, c9_determinism);

    let failed: Vec<_> = results.iter().filter(|r| !r.2).map(|r| format!("{} ({})", r.0, r.1)).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        eprintln!("acceptance: failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
