//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 5-7 and 9 run on the default 44 x 40 population, generated
//! twice through the `earid` binary.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use earid::bits::Bits;
use earid::ecc::EccName;
use earid::features::{band_bins, extract_features, FeatureConfig};
use earid::keygen::{
    biometric_information, enroll, extract_key, otsu_mask, smooth, KeygenParams, PopulationStats, OTSU_LEVELS,
};
use earid::protocol::{commit, verify_with_key, Decision};
use earid::synth::{
    estimate_channel, gen_excitation, simulate_scan, synth_subject, Dataset, ExcitationSpec, NoiseCondition,
    ScanConditions, DEFAULT_IR_WINDOW,
};
use earid::keygen::BiometricKey;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const ECC_MESSAGES: usize = 10_000;
const ECC_RUNTIME: Duration = Duration::from_secs(60);
const BOUNDARY_TRIALS: usize = 100;
const RENYI_PAIRS: usize = 1000;
const RENYI_TOLERANCE: f64 = 1e-9;
const D0_LIMIT_TOLERANCE: f64 = 1e-3;
const OTSU_VECTORS: usize = 1000;
const EVAL_TRIALS: &str = "20";
const EVAL_SEED: &str = "7";
const MIN_BAC: f64 = 0.97;
const MAX_FAR: f64 = 0.02;
const MAX_ASR: f64 = 0.02;
const END_TO_END_RUNTIME: Duration = Duration::from_secs(600);
const BIT_BALANCE: (f64, f64) = (0.45, 0.55);
const MIN_KEY_DISTANCE: f64 = 0.15;
const INVARIANCE_CASES: usize = 50;
const SCALE_TOLERANCE: f64 = 1e-9;
const NOISE_TOLERANCE: f64 = 1e-6;
const MAX_ENROLL_TIME: Duration = Duration::from_secs(1);
const MAX_EXTRACT_TIME: Duration = Duration::from_millis(250);

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_bits(len: usize, rng: &mut impl Rng) -> Bits {
    Bits::from_bools((0..len).map(|_| rng.random()).collect())
}

fn flip_random(bits: &Bits, weight: usize, rng: &mut impl Rng) -> Bits {
    let mut out = bits.clone();
    for i in sample(rng, bits.len(), weight) {
        out.flip(i);
    }
    out
}

fn ecc_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut details = Vec::new();
    for name in EccName::ALL {
        let code = name.code();
        let (n, k, t) = (code.n(), code.k(), code.t());
        let mut decoded = 0;
        let mut silent = 0;
        for _ in 0..ECC_MESSAGES {
            let message = random_bits(k, &mut rng);
            let word = code.encode(&message).map_err(|e| e.to_string())?;
            let weight = rng.random_range(0..=t);
            let received = flip_random(word.bits(), weight, &mut rng);
            decoded += (code.decode(&received).as_ref() == Ok(&message)) as usize;

            let over = flip_random(word.bits(), t + 1, &mut rng);
            if let Ok(m) = code.decode(&over) {
                let fixed = code.encode(&m).map_err(|e| e.to_string())?;
                if m == message || fixed.bits().hamming(&over).unwrap() > t {
                    silent += 1;
                }
            }
        }
        if decoded != ECC_MESSAGES || silent != 0 {
            return Err(format!("{name}: {decoded}/{ECC_MESSAGES} decoded, {silent} silent t+1 decodes"));
        }
        details.push(format!("({n},{k},{t}) {decoded}/{ECC_MESSAGES}"));
    }
    let elapsed = start.elapsed();
    check(
        elapsed < ECC_RUNTIME,
        format!("{}; no silent t+1 decodes; {:.1} s", details.join(", "), elapsed.as_secs_f64()),
    )
}

fn commitment_boundary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut details = Vec::new();
    for name in EccName::ALL {
        let code = name.code();
        let t = code.t();
        for distance in 0..=2 * t {
            for _ in 0..BOUNDARY_TRIALS {
                let key = BiometricKey {
                    bits: random_bits(code.n(), &mut rng),
                };
                let (commitment, _) = commit(&key, code, &mut rng).map_err(|e| e.to_string())?;
                let probe = BiometricKey {
                    bits: flip_random(&key.bits, distance, &mut rng),
                };
                let decision = verify_with_key(&commitment, &probe, code);
                let expected = if distance <= t { Decision::Accept } else { Decision::Reject };
                if decision != expected {
                    return Err(format!("{name}: distance {distance} gave {decision:?}"));
                }
            }
        }
        details.push(format!("{name} t={t}"));
    }
    Ok(format!(
        "accept <= t, reject in (t, 2t], {BOUNDARY_TRIALS} trials per distance: {}",
        details.join(", ")
    ))
}

fn random_histogram(bins: usize, zero_fraction: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut h: Vec<f64> = (0..bins)
        .map(|_| if rng.random::<f64>() < zero_fraction { 0.0 } else { rng.random::<f64>() })
        .collect();
    if h.iter().all(|&v| v == 0.0) {
        h[rng.random_range(0..bins)] = 1.0;
    }
    let total: f64 = h.iter().sum();
    h.iter().map(|v| v / total).collect()
}

fn brute_renyi(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..p.len() {
        if p[i] > 0.0 {
            sum += if alpha == 0.0 { q[i] } else { p[i].powf(alpha) * q[i].powf(1.0 - alpha) };
        }
    }
    if alpha == 0.0 {
        -sum.log2()
    } else {
        sum.log2() / (alpha - 1.0)
    }
}

fn renyi_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut worst_limit) = (0.0f64, 0.0f64);
    for _ in 0..RENYI_PAIRS {
        let bins = rng.random_range(2..=64);
        let p = random_histogram(bins, 0.5, &mut rng);
        let q = smooth(&random_histogram(bins, 0.3, &mut rng), rng.random_range(1e-6..1e-2));
        for alpha in [0.0, 0.25, 0.5, 2.0] {
            let got = biometric_information(&p, &q, alpha).map_err(|e| e.to_string())?;
            worst = worst.max((got - brute_renyi(&p, &q, alpha)).abs());
        }
        let d0 = biometric_information(&p, &q, 0.0).map_err(|e| e.to_string())?;
        let near = biometric_information(&p, &q, 1e-6).map_err(|e| e.to_string())?;
        worst_limit = worst_limit.max((d0 - near).abs());
    }
    check(
        worst < RENYI_TOLERANCE && worst_limit < D0_LIMIT_TOLERANCE,
        format!(
            "{RENYI_PAIRS} pairs, max |D - brute| {worst:.2e} < {RENYI_TOLERANCE:.0e}; \
             max |D_0 - D_1e-6| {worst_limit:.2e} < {D0_LIMIT_TOLERANCE:.0e} bits"
        ),
    )
}

/// Independent Otsu: float between-class variance over every split of
/// the quantized levels, keeping the lowest split among (near) ties.
fn brute_otsu_mask(values: &[f64]) -> Vec<bool> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![true; values.len()];
    }
    let levels: Vec<f64> = values
        .iter()
        .map(|v| (((v - min) / (max - min) * OTSU_LEVELS as f64).ceil() - 1.0).clamp(0.0, (OTSU_LEVELS - 1) as f64))
        .collect();
    let mut best = (0usize, -1.0f64);
    for k in 0..OTSU_LEVELS - 1 {
        let lo: Vec<f64> = levels.iter().cloned().filter(|&l| l <= k as f64).collect();
        let hi: Vec<f64> = levels.iter().cloned().filter(|&l| l > k as f64).collect();
        if lo.is_empty() || hi.is_empty() {
            continue;
        }
        let w0 = lo.len() as f64 / levels.len() as f64;
        let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
        let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
        let score = w0 * (1.0 - w0) * (m0 - m1).powi(2);
        if score > best.1 * (1.0 + 1e-12) {
            best = (k, score);
        }
    }
    levels.iter().map(|&l| l > best.0 as f64).collect()
}

fn otsu_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..OTSU_VECTORS {
        let d = rng.random_range(2..=512);
        let values: Vec<f64> = match case % 4 {
            0 => (0..d).map(|_| rng.random_range(0.0..20.0)).collect(),
            1 => (0..d).map(|_| -rng.random::<f64>().ln() * 3.0).collect(),
            // Coarse values: many exact ties.
            2 => (0..d).map(|_| rng.random_range(0..6) as f64 * 0.5).collect(),
            _ => (0..d)
                .map(|_| if rng.random::<f64>() < 0.7 { rng.random_range(0.0..1.0) } else { rng.random_range(8.0..12.0) })
                .collect(),
        };
        let mask = otsu_mask(&values).map_err(|e| e.to_string())?;
        if mask.as_slice() != brute_otsu_mask(&values).as_slice() {
            return Err(format!("vector {case} (d = {d}) differs from brute force"));
        }
    }
    Ok(format!("{OTSU_VECTORS} random vectors, d <= 512, masks equal brute force"))
}

fn subject_responses() -> Vec<Vec<Vec<f64>>> {
    let ex = gen_excitation(&ExcitationSpec::default()).unwrap();
    (0..8)
        .map(|s| {
            let profile = synth_subject(9, s);
            (0..2)
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(((s as u64) << 8) | t as u64);
                    let cond = ScanConditions::new(NoiseCondition::Street, 1.0, t);
                    let scan = simulate_scan(&profile, &ex, &cond, &mut rng);
                    estimate_channel(&ex.samples, &scan.recorded, DEFAULT_IR_WINDOW).unwrap().response
                })
                .collect()
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn pipeline_invariances() -> Outcome {
    let cfg = FeatureConfig::default();
    let subjects = subject_responses();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut scale_worst, mut noise_worst) = (0.0f64, 0.0f64);
    for case in 0..INVARIANCE_CASES {
        let scans = &subjects[case % subjects.len()];
        let base = extract_features(scans, &cfg).map_err(|e| e.to_string())?.coefficients;

        let a = 10f64.powf(rng.random_range(-9.0..9.0));
        let scaled: Vec<Vec<f64>> = scans.iter().map(|h| h.iter().map(|v| a * v).collect()).collect();
        let moved = extract_features(&scaled, &cfg).map_err(|e| e.to_string())?.coefficients;
        scale_worst = scale_worst.max(max_abs_diff(&base, &moved));

        // On-grid components strictly below f_low, up to 10x the response.
        let len = scans[0].len();
        let first = *band_bins(len, cfg.sample_rate as f64, cfg.f_low, cfg.f_high).start();
        let amplitude = 10f64.powf(rng.random_range(-3.0..1.0));
        let noisy: Vec<Vec<f64>> = scans
            .iter()
            .map(|h| {
                let parts: Vec<(f64, f64, f64)> = (0..first)
                    .map(|k| (k as f64, amplitude * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()))
                    .collect();
                h.iter()
                    .enumerate()
                    .map(|(n, v)| {
                        v + parts
                            .iter()
                            .map(|&(k, amp, ph)| amp * (2.0 * PI * k * n as f64 / len as f64 + ph).cos())
                            .sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        let moved = extract_features(&noisy, &cfg).map_err(|e| e.to_string())?.coefficients;
        noise_worst = noise_worst.max(max_abs_diff(&base, &moved));
    }
    check(
        scale_worst < SCALE_TOLERANCE && noise_worst < NOISE_TOLERANCE,
        format!(
            "{INVARIANCE_CASES} cases each: scale max diff {scale_worst:.2e} < {SCALE_TOLERANCE:.0e}, \
             low-band noise max diff {noise_worst:.2e} < {NOISE_TOLERANCE:.0e}"
        ),
    )
}

fn earid(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_earid"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let code = out.status.code().unwrap_or(-1);
    if code != 0 && code != 2 {
        return Err(format!("earid {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok((code, stdout))
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

struct Run {
    dataset: PathBuf,
    eval: PathBuf,
}

/// `earid gen` with attacks followed by `earid eval`.
fn gen_and_eval(root: &Path, name: &str) -> Result<Run, String> {
    let dataset = root.join(name);
    let eval = root.join(format!("{name}-eval.json"));
    earid(&["gen", "--out", dataset.to_str().unwrap(), "--attacks"])?;
    earid(&[
        "eval",
        "--in",
        dataset.to_str().unwrap(),
        "--ecc",
        "bch255",
        "--trials",
        EVAL_TRIALS,
        "--seed",
        EVAL_SEED,
        "--json",
        eval.to_str().unwrap(),
    ])?;
    Ok(Run { dataset, eval })
}

fn end_to_end(run: &Run, root: &Path, elapsed: Duration) -> Outcome {
    let start = Instant::now();
    let attack = root.join("attack.json");
    earid(&[
        "attack",
        "--in",
        run.dataset.to_str().unwrap(),
        "--ecc",
        "bch255",
        "--trials",
        EVAL_TRIALS,
        "--seed",
        EVAL_SEED,
        "--json",
        attack.to_str().unwrap(),
    ])?;
    let elapsed = elapsed + start.elapsed();
    let e = read_json(&run.eval)?;
    let a = read_json(&attack)?;
    let bac = e["bac"].as_f64().unwrap();
    let far = e["far"].as_f64().unwrap();
    let rates: Vec<(&str, f64)> = [("P", "passive"), ("S", "synthetic"), ("U", "universal"), ("K", "key_guessing")]
        .iter()
        .map(|(short, key)| (*short, a[key]["rate"].as_f64().unwrap()))
        .collect();
    let mode = e["genuine_ber"]["mode_bits"].as_u64().unwrap();
    let ok = bac >= MIN_BAC && far <= MAX_FAR && rates.iter().all(|(_, r)| *r <= MAX_ASR) && elapsed < END_TO_END_RUNTIME;
    let asr: Vec<String> = rates.iter().map(|(s, r)| format!("{s}-ASR {r:.4}")).collect();
    check(
        ok,
        format!(
            "BAC {bac:.4} >= {MIN_BAC}, FAR {far:.4} <= {MAX_FAR}, {} <= {MAX_ASR}; genuine BER mode {mode} bits \
             ({:.1}%); {:.0} s",
            asr.join(", "),
            100.0 * mode as f64 / 255.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn key_statistics(run: &Run) -> Outcome {
    let e = read_json(&run.eval)?;
    let balance = e["key_stats"]["bit_balance"].as_f64().unwrap();
    let distance = e["key_stats"]["mean_pairwise_distance"].as_f64().unwrap();
    let n = e["n"].as_f64().unwrap();
    check(
        (BIT_BALANCE.0..=BIT_BALANCE.1).contains(&balance) && distance >= MIN_KEY_DISTANCE * n,
        format!(
            "bit balance {balance:.4} in [{}, {}], mean pairwise distance {distance:.1} >= {:.2} bits",
            BIT_BALANCE.0,
            BIT_BALANCE.1,
            MIN_KEY_DISTANCE * n
        ),
    )
}

fn determinism(first: &Run, root: &Path) -> Outcome {
    let second = gen_and_eval(root, "second")?;
    let files = files_under(&first.dataset);
    if files != files_under(&second.dataset) {
        return Err("the two datasets hold different file sets".into());
    }
    for f in &files {
        if fs::read(first.dataset.join(f)).unwrap() != fs::read(second.dataset.join(f)).unwrap() {
            return Err(format!("{} differs", f.display()));
        }
    }
    let same_report = fs::read(&first.eval).unwrap() == fs::read(&second.eval).unwrap();
    check(
        same_report,
        format!("{} dataset files and the eval JSON report byte-identical across two runs", files.len()),
    )
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn performance(run: &Run) -> Outcome {
    let dataset = Dataset::load(&run.dataset).map_err(|e| e.to_string())?;
    let cfg = dataset.config().features;
    let subjects = &dataset.manifest.subjects;
    let gallery = subjects[..30]
        .iter()
        .flat_map(|id| dataset.subject_scans(id))
        .map(|r| extract_features(&[&r.impulse_response], &cfg).map(|f| f.coefficients))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let population = PopulationStats::from_features(&gallery).map_err(|e| e.to_string())?;
    let scans: Vec<&[f32]> = dataset
        .subject_scans(&subjects[40])
        .iter()
        .map(|r| r.impulse_response.as_slice())
        .collect();
    let params = KeygenParams::new(255, 1);

    let mut enroll_times = Vec::new();
    let mut enrollment = None;
    for _ in 0..5 {
        let start = Instant::now();
        enrollment = Some(enroll(&scans[..8], &population, &params, &cfg).map_err(|e| e.to_string())?);
        enroll_times.push(start.elapsed());
    }
    let helper = enrollment.unwrap().helper;
    let mut extract_times = Vec::new();
    for a in 0..20 {
        let attempt = &scans[8 + 2 * (a % 16)..10 + 2 * (a % 16)];
        let start = Instant::now();
        extract_key(attempt, &helper, &cfg).map_err(|e| e.to_string())?;
        extract_times.push(start.elapsed());
    }
    let (e, x) = (median(enroll_times), median(extract_times));
    check(
        e < MAX_ENROLL_TIME && x < MAX_EXTRACT_TIME,
        format!(
            "median enrollment {:.1} ms < {} ms, key extraction {:.2} ms < {} ms",
            e.as_secs_f64() * 1e3,
            MAX_ENROLL_TIME.as_millis(),
            x.as_secs_f64() * 1e3,
            MAX_EXTRACT_TIME.as_millis()
        ),
    )
}

fn drift_targets(run: &Run) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for mode in ["day", "session"] {
        let (code, stdout) = earid(&[
            "drift",
            "--in",
            run.dataset.to_str().unwrap(),
            "--periods",
            "5",
            "--mode",
            mode,
            "--seed",
            EVAL_SEED,
            "--strict",
        ])?;
        ok &= code == 0;
        let checks: Vec<&str> = stdout.lines().filter(|l| l.starts_with('[')).collect();
        lines.push(format!("{mode}: {}", checks.join("; ")));
    }
    check(ok, lines.join(" | "))
}

fn run(label: &str, name: &str, f: impl FnOnce() -> Outcome, failures: &mut Vec<String>) {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
    let (status, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("[{status}] {label}. {name}: {detail}");
    if outcome.is_err() {
        failures.push(format!("{label}. {name}"));
    }
}

fn main() -> ExitCode {
    let mut failures = Vec::new();
    run("1", "ECC round-trip", ecc_round_trip, &mut failures);
    run("2", "fuzzy-commitment boundary", commitment_boundary, &mut failures);
    run("3", "Renyi oracle", renyi_oracle, &mut failures);
    run("4", "Otsu oracle", otsu_oracle, &mut failures);

    let root = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let first = gen_and_eval(root.path(), "first");
    let elapsed = start.elapsed();
    match &first {
        Ok(first) => {
            run("5", "end-to-end accuracy", || end_to_end(first, root.path(), elapsed), &mut failures);
            run("6", "key statistics", || key_statistics(first), &mut failures);
            run("7", "determinism", || determinism(first, root.path()), &mut failures);
        }
        Err(e) => {
            for (label, name) in [("5", "end-to-end accuracy"), ("6", "key statistics"), ("7", "determinism")] {
                run(label, name, || Err(e.clone()), &mut failures);
            }
        }
    }
    run("8", "pipeline invariances", pipeline_invariances, &mut failures);
    match &first {
        Ok(first) => {
            run("9", "performance", || performance(first), &mut failures);
            run("+", "drift targets", || drift_targets(first), &mut failures);
        }
        Err(e) => run("9", "performance", || Err(e.clone()), &mut failures),
    }
    if failures.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failures:?}");
        ExitCode::FAILURE
    }
}
