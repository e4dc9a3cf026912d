use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use earid::features::extract_features;
use earid::harness::targets::{all_passed, attack_checks, drift_checks, evaluation_checks, Check};
use earid::harness::{attack_suite, drift_eval, evaluate, BerSummary, DriftConfig, DriftMode, FeatureCache};
use earid::keygen::{HelperData, PopulationStats};
use earid::protocol::{
    earbud_session, enrollment_messages, enrollment_session, verifier_session, CredentialStore, EnrollmentRequest,
    Message,
};
use earid::synth::{gen_population, Dataset, DatasetConfig, ExcitationSpec, NoiseCondition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::list::{parse_indices, parse_subjects};
use crate::{AttackArgs, AuthArgs, DriftArgs, EnrollArgs, EvalArgs, ExcitationArg, FeaturesArgs, GenArgs, ModeArg};
use crate::{NoiseArg, ReportArgs};

const SAMPLE_RATE: u32 = 48_000;

pub fn gen(a: GenArgs) -> Result<ExitCode> {
    let excitation = match a.excitation {
        ExcitationArg::Chirp => ExcitationSpec::chirp(SAMPLE_RATE, a.duration, 20.0, 20_000.0),
        ExcitationArg::Mls => ExcitationSpec::mls(SAMPLE_RATE, a.duration, a.seed),
    };
    let noise_schedule = a
        .noise
        .iter()
        .map(|n| match n {
            NoiseArg::Quiet => NoiseCondition::Quiet,
            NoiseArg::Indoor => NoiseCondition::Indoor,
            NoiseArg::Street => NoiseCondition::Street,
        })
        .collect();
    let config = DatasetConfig {
        n_subjects: a.subjects,
        scans_per_subject: a.scans,
        enroll_scans: a.enroll_scans,
        seed: a.seed,
        excitation,
        noise_schedule,
        wear_jitter: a.wear_jitter,
        attacks: a.attacks,
        ..DatasetConfig::default()
    };
    let start = Instant::now();
    let dataset = gen_population(&config, &a.out)?;
    println!(
        "wrote {} scans of {} subjects to {} in {:.1} s",
        dataset.records.len(),
        dataset.manifest.subjects.len(),
        a.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

fn load(path: &Path) -> Result<Dataset> {
    Dataset::load(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn pick_scans<'a>(dataset: &'a Dataset, subject: &str, trials: &[u32]) -> Result<Vec<&'a [f32]>> {
    let scans = dataset.subject_scans(subject);
    if scans.is_empty() {
        bail!("unknown subject {subject:?}");
    }
    trials
        .iter()
        .map(|&t| {
            scans
                .iter()
                .find(|r| r.entry.trial == t)
                .map(|r| r.impulse_response.as_slice())
                .with_context(|| format!("{subject} has no scan {t}"))
        })
        .collect()
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn features(a: FeaturesArgs) -> Result<ExitCode> {
    let dataset = load(&a.input)?;
    let scans = pick_scans(&dataset, &a.subject, &parse_indices(&a.scans)?)?;
    let feature = extract_features(&scans, &dataset.config().features)?;
    let text = serde_json::to_string(&feature.coefficients)? + "\n";
    write_or_print(a.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn enroll(a: EnrollArgs) -> Result<ExitCode> {
    let dataset = load(&a.input)?;
    let config = dataset.config();
    let subjects = &dataset.manifest.subjects;
    let subject = subjects
        .iter()
        .position(|s| *s == a.subject)
        .with_context(|| format!("unknown subject {:?}", a.subject))?;
    let gallery = match &a.gallery {
        Some(list) => parse_subjects(list, subjects)?,
        None => (0..subjects.len()).filter(|&s| s != subject).collect(),
    };
    if gallery.contains(&subject) {
        bail!("the gallery must not contain the enrolling subject");
    }

    let population_features = gallery
        .iter()
        .flat_map(|&g| dataset.subject_scans(&subjects[g]))
        .map(|r| Ok(extract_features(&[&r.impulse_response], &config.features)?.coefficients))
        .collect::<Result<Vec<_>>>()?;
    let population = PopulationStats::from_features(&population_features)?;

    let trials: Vec<u32> = (0..config.enroll_scans).collect();
    let scans = pick_scans(&dataset, &a.subject, &trials)?;
    let mut stream = Vec::new();
    for message in enrollment_messages(&a.subject, &scans, &config.features)? {
        stream.extend(message.encode()?);
    }
    let store = CredentialStore::open(&a.store)?;
    let request = EnrollmentRequest {
        population: &population,
        ecc: a.ecc,
        alpha: a.alpha,
        projection_seed: a.projection_seed,
        config_hash: config.features.config_hash(),
        trusted_channel: true,
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs()),
    };
    let (credential, reply) = enrollment_session(&stream, &request, &store)?;
    let Message::HelperData(helper) = reply else {
        bail!("verifier replied with {:?}", reply.message_type());
    };
    fs::write(&a.out_key, credential.key.to_bytes()).with_context(|| format!("writing {}", a.out_key.display()))?;
    fs::write(&a.out_helper, helper.to_bytes()?).with_context(|| format!("writing {}", a.out_helper.display()))?;
    println!(
        "enrolled {} with {}: {} of {} feature dimensions kept, {}-bit key, gallery of {} subjects",
        a.subject,
        a.ecc,
        helper.mask.count_ones(),
        helper.mask.len(),
        helper.key_length,
        gallery.len()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn auth(a: AuthArgs) -> Result<ExitCode> {
    let dataset = load(&a.input)?;
    let config = dataset.config();
    let trials = match &a.scans {
        Some(list) => parse_indices(list)?,
        None => vec![config.enroll_scans, config.enroll_scans + 1],
    };
    let scans = pick_scans(&dataset, &a.subject, &trials)?;
    let helper_bytes = fs::read(&a.helper).with_context(|| format!("reading {}", a.helper.display()))?;
    let helper = HelperData::from_bytes(&helper_bytes)?;
    let user = a.user.as_deref().unwrap_or(&a.subject);

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let request = earbud_session(user, &scans, &helper, &config.features, a.ecc, &mut rng)?.encode()?;
    let store = CredentialStore::open(&a.store)?;
    let outcome = verifier_session(&request, &store);
    let verdict = if outcome.decision.accepted() { "ACCEPT" } else { "REJECT" };
    match &outcome.diagnostic {
        Some(why) => println!("{verdict} {user} ({why})"),
        None => println!("{verdict} {user}"),
    }
    Ok(if outcome.decision.accepted() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn ber_line(name: &str, s: &BerSummary) -> String {
    format!(
        "{name:<9} BER mean {:.4}  median {:.4}  p95 {:.4}  range [{:.4}, {:.4}]  mode {} bits",
        s.mean, s.median, s.p95, s.min, s.max, s.mode_bits
    )
}

/// Prints the checks, writes the JSON report and picks the exit status.
fn finish<T: Serialize>(args: &ReportArgs, report: &T, checks: &[Check]) -> Result<ExitCode> {
    for check in checks {
        println!("{check}");
    }
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(report)? + "\n";
        write_or_print(Some(path), &text)?;
    }
    Ok(if args.strict && !all_passed(checks) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn load_cache(args: &ReportArgs) -> Result<(Dataset, FeatureCache)> {
    let dataset = load(&args.input)?;
    let cache = FeatureCache::build(&dataset)?;
    Ok((dataset, cache))
}

pub fn eval(a: EvalArgs) -> Result<ExitCode> {
    let (_, cache) = load_cache(&a.report)?;
    let r = evaluate(&cache, a.report.ecc, a.trials, a.report.seed)?;
    println!(
        "{} (n={} k={} t={}), {} groupings of {}/{}, seed {}",
        r.ecc, r.n, r.k, r.t, r.trials, r.gallery_size, r.enrolled_size, r.grouping_seed
    );
    println!("{} genuine and {} impostor attempts", r.genuine_attempts, r.impostor_attempts);
    println!(
        "FRR {:.4}  FAR {:.4}  BAC {:.4}  EER {:.4} at {:.2} bits",
        r.frr, r.far, r.bac, r.eer, r.eer_threshold
    );
    println!("{}", ber_line("genuine", &r.genuine_ber));
    println!("{}", ber_line("impostor", &r.impostor_ber));
    let k = &r.key_stats;
    println!(
        "keys: bit balance {:.4}, pairwise distance mean {:.1} / min {} bits, {:.3} of pairs above 0.15 L",
        k.bit_balance, k.mean_pairwise_distance, k.min_pairwise_distance, k.pairs_above_015
    );
    finish(&a.report, &r, &evaluation_checks(&r))
}

pub fn attack(a: AttackArgs) -> Result<ExitCode> {
    let (_, cache) = load_cache(&a.report)?;
    let r = attack_suite(&cache, a.report.ecc, a.trials, a.report.seed)?;
    println!("{} (t={}), {} groupings, seed {}", r.ecc, r.t, r.trials, r.grouping_seed);
    for (name, tally) in [
        ("passive", &r.passive),
        ("synthetic", &r.synthetic),
        ("universal", &r.universal),
        ("key guessing", &r.key_guessing),
        ("random keys", &r.random_keys),
        ("false trigger", &r.false_trigger),
    ] {
        let closest = tally.min_distance.map_or("-".to_string(), |d| d.to_string());
        println!(
            "{name:<14} {:>6} / {:<7} rate {:.4}  closest {closest} bits",
            tally.accepted, tally.attempts, tally.rate
        );
    }
    finish(&a.report, &r, &attack_checks(&r))
}

pub fn drift(a: DriftArgs) -> Result<ExitCode> {
    let (dataset, cache) = load_cache(&a.report)?;
    let base = match a.mode {
        ModeArg::Day => DriftConfig::days(a.periods, a.report.seed),
        ModeArg::Session => DriftConfig::sessions(a.periods, a.report.seed),
    };
    let config = DriftConfig {
        attempts_per_period: a.attempts,
        drift_factor: if base.mode == DriftMode::Day { a.drift_factor } else { 0.0 },
        ..base
    };
    let r = drift_eval(&dataset, &cache, a.report.ecc, &config)?;
    println!(
        "{} (t={}), {:?} mode, {} enrolled users, {} attempts per period",
        r.ecc,
        r.t,
        r.config.mode,
        r.enrolled.len(),
        r.config.attempts_per_period
    );
    for p in &r.periods {
        let noise = p.noise.map_or(String::new(), |n| format!(" {n:?}"));
        println!(
            "period {} jitter {:.3}{noise}: genuine [{}, {}] bits, {:.3} within t; passive [{}, {}] bits, mean {:.1}",
            p.period,
            p.wear_jitter,
            p.genuine_min,
            p.genuine_max,
            p.genuine_within_t,
            p.passive_min,
            p.passive_max,
            p.passive_mean
        );
    }
    finish(&a.report, &r, &drift_checks(&r))
}
