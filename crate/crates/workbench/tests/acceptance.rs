//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/support/tate_reference.rs"]
mod tate_reference;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tate_reference::{f2_mul, reference_pairing, to_f2, to_pt, F2};
use tmis_core::algebra::{pairing, CurveParams};
use tmis_core::attacks::{kssti_attack, LeakedEphemeral};
use tmis_core::harness::{
    export_transcripts, leaks_path_for, read_transcripts, replay_attacks, run_scenario,
    write_jsonl, ParamSet, Report, RunOutput, Scenario, ScenarioConfig,
};

const SESSIONS: u64 = 100;
const HONEST_RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const DESK_BILINEARITY_CHECKS: usize = 1000;
const TAMPERS_PER_FIELD: u32 = 50;
const TAMPER_SESSIONS: u64 = 2;
const SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cfg(scenario: Scenario, param_set: ParamSet, sessions: u64) -> ScenarioConfig {
    ScenarioConfig {
        scenario,
        param_set,
        seed: SEED,
        sessions,
        ..Default::default()
    }
}

fn run(c: &ScenarioConfig) -> RunOutput {
    run_scenario(c).expect("scenario runs")
}

fn count(
    report: &Report,
    name: &str,
    pred: impl Fn(&tmis_core::harness::AttackResult) -> bool,
) -> usize {
    report
        .sessions
        .iter()
        .filter(|s| {
            s.attack_results
                .iter()
                .any(|a| a.attack_name == name && pred(a))
        })
        .count()
}

/// Runs the honest DESK scenario through the CLI binary.
fn protocol_correctness() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args([
            "run",
            "--scenario",
            "honest",
            "--params",
            "desk",
            "--format",
            "json",
        ])
        .args([
            "--sessions",
            &SESSIONS.to_string(),
            "--seed",
            &SEED.to_string(),
        ])
        .output()
        .expect("workbench binary runs");
    let elapsed = start.elapsed();
    let report: Report = serde_json::from_slice(&out.stdout).expect("JSON report");
    let exact = report
        .sessions
        .iter()
        .filter(|s| s.sk_patient_hex.is_some() && s.sk_patient_hex == s.sk_server_hex)
        .count();
    check(
        out.status.success()
            && report.summary.agreements == SESSIONS
            && exact as u64 == SESSIONS
            && elapsed < HONEST_RUNTIME_LIMIT,
        format!(
            "desk: {}/{SESSIONS} agreements, {exact} byte-equal keys, {:.1}s (limit {}s)",
            report.summary.agreements,
            elapsed.as_secs_f64(),
            HONEST_RUNTIME_LIMIT.as_secs()
        ),
    )
}

fn kssti_reproduction() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for set in [ParamSet::Test, ParamSet::Desk] {
        let out = run(&cfg(Scenario::Kssti, set, SESSIONS));
        let hits = count(&out.report, "kssti", |a| a.matches);
        let control = count(&out.report, "kssti_wrong_leak", |a| a.matches);
        pass &= hits as u64 == SESSIONS && control == 0 && out.report.passed();
        details.push(format!(
            "{}: {hits}/{SESSIONS} recovered, control {control}",
            set.label()
        ));
    }

    // Every wrong r_s on the toy group must miss.
    let params = CurveParams::test();
    let out = run(&cfg(Scenario::Kssti, ParamSet::Test, SESSIONS));
    let mut wrong_hits = 0;
    let mut wrong_tries = 0;
    for (t, leak) in out.transcripts.iter().zip(&out.leaks) {
        let transcript = t.to_transcript(&params).expect("valid transcript");
        let true_r_s = hex::decode(leak.r_s.as_ref().unwrap()).unwrap();
        for k in 0..11u64 {
            let r_s = params.scalar_from_u64(k);
            if r_s.to_bytes(params.scalar_width()) == true_r_s {
                continue;
            }
            wrong_tries += 1;
            if let Ok(o) = kssti_attack(&transcript, &LeakedEphemeral { r_s }, &params) {
                wrong_hits += (o.recovered_sk.to_hex() == leak.truth.sk_server) as usize;
            }
        }
    }
    pass &= wrong_hits == 0 && wrong_tries == SESSIONS as usize * 10;
    details.push(format!(
        "test exhaustive wrong r_s: {wrong_hits}/{wrong_tries} recovered"
    ));
    check(pass, details.join("; "))
}

fn pfs_reproduction() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for set in [ParamSet::Test, ParamSet::Desk] {
        let out = run(&cfg(Scenario::Pfs, set, SESSIONS));
        let r = &out.report;
        let sk = count(r, "pfs", |a| a.matches);
        let id = count(r, "pfs", |a| a.id_matches == Some(true));
        let r_i = count(r, "pfs", |a| a.r_i_consistent == Some(true));
        let decrypt_fail = count(r, "pfs_wrong_key", |a| {
            a.error.as_deref() == Some("DecryptFailure")
        });
        pass &= [sk, id, r_i, decrypt_fail]
            .iter()
            .all(|&n| n as u64 == SESSIONS)
            && r.passed();
        details.push(format!(
            "{}: SK {sk}, ID {id}, r_i {r_i}, wrong-key DecryptFailure {decrypt_fail} (of {SESSIONS})",
            set.label()
        ));
    }
    check(pass, details.join("; "))
}

fn l_identity() -> Outcome {
    let c = ScenarioConfig {
        tampers_per_field: 1,
        ..cfg(Scenario::All, ParamSet::Test, SESSIONS)
    };
    let out = run(&c);
    let ok = out
        .report
        .sessions
        .iter()
        .filter(|s| {
            let honest = s.l_server_hex.as_ref();
            let attacks: Vec<_> = s.attack_results.iter().filter(|a| !a.control).collect();
            honest.is_some()
                && s.l_patient_hex.as_ref() == honest
                && attacks.len() == 2
                && attacks
                    .iter()
                    .all(|a| a.l_matches && a.recovered_l_hex.as_ref() == honest)
        })
        .count();
    check(
        ok as u64 == SESSIONS,
        format!("{ok}/{SESSIONS} sessions with L_kssti = L_pfs = L_i = L_s"),
    )
}

fn pairing_soundness() -> Outcome {
    let t = CurveParams::test();
    let g = t.generator();
    let pts: Vec<_> = (0..11u64).map(|k| g.mul_uint(&BigUint::from(k))).collect();
    let base = pairing(&g, &g).unwrap();
    let base_f2 = to_f2(&base);
    let non_degenerate = !base.is_identity();

    let mut powers: Vec<F2> = vec![(1, 0)];
    for _ in 1..121 {
        powers.push(f2_mul(*powers.last().unwrap(), base_f2));
    }
    let exact_order = powers[11] == (1, 0) && (1..11).all(|k| powers[k] != (1, 0));

    let (mut bilinear, mut symmetric, mut oracle, mut reference) = (0, 0, 0, 0);
    for a in 0..11usize {
        for b in 0..11usize {
            let e = pairing(&pts[a], &pts[b]).unwrap();
            bilinear += (e == base.pow_uint(&BigUint::from(a * b))) as usize;
            symmetric += (e == pairing(&pts[b], &pts[a]).unwrap()) as usize;
            oracle += (to_f2(&e) == powers[a * b]) as usize;
            reference += (to_f2(&e) == reference_pairing(to_pt(&pts[a]), to_pt(&pts[b]))) as usize;
        }
    }

    let d = CurveParams::desk();
    let dg = d.generator();
    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    let mut desk_ok = 0;
    for _ in 0..DESK_BILINEARITY_CHECKS {
        let x = dg.mul(&d.random_nonzero_scalar(&mut rng));
        let y = dg.mul(&d.random_nonzero_scalar(&mut rng));
        let a = d.random_nonzero_scalar(&mut rng);
        let b = d.random_nonzero_scalar(&mut rng);
        let lhs = pairing(&x.mul(&a), &y.mul(&b)).unwrap();
        let rhs = pairing(&x, &y).unwrap().pow(&d.scalar_mul(&a, &b));
        desk_ok += (lhs == rhs && !lhs.is_identity()) as usize;
    }

    check(
        non_degenerate
            && exact_order
            && [bilinear, symmetric, oracle, reference].iter().all(|&n| n == 121)
            && desk_ok == DESK_BILINEARITY_CHECKS,
        format!(
            "test: bilinear {bilinear}/121, symmetric {symmetric}/121, gt-power oracle {oracle}/121, \
             reference Miller {reference}/121, non-degenerate {non_degenerate}; desk random bilinear {desk_ok}/{DESK_BILINEARITY_CHECKS}"
        ),
    )
}

/// Run on DESK: with q = 11 a forged `Auth_s` matches by chance about once in 11.
fn tamper_suite() -> Outcome {
    let c = ScenarioConfig {
        tampers_per_field: TAMPERS_PER_FIELD,
        ..cfg(Scenario::Tamper, ParamSet::Desk, TAMPER_SESSIONS)
    };
    let out = run(&c);
    let s = &out.report.summary;
    let results: Vec<_> = out
        .report
        .sessions
        .iter()
        .flat_map(|r| &r.tamper_results)
        .collect();
    let accepted: u32 = results.iter().map(|t| t.accepted).sum();
    let per_field_ok = results.iter().all(|t| t.trials >= TAMPERS_PER_FIELD);
    check(
        out.report.passed()
            && accepted == 0
            && s.tamper_unexpected == 0
            && per_field_ok
            && !results.is_empty(),
        format!(
            "desk: {}/{} rejected over {} fields, {accepted} accepted, {} unexpected reasons",
            s.tamper_rejected,
            s.tamper_trials,
            results.len() as u64 / TAMPER_SESSIONS,
            s.tamper_unexpected
        ),
    )
}

fn determinism() -> Outcome {
    let c = ScenarioConfig {
        tampers_per_field: 2,
        ..cfg(Scenario::All, ParamSet::Test, 20)
    };
    let a = run(&c).report.to_json();
    let b = run(&c).report.to_json();
    let reports_equal = a == b;

    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.jsonl");
    let second = dir.path().join("second.jsonl");
    export_transcripts(&c, &first).unwrap();
    export_transcripts(&c, &second).unwrap();
    let read = |p: &std::path::Path| std::fs::read(p).unwrap();
    let exports_equal = read(&first) == read(&second)
        && read(&leaks_path_for(&first)) == read(&leaks_path_for(&second));

    let rewritten = dir.path().join("rewritten.jsonl");
    write_jsonl(&rewritten, &read_transcripts(&first).unwrap()).unwrap();
    let round_trip = read(&first) == read(&rewritten);

    let r1 = replay_attacks(&first, &leaks_path_for(&first)).unwrap();
    let r2 = replay_attacks(&second, &leaks_path_for(&second)).unwrap();
    let replay_equal = r1.to_json() == r2.to_json() && r1.passed();

    check(
        reports_equal && exports_equal && round_trip && replay_equal,
        format!(
            "reports identical {reports_equal}, exports identical {exports_equal}, \
             read/write round trip {round_trip}, replays identical {replay_equal}"
        ),
    )
}

fn k_agreement() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for set in [ParamSet::Test, ParamSet::Desk] {
        let out = run(&cfg(Scenario::Honest, set, SESSIONS));
        let k = out.report.summary.k_agreements;
        pass &= k == SESSIONS;
        details.push(format!("{}: {k}/{SESSIONS}", set.label()));
    }
    check(pass, details.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 protocol correctness", protocol_correctness),
        ("2 kssti reproduction", kssti_reproduction),
        ("3 pfs break reproduction", pfs_reproduction),
        ("4 L identity", l_identity),
        ("5 pairing soundness", pairing_soundness),
        ("6 tamper suite", tamper_suite),
        ("7 determinism", determinism),
        ("8 K agreement", k_agreement),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let start = Instant::now();
        let o = criterion();
        failed += !o.pass as usize;
        println!(
            "[{}] {name:<26} {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
