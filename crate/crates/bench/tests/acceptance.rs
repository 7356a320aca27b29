//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use fdefln::analysis::{op_counts, Algorithm, OpCounts, PhaseCount};
use fdefln::expansion::{efln_derivative, efln_expand};
use fdefln::scenarios::{ScenarioKind, IDENT_FACTOR};
use fdefln::{
    AdaptConfig, BlockEflnTd, BlockEfslmsTd, ExpansionConfig, Fdefln, Fdefslms, FirCoefficients,
    SecondaryPath, SeededRng, Transform,
};
use fdefln_bench::counts::instrumented_counts;
use fdefln_bench::{emse_sweep, run_experiment, time_per_block, AlgoKind, AlgoSpec, RunConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_config(rng: &mut SeededRng) -> (usize, usize, f64, f64, f64) {
    let pick =
        |rng: &mut SeededRng, n: usize| ((rng.uniform(0.0, 1.0) * n as f64) as usize).min(n - 1);
    let m = [4, 8, 16, 64][pick(rng, 4)];
    let p = 1 + pick(rng, 3);
    let c = (2 * p + 1) as f64;
    let mu_w = rng.uniform(0.05, 0.5) / (m as f64 * c);
    let mu_q = rng.uniform(1e-3, 5e-2);
    let q0 = rng.uniform(-0.5, 0.5);
    (m, p, mu_w, mu_q, q0)
}

fn criterion_1() -> Outcome {
    let mut rng = SeededRng::new(0xC1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (m, p, mu_w, mu_q, q0) = random_config(&mut rng);
        let cfg = AdaptConfig::new(m, ExpansionConfig::efln(p).unwrap(), mu_w, mu_q).with_q0(q0);
        let mut fd = Fdefln::new(cfg).unwrap();
        let mut td = BlockEflnTd::new(cfg).unwrap();
        for _ in 0..200 {
            let u = rng.uniform_vec(-1.0, 1.0, m);
            let d: Vec<f64> = u
                .iter()
                .map(|x| (2.0 * x).sin() + 0.1 * rng.gaussian())
                .collect();
            let a = fd.process(&u, &d).unwrap();
            let b = td.step(&u, &d).unwrap();
            worst = worst
                .max(max_diff(&a.y, &b.y))
                .max(max_diff(&a.e, &b.e))
                .max(max_diff(&fd.weights_time().unwrap(), td.weights()))
                .max((fd.factor() - td.factor()).abs());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("20 configs x 200 blocks, max |FD - TD| = {worst:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = SeededRng::new(0xC2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (m, p, mu_w, mu_q, q0) = random_config(&mut rng);
        let n = 1 + ((rng.uniform(0.0, 1.0) * m as f64) as usize).min(m - 1);
        let taps = FirCoefficients::new(rng.uniform_vec(-1.0, 1.0, n)).unwrap();
        let path = SecondaryPath::new(taps, m).unwrap();
        let cfg = AdaptConfig::new(
            m,
            ExpansionConfig::efln(p).unwrap(),
            mu_w / n as f64,
            mu_q / n as f64,
        )
        .with_q0(q0);
        let mut fd = Fdefslms::new(cfg).unwrap();
        let mut td = BlockEfslmsTd::new(cfg).unwrap();
        for _ in 0..200 {
            let u = rng.uniform_vec(-1.0, 1.0, m);
            let d = rng.uniform_vec(-1.0, 1.0, m);
            let a = fd.step(&path, &u, &d).unwrap();
            let b = td.step(&path, &u, &d).unwrap();
            worst = worst
                .max(max_diff(&a.y, &b.y))
                .max(max_diff(&a.e, &b.e))
                .max(max_diff(&fd.weights_time().unwrap(), td.weights()))
                .max((fd.factor() - td.factor()).abs());
        }
    }

    let mut identity_worst = 0.0f64;
    for &(m, p) in &[(4, 1), (16, 2), (64, 3)] {
        let cfg = AdaptConfig::new(
            m,
            ExpansionConfig::efln(p).unwrap(),
            0.2 / (m * (2 * p + 1)) as f64,
            0.02,
        );
        let path = SecondaryPath::identity(m).unwrap();
        let mut anc = Fdefslms::new(cfg).unwrap();
        let mut plain = Fdefln::new(cfg).unwrap();
        for _ in 0..200 {
            let u = rng.uniform_vec(-1.0, 1.0, m);
            let d = rng.uniform_vec(-1.0, 1.0, m);
            let a = anc.step(&path, &u, &d).unwrap();
            let b = plain.process(&u, &d).unwrap();
            identity_worst = identity_worst
                .max(max_diff(&a.y, &b.y))
                .max(max_diff(&a.e, &b.e))
                .max((anc.factor() - plain.factor()).abs());
        }
        identity_worst = identity_worst.max(max_diff(
            &anc.weights_time().unwrap(),
            &plain.weights_time().unwrap(),
        ));
    }
    outcome(
        worst <= 1e-9 && identity_worst <= 1e-12,
        format!(
            "filtered-s max |FD - TD| = {worst:.2e}, identity path vs plain = {identity_worst:.2e}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut cfg = RunConfig::new(ScenarioKind::IdentEfln);
    cfg.scenario.blocks = 2000;
    cfg.scenario.mu_w = 2e-3;
    cfg.scenario.mu_q = 5e-3;
    let report = run_experiment(&cfg).unwrap();
    let curves = &report.curves[0];
    let q_hat = curves.trials[0].q.last().copied().flatten().unwrap();
    let steady = curves.mean_mse_db(1800..2000);
    let noise_var = cfg.scenario.trial_signals(0).unwrap().noise_var;
    let floor = 10.0 * noise_var.log10();
    let q_err = (q_hat - IDENT_FACTOR).abs();
    let gap = steady - floor;
    outcome(
        q_err <= 0.02 && gap.abs() <= 3.0,
        format!("q = {q_hat:.4} (|err| {q_err:.4}), steady MSE {steady:.2} dB vs floor {floor:.2} dB (gap {gap:.2} dB)"),
    )
}

fn criterion_4() -> Outcome {
    let mut cfg = RunConfig::new(ScenarioKind::IdentEfln);
    cfg.scenario.input = fdefln::scenarios::InputSignal::Gaussian;
    cfg.scenario.trials = 20;
    cfg.mu_grid = vec![1e-4, 2e-4, 5e-4, 1e-3, 2e-3];
    cfg.steady_blocks = 50;
    let rows = emse_sweep(&cfg).unwrap();
    let mut worst = 0.0f64;
    let mut pass = rows.len() == cfg.mu_grid.len();
    for r in &rows {
        match r.gap_db() {
            Some(g) => worst = worst.max(g),
            None => pass = false,
        }
    }
    let table: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{:.0e}: {:.2}/{:.2}",
                r.mu,
                r.simulated_db,
                r.theoretical_db.unwrap_or(f64::NAN)
            )
        })
        .collect();
    outcome(
        pass && worst <= 1.5,
        format!(
            "max |sim - theory| = {worst:.2} dB over [{}] (sim/theory dB)",
            table.join(", ")
        ),
    )
}

/// Cost table entries per block, written out phase by phase. The time-domain
/// algorithms are quoted per sample and scaled by `M` here.
fn table(algo: Algorithm, m: u64, p: u64, n: u64) -> OpCounts {
    let c = 2 * p + 1;
    let l = u64::from((2 * m).trailing_zeros());
    let pc = PhaseCount::new;
    let per_block = |x: PhaseCount| pc(m * x.multiplications, m * x.additions);
    match algo {
        Algorithm::Efln => OpCounts {
            filtering: per_block(pc(m * c, m * c - 1)),
            error: per_block(pc(0, 1)),
            weight_adaptation: per_block(pc(m * c + 1, m * c)),
            factor_adaptation: per_block(pc(m * c + 2, m * c)),
        },
        Algorithm::Efslms => OpCounts {
            filtering: per_block(pc(m * c, m * c - 1)),
            error: per_block(pc(n, n)),
            weight_adaptation: per_block(pc(m * c * (n + 1) + 1, m * n * c)),
            factor_adaptation: per_block(pc(m * c * (n + 1) + 2, m * n * c)),
        },
        Algorithm::Fdefln => OpCounts {
            filtering: pc((4 * m * l + 8 * m) * c, (4 * m * l + 4 * m) * c + 2 * m * p),
            error: pc(2 * m * l, 2 * m * l + m),
            weight_adaptation: pc((4 * m * l + 10 * m) * c, (4 * m * l + 8 * m) * c),
            factor_adaptation: pc((4 * m * l + 8 * m) * c + m + 1, (4 * m * l + 5 * m) * c),
        },
        Algorithm::Fdefslms => OpCounts {
            filtering: pc((4 * m * l + 8 * m) * c, (4 * m * l + 4 * m) * c + 2 * m * p),
            error: pc(2 * m * l + m * n, 2 * m * l + m * n),
            weight_adaptation: pc((8 * m * l + 18 * m) * c, (8 * m * l + 12 * m) * c),
            factor_adaptation: pc((8 * m * l + 16 * m) * c + m + 1, (8 * m * l + 9 * m) * c),
        },
    }
}

/// Closed-form totals of the cost table.
fn table_total(algo: Algorithm, m: u64, p: u64, n: u64) -> PhaseCount {
    let c = 2 * p + 1;
    let l = u64::from((2 * m).trailing_zeros());
    match algo {
        Algorithm::Efln => PhaseCount::new(3 * m * m * c + 3 * m, 3 * m * m * c),
        Algorithm::Efslms => PhaseCount::new(
            m * m * c * (2 * n + 3) + m * n + 3 * m,
            m * m * c * (2 * n + 1) + m * n - m,
        ),
        Algorithm::Fdefln => PhaseCount::new(
            (12 * m * l + 26 * m) * c + 2 * m * l + m + 1,
            (12 * m * l + 18 * m) * c + 2 * m * l,
        ),
        Algorithm::Fdefslms => PhaseCount::new(
            (20 * m * l + 42 * m) * c + 2 * m * l + m * n + m + 1,
            (20 * m * l + 25 * m) * c + 2 * m * l + 2 * m * p + m * n,
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for m in [4u64, 16, 64, 256] {
        for p in [1u64, 2] {
            for algo in Algorithm::ALL {
                let got = op_counts(algo, m as usize, p as usize, m as usize).unwrap();
                let want = table(algo, m, p, m);
                checked += 1;
                if got != want || got.total() != table_total(algo, m, p, m) {
                    failures.push(format!("{algo} M={m} P={p}"));
                }
            }
        }
    }
    let mut instrumented = Vec::new();
    for algo in [Algorithm::Fdefln, Algorithm::Fdefslms] {
        let measured = instrumented_counts(algo, 16, 1, 16, 4).unwrap().unwrap();
        let want = table(algo, 16, 1, 16).filtering;
        instrumented.push(format!("{algo} {}", measured.filtering.multiplications));
        if measured.filtering.multiplications != want.multiplications {
            failures.push(format!("{algo} instrumented filtering"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checked} closed forms checked, instrumented filtering mults at M=16 P=1: {} (table {}){}",
            instrumented.join(", "),
            table(Algorithm::Fdefln, 16, 1, 16).filtering.multiplications,
            if failures.is_empty() { String::new() } else { format!("; mismatches: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_6() -> Outcome {
    let ratio = |m: usize| {
        let td = op_counts(Algorithm::Efln, m, 2, m)
            .unwrap()
            .total()
            .multiplications;
        let fd = op_counts(Algorithm::Fdefln, m, 2, m)
            .unwrap()
            .total()
            .multiplications;
        (td, fd, td as f64 / fd as f64)
    };
    let (td128, fd128, r128) = ratio(128);
    let (_, _, r256) = ratio(256);
    outcome(
        fd128 < td128 && r256 > r128,
        format!(
            "M=128: EFLN {td128} vs FDEFLN {fd128} mults, ratio {r128:.2}; M=256 ratio {r256:.2}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut cfg = RunConfig::new(ScenarioKind::NancChaotic);
    cfg.scenario.order = 3;
    cfg.scenario.blocks = 2000;
    cfg.scenario.flip_block = Some(1000);
    cfg.scenario.mu_w = 2e-4;
    cfg.scenario.mu_q = 1e-3;
    cfg.algos = vec![AlgoKind::Fdefslms];
    let ef = run_experiment(&cfg).unwrap();
    let ef = ef.curves_for(AlgoKind::Fdefslms).unwrap();
    let pre = ef.mean_mse_db(900..1000);
    let post = ef.mean_mse_db(1900..2000);

    // Linear baseline at the best step size of a grid.
    let mut best = (f64::INFINITY, 0.0);
    for mu in [3e-5, 5e-5, 1e-4, 2e-4, 3e-4] {
        let mut lin = cfg.clone();
        lin.algos = vec![AlgoKind::Fdfxlms];
        lin.scenario.mu_w = mu;
        let report = run_experiment(&lin).unwrap();
        if report.divergence().is_some() {
            continue;
        }
        let fin = report.curves[0].mean_mse_db(1900..2000);
        if fin < best.0 {
            best = (fin, mu);
        }
    }
    let reconverged = post - pre <= 3.0;
    let advantage = best.0 - post;
    outcome(
        reconverged && advantage >= 5.0,
        format!(
            "FDEFsLMS pre-flip {pre:.2} dB, final {post:.2} dB; best FDFxLMS (mu {:.0e}) final {:.2} dB, advantage {advantage:.2} dB",
            best.1, best.0
        ),
    )
}

fn criterion_8() -> Outcome {
    let (m, p) = (256, 2);
    let spec = |kind| AlgoSpec {
        kind,
        mu_w: 1e-5,
        mu_q: 1e-5,
    };
    let td = time_per_block(&spec(AlgoKind::Efln), m, p, 5, 100, 8).unwrap();
    let fd = time_per_block(&spec(AlgoKind::Fdefln), m, p, 5, 100, 8).unwrap();
    outcome(
        fd.median_us < td.median_us,
        format!(
            "M={m} P={p}: FD median {:.1} us, TD median {:.1} us per block",
            fd.median_us, td.median_us
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = SeededRng::new(0xC9);
    let mut notes = Vec::new();
    let mut pass = true;

    let (mut rt, mut parseval) = (0.0f64, 0.0f64);
    for m in [1, 3, 8, 64, 100] {
        let t = Transform::for_block(m).unwrap();
        let x = rng.uniform_vec(-1.0, 1.0, 2 * m);
        let s = t.forward(&x).unwrap();
        rt = rt.max(max_diff(&x, &t.inverse(&s).unwrap()));
        let e: f64 = x.iter().map(|v| v * v).sum();
        parseval = parseval.max((s.energy() - 2.0 * m as f64 * e).abs() / s.energy());
    }
    pass &= rt <= 1e-12 && parseval <= 1e-9;
    notes.push(format!("round trip {rt:.1e}, Parseval rel {parseval:.1e}"));

    let mut fdiff = 0.0f64;
    let delta = 1e-6;
    for p in 1..=3 {
        let u = rng.uniform_vec(-1.0, 1.0, 32);
        let q = rng.uniform(-1.0, 1.0);
        let (hi, lo) = (efln_expand(&u, q + delta, p), efln_expand(&u, q - delta, p));
        let h = efln_derivative(&u, q, p);
        for i in 0..h.count() {
            for n in 0..u.len() {
                let fd = (hi.channel(i)[n] - lo.channel(i)[n]) / (2.0 * delta);
                fdiff = fdiff.max((fd - h.channel(i)[n]).abs());
            }
        }
    }
    pass &= fdiff <= 1e-6;
    notes.push(format!("h vs finite difference {fdiff:.1e}"));

    let cfg = AdaptConfig::new(16, ExpansionConfig::efln(2).unwrap(), 5e-3, 1e-2);
    let mut f = Fdefln::new(cfg).unwrap();
    let mut tail = 0.0f64;
    for _ in 0..500 {
        let u = rng.uniform_vec(-1.0, 1.0, 16);
        let d = rng.uniform_vec(-1.0, 1.0, 16);
        f.process(&u, &d).unwrap();
        tail = tail.max(f.tail_energy_ratio().unwrap());
    }
    pass &= tail < 1e-18;
    notes.push(format!("zero-tail energy {tail:.1e}"));

    let m = 8;
    let cfg = AdaptConfig::new(m, ExpansionConfig::efln(2).unwrap(), 0.0, 0.1).with_q0(0.2);
    let w = rng.uniform_vec(-0.5, 0.5, 5 * m);
    let mut w2 = w.clone();
    for v in &mut w2[..m] {
        *v += rng.uniform(-1.0, 1.0);
    }
    let mut a = Fdefln::new(cfg).unwrap();
    let mut b = Fdefln::new(cfg).unwrap();
    a.set_weights(&w).unwrap();
    b.set_weights(&w2).unwrap();
    let mut q_gap = 0.0f64;
    for _ in 0..20 {
        let u = rng.uniform_vec(-1.0, 1.0, m);
        let d = rng.uniform_vec(-1.0, 1.0, m);
        let ea = a.process(&u, &d).unwrap().e;
        // Give b the desired signal that reproduces a's error.
        let yb = b.clone().process(&u, &d).unwrap().y;
        let db: Vec<f64> = ea.iter().zip(&yb).map(|(e, y)| e + y).collect();
        b.process(&u, &db).unwrap();
        q_gap = q_gap.max((a.factor() - b.factor()).abs());
    }
    pass &= q_gap < 1e-12 && a.factor() != 0.2;
    notes.push(format!(
        "q gap under linear-channel perturbation {q_gap:.1e}"
    ));

    outcome(pass, notes.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", criterion_1),
        ("filtered-s oracle equivalence", criterion_2),
        ("identification recovery", criterion_3),
        ("EMSE theory vs simulation", criterion_4),
        ("complexity regression", criterion_5),
        ("complexity crossover", criterion_6),
        ("tracking after path flip", criterion_7),
        ("relative speed", criterion_8),
        ("numerical properties", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {verdict} {name} ({:.1} s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
