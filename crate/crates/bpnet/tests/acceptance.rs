//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-9 each write their measurements as CSV into a run directory.
//! Criterion 10 repeats 1-9 into a second directory and compares every file
//! byte for byte. The process fails unless every failing check is listed in
//! `KNOWN_UNATTAINABLE`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bpnet::commands::{eval, preprocess, synth, train_command, EvalArgs, PreprocessArgs, SynthArgs, TrainArgs};
use bpnet::config::{DataConfig, RunConfig};
use bpnet::report::BHS_FILE;
use bpnet_core::dataset::{synth_subject_with, SplitSpec, SynthOptions, TargetScaling};
use bpnet_core::metrics::{
    aami_check, bhs_grade, bland_altman, error_stats, pearson_r, AamiFailure, BhsGrade, ErrorStats,
};
use bpnet_core::model::{build_bpnet, receptive_field_total, ModelConfig};
use bpnet_core::nn::{finite_difference_check, ComputeGraph, Mode, ParamStore, Tensor};
use bpnet_core::signal::{
    denoise_ecg, dwt_decompose, idwt_reconstruct, mu_law, mu_law_inverse, SignalVector, WaveletFilterBank,
};
use bpnet_core::train::{lr_at_epoch, LossKind, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Criterion 1.
const GRAD_STEP: f64 = 1e-5;
const GRAD_FLOOR: f64 = 1e-6;
const GRAD_TOLERANCE: f64 = 1e-4;
// Criterion 2.
const DEFAULT_RECEPTIVE_FIELD: usize = 505;
// Criterion 3.
const CAUSALITY_SEEDS: u64 = 20;
const CAUSALITY_LEN: usize = 600;
// Criterion 4.
const DWT_CASES: usize = 100;
const DWT_RELATIVE_TOLERANCE: f64 = 1e-8;
// Criterion 5.
const NOTCH_MIN_DB: f64 = 40.0;
const DRIFT_MIN_DB: f64 = 20.0;
const R_PEAK_SLACK: usize = 1;
// Criterion 6.
const LR_EPOCHS: usize = 300;
const LR_RELATIVE_TOLERANCE: f64 = 1e-12;
const CYCLE_RATIO: f64 = 0.9;
// Criterion 7.
const MU_POINTS: usize = 100_000;
const MU_ROUND_TRIP_TOLERANCE: f64 = 1e-12;
const MU_HALF_EXPECTED: f64 = 0.87574;
const MU_HALF_TOLERANCE: f64 = 1e-5;
// Criterion 8.
const METRIC_CASES: usize = 1000;
const METRIC_TOLERANCE: f64 = 1e-12;
// Criterion 9.
const E2E_SUBJECTS: usize = 8;
const E2E_DURATION_S: f64 = 300.0;
const E2E_MAX_EPOCHS: usize = 40;
const E2E_DBP_MAE_LIMIT: f64 = 5.0;
const E2E_SBP_MAE_LIMIT: f64 = 8.0;

/// Checks that cannot pass as written; see the note printed with them.
const KNOWN_UNATTAINABLE: &[(u8, &str, &str)] = &[(
    7,
    "F(0.5, 255) within 1e-5 of 0.87574",
    "ln(1 + 127.5) / ln(256) = 0.8757031..., which is 3.7e-5 from 0.87574",
)];

#[derive(Debug, Clone)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u8,
    title: &'static str,
    limit_s: f64,
    run: fn(&Path) -> Vec<Check>,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, title: "gradient correctness", limit_s: 60.0, run: gradient_correctness },
    Criterion { id: 2, title: "receptive field", limit_s: 30.0, run: receptive_field },
    Criterion { id: 3, title: "causality", limit_s: 60.0, run: causality },
    Criterion { id: 4, title: "DWT round trip", limit_s: 10.0, run: dwt_round_trip },
    Criterion { id: 5, title: "denoising efficacy", limit_s: 10.0, run: denoising },
    Criterion { id: 6, title: "learning-rate schedule", limit_s: 1.0, run: lr_schedule },
    Criterion { id: 7, title: "mu-law companding", limit_s: 1.0, run: mu_law_checks },
    Criterion { id: 8, title: "metrics oracles", limit_s: 10.0, run: metrics_oracles },
    Criterion { id: 9, title: "end-to-end synthetic learning", limit_s: 900.0, run: end_to_end },
];

fn write_csv(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).expect("criterion output is writable");
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: [usize; 3]) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn gradient_correctness(dir: &Path) -> Vec<Check> {
    let config = ModelConfig {
        kernel_size: 3,
        dilations: vec![1, 2],
        block_channels: vec![4, 4],
        input_stem_channels: 4,
        head_channels: 8,
        ..ModelConfig::default()
    };
    let model = build_bpnet(&config, 101).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let ecg = random_tensor(&mut rng, [1, 1, 64]);
    let ppg = random_tensor(&mut rng, [1, 1, 64]);
    let target = random_tensor(&mut rng, [1, 2, 64]).map(|v| 0.5 + 0.4 * v);
    let loss_of = |p: &ParamStore, want: bool| {
        let mut g = ComputeGraph::new(p, Mode::Train { seed: 103 });
        let e = g.input(ecg.clone()).unwrap();
        let q = g.input(ppg.clone()).unwrap();
        let t = g.input(target.clone()).unwrap();
        let y = model.forward(&mut g, e, q).unwrap();
        let l = g.mse(y, t).unwrap();
        (g.value(l).data()[0], want.then(|| g.backward(l).unwrap()))
    };
    let grads = loss_of(&model.params, true).1.unwrap();
    let report =
        finite_difference_check(&model.params, &grads, GRAD_STEP, GRAD_FLOOR, |p| Ok(loss_of(p, false).0)).unwrap();
    write_csv(
        dir,
        "c1_gradients.csv",
        &format!(
            "checked,max_relative_error,worst_param,worst_index,analytic,numeric\n{},{},{},{},{},{}\n",
            report.checked, report.max_relative_error, report.worst_param, report.worst_index, report.analytic, report.numeric
        ),
    );
    vec![
        check(
            "every parameter checked",
            report.checked == model.parameter_count(),
            format!("{} of {}", report.checked, model.parameter_count()),
        ),
        check(
            "max relative error < 1e-4",
            report.max_relative_error < GRAD_TOLERANCE,
            format!("max relative error {:.2e} at {}[{}]", report.max_relative_error, report.worst_param, report.worst_index),
        ),
    ]
}

/// Output indices (any channel) that move when `channel` is bumped at `at`.
fn affected_outputs(
    model: &bpnet_core::model::BPNetModel,
    ecg: &Tensor,
    ppg: &Tensor,
    channel: usize,
    at: usize,
) -> Vec<usize> {
    let base = model.infer(ecg, ppg).unwrap();
    let (mut e, mut p) = (ecg.clone(), ppg.clone());
    let bumped = if channel == 0 { &mut e } else { &mut p };
    bumped.row_mut(0, 0)[at] += 0.5;
    let moved = model.infer(&e, &p).unwrap();
    let t = base.shape()[2];
    (0..t)
        .filter(|&i| (0..2).any(|c| base.row(0, c)[i].to_bits() != moved.row(0, c)[i].to_bits()))
        .collect()
}

fn receptive_field(dir: &Path) -> Vec<Check> {
    let config = ModelConfig::default();
    let analytic = receptive_field_total(&config);
    let model = build_bpnet(&config, 201).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let t = 1200;
    let at = 400;
    let ecg = random_tensor(&mut rng, [1, 1, t]);
    let ppg = random_tensor(&mut rng, [1, 1, t]);
    let mut csv = String::from("channel,first_affected,last_affected,affected,span\n");
    let mut checks = vec![check(
        "analytic receptive field is 505",
        analytic == DEFAULT_RECEPTIVE_FIELD && model.receptive_field() == analytic,
        format!("analytic {analytic}, model {}", model.receptive_field()),
    )];
    for (channel, name) in [(0, "ecg"), (1, "ppg")] {
        let hit = affected_outputs(&model, &ecg, &ppg, channel, at);
        let (first, last) = (hit[0], *hit.last().unwrap());
        let span = last - first + 1;
        let _ = writeln!(csv, "{name},{first},{last},{},{span}", hit.len());
        checks.push(check(
            format!("{name} probe spans exactly the receptive field"),
            first == at && span == analytic && hit.len() == span,
            format!("{name}: outputs {first}..={last} move ({} of span {span})", hit.len()),
        ));
    }
    write_csv(dir, "c2_receptive_field.csv", &csv);
    checks
}

fn causality(dir: &Path) -> Vec<Check> {
    let config = ModelConfig::default();
    let mut csv = String::from("seed,t,prefix_identical,output_at_t_moved\n");
    let mut all_identical = true;
    let mut all_moved = true;
    for seed in 0..CAUSALITY_SEEDS {
        let model = build_bpnet(&config, 300 + seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
        let ecg = random_tensor(&mut rng, [1, 1, CAUSALITY_LEN]);
        let ppg = random_tensor(&mut rng, [1, 1, CAUSALITY_LEN]);
        let t = rng.random_range(1..CAUSALITY_LEN);
        let base = model.infer(&ecg, &ppg).unwrap();
        // Replace every input sample from t onward.
        let (mut e2, mut p2) = (ecg.clone(), ppg.clone());
        for v in &mut e2.row_mut(0, 0)[t..] {
            *v = rng.random_range(-1.0..1.0);
        }
        for v in &mut p2.row_mut(0, 0)[t..] {
            *v = rng.random_range(-1.0..1.0);
        }
        let moved = model.infer(&e2, &p2).unwrap();
        let identical = (0..2).all(|c| {
            base.row(0, c)[..t].iter().zip(&moved.row(0, c)[..t]).all(|(a, b)| a.to_bits() == b.to_bits())
        });
        let changed = (0..2).any(|c| base.row(0, c)[t] != moved.row(0, c)[t]);
        all_identical &= identical;
        all_moved &= changed;
        let _ = writeln!(csv, "{seed},{t},{identical},{changed}");
    }
    write_csv(dir, "c3_causality.csv", &csv);
    vec![
        check(
            "outputs before t bit-identical for 20 seeds",
            all_identical,
            format!("{CAUSALITY_SEEDS} seeds, T = {CAUSALITY_LEN}"),
        ),
        check("output at t responds (probe is live)", all_moved, String::new()),
    ]
}

fn dwt_round_trip(dir: &Path) -> Vec<Check> {
    let bank = WaveletFilterBank::bior6_8();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut csv = String::from("case,len,scale,max_error_over_max_abs\n");
    let mut worst: f64 = 0.0;
    for case in 0..DWT_CASES {
        let len = rng.random_range(1024..=8192);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let x: Vec<f64> = (0..len).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = SignalVector::new(1000.0, x.clone()).unwrap();
        let y = idwt_reconstruct(&dwt_decompose(&s, &bank).unwrap(), &bank).unwrap();
        assert_eq!(y.len(), len);
        let err = x.iter().zip(y.samples()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        let ratio = err / peak;
        worst = worst.max(ratio);
        let _ = writeln!(csv, "{case},{len},{scale},{ratio}");
    }
    write_csv(dir, "c4_dwt.csv", &csv);
    vec![check(
        "max |idwt(dwt(x)) - x| < 1e-8 max|x|",
        worst < DWT_RELATIVE_TOLERANCE,
        format!("worst ratio {worst:.2e} over {DWT_CASES} signals"),
    )]
}

/// Amplitude of the `freq` component under a Hann window.
fn tone_amplitude(x: &[f64], fs: f64, freq: f64) -> f64 {
    use std::f64::consts::PI;
    let n = x.len();
    let (mut re, mut im, mut wsum) = (0.0, 0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        let ph = 2.0 * PI * freq * i as f64 / fs;
        re += w * v * ph.cos();
        im -= w * v * ph.sin();
        wsum += w;
    }
    2.0 * (re * re + im * im).sqrt() / wsum
}

fn denoising(dir: &Path) -> Vec<Check> {
    let fs_hz = 125.0;
    let opts = SynthOptions {
        mains_amplitude: 0.3,
        drift_amplitude: 0.5,
        sensor_noise: 0.0,
        ..SynthOptions::default()
    };
    let s = synth_subject_with(4, 60.0, 1.1, &opts).unwrap();
    let noisy = s.record.ecg();
    let out = denoise_ecg(noisy).unwrap();
    let atten = |f: f64| -20.0 * (tone_amplitude(out.samples(), fs_hz, f) / tone_amplitude(noisy.samples(), fs_hz, f)).log10();
    let (notch, drift) = (atten(opts.mains_hz), atten(opts.drift_hz));

    let x = out.samples();
    let found: Vec<usize> = (1..x.len() - 1).filter(|&i| x[i] > 0.4 && x[i] >= x[i - 1] && x[i] > x[i + 1]).collect();
    let expected: Vec<usize> = s
        .beats
        .iter()
        .map(|b| (b.r_peak_s * fs_hz).round() as usize)
        .filter(|&i| i > 10 && i + 10 < x.len())
        .collect();
    let max_shift = found.iter().zip(&expected).map(|(f, e)| f.abs_diff(*e)).max().unwrap_or(usize::MAX);
    write_csv(
        dir,
        "c5_denoise.csv",
        &format!(
            "notch_attenuation_db,drift_attenuation_db,r_peaks_expected,r_peaks_found,max_shift_samples\n{notch},{drift},{},{},{max_shift}\n",
            expected.len(),
            found.len()
        ),
    );
    vec![
        check("60 Hz attenuation >= 40 dB", notch >= NOTCH_MIN_DB, format!("{notch:.1} dB")),
        check("0.2 Hz drift attenuation >= 20 dB", drift >= DRIFT_MIN_DB, format!("{drift:.1} dB")),
        check(
            "R peaks preserved within 1 sample",
            found.len() == expected.len() && max_shift <= R_PEAK_SLACK,
            format!("{} of {} peaks, max shift {max_shift}", found.len(), expected.len()),
        ),
    ]
}

fn lr_schedule(dir: &Path) -> Vec<Check> {
    let config = TrainConfig::default();
    // Closed form: each cycle starts at 0.9 of the last and halves every 20 epochs.
    let oracle = |e: usize| {
        let cycle = (e / config.cycle_len_epochs) as i32;
        let halvings = ((e % config.cycle_len_epochs) / config.halving_period_epochs) as i32;
        config.base_lr * CYCLE_RATIO.powi(cycle) * 0.5f64.powi(halvings)
    };
    let mut csv = String::from("epoch,lr,closed_form\n");
    let mut worst: f64 = 0.0;
    for e in 0..LR_EPOCHS {
        let (got, want) = (lr_at_epoch(e, &config), oracle(e));
        worst = worst.max((got - want).abs() / want);
        let _ = writeln!(csv, "{e},{got},{want}");
    }
    write_csv(dir, "c6_lr.csv", &csv);
    let r1 = lr_at_epoch(100, &config) / lr_at_epoch(0, &config);
    let r2 = lr_at_epoch(200, &config) / lr_at_epoch(100, &config);
    vec![
        check(
            "trace matches closed form over 300 epochs",
            worst <= LR_RELATIVE_TOLERANCE,
            format!("worst relative deviation {worst:.1e}"),
        ),
        check(
            "cycle-start ratio exactly 0.9",
            r1 == CYCLE_RATIO && r2 == CYCLE_RATIO,
            format!("lr(100)/lr(0) = {r1}, lr(200)/lr(100) = {r2}"),
        ),
    ]
}

fn mu_law_checks(dir: &Path) -> Vec<Check> {
    let mut worst: f64 = 0.0;
    for k in 0..MU_POINTS {
        let x = -1.0 + 2.0 * k as f64 / (MU_POINTS - 1) as f64;
        let back = mu_law_inverse(mu_law(x, 255.0).unwrap(), 255.0).unwrap();
        worst = worst.max((back - x).abs());
    }
    let half = mu_law(0.5, 255.0).unwrap();
    write_csv(dir, "c7_mu_law.csv", &format!("max_round_trip_error,f_half_255\n{worst},{half}\n"));
    vec![
        check(
            "round trip error < 1e-12 over 1e5 points",
            worst < MU_ROUND_TRIP_TOLERANCE,
            format!("max error {worst:.1e}"),
        ),
        check(
            "F(0.5, 255) within 1e-5 of 0.87574",
            (half - MU_HALF_EXPECTED).abs() <= MU_HALF_TOLERANCE,
            format!("F(0.5, 255) = {half:.7}"),
        ),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= METRIC_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

fn metrics_oracles(dir: &Path) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut mismatches = Vec::new();
    let mut csv = String::from("case,n,me,sde,rmse,mae,pct5,pct10,pct15,loa_low,loa_high,pearson\n");
    for case in 0..METRIC_CASES {
        let n = rng.random_range(2..200);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(60.0..180.0)).collect();
        let e: Vec<f64> = r.iter().map(|v| v + rng.random_range(-20.0..20.0)).collect();
        // Brute force, two-pass, written without the library.
        let nf = n as f64;
        let d: Vec<f64> = e.iter().zip(&r).map(|(a, b)| a - b).collect();
        let me = d.iter().sum::<f64>() / nf;
        let sde = (d.iter().map(|v| (v - me) * (v - me)).sum::<f64>() / (nf - 1.0)).sqrt();
        let rmse = (d.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
        let mae = d.iter().map(|v| v.abs()).sum::<f64>() / nf;
        let within = |t: f64| 100.0 * d.iter().filter(|v| v.abs() <= t).count() as f64 / nf;
        let (mr, mest) = (r.iter().sum::<f64>() / nf, e.iter().sum::<f64>() / nf);
        let cov: f64 = r.iter().zip(&e).map(|(a, b)| (a - mr) * (b - mest)).sum();
        let vr: f64 = r.iter().map(|a| (a - mr) * (a - mr)).sum();
        let ve: f64 = e.iter().map(|b| (b - mest) * (b - mest)).sum();
        let pearson = cov / (vr.sqrt() * ve.sqrt());

        let s = error_stats(&r, &e).unwrap();
        let b = bhs_grade(&d).unwrap();
        let (ba, _) = bland_altman(&r, &e).unwrap();
        let p = pearson_r(&r, &e).unwrap();
        let ok = close(s.me, me)
            && close(s.sde, sde)
            && close(s.rmse, rmse)
            && close(s.mae, mae)
            && [b.pct_within_5, b.pct_within_10, b.pct_within_15] == [within(5.0), within(10.0), within(15.0)]
            && close(ba.loa_low, me - 1.96 * sde)
            && close(ba.loa_high, me + 1.96 * sde)
            && close(p, pearson);
        if !ok {
            mismatches.push(case);
        }
        let _ = writeln!(
            csv,
            "{case},{n},{},{},{},{},{},{},{},{},{},{}",
            s.me, s.sde, s.rmse, s.mae, b.pct_within_5, b.pct_within_10, b.pct_within_15, ba.loa_low, ba.loa_high, p
        );
    }
    write_csv(dir, "c8_metrics.csv", &csv);

    let stats = |me: f64, sde: f64| ErrorStats { me, sde, rmse: 0.0, mae: 0.0, n: 1000 };
    let pass = aami_check(&stats(0.0, 1.0), 104);
    let me_fail = aami_check(&stats(6.0, 1.0), 104);
    let pop_fail = aami_check(&stats(0.0, 1.0), 50);
    let aami_ok = pass.pass
        && pass.failures.is_empty()
        && !me_fail.pass
        && matches!(me_fail.failures[..], [AamiFailure::MeanError { .. }])
        && !pop_fail.pass
        && matches!(pop_fail.failures[..], [AamiFailure::Population { n_subjects: 50 }]);

    // 94 of 100 errors within 5 mmHg, the rest within 10.
    let headline: Vec<f64> = (0..100).map(|i| if i < 94 { 4.0 } else { 9.0 }).collect();
    let h = bhs_grade(&headline).unwrap();
    let bhs_ok = h.grade == BhsGrade::A
        && h.pct_within_5 == 94.0
        && bhs_grade(&[20.0; 10]).unwrap().grade == BhsGrade::D
        && bhs_grade(&[0.0; 10]).unwrap().pct_within_5 == 100.0;

    vec![
        check(
            "1000 random cases match brute force within 1e-12",
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{METRIC_CASES} cases agree")
            } else {
                format!("{} mismatching cases, first {:?}", mismatches.len(), &mismatches[..mismatches.len().min(5)])
            },
        ),
        check("AAMI pass/fail examples", aami_ok, "me 0/sde 1/n 104 pass; me 6 fails on ME; n 50 fails on population"),
        check("BHS grade examples", bhs_ok, format!("94% within 5 mmHg grades {:?}", h.grade)),
    ]
}

fn end_to_end_config() -> RunConfig {
    RunConfig {
        model: ModelConfig {
            kernel_size: 5,
            dilations: vec![1, 2, 4, 8],
            block_channels: vec![8, 8, 16, 16],
            input_stem_channels: 8,
            head_channels: 32,
            output_channels: 2,
            dropout_rate: 0.1,
        },
        train: TrainConfig {
            base_lr: 0.003,
            cycle_len_epochs: 100,
            halving_period_epochs: 20,
            cycle_boundary_multiplier: 14.4,
            batch_size: 16,
            epochs: E2E_MAX_EPOCHS,
            loss: LossKind::Mse,
            rng_seed: 7,
        },
        data: DataConfig {
            window_len: 1024,
            stride: 512,
            split: SplitSpec::default(),
            scaling: TargetScaling::default(),
        },
    }
}

fn end_to_end(dir: &Path) -> Vec<Check> {
    let raw = dir.join("c9_raw");
    let clean = dir.join("c9_clean");
    let report_dir = dir.join("c9_report");
    let config_path = dir.join("c9_config.json");
    let ckpt = dir.join("c9_model.json");
    let mut log: Vec<u8> = Vec::new();
    let config = end_to_end_config();
    fs::write(&config_path, config.to_json()).unwrap();

    let outcome = (|| -> bpnet::Result<_> {
        synth(
            &SynthArgs {
                subjects: E2E_SUBJECTS,
                seed: 1,
                duration: E2E_DURATION_S,
                out: raw.clone(),
                mains_amplitude: 0.05,
                drift_amplitude: 0.2,
            },
            &mut log,
        )?;
        preprocess(&PreprocessArgs { input: raw.clone(), out: clean.clone() }, &mut log)?;
        let summary = train_command(
            &TrainArgs {
                data: clean.clone(),
                config: config_path.clone(),
                out: ckpt.clone(),
                seed: None,
                resume: None,
                subject: None,
            },
            &mut log,
        )?;
        let report = eval(&EvalArgs { ckpt: ckpt.clone(), data: clean.clone(), report: report_dir.clone() }, &mut log)?;
        Ok((summary, report))
    })();
    let (summary, report) = match outcome {
        Ok(v) => v,
        Err(e) => return vec![check("pipeline runs", false, e.to_string())],
    };
    // Bulky intermediates are not part of the comparison set.
    let _ = fs::remove_dir_all(&raw);
    let _ = fs::remove_dir_all(&clean);

    let (sbp, dbp) = (report.combined.sbp.mae, report.combined.dbp.mae);
    let grades = (report.bhs.sbp.grade, report.bhs.dbp.grade);
    let bhs_text = fs::read_to_string(report_dir.join(BHS_FILE)).unwrap_or_default();
    vec![
        check(
            "at most 40 epochs",
            summary.history.len() <= E2E_MAX_EPOCHS,
            format!("{} epochs, best {}", summary.history.len(), summary.best_epoch),
        ),
        check("test DBP MAE < 5 mmHg", dbp < E2E_DBP_MAE_LIMIT, format!("DBP MAE {dbp:.2} mmHg")),
        check("test SBP MAE < 8 mmHg", sbp < E2E_SBP_MAE_LIMIT, format!("SBP MAE {sbp:.2} mmHg")),
        check(
            "BHS grade B or better",
            grades.0 <= BhsGrade::B && grades.1 <= BhsGrade::B && !bhs_text.is_empty(),
            format!("BHS SBP {:?}, DBP {:?}", grades.0, grades.1),
        ),
    ]
}

struct Outcome {
    id: u8,
    title: &'static str,
    checks: Vec<Check>,
    seconds: f64,
}

fn run_all(dir: &Path, verbose: bool) -> Vec<Outcome> {
    fs::create_dir_all(dir).unwrap();
    CRITERIA
        .iter()
        .map(|c| {
            let start = Instant::now();
            let mut checks = (c.run)(dir);
            let seconds = start.elapsed().as_secs_f64();
            checks.push(check(
                format!("runtime < {} s", c.limit_s),
                seconds < c.limit_s,
                format!("{seconds:.2} s"),
            ));
            let outcome = Outcome { id: c.id, title: c.title, checks, seconds };
            if verbose {
                print_outcome(&outcome);
            }
            outcome
        })
        .collect()
}

fn print_outcome(o: &Outcome) {
    let failed: Vec<&Check> = o.checks.iter().filter(|c| !c.pass).collect();
    let details: Vec<String> =
        o.checks.iter().filter(|c| !c.detail.is_empty()).map(|c| c.detail.clone()).collect();
    if failed.is_empty() {
        println!("PASS  {:>2} {}: {}", o.id, o.title, details.join("; "));
    } else {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        println!("FAIL  {:>2} {}: failed [{}]; {}", o.id, o.title, names.join(", "), details.join("; "));
    }
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

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // Honour `cargo test -- --list` and filters aimed at other targets.
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let root = tempfile::tempdir().unwrap();
    let (first, second) = (root.path().join("run_a"), root.path().join("run_b"));

    println!("acceptance: criteria 1-9, first run");
    let mut outcomes = run_all(&first, true);

    let start = Instant::now();
    let rerun = run_all(&second, false);
    let (files_a, files_b) = (files_under(&first), files_under(&second));
    let differing: Vec<String> = files_a
        .iter()
        .filter(|f| fs::read(first.join(f)).ok() != fs::read(second.join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    let csv_count = files_a.iter().filter(|f| f.extension().is_some_and(|e| e == "csv")).count();
    let rerun_verdicts_agree = outcomes
        .iter()
        .zip(&rerun)
        .all(|(a, b)| a.checks.iter().zip(&b.checks).all(|(x, y)| x.pass == y.pass || x.name.starts_with("runtime")));
    let determinism = Outcome {
        id: 10,
        title: "determinism",
        checks: vec![
            check(
                "same file set across runs",
                files_a == files_b && csv_count > 0,
                format!("{} files ({csv_count} CSV)", files_a.len()),
            ),
            check(
                "byte-identical outputs",
                differing.is_empty(),
                if differing.is_empty() { "all identical".to_string() } else { format!("differ: {}", differing.join(", ")) },
            ),
            check("same verdicts on rerun", rerun_verdicts_agree, String::new()),
        ],
        seconds: start.elapsed().as_secs_f64(),
    };
    print_outcome(&determinism);
    outcomes.push(determinism);

    let total: f64 = outcomes.iter().map(|o| o.seconds).sum();
    let mut unexpected = Vec::new();
    for o in &outcomes {
        for c in o.checks.iter().filter(|c| !c.pass) {
            match KNOWN_UNATTAINABLE.iter().find(|(id, name, _)| *id == o.id && *name == c.name) {
                Some((_, _, why)) => println!("note: criterion {} check '{}' is known unattainable: {why}", o.id, c.name),
                None => unexpected.push(format!("{}: {}", o.id, c.name)),
            }
        }
    }
    println!("acceptance finished in {total:.1} s");
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join("; "));
        std::process::exit(1);
    }
}
