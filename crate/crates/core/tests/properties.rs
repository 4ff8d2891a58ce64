use proptest::prelude::*;

use fxstyle::audio::{read_wav, write_wav};
use fxstyle::baseline::savgol_smooth;
use fxstyle::datagen::{peak_normalize, StylePreset};
use fxstyle::effects::{
    apply_eq_td, denormalize, eq_response, fir_filter_freq, normalize, process_chain, static_curve,
};
use fxstyle::fixtures::{speech_like, white_noise};
use fxstyle::grad::spsa_perturbation;
use fxstyle::objective::{lufs_integrated, metric_report, overall_loss};
use fxstyle::{AudioBuffer, NormalizedParams, Path, WavFormat, NUM_PARAMS};

fn unit_vector() -> impl Strategy<Value = [f64; NUM_PARAMS]> {
    proptest::array::uniform22(0.0f64..=1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_roundtrip(v in unit_vector()) {
        let n = NormalizedParams::new(v).unwrap();
        let back = normalize(&denormalize(&n)).unwrap();
        for (a, b) in n.as_array().iter().zip(back.as_array()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn chain_output_is_finite_and_same_length(v in unit_vector(), seed in 0u64..1000) {
        let x = white_noise(4096, 24000, 0.5, seed);
        let p = denormalize(&NormalizedParams::new(v).unwrap());
        for path in [Path::Reference, Path::Differentiable] {
            let y = process_chain(&x, &p, path);
            prop_assert_eq!(y.len(), x.len());
            prop_assert!(y.samples().iter().all(|s| s.is_finite()));
        }
    }

    #[test]
    fn fir_tracks_iir(gains in proptest::array::uniform6(-12.0f64..12.0), seed in 0u64..1000) {
        let x = white_noise(24000, 24000, 0.5, seed);
        let mut p = denormalize(&NormalizedParams::neutral());
        p.eq.low_shelf.gain_db = gains[0];
        for (i, pk) in p.eq.peaks.iter_mut().enumerate() {
            pk.gain_db = gains[1 + i];
        }
        p.eq.high_shelf.gain_db = gains[5];
        let td = apply_eq_td(&x, &p.eq);
        let fd = fir_filter_freq(&x, |n| eq_response(&p.eq, n, 24000.0));
        let err: f64 = td.samples().iter().zip(fd.samples()).map(|(a, b)| (a - b).powi(2)).sum();
        let norm: f64 = td.samples().iter().map(|a| a * a).sum();
        prop_assert!((err / norm).sqrt() < 1e-2);
    }

    #[test]
    fn static_curve_is_monotone(v in unit_vector(), a in -90.0f64..0.0, b in -90.0f64..0.0) {
        let c = denormalize(&NormalizedParams::new(v).unwrap()).comp;
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(static_curve(lo, &c) <= static_curve(hi, &c) + 1e-12);
        prop_assert!(static_curve(hi, &c) - c.makeup_db <= hi + 1e-12);
    }

    #[test]
    fn losses_are_nonnegative_and_zero_on_self(s1 in 0u64..1000, s2 in 0u64..1000, k in 0.1f64..2.0) {
        let a = white_noise(8192, 24000, 0.5, s1);
        let b = white_noise(8192, 24000, 0.5, s2).scaled(k);
        let l = overall_loss(&a, &b).unwrap();
        prop_assert!(l.overall >= 0.0 && l.freq >= 0.0 && l.time >= 0.0);
        prop_assert_eq!(overall_loss(&a, &a).unwrap().overall, 0.0);
    }

    #[test]
    fn metrics_are_symmetric(s1 in 0u64..1000, s2 in 0u64..1000) {
        let a = white_noise(24000, 24000, 0.5, s1);
        let b = white_noise(24000, 24000, 0.3, s2);
        prop_assert_eq!(metric_report(&a, &b).unwrap(), metric_report(&b, &a).unwrap());
    }

    #[test]
    fn loudness_follows_gain(g in -30.0f64..6.0, seed in 0u64..100) {
        let x = speech_like(24000, 24000, seed);
        let l0 = lufs_integrated(&x).unwrap();
        let l1 = lufs_integrated(&x.scaled(10f64.powf(g / 20.0))).unwrap();
        prop_assert!((l1 - l0 - g).abs() < 1e-6);
    }

    #[test]
    fn rademacher(seed in any::<u64>(), j in 0usize..10_000) {
        let d = spsa_perturbation(seed, j);
        prop_assert!(d.iter().all(|&e| e == 1.0 || e == -1.0));
        prop_assert_eq!(d, spsa_perturbation(seed, j));
    }

    #[test]
    fn peak_normalize_hits_target(seed in 0u64..1000, db in -40.0f64..0.0) {
        let x = white_noise(500, 24000, 0.7, seed);
        let y = peak_normalize(&x, db).unwrap();
        prop_assert!((20.0 * y.peak().log10() - db).abs() < 1e-9);
    }

    #[test]
    fn savgol_keeps_quadratics(a in -1.0f64..1.0, b in -1e-3f64..1e-3, c in -1e-6f64..1e-6) {
        let spec: Vec<f64> = (0..3000).map(|i| {
            let t = i as f64;
            20.0 + a + b * t + c * t * t
        }).collect();
        for (s, e) in savgol_smooth(&spec).iter().zip(&spec) {
            prop_assert!((s - e).abs() < 1e-6 * e.abs().max(1.0));
        }
    }

    #[test]
    fn preset_draws_respect_ranges(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for preset in StylePreset::all() {
            let v = preset.sample(&mut rng).to_vector();
            for (x, (lo, hi)) in v.iter().zip(preset.ranges) {
                prop_assert!(*x >= lo && *x <= hi);
            }
        }
    }
}

#[test]
fn float_wav_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.wav");
    let x = white_noise(1000, 24000, 0.5, 3);
    let x32 = AudioBuffer::new(x.samples().iter().map(|&s| s as f32 as f64).collect(), 24000).unwrap();
    write_wav(&x32, &p, WavFormat::Float32).unwrap();
    assert_eq!(read_wav(&p).unwrap(), x32);
}
