use depthstroke_core::filters::{
    fisheye, hysteresis, low_pass, median_filter, moving_average, sigmoid_gate, FisheyeMode, FisheyeParams,
    HysteresisParams, LowPassParams, SigmoidParams, WindowParams,
};
use depthstroke_core::pipeline::{PipelineConfig, Suppressor};
use depthstroke_core::PressureProfile;
use proptest::prelude::*;

fn table_fisheyes() -> Vec<FisheyeParams> {
    let cfg = PipelineConfig::default();
    [cfg.spiral.suppressor, cfg.forward.suppressor, cfg.backward.suppressor]
        .into_iter()
        .map(|s| match s {
            Suppressor::Fisheye(f) => f,
            Suppressor::Hysteresis(_) => panic!("default chains use fisheye"),
        })
        .collect()
}

fn table_sigmoids() -> Vec<SigmoidParams> {
    let cfg = PipelineConfig::default();
    vec![cfg.forward.sigmoid, cfg.backward.sigmoid]
}

fn profiles() -> impl Strategy<Value = PressureProfile> {
    prop::collection::vec(0.0f64..=1.0, 1..300).prop_map(|v| PressureProfile::new(v).unwrap())
}

fn within_input_range(out: &PressureProfile, input: &PressureProfile) -> bool {
    out.values().iter().all(|&v| v >= input.min() && v <= input.max())
}

#[test]
fn default_parameter_sets() {
    let f = table_fisheyes();
    assert_eq!((f[0].levels, f[0].scale, f[0].displacement), (12, 1.0 / 7.0, 0.65));
    assert_eq!((f[1].levels, f[1].scale, f[1].displacement), (10, 1.0 / 6.0, 0.0));
    assert_eq!((f[2].levels, f[2].scale, f[2].displacement), (10, 1.0 / 5.0, 0.0));
    for p in &f {
        assert_eq!((p.outer_radius, p.inner_radius), (600.0, 120.0));
    }
    let s = table_sigmoids();
    assert_eq!((s[0].contrast, s[0].threshold), (2.5, 0.85));
    assert_eq!((s[1].contrast, s[1].threshold), (1.0, 0.3));
    let cfg = PipelineConfig::default();
    assert_eq!(cfg.spiral.low_pass.alpha, 0.075);
    assert_eq!(cfg.forward.low_pass.alpha, 0.1);
    assert_eq!(cfg.backward.low_pass.alpha, 0.1);
}

#[test]
fn fisheye_fixed_point_on_table_parameters() {
    for f in table_fisheyes() {
        assert_eq!(f.transfer(f.displacement), f.displacement);
    }
}

#[test]
fn discrete_fisheye_lands_on_levels() {
    let f = FisheyeParams {
        mode: FisheyeMode::Discrete,
        ..table_fisheyes()[1]
    };
    let x = PressureProfile::new((0..=100).map(|i| i as f64 / 100.0).collect()).unwrap();
    let out = fisheye(&x, f).unwrap();
    for &v in out.values() {
        let k = v * 9.0;
        assert!((k - k.round()).abs() < 1e-12, "{v}");
    }
}

proptest! {
    #[test]
    fn identity_cases(x in profiles()) {
        prop_assert_eq!(low_pass(&x, LowPassParams { alpha: 1.0 }).unwrap(), x.clone());
        prop_assert_eq!(median_filter(&x, WindowParams { width: 1 }).unwrap(), x.clone());
        prop_assert_eq!(moving_average(&x, WindowParams { width: 1 }).unwrap(), x.clone());
        let h = hysteresis(&x, HysteresisParams { band: 0.0 }).unwrap();
        for (a, b) in h.values().iter().zip(x.values()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn smoothing_filters_stay_in_input_range(
        x in profiles(),
        alpha in 0.01f64..=1.0,
        w in 0usize..8,
    ) {
        let window = WindowParams { width: 2 * w + 1 };
        let lp = low_pass(&x, LowPassParams { alpha }).unwrap();
        prop_assert!(within_input_range(&lp, &x));
        prop_assert!(within_input_range(&median_filter(&x, window).unwrap(), &x));
        prop_assert!(within_input_range(&moving_average(&x, window).unwrap(), &x));
    }

    #[test]
    fn filters_preserve_length_and_unit_range(x in profiles(), band in 0.0f64..0.5) {
        let outs = [
            hysteresis(&x, HysteresisParams { band }).unwrap(),
            low_pass(&x, LowPassParams { alpha: 0.1 }).unwrap(),
            sigmoid_gate(&x, table_sigmoids()[0]).unwrap(),
            fisheye(&x, table_fisheyes()[0]).unwrap(),
        ];
        for out in outs {
            prop_assert_eq!(out.len(), x.len());
            prop_assert!(out.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn sigmoid_is_monotone_on_table_parameters(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for s in table_sigmoids() {
            prop_assert!(s.apply(lo) <= s.apply(hi));
            prop_assert!(s.apply(lo) > 0.0 && s.apply(hi) < 1.0);
        }
    }

    #[test]
    fn fisheye_contracts_towards_focus(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        for f in table_fisheyes() {
            let d = f.displacement;
            let h = f.transfer(p);
            prop_assert!((h - d).abs() <= (p - d).abs());
            prop_assert!((h - d) * (p - d) >= 0.0);
            if p < q {
                prop_assert!(f.transfer(p) <= f.transfer(q));
            }
        }
    }

    #[test]
    fn constants_map_to_constants(c in 0.0f64..=1.0, n in 1usize..60) {
        let x = PressureProfile::new(vec![c; n]).unwrap();
        let outs = [
            low_pass(&x, LowPassParams { alpha: 0.075 }).unwrap(),
            median_filter(&x, WindowParams::DEFAULT_MEDIAN).unwrap(),
            moving_average(&x, WindowParams::DEFAULT_MOVING_AVERAGE).unwrap(),
            hysteresis(&x, HysteresisParams::default()).unwrap(),
        ];
        for out in outs {
            prop_assert!(out.values().iter().all(|&v| v == c));
        }
    }
}
