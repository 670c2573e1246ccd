use neqfridge::experiments::{
    cooling_window, critical_coupling_numeric, high_temperature_saturation, maximize_cooling_power, minimize_cop,
    random_ensemble, sweep, sweep_fig3, sweep_fig4, sweep_fig5, Axis, CurveClass, EndpointKind, EnsembleSpec,
    Fig3Spec, Fig4Spec, Fig5Spec, SweepSpec,
};
use neqfridge::observables::{critical_coupling, eta_star_max, max_cop_as_printed};
use neqfridge::ModelParams;

#[test]
fn fig3_classes_in_order() {
    let curves = sweep_fig3(&Fig3Spec::default()).unwrap();
    let classes: Vec<CurveClass> = curves.iter().map(|c| c.class).collect();
    assert_eq!(
        classes,
        [CurveClass::Positive, CurveClass::SignChanging, CurveClass::Negative, CurveClass::Negative]
    );
    assert!(curves[0].monotone);
    let last = curves[3].rows.last().unwrap();
    assert_eq!(last.beta3, 0.5);
    assert!(last.q1g.abs() < 1e-18 && last.delta_c.abs() < 1e-15);
    for c in &curves {
        assert_eq!(c.q1g_roots.len(), c.delta_c_roots.len());
        for (a, b) in c.q1g_roots.iter().zip(&c.delta_c_roots) {
            assert!((a - b).abs() < 1e-8, "gamma {}: {a} vs {b}", c.gamma);
        }
    }
    assert_eq!(curves[1].q1g_roots.len(), 1);
    for r in curves.iter().flat_map(|c| &c.rows) {
        if r.beta3 < 0.5 && r.q1g.abs() > 1e-14 {
            assert_eq!(r.q1g > 0.0, r.delta_c > 0.0, "{r:?}");
        }
    }
}

#[test]
fn critical_coupling_from_finite_differences() {
    let gc = critical_coupling(1.0, 4.0);
    for t2 in [0.5, 2.0, 7.0] {
        let numeric = critical_coupling_numeric(1.0, 4.0, t2).unwrap();
        assert!((numeric - gc).abs() < 1e-6, "T2 = {t2}: {numeric} vs {gc}");
    }
}

#[test]
fn fig4_windows() {
    let curves = sweep_fig4(&Fig4Spec::default()).unwrap();
    let expected = [(0.2, 0.407, 3.923), (0.4, 0.860, 3.682), (0.6, 1.470, 3.185)];
    for (curve, (gamma, lo, hi)) in curves.iter().zip(expected) {
        assert_eq!(curve.gamma, gamma);
        assert!((curve.window.lo - lo).abs() < 2e-3 && (curve.window.hi - hi).abs() < 2e-3, "{:?}", curve.window);
        for ep in &curve.endpoints {
            assert_eq!(ep.kind, EndpointKind::Deviation);
            assert!(ep.eta_tot.abs() < 1e-8);
            assert!((ep.eta_g - ep.eta_max_identity).abs() < 1e-10);
        }
        for r in &curve.rows {
            assert!(r.eta_g >= r.eta_tot - 1e-12 && r.eta_g <= 1.0, "{r:?}");
        }
    }
}

#[test]
fn printed_max_cop_form_disagrees_off_axis() {
    let base = Fig4Spec::default().base.with_gamma(0.4);
    let w = cooling_window(&base).unwrap();
    let params = base.with_e1(w.hi);
    let frame = neqfridge::Frame::from_params(&params).unwrap();
    let pops = neqfridge::ThermalPopulations::new(&params, &frame);
    let printed = max_cop_as_printed(params.beta1(), &frame, &pops.tilde);
    let eta = neqfridge::observables::cop_g(&frame).unwrap();
    assert!((printed - eta).abs() > 1e-3);
}

#[test]
fn fig5_limits_and_ordering() {
    let spec = Fig5Spec::default();
    let curves = sweep_fig5(&spec).unwrap();
    for c in &curves {
        assert!(c.skipped.is_empty());
        assert!(c.rows.iter().all(|r| r.ratio < 1.0 && r.ratio > 0.0));
    }
    for i in 0..curves[0].rows.len() {
        for w in curves.windows(2) {
            assert!(w[1].rows[i].ratio < w[0].rows[i].ratio);
            assert!(w[1].rows[i].coherence > w[0].rows[i].coherence);
        }
    }
    for gamma in [0.1, 0.2, 0.3] {
        let r = neqfridge::experiments::fig5_point(&spec, gamma, 0.5 - 1e-4).unwrap().unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-3, "{r:?}");
    }
}

#[test]
fn optimisers_beat_audit_grid() {
    let base = Fig4Spec::default().base.with_gamma(0.4);
    let power = maximize_cooling_power(&base).unwrap();
    assert!(power.q1g_max >= power.audit_best);
    assert!(power.window.contains(power.e1_star));
    assert!(power.eta_g_star <= eta_star_max(1.0, 0.1).unwrap() + 1e-9);
    let low = minimize_cop(&base).unwrap();
    assert!(low.value <= low.audit_best);
    assert!(low.value <= power.eta_g_star);
}

#[test]
fn zero_coupling_minimum_cop_is_left_endpoint() {
    let base = Fig4Spec::default().base.with_gamma(0.0);
    let w = cooling_window(&base).unwrap();
    let low = minimize_cop(&base).unwrap();
    assert!((low.value - w.lo / 4.0).abs() < 1e-6);
    assert!((w.hi - 4.0).abs() < 1e-9);
    // Without mixing the window reaches down to E1 -> 0, where d stays negative.
    assert_eq!((w.lo_kind, w.hi_kind), (EndpointKind::ScanBoundary, EndpointKind::Deviation));
}

#[test]
fn high_temperature_limit() {
    let base = Fig4Spec::default().base;
    let kappas = [1.0, 2.0, 5.0, 10.0, 20.0];
    for x in [0.0, 0.05, 0.1] {
        let rows = high_temperature_saturation(&base, x, &kappas).unwrap();
        assert!(rows.windows(2).all(|w| w[1].relative_gap < w[0].relative_gap), "{rows:?}");
        assert!(rows[4].relative_gap.abs() < 0.02);
    }
}

#[test]
fn small_ensemble_is_deterministic_and_bounded() {
    let spec = EnsembleSpec { n: 40, ..EnsembleSpec::default() };
    let a = random_ensemble(&spec).unwrap();
    let b = random_ensemble(&spec).unwrap();
    assert_eq!(a.rows.len(), 40);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.eta_g_star_over_eta_c.to_bits(), y.eta_g_star_over_eta_c.to_bits());
        assert_eq!(x.coherence.to_bits(), y.coherence.to_bits());
    }
    for r in &a.rows {
        assert!(r.eta_g_star_over_eta_c <= r.eta_star_max + 1e-9);
        assert!(r.eta_g_star_over_eta_c >= r.eta_star_min - 1e-9);
    }
}

#[test]
fn sweep_marks_infeasible_points() {
    let spec = SweepSpec {
        base: ModelParams::reference(),
        axis: Axis::Gamma,
        range: [0.0, 0.8],
        points: 9,
        outputs: vec!["d".into(), "eta_g".into()],
    };
    let rows = sweep(&spec).unwrap();
    assert!(rows[..6].iter().all(|r| r.values.is_some()));
    assert!(rows[6..].iter().all(|r| r.values.is_none()));
    assert_eq!(rows[5].values.as_ref().unwrap()[1], None);
}
