//! Analytic checks run by `timebin selftest`.

use std::f64::consts::{FRAC_PI_2, PI};

use timebin_core::analyzer::{
    arm_completeness, franson_rate, joint_distribution, predicted_visibilities, AnalyzerPhase, OutcomeKey, Port,
};
use timebin_core::engine::{classify_slot, CoincidenceTable, PortPair};
use timebin_core::linalg::ComplexMatrix;
use timebin_core::source::{calibrate_to_populations, emitted_density_matrix, SourceParams};
use timebin_core::state::{concurrence, fidelity_to_pure, phi_plus, tangle, DensityMatrix};
use timebin_core::tomography::{assemble_projections, invert_rates, project_to_physical};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn calibrated(g: f64, beta: f64, phase: f64) -> DensityMatrix {
    let mut p = SourceParams { coherence_factor: g, double_fraction: beta, ..SourceParams::default() };
    p.pump.pump_phase = phase;
    emitted_density_matrix(&p).expect("parameters in range")
}

fn povm_complete() -> Check {
    let worst = [0.0, 0.7, FRAC_PI_2, 2.9, 5.1]
        .iter()
        .map(|&phi| arm_completeness(phi).max_abs_diff(&ComplexMatrix::identity(2)))
        .fold(0.0, f64::max);
    check("POVM completeness", worst < 1e-12, format!("max deviation {worst:.1e}"))
}

fn bell_metrics() -> Check {
    let rho = DensityMatrix::pure(&phi_plus()).expect("normalized");
    let f = fidelity_to_pure(&rho, &phi_plus()).unwrap_or(f64::NAN);
    let c = concurrence(&rho).unwrap_or(f64::NAN);
    check("Bell state F = C = 1", (f - 1.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-9, format!("F {f:.12}, C {c:.12}"))
}

fn calibration() -> Check {
    let Ok((g, beta)) = calibrate_to_populations(0.44, 0.25) else {
        return check("calibration 0.44 / 0.25", false, "calibration rejected".into());
    };
    let rho = calibrated(g, beta, 0.0);
    let f = fidelity_to_pure(&rho, &phi_plus()).unwrap_or(f64::NAN);
    let c = concurrence(&rho).unwrap_or(f64::NAN);
    let t = tangle(&rho).unwrap_or(f64::NAN);
    let ok = (beta - 0.12).abs() < 1e-12
        && (f - 0.69).abs() < 1e-12
        && (c - 0.38).abs() < 1e-12
        && (t - c * c).abs() < 1e-12;
    check("calibration 0.44 / 0.25", ok, format!("g {g:.4}, beta {beta:.4}, F {f:.4}, C {c:.4}, T {t:.4}"))
}

fn visibilities() -> Check {
    let v = predicted_visibilities(&calibrated(0.25 / 0.44, 0.12, 0.0));
    let ok = (v.time - 0.76).abs() < 1e-12 && (v.x - 0.5).abs() < 1e-12 && (v.y - 0.5).abs() < 1e-12;
    check("model visibilities", ok, format!("time {:.4}, X {:.4}, Y {:.4}", v.time, v.x, v.y))
}

fn franson() -> Check {
    let phase_p = 0.4;
    let rho = calibrated(0.25 / 0.44, 0.12, phase_p);
    let v = 2.0 * rho.get(0, 3).norm();
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let phases = AnalyzerPhase::new(a as f64 * FRAC_PI_2 + 0.2, b as f64 * FRAC_PI_2 + 0.1);
            let d = joint_distribution(&rho, phases);
            for pa in Port::BOTH {
                for pb in Port::BOTH {
                    let rate = 16.0 * d.get(OutcomeKey::new(pa, 1, pb, 1));
                    let model = franson_rate(-(pa.sign() as i8), pb.sign() as i8, phases.sum() - phase_p, v);
                    worst = worst.max((rate - model).abs());
                }
            }
        }
    }
    check("two-photon fringe from POVM", worst < 1e-9, format!("max residual {worst:.1e} at V = {v:.4}"))
}

fn tomography_round_trip() -> Check {
    let states = [
        DensityMatrix::pure(&phi_plus()).expect("normalized"),
        DensityMatrix::maximally_mixed(),
        calibrated(0.25 / 0.44, 0.12, 0.0),
        calibrated(0.3, 0.4, 1.9),
        calibrated(1.0, 0.0, 4.0).mix(&DensityMatrix::maximally_mixed(), 0.7),
    ];
    let mut worst: f64 = 0.0;
    for pair in PortPair::all() {
        let tables: Vec<CoincidenceTable> = AnalyzerPhase::tomography_settings()
            .iter()
            .map(|&ph| CoincidenceTable::from_distribution(&joint_distribution(&states[1], ph), 1e6, 1, ph))
            .collect();
        let Ok(layout) = assemble_projections(&tables, pair) else {
            return check("tomography round trip", false, "projection assembly failed".into());
        };
        for rho in &states {
            let rates = layout.expected_rates(rho);
            let err = invert_rates(&layout, &rates)
                .and_then(|raw| project_to_physical(&raw))
                .map(|r| r.matrix().max_abs_diff(rho.matrix()))
                .unwrap_or(f64::INFINITY);
            worst = worst.max(err);
        }
    }
    check("tomography round trip", worst < 1e-9, format!("max entry error {worst:.1e}"))
}

fn projection_example() -> Check {
    let raw = ComplexMatrix::diag(&[0.6, 0.5, 0.0, -0.1]);
    let ok = project_to_physical(&raw)
        .map(|r| r.matrix().max_abs_diff(&ComplexMatrix::diag(&[0.55, 0.45, 0.0, 0.0])) < 1e-12)
        .unwrap_or(false);
    check("physicality projection", ok, "diag(0.6, 0.5, 0, -0.1) -> diag(0.55, 0.45, 0, 0)".into())
}

fn slot_windows() -> Check {
    let (d, w, o) = (3.2e-9, 1.28e-9, 0.5e-9);
    let got = [o, o + d, o + 2.0 * d, o + d / 2.0, o + 3.0 * d].map(|t| classify_slot(t, d, w, o));
    let ok = got == [Some(0), Some(1), Some(2), None, None];
    check("slot classification", ok, format!("{got:?}"))
}

fn dark_fringe() -> Check {
    let rho = DensityMatrix::pure(&phi_plus()).expect("normalized");
    let d = joint_distribution(&rho, AnalyzerPhase::new(0.0, 0.0));
    let dark = d.get(OutcomeKey::new(Port::One, 1, Port::Two, 1));
    let bright = d.get(OutcomeKey::new(Port::One, 1, Port::One, 1));
    let shifted =
        joint_distribution(&rho, AnalyzerPhase::new(PI, 0.0)).get(OutcomeKey::new(Port::One, 1, Port::One, 1));
    let ok = dark.abs() < 1e-15 && (bright - 0.125).abs() < 1e-15 && shifted.abs() < 1e-15;
    check("dark fringe of the ideal state", ok, format!("dark {dark:.1e}, bright {bright:.4}"))
}

pub fn selftest() -> Vec<Check> {
    vec![
        povm_complete(),
        bell_metrics(),
        calibration(),
        visibilities(),
        franson(),
        dark_fringe(),
        tomography_round_trip(),
        projection_example(),
        slot_windows(),
    ]
}
