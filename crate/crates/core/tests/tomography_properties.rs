mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use timebin_core::analyzer::{joint_distribution, predicted_visibilities, AnalyzerPhase};
use timebin_core::engine::{visibility_from_counts, Basis, CoincidenceTable, PortPair, PortSelection};
use timebin_core::linalg::ComplexMatrix;
use timebin_core::source::{emitted_density_matrix, SourceParams};
use timebin_core::state::{phi_plus, DensityMatrix};
use timebin_core::tomography::{
    assemble_projections, full_report, invert_rates, monte_carlo_errors, project_to_physical, reconstruct,
    ProjectionCounts, ReportOptions,
};

use common::{random_hermitian, random_state};

fn exact_tables(rho: &DensityMatrix, pairs: f64) -> Vec<CoincidenceTable> {
    AnalyzerPhase::tomography_settings()
        .iter()
        .map(|&ph| CoincidenceTable::from_distribution(&joint_distribution(rho, ph), pairs, 1_000_000, ph))
        .collect()
}

fn poisson_tables(rho: &DensityMatrix, pairs: f64, rng: &mut ChaCha8Rng) -> Vec<CoincidenceTable> {
    AnalyzerPhase::tomography_settings()
        .iter()
        .map(|&ph| {
            let mut t = CoincidenceTable::new(ph);
            for (key, p) in joint_distribution(rho, ph).iter() {
                let mean = p.max(0.0) * pairs;
                t.counts[key.index()] = if mean > 0.0 { Poisson::new(mean).unwrap().sample(rng) as u64 } else { 0 };
            }
            t.exposure = 1_000_000;
            t
        })
        .collect()
}

fn layout(pair: PortPair) -> ProjectionCounts {
    let rho = DensityMatrix::maximally_mixed();
    assemble_projections(&exact_tables(&rho, 1e6), pair).unwrap()
}

#[test]
fn inversion_round_trip_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for pair in PortPair::all() {
        let p = layout(pair);
        let mut worst: f64 = 0.0;
        for n in 0..1000 {
            let rho = random_state(1 + n % 4, &mut rng);
            let scale = rng.random_range(0.01..100.0);
            let rates = p.expected_rates(&rho).map(|r| r * scale);
            let raw = invert_rates(&p, &rates).unwrap();
            worst = worst.max(raw.max_abs_diff(rho.matrix()));
            let phys = project_to_physical(&raw).unwrap();
            worst = worst.max(phys.matrix().max_abs_diff(rho.matrix()));
        }
        assert!(worst < 1e-9, "{pair:?}: worst error {worst:e}");
    }
}

#[test]
fn projection_idempotent_and_trace_preserving() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let h = random_hermitian(4, &mut rng);
        let tr = h.trace().re;
        let raw = &h.scale_real(0.3) + &ComplexMatrix::identity(4).scale_real((1.0 - 0.3 * tr) / 4.0);
        let once = project_to_physical(&raw).unwrap();
        assert!((once.matrix().trace().re - 1.0).abs() < 1e-12);
        let twice = project_to_physical(once.matrix()).unwrap();
        assert!(twice.matrix().max_abs_diff(once.matrix()) < 1e-12);
    }
}

#[test]
fn metrics_invariant_under_exposure_scaling() {
    let rho = emitted_density_matrix(&SourceParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = assemble_projections(&poisson_tables(&rho, 4e4, &mut rng), PortPair::default()).unwrap();
    let (rho_a, m_a) = reconstruct(&p, &phi_plus()).unwrap();
    for k in [3, 1000] {
        let mut scaled = p.clone();
        scaled.entries.iter_mut().for_each(|e| e.exposure *= k);
        let (rho_b, m_b) = reconstruct(&scaled, &phi_plus()).unwrap();
        assert!(rho_a.matrix().max_abs_diff(rho_b.matrix()) < 1e-12);
        assert!((m_a.fidelity - m_b.fidelity).abs() < 1e-12);
        assert!((m_a.concurrence - m_b.concurrence).abs() < 1e-12);
    }
}

#[test]
fn reconstructed_visibilities_agree_with_counts() {
    let rho = emitted_density_matrix(&SourceParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let tables = poisson_tables(&rho, 2e5, &mut rng);
    let report = full_report(&tables, &ReportOptions { mc_runs: 0, ..ReportOptions::default() }).unwrap();
    let predicted = predicted_visibilities(&report.rho);
    for (basis, est) in report.visibilities {
        let model = match basis {
            Basis::Time => predicted.time,
            Basis::X => predicted.x,
            Basis::Y => predicted.y,
        };
        assert!(
            (est.value - model).abs() < 3.0 * est.sigma,
            "{basis:?}: {} vs {model} (sigma {})",
            est.value,
            est.sigma
        );
    }
}

#[test]
fn single_pair_visibilities_match_model() {
    let rho = emitted_density_matrix(&SourceParams::default()).unwrap();
    let tables = exact_tables(&rho, 1e9);
    for pair in PortPair::all() {
        for basis in Basis::ALL {
            let v = visibility_from_counts(&tables, basis, PortSelection::Pair(pair)).unwrap();
            let expected = if basis == Basis::Time { 0.76 } else { 0.50 };
            assert!((v.value - expected).abs() < 1e-6, "{pair:?} {basis:?}: {}", v.value);
        }
    }
}

fn sigmas_at(pairs: f64, seed: u64) -> (f64, f64) {
    let rho = emitted_density_matrix(&SourceParams::default()).unwrap();
    let p = assemble_projections(&exact_tables(&rho, pairs), PortPair::default()).unwrap();
    let s = monte_carlo_errors(&p, 100, seed, &phi_plus()).unwrap();
    (s.fidelity, s.concurrence)
}

#[test]
fn monte_carlo_sigmas_scale_with_counts() {
    let (f1, c1) = sigmas_at(1e5, 21);
    let (f2, c2) = sigmas_at(1e7, 22);
    for (name, ratio) in [("fidelity", f1 / f2), ("concurrence", c1 / c2)] {
        assert!((ratio - 10.0).abs() <= 3.0, "{name} sigma ratio {ratio}");
    }
}

#[test]
fn monte_carlo_is_deterministic() {
    let rho = emitted_density_matrix(&SourceParams::default()).unwrap();
    let p = assemble_projections(&exact_tables(&rho, 1e4), PortPair::default()).unwrap();
    let a = monte_carlo_errors(&p, 2, 5, &phi_plus()).unwrap();
    let b = monte_carlo_errors(&p, 2, 5, &phi_plus()).unwrap();
    assert_eq!(a, b);
    assert!(monte_carlo_errors(&p, 1, 5, &phi_plus()).is_err());
}

#[test]
fn experiment_scale_sigmas() {
    // about 4000 counts over the sixteen projections
    let (f, c) = sigmas_at(4e3, 23);
    assert!((0.015..0.06).contains(&f), "sigma F {f}");
    assert!((0.03..0.12).contains(&c), "sigma C {c}");
}

#[test]
fn noiseless_ideal_report() {
    let rho = DensityMatrix::pure(&phi_plus()).unwrap();
    let r = full_report(&exact_tables(&rho, 1e8), &ReportOptions { mc_runs: 0, ..ReportOptions::default() }).unwrap();
    assert!((r.metrics.fidelity - 1.0).abs() < 1e-6);
    assert!((r.metrics.concurrence - 1.0).abs() < 1e-6);
    for (_, v) in r.visibilities {
        assert!((v.value - 1.0).abs() < 1e-6);
    }
}
