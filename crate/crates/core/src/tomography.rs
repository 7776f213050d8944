//! Two-qubit state reconstruction from the four phase-setting runs.
//!
//! Sixteen projections are assembled per arm from `{|0>, |1>, X, Y}`, where
//! the side slots give the time-basis projectors and the middle slot gives
//! an energy-basis projector whose sign depends on the detector port. The
//! state is recovered by linear inversion in the Pauli basis followed by a
//! nearest-physical eigenvalue projection.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analyzer::{angle_close, AnalyzerPhase, Port};
use crate::engine::{visibility_from_counts, Basis, CoincidenceTable, PortPair, PortSelection, VisibilityEstimate};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, paulis, solve_real, ComplexMatrix};
use crate::source::ideal_state;
use crate::state::{concurrence, fidelity_to_pure, validate_density_matrix, DensityMatrix};

const PHASE_TOL: f64 = 1e-6;

/// Which projection an arm performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKind {
    /// Early bin, slot 0.
    Zero,
    /// Late bin, slot 2.
    One,
    /// Middle slot with the arm phase at 0.
    X,
    /// Middle slot with the arm phase at pi/2.
    Y,
}

impl ProjectorKind {
    pub const ALL: [ProjectorKind; 4] = [ProjectorKind::Zero, ProjectorKind::One, ProjectorKind::X, ProjectorKind::Y];

    pub fn slot(self) -> u8 {
        match self {
            ProjectorKind::Zero => 0,
            ProjectorKind::One => 2,
            ProjectorKind::X | ProjectorKind::Y => 1,
        }
    }

    /// Required arm phase, if any.
    pub fn phase(self) -> Option<f64> {
        match self {
            ProjectorKind::X => Some(0.0),
            ProjectorKind::Y => Some(FRAC_PI_2),
            _ => None,
        }
    }

    /// POVM weight of the slot.
    pub fn weight(self) -> f64 {
        if self.slot() == 1 {
            0.5
        } else {
            0.25
        }
    }

    /// Projected single-qubit state at the given port.
    pub fn state(self, port: Port) -> [Complex64; 2] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        match self {
            ProjectorKind::Zero => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ProjectorKind::One => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ProjectorKind::X | ProjectorKind::Y => {
                [Complex64::new(h, 0.0), Complex64::from_polar(h * port.sign(), self.phase().unwrap())]
            }
        }
    }

    /// `0`, `1`, `+X`, `-Y`, ...
    pub fn label(self, port: Port) -> &'static str {
        match (self, port) {
            (ProjectorKind::Zero, _) => "0",
            (ProjectorKind::One, _) => "1",
            (ProjectorKind::X, Port::One) => "+X",
            (ProjectorKind::X, Port::Two) => "-X",
            (ProjectorKind::Y, Port::One) => "+Y",
            (ProjectorKind::Y, Port::Two) => "-Y",
        }
    }
}

/// One of the sixteen joint projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionEntry {
    pub xx: ProjectorKind,
    pub x: ProjectorKind,
    pub count: u64,
    /// Product of the two slot weights.
    pub weight: f64,
    /// Summed SYNC cycles of the contributing runs.
    pub exposure: u64,
}

impl ProjectionEntry {
    /// `count / (weight * exposure)`.
    pub fn rate(&self) -> f64 {
        self.count as f64 / (self.weight * self.exposure as f64)
    }
}

/// The sixteen projection counts for one port pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCounts {
    pub pair: PortPair,
    /// Ordered `4 * kind_xx + kind_x` over [`ProjectorKind::ALL`].
    pub entries: [ProjectionEntry; 16],
}

impl ProjectionCounts {
    /// `|a><a| (x) |b><b|` of entry `m` (unit weight).
    pub fn projector(&self, m: usize) -> ComplexMatrix {
        let e = &self.entries[m];
        let a = e.xx.state(self.pair.xx);
        let b = e.x.state(self.pair.x);
        let v: [Complex64; 4] = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        ComplexMatrix::outer(&v)
    }

    pub fn label(&self, m: usize) -> (&'static str, &'static str) {
        let e = &self.entries[m];
        (e.xx.label(self.pair.xx), e.x.label(self.pair.x))
    }

    /// Same layout with counts replaced.
    pub fn with_counts(&self, counts: impl IntoIterator<Item = u64>) -> Self {
        let mut out = self.clone();
        for (e, c) in out.entries.iter_mut().zip(counts) {
            e.count = c;
        }
        out
    }

    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Noiseless rates `Tr[rho Pi_m]` for a state.
    pub fn expected_rates(&self, rho: &DensityMatrix) -> [f64; 16] {
        core::array::from_fn(|m| self.projector(m).inner(rho.matrix()).re)
    }
}

fn phase_matches(kind: ProjectorKind, arm_phase: f64) -> bool {
    kind.phase().is_none_or(|p| angle_close(arm_phase, p, PHASE_TOL))
}

/// Collects the sixteen projections of `pair` from the four tomography runs.
///
/// Time-time projections sum the side-slot cells of all four runs; any
/// projection involving an energy-basis arm uses only the runs whose arm
/// phase matches. Tables whose phase setting is not one of the four are
/// ignored.
pub fn assemble_projections(tables: &[CoincidenceTable], pair: PortPair) -> Result<ProjectionCounts> {
    let settings = AnalyzerPhase::tomography_settings();
    for s in &settings {
        if !tables.iter().any(|t| t.phase.approx_eq(s, PHASE_TOL)) {
            return Err(Error::MissingRun { phi_xx: s.phi_xx(), phi_x: s.phi_x() });
        }
    }
    let runs: Vec<&CoincidenceTable> =
        tables.iter().filter(|t| settings.iter().any(|s| t.phase.approx_eq(s, PHASE_TOL))).collect();

    let entries = core::array::from_fn(|m| {
        let xx = ProjectorKind::ALL[m / 4];
        let x = ProjectorKind::ALL[m % 4];
        let key = pair.key(xx.slot(), x.slot());
        let (mut count, mut exposure) = (0, 0);
        for t in runs.iter().filter(|t| phase_matches(xx, t.phase.phi_xx()) && phase_matches(x, t.phase.phi_x())) {
            count += t.get(key);
            exposure += t.exposure;
        }
        ProjectionEntry { xx, x, count, weight: xx.weight() * x.weight(), exposure }
    });
    let p = ProjectionCounts { pair, entries };
    if p.entries.iter().any(|e| e.exposure == 0) {
        return Err(Error::EmptyProjection("zero exposure"));
    }
    Ok(p)
}

/// `sigma_a (x) sigma_b / 2` for `n = 4a + b`.
fn pauli_basis() -> Vec<ComplexMatrix> {
    let p = paulis();
    let mut out = Vec::with_capacity(16);
    for a in &p {
        for b in &p {
            out.push(a.kron(b).scale_real(0.5));
        }
    }
    out
}

/// Linear inversion of the sixteen weighted, exposure-normalized rates.
/// The result is Hermitian with unit trace but not necessarily positive.
pub fn linear_inversion(p: &ProjectionCounts) -> Result<ComplexMatrix> {
    if p.entries.iter().any(|e| e.exposure == 0) {
        return Err(Error::EmptyProjection("zero exposure"));
    }
    let rates: Vec<f64> = p.entries.iter().map(ProjectionEntry::rate).collect();
    invert_rates(p, &rates)
}

/// Inversion from explicit rates `r_m` proportional to `Tr[rho Pi_m]`.
pub fn invert_rates(p: &ProjectionCounts, rates: &[f64]) -> Result<ComplexMatrix> {
    let basis = pauli_basis();
    let mut system = [0.0; 256];
    for m in 0..16 {
        let proj = p.projector(m);
        for (n, g) in basis.iter().enumerate() {
            // both Hermitian, so Tr[Pi G] = <Pi, G>_F is real
            system[m * 16 + n] = proj.inner(g).re;
        }
    }
    let coeffs = solve_real(&system, rates)?;
    let mut rho = ComplexMatrix::zeros(4, 4);
    for (c, g) in coeffs.iter().zip(&basis) {
        rho = &rho + &g.scale_real(*c);
    }
    let trace = rho.trace().re;
    if !(trace > 0.0) {
        return Err(Error::EmptyProjection("all rates vanish"));
    }
    Ok(rho.hermitian_part().scale_real(1.0 / trace))
}

/// Nearest physical state under eigenvalue truncation: negative
/// eigenvalues are zeroed from the bottom up and their total is spread
/// evenly over the rest, stopping once the shifted eigenvalue stays
/// non-negative. Physical inputs are returned unchanged.
pub fn project_to_physical(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let h = raw.hermitian_part();
    let trace = h.trace().re;
    if !(trace > 0.0) {
        return Ok(DensityMatrix::maximally_mixed());
    }
    let h = h.scale_real(1.0 / trace);
    let es = hermitian_eigensystem(&h)?;
    if es.values[3] >= 0.0 {
        return validate_density_matrix(&h);
    }

    let mut lambda = es.values.clone();
    let n = lambda.len();
    let mut deficit = 0.0;
    let mut i = n;
    while i > 0 {
        let remaining = i as f64;
        if lambda[i - 1] + deficit / remaining < 0.0 {
            deficit += lambda[i - 1];
            lambda[i - 1] = 0.0;
            i -= 1;
        } else {
            break;
        }
    }
    let share = deficit / i as f64;
    for l in lambda.iter_mut().take(i) {
        *l += share;
    }
    let mut projected = crate::linalg::Eigensystem { values: lambda, vectors: es.vectors };
    projected.values.iter_mut().for_each(|v| *v = v.max(0.0));
    let m = projected.reconstruct().hermitian_part();
    let tr = m.trace().re;
    Ok(DensityMatrix::new_unchecked(m.scale_real(1.0 / tr)))
}

/// Fidelity, concurrence and tangle of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub fidelity: f64,
    pub concurrence: f64,
    pub tangle: f64,
}

pub fn metrics(rho: &DensityMatrix, target: &[Complex64; 4]) -> Result<Metrics> {
    let c = concurrence(rho)?;
    Ok(Metrics { fidelity: fidelity_to_pure(rho, target)?, concurrence: c, tangle: c * c })
}

/// Inversion, physicality projection and metrics in one step.
pub fn reconstruct(p: &ProjectionCounts, target: &[Complex64; 4]) -> Result<(DensityMatrix, Metrics)> {
    let rho = project_to_physical(&linear_inversion(p)?)?;
    let m = metrics(&rho, target)?;
    Ok((rho, m))
}

/// Sample standard deviations of the metrics under Poisson resampling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSigmas {
    pub fidelity: f64,
    pub concurrence: f64,
    pub tangle: f64,
}

/// Resamples every count from `Poisson(count)` `n_runs` times and reports
/// the spread of the reconstructed metrics.
pub fn monte_carlo_errors(
    p: &ProjectionCounts,
    n_runs: usize,
    seed: u64,
    target: &[Complex64; 4],
) -> Result<MetricSigmas> {
    if n_runs < 2 {
        return Err(Error::OutOfRange { name: "n_runs", value: n_runs as f64 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_runs);
    for _ in 0..n_runs {
        let counts: Vec<u64> = p
            .entries
            .iter()
            .map(|e| match Poisson::new(e.count as f64) {
                Ok(d) => d.sample(&mut rng) as u64,
                Err(_) => 0,
            })
            .collect();
        let (_, m) = reconstruct(&p.with_counts(counts), target)?;
        samples.push(m);
    }
    let sd = |f: fn(&Metrics) -> f64| {
        let n = samples.len() as f64;
        let mean = samples.iter().map(f).sum::<f64>() / n;
        (samples.iter().map(|s| (f(s) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(MetricSigmas { fidelity: sd(|m| m.fidelity), concurrence: sd(|m| m.concurrence), tangle: sd(|m| m.tangle) })
}

/// Options for [`full_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub pair: PortPair,
    /// Zero disables the Monte Carlo error estimate.
    pub mc_runs: usize,
    pub seed: u64,
    /// Phase of the target `(|00> + e^{i phi}|11>)/sqrt(2)`.
    pub target_phase: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { pair: PortPair::default(), mc_runs: 100, seed: 1, target_phase: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    /// Linear-inversion estimate before the physicality projection.
    pub raw: ComplexMatrix,
    pub metrics: Metrics,
    pub sigmas: MetricSigmas,
    /// In the order time, X, Y.
    pub visibilities: [(Basis, VisibilityEstimate); 3],
    pub projections: ProjectionCounts,
}

/// Reconstruction, metrics, Monte Carlo errors and visibilities from the
/// four phase-setting tables.
pub fn full_report(tables: &[CoincidenceTable], opts: &ReportOptions) -> Result<TomographyResult> {
    let target = ideal_state(opts.target_phase);
    let projections = assemble_projections(tables, opts.pair)?;
    let raw = linear_inversion(&projections)?;
    let rho = project_to_physical(&raw)?;
    let metrics = metrics(&rho, &target)?;
    let sigmas = if opts.mc_runs >= 2 {
        monte_carlo_errors(&projections, opts.mc_runs, opts.seed, &target)?
    } else {
        MetricSigmas::default()
    };
    let selection = PortSelection::AllPorts { reference: opts.pair };
    let mut visibilities = [(Basis::Time, VisibilityEstimate { value: 0.0, sigma: 0.0 }); 3];
    for (slot, basis) in visibilities.iter_mut().zip(Basis::ALL) {
        *slot = (basis, visibility_from_counts(tables, basis, selection)?);
    }
    Ok(TomographyResult { rho, raw, metrics, sigmas, visibilities, projections })
}
