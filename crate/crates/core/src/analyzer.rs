//! Unbalanced analyzing interferometers as three-slot, two-port POVMs.
//!
//! Each arm has two output ports and three arrival slots. Slots 0 and 2 are
//! the early/short and late/long paths (time-basis projections with weight
//! 1/4), slot 1 is the interfering middle peak with weight 1/2 onto
//! `(|0> + s e^{i phi}|1>)/sqrt(2)`, where `s = +1` for port 1 and `-1` for
//! port 2.
//!
//! With this sign convention the middle-middle rate of ports `(a, b)` is
//! proportional to `1 + s_a s_b V cos(phi_xx + phi_x - phi_p)`, which is the
//! two-photon fringe `1 - i j V cos(..)` with the XX ports relabeled
//! (`i = -s_a`, `j = s_b`).

use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::{Euclid, Float};

use num_complex::Complex64;

use crate::linalg::{kron, ComplexMatrix};
use crate::state::DensityMatrix;

/// Interferometer output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    One,
    Two,
}

impl Port {
    pub const BOTH: [Port; 2] = [Port::One, Port::Two];

    /// 1 or 2.
    pub fn number(self) -> u8 {
        match self {
            Port::One => 1,
            Port::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Port::One),
            2 => Some(Port::Two),
            _ => None,
        }
    }

    /// Sign of the `|1>` amplitude in the middle-slot projector.
    pub fn sign(self) -> f64 {
        match self {
            Port::One => 1.0,
            Port::Two => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Port::One => Port::Two,
            Port::Two => Port::One,
        }
    }

    fn index(self) -> usize {
        (self.number() - 1) as usize
    }
}

/// Phase plate settings of the two analyzing interferometers, stored mod 2pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerPhase {
    phi_xx: f64,
    phi_x: f64,
}

impl AnalyzerPhase {
    pub fn new(phi_xx: f64, phi_x: f64) -> Self {
        Self { phi_xx: Euclid::rem_euclid(&phi_xx, &TAU), phi_x: Euclid::rem_euclid(&phi_x, &TAU) }
    }

    pub fn phi_xx(&self) -> f64 {
        self.phi_xx
    }

    pub fn phi_x(&self) -> f64 {
        self.phi_x
    }

    /// `phi_xx + phi_x` mod 2pi.
    pub fn sum(&self) -> f64 {
        Euclid::rem_euclid(&(self.phi_xx + self.phi_x), &TAU)
    }

    /// The four tomography settings `(0,0), (pi/2,0), (0,pi/2), (pi/2,pi/2)`.
    pub fn tomography_settings() -> [AnalyzerPhase; 4] {
        use core::f64::consts::FRAC_PI_2;
        [
            AnalyzerPhase::new(0.0, 0.0),
            AnalyzerPhase::new(FRAC_PI_2, 0.0),
            AnalyzerPhase::new(0.0, FRAC_PI_2),
            AnalyzerPhase::new(FRAC_PI_2, FRAC_PI_2),
        ]
    }

    /// Whole-degree label, e.g. `(90, 0)`.
    pub fn degrees(&self) -> (i64, i64) {
        let d = |x: f64| ((x.to_degrees()).round() as i64).rem_euclid(360);
        (d(self.phi_xx), d(self.phi_x))
    }

    /// Equal up to `tol` radians on the circle.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        angle_close(self.phi_xx, other.phi_xx, tol) && angle_close(self.phi_x, other.phi_x, tol)
    }
}

impl Default for AnalyzerPhase {
    fn default() -> Self {
        Self::new(0.0, 0.0)
    }
}

/// Circular distance below `tol`.
pub fn angle_close(a: f64, b: f64, tol: f64) -> bool {
    let d = Euclid::rem_euclid(&(a - b), &TAU);
    d.min(TAU - d) <= tol
}

/// One of the 36 joint (port, slot) outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeKey {
    pub port_xx: Port,
    pub slot_xx: u8,
    pub port_x: Port,
    pub slot_x: u8,
}

impl OutcomeKey {
    pub const COUNT: usize = 36;

    pub fn new(port_xx: Port, slot_xx: u8, port_x: Port, slot_x: u8) -> Self {
        assert!(slot_xx < 3 && slot_x < 3, "slot out of range");
        Self { port_xx, slot_xx, port_x, slot_x }
    }

    pub fn index(&self) -> usize {
        ((self.port_xx.index() * 3 + self.slot_xx as usize) * 2 + self.port_x.index()) * 3 + self.slot_x as usize
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < Self::COUNT);
        let slot_x = (i % 3) as u8;
        let port_x = Port::BOTH[(i / 3) % 2];
        let slot_xx = ((i / 6) % 3) as u8;
        let port_xx = Port::BOTH[i / 18];
        Self { port_xx, slot_xx, port_x, slot_x }
    }

    pub fn all() -> impl Iterator<Item = OutcomeKey> {
        (0..Self::COUNT).map(Self::from_index)
    }
}

/// POVM element of one arm for the given port and slot.
pub fn povm_element(port: Port, slot: u8, phi: f64) -> ComplexMatrix {
    match slot {
        0 => ComplexMatrix::diag(&[0.25, 0.0]),
        2 => ComplexMatrix::diag(&[0.0, 0.25]),
        1 => {
            let h = core::f64::consts::FRAC_1_SQRT_2;
            let chi = [Complex64::new(h, 0.0), Complex64::from_polar(h * port.sign(), phi)];
            ComplexMatrix::outer(&chi).scale_real(0.5)
        }
        _ => panic!("slot {slot} out of range"),
    }
}

/// `E_xx (x) E_x` for a joint outcome.
pub fn joint_povm_element(key: OutcomeKey, phases: AnalyzerPhase) -> ComplexMatrix {
    kron(&povm_element(key.port_xx, key.slot_xx, phases.phi_xx), &povm_element(key.port_x, key.slot_x, phases.phi_x))
}

/// Probabilities of the 36 joint outcomes, indexed by [`OutcomeKey::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution([f64; OutcomeKey::COUNT]);

impl JointDistribution {
    pub fn get(&self, key: OutcomeKey) -> f64 {
        self.0[key.index()]
    }

    pub fn probabilities(&self) -> &[f64; OutcomeKey::COUNT] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeKey, f64)> + '_ {
        self.0.iter().enumerate().map(|(i, &p)| (OutcomeKey::from_index(i), p))
    }
}

/// `P(k) = Tr[rho (E_xx (x) E_x)]` for all 36 outcomes.
pub fn joint_distribution(rho: &DensityMatrix, phases: AnalyzerPhase) -> JointDistribution {
    let mut probs = [0.0; OutcomeKey::COUNT];
    for key in OutcomeKey::all() {
        let e = joint_povm_element(key, phases);
        // Tr[rho E] = <E^dagger, rho>_F with E Hermitian
        probs[key.index()] = e.inner(rho.matrix()).re;
    }
    JointDistribution(probs)
}

/// Two-photon fringe `1 - i j V cos(phase_sum)` with `i, j = +-1`.
pub fn franson_rate(i: i8, j: i8, phase_sum: f64, visibility: f64) -> f64 {
    1.0 - f64::from(i) * f64::from(j) * visibility * phase_sum.cos()
}

/// Model visibilities in the time, X and Y bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibilities {
    pub time: f64,
    pub x: f64,
    pub y: f64,
}

/// Middle-middle probability at both arm phases `phi`, for XX port 1 and
/// X port `port_x`.
fn middle_middle(rho: &DensityMatrix, phi: f64, port_x: Port) -> f64 {
    joint_distribution(rho, AnalyzerPhase::new(phi, phi)).get(OutcomeKey::new(Port::One, 1, port_x, 1))
}

fn contrast(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi + lo == 0.0 {
        0.0
    } else {
        (hi - lo) / (hi + lo)
    }
}

/// Time-basis visibility from the populations; energy-basis visibilities as
/// the same-port versus cross-port contrast of middle-middle rates with both
/// analyzers at 0 (X) or at pi/2 (Y).
pub fn predicted_visibilities(rho: &DensityMatrix) -> Visibilities {
    use core::f64::consts::FRAC_PI_2;
    let p = rho.populations();
    let energy = |phi| contrast(middle_middle(rho, phi, Port::One), middle_middle(rho, phi, Port::Two));
    Visibilities { time: (p[0] + p[3]) - (p[1] + p[2]), x: energy(0.0), y: energy(FRAC_PI_2) }
}

/// Sum of all six POVM elements of one arm.
pub fn arm_completeness(phi: f64) -> ComplexMatrix {
    let mut total = ComplexMatrix::zeros(2, 2);
    for port in Port::BOTH {
        for slot in 0..3 {
            total = &total + &povm_element(port, slot, phi);
        }
    }
    total
}
