//! Polarization qubits and the six fiducial measurement states.
//!
//! A pure polarization state is parameterized by a zenith angle θ and an
//! azimuth angle φ,
//!
//! ```text
//! |ψ⟩ = cos θ |R⟩ + e^{iφ} sin θ |L⟩,
//! ```
//!
//! on the circular basis (|R⟩, |L⟩). That column order, |R⟩ first, is the
//! fixed convention everywhere in this crate: amplitude pairs, density-matrix
//! entries, and the dual-rail embedding all use it. Global phase is
//! quotiented out by making the |R⟩ amplitude real and non-negative whenever
//! it is nonzero (and the |L⟩ amplitude otherwise), which makes state
//! equality testable.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Pure polarization qubit as zenith/azimuth angles on the Poincaré sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationState {
    /// Zenith angle in radians; |R⟩ at 0, |L⟩ at π/2.
    pub theta: f64,
    /// Azimuth angle in radians, stored reduced to [0, 2π).
    pub phi: f64,
}

impl PolarizationState {
    /// New state with φ reduced modulo 2π. θ is used as given; the induced
    /// amplitude vector has unit norm for any real θ.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta,
            phi: phi.rem_euclid(TAU),
        }
    }

    /// Amplitudes (c_R, c_L) = (cos θ, e^{iφ} sin θ).
    pub fn amplitudes(&self) -> (C64, C64) {
        let c_r = C64::new(self.theta.cos(), 0.0);
        let c_l = C64::from_polar(self.theta.sin(), self.phi);
        (c_r, c_l)
    }

    /// Amplitudes with the global phase fixed: c_R real ≥ 0 when c_R ≠ 0,
    /// otherwise c_L real ≥ 0.
    pub fn canonical_amplitudes(&self) -> (C64, C64) {
        let (c_r, c_l) = self.amplitudes();
        canonicalize(c_r, c_l)
    }

    /// Equality up to global phase, within `tol` on canonical amplitudes.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let (ar, al) = self.canonical_amplitudes();
        let (br, bl) = other.canonical_amplitudes();
        (ar - br).norm() <= tol && (al - bl).norm() <= tol
    }
}

fn canonicalize(c_r: C64, c_l: C64) -> (C64, C64) {
    let pivot = if c_r.norm() > 1e-15 { c_r } else { c_l };
    if pivot.norm() == 0.0 {
        return (c_r, c_l);
    }
    let phase = pivot.conj() / pivot.norm();
    (c_r * phase, c_l * phase)
}

/// Inner product ⟨a|b⟩ of two pure polarization states.
pub fn inner_product(a: &PolarizationState, b: &PolarizationState) -> C64 {
    let (ar, al) = a.amplitudes();
    let (br, bl) = b.amplitudes();
    ar.conj() * br + al.conj() * bl
}

/// The three mutually unbiased analyzer bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Linear basis H-V, H = (|L⟩+|R⟩)/√2, V = (|L⟩−|R⟩)/√2.
    #[serde(rename = "HV")]
    Hv,
    /// Circular basis R-L.
    #[serde(rename = "LR")]
    Lr,
    /// Diagonal basis S-T, S = (|L⟩+i|R⟩)/√2, T = (|L⟩−i|R⟩)/√2.
    #[serde(rename = "ST")]
    St,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Hv, Basis::St, Basis::Lr];

    /// The two analyzer output ports as (plus, minus), where "plus" is the
    /// state carrying the +1 value of this basis's Stokes component.
    pub fn ports(&self) -> (FiducialState, FiducialState) {
        match self {
            Basis::Hv => (FiducialState::H, FiducialState::V),
            Basis::Lr => (FiducialState::R, FiducialState::L),
            Basis::St => (FiducialState::S, FiducialState::T),
        }
    }

    /// Index of the Stokes component this basis measures: s1, s2 or s3.
    pub fn stokes_axis(&self) -> usize {
        match self {
            Basis::Hv => 0,
            Basis::St => 1,
            Basis::Lr => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Basis::Hv => "HV",
            Basis::Lr => "LR",
            Basis::St => "ST",
        }
    }

    pub fn from_label(s: &str) -> Option<Basis> {
        match s {
            "HV" => Some(Basis::Hv),
            "LR" => Some(Basis::Lr),
            "ST" => Some(Basis::St),
            _ => None,
        }
    }
}

/// The six fiducial states spanning the three mutually unbiased bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FiducialState {
    H,
    V,
    L,
    R,
    S,
    T,
}

impl FiducialState {
    pub const ALL: [FiducialState; 6] = [
        FiducialState::H,
        FiducialState::V,
        FiducialState::L,
        FiducialState::R,
        FiducialState::S,
        FiducialState::T,
    ];

    /// Exact amplitudes (c_R, c_L), avoiding trigonometric roundoff.
    pub fn amplitudes(&self) -> (C64, C64) {
        let r = FRAC_1_SQRT_2;
        match self {
            FiducialState::H => (C64::new(r, 0.0), C64::new(r, 0.0)),
            FiducialState::V => (C64::new(-r, 0.0), C64::new(r, 0.0)),
            FiducialState::L => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            FiducialState::R => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            FiducialState::S => (C64::new(0.0, r), C64::new(r, 0.0)),
            FiducialState::T => (C64::new(0.0, -r), C64::new(r, 0.0)),
        }
    }

    /// The same state in (θ, φ) form.
    pub fn state(&self) -> PolarizationState {
        match self {
            FiducialState::H => PolarizationState::new(PI / 4.0, 0.0),
            FiducialState::V => PolarizationState::new(PI / 4.0, PI),
            FiducialState::L => PolarizationState::new(PI / 2.0, 0.0),
            FiducialState::R => PolarizationState::new(0.0, 0.0),
            FiducialState::S => PolarizationState::new(PI / 4.0, 3.0 * PI / 2.0),
            FiducialState::T => PolarizationState::new(PI / 4.0, PI / 2.0),
        }
    }

    /// Basis this state belongs to.
    pub fn basis(&self) -> Basis {
        match self {
            FiducialState::H | FiducialState::V => Basis::Hv,
            FiducialState::L | FiducialState::R => Basis::Lr,
            FiducialState::S | FiducialState::T => Basis::St,
        }
    }

    /// Unit Bloch vector (s1, s2, s3) of the state.
    pub fn bloch(&self) -> [f64; 3] {
        match self {
            FiducialState::H => [1.0, 0.0, 0.0],
            FiducialState::V => [-1.0, 0.0, 0.0],
            FiducialState::S => [0.0, 1.0, 0.0],
            FiducialState::T => [0.0, -1.0, 0.0],
            FiducialState::R => [0.0, 0.0, 1.0],
            FiducialState::L => [0.0, 0.0, -1.0],
        }
    }

    /// Partner state under the exchange of |R⟩ and |L⟩: H and V are fixed
    /// (up to phase), R↔L, S↔T.
    pub fn circular_swapped(&self) -> FiducialState {
        match self {
            FiducialState::H => FiducialState::H,
            FiducialState::V => FiducialState::V,
            FiducialState::L => FiducialState::R,
            FiducialState::R => FiducialState::L,
            FiducialState::S => FiducialState::T,
            FiducialState::T => FiducialState::S,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FiducialState::H => "H",
            FiducialState::V => "V",
            FiducialState::L => "L",
            FiducialState::R => "R",
            FiducialState::S => "S",
            FiducialState::T => "T",
        }
    }

    pub fn from_label(s: &str) -> Option<FiducialState> {
        match s {
            "H" => Some(FiducialState::H),
            "V" => Some(FiducialState::V),
            "L" => Some(FiducialState::L),
            "R" => Some(FiducialState::R),
            "S" => Some(FiducialState::S),
            "T" => Some(FiducialState::T),
            _ => None,
        }
    }
}

/// Exchange the |R⟩ and |L⟩ amplitudes of a pure state, returning the result
/// in canonical (θ, φ) form.
pub fn circular_swap(state: &PolarizationState) -> PolarizationState {
    let (c_r, c_l) = state.amplitudes();
    let (new_r, new_l) = canonicalize(c_l, c_r);
    // new_r is real and non-negative by construction.
    let theta = new_r.re.clamp(-1.0, 1.0).acos();
    let phi = if new_l.norm() > 1e-15 {
        new_l.arg()
    } else {
        0.0
    };
    PolarizationState::new(theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn amplitudes_of_named_points() {
        // theta = 0 is |R> regardless of phi.
        let (cr, cl) = PolarizationState::new(0.0, 1.234).amplitudes();
        assert!((cr - C64::new(1.0, 0.0)).norm() < TOL);
        assert!(cl.norm() < TOL);

        // theta = pi/4, phi = 0 is H.
        let (cr, cl) = PolarizationState::new(PI / 4.0, 0.0).amplitudes();
        assert!((cr.re - FRAC_1_SQRT_2).abs() < TOL);
        assert!((cl.re - FRAC_1_SQRT_2).abs() < TOL);
        assert!(cr.im.abs() < TOL && cl.im.abs() < TOL);

        // theta = pi/2, phi = pi/2 is |L> with phase i.
        let (cr, cl) = PolarizationState::new(PI / 2.0, PI / 2.0).amplitudes();
        assert!(cr.norm() < TOL);
        assert!((cl - C64::new(0.0, 1.0)).norm() < TOL);
    }

    #[test]
    fn amplitudes_are_normalized() {
        for i in 0..40 {
            let theta = i as f64 * 0.37;
            let phi = i as f64 * 1.91;
            let (cr, cl) = PolarizationState::new(theta, phi).amplitudes();
            assert!((cr.norm_sqr() + cl.norm_sqr() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn fiducial_angles_match_exact_amplitudes() {
        for f in FiducialState::ALL {
            let (er, el) = f.amplitudes();
            let (cr, cl) = f.state().amplitudes();
            let (er, el) = super::canonicalize(er, el);
            let (cr, cl) = super::canonicalize(cr, cl);
            assert!((er - cr).norm() < 1e-15, "{f:?}");
            assert!((el - cl).norm() < 1e-15, "{f:?}");
        }
    }

    #[test]
    fn basis_partners_are_orthogonal() {
        for basis in Basis::ALL {
            let (plus, minus) = basis.ports();
            let ip = inner_product(&plus.state(), &minus.state());
            assert!(ip.norm() < TOL, "{basis:?}: |<+|->'| = {}", ip.norm());
        }
    }

    #[test]
    fn bases_are_mutually_unbiased() {
        for a in FiducialState::ALL {
            for b in FiducialState::ALL {
                if a.basis() == b.basis() {
                    continue;
                }
                let p = inner_product(&a.state(), &b.state()).norm_sqr();
                assert!((p - 0.5).abs() < TOL, "|<{a:?}|{b:?}>|^2 = {p}");
            }
        }
    }

    #[test]
    fn circular_swap_maps_fiducials_to_partners() {
        for f in FiducialState::ALL {
            let swapped = circular_swap(&f.state());
            assert!(
                swapped.approx_eq(&f.circular_swapped().state(), 1e-12),
                "{f:?} -> {swapped:?}"
            );
        }
    }

    #[test]
    fn circular_swap_is_an_involution() {
        for i in 0..25 {
            let state = PolarizationState::new(0.1 + i as f64 * 0.11, i as f64 * 0.73);
            let back = circular_swap(&circular_swap(&state));
            assert!(back.approx_eq(&state, 1e-12), "{state:?} -> {back:?}");
        }
    }
}
