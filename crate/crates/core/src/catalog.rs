//! Reference potentials used throughout tests, the bundled corpus and docs.

use crate::potential::{MultiExponent, PolyPotential, C64};

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn unit(n: usize, j: usize, power: u32) -> MultiExponent {
    let mut e = vec![0; n];
    e[j] = power;
    MultiExponent::new(e)
}

/// `|z1|² + ... + |zn|²`.
pub fn ball(n: usize) -> PolyPotential {
    PolyPotential::from_terms(n, (0..n).map(|j| (unit(n, j, 1), unit(n, j, 1), real(1.0)))).unwrap()
}

/// `|z1|² + |z2|⁴`, weighted homogeneous with weights `(1, 1/2)`.
pub fn weighted_quartic() -> PolyPotential {
    PolyPotential::from_terms(2, [([1, 0], [1, 0], real(1.0)), ([0, 2], [0, 2], real(1.0))]).unwrap()
}

/// `(|z1|² + |z2|²)²` expanded.
pub fn ball_squared() -> PolyPotential {
    PolyPotential::from_terms(
        2,
        [([2, 0], [2, 0], real(1.0)), ([1, 1], [1, 1], real(2.0)), ([0, 2], [0, 2], real(1.0))],
    )
    .unwrap()
}

/// `|z1|⁴ + |z2|⁴`.
pub fn quartic_sum() -> PolyPotential {
    PolyPotential::from_terms(2, [([2, 0], [2, 0], real(1.0)), ([0, 2], [0, 2], real(1.0))]).unwrap()
}

/// `|z1|² + |z2|² + |z1|²|z2|²`: strictly plurisubharmonic but its logarithm
/// does not solve the homogeneous Monge-Ampère equation.
pub fn non_ma() -> PolyPotential {
    PolyPotential::from_terms(
        2,
        [([1, 0], [1, 0], real(1.0)), ([0, 1], [0, 1], real(1.0)), ([1, 1], [1, 1], real(1.0))],
    )
    .unwrap()
}

/// `|z1|⁴ + |z2|⁴ + ½(z1³z̄2 + z̄1³z2)`: homogeneous of degree 4 with
/// bidegree (3,1) and (1,3) components.
pub fn mixed_bidegree() -> PolyPotential {
    PolyPotential::from_terms(
        2,
        [
            ([2, 0], [2, 0], real(1.0)),
            ([0, 2], [0, 2], real(1.0)),
            ([3, 0], [0, 1], real(0.5)),
            ([0, 1], [3, 0], real(0.5)),
        ],
    )
    .unwrap()
}
