//! Weighted homogeneity `ρ(e^{c_1λ}z^1, …, e^{c_nλ}z^n) = |e^λ|² ρ(z)`.
//!
//! For all complex `λ` this holds exactly when every monomial `z^α z̄^β`
//! satisfies both `Σ c_j α_j = 1` and `Σ c_j β_j = 1`, so weights come from a
//! linear system with one row per distinct exponent vector.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gradient::{GradientField, RealFieldKind};
use crate::integrate::{flow, Integrator};
use crate::potential::{CPoint, MultiExponent, PolyPotential, C64};

/// Relative threshold for deciding that the weight system is consistent.
const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Config(format!("weights must be positive, got {weights:?}")));
        }
        Ok(Self(weights))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `(e^{c_1λ} z^1, …, e^{c_nλ} z^n)`
    pub fn act(&self, lambda: C64, z: &CPoint) -> CPoint {
        CPoint::new(z.coords().iter().zip(&self.0).map(|(zj, cj)| zj * (lambda * cj).exp()).collect())
    }

    /// `(c_1 z^1, …, c_n z^n)`
    pub fn linear_field(&self, z: &CPoint) -> Vec<C64> {
        z.coords().iter().zip(&self.0).map(|(zj, cj)| zj * cj).collect()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// The row `Σ_j e_j c_j = 1` for one exponent vector `e`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeightEquation(pub MultiExponent);

impl fmt::Display for WeightEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .0
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(j, &e)| if e == 1 { format!("c{}", j + 1) } else { format!("{e}c{}", j + 1) })
            .collect();
        if terms.is_empty() {
            write!(f, "0=1")
        } else {
            write!(f, "{}=1", terms.join("+"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightOutcome {
    Found {
        weights: WeightVector,
        /// The system has rank `n`.
        unique: bool,
        residual: f64,
    },
    /// The system is consistent but its (minimum-norm) solution has a
    /// non-positive entry.
    NotPositive {
        weights: Vec<f64>,
        unique: bool,
        residual: f64,
    },
    Infeasible {
        /// A minimal inconsistent subset of the equations.
        inconsistent: Vec<WeightEquation>,
        residual: f64,
    },
}

impl WeightOutcome {
    pub fn weights(&self) -> Option<&WeightVector> {
        match self {
            WeightOutcome::Found { weights, .. } => Some(weights),
            _ => None,
        }
    }
}

/// Distinct exponent vectors `α` and `β` over all stored monomials.
pub fn weight_equations(p: &PolyPotential) -> Vec<WeightEquation> {
    let set: BTreeSet<&MultiExponent> = p.terms().flat_map(|(a, b, _)| [a, b]).collect();
    set.into_iter().cloned().map(WeightEquation).collect()
}

struct LsqSolution {
    c: Vec<f64>,
    residual: f64,
    rank: usize,
}

fn solve_rows(rows: &[&WeightEquation], n: usize) -> LsqSolution {
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0.entries()[j] as f64);
    let ones = DVector::from_element(rows.len(), 1.0);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-12 * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let c = if rank == 0 {
        DVector::zeros(n)
    } else {
        svd.solve(&ones, eps).expect("u and v were computed")
    };
    let residual = (&a * &c - &ones).norm();
    LsqSolution {
        c: c.iter().copied().collect(),
        residual,
        rank,
    }
}

fn consistent(sol: &LsqSolution, rows: usize) -> bool {
    sol.residual <= CONSISTENCY_TOL * (rows as f64).sqrt().max(1.0)
}

/// Solves the weight system. Unique solutions are exact up to roundoff;
/// underdetermined systems return the minimum-norm solution.
pub fn find_weights(p: &PolyPotential) -> WeightOutcome {
    let n = p.dim();
    let eqs = weight_equations(p);
    let all: Vec<&WeightEquation> = eqs.iter().collect();
    let sol = solve_rows(&all, n);
    if !consistent(&sol, all.len()) {
        // deletion filter: drop each row whose removal keeps the rest inconsistent
        let mut keep = all.clone();
        let mut i = 0;
        while i < keep.len() {
            let mut trial = keep.clone();
            trial.remove(i);
            if !trial.is_empty() && !consistent(&solve_rows(&trial, n), trial.len()) {
                keep = trial;
            } else {
                i += 1;
            }
        }
        keep.sort_by_key(|e| (e.0.degree(), std::cmp::Reverse(e.0.clone())));
        return WeightOutcome::Infeasible {
            inconsistent: keep.into_iter().cloned().collect(),
            residual: sol.residual,
        };
    }
    let unique = sol.rank == n;
    match WeightVector::new(sol.c.clone()) {
        Ok(weights) => WeightOutcome::Found {
            weights,
            unique,
            residual: sol.residual,
        },
        Err(_) => WeightOutcome::NotPositive {
            weights: sol.c,
            unique,
            residual: sol.residual,
        },
    }
}

/// `max |ρ(e^{cλ}·z) − |e^λ|² ρ(z)| / ρ(z)` over samples and `λ`s.
pub fn verify_weights(p: &PolyPotential, c: &WeightVector, z_samples: &[CPoint], lambdas: &[C64]) -> Result<f64> {
    if c.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: c.dim(),
        });
    }
    let mut worst: f64 = 0.0;
    for z in z_samples {
        let rho = p.evaluate(z)?;
        if rho <= 0.0 {
            return Err(Error::OutsideDomain { rho });
        }
        for &l in lambdas {
            let moved = p.evaluate(&c.act(l, z))?;
            worst = worst.max((moved - l.exp().norm_sqr() * rho).abs() / rho);
        }
    }
    Ok(worst)
}

/// `max ‖Z(z) − (c_j z^j)‖` with `Z` the extended gradient.
pub fn linear_field_agreement(field: &GradientField, c: &WeightVector, z_samples: &[CPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in z_samples {
        let s = field.sample(z)?;
        let d = s
            .z
            .iter()
            .zip(c.linear_field(z))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Flows each sample of `{ρ = r1}` along X for time `log(r2/r1)` and returns
/// `max |ρ(end) − r2| / r2`.
pub fn flow_level_map_check(
    field: &GradientField,
    integrator: &dyn Integrator,
    r1: f64,
    r2: f64,
    boundary_samples: &[CPoint],
    step: f64,
) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::Config(format!("levels must be positive, got {r1} and {r2}")));
    }
    let dt = (r2 / r1).ln();
    let rhs = field.flow_rhs(RealFieldKind::X);
    let mut worst: f64 = 0.0;
    for (i, z) in boundary_samples.iter().enumerate() {
        let rho = field.jet().rho(z)?;
        if (rho - r1).abs() > 1e-8 * r1 {
            return Err(Error::Config(format!("sample {i} has rho = {rho}, not on the level {r1}")));
        }
        let end = flow(integrator, &rhs, z.coords(), dt, step)?;
        let rho_end = field.jet().rho(&CPoint::new(end))?;
        worst = worst.max((rho_end - r2).abs() / r2);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::integrate::Rk4;
    use crate::sampling::{default_lambdas, Sampler};

    fn found(p: &PolyPotential) -> (Vec<f64>, bool) {
        match find_weights(p) {
            WeightOutcome::Found { weights, unique, .. } => (weights.entries().to_vec(), unique),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weight_examples() {
        let (c, unique) = found(&catalog::weighted_quartic());
        assert!(unique);
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);

        let (c, unique) = found(&catalog::ball_squared());
        assert!(unique);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12);

        let (c, _) = found(&catalog::ball(3));
        assert!(c.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn non_ma_is_infeasible_with_the_triple() {
        match find_weights(&catalog::non_ma()) {
            WeightOutcome::Infeasible { inconsistent, .. } => {
                let shown: Vec<String> = inconsistent.iter().map(|e| e.to_string()).collect();
                assert_eq!(shown, vec!["c1=1", "c2=1", "c1+c2=1"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_bidegree_is_infeasible() {
        // z1³ z̄2 needs 3c1 = 1 and c2 = 1, while |z1|⁴ needs 2c1 = 1
        assert!(matches!(find_weights(&catalog::mixed_bidegree()), WeightOutcome::Infeasible { .. }));
    }

    #[test]
    fn constant_term_is_its_own_certificate() {
        let p: PolyPotential = "n = 1\na=[1] b=[1] c=1\na=[0] b=[0] c=1\n".parse().unwrap();
        match find_weights(&p) {
            WeightOutcome::Infeasible { inconsistent, .. } => {
                assert_eq!(inconsistent.len(), 1);
                assert_eq!(inconsistent[0].to_string(), "0=1");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn underdetermined_and_nonpositive_cases() {
        // |z1 z2|² only constrains c1 + c2 = 1; minimum norm gives (½, ½)
        let p: PolyPotential = "n = 2\na=[1,1] b=[1,1] c=1\n".parse().unwrap();
        match find_weights(&p) {
            WeightOutcome::Found { weights, unique, .. } => {
                assert!(!unique);
                assert!((weights.entries()[0] - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // |z1|² alone leaves c2 free; minimum norm sets it to 0
        let p: PolyPotential = "n = 2\na=[1,0] b=[1,0] c=1\n".parse().unwrap();
        assert!(matches!(
            find_weights(&p),
            WeightOutcome::NotPositive { unique: false, .. }
        ));
    }

    #[test]
    fn verify_weights_examples() {
        let w = catalog::weighted_quartic();
        let c = WeightVector::new(vec![1.0, 0.5]).unwrap();
        let zs = Sampler::new(2).uniform_box_in_domain(&w, 1.0, 50);
        let ls = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 1.0)];
        assert!(verify_weights(&w, &c, &zs, &ls).unwrap() < 1e-10);

        let ball = catalog::ball(2);
        let one = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert!(verify_weights(&ball, &one, &zs, &default_lambdas()).unwrap() < 1e-12);

        let bad = catalog::non_ma();
        let r = verify_weights(&bad, &one, &[CPoint::real(&[1.0, 1.0])], &[C64::new(1.0, 0.0)]).unwrap();
        let e2 = 1f64.exp().powi(2);
        assert!((r - (e2 * e2 - e2) / 3.0).abs() < 1e-12);
        assert!(r > 0.1);
    }

    #[test]
    fn imaginary_lambda_catches_mixed_terms() {
        // Re-only λ accepts weights satisfying Σc(α+β) = 2 per term
        let p = catalog::mixed_bidegree();
        let c = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let zs = vec![CPoint::from_parts(&[(0.6, 0.2), (0.3, -0.5)])];
        assert!(verify_weights(&p, &c, &zs, &[C64::new(1.0, 0.0), C64::new(-0.5, 0.0)]).unwrap() < 1e-12);
        assert!(verify_weights(&p, &c, &zs, &[C64::new(0.0, 1.0)]).unwrap() > 1e-3);
    }

    #[test]
    fn weight_soundness_on_catalog() {
        let mut sampler = Sampler::new(5);
        for p in [
            catalog::ball(2),
            catalog::ball(3),
            catalog::weighted_quartic(),
            catalog::ball_squared(),
            catalog::quartic_sum(),
        ] {
            let c = find_weights(&p).weights().cloned().unwrap();
            let zs = sampler.uniform_box_in_domain(&p, 1.0, 100);
            assert!(verify_weights(&p, &c, &zs, &default_lambdas()).unwrap() < 1e-9);
            let field = GradientField::extended(&p);
            assert!(linear_field_agreement(&field, &c, &zs).unwrap() < 1e-8);
            for z in zs.iter().filter(|z| p.evaluate(z).unwrap() > 0.1) {
                assert!(field.jet().ma_residual(z).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_field_examples() {
        let w = catalog::weighted_quartic();
        let zs = Sampler::new(12).shell(2, 0.5, 1.5, 100);
        let c = WeightVector::new(vec![1.0, 0.5]).unwrap();
        assert!(linear_field_agreement(&GradientField::extended(&w), &c, &zs).unwrap() < 1e-9);

        let b = catalog::ball_squared();
        let half = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert!(linear_field_agreement(&GradientField::extended(&b), &half, &zs).unwrap() < 1e-9);

        let one = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert!(linear_field_agreement(&GradientField::extended(&catalog::ball(2)), &one, &zs).unwrap() < 1e-12);
    }

    #[test]
    fn level_map_examples() {
        let ball = catalog::ball(2);
        let mut sampler = Sampler::new(9);
        let unit = sampler.on_level_set(&ball, 1.0, 20).unwrap();
        let f = GradientField::extended(&ball);
        assert!(flow_level_map_check(&f, &Rk4, 1.0, 1f64.exp(), &unit, 1e-3).unwrap() < 1e-6);
        assert!(flow_level_map_check(&f, &Rk4, 1.0, 1.0, &unit, 1e-3).unwrap() < 1e-12);

        let w = catalog::weighted_quartic();
        let pts = sampler.on_level_set(&w, 1.0, 20).unwrap();
        let f = GradientField::extended(&w);
        assert!(flow_level_map_check(&f, &Rk4, 1.0, 2.0, &pts, 1e-3).unwrap() < 1e-5);

        let off = [CPoint::real(&[0.5, 0.0])];
        assert!(flow_level_map_check(&f, &Rk4, 1.0, 2.0, &off, 1e-3).is_err());
    }

    #[test]
    fn level_map_fails_for_non_ma() {
        let bad = catalog::non_ma();
        let pts = Sampler::new(10).on_level_set(&bad, 1.0, 20).unwrap();
        let f = GradientField::extended(&bad);
        assert!(flow_level_map_check(&f, &Rk4, 1.0, 2.0, &pts, 1e-3).unwrap() > 1e-3);
    }

    #[test]
    fn weights_display() {
        let c = WeightVector::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(c.to_string(), "(1, 0.5)");
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert_eq!(WeightEquation(MultiExponent::from([0, 2])).to_string(), "2c2=1");
    }
}
