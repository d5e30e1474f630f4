//! Density-matrix states, their probability valuations, and truth sieves.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::contexts::{AtomSet, ContextPoset, Direction, Sieve};
use crate::linalg::{trace_product, HermitianOp, LinalgError, Mat, ProjectionOp};
use crate::logic::{Subobject, Variant};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("density matrix has trace {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("state vector is zero")]
    ZeroVector,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A state `ψ(a) = tr(ρa)` given by a density matrix.
#[derive(Clone, Debug)]
pub struct State {
    rho: Mat,
}

impl State {
    pub fn new(rho: Mat) -> Result<State, StateError> {
        let h = HermitianOp::new(rho)?;
        let tol = Tolerances::global();
        let tr = h.matrix().trace().re;
        if (tr - 1.0).abs() > tol.recon {
            return Err(StateError::BadTrace(tr));
        }
        let min = h.spectrum().min();
        if min < -tol.eig_abs(1.0) {
            return Err(StateError::NotPositive(min));
        }
        Ok(State {
            rho: h.into_matrix(),
        })
    }

    /// Vector state `|v⟩⟨v|`, normalised.
    pub fn pure(v: &[num_complex::Complex64]) -> Result<State, StateError> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(StateError::ZeroVector);
        }
        Ok(State {
            rho: ProjectionOp::onto_vector(v).matrix().clone(),
        })
    }

    /// `I/n`.
    pub fn maximally_mixed(n: usize) -> State {
        State {
            rho: Mat::identity(n, n).scale(1.0 / n as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &Mat {
        &self.rho
    }

    /// `ψ(a) = tr(ρa)`.
    pub fn expect(&self, a: &Mat) -> f64 {
        trace_product(&self.rho, a)
    }

    pub fn prob(&self, p: &ProjectionOp) -> f64 {
        self.expect(p.matrix())
    }
}

/// Values of a valuation at a stage: one number per context of `↓C`
/// (contravariant) or `↑C` (covariant), in canonical order.
#[derive(Clone, Debug, Serialize)]
pub struct ValuationValue {
    pub base: usize,
    pub variant: Variant,
    pub values: Vec<(usize, f64)>,
}

impl ValuationValue {
    pub fn get(&self, c: usize) -> Option<f64> {
        self.values.iter().find(|(d, _)| *d == c).map(|(_, v)| *v)
    }

    /// Order-reversing on `↓C` (contravariant) or order-preserving on `↑C`
    /// (covariant), within the probability tolerance.
    pub fn is_monotone(&self, poset: &ContextPoset) -> bool {
        let tol = Tolerances::global().prob;
        self.values.iter().all(|&(d, vd)| {
            self.values.iter().all(|&(c, vc)| {
                !poset.leq(d, c)
                    || match self.variant {
                        Variant::Contravariant => vd >= vc - tol,
                        Variant::Covariant => vd <= vc + tol,
                    }
            })
        })
    }
}

/// `μ_ψ(S)` at stage `C`.
pub fn valuation(psi: &State, s: &Subobject<'_>, c: usize) -> ValuationValue {
    let poset = s.poset();
    let stages = match s.variant() {
        Variant::Contravariant => poset.down_set(c),
        Variant::Covariant => poset.up_set(c),
    };
    ValuationValue {
        base: c,
        variant: s.variant(),
        values: stages
            .into_iter()
            .map(|d| (d, psi.prob(&s.projection_at(d))))
            .collect(),
    }
}

/// `{C : ψ(p_{S_C}) ≥ x}`.
pub fn truth_sieve(psi: &State, s: &Subobject<'_>, x: f64) -> Sieve {
    let tol = Tolerances::global().prob;
    let members = (0..s.poset().len())
        .map(|c| psi.prob(&s.projection_at(c)) >= x - tol)
        .collect();
    let direction = match s.variant() {
        Variant::Contravariant => Direction::Down,
        Variant::Covariant => Direction::Up,
    };
    Sieve::from_members(members, direction)
}

/// Failures found by [`check_valuation_axioms`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValuationReport {
    pub trials: usize,
    pub failures: Vec<String>,
}

impl ValuationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random valid subobject: a sparse random family, closed up.
pub fn random_subobject<'p, R: Rng>(poset: &'p ContextPoset, variant: Variant, density: f64, rng: &mut R) -> Subobject<'p> {
    let family = poset
        .contexts()
        .iter()
        .map(|c| AtomSet::from_indices((0..c.len()).filter(|_| rng.random::<f64>() < density)))
        .collect();
    Subobject::closure_of(poset, variant, family)
}

/// Monotonicity, strictness, modularity, and continuity along finite chains,
/// checked stagewise on random pairs of subobjects.
pub fn check_valuation_axioms<R: Rng>(
    psi: &State,
    poset: &ContextPoset,
    variant: Variant,
    trials: usize,
    rng: &mut R,
) -> ValuationReport {
    let tol = Tolerances::global().prob;
    let mut report = ValuationReport {
        trials,
        failures: Vec::new(),
    };
    let mu = |s: &Subobject<'_>, d: usize| psi.prob(&s.projection_at(d));
    let top = Subobject::top(poset, variant);
    let bot = Subobject::bottom(poset, variant);
    for d in 0..poset.len() {
        if (mu(&top, d) - 1.0).abs() > tol || mu(&bot, d).abs() > tol {
            report
                .failures
                .push(format!("strictness fails at {}", poset.label(d)));
        }
    }
    for t in 0..trials {
        let density = 0.15 + 0.5 * rng.random::<f64>();
        let s = random_subobject(poset, variant, density, rng);
        let u = random_subobject(poset, variant, density, rng);
        let meet = s.meet(&u).expect("same poset");
        let join = s.join(&u).expect("same poset");
        // A chain s ∧ u ≤ s ≤ s ∨ u.
        let chain = [meet.clone(), s.clone(), join.clone()];
        for d in 0..poset.len() {
            let (ms, mu_, mm, mj) = (mu(&s, d), mu(&u, d), mu(&meet, d), mu(&join, d));
            if mm > ms + tol || ms > mj + tol || mm > mu_ + tol || mu_ > mj + tol {
                report
                    .failures
                    .push(format!("trial {t}: monotonicity fails at {}", poset.label(d)));
            }
            if (ms + mu_ - mm - mj).abs() > tol {
                report.failures.push(format!(
                    "trial {t}: modularity fails at {}: {ms} + {mu_} != {mm} + {mj}",
                    poset.label(d)
                ));
            }
            let sup = chain.iter().map(|x| mu(x, d)).fold(f64::NEG_INFINITY, f64::max);
            let chain_join = chain
                .iter()
                .skip(1)
                .fold(chain[0].clone(), |acc, x| acc.join(x).expect("same poset"));
            if (mu(&chain_join, d) - sup).abs() > tol {
                report
                    .failures
                    .push(format!("trial {t}: chain continuity fails at {}", poset.label(d)));
            }
        }
        for c in 0..poset.len() {
            if !valuation(psi, &s, c).is_monotone(poset) {
                report.failures.push(format!(
                    "trial {t}: valuation at {} is not monotone",
                    poset.label(c)
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{context_from_commuting, PosetOptions};
    use crate::linalg::named::*;
    use crate::linalg::{c64, BorelSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poset() -> ContextPoset {
        let cz = context_from_commuting(&[sigma_z()]).unwrap().with_label("Cz");
        let cx = context_from_commuting(&[sigma_x()]).unwrap().with_label("Cx");
        ContextPoset::build(2, vec![cz, cx], PosetOptions::default()).unwrap()
    }

    fn zero_state() -> State {
        State::pure(&[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(State::new(Mat::identity(2, 2)).is_err());
        let bad = HermitianOp::from_real_diagonal(&[1.5, -0.5]).into_matrix();
        assert!(matches!(State::new(bad), Err(StateError::NotPositive(_))));
        assert!(State::pure(&[c64(0.0, 0.0)]).is_err());
        let mixed = State::maximally_mixed(2);
        assert!((mixed.prob(&ProjectionOp::identity(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn valuation_units_and_example() {
        let p = poset();
        let x = p.index_by_label("Cx").unwrap();
        let b = p.index_by_label("C1").unwrap();
        let psi = zero_state();
        for v in Variant::BOTH {
            let top = valuation(&psi, &Subobject::top(&p, v), x);
            assert!(top.values.iter().all(|(_, val)| (val - 1.0).abs() < 1e-12));
            let bot = valuation(&psi, &Subobject::bottom(&p, v), x);
            assert!(bot.values.iter().all(|(_, val)| val.abs() < 1e-12));
        }
        let s = Subobject::elementary(&sigma_z(), &BorelSet::open(0.5, 1.5), &p, Variant::Contravariant);
        let val = valuation(&psi, &s, x);
        assert_eq!(val.values.len(), 2);
        assert!((val.get(x).unwrap() - 1.0).abs() < 1e-12);
        assert!((val.get(b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truth_sieve_examples() {
        let p = poset();
        let delta = BorelSet::open(0.5, 1.5);
        let psi = zero_state();
        let contra = Subobject::elementary(&sigma_z(), &delta, &p, Variant::Contravariant);
        let s = truth_sieve(&psi, &contra, 1.0);
        assert_eq!(s.len(), 3);
        assert!(s.is_valid(&p));
        let co = Subobject::elementary(&sigma_z(), &delta, &p, Variant::Covariant);
        let s = truth_sieve(&psi, &co, 1.0);
        assert_eq!(s.labels(&p), vec!["Cz"]);
        assert!(s.is_valid(&p));
        let mixed = truth_sieve(&State::maximally_mixed(2), &contra, 1.0);
        let mut labels = mixed.labels(&p);
        labels.sort();
        assert_eq!(labels, vec!["C1", "Cx"]);
    }

    #[test]
    fn orthogonal_clopens_are_modular() {
        let p = poset();
        let z = p.index_by_label("Cz").unwrap();
        let psi = State::maximally_mixed(2);
        let s = Subobject::elementary(&sigma_z(), &BorelSet::above(0.0), &p, Variant::Contravariant);
        let t = Subobject::elementary(&sigma_z(), &BorelSet::below(0.0), &p, Variant::Contravariant);
        let m = |x: &Subobject<'_>| psi.prob(&x.projection_at(z));
        assert!((m(&s) - 0.5).abs() < 1e-12 && (m(&t) - 0.5).abs() < 1e-12);
        assert!(m(&s.meet(&t).unwrap()).abs() < 1e-12);
        assert!((m(&s.join(&t).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axioms_hold_on_small_poset() {
        let p = poset();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for v in Variant::BOTH {
            let report = check_valuation_axioms(&zero_state(), &p, v, 100, &mut rng);
            assert!(report.passed(), "{:?}", report.failures);
        }
    }
}
