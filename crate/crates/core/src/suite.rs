//! Seeded property suite run by `qlogic check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contexts::{AtomSet, ContextPoset, PosetOptions};
use crate::daseinise::{
    check_adjunction, daseinise_proj_inner, daseinise_proj_outer, daseinise_sa_inner,
    daseinise_sa_outer, inner_atoms, outer_atoms,
};
use crate::dynamics::{check_equivariance, pullback, transform_truth, StarHom};
use crate::linalg::{max_abs, proj_leq, spectral_leq};
use crate::logic::{Subobject, Variant};
use crate::sample;
use crate::states::{check_valuation_axioms, random_subobject, truth_sieve};
use crate::valuemaps::{check_continuity, check_ujelly, enumerate_sections, sandwich_check, SECTION_CAP};

/// Witnesses kept per check.
const MAX_WITNESSES: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub witnesses: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> CheckResult {
        CheckResult {
            name,
            cases: 0,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckResult>,
    pub failures: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

type Check = fn(&mut ChaCha8Rng, usize) -> CheckResult;

const CHECKS: [Check; 13] = [
    check_projection_daseinisation,
    check_operator_daseinisation,
    check_adjunctions,
    check_heyting_laws,
    check_valuations,
    check_truth_sieves,
    check_continuity_suite,
    check_sandwich_suite,
    check_ujelly_suite,
    check_sections_suite,
    check_equivariance_suite,
    check_transform_truth_suite,
    check_pullbacks,
];

/// Run every check. Each check draws from its own generator seeded from
/// `seed` and its position, so reports do not depend on check order.
pub fn run_suite(seed: u64, trials: usize) -> SuiteReport {
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .enumerate()
        .map(|(i, check)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            check(&mut rng, trials)
        })
        .collect();
    let failures = checks.iter().map(|c| c.failures).sum();
    SuiteReport {
        seed,
        trials,
        checks,
        failures,
    }
}

fn dim<R: Rng>(rng: &mut R) -> usize {
    rng.random_range(2..=4)
}

/// Closed forms against enumeration of atom subsets, plus
/// `δ^i(1-p) = 1 - δ^o(p)` and `δ^i(p) ≤ p ≤ δ^o(p)`.
fn check_projection_daseinisation(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("projection_daseinisation");
    for t in 0..trials {
        let n = dim(rng);
        let c = sample::context(n, rng);
        let p = sample::projection_for(&c, rng);
        let subsets: Vec<AtomSet> = AtomSet::all_subsets(c.len()).collect();
        let above = subsets
            .iter()
            .copied()
            .filter(|&s| proj_leq(&p, &c.projection(s)))
            .min_by_key(|s| s.len());
        let below = subsets
            .iter()
            .copied()
            .filter(|&s| proj_leq(&c.projection(s), &p))
            .max_by_key(|s| s.len());
        let outer = daseinise_proj_outer(&p, &c);
        let inner = daseinise_proj_inner(&p, &c);
        let ok = above == Some(outer_atoms(&p, &c))
            && below == Some(inner_atoms(&p, &c))
            && daseinise_proj_inner(&p.complement(), &c).approx_eq(&outer.complement())
            && proj_leq(&inner, &p)
            && proj_leq(&p, &outer);
        out.record(ok, || format!("trial {t}: n = {n}, rank p = {}, atoms = {}", p.rank(), c.len()));
    }
    out
}

/// `δ^i(a) ≤_s a ≤_s δ^o(a)`, and the projection case agrees with the
/// operator case.
fn check_operator_daseinisation(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("operator_daseinisation");
    for t in 0..trials {
        let n = dim(rng);
        let c = sample::context(n, rng);
        let a = sample::hermitian(n, rng);
        let p = sample::projection_for(&c, rng);
        let (i, o) = (daseinise_sa_inner(&a, &c), daseinise_sa_outer(&a, &c));
        let proj_agree = max_abs(&(daseinise_sa_outer(&p.as_hermitian(), &c).matrix()
            - daseinise_proj_outer(&p, &c).matrix()))
            < 1e-8
            && max_abs(&(daseinise_sa_inner(&p.as_hermitian(), &c).matrix()
                - daseinise_proj_inner(&p, &c).matrix()))
                < 1e-8;
        let ok = spectral_leq(&i, &a) && spectral_leq(&a, &o) && proj_agree;
        out.record(ok, || format!("trial {t}: n = {n}, spectrum {:?}", a.spectrum().values()));
    }
    out
}

fn check_adjunctions(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("galois_adjunction");
    for t in 0..trials {
        let n = dim(rng);
        let c = sample::context(n, rng);
        let a = sample::hermitian(n, rng);
        // Half the time b sits at a daseinisation so that the boundary case
        // of each equivalence is exercised.
        let b = match rng.random_range(0..3) {
            0 => daseinise_sa_inner(&a, &c),
            1 => daseinise_sa_outer(&a, &c),
            _ => sample::element_of(&c, rng),
        };
        let ok = check_adjunction(&a, &b, &c).map(|(l, r)| l && r).unwrap_or(false);
        out.record(ok, || format!("trial {t}: n = {n}, spec a = {:?}", a.spectrum().values()));
    }
    out
}

fn check_heyting_laws(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("heyting_laws");
    let posets = (trials / 20).max(1);
    let per = 20;
    for k in 0..posets {
        let n = rng.random_range(2..=3);
        let poset = sample::poset(n, rng);
        for v in Variant::BOTH {
            for t in 0..per {
                let draw = |rng: &mut ChaCha8Rng| {
                    let d = 0.2 + 0.5 * rng.random::<f64>();
                    random_subobject(&poset, v, d, rng)
                };
                let (s, u, w) = (draw(rng), draw(rng), draw(rng));
                let imp = s.implies(&u).expect("down-closed poset");
                let residuation = meet(&w, &s).leq(&u) == w.leq(&imp);
                let distributive = meet(&s, &join(&u, &w)) == join(&meet(&s, &u), &meet(&s, &w));
                let ns = s.neg().expect("down-closed poset");
                let contradiction = meet(&s, &ns) == Subobject::bottom(&poset, v);
                let double = s.leq(&ns.neg().expect("down-closed poset"));
                let valid = imp.is_valid() && ns.is_valid();
                out.record(residuation && distributive && contradiction && double && valid, || {
                    format!(
                        "poset {k} ({} contexts), {v}, triple {t}: residuation {residuation}, distributive {distributive}, S∧¬S=⊥ {contradiction}, S≤¬¬S {double}",
                        poset.len()
                    )
                });
            }
        }
    }
    out
}

fn meet<'p>(x: &Subobject<'p>, y: &Subobject<'p>) -> Subobject<'p> {
    x.meet(y).expect("same poset")
}

fn join<'p>(x: &Subobject<'p>, y: &Subobject<'p>) -> Subobject<'p> {
    x.join(y).expect("same poset")
}

fn check_valuations(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("valuation_axioms");
    for t in 0..(trials / 20).max(1) {
        let n = rng.random_range(2..=3);
        let poset = sample::poset(n, rng);
        let psi = sample::state(n, rng);
        for v in Variant::BOTH {
            let report = check_valuation_axioms(&psi, &poset, v, 10, rng);
            let first = report.failures.first().cloned();
            out.record(report.passed(), || format!("trial {t}, {v}: {}", first.unwrap_or_default()));
        }
    }
    out
}

fn check_truth_sieves(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("truth_sieves");
    for t in 0..trials {
        let n = rng.random_range(2..=3);
        let poset = sample::poset(n, rng);
        let psi = sample::state(n, rng);
        let a = sample::hermitian(n, rng);
        let delta = sample::borel(&a.spectrum().values(), rng);
        let x = [1.0, 0.5, 0.9][rng.random_range(0..3)];
        for v in Variant::BOTH {
            let s = truth_sieve(&psi, &Subobject::elementary(&a, &delta, &poset, v), x);
            out.record(s.is_valid(&poset), || format!("trial {t}, {v}: Δ = {delta}, x = {x}"));
        }
    }
    out
}

fn check_continuity_suite(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("continuity");
    for t in 0..(trials / 10).max(1) {
        let n = rng.random_range(2..=3);
        let poset = sample::poset(n, rng);
        let a = sample::hermitian(n, rng);
        for v in Variant::BOTH {
            let report = check_continuity(&a, &poset, v);
            let first = report.violations.first().cloned();
            out.record(report.passed(), || format!("trial {t}, {v}: {}", first.unwrap_or_default()));
        }
    }
    out
}

fn check_sandwich_suite(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("sandwich");
    for t in 0..(trials / 20).max(1) {
        let n = rng.random_range(2..=3);
        let poset = sample::poset(n, rng);
        let a = sample::hermitian(n, rng);
        let spec = a.spectrum().values();
        let mut grid: Vec<f64> = spec.iter().flat_map(|&x| [x - 0.5, x, x + 0.5]).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        for &s in &grid {
            for &r in grid.iter().filter(|&&r| r > s) {
                for eps in [0.01, 0.1, 1.0] {
                    for v in Variant::BOTH {
                        let ok = sandwich_check(&a, s, r, eps, &poset, v).map(|r| r.passed()).unwrap_or(false);
                        out.record(ok, || format!("trial {t}, {v}: s = {s}, r = {r}, ε = {eps}"));
                    }
                }
            }
        }
    }
    out
}

fn check_ujelly_suite(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("ujelly");
    for t in 0..trials {
        let n = rng.random_range(2..=3);
        let c = sample::context(n, rng);
        let a = sample::hermitian(n, rng);
        let atom = rng.random_range(0..c.len());
        let (sup, inf) = check_ujelly(&a, &c, atom);
        out.record(sup && inf, || format!("trial {t}: sup ok {sup}, inf ok {inf}"));
    }
    out
}

fn check_sections_suite(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("sections");
    for t in 0..(trials / 40).max(1) {
        let n = 2 + (t % 2);
        let gens = (0..rng.random_range(1..=2)).map(|_| sample::context(n, rng)).collect();
        let poset = match ContextPoset::build(n, gens, PosetOptions::default()) {
            Ok(p) => p,
            Err(_) => continue,
        };
        for c in 0..poset.len() {
            let ok = enumerate_sections(&poset, c, SECTION_CAP)
                .map(|r| r.passed())
                .unwrap_or(true);
            out.record(ok, || format!("trial {t}: base {}", poset.label(c)));
        }
    }
    out
}

fn check_equivariance_suite(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("equivariance");
    for t in 0..trials {
        let n = rng.random_range(2..=3);
        let h = StarHom::automorphism(sample::unitary(n, rng)).expect("unitary");
        let a = sample::hermitian(n, rng);
        let delta = sample::borel(&a.spectrum().values(), rng);
        let c = sample::context(n, rng);
        let ok = check_equivariance(&h, &a, &delta, &c).map(|r| r.passed(1e-8));
        out.record(matches!(ok, Ok(true)), || format!("trial {t}: n = {n}, Δ = {delta}"));
    }
    out
}

fn check_transform_truth_suite(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("transform_truth");
    for t in 0..(trials / 4).max(1) {
        let n = rng.random_range(2..=3);
        let (h, poset) = sample::closed_automorphism(n, rng);
        let psi = sample::state(n, rng);
        let a = sample::hermitian(n, rng);
        let delta = sample::borel(&a.spectrum().values(), rng);
        for v in Variant::BOTH {
            let ok = transform_truth(&h, &psi, &a, &delta, &poset, v).map(|r| r.equivalent);
            out.record(matches!(ok, Ok(true)), || format!("trial {t}, {v}: n = {n}, Δ = {delta}, {ok:?}"));
        }
    }
    out
}

/// Pulling back along `a ↦ a ⊗ I_k` preserves the closure condition and
/// commutes with elementary propositions.
fn check_pullbacks(rng: &mut ChaCha8Rng, trials: usize) -> CheckResult {
    let mut out = CheckResult::new("pullback");
    for t in 0..(trials / 10).max(1) {
        let n = 2;
        let k = 2;
        let f = StarHom::new(n, k, sample::unitary(n * k, rng)).expect("unitary");
        let source = sample::poset(n, rng);
        let gens = source.contexts().iter().map(|c| f.image_context(c)).collect();
        let target = match ContextPoset::build(n * k, gens, PosetOptions::default()) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let a = sample::hermitian(n, rng);
        let delta = sample::borel(&a.spectrum().values(), rng);
        let fa = f.apply_herm(&a);
        for v in Variant::BOTH {
            let s = Subobject::elementary(&fa, &delta, &target, v);
            let ok = match pullback(&f, &s, &source) {
                Ok(back) => back.is_valid() && back == Subobject::elementary(&a, &delta, &source, v),
                Err(_) => false,
            };
            out.record(ok, || format!("trial {t}, {v}: Δ = {delta}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let a = run_suite(3, 12);
        assert!(a.passed(), "{:#?}", a.checks.iter().filter(|c| !c.passed()).collect::<Vec<_>>());
        let b = run_suite(3, 12);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.checks.iter().all(|c| c.cases > 0), "{:?}", a.checks.iter().map(|c| (c.name, c.cases)).collect::<Vec<_>>());
    }
}
