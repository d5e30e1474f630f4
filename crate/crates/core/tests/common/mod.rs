//! Brute-force reference implementations used by the integration tests.
//!
//! Nothing here calls the library's daseinisation, order, restriction or
//! Heyting code: eigenspaces, spectral order, atom restriction and the
//! Heyting operations are recomputed from the matrices.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qlogic::contexts::{Context, ContextPoset};
use qlogic::linalg::{BorelSet, HermitianOp, ProjectionOp};
use qlogic::logic::{Subobject, Variant};
use qlogic::states::State;
use rand::Rng;

pub type M = DMatrix<Complex64>;

pub const TOL: f64 = 1e-7;

pub fn norm(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn zeros(n: usize) -> M {
    M::zeros(n, n)
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

/// Eigenvalues with eigenprojections, ascending, clustered.
pub fn eig(a: &M) -> Vec<(f64, M)> {
    let n = a.nrows();
    let herm = (a + a.adjoint()).scale(0.5);
    let e = herm.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, usize)> = e.eigenvalues.iter().copied().zip(0..n).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let scale = 1.0 + norm(&herm);
    let mut out: Vec<(f64, M)> = Vec::new();
    let mut members: Vec<(f64, usize)> = Vec::new();
    let flush = |members: &mut Vec<(f64, usize)>, out: &mut Vec<(f64, M)>| {
        if members.is_empty() {
            return;
        }
        let mean = members.iter().map(|m| m.0).sum::<f64>() / members.len() as f64;
        let mut p = zeros(n);
        for &(_, j) in members.iter() {
            let v = e.eigenvectors.column(j);
            p += v * v.adjoint();
        }
        out.push((mean, p));
        members.clear();
    };
    for (val, j) in pairs {
        if let Some(&(last, _)) = members.last() {
            if (val - last).abs() > 1e-8 * scale {
                flush(&mut members, &mut out);
            }
        }
        members.push((val, j));
    }
    flush(&mut members, &mut out);
    out
}

pub fn chi(a: &M, delta: &BorelSet) -> M {
    let n = a.nrows();
    eig(a)
        .into_iter()
        .filter(|(x, _)| delta.contains_snapped(*x, TOL))
        .fold(zeros(n), |acc, (_, p)| acc + p)
}

/// `p ≤ q` for projections.
pub fn pleq(p: &M, q: &M) -> bool {
    norm(&(q * p - p)) < TOL
}

pub fn close(a: &M, b: &M, tol: f64) -> bool {
    norm(&(a - b)) <= tol
}

/// `e^a_x = χ_{(-∞, x]}(a)`.
fn resolution(eigs: &[(f64, M)], n: usize, x: f64) -> M {
    eigs.iter()
        .filter(|(v, _)| *v <= x + TOL)
        .fold(zeros(n), |acc, (_, p)| acc + p)
}

/// `a ≤_s b ⟺ e^b_x ≤ e^a_x` for every `x`; it suffices to test the jump
/// points of both families.
pub fn spectral_leq(a: &M, b: &M) -> bool {
    let (ea, eb) = (eig(a), eig(b));
    spectral_leq_eigs(&ea, &eb, a.nrows())
}

pub fn spectral_leq_eigs(ea: &[(f64, M)], eb: &[(f64, M)], n: usize) -> bool {
    ea.iter()
        .chain(eb.iter())
        .all(|(x, _)| pleq(&resolution(eb, n, *x), &resolution(ea, n, *x)))
}

pub fn atoms(c: &Context) -> Vec<M> {
    c.atoms().iter().map(|q| q.matrix().clone()).collect()
}

pub fn subset_sum(atoms: &[M], mask: u64) -> M {
    let n = atoms[0].nrows();
    (0..atoms.len())
        .filter(|i| mask >> i & 1 == 1)
        .fold(zeros(n), |acc, i| acc + &atoms[i])
}

/// Smallest atom subset whose projection lies above `p`.
pub fn outer_mask(p: &M, atoms: &[M]) -> u64 {
    (0..1u64 << atoms.len())
        .filter(|&m| pleq(p, &subset_sum(atoms, m)))
        .min_by_key(|m| m.count_ones())
        .expect("the full set lies above every projection")
}

/// Largest atom subset whose projection lies below `p`.
pub fn inner_mask(p: &M, atoms: &[M]) -> u64 {
    (0..1u64 << atoms.len())
        .filter(|&m| pleq(&subset_sum(atoms, m), p))
        .max_by_key(|m| m.count_ones())
        .expect("the empty set lies below every projection")
}

fn assignments(values: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                values.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn combine(atoms: &[M], coeffs: &[f64]) -> M {
    let n = atoms[0].nrows();
    atoms
        .iter()
        .zip(coeffs)
        .fold(zeros(n), |acc, (q, &c)| acc + q.scale(c))
}

/// Elements of `C` with eigenvalues in `spec(a)` that lie above (`outer`) or
/// below (`!outer`) `a` in spectral order, and the extremum among them: the
/// candidate that is below (resp. above) every other candidate.
pub fn sa_daseinise(a: &M, atoms: &[M], outer: bool) -> M {
    let n = a.nrows();
    let ea = eig(a);
    let values: Vec<f64> = ea.iter().map(|(x, _)| *x).collect();
    let candidates: Vec<Vec<f64>> = assignments(&values, atoms.len())
        .into_iter()
        .filter(|coeffs| {
            let eb: Vec<(f64, M)> = values
                .iter()
                .map(|&x| {
                    let p = atoms
                        .iter()
                        .zip(coeffs)
                        .filter(|(_, &c)| c == x)
                        .fold(zeros(n), |acc, (q, _)| acc + q);
                    (x, p)
                })
                .collect();
            if outer {
                spectral_leq_eigs(&ea, &eb, n)
            } else {
                spectral_leq_eigs(&eb, &ea, n)
            }
        })
        .collect();
    // Within a context the spectral order is the pointwise order of
    // coefficients.
    let best = candidates
        .iter()
        .find(|c| {
            candidates.iter().all(|d| {
                c.iter().zip(d).all(|(x, y)| if outer { x <= y } else { x >= y })
            })
        })
        .expect("a spectral-order extremum exists");
    combine(atoms, best)
}

/// `D ≤ C`: every atom of `C` lies under an atom of `D`.
pub fn context_leq(d: &[M], c: &[M]) -> bool {
    c.iter().all(|q| d.iter().any(|r| pleq(q, r)))
}

/// The atom of `D` above atom `l` of `C`.
pub fn restrict(c: &[M], l: usize, d: &[M]) -> usize {
    d.iter().position(|r| pleq(&c[l], r)).expect("D ≤ C")
}

/// Points `(C, λ)` with `(D, μ) ≤ (C, λ)` iff `D ≤ C` and `λ|_D = μ`.
/// Contravariant subobjects are down-sets of this order and covariant ones
/// up-sets, so both Heyting algebras are Alexandroff topologies on it.
pub struct PointPoset {
    pub points: Vec<(usize, usize)>,
    /// `below[x]` lists the points `y ≤ x`.
    pub below: Vec<Vec<usize>>,
    pub above: Vec<Vec<usize>>,
}

impl PointPoset {
    pub fn new(poset: &ContextPoset) -> PointPoset {
        let ctx: Vec<Vec<M>> = poset.contexts().iter().map(atoms).collect();
        let points: Vec<(usize, usize)> = (0..ctx.len())
            .flat_map(|c| (0..ctx[c].len()).map(move |l| (c, l)))
            .collect();
        let m = points.len();
        let leq = |y: usize, x: usize| {
            let ((d, mu), (c, l)) = (points[y], points[x]);
            context_leq(&ctx[d], &ctx[c]) && restrict(&ctx[c], l, &ctx[d]) == mu
        };
        let below = (0..m).map(|x| (0..m).filter(|&y| leq(y, x)).collect()).collect();
        let above = (0..m).map(|x| (0..m).filter(|&y| leq(x, y)).collect()).collect();
        PointPoset { points, below, above }
    }

    fn cone(&self, x: usize, variant: Variant) -> &[usize] {
        match variant {
            Variant::Contravariant => &self.below[x],
            Variant::Covariant => &self.above[x],
        }
    }

    pub fn to_set(&self, s: &Subobject<'_>) -> Vec<bool> {
        self.points.iter().map(|&(c, l)| s.at(c).contains(l)).collect()
    }

    pub fn family(&self, set: &[bool], contexts: usize) -> Vec<qlogic::contexts::AtomSet> {
        let mut fam = vec![qlogic::contexts::AtomSet::EMPTY; contexts];
        for (x, &(c, l)) in self.points.iter().enumerate() {
            if set[x] {
                fam[c] = fam[c].with(l);
            }
        }
        fam
    }

    /// Random open: a random point set closed downward (contravariant) or
    /// upward (covariant).
    pub fn random_open<R: Rng>(&self, variant: Variant, density: f64, rng: &mut R) -> Vec<bool> {
        let mut set = vec![false; self.points.len()];
        for x in 0..self.points.len() {
            if rng.random::<f64>() < density {
                for &y in self.cone(x, variant) {
                    set[y] = true;
                }
            }
        }
        set
    }

    /// `{x : ∀y in the cone of x, y ∈ s ⇒ y ∈ t}`.
    pub fn implies(&self, s: &[bool], t: &[bool], variant: Variant) -> Vec<bool> {
        (0..self.points.len())
            .map(|x| self.cone(x, variant).iter().all(|&y| !s[y] || t[y]))
            .collect()
    }

    pub fn neg(&self, s: &[bool], variant: Variant) -> Vec<bool> {
        self.implies(s, &vec![false; s.len()], variant)
    }
}

pub fn and(s: &[bool], t: &[bool]) -> Vec<bool> {
    s.iter().zip(t).map(|(a, b)| *a && *b).collect()
}

pub fn or(s: &[bool], t: &[bool]) -> Vec<bool> {
    s.iter().zip(t).map(|(a, b)| *a || *b).collect()
}

pub fn subset(s: &[bool], t: &[bool]) -> bool {
    s.iter().zip(t).all(|(a, b)| !*a || *b)
}

/// `tr(ρ p)`.
pub fn prob(psi: &State, p: &M) -> f64 {
    (psi.rho() * p).trace().re
}

/// A state with probability-one events in the poset: half the time a unit
/// vector inside a random atom, otherwise a sampled state.
pub fn interesting_state<R: Rng>(poset: &ContextPoset, rng: &mut R) -> State {
    if rng.random_bool(0.5) {
        let c = poset.context(rng.random_range(0..poset.len()));
        let q = c.atom(rng.random_range(0..c.len())).matrix();
        let j = (0..q.ncols())
            .max_by(|&x, &y| q[(x, x)].re.total_cmp(&q[(y, y)].re))
            .expect("nonempty");
        State::pure(q.column(j).as_slice()).expect("nonzero column")
    } else {
        qlogic::sample::state(poset.dim(), rng)
    }
}

/// An operator that often lies in a context of the poset.
pub fn interesting_operator<R: Rng>(poset: &ContextPoset, rng: &mut R) -> HermitianOp {
    if rng.random_bool(0.5) {
        let c = poset.context(rng.random_range(0..poset.len()));
        qlogic::sample::element_of(c, rng)
    } else {
        qlogic::sample::hermitian(poset.dim(), rng)
    }
}

pub fn projection_matrix(p: &ProjectionOp) -> M {
    p.matrix().clone()
}

/// Every projection of a context, as (mask, matrix).
pub fn all_projections(atoms: &[M]) -> Vec<(u64, M)> {
    (0..1u64 << atoms.len()).map(|m| (m, subset_sum(atoms, m))).collect()
}
