//! Contexts (partitions of unity), their spectra, and finite context posets.
//!
//! A context is stored through its atoms, the minimal projections of the
//! abelian subalgebra. Atoms double as the points of the Gelfand spectrum.

mod atomset;
mod partitions;
mod poset;

pub use atomset::AtomSet;
pub use partitions::{bell, blocks, set_partitions};
pub use poset::{ContextPoset, Direction, PosetOptions, Sieve, DEFAULT_CAP};

use std::cmp::Ordering;

use thiserror::Error;

use crate::linalg::{
    commutator, max_abs, proj_leq, trace_product, HermitianOp, LinalgError, Mat, ProjectionOp,
};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContextError {
    #[error("operators {first} and {second} do not commute: max |[a,b]| = {norm:e}")]
    NonCommuting {
        first: usize,
        second: usize,
        norm: f64,
    },
    #[error("context {lower} is not contained in context {upper}")]
    NotComparable { lower: String, upper: String },
    #[error("operator is not an element of the context (deviation {deviation:e})")]
    NotInContext { deviation: f64 },
    #[error("poset would exceed {cap} contexts")]
    PosetTooLarge { cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("duplicate context label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown context label {0:?}")]
    UnknownLabel(String),
    #[error("atom index {index} out of range for a context with {len} atoms")]
    AtomOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Rounded atom data used for canonical ordering and hashing.
pub(crate) type AtomKey = (usize, Vec<(i64, i64)>);

fn atom_key(p: &ProjectionOp) -> AtomKey {
    let round = |x: f64| {
        let r = (x * 1e6).round() as i64;
        if r == 0 {
            0
        } else {
            r
        }
    };
    let entries = p
        .matrix()
        .iter()
        .map(|z| (round(z.re), round(z.im)))
        .collect();
    (p.rank(), entries)
}

/// A partition of unity in `M_n(ℂ)`; the abelian subalgebra it generates.
#[derive(Clone, Debug)]
pub struct Context {
    atoms: Vec<ProjectionOp>,
    keys: Vec<AtomKey>,
    label: Option<String>,
}

impl Context {
    /// Validate and canonically order a list of atoms.
    pub fn new(atoms: Vec<ProjectionOp>, label: Option<String>) -> Result<Context, ContextError> {
        let Some(first) = atoms.first() else {
            return Err(ContextError::InvalidContext("no atoms".into()));
        };
        let n = first.dim();
        let tol = Tolerances::global();
        for p in &atoms {
            if p.dim() != n {
                return Err(ContextError::DimMismatch {
                    expected: n,
                    got: p.dim(),
                });
            }
            if p.trace() < 0.5 {
                return Err(ContextError::InvalidContext("zero atom".into()));
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let dev = max_abs(&(atoms[i].matrix() * atoms[j].matrix()));
                if dev > tol.ord {
                    return Err(ContextError::InvalidContext(format!(
                        "atoms {i} and {j} are not orthogonal ({dev:e})"
                    )));
                }
            }
        }
        let total = ProjectionOp::sum(n, &atoms);
        let dev = max_abs(&(total.matrix() - Mat::identity(n, n)));
        if dev > tol.recon {
            return Err(ContextError::InvalidContext(format!(
                "atoms do not sum to the identity ({dev:e})"
            )));
        }
        Ok(Context::from_atoms_unchecked(atoms, label))
    }

    pub(crate) fn from_atoms_unchecked(atoms: Vec<ProjectionOp>, label: Option<String>) -> Context {
        let mut keyed: Vec<(AtomKey, ProjectionOp)> =
            atoms.into_iter().map(|p| (atom_key(&p), p)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let (keys, atoms) = keyed.into_iter().unzip();
        Context { atoms, keys, label }
    }

    /// The trivial context `ℂ·1`.
    pub fn bottom(n: usize) -> Context {
        Context::from_atoms_unchecked(vec![ProjectionOp::identity(n)], Some("C1".into()))
    }

    /// The context of all diagonal matrices.
    pub fn diagonal(n: usize) -> Context {
        let atoms = (0..n)
            .map(|i| {
                let mut d = vec![0.0; n];
                d[i] = 1.0;
                ProjectionOp::from_real_diagonal(&d).expect("diagonal unit")
            })
            .collect();
        Context::from_atoms_unchecked(atoms, None)
    }

    /// Context generated by a commuting family: atoms are the joint eigenspaces.
    pub fn from_commuting(ops: &[HermitianOp]) -> Result<Context, ContextError> {
        context_from_commuting(ops)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Context {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn atoms(&self) -> &[ProjectionOp] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &ProjectionOp {
        &self.atoms[i]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_bottom(&self) -> bool {
        self.atoms.len() == 1
    }

    pub(crate) fn keys(&self) -> &[AtomKey] {
        &self.keys
    }

    /// Projection `Σ_{i ∈ s} q_i`.
    pub fn projection(&self, s: AtomSet) -> ProjectionOp {
        ProjectionOp::sum(self.dim(), s.iter().map(|i| &self.atoms[i]))
    }

    pub fn full_set(&self) -> AtomSet {
        AtomSet::full(self.len())
    }

    /// Atoms lying under `p`, if `p` is a projection of this context.
    pub fn atoms_of(&self, p: &ProjectionOp) -> Option<AtomSet> {
        let s = AtomSet::from_indices(
            (0..self.len()).filter(|&i| proj_leq(&self.atoms[i], p)),
        );
        self.projection(s).approx_eq(p).then_some(s)
    }

    /// Coefficients `c_i` with `a = Σ c_i q_i`, if `a` belongs to the context.
    pub fn coefficients(&self, a: &HermitianOp) -> Result<Vec<f64>, ContextError> {
        let coeffs: Vec<f64> = self
            .atoms
            .iter()
            .map(|q| trace_product(q.matrix(), a.matrix()) / q.trace())
            .collect();
        let rebuilt = HermitianOp::combination(
            self.dim(),
            coeffs.iter().zip(&self.atoms).map(|(&c, q)| (c, q.matrix())),
        );
        let deviation = max_abs(&(rebuilt.matrix() - a.matrix()));
        if deviation > Tolerances::global().ord * (1.0 + max_abs(a.matrix())) {
            return Err(ContextError::NotInContext { deviation });
        }
        Ok(coeffs)
    }

    /// `Σ c_i q_i`.
    pub fn operator(&self, coeffs: &[f64]) -> HermitianOp {
        HermitianOp::combination(
            self.dim(),
            coeffs.iter().zip(&self.atoms).map(|(&c, q)| (c, q.matrix())),
        )
    }

    /// Equality as subalgebras: same atoms up to tolerance, in any order.
    pub fn approx_eq(&self, other: &Context) -> bool {
        self.dim() == other.dim()
            && self.len() == other.len()
            && self
                .atoms
                .iter()
                .all(|p| other.atoms.iter().any(|q| p.approx_eq(q)))
    }

    /// Canonical order: atom count, then rounded atom data.
    pub fn canonical_cmp(&self, other: &Context) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.keys.cmp(&other.keys))
    }

    /// Coarsening obtained by summing the atoms in each block.
    pub fn coarsen(&self, blocks: &[Vec<usize>], label: Option<String>) -> Context {
        let atoms = blocks
            .iter()
            .map(|b| ProjectionOp::sum(self.dim(), b.iter().map(|&i| &self.atoms[i])))
            .collect();
        Context::from_atoms_unchecked(atoms, label)
    }
}

/// Joint eigenspaces of a commuting family of hermitian operators.
pub fn context_from_commuting(ops: &[HermitianOp]) -> Result<Context, ContextError> {
    let Some(first) = ops.first() else {
        return Err(ContextError::InvalidContext("no generators".into()));
    };
    let n = first.dim();
    let tol = Tolerances::global();
    let norms: Vec<f64> = ops.iter().map(|a| a.norm()).collect();
    for (i, a) in ops.iter().enumerate() {
        if a.dim() != n {
            return Err(ContextError::DimMismatch {
                expected: n,
                got: a.dim(),
            });
        }
        for (j, b) in ops.iter().enumerate().skip(i + 1) {
            let norm = max_abs(&commutator(a.matrix(), b.matrix()));
            if norm > tol.ord * (1.0 + norms[i]) * (1.0 + norms[j]) {
                return Err(ContextError::NonCommuting {
                    first: i,
                    second: j,
                    norm,
                });
            }
        }
    }
    let mut atoms = vec![ProjectionOp::identity(n)];
    for a in ops {
        let spec = a.spectrum();
        let mut refined = Vec::new();
        for q in &atoms {
            for pair in spec.pairs() {
                let prod = q.commuting_meet(&pair.projection);
                if prod.trace() > 0.5 {
                    refined.push(prod);
                }
            }
        }
        atoms = refined;
    }
    Ok(Context::from_atoms_unchecked(atoms, None))
}

/// Atom map `C → D` sending each atom of `C` to the atom of `D` above it,
/// or `None` when `D ⊄ C`.
pub fn restriction_map(c: &Context, d: &Context) -> Option<Vec<usize>> {
    if c.dim() != d.dim() || d.len() > c.len() {
        return None;
    }
    let tol = Tolerances::global().ord;
    let mut map = vec![usize::MAX; c.len()];
    for (j, dj) in d.atoms().iter().enumerate() {
        let mut below = Vec::new();
        for (i, q) in c.atoms().iter().enumerate() {
            if proj_leq(q, dj) {
                below.push(i);
            } else if max_abs(&(q.matrix() * dj.matrix())) > tol {
                return None;
            }
        }
        let sum = ProjectionOp::sum(c.dim(), below.iter().map(|&i| c.atom(i)));
        if !sum.approx_eq(dj) {
            return None;
        }
        for i in below {
            map[i] = j;
        }
    }
    map.iter().all(|&j| j != usize::MAX).then_some(map)
}

/// `D ⊆ C` as subalgebras.
pub fn context_leq(d: &Context, c: &Context) -> bool {
    restriction_map(c, d).is_some()
}

/// A point of the spectrum of a context: one of its atoms.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumPoint<'a> {
    pub context: &'a Context,
    pub atom_index: usize,
}

impl<'a> SpectrumPoint<'a> {
    pub fn new(context: &'a Context, atom_index: usize) -> Result<SpectrumPoint<'a>, ContextError> {
        if atom_index >= context.len() {
            return Err(ContextError::AtomOutOfRange {
                index: atom_index,
                len: context.len(),
            });
        }
        Ok(SpectrumPoint {
            context,
            atom_index,
        })
    }

    pub fn atom(&self) -> &'a ProjectionOp {
        self.context.atom(self.atom_index)
    }

    /// `λ|_D`.
    pub fn restrict(&self, d: &'a Context) -> Result<SpectrumPoint<'a>, ContextError> {
        restrict(self, d)
    }

    /// `⟨λ, a⟩`.
    pub fn eval(&self, a: &HermitianOp) -> Result<f64, ContextError> {
        eval_point(self, a)
    }
}

pub fn restrict<'a>(
    lambda: &SpectrumPoint<'a>,
    d: &'a Context,
) -> Result<SpectrumPoint<'a>, ContextError> {
    let map = restriction_map(lambda.context, d).ok_or_else(|| ContextError::NotComparable {
        lower: d.label().unwrap_or("?").to_string(),
        upper: lambda.context.label().unwrap_or("?").to_string(),
    })?;
    Ok(SpectrumPoint {
        context: d,
        atom_index: map[lambda.atom_index],
    })
}

pub fn eval_point(lambda: &SpectrumPoint<'_>, a: &HermitianOp) -> Result<f64, ContextError> {
    let q = lambda.atom();
    let value = trace_product(q.matrix(), a.matrix()) / q.trace();
    let residual = q.matrix() * a.matrix() - q.matrix().scale(value);
    let deviation = max_abs(&residual);
    if deviation > Tolerances::global().ord * (1.0 + max_abs(a.matrix())) {
        return Err(ContextError::NotInContext { deviation });
    }
    Ok(value)
}
