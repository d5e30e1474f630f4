//! Unital *-homomorphisms `f(a) = w (a ⊗ I_k) w†` and what they induce on
//! contexts, spectra, subobjects, and truth values.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::contexts::{AtomSet, Context, ContextError, ContextPoset, Direction, Sieve};
use crate::daseinise::{
    daseinise_proj_inner, daseinise_proj_outer, daseinise_sa_inner, daseinise_sa_outer,
};
use crate::linalg::{
    commutator, identity, kron, max_abs, proj_leq, spectral_leq, BorelSet, HermitianOp, Mat,
    ProjectionOp,
};
use crate::logic::{Subobject, Variant};
use crate::sample;
use crate::states::{truth_sieve, State};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("matrix is not unitary: max |w†w - 1| = {0:e}")]
    NotUnitary(f64),
    #[error("unitary has size {got}, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("map does not reflect commutativity: [f(a), f(b)] ≈ 0 but |[a, b]| = {norm:e} for sample pair {pair}")]
    DoesNotReflect { pair: usize, norm: f64 },
    #[error("context is not the image f[C] of the given context")]
    NotInImage,
    #[error("poset is not closed under the induced context map: image of {0} is missing")]
    PosetNotClosed(String),
    #[error("operation needs an automorphism (multiplicity 1)")]
    NotAutomorphism,
    #[error(transparent)]
    Context(#[from] ContextError),
}

/// `f: M_n → M_{kn}`, `f(a) = w (a ⊗ I_k) w†`.
#[derive(Clone, Debug)]
pub struct StarHom {
    source_dim: usize,
    multiplicity: usize,
    w: Mat,
}

impl StarHom {
    pub fn new(source_dim: usize, multiplicity: usize, w: Mat) -> Result<StarHom, DynamicsError> {
        let m = source_dim * multiplicity;
        if w.nrows() != m || w.ncols() != m {
            return Err(DynamicsError::BadShape {
                expected: m,
                got: w.nrows(),
            });
        }
        let dev = max_abs(&(w.adjoint() * &w - identity(m)));
        if dev > Tolerances::global().recon {
            return Err(DynamicsError::NotUnitary(dev));
        }
        Ok(StarHom {
            source_dim,
            multiplicity,
            w,
        })
    }

    /// `h(a) = u a u†`.
    pub fn automorphism(u: Mat) -> Result<StarHom, DynamicsError> {
        let n = u.nrows();
        StarHom::new(n, 1, u)
    }

    /// `a ↦ a ⊗ I_k`.
    pub fn embedding(n: usize, k: usize) -> StarHom {
        StarHom {
            source_dim: n,
            multiplicity: k,
            w: identity(n * k),
        }
    }

    pub fn identity(n: usize) -> StarHom {
        StarHom::embedding(n, 1)
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.source_dim * self.multiplicity
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn unitary(&self) -> &Mat {
        &self.w
    }

    pub fn is_automorphism(&self) -> bool {
        self.multiplicity == 1
    }

    pub fn apply(&self, a: &Mat) -> Mat {
        let lifted = kron(a, &identity(self.multiplicity));
        &self.w * lifted * self.w.adjoint()
    }

    /// Largest deviation of `f(1) = 1`, `f(a*) = f(a)*`, `f(ab) = f(a)f(b)`
    /// over `ops`.
    pub fn hom_deviation(&self, ops: &[Mat]) -> f64 {
        let mut dev = max_abs(&(self.apply(&identity(self.source_dim)) - identity(self.target_dim())));
        for a in ops {
            dev = dev.max(max_abs(&(self.apply(&a.adjoint()) - self.apply(a).adjoint())));
            for b in ops {
                dev = dev.max(max_abs(&(self.apply(&(a * b)) - self.apply(a) * self.apply(b))));
            }
        }
        dev
    }

    pub fn apply_herm(&self, a: &HermitianOp) -> HermitianOp {
        HermitianOp::combination(self.target_dim(), [(1.0, &self.apply(a.matrix()))])
    }

    pub fn apply_proj(&self, p: &ProjectionOp) -> ProjectionOp {
        ProjectionOp::sum(self.target_dim(), [&ProjectionOp::from_matrix_unchecked(self.apply(p.matrix()))])
    }

    /// `p` with `f(p) = P`, if `P` lies in the image.
    pub fn preimage_proj(&self, p: &ProjectionOp) -> Option<ProjectionOp> {
        let n = self.source_dim;
        let k = self.multiplicity;
        let pulled = self.w.adjoint() * p.matrix() * &self.w;
        // Partial trace over the multiplicity factor.
        let reduced = Mat::from_fn(n, n, |i, j| {
            (0..k).map(|t| pulled[(i * k + t, j * k + t)]).sum::<num_complex::Complex64>() / k as f64
        });
        let candidate = ProjectionOp::from_matrix_unchecked(reduced);
        let dev = max_abs(&(kron(candidate.matrix(), &identity(k)) - pulled));
        (dev <= Tolerances::global().ord).then_some(candidate)
    }

    /// `f[C]`: the context with atoms `f(q)`.
    pub fn image_context(&self, c: &Context) -> Context {
        let atoms = c.atoms().iter().map(|q| self.apply_proj(q)).collect();
        Context::from_atoms_unchecked(atoms, c.label().map(|l| format!("f({l})")))
    }

    /// `f^{-1}(D)`: the context of the source algebra generated by the
    /// projections of `D` that lie in the image of `f`.
    pub fn preimage_context(&self, d: &Context) -> Context {
        let k = d.len();
        let mut in_image: Vec<(AtomSet, ProjectionOp)> = AtomSet::all_subsets(k)
            .filter(|s| !s.is_empty())
            .filter_map(|s| self.preimage_proj(&d.projection(s)).map(|p| (s, p)))
            .collect();
        in_image.sort_by_key(|(s, _)| s.len());
        let mut atoms: Vec<(AtomSet, ProjectionOp)> = Vec::new();
        for (s, p) in in_image {
            if atoms.iter().all(|(t, _)| t.intersection(s).is_empty()) {
                atoms.push((s, p));
            }
        }
        Context::from_atoms_unchecked(atoms.into_iter().map(|(_, p)| p).collect(), None)
    }
}

/// Verdict of a sampling test for reflection of commutativity.
#[derive(Clone, Debug, Serialize)]
pub struct ReflectVerdict {
    pub pairs_tested: usize,
    /// Always "not refuted": sampling cannot prove the property.
    pub status: &'static str,
}

/// Test `[f(a), f(b)] = 0 ⇒ [a, b] = 0` on all pairs from `ops` plus
/// `samples` random hermitian pairs.
pub fn check_reflects<R: Rng>(
    f: impl Fn(&Mat) -> Mat,
    n: usize,
    ops: &[HermitianOp],
    samples: usize,
    rng: &mut R,
) -> Result<ReflectVerdict, DynamicsError> {
    let tol = Tolerances::global().ord;
    let mut pairs: Vec<(Mat, Mat)> = Vec::new();
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            pairs.push((a.matrix().clone(), b.matrix().clone()));
        }
    }
    for _ in 0..samples {
        pairs.push((
            sample::hermitian(n, rng).into_matrix(),
            sample::hermitian(n, rng).into_matrix(),
        ));
    }
    for (idx, (a, b)) in pairs.iter().enumerate() {
        let scale = (1.0 + max_abs(a)) * (1.0 + max_abs(b));
        let image = max_abs(&commutator(&f(a), &f(b)));
        let source = max_abs(&commutator(a, b));
        if image <= tol * scale && source > tol * scale {
            return Err(DynamicsError::DoesNotReflect {
                pair: idx,
                norm: source,
            });
        }
    }
    Ok(ReflectVerdict {
        pairs_tested: pairs.len(),
        status: "not refuted",
    })
}

/// `f̂(C) = f[C]` for every context of `P_A`, together with the poset of the
/// images.
#[derive(Clone, Debug)]
pub struct InducedMap {
    pub images: Vec<Context>,
    pub target: ContextPoset,
    /// Index in `target` of each image.
    pub index: Vec<usize>,
}

pub fn induced_context_map(f: &StarHom, source: &ContextPoset) -> Result<InducedMap, DynamicsError> {
    let images: Vec<Context> = source
        .contexts()
        .iter()
        .enumerate()
        .map(|(i, c)| f.image_context(c).with_label(format!("f({})", source.label(i))))
        .collect();
    let target = ContextPoset::from_contexts(f.target_dim(), images.clone())?;
    let index = images
        .iter()
        .map(|c| target.index_of(c).expect("image is in its own poset"))
        .collect();
    Ok(InducedMap {
        images,
        target,
        index,
    })
}

/// `ĝ(D) = f^{-1}(D)` for every context of `P_B`, after testing reflection of
/// commutativity on the atoms of `P_B` pulled back plus `samples` random pairs.
pub fn inverse_context_map<R: Rng>(
    f: &StarHom,
    target: &ContextPoset,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<Context>, DynamicsError> {
    let ops: Vec<HermitianOp> = target
        .contexts()
        .iter()
        .flat_map(|d| {
            AtomSet::all_subsets(d.len())
                .filter_map(|s| f.preimage_proj(&d.projection(s)))
                .map(|p| p.as_hermitian())
                .collect::<Vec<_>>()
        })
        .collect();
    check_reflects(|a| f.apply(a), f.source_dim(), &ops, samples, rng)?;
    Ok(target
        .contexts()
        .iter()
        .map(|d| f.preimage_context(d))
        .collect())
}

/// `λ ↦ λ ∘ f|_C`: the atom `q` of `C` with `atom(λ) ≤ f(q)`.
pub fn sigma_map(f: &StarHom, c: &Context, image: &Context, atom: usize) -> Result<usize, DynamicsError> {
    if !f.image_context(c).approx_eq(image) {
        return Err(DynamicsError::NotInImage);
    }
    let lam = image.atom(atom);
    c.atoms()
        .iter()
        .position(|q| proj_leq(lam, &f.apply_proj(q)))
        .ok_or(DynamicsError::NotInImage)
}

/// Deviations of the equivariance identities for one automorphism.
#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    /// `max |h(χ_Δ(a)) - χ_Δ(h(a))|`
    pub spectral_projection: f64,
    /// `max |h(δ^o(a)_C) - δ^o(h(a))_{h[C]}|`
    pub outer: f64,
    /// `max |h(δ^i(a)_C) - δ^i(h(a))_{h[C]}|`
    pub inner: f64,
    /// Projection versions of the previous two, on `χ_Δ(a)`.
    pub outer_proj: f64,
    pub inner_proj: f64,
    /// `a ≤_s b ⟺ h(a) ≤_s h(b)` for `b` each daseinisation of `a`.
    pub order_preserved: bool,
}

impl EquivarianceReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.spectral_projection,
            self.outer,
            self.inner,
            self.outer_proj,
            self.inner_proj,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.order_preserved && self.max_deviation() <= tol
    }
}

pub fn check_equivariance(
    h: &StarHom,
    a: &HermitianOp,
    delta: &BorelSet,
    c: &Context,
) -> Result<EquivarianceReport, DynamicsError> {
    if !h.is_automorphism() {
        return Err(DynamicsError::NotAutomorphism);
    }
    let ha = h.apply_herm(a);
    let hc = h.image_context(c);
    let chi = a.spectrum().projection(delta);
    let dev = |x: &Mat, y: &Mat| max_abs(&(x - y));
    let spectral_projection = dev(h.apply_proj(&chi).matrix(), ha.spectrum().projection(delta).matrix());
    let outer = dev(
        &h.apply(daseinise_sa_outer(a, c).matrix()),
        daseinise_sa_outer(&ha, &hc).matrix(),
    );
    let inner = dev(
        &h.apply(daseinise_sa_inner(a, c).matrix()),
        daseinise_sa_inner(&ha, &hc).matrix(),
    );
    let outer_proj = dev(
        &h.apply(daseinise_proj_outer(&chi, c).matrix()),
        daseinise_proj_outer(&h.apply_proj(&chi), &hc).matrix(),
    );
    let inner_proj = dev(
        &h.apply(daseinise_proj_inner(&chi, c).matrix()),
        daseinise_proj_inner(&h.apply_proj(&chi), &hc).matrix(),
    );
    let mut order_preserved = true;
    for b in [daseinise_sa_outer(a, c), daseinise_sa_inner(a, c), HermitianOp::identity(a.dim())] {
        let hb = h.apply_herm(&b);
        order_preserved &= spectral_leq(a, &b) == spectral_leq(&ha, &hb);
        order_preserved &= spectral_leq(&b, a) == spectral_leq(&hb, &ha);
    }
    Ok(EquivarianceReport {
        spectral_projection,
        outer,
        inner,
        outer_proj,
        inner_proj,
        order_preserved,
    })
}

/// `ĥ` on a poset closed under it, as a permutation of context indices.
pub fn automorphism_on_poset(h: &StarHom, poset: &ContextPoset) -> Result<Vec<usize>, DynamicsError> {
    if !h.is_automorphism() {
        return Err(DynamicsError::NotAutomorphism);
    }
    (0..poset.len())
        .map(|c| {
            poset
                .index_of(&h.image_context(poset.context(c)))
                .ok_or_else(|| DynamicsError::PosetNotClosed(poset.label(c).to_string()))
        })
        .collect()
}

/// Both sides of the transformation of truth values under an automorphism.
#[derive(Clone, Debug)]
pub struct TransformedTruth {
    /// `{C : ψ(h(δ(χ_Δ(a))_C)) = 1}`, i.e. stages where the pulled-back
    /// valuation `ψ ∘ h` assigns 1 to `[a ∈ Δ]`.
    pub sieve_source: Sieve,
    /// `{D : ψ(δ(χ_Δ(h(a)))_D) = 1}`, the truth value of `[h(a) ∈ Δ]`.
    pub sieve_target: Sieve,
    /// `sieve_target = ĥ[sieve_source]`.
    pub equivalent: bool,
}

pub fn transform_truth(
    h: &StarHom,
    psi: &State,
    a: &HermitianOp,
    delta: &BorelSet,
    poset: &ContextPoset,
    variant: Variant,
) -> Result<TransformedTruth, DynamicsError> {
    let hat = automorphism_on_poset(h, poset)?;
    let tol = Tolerances::global().prob;
    let chi = a.spectrum().projection(delta);
    let members = poset
        .contexts()
        .iter()
        .map(|c| {
            let das = match variant {
                Variant::Contravariant => daseinise_proj_outer(&chi, c),
                Variant::Covariant => daseinise_proj_inner(&chi, c),
            };
            psi.prob(&h.apply_proj(&das)) >= 1.0 - tol
        })
        .collect();
    let direction = match variant {
        Variant::Contravariant => Direction::Down,
        Variant::Covariant => Direction::Up,
    };
    let sieve_source = Sieve::from_members(members, direction);
    let target_prop = Subobject::elementary(&h.apply_herm(a), delta, poset, variant);
    let sieve_target = truth_sieve(psi, &target_prop, 1.0);
    let mut pushed = vec![false; poset.len()];
    for c in sieve_source.members() {
        pushed[hat[c]] = true;
    }
    let equivalent = (0..poset.len()).all(|d| pushed[d] == sieve_target.contains(d));
    Ok(TransformedTruth {
        sieve_source,
        sieve_target,
        equivalent,
    })
}

/// `{D ∈ P_B : D ⊇ f[C]}`, the stages used by the pushforward along `f̂`.
pub fn g_star_index(f: &StarHom, c: &Context, target: &ContextPoset) -> Vec<usize> {
    let image = f.image_context(c);
    match target.index_of(&image) {
        Some(i) => target.up_set(i),
        None => (0..target.len())
            .filter(|&d| crate::contexts::context_leq(&image, target.context(d)))
            .collect(),
    }
}

/// `{f[C'] : C' ⊇ C}`, the stages that come from a refinement of `C`.
pub fn f_sharp_index(f: &StarHom, source: &ContextPoset, c: usize, target: &ContextPoset) -> Vec<usize> {
    let mut out: Vec<usize> = source
        .up_set(c)
        .into_iter()
        .filter_map(|e| target.index_of(&f.image_context(source.context(e))))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Pull a subobject over `P_B` back to `P_A` along the spectral map:
/// atom `q` of `C` is kept iff `f(q)` is in `S_{f[C]}`.
pub fn pullback<'a>(
    f: &StarHom,
    s: &Subobject<'_>,
    source: &'a ContextPoset,
) -> Result<Subobject<'a>, DynamicsError> {
    let target = s.poset();
    let family = (0..source.len())
        .map(|c| {
            let ctx = source.context(c);
            let image = f.image_context(ctx);
            let d = target
                .index_of(&image)
                .ok_or_else(|| DynamicsError::PosetNotClosed(source.label(c).to_string()))?;
            let dctx = target.context(d);
            Ok(AtomSet::from_indices((0..ctx.len()).filter(|&i| {
                let fq = f.apply_proj(ctx.atom(i));
                s.at(d).iter().any(|l| dctx.atom(l).approx_eq(&fq))
            })))
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(Subobject::from_family_unchecked(source, s.variant(), family))
}
