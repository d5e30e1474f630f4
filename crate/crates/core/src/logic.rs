//! Heyting algebras of subobjects of the spectrum in both models.
//!
//! A subobject is a family of atom sets, one per context of a fixed poset.
//! Contravariant subobjects are closed under restriction; covariant ones are
//! closed under taking preimages of restriction.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contexts::{AtomSet, ContextPoset};
use crate::daseinise::{inner_atoms, outer_atoms};
use crate::linalg::{proj_leq, BorelSet, HermitianOp, ProjectionOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Contravariant,
    Covariant,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::Contravariant, Variant::Covariant];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Contravariant => "contravariant",
            Variant::Covariant => "covariant",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contravariant" | "contra" => Ok(Variant::Contravariant),
            "covariant" | "co" => Ok(Variant::Covariant),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("subobjects have different variants ({0} vs {1})")]
    VariantMismatch(Variant, Variant),
    #[error("subobjects live over different posets")]
    PosetMismatch,
    #[error("contravariant implication needs a down-closed poset")]
    PosetNotDownClosed,
    #[error("family violates the {variant} closure condition between {lower} and {upper}")]
    NotClosed {
        variant: Variant,
        lower: String,
        upper: String,
    },
    #[error("family has {got} entries but the poset has {expected} contexts")]
    WrongLength { expected: usize, got: usize },
    #[error("atom set {set} out of range at context {context}")]
    AtomOutOfRange { context: String, set: AtomSet },
}

#[derive(Clone, Debug)]
pub struct Subobject<'p> {
    poset: &'p ContextPoset,
    variant: Variant,
    family: Vec<AtomSet>,
}

impl PartialEq for Subobject<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.poset, other.poset)
            && self.variant == other.variant
            && self.family == other.family
    }
}

/// First closure violation, as `(lower, upper)` context indices.
fn closure_violation(poset: &ContextPoset, variant: Variant, family: &[AtomSet]) -> Option<(usize, usize)> {
    for c in 0..poset.len() {
        for d in poset.down_set(c) {
            if d == c {
                continue;
            }
            let map = poset.restriction(c, d).expect("comparable");
            let ok = match variant {
                // ρ_CD(S_C) ⊆ S_D
                Variant::Contravariant => family[c].iter().all(|i| family[d].contains(map[i])),
                // ρ_CD⁻¹(S_D) ⊆ S_C
                Variant::Covariant => (0..map.len())
                    .all(|i| !family[d].contains(map[i]) || family[c].contains(i)),
            };
            if !ok {
                return Some((d, c));
            }
        }
    }
    None
}

impl<'p> Subobject<'p> {
    /// Validated construction.
    pub fn new(
        poset: &'p ContextPoset,
        variant: Variant,
        family: Vec<AtomSet>,
    ) -> Result<Subobject<'p>, LogicError> {
        if family.len() != poset.len() {
            return Err(LogicError::WrongLength {
                expected: poset.len(),
                got: family.len(),
            });
        }
        for (c, s) in family.iter().enumerate() {
            if !s.is_subset(poset.context(c).full_set()) {
                return Err(LogicError::AtomOutOfRange {
                    context: poset.label(c).to_string(),
                    set: *s,
                });
            }
        }
        if let Some((d, c)) = closure_violation(poset, variant, &family) {
            return Err(LogicError::NotClosed {
                variant,
                lower: poset.label(d).to_string(),
                upper: poset.label(c).to_string(),
            });
        }
        Ok(Subobject {
            poset,
            variant,
            family,
        })
    }

    /// Construction without the closure check; see [`Subobject::is_valid`].
    pub fn from_family_unchecked(
        poset: &'p ContextPoset,
        variant: Variant,
        family: Vec<AtomSet>,
    ) -> Subobject<'p> {
        Subobject {
            poset,
            variant,
            family,
        }
    }

    /// Smallest valid subobject containing the given family.
    pub fn closure_of(poset: &'p ContextPoset, variant: Variant, mut family: Vec<AtomSet>) -> Subobject<'p> {
        loop {
            let mut changed = false;
            for c in 0..poset.len() {
                for d in poset.down_set(c) {
                    if d == c {
                        continue;
                    }
                    let map = poset.restriction(c, d).expect("comparable");
                    match variant {
                        Variant::Contravariant => {
                            let image = AtomSet::from_indices(family[c].iter().map(|i| map[i]));
                            let merged = family[d].union(image);
                            if merged != family[d] {
                                family[d] = merged;
                                changed = true;
                            }
                        }
                        Variant::Covariant => {
                            let pre = AtomSet::from_indices(
                                (0..map.len()).filter(|&i| family[d].contains(map[i])),
                            );
                            let merged = family[c].union(pre);
                            if merged != family[c] {
                                family[c] = merged;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return Subobject::from_family_unchecked(poset, variant, family);
            }
        }
    }

    pub fn top(poset: &'p ContextPoset, variant: Variant) -> Subobject<'p> {
        let family = poset.contexts().iter().map(|c| c.full_set()).collect();
        Subobject::from_family_unchecked(poset, variant, family)
    }

    pub fn bottom(poset: &'p ContextPoset, variant: Variant) -> Subobject<'p> {
        Subobject::from_family_unchecked(poset, variant, vec![AtomSet::EMPTY; poset.len()])
    }

    /// `[a ∈ Δ]`: outer daseinisation of `χ_Δ(a)` (contravariant) or inner
    /// daseinisation (covariant) at every context.
    pub fn elementary(
        a: &HermitianOp,
        delta: &BorelSet,
        poset: &'p ContextPoset,
        variant: Variant,
    ) -> Subobject<'p> {
        let chi = a.spectrum().projection(delta);
        Subobject::from_projection(&chi, poset, variant)
    }

    /// Daseinisation of a fixed projection at every context.
    pub fn from_projection(p: &ProjectionOp, poset: &'p ContextPoset, variant: Variant) -> Subobject<'p> {
        let family = poset
            .contexts()
            .iter()
            .map(|c| match variant {
                Variant::Contravariant => outer_atoms(p, c),
                Variant::Covariant => inner_atoms(p, c),
            })
            .collect();
        Subobject::from_family_unchecked(poset, variant, family)
    }

    pub fn poset(&self) -> &'p ContextPoset {
        self.poset
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn family(&self) -> &[AtomSet] {
        &self.family
    }

    pub fn at(&self, c: usize) -> AtomSet {
        self.family[c]
    }

    /// `p_{S_C}`.
    pub fn projection_at(&self, c: usize) -> ProjectionOp {
        self.poset.context(c).projection(self.family[c])
    }

    pub fn is_valid(&self) -> bool {
        closure_violation(self.poset, self.variant, &self.family).is_none()
    }

    fn compatible(&self, other: &Subobject<'_>) -> Result<(), LogicError> {
        if self.variant != other.variant {
            return Err(LogicError::VariantMismatch(self.variant, other.variant));
        }
        if !std::ptr::eq(self.poset, other.poset) {
            return Err(LogicError::PosetMismatch);
        }
        Ok(())
    }

    fn pointwise(&self, other: &Subobject<'p>, f: impl Fn(AtomSet, AtomSet) -> AtomSet) -> Subobject<'p> {
        let family = self
            .family
            .iter()
            .zip(&other.family)
            .map(|(&s, &t)| f(s, t))
            .collect();
        Subobject::from_family_unchecked(self.poset, self.variant, family)
    }

    pub fn meet(&self, other: &Subobject<'p>) -> Result<Subobject<'p>, LogicError> {
        self.compatible(other)?;
        Ok(self.pointwise(other, AtomSet::intersection))
    }

    pub fn join(&self, other: &Subobject<'p>) -> Result<Subobject<'p>, LogicError> {
        self.compatible(other)?;
        Ok(self.pointwise(other, AtomSet::union))
    }

    /// Heyting implication `S ⇒ T`.
    pub fn implies(&self, other: &Subobject<'p>) -> Result<Subobject<'p>, LogicError> {
        self.compatible(other)?;
        let poset = self.poset;
        let family = match self.variant {
            Variant::Contravariant => {
                if !poset.is_down_closed() {
                    return Err(LogicError::PosetNotDownClosed);
                }
                (0..poset.len())
                    .map(|c| {
                        let down = poset.down_set(c);
                        AtomSet::from_indices((0..poset.context(c).len()).filter(|&lam| {
                            down.iter().all(|&d| {
                                let r = poset.restrict(c, lam, d);
                                !self.family[d].contains(r) || other.family[d].contains(r)
                            })
                        }))
                    })
                    .collect()
            }
            Variant::Covariant => (0..poset.len())
                .map(|c| {
                    let up = poset.up_set(c);
                    AtomSet::from_indices((0..poset.context(c).len()).filter(|&lam| {
                        up.iter().all(|&e| {
                            poset
                                .fiber(c, lam, e)
                                .into_iter()
                                .all(|l| !self.family[e].contains(l) || other.family[e].contains(l))
                        })
                    }))
                })
                .collect(),
        };
        Ok(Subobject::from_family_unchecked(poset, self.variant, family))
    }

    /// `¬S = S ⇒ ⊥`.
    pub fn neg(&self) -> Result<Subobject<'p>, LogicError> {
        self.implies(&Subobject::bottom(self.poset, self.variant))
    }

    /// Pointwise inclusion.
    pub fn leq(&self, other: &Subobject<'_>) -> bool {
        self.family
            .iter()
            .zip(&other.family)
            .all(|(s, t)| s.is_subset(*t))
    }
}

/// Covariant negation computed from projections: the atoms `q` of `C` with
/// `q ≤ 1 - p_{S_E}` for every `E ⊇ C` in the poset.
pub fn covariant_negation_projections(s: &Subobject<'_>) -> Vec<ProjectionOp> {
    let poset = s.poset();
    (0..poset.len())
        .map(|c| {
            let ctx = poset.context(c);
            let complements: Vec<ProjectionOp> = poset
                .up_set(c)
                .into_iter()
                .map(|e| s.projection_at(e).complement())
                .collect();
            let keep = AtomSet::from_indices(
                (0..ctx.len()).filter(|&i| complements.iter().all(|r| proj_leq(ctx.atom(i), r))),
            );
            ctx.projection(keep)
        })
        .collect()
}

pub fn validate_subobject(s: &Subobject<'_>) -> bool {
    s.is_valid()
}
