//! Outer and inner daseinisation of projections and self-adjoint operators.

use thiserror::Error;

use crate::contexts::{AtomSet, Context, ContextError};
use crate::linalg::{max_abs, proj_leq, spectra_leq, HermitianOp, ProjectionOp, Spectrum};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DaseiniseError {
    #[error("operator is not an element of the context")]
    NotInContext(#[from] ContextError),
}

/// Atoms `q` of `C` with `qp ≠ 0`.
pub fn outer_atoms(p: &ProjectionOp, c: &Context) -> AtomSet {
    let tol = Tolerances::global().ord;
    AtomSet::from_indices(
        (0..c.len()).filter(|&i| max_abs(&(c.atom(i).matrix() * p.matrix())) > tol),
    )
}

/// Atoms `q` of `C` with `q ≤ p`.
pub fn inner_atoms(p: &ProjectionOp, c: &Context) -> AtomSet {
    AtomSet::from_indices((0..c.len()).filter(|&i| proj_leq(c.atom(i), p)))
}

/// `δ^o(p)_C`: the least projection of `C` above `p`.
pub fn daseinise_proj_outer(p: &ProjectionOp, c: &Context) -> ProjectionOp {
    c.projection(outer_atoms(p, c))
}

/// `δ^i(p)_C`: the greatest projection of `C` below `p`.
pub fn daseinise_proj_inner(p: &ProjectionOp, c: &Context) -> ProjectionOp {
    c.projection(inner_atoms(p, c))
}

/// Per-atom values of `δ^o(a)_C`: the least spectral value `x` with `q ≤ e^a_x`.
pub fn outer_values(spec: &Spectrum, c: &Context) -> Vec<f64> {
    let values = spec.values();
    c.atoms()
        .iter()
        .map(|q| {
            values
                .iter()
                .copied()
                .find(|&x| proj_leq(q, &spec.resolution(x)))
                .unwrap_or_else(|| spec.max())
        })
        .collect()
}

/// Per-atom values of `δ^i(a)_C`: the greatest spectral value `x` with
/// `q ≤ 1 - e^a_{x⁻}`.
pub fn inner_values(spec: &Spectrum, c: &Context) -> Vec<f64> {
    let values = spec.values();
    c.atoms()
        .iter()
        .map(|q| {
            values
                .iter()
                .rev()
                .copied()
                .find(|&x| proj_leq(q, &spec.resolution_open(x).complement()))
                .unwrap_or_else(|| spec.min())
        })
        .collect()
}

/// `δ^o(a)_C = ⋀{b ∈ C_sa : b ≥_s a}`.
pub fn daseinise_sa_outer(a: &HermitianOp, c: &Context) -> HermitianOp {
    c.operator(&outer_values(&a.spectrum(), c))
}

/// `δ^i(a)_C = ⋁{b ∈ C_sa : b ≤_s a}`.
pub fn daseinise_sa_inner(a: &HermitianOp, c: &Context) -> HermitianOp {
    c.operator(&inner_values(&a.spectrum(), c))
}

/// Both Galois equivalences for `b ∈ C`:
/// `b ≤_s δ^i(a)_C ⟺ b ≤_s a` and `δ^o(a)_C ≤_s b ⟺ a ≤_s b`.
pub fn check_adjunction(
    a: &HermitianOp,
    b: &HermitianOp,
    c: &Context,
) -> Result<(bool, bool), DaseiniseError> {
    c.coefficients(b)?;
    let sa = a.spectrum();
    let sb = b.spectrum();
    let inner = daseinise_sa_inner(a, c).spectrum();
    let outer = daseinise_sa_outer(a, c).spectrum();
    let left = spectra_leq(&sb, &inner) == spectra_leq(&sb, &sa);
    let right = spectra_leq(&outer, &sb) == spectra_leq(&sa, &sb);
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::context_from_commuting;
    use crate::linalg::named::*;
    use crate::linalg::{c64, Mat};

    fn cz() -> Context {
        context_from_commuting(&[sigma_z()]).unwrap()
    }

    fn cx() -> Context {
        context_from_commuting(&[sigma_x()]).unwrap()
    }

    fn pz() -> ProjectionOp {
        ProjectionOp::from_real_diagonal(&[1.0, 0.0]).unwrap()
    }

    fn close(a: &HermitianOp, b: &HermitianOp) -> bool {
        max_abs(&(a.matrix() - b.matrix())) < 1e-9
    }

    #[test]
    fn outer_projection_examples() {
        assert!(daseinise_proj_outer(&pz(), &cz()).approx_eq(&pz()));
        assert!(daseinise_proj_outer(&pz(), &cx()).approx_eq(&ProjectionOp::identity(2)));
        assert!(daseinise_proj_outer(&ProjectionOp::zero(2), &cx()).is_zero());
    }

    #[test]
    fn inner_projection_examples() {
        assert!(daseinise_proj_inner(&pz(), &cx()).is_zero());
        assert!(daseinise_proj_inner(&pz(), &cz()).approx_eq(&pz()));
        assert!(daseinise_proj_inner(&ProjectionOp::identity(2), &cx())
            .approx_eq(&ProjectionOp::identity(2)));
    }

    #[test]
    fn self_adjoint_examples() {
        let b = Context::bottom(2);
        let sz = sigma_z();
        assert!(close(&daseinise_sa_outer(&sz, &b), &HermitianOp::identity(2)));
        assert!(close(&daseinise_sa_outer(&sz, &cx()), &HermitianOp::identity(2)));
        assert!(close(&daseinise_sa_outer(&sz, &cz()), &sz));
        assert!(close(&daseinise_sa_inner(&sz, &b), &HermitianOp::scalar(2, -1.0)));
        assert!(close(&daseinise_sa_inner(&sz, &cx()), &HermitianOp::scalar(2, -1.0)));
        assert!(close(&daseinise_sa_inner(&sz, &cz()), &sz));
    }

    #[test]
    fn projection_as_operator_agrees() {
        let v = [c64(0.6, 0.0), c64(0.0, 0.8)];
        let p = ProjectionOp::onto_vector(&v);
        for c in [cz(), cx(), Context::bottom(2)] {
            let outer = daseinise_sa_outer(&p.as_hermitian(), &c);
            let inner = daseinise_sa_inner(&p.as_hermitian(), &c);
            assert!(close(&outer, &daseinise_proj_outer(&p, &c).as_hermitian()));
            assert!(close(&inner, &daseinise_proj_inner(&p, &c).as_hermitian()));
        }
    }

    #[test]
    fn adjunction_examples() {
        let sz = sigma_z();
        let c = cx();
        let unit = daseinise_sa_inner(&sz, &c);
        assert_eq!(check_adjunction(&sz, &unit, &c).unwrap(), (true, true));
        let zero = HermitianOp::combination(2, [(0.0, &Mat::identity(2, 2))]);
        assert_eq!(check_adjunction(&sz, &zero, &c).unwrap(), (true, true));
        assert!(check_adjunction(&sz, &sz, &c).is_err());
    }

    #[test]
    fn complement_identity() {
        let p = ProjectionOp::onto_vector(&[c64(1.0, 0.0), c64(2.0, 1.0)]);
        for c in [cz(), cx(), Context::bottom(2)] {
            let lhs = daseinise_proj_inner(&p.complement(), &c);
            let rhs = daseinise_proj_outer(&p, &c).complement();
            assert!(lhs.approx_eq(&rhs));
        }
    }
}
