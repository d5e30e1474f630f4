//! Hermitian spectral calculus on small dense complex matrices.

mod borel;

pub use borel::{BorelSet, Interval};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::tol::Tolerances;

pub type Mat = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not hermitian: max |M - M†| = {deviation:e}")]
    NonHermitian { deviation: f64 },
    #[error("matrix is not a projection: max |P² - P| = {deviation:e}")]
    NonProjection { deviation: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("{0}")]
    BadInterval(String),
}

/// Entrywise sup norm `‖M‖_∞`.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Real part of the trace of `a·b`.
pub fn trace_product(a: &Mat, b: &Mat) -> f64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

fn check_square(m: &Mat) -> Result<(), LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn symmetrize(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

/// A self-adjoint operator in `M_n(ℂ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp(Mat);

impl HermitianOp {
    pub fn new(m: Mat) -> Result<HermitianOp, LinalgError> {
        check_square(&m)?;
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > Tolerances::global().herm {
            return Err(LinalgError::NonHermitian { deviation });
        }
        Ok(HermitianOp(symmetrize(&m)))
    }

    /// Wrap a matrix already known to be hermitian up to rounding.
    pub(crate) fn from_matrix_unchecked(m: Mat) -> HermitianOp {
        HermitianOp(symmetrize(&m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> HermitianOp {
        let n = diag.len();
        HermitianOp(Mat::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<HermitianOp, LinalgError> {
        let n = rows.len();
        let m = Mat::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        HermitianOp::new(m)
    }

    pub fn identity(n: usize) -> HermitianOp {
        HermitianOp(identity(n))
    }

    pub fn scalar(n: usize, c: f64) -> HermitianOp {
        HermitianOp(identity(n).scale(c))
    }

    /// `Σ_i c_i P_i` for real coefficients and hermitian summands.
    pub fn combination<'a>(
        n: usize,
        terms: impl IntoIterator<Item = (f64, &'a Mat)>,
    ) -> HermitianOp {
        let mut m = Mat::zeros(n, n);
        for (c, p) in terms {
            m += p.scale(c);
        }
        HermitianOp::from_matrix_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    /// Operator norm (largest absolute eigenvalue).
    pub fn norm(&self) -> f64 {
        let ev = self.0.clone().symmetric_eigenvalues();
        ev.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(self)
    }
}

/// An orthogonal projection in `M_n(ℂ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOp(Mat);

impl ProjectionOp {
    pub fn new(m: Mat) -> Result<ProjectionOp, LinalgError> {
        let h = HermitianOp::new(m)?;
        let m = h.into_matrix();
        let deviation = max_abs(&(&m * &m - &m));
        if deviation > Tolerances::global().proj {
            return Err(LinalgError::NonProjection { deviation });
        }
        Ok(ProjectionOp(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat) -> ProjectionOp {
        ProjectionOp(symmetrize(&m))
    }

    pub fn zero(n: usize) -> ProjectionOp {
        ProjectionOp(Mat::zeros(n, n))
    }

    pub fn identity(n: usize) -> ProjectionOp {
        ProjectionOp(identity(n))
    }

    /// Projection onto the span of a single nonzero vector.
    pub fn onto_vector(v: &[Complex64]) -> ProjectionOp {
        let n = v.len();
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        ProjectionOp(Mat::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<ProjectionOp, LinalgError> {
        ProjectionOp::new(HermitianOp::from_real_diagonal(diag).into_matrix())
    }

    /// Sum of mutually orthogonal projections.
    pub fn sum<'a>(n: usize, parts: impl IntoIterator<Item = &'a ProjectionOp>) -> ProjectionOp {
        let mut m = Mat::zeros(n, n);
        for p in parts {
            m += &p.0;
        }
        ProjectionOp::from_matrix_unchecked(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn as_hermitian(&self) -> HermitianOp {
        HermitianOp(self.0.clone())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn rank(&self) -> usize {
        self.trace().round().max(0.0) as usize
    }

    pub fn is_zero(&self) -> bool {
        max_abs(&self.0) <= Tolerances::global().ord
    }

    /// `1 - p`
    pub fn complement(&self) -> ProjectionOp {
        ProjectionOp::from_matrix_unchecked(identity(self.dim()) - &self.0)
    }

    /// Product of two commuting projections.
    pub fn commuting_meet(&self, other: &ProjectionOp) -> ProjectionOp {
        ProjectionOp::from_matrix_unchecked(&self.0 * &other.0)
    }

    pub fn approx_eq(&self, other: &ProjectionOp) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.0 - &other.0)) <= Tolerances::global().ord
    }
}

/// Range inclusion `p ≤ q`, tested as `‖q p - p‖_∞ ≤ tol_ord`.
pub fn proj_leq(p: &ProjectionOp, q: &ProjectionOp) -> bool {
    p.dim() == q.dim() && max_abs(&(&q.0 * &p.0 - &p.0)) <= Tolerances::global().ord
}

/// `pq = 0` within tolerance.
pub fn proj_orthogonal(p: &ProjectionOp, q: &ProjectionOp) -> bool {
    max_abs(&(&p.0 * &q.0)) <= Tolerances::global().ord
}

/// Join of two projections in `Proj(M_n)`: projection onto the sum of ranges.
pub fn proj_join(p: &ProjectionOp, q: &ProjectionOp) -> ProjectionOp {
    let s = HermitianOp::from_matrix_unchecked(&p.0 + &q.0);
    let spec = s.spectrum();
    spec.projection(&BorelSet::above(0.0))
}

/// Meet of two projections: projection onto the intersection of ranges.
pub fn proj_meet(p: &ProjectionOp, q: &ProjectionOp) -> ProjectionOp {
    proj_join(&p.complement(), &q.complement()).complement()
}

/// One eigenvalue cluster and its eigenprojection.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub projection: ProjectionOp,
}

/// Spectral decomposition with eigenvalues clustered and sorted ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    dim: usize,
    pairs: Vec<Eigenpair>,
    snap: f64,
}

impl Spectrum {
    pub fn of(a: &HermitianOp) -> Spectrum {
        let n = a.dim();
        let eig = a.0.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let norm = eig.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let snap = Tolerances::global().eig_abs(norm);

        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &i in &order {
            let v = eig.eigenvalues[i];
            match clusters.last_mut() {
                Some(c) if v - last <= snap => c.push(i),
                _ => clusters.push(vec![i]),
            }
            last = v;
        }

        let pairs = clusters
            .into_iter()
            .map(|c| {
                let value = c.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / c.len() as f64;
                let mut p = Mat::zeros(n, n);
                for &i in &c {
                    let v = eig.eigenvectors.column(i);
                    p += v * v.adjoint();
                }
                Eigenpair {
                    value,
                    projection: ProjectionOp::from_matrix_unchecked(p),
                }
            })
            .collect();
        Spectrum { dim: n, pairs, snap }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[Eigenpair] {
        &self.pairs
    }

    /// Distinct eigenvalues, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn min(&self) -> f64 {
        self.pairs.first().map(|p| p.value).unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.pairs.last().map(|p| p.value).unwrap_or(0.0)
    }

    /// Snap distance used for endpoint comparisons against this spectrum.
    pub fn snap(&self) -> f64 {
        self.snap
    }

    /// `χ_Δ(a)`: sum of eigenprojections with eigenvalue in `Δ`.
    pub fn projection(&self, delta: &BorelSet) -> ProjectionOp {
        ProjectionOp::sum(
            self.dim,
            self.pairs
                .iter()
                .filter(|p| delta.contains_snapped(p.value, self.snap))
                .map(|p| &p.projection),
        )
    }

    fn sum_where(&self, keep: impl Fn(f64) -> bool) -> ProjectionOp {
        ProjectionOp::sum(
            self.dim,
            self.pairs
                .iter()
                .filter(|p| keep(p.value))
                .map(|p| &p.projection),
        )
    }

    /// `e_x = χ_{(-∞,x]}(a)`.
    pub fn resolution(&self, x: f64) -> ProjectionOp {
        let snap = self.snap;
        self.sum_where(|v| v <= x + snap)
    }

    /// `e_{x⁻} = χ_{(-∞,x)}(a)`.
    pub fn resolution_open(&self, x: f64) -> ProjectionOp {
        let snap = self.snap;
        self.sum_where(|v| v < x - snap)
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> HermitianOp {
        HermitianOp::combination(
            self.dim,
            self.pairs.iter().map(|p| (p.value, p.projection.matrix())),
        )
    }
}

/// Eigenvalue clusters with their eigenprojections, ascending.
pub fn eigendecompose(a: &HermitianOp) -> Vec<Eigenpair> {
    Spectrum::of(a).pairs
}

pub fn spectral_projection(a: &HermitianOp, delta: &BorelSet) -> ProjectionOp {
    Spectrum::of(a).projection(delta)
}

pub fn spectral_resolution(a: &HermitianOp, x: f64) -> ProjectionOp {
    Spectrum::of(a).resolution(x)
}

/// Spectral order `a ≤_s b`: `e^b_x ≤ e^a_x` at every jump point of either family.
pub fn spectral_leq(a: &HermitianOp, b: &HermitianOp) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    spectra_leq(&Spectrum::of(a), &Spectrum::of(b))
}

/// [`spectral_leq`] on precomputed spectra.
pub fn spectra_leq(a: &Spectrum, b: &Spectrum) -> bool {
    let mut xs = a.values();
    xs.extend(b.values());
    xs.sort_by(f64::total_cmp);
    xs.iter()
        .all(|&x| proj_leq(&b.resolution(x), &a.resolution(x)))
}

/// Usual operator order: `b - a` positive semidefinite within tolerance.
pub fn operator_leq(a: &HermitianOp, b: &HermitianOp) -> bool {
    let diff = HermitianOp::from_matrix_unchecked(b.matrix() - a.matrix());
    let ev = diff.0.symmetric_eigenvalues();
    let tol = Tolerances::global().eig_abs(a.norm().max(b.norm()));
    ev.iter().all(|&x| x >= -tol)
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices and friends, used throughout the examples and tests.
pub mod named {
    use super::*;

    pub fn sigma_x() -> HermitianOp {
        HermitianOp::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn sigma_y() -> HermitianOp {
        let m = Mat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)]);
        HermitianOp::new(m).unwrap()
    }

    pub fn sigma_z() -> HermitianOp {
        HermitianOp::from_real_diagonal(&[1.0, -1.0])
    }

    /// Hadamard unitary `(σ_x + σ_z)/√2`.
    pub fn hadamard() -> Mat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Mat::from_row_slice(2, 2, &[c64(s, 0.0), c64(s, 0.0), c64(s, 0.0), c64(-s, 0.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    fn diag_proj(d: &[f64]) -> ProjectionOp {
        ProjectionOp::from_real_diagonal(d).unwrap()
    }

    fn half_ones(sign: f64) -> ProjectionOp {
        let m = Mat::from_row_slice(2, 2, &[c64(0.5, 0.0), c64(0.5 * sign, 0.0), c64(0.5 * sign, 0.0), c64(0.5, 0.0)]);
        ProjectionOp::new(m).unwrap()
    }

    #[test]
    fn eigendecompose_sigma_z() {
        let pairs = eigendecompose(&sigma_z());
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].value + 1.0).abs() < 1e-12);
        assert!(pairs[0].projection.approx_eq(&diag_proj(&[0.0, 1.0])));
        assert!((pairs[1].value - 1.0).abs() < 1e-12);
        assert!(pairs[1].projection.approx_eq(&diag_proj(&[1.0, 0.0])));
    }

    #[test]
    fn eigendecompose_identity_is_one_cluster() {
        let pairs = eigendecompose(&HermitianOp::identity(2));
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].value - 1.0).abs() < 1e-12);
        assert!(pairs[0].projection.approx_eq(&ProjectionOp::identity(2)));
    }

    #[test]
    fn eigendecompose_sigma_x() {
        let sx = sigma_x();
        let pairs = eigendecompose(&sx);
        let plus = &pairs[1];
        let minus = &pairs[0];
        assert!((plus.value - 1.0).abs() < 1e-12);
        assert!((minus.value + 1.0).abs() < 1e-12);
        assert!(plus.projection.approx_eq(&half_ones(1.0)));
        assert!(minus.projection.approx_eq(&half_ones(-1.0)));
        for pair in &pairs {
            let p = pair.projection.matrix();
            assert!(max_abs(&(p * p - p)) < 1e-12);
            assert!(max_abs(&(sx.matrix() * p - p.scale(pair.value))) < 1e-12);
        }
    }

    #[test]
    fn degenerate_spectrum_clusters() {
        let a = HermitianOp::from_real_diagonal(&[2.0, 2.0 + 1e-12, -1.0]);
        let pairs = eigendecompose(&a);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[1].projection.rank(), 2);
        let rec = Spectrum::of(&a).reconstruct();
        assert!(max_abs(&(rec.matrix() - a.matrix())) < 1e-8);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Mat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(HermitianOp::new(m), Err(LinalgError::NonHermitian { .. })));
        let not_proj = HermitianOp::from_real_diagonal(&[2.0, 0.0]).into_matrix();
        assert!(matches!(ProjectionOp::new(not_proj), Err(LinalgError::NonProjection { .. })));
    }

    #[test]
    fn spectral_projection_examples() {
        let sz = sigma_z();
        assert!(spectral_projection(&sz, &BorelSet::open(0.5, 1.5)).approx_eq(&diag_proj(&[1.0, 0.0])));
        assert!(spectral_projection(&sz, &BorelSet::real_line()).approx_eq(&ProjectionOp::identity(2)));
        assert!(spectral_projection(&sz, &BorelSet::open(2.0, 3.0)).is_zero());
    }

    #[test]
    fn spectral_projection_endpoint_snap() {
        let a = HermitianOp::from_real_diagonal(&[1.0 + 1e-11, 0.0]);
        assert!(spectral_projection(&a, &BorelSet::open(0.5, 1.0)).is_zero());
        assert_eq!(spectral_projection(&a, &BorelSet::closed(0.5, 1.0)).rank(), 1);
    }

    #[test]
    fn spectral_resolution_examples() {
        let sz = sigma_z();
        assert!(spectral_resolution(&sz, 0.0).approx_eq(&diag_proj(&[0.0, 1.0])));
        assert!(spectral_resolution(&sz, 1.0).approx_eq(&ProjectionOp::identity(2)));
        assert!(spectral_resolution(&sz, -2.0).is_zero());
    }

    #[test]
    fn proj_leq_examples() {
        let p = diag_proj(&[1.0, 0.0]);
        assert!(proj_leq(&ProjectionOp::zero(2), &half_ones(1.0)));
        assert!(proj_leq(&p, &ProjectionOp::identity(2)));
        assert!(!proj_leq(&p, &half_ones(1.0)));
    }

    #[test]
    fn spectral_leq_examples() {
        let sz = sigma_z();
        let sx = sigma_x();
        assert!(spectral_leq(&sz, &sz));
        assert!(spectral_leq(&HermitianOp::scalar(2, -1.0), &sz));
        assert!(!spectral_leq(&sz, &sx));
        assert!(!spectral_leq(&sx, &sz));
    }

    #[test]
    fn join_and_meet_of_noncommuting_projections() {
        let pz = diag_proj(&[1.0, 0.0]);
        let px = half_ones(1.0);
        assert!(proj_join(&pz, &px).approx_eq(&ProjectionOp::identity(2)));
        assert!(proj_meet(&pz, &px).is_zero());
        assert!(proj_meet(&pz, &pz).approx_eq(&pz));
    }
}
