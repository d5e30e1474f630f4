//! Seeded random operators, contexts, states, and intervals.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::contexts::{Context, ContextPoset, PosetOptions};
use crate::dynamics::StarHom;
use crate::linalg::{c64, BorelSet, HermitianOp, Interval, Mat, ProjectionOp};
use crate::states::State;

pub fn ginibre<R: Rng>(n: usize, rng: &mut R) -> Mat {
    Mat::from_fn(n, n, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub fn unitary<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// GUE-like hermitian matrix.
pub fn hermitian_generic<R: Rng>(n: usize, rng: &mut R) -> HermitianOp {
    let g = ginibre(n, rng);
    HermitianOp::combination(n, [(0.5, &(&g + g.adjoint()))])
}

/// Hermitian matrix with small integer eigenvalues, so repeated values occur.
pub fn hermitian_degenerate<R: Rng>(n: usize, rng: &mut R) -> HermitianOp {
    let u = unitary(n, rng);
    let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-2..=2) as f64).collect();
    let d = HermitianOp::from_real_diagonal(&diag);
    let m = &u * d.matrix() * u.adjoint();
    HermitianOp::combination(n, [(0.5, &(&m + m.adjoint()))])
}

/// Generic or degenerate with equal odds.
pub fn hermitian<R: Rng>(n: usize, rng: &mut R) -> HermitianOp {
    if rng.random_bool(0.5) {
        hermitian_generic(n, rng)
    } else {
        hermitian_degenerate(n, rng)
    }
}

fn column_projection(u: &Mat, cols: &[usize]) -> ProjectionOp {
    let n = u.nrows();
    let parts: Vec<ProjectionOp> = cols
        .iter()
        .map(|&j| ProjectionOp::onto_vector(u.column(j).as_slice()))
        .collect();
    ProjectionOp::sum(n, parts.iter())
}

/// Random partition of `0..k` into nonempty blocks.
pub fn partition<R: Rng>(k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let blocks = rng.random_range(1..=k.max(1));
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    for (i, &j) in order.iter().enumerate() {
        let b = if i < blocks { i } else { rng.random_range(0..blocks) };
        out[b].push(j);
    }
    out.retain(|b| !b.is_empty());
    out
}

/// Context whose atoms are spans of grouped columns of a Haar unitary.
pub fn context<R: Rng>(n: usize, rng: &mut R) -> Context {
    let u = unitary(n, rng);
    let atoms = partition(n, rng)
        .iter()
        .map(|b| column_projection(&u, b))
        .collect();
    Context::new(atoms, None).expect("columns of a unitary give a partition of unity")
}

/// Context refined from the diagonal (computational basis) with a random
/// grouping of basis vectors.
pub fn diagonal_context<R: Rng>(n: usize, rng: &mut R) -> Context {
    Context::diagonal(n).coarsen(&partition(n, rng), None)
}

/// Projection of uniformly random rank onto a Haar-random subspace.
pub fn projection<R: Rng>(n: usize, rng: &mut R) -> ProjectionOp {
    let u = unitary(n, rng);
    let rank = rng.random_range(0..=n);
    column_projection(&u, &(0..rank).collect::<Vec<_>>())
}

/// A projection related to `c`: a random projection, a sum of atoms of `c`,
/// or a sum of atoms of `c` joined with a random vector. The last two make
/// nontrivial inner daseinisations likely.
pub fn projection_for<R: Rng>(c: &Context, rng: &mut R) -> ProjectionOp {
    let n = c.dim();
    let atoms: Vec<&ProjectionOp> = c.atoms().iter().filter(|_| rng.random_bool(0.5)).collect();
    let base = ProjectionOp::sum(n, atoms.iter().copied());
    match rng.random_range(0..3) {
        0 => projection(n, rng),
        1 => base,
        _ => {
            let v = unitary(n, rng);
            crate::linalg::proj_join(&base, &ProjectionOp::onto_vector(v.column(0).as_slice()))
        }
    }
}

/// Hermitian element of `c` with random integer coefficients.
pub fn element_of<R: Rng>(c: &Context, rng: &mut R) -> HermitianOp {
    let coeffs: Vec<f64> = (0..c.len()).map(|_| rng.random_range(-3..=3) as f64 * 0.5).collect();
    c.operator(&coeffs)
}

/// Down-closed poset generated by one to three random contexts, some of
/// them sharing the computational basis so that nontrivial order occurs.
pub fn poset<R: Rng>(n: usize, rng: &mut R) -> ContextPoset {
    let count = rng.random_range(1..=3);
    let gens: Vec<Context> = (0..count)
        .map(|_| {
            if rng.random_bool(0.5) {
                diagonal_context(n, rng)
            } else {
                context(n, rng)
            }
        })
        .collect();
    ContextPoset::build(n, gens, PosetOptions::default()).expect("small poset")
}

/// Automorphism `h = V Λ P V†` (random `V`, permutation `P`, phases `Λ`)
/// with a poset closed under `ĥ`: the coarsenings of the `V`-rotated
/// diagonal context and, when `Λ = 1`, the `ĥ`-orbit of one more random
/// context.
pub fn closed_automorphism<R: Rng>(n: usize, rng: &mut R) -> (StarHom, ContextPoset) {
    let v = unitary(n, rng);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let with_phases = rng.random_bool(0.5);
    let lp = Mat::from_fn(n, n, |i, j| {
        if perm[j] == i {
            if with_phases {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                c64(t.cos(), t.sin())
            } else {
                c64(1.0, 0.0)
            }
        } else {
            c64(0.0, 0.0)
        }
    });
    let h = StarHom::automorphism(&v * lp * v.adjoint()).expect("product of unitaries");
    let rotate = |c: &Context| {
        let atoms = c
            .atoms()
            .iter()
            .map(|q| ProjectionOp::from_matrix_unchecked(&v * q.matrix() * v.adjoint()))
            .collect();
        Context::new(atoms, None).expect("rotated partition of unity")
    };
    let mut gens = vec![rotate(&Context::diagonal(n))];
    if !with_phases {
        let mut c = context(n, rng);
        for _ in 0..n.max(1) * 6 {
            if gens.iter().any(|g| g.approx_eq(&c)) {
                break;
            }
            gens.push(c.clone());
            c = h.image_context(&c);
        }
    }
    let poset = ContextPoset::build(n, gens, PosetOptions::default()).expect("small poset");
    (h, poset)
}

/// Random density matrix `G G† / tr(G G†)`.
pub fn mixed_state<R: Rng>(n: usize, rng: &mut R) -> State {
    let g = ginibre(n, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let rho = m.unscale(tr);
    State::new(HermitianOp::combination(n, [(0.5, &(&rho + rho.adjoint()))]).into_matrix())
        .expect("normalised positive matrix")
}

pub fn pure_state<R: Rng>(n: usize, rng: &mut R) -> State {
    let u = unitary(n, rng);
    State::pure(u.column(0).as_slice()).expect("unit vector")
}

/// Pure or mixed with equal odds; sometimes an eigenvector of a basis
/// projection so that probability-one events occur.
pub fn state<R: Rng>(n: usize, rng: &mut R) -> State {
    match rng.random_range(0..3) {
        0 => mixed_state(n, rng),
        1 => pure_state(n, rng),
        _ => {
            let mut v = vec![c64(0.0, 0.0); n];
            v[rng.random_range(0..n)] = c64(1.0, 0.0);
            State::pure(&v).expect("unit vector")
        }
    }
}

/// A union of one or two intervals whose endpoints are drawn from the given
/// spectrum, its midpoints, and points outside it.
pub fn borel<R: Rng>(spectrum: &[f64], rng: &mut R) -> BorelSet {
    let mut points: Vec<f64> = spectrum.to_vec();
    for w in spectrum.windows(2) {
        points.push(0.5 * (w[0] + w[1]));
    }
    let lo = spectrum.first().copied().unwrap_or(0.0);
    let hi = spectrum.last().copied().unwrap_or(0.0);
    points.push(lo - 0.5);
    points.push(hi + 0.5);
    let pieces = rng.random_range(1..=2);
    let mut out = Vec::new();
    for _ in 0..pieces {
        let a = points[rng.random_range(0..points.len())];
        let b = points[rng.random_range(0..points.len())];
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let (lc, hc) = (rng.random_bool(0.5), rng.random_bool(0.5));
        out.push(Interval::new(a, b, lc || a == b, hc || a == b));
    }
    BorelSet::new(out)
}
