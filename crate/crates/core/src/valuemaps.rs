//! Daseinised operators as maps into lower and upper reals, with continuity,
//! sandwich, sup/inf and section checks on a finite context poset.

use serde::Serialize;
use thiserror::Error;

use crate::contexts::{AtomSet, Context, ContextPoset};
use crate::daseinise::{inner_values, outer_values};
use crate::linalg::{proj_leq, BorelSet, HermitianOp, Spectrum};
use crate::logic::{Subobject, Variant};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValueMapError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{candidates} candidate sections exceed the cap of {cap}")]
    CapExceeded { candidates: u128, cap: u128 },
}

/// Default limit on candidate functions in [`enumerate_sections`].
pub const SECTION_CAP: u128 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionKind {
    Lower,
    Upper,
}

/// A real-valued section over `↓C` (contravariant) or `↑C` (covariant).
#[derive(Clone, Debug, Serialize)]
pub struct MonotoneSection {
    pub base: usize,
    pub kind: SectionKind,
    pub variant: Variant,
    pub values: Vec<(usize, f64)>,
}

impl MonotoneSection {
    pub fn get(&self, d: usize) -> Option<f64> {
        self.values.iter().find(|(e, _)| *e == d).map(|(_, v)| *v)
    }

    fn order_reversing(&self) -> bool {
        matches!(
            (self.variant, self.kind),
            (Variant::Contravariant, SectionKind::Lower) | (Variant::Covariant, SectionKind::Upper)
        )
    }

    /// Lower sections reverse order and upper sections preserve it on `↓C`;
    /// the roles swap on `↑C`.
    pub fn is_well_formed(&self, poset: &ContextPoset) -> bool {
        let reversing = self.order_reversing();
        self.values.iter().all(|&(d, vd)| {
            self.values.iter().all(|&(c, vc)| {
                !poset.leq(d, c) || if reversing { vd >= vc } else { vd <= vc }
            })
        })
    }
}

/// A compact interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalValue {
    pub lo: f64,
    pub hi: f64,
}

impl IntervalValue {
    pub fn is_valid(&self) -> bool {
        self.lo <= self.hi
    }
}

/// Per-atom values of `δ^o(a)_C` and `δ^i(a)_C` at every context of a poset.
#[derive(Clone, Debug)]
pub struct DasTable {
    pub spectrum: Spectrum,
    pub outer: Vec<Vec<f64>>,
    pub inner: Vec<Vec<f64>>,
}

impl DasTable {
    pub fn new(a: &HermitianOp, poset: &ContextPoset) -> DasTable {
        let spectrum = a.spectrum();
        let outer = poset.contexts().iter().map(|c| outer_values(&spectrum, c)).collect();
        let inner = poset.contexts().iter().map(|c| inner_values(&spectrum, c)).collect();
        DasTable {
            spectrum,
            outer,
            inner,
        }
    }
}

/// Image of a point `λ` of `C` under the daseinised map.
#[derive(Clone, Debug, Serialize)]
pub struct DasMap {
    pub lower: MonotoneSection,
    pub upper: MonotoneSection,
    /// `[δ^i, δ^o]` at every stage.
    pub intervals: Vec<(usize, IntervalValue)>,
}

/// Contravariant: over `↓C`, the lower section is `D ↦ ⟨λ|_D, δ^o(a)_D⟩` and
/// the upper section uses `δ^i`. Covariant: over `↑C`, the lower section is
/// the least `⟨λ', δ^i(a)_E⟩` over points `λ'` of `E` above `λ`, the upper
/// section the greatest `⟨λ', δ^o(a)_E⟩`.
pub fn das_map(a: &HermitianOp, poset: &ContextPoset, c: usize, atom: usize, variant: Variant) -> DasMap {
    das_map_with(&DasTable::new(a, poset), poset, c, atom, variant)
}

pub fn das_map_with(table: &DasTable, poset: &ContextPoset, c: usize, atom: usize, variant: Variant) -> DasMap {
    let (lower_vals, upper_vals, intervals): (Vec<_>, Vec<_>, Vec<_>) = match variant {
        Variant::Contravariant => poset
            .down_set(c)
            .into_iter()
            .map(|d| {
                let r = poset.restrict(c, atom, d);
                let (o, i) = (table.outer[d][r], table.inner[d][r]);
                ((d, o), (d, i), (d, IntervalValue { lo: i, hi: o }))
            })
            .fold((Vec::new(), Vec::new(), Vec::new()), push3),
        Variant::Covariant => poset
            .up_set(c)
            .into_iter()
            .map(|e| {
                let fiber = poset.fiber(c, atom, e);
                let lo = fiber
                    .iter()
                    .map(|&l| table.inner[e][l])
                    .fold(f64::INFINITY, f64::min);
                let hi = fiber
                    .iter()
                    .map(|&l| table.outer[e][l])
                    .fold(f64::NEG_INFINITY, f64::max);
                ((e, lo), (e, hi), (e, IntervalValue { lo, hi }))
            })
            .fold((Vec::new(), Vec::new(), Vec::new()), push3),
    };
    DasMap {
        lower: MonotoneSection {
            base: c,
            kind: SectionKind::Lower,
            variant,
            values: lower_vals,
        },
        upper: MonotoneSection {
            base: c,
            kind: SectionKind::Upper,
            variant,
            values: upper_vals,
        },
        intervals,
    }
}

fn push3<A, B, C>(mut acc: (Vec<A>, Vec<B>, Vec<C>), x: (A, B, C)) -> (Vec<A>, Vec<B>, Vec<C>) {
    acc.0.push(x.0);
    acc.1.push(x.1);
    acc.2.push(x.2);
    acc
}

/// Thresholds probing every region of a step function with the given jumps:
/// the jumps, the midpoints between them, and one point beyond each end.
pub fn probe_points(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * values.len() + 1);
    let (Some(&first), Some(&last)) = (values.first(), values.last()) else {
        return vec![0.0];
    };
    out.push(first - 1.0);
    for w in values.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(last);
    out.push(last + 1.0);
    out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}

/// Preimage of a subbasic open: the points `(D, λ)` of the stage set whose
/// value satisfies `test`.
pub fn preimage(
    values: &[Vec<f64>],
    stages: &[usize],
    test: impl Fn(f64) -> bool,
) -> Vec<(usize, usize)> {
    stages
        .iter()
        .flat_map(|&d| {
            values[d]
                .iter()
                .enumerate()
                .filter(|(_, &v)| test(v))
                .map(move |(l, _)| (d, l))
        })
        .collect()
}

/// Openness of every preimage `δ(a)^{-1}(U_{x,C})` in the spectral bundle.
///
/// Contravariant: preimages of `{s(D) > x}` under `δ^o` and of `{s(D) < x}`
/// under `δ^i` over `↓C` must be closed under restriction. Covariant: the
/// preimages of `{> x}` under `δ^i` and `{< x}` under `δ^o` over `↑C` must be
/// closed under passing to finer contexts along fibers.
pub fn check_continuity(a: &HermitianOp, poset: &ContextPoset, variant: Variant) -> CheckReport {
    let table = DasTable::new(a, poset);
    let xs = probe_points(&table.spectrum.values());
    let mut report = CheckReport::default();
    for c in 0..poset.len() {
        for &x in &xs {
            let stages = match variant {
                Variant::Contravariant => poset.down_set(c),
                Variant::Covariant => poset.up_set(c),
            };
            let cases: [(&str, &[Vec<f64>], bool); 2] = match variant {
                Variant::Contravariant => [("outer > x", &table.outer, true), ("inner < x", &table.inner, false)],
                Variant::Covariant => [("inner > x", &table.inner, true), ("outer < x", &table.outer, false)],
            };
            for (name, values, greater) in cases {
                let set = preimage(values, &stages, |v| if greater { v > x } else { v < x });
                report.checked += 1;
                if let Some((d, l)) = first_escape(poset, &set, &stages, variant) {
                    report.violations.push(format!(
                        "{variant} preimage of {name} (x = {x}) at {} not open: escapes from ({}, {l})",
                        poset.label(c),
                        poset.label(d)
                    ));
                }
            }
        }
    }
    report
}

fn first_escape(
    poset: &ContextPoset,
    set: &[(usize, usize)],
    stages: &[usize],
    variant: Variant,
) -> Option<(usize, usize)> {
    let contains = |d: usize, l: usize| set.iter().any(|&(e, m)| e == d && m == l);
    for &(d, l) in set {
        for &e in stages {
            let ok = match variant {
                Variant::Contravariant => !poset.leq(e, d) || contains(e, poset.restrict(d, l, e)),
                Variant::Covariant => {
                    !poset.leq(d, e) || poset.fiber(d, l, e).into_iter().all(|m| contains(e, m))
                }
            };
            if !ok {
                return Some((d, l));
            }
        }
    }
    None
}

/// Per-context atom sets of the three terms of a sandwich inclusion.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub left: Vec<AtomSet>,
    pub middle: Vec<AtomSet>,
    pub right: Vec<AtomSet>,
    pub violations: Vec<String>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For `Δ = (s, r)`: contravariant
/// `{δ^i < r, δ^o > s} ⊆ [a<r] ∧ [a>s] ⊆ {δ^i < r+ε, δ^o > s-ε}`;
/// covariant `{s < δ^i, δ^o < r} ⊆ [a∈(s,r)] ⊆ {s-ε < δ^i, δ^o < r+ε}`.
// The negated comparisons also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn sandwich_check(
    a: &HermitianOp,
    s: f64,
    r: f64,
    eps: f64,
    poset: &ContextPoset,
    variant: Variant,
) -> Result<SandwichReport, ValueMapError> {
    if !(s < r) {
        return Err(ValueMapError::PreconditionViolated(format!("need s < r, got s = {s}, r = {r}")));
    }
    if !(eps > 0.0) {
        return Err(ValueMapError::PreconditionViolated(format!("need ε > 0, got {eps}")));
    }
    let table = DasTable::new(a, poset);
    let middle = match variant {
        Variant::Contravariant => {
            let below = Subobject::elementary(a, &BorelSet::below(r), poset, variant);
            let above = Subobject::elementary(a, &BorelSet::above(s), poset, variant);
            below.meet(&above).expect("same poset").family().to_vec()
        }
        Variant::Covariant => Subobject::elementary(a, &BorelSet::open(s, r), poset, variant)
            .family()
            .to_vec(),
    };
    let band = |lo: f64, hi: f64| -> Vec<AtomSet> {
        (0..poset.len())
            .map(|c| {
                AtomSet::from_indices((0..poset.context(c).len()).filter(|&l| {
                    let (i, o) = (table.inner[c][l], table.outer[c][l]);
                    match variant {
                        Variant::Contravariant => i < hi && o > lo,
                        Variant::Covariant => lo < i && o < hi,
                    }
                }))
            })
            .collect()
    };
    let left = band(s, r);
    let right = band(s - eps, r + eps);
    let mut violations = Vec::new();
    for c in 0..poset.len() {
        if !left[c].is_subset(middle[c]) {
            violations.push(format!("left ⊄ middle at {}", poset.label(c)));
        }
        if !middle[c].is_subset(right[c]) {
            violations.push(format!("middle ⊄ right at {}", poset.label(c)));
        }
    }
    Ok(SandwichReport {
        left,
        middle,
        right,
        violations,
    })
}

/// Values of `⟨λ, δ^i(a)_C⟩` and `⟨λ, δ^o(a)_C⟩` recovered from the
/// projection lattice of `C`:
/// `sup{r : ∃p ∈ P(C), λ ∈ p, p ≤ 1 - χ_{(-∞,r)}(a)}` and
/// `inf{r : ∃p ∈ P(C), λ ∈ p, p ≤ χ_{(-∞,r)}(a)}`.
/// Empty or unbounded extrema are replaced by the ends of the spectrum.
pub fn ujelly_values(a: &HermitianOp, c: &Context, atom: usize) -> (f64, f64) {
    let spec = a.spectrum();
    let values = spec.values();
    let (min, max) = (spec.min(), spec.max());
    let subsets: Vec<AtomSet> = AtomSet::all_subsets(c.len()).filter(|s| s.contains(atom)).collect();
    let witness = |target: &crate::linalg::ProjectionOp| subsets.iter().any(|&s| proj_leq(&c.projection(s), target));

    // Probes in ascending order, each tagged with the interval of thresholds it
    // stands for: (probe, left end, right end).
    let mut probes: Vec<(f64, f64, f64)> = vec![(min - 1.0, f64::NEG_INFINITY, min)];
    for (k, &x) in values.iter().enumerate() {
        probes.push((x, x, x));
        let next = values.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let mid = if next.is_finite() { 0.5 * (x + next) } else { x + 1.0 };
        probes.push((mid, x, next));
    }

    let hits_sup: Vec<bool> = probes
        .iter()
        .map(|&(r, _, _)| witness(&spec.resolution_open(r).complement()))
        .collect();
    let sup = match probes.iter().zip(&hits_sup).rfind(|(_, &h)| h) {
        None => f64::NEG_INFINITY,
        Some((&(_, _, right), _)) => right,
    };
    let hits_inf: Vec<bool> = probes
        .iter()
        .map(|&(r, _, _)| witness(&spec.resolution_open(r)))
        .collect();
    let inf = match probes.iter().zip(&hits_inf).find(|(_, &h)| h) {
        None => f64::INFINITY,
        Some((&(_, left, _), _)) => left,
    };
    let clamp = |v: f64| {
        if v == f64::NEG_INFINITY {
            min
        } else if v == f64::INFINITY {
            max
        } else {
            v
        }
    };
    (clamp(sup), clamp(inf))
}

/// Compare [`ujelly_values`] with the closed-form daseinised values.
pub fn check_ujelly(a: &HermitianOp, c: &Context, atom: usize) -> (bool, bool) {
    let spec = a.spectrum();
    let inner = inner_values(&spec, c)[atom];
    let outer = outer_values(&spec, c)[atom];
    let (sup, inf) = ujelly_values(a, c, atom);
    let tol = Tolerances::global().eig_abs(spec.max().abs().max(spec.min().abs()));
    ((sup - inner).abs() <= tol, (inf - outer).abs() <= tol)
}

/// Outcome of [`enumerate_sections`].
#[derive(Clone, Debug, Serialize)]
pub struct SectionReport {
    pub base: usize,
    pub candidates: usize,
    pub continuous: usize,
    pub compatible: usize,
    /// Continuous sections that are not compatible families, or the reverse.
    pub mismatches: Vec<Vec<usize>>,
}

impl SectionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Enumerate every choice of a point at each stage of `↓C`, keep those that
/// are continuous into the spectral bundle, and compare with compatible
/// families. Continuity is tested on the basic opens `↓(D, λ)`, whose
/// preimage must be a down-set.
pub fn enumerate_sections(poset: &ContextPoset, c: usize, cap: u128) -> Result<SectionReport, ValueMapError> {
    let stages = poset.down_set(c);
    let sizes: Vec<usize> = stages.iter().map(|&d| poset.context(d).len()).collect();
    let candidates = sizes.iter().fold(1u128, |acc, &k| acc.saturating_mul(k as u128));
    if candidates > cap {
        return Err(ValueMapError::CapExceeded { candidates, cap });
    }
    let mut choice = vec![0usize; stages.len()];
    let mut report = SectionReport {
        base: c,
        candidates: candidates as usize,
        continuous: 0,
        compatible: 0,
        mismatches: Vec::new(),
    };
    loop {
        let value = |d: usize| choice[stages.iter().position(|&s| s == d).expect("stage")];
        let continuous = stages.iter().all(|&d| {
            (0..poset.context(d).len()).all(|lam| {
                // Preimage of ↓(D, λ) is {D' ⊆ D : s(D') = λ|_{D'}}.
                let pre: Vec<usize> = stages
                    .iter()
                    .copied()
                    .filter(|&e| poset.leq(e, d) && value(e) == poset.restrict(d, lam, e))
                    .collect();
                pre.iter().all(|&e| {
                    stages
                        .iter()
                        .all(|&f| !poset.leq(f, e) || pre.contains(&f))
                })
            })
        });
        let compatible = stages.iter().all(|&hi| {
            stages
                .iter()
                .all(|&lo| !poset.leq(lo, hi) || value(lo) == poset.restrict(hi, value(hi), lo))
        });
        report.continuous += continuous as usize;
        report.compatible += compatible as usize;
        if continuous != compatible {
            report.mismatches.push(choice.clone());
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(report);
            }
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
