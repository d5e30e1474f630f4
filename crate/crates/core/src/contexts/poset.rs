use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::partitions::{bell, blocks, set_partitions};
use super::{restriction_map, AtomKey, Context, ContextError};

/// Default maximum number of contexts a poset may hold.
pub const DEFAULT_CAP: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PosetOptions {
    /// Add every coarsening of every generator.
    pub down_close: bool,
    /// Keep the trivial context `ℂ·1`; when false it is removed.
    pub include_bottom: bool,
    pub cap: usize,
}

impl Default for PosetOptions {
    fn default() -> Self {
        PosetOptions {
            down_close: true,
            include_bottom: true,
            cap: DEFAULT_CAP,
        }
    }
}

/// A finite set of contexts ordered by inclusion.
#[derive(Clone, Debug)]
pub struct ContextPoset {
    dim: usize,
    contexts: Vec<Context>,
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
    restrictions: HashMap<(usize, usize), Vec<usize>>,
    buckets: HashMap<Vec<AtomKey>, Vec<usize>>,
    down_closed: bool,
    bottom_included: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BottomMode {
    Add,
    Remove,
    AsGiven,
}

struct Collector {
    contexts: Vec<Context>,
    labels: Vec<String>,
    buckets: HashMap<Vec<AtomKey>, Vec<usize>>,
    cap: usize,
}

impl Collector {
    fn find(&self, c: &Context) -> Option<usize> {
        self.buckets
            .get(c.keys())
            .and_then(|ids| ids.iter().copied().find(|&i| self.contexts[i].approx_eq(c)))
    }

    fn insert(&mut self, c: Context, label: String) -> Result<usize, ContextError> {
        if let Some(i) = self.find(&c) {
            return Ok(i);
        }
        if self.contexts.len() >= self.cap {
            return Err(ContextError::PosetTooLarge { cap: self.cap });
        }
        let i = self.contexts.len();
        self.buckets.entry(c.keys().to_vec()).or_default().push(i);
        self.contexts.push(c);
        self.labels.push(label);
        Ok(i)
    }
}

fn partition_label(parent: &str, rgs: &[usize]) -> String {
    let parts: Vec<String> = blocks(rgs)
        .iter()
        .map(|b| {
            b.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    format!("{parent}:{}", parts.join("|"))
}

impl ContextPoset {
    /// Build a poset from generator contexts. Unlabelled generators are
    /// named `G0`, `G1`, …; coarsenings are named `parent:blocks`; the trivial
    /// context is `C1`.
    pub fn build(
        dim: usize,
        generators: Vec<Context>,
        opts: PosetOptions,
    ) -> Result<ContextPoset, ContextError> {
        let bottom = if opts.include_bottom {
            BottomMode::Add
        } else {
            BottomMode::Remove
        };
        ContextPoset::build_with(dim, generators, opts.down_close, bottom, opts.cap)
    }

    fn build_with(
        dim: usize,
        generators: Vec<Context>,
        down_close: bool,
        bottom: BottomMode,
        cap: usize,
    ) -> Result<ContextPoset, ContextError> {
        let opts = PosetOptions {
            down_close,
            include_bottom: bottom != BottomMode::Remove,
            cap,
        };
        let mut col = Collector {
            contexts: Vec::new(),
            labels: Vec::new(),
            buckets: HashMap::new(),
            cap: opts.cap,
        };
        let mut gen_ids = Vec::new();
        for (i, g) in generators.into_iter().enumerate() {
            if g.dim() != dim {
                return Err(ContextError::DimMismatch {
                    expected: dim,
                    got: g.dim(),
                });
            }
            let label = if g.is_bottom() {
                "C1".to_string()
            } else {
                g.label().map_or_else(|| format!("G{i}"), str::to_string)
            };
            gen_ids.push(col.insert(g, label)?);
        }
        if opts.down_close {
            for &g in &gen_ids {
                let parent = col.contexts[g].clone();
                let k = parent.len();
                if bell(k) > opts.cap as u128 {
                    return Err(ContextError::PosetTooLarge { cap: opts.cap });
                }
                let parent_label = col.labels[g].clone();
                for rgs in set_partitions(k) {
                    let bl = blocks(&rgs);
                    if bl.len() == k {
                        continue;
                    }
                    let label = if bl.len() == 1 {
                        "C1".to_string()
                    } else {
                        partition_label(&parent_label, &rgs)
                    };
                    let c = parent.coarsen(&bl, None);
                    col.insert(c, label)?;
                }
            }
        }
        if bottom == BottomMode::Add {
            col.insert(Context::bottom(dim), "C1".into())?;
        }

        let mut order: Vec<usize> = (0..col.contexts.len())
            .filter(|&i| opts.include_bottom || !col.contexts[i].is_bottom())
            .collect();
        order.sort_by(|&a, &b| col.contexts[a].canonical_cmp(&col.contexts[b]));

        let mut contexts = Vec::with_capacity(order.len());
        let mut labels = Vec::with_capacity(order.len());
        for &i in &order {
            let label = col.labels[i].clone();
            if labels.contains(&label) {
                return Err(ContextError::DuplicateLabel(label));
            }
            contexts.push(col.contexts[i].clone().with_label(label.clone()));
            labels.push(label);
        }
        Ok(ContextPoset::assemble(dim, contexts, labels, opts.down_close, opts.cap))
    }

    fn assemble(
        dim: usize,
        contexts: Vec<Context>,
        labels: Vec<String>,
        down_closed_by_construction: bool,
        cap: usize,
    ) -> ContextPoset {
        let n = contexts.len();
        let mut leq = vec![vec![false; n]; n];
        let mut restrictions = HashMap::new();
        for c in 0..n {
            for d in 0..n {
                if c == d {
                    leq[d][c] = true;
                    restrictions.insert((c, d), (0..contexts[c].len()).collect());
                } else if let Some(map) = restriction_map(&contexts[c], &contexts[d]) {
                    leq[d][c] = true;
                    restrictions.insert((c, d), map);
                }
            }
        }
        let mut buckets: HashMap<Vec<AtomKey>, Vec<usize>> = HashMap::new();
        for (i, c) in contexts.iter().enumerate() {
            buckets.entry(c.keys().to_vec()).or_default().push(i);
        }
        let bottom_included = contexts.iter().any(Context::is_bottom);
        let mut poset = ContextPoset {
            dim,
            contexts,
            labels,
            leq,
            restrictions,
            buckets,
            down_closed: down_closed_by_construction,
            bottom_included,
        };
        if !down_closed_by_construction {
            poset.down_closed = poset.compute_down_closed(bottom_included, cap);
        }
        poset
    }

    /// Every coarsening of every member is present, except that the trivial
    /// context is only required when `with_bottom` is set.
    fn compute_down_closed(&self, with_bottom: bool, cap: usize) -> bool {
        for c in &self.contexts {
            let k = c.len();
            if bell(k) > cap as u128 {
                return false;
            }
            for rgs in set_partitions(k) {
                let bl = blocks(&rgs);
                if bl.len() == 1 && !with_bottom {
                    continue;
                }
                if self.index_of(&c.coarsen(&bl, None)).is_none() {
                    return false;
                }
            }
        }
        true
    }

    /// Poset on exactly the given contexts (no closure). Labels are taken from
    /// the contexts or generated.
    pub fn from_contexts(dim: usize, contexts: Vec<Context>) -> Result<ContextPoset, ContextError> {
        ContextPoset::build_with(dim, contexts, false, BottomMode::AsGiven, DEFAULT_CAP)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, i: usize) -> &Context {
        &self.contexts[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_by_label(&self, label: &str) -> Result<usize, ContextError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ContextError::UnknownLabel(label.to_string()))
    }

    pub fn index_of(&self, c: &Context) -> Option<usize> {
        self.buckets
            .get(c.keys())
            .and_then(|ids| ids.iter().copied().find(|&i| self.contexts[i].approx_eq(c)))
            .or_else(|| (0..self.len()).find(|&i| self.contexts[i].approx_eq(c)))
    }

    /// `D ⊆ C`.
    pub fn leq(&self, d: usize, c: usize) -> bool {
        self.leq[d][c]
    }

    pub fn is_down_closed(&self) -> bool {
        self.down_closed
    }

    pub fn bottom_included(&self) -> bool {
        self.bottom_included
    }

    /// `↓C`, in canonical order.
    pub fn down_set(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&d| self.leq[d][c]).collect()
    }

    /// `↑C`, in canonical order.
    pub fn up_set(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.leq[c][e]).collect()
    }

    pub fn is_maximal(&self, c: usize) -> bool {
        (0..self.len()).all(|e| e == c || !self.leq[c][e])
    }

    /// Atom map of `ρ_CD`, or `None` unless `D ⊆ C`.
    pub fn restriction(&self, c: usize, d: usize) -> Option<&[usize]> {
        self.restrictions.get(&(c, d)).map(Vec::as_slice)
    }

    /// `ρ_CD(λ)` for an atom index `λ` of `C`. Panics unless `D ⊆ C`.
    pub fn restrict(&self, c: usize, atom: usize, d: usize) -> usize {
        self.restrictions[&(c, d)][atom]
    }

    /// Atoms of `E ⊇ C` restricting to atom `λ` of `C`.
    pub fn fiber(&self, c: usize, atom: usize, e: usize) -> Vec<usize> {
        let map = &self.restrictions[&(e, c)];
        (0..map.len()).filter(|&i| map[i] == atom).collect()
    }

    /// Strict covering pairs `(D, C)` with `D ⊂ C` and nothing in between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for c in 0..n {
            for d in 0..n {
                if d == c || !self.leq[d][c] {
                    continue;
                }
                let between = (0..n).any(|m| m != c && m != d && self.leq[d][m] && self.leq[m][c]);
                if !between {
                    out.push((d, c));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Down,
    Up,
}

/// A down-closed (sieve) or up-closed (cosieve) set of contexts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sieve {
    members: Vec<bool>,
    direction: Direction,
}

impl Sieve {
    pub fn from_members(members: Vec<bool>, direction: Direction) -> Sieve {
        Sieve { members, direction }
    }

    /// Smallest sieve of the given direction containing `seeds`.
    pub fn generated(poset: &ContextPoset, seeds: &[usize], direction: Direction) -> Sieve {
        let mut members = vec![false; poset.len()];
        for &s in seeds {
            let closure = match direction {
                Direction::Down => poset.down_set(s),
                Direction::Up => poset.up_set(s),
            };
            for i in closure {
                members[i] = true;
            }
        }
        Sieve { members, direction }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members[c]
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self, poset: &ContextPoset) -> Vec<String> {
        self.members()
            .into_iter()
            .map(|i| poset.label(i).to_string())
            .collect()
    }

    /// The direction invariant holds.
    pub fn is_valid(&self, poset: &ContextPoset) -> bool {
        (0..poset.len()).all(|c| {
            !self.members[c]
                || match self.direction {
                    Direction::Down => poset.down_set(c).iter().all(|&d| self.members[d]),
                    Direction::Up => poset.up_set(c).iter().all(|&e| self.members[e]),
                }
        })
    }

    /// Set complement, which flips the direction.
    pub fn complement(&self) -> Sieve {
        Sieve {
            members: self.members.iter().map(|m| !m).collect(),
            direction: match self.direction {
                Direction::Down => Direction::Up,
                Direction::Up => Direction::Down,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::context_from_commuting;
    use crate::linalg::named::*;

    fn cz() -> Context {
        context_from_commuting(&[sigma_z()]).unwrap().with_label("Cz")
    }

    fn cx() -> Context {
        context_from_commuting(&[sigma_x()]).unwrap().with_label("Cx")
    }

    #[test]
    fn down_closure_of_two_atom_context() {
        let p = ContextPoset::build(2, vec![cz()], PosetOptions::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.labels(), &["C1".to_string(), "Cz".to_string()]);
        assert!(p.is_down_closed());
        assert!(p.leq(0, 1));
        assert!(!p.leq(1, 0));
    }

    #[test]
    fn bottom_alone_is_closed() {
        let p = ContextPoset::build(2, vec![Context::bottom(2)], PosetOptions::default()).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.is_down_closed());
    }

    #[test]
    fn three_atom_context_has_bell_three_coarsenings() {
        let p = ContextPoset::build(3, vec![Context::diagonal(3)], PosetOptions::default()).unwrap();
        assert_eq!(p.len(), 5);
        let top = p.index_by_label("G0").unwrap();
        assert_eq!(p.down_set(top).len(), 5);
        assert!(p.is_maximal(top));
    }

    #[test]
    fn shared_bottom_deduplicated() {
        let p = ContextPoset::build(2, vec![cz(), cx()], PosetOptions::default()).unwrap();
        assert_eq!(p.len(), 3);
        let b = p.index_by_label("C1").unwrap();
        assert_eq!(p.up_set(b).len(), 3);
    }

    #[test]
    fn drop_bottom_keeps_relative_closure() {
        let opts = PosetOptions {
            include_bottom: false,
            ..PosetOptions::default()
        };
        let p = ContextPoset::build(3, vec![Context::diagonal(3)], opts).unwrap();
        assert_eq!(p.len(), 4);
        assert!(!p.bottom_included());
        assert!(p.is_down_closed());
    }

    #[test]
    fn cap_enforced() {
        let opts = PosetOptions {
            cap: 3,
            ..PosetOptions::default()
        };
        let err = ContextPoset::build(3, vec![Context::diagonal(3)], opts).unwrap_err();
        assert_eq!(err, ContextError::PosetTooLarge { cap: 3 });
    }

    #[test]
    fn down_closure_idempotent() {
        let p = ContextPoset::build(3, vec![Context::diagonal(3)], PosetOptions::default()).unwrap();
        let again = ContextPoset::build(3, p.contexts().to_vec(), PosetOptions::default()).unwrap();
        assert_eq!(again.len(), p.len());
        assert_eq!(again.labels(), p.labels());
    }

    #[test]
    fn non_closed_poset_detected() {
        let p = ContextPoset::from_contexts(3, vec![Context::diagonal(3)]).unwrap();
        assert!(!p.is_down_closed());
        // Without the trivial context, two-atom contexts are closed on their own.
        let p = ContextPoset::from_contexts(2, vec![cz(), cx()]).unwrap();
        assert!(p.is_down_closed());
        assert!(!p.bottom_included());
        let with_bottom = ContextPoset::from_contexts(2, vec![cz(), Context::bottom(2)]).unwrap();
        assert!(with_bottom.is_down_closed());
    }

    #[test]
    fn restriction_functorial() {
        let p = ContextPoset::build(3, vec![Context::diagonal(3)], PosetOptions::default()).unwrap();
        for c in 0..p.len() {
            for d in p.down_set(c) {
                for e in p.down_set(d) {
                    for atom in 0..p.context(c).len() {
                        let via = p.restrict(d, p.restrict(c, atom, d), e);
                        assert_eq!(via, p.restrict(c, atom, e));
                    }
                }
            }
        }
    }

    #[test]
    fn sieves() {
        let p = ContextPoset::build(2, vec![cz(), cx()], PosetOptions::default()).unwrap();
        let z = p.index_by_label("Cz").unwrap();
        let s = Sieve::generated(&p, &[z], Direction::Down);
        assert!(s.is_valid(&p));
        assert_eq!(s.labels(&p), vec!["C1", "Cz"]);
        let co = s.complement();
        assert_eq!(co.direction(), Direction::Up);
        assert!(co.is_valid(&p));
        let mut members = vec![false; p.len()];
        members[z] = true;
        assert!(!Sieve::from_members(members, Direction::Down).is_valid(&p));
    }
}
