//! JSON file formats for matrices, states, posets, subobjects and Borel sets.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contexts::{
    context_from_commuting, AtomSet, Context, ContextError, ContextPoset, PosetOptions, DEFAULT_CAP,
};
use crate::linalg::{c64, BorelSet, HermitianOp, LinalgError, Mat, ProjectionOp};
use crate::logic::{LogicError, Subobject, Variant};
use crate::states::{State, StateError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// A matrix entry: `[re, im]` or a bare real number.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Complex([f64; 2]),
    Real(f64),
}

impl EntryJson {
    fn value(self) -> num_complex::Complex64 {
        match self {
            EntryJson::Complex([re, im]) => c64(re, im),
            EntryJson::Real(re) => c64(re, 0.0),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub rows: Vec<Vec<EntryJson>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Mat) -> MatrixJson {
        MatrixJson {
            dim: m.nrows(),
            rows: (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| EntryJson::Complex([clean(m[(i, j)].re), clean(m[(i, j)].im)]))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<Mat, IoError> {
        let n = self.dim;
        if self.rows.len() != n || self.rows.iter().any(|r| r.len() != n) {
            return Err(IoError::Format(format!(
                "matrix declares dim {n} but rows do not form an {n}x{n} array"
            )));
        }
        Ok(Mat::from_fn(n, n, |i, j| self.rows[i][j].value()))
    }
}

/// Rounds away `-0.0` and last-bit noise so dumps are stable.
fn clean(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn read_matrix(path: &Path) -> Result<Mat, IoError> {
    read_json::<MatrixJson>(path)?.to_matrix()
}

pub fn read_hermitian(path: &Path) -> Result<HermitianOp, IoError> {
    Ok(HermitianOp::new(read_matrix(path)?)?)
}

pub fn read_projection(path: &Path) -> Result<ProjectionOp, IoError> {
    Ok(ProjectionOp::new(read_matrix(path)?)?)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Pure { pure: Vec<EntryJson> },
    Density(MatrixJson),
}

impl StateJson {
    pub fn to_state(&self) -> Result<State, IoError> {
        match self {
            StateJson::Pure { pure } => {
                let v: Vec<_> = pure.iter().map(|e| e.value()).collect();
                Ok(State::pure(&v)?)
            }
            StateJson::Density(m) => Ok(State::new(m.to_matrix()?)?),
        }
    }
}

pub fn read_state(path: &Path) -> Result<State, IoError> {
    read_json::<StateJson>(path)?.to_state()
}

/// A generator: commuting hermitian operators, or the atoms of a partition
/// of unity.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub ops: Option<Vec<MatrixJson>>,
    #[serde(default)]
    pub atoms: Option<Vec<MatrixJson>>,
}

impl GeneratorJson {
    pub fn to_context(&self) -> Result<Context, IoError> {
        let ctx = match (&self.ops, &self.atoms) {
            (Some(ops), None) => {
                let ops = ops
                    .iter()
                    .map(|m| Ok(HermitianOp::new(m.to_matrix()?)?))
                    .collect::<Result<Vec<_>, IoError>>()?;
                context_from_commuting(&ops)?
            }
            (None, Some(atoms)) => {
                let atoms = atoms
                    .iter()
                    .map(|m| Ok(ProjectionOp::new(m.to_matrix()?)?))
                    .collect::<Result<Vec<_>, IoError>>()?;
                Context::new(atoms, None)?
            }
            _ => {
                return Err(IoError::Format(
                    "a generator needs exactly one of \"ops\" or \"atoms\"".into(),
                ))
            }
        };
        Ok(match &self.label {
            Some(l) => ctx.with_label(l.clone()),
            None => ctx,
        })
    }
}

fn default_true() -> bool {
    true
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

/// `{"generators": [...], "down_close": bool, "include_bottom": bool, "cap": n}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetSpecJson {
    #[serde(default)]
    pub dim: Option<usize>,
    pub generators: Vec<GeneratorJson>,
    #[serde(default = "default_true")]
    pub down_close: bool,
    #[serde(default = "default_true")]
    pub include_bottom: bool,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

/// One context of a dumped poset.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDump {
    pub label: String,
    pub atoms: Vec<MatrixJson>,
    /// Labels of the contexts strictly below, in canonical order.
    #[serde(default)]
    pub below: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDump {
    pub dim: usize,
    pub down_closed: bool,
    pub contexts: Vec<ContextDump>,
}

impl PosetDump {
    pub fn from_poset(poset: &ContextPoset) -> PosetDump {
        PosetDump {
            dim: poset.dim(),
            down_closed: poset.is_down_closed(),
            contexts: (0..poset.len())
                .map(|c| ContextDump {
                    label: poset.label(c).to_string(),
                    atoms: poset
                        .context(c)
                        .atoms()
                        .iter()
                        .map(|q| MatrixJson::from_matrix(q.matrix()))
                        .collect(),
                    below: poset
                        .down_set(c)
                        .into_iter()
                        .filter(|&d| d != c)
                        .map(|d| poset.label(d).to_string())
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuild the poset on exactly the dumped contexts.
    pub fn to_poset(&self) -> Result<ContextPoset, IoError> {
        let contexts = self
            .contexts
            .iter()
            .map(|c| {
                let atoms = c
                    .atoms
                    .iter()
                    .map(|m| Ok(ProjectionOp::new(m.to_matrix()?)?))
                    .collect::<Result<Vec<_>, IoError>>()?;
                Ok(Context::new(atoms, None)?.with_label(c.label.clone()))
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(ContextPoset::from_contexts(self.dim, contexts)?)
    }
}

/// Either a generator specification or a dump.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PosetJson {
    Spec(PosetSpecJson),
    Dump(PosetDump),
}

pub fn poset_from_generators(
    dim: Option<usize>,
    generators: Vec<Context>,
    opts: PosetOptions,
) -> Result<ContextPoset, IoError> {
    let dim = match (dim, generators.first()) {
        (Some(d), _) => d,
        (None, Some(g)) => g.dim(),
        (None, None) => return Err(IoError::Format("poset needs a dimension or a generator".into())),
    };
    Ok(ContextPoset::build(dim, generators, opts)?)
}

impl PosetJson {
    pub fn to_poset(&self) -> Result<ContextPoset, IoError> {
        match self {
            PosetJson::Spec(spec) => {
                let gens = spec
                    .generators
                    .iter()
                    .map(GeneratorJson::to_context)
                    .collect::<Result<Vec<_>, IoError>>()?;
                poset_from_generators(
                    spec.dim,
                    gens,
                    PosetOptions {
                        down_close: spec.down_close,
                        include_bottom: spec.include_bottom,
                        cap: spec.cap,
                    },
                )
            }
            PosetJson::Dump(dump) => dump.to_poset(),
        }
    }
}

pub fn read_poset(path: &Path) -> Result<ContextPoset, IoError> {
    read_json::<PosetJson>(path)?.to_poset()
}

/// `{"variant": "...", "family": {label: [atom indices]}}`. Labels absent
/// from `family` carry the empty set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubobjectJson {
    pub variant: Variant,
    pub family: BTreeMap<String, AtomSet>,
}

impl SubobjectJson {
    pub fn from_subobject(s: &Subobject<'_>) -> SubobjectJson {
        let poset = s.poset();
        SubobjectJson {
            variant: s.variant(),
            family: (0..poset.len())
                .map(|c| (poset.label(c).to_string(), s.at(c)))
                .collect(),
        }
    }

    /// The stored family, validated; with `close` the least closed family
    /// containing it instead.
    pub fn to_subobject<'p>(&self, poset: &'p ContextPoset, close: bool) -> Result<Subobject<'p>, IoError> {
        let mut family = vec![AtomSet::EMPTY; poset.len()];
        for (label, set) in &self.family {
            let c = poset.index_by_label(label)?;
            family[c] = *set;
        }
        if close {
            for (c, set) in family.iter().enumerate() {
                if !set.is_subset(poset.context(c).full_set()) {
                    return Err(LogicError::AtomOutOfRange {
                        context: poset.label(c).to_string(),
                        set: *set,
                    }
                    .into());
                }
            }
            Ok(Subobject::closure_of(poset, self.variant, family))
        } else {
            Ok(Subobject::new(poset, self.variant, family)?)
        }
    }
}

pub fn read_subobject<'p>(path: &Path, poset: &'p ContextPoset, close: bool) -> Result<Subobject<'p>, IoError> {
    read_json::<SubobjectJson>(path)?.to_subobject(poset, close)
}

/// A Borel set given as an interval literal, inline JSON, or a file holding
/// either.
pub fn parse_delta(arg: &str) -> Result<BorelSet, IoError> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|source| IoError::Read {
            path: arg.to_string(),
            source,
        })?
    } else {
        arg.to_string()
    };
    let text = text.trim();
    if text.starts_with('{') {
        serde_json::from_str(text).map_err(|source| IoError::Json {
            path: arg.to_string(),
            source,
        })
    } else if let Some(inner) = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        Ok(inner.parse()?)
    } else {
        Ok(text.parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::named::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn matrix_round_trip() {
        let m = sigma_y().into_matrix();
        let json = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        assert_eq!(json, r#"{"dim":2,"rows":[[[0.0,0.0],[0.0,-1.0]],[[0.0,1.0],[0.0,0.0]]]}"#);
        let back: MatrixJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        let real: MatrixJson = serde_json::from_str(r#"{"dim":2,"rows":[[1,0],[0,-1]]}"#).unwrap();
        assert_eq!(real.to_matrix().unwrap(), sigma_z().into_matrix());
        let bad: MatrixJson = serde_json::from_str(r#"{"dim":3,"rows":[[1,0],[0,-1]]}"#).unwrap();
        assert!(bad.to_matrix().is_err());
    }

    #[test]
    fn state_formats() {
        let dir = tempfile::tempdir().unwrap();
        let pure = write(&dir, "p.json", r#"{"pure": [[3,0],[0,4]]}"#);
        let s = read_state(&pure).unwrap();
        assert!((s.rho()[(0, 0)].re - 0.36).abs() < 1e-12);
        let mixed = write(&dir, "m.json", r#"{"dim":2,"rows":[[0.5,0],[0,0.5]]}"#);
        assert!(read_state(&mixed).is_ok());
        let bad = write(&dir, "b.json", r#"{"dim":2,"rows":[[1,0],[0,1]]}"#);
        assert!(matches!(read_state(&bad), Err(IoError::State(StateError::BadTrace(_)))));
    }

    #[test]
    fn poset_spec_and_dump() {
        let spec = r#"{"generators":[
            {"label":"Cz","ops":[{"dim":2,"rows":[[1,0],[0,-1]]}]},
            {"label":"Cx","ops":[{"dim":2,"rows":[[0,1],[1,0]]}]}]}"#;
        let poset = serde_json::from_str::<PosetJson>(spec).unwrap().to_poset().unwrap();
        assert_eq!(poset.len(), 3);
        let dump = PosetDump::from_poset(&poset);
        let text = serde_json::to_string(&dump).unwrap();
        let again = serde_json::from_str::<PosetJson>(&text).unwrap().to_poset().unwrap();
        assert_eq!(again.labels(), poset.labels());
        assert!(again.is_down_closed());
        let both = r#"{"generators":[{"ops":[],"atoms":[]}]}"#;
        assert!(serde_json::from_str::<PosetJson>(both).unwrap().to_poset().is_err());
    }

    #[test]
    fn subobject_round_trip() {
        let cz = context_from_commuting(&[sigma_z()]).unwrap().with_label("Cz");
        let poset = ContextPoset::build(2, vec![cz], PosetOptions::default()).unwrap();
        let s = Subobject::elementary(&sigma_z(), &BorelSet::above(0.0), &poset, Variant::Contravariant);
        let json = SubobjectJson::from_subobject(&s);
        let back = json.to_subobject(&poset, false).unwrap();
        assert_eq!(back, s);
        let partial: SubobjectJson =
            serde_json::from_str(r#"{"variant":"contravariant","family":{"Cz":[0]}}"#).unwrap();
        assert!(partial.to_subobject(&poset, false).is_err());
        assert!(partial.to_subobject(&poset, true).unwrap().is_valid());
        let unknown: SubobjectJson =
            serde_json::from_str(r#"{"variant":"covariant","family":{"Cq":[0]}}"#).unwrap();
        assert!(unknown.to_subobject(&poset, false).is_err());
    }

    #[test]
    fn delta_forms() {
        assert_eq!(parse_delta("(0.5,1.5)").unwrap(), BorelSet::open(0.5, 1.5));
        let json = r#"{"pieces":[{"lo":0.5,"hi":"+inf","lo_closed":false,"hi_closed":false}]}"#;
        assert_eq!(parse_delta(json).unwrap(), BorelSet::above(0.5));
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "d.json", "\"[0,1]\"");
        assert_eq!(parse_delta(path.to_str().unwrap()).unwrap(), BorelSet::closed(0.0, 1.0));
        assert!(parse_delta("(1,").is_err());
    }
}
