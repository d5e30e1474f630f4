use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LinalgError;

/// One interval of the real line. Infinite endpoints are always open.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Interval {
        Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn open(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi, true, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Membership with endpoint snapping: a point within `snap` of a finite
    /// endpoint is treated as equal to it and the closed flag decides.
    pub fn contains_snapped(&self, x: f64, snap: f64) -> bool {
        let lo_ok = if self.lo == f64::NEG_INFINITY {
            true
        } else if (x - self.lo).abs() <= snap {
            self.lo_closed
        } else {
            x > self.lo
        };
        let hi_ok = if self.hi == f64::INFINITY {
            true
        } else if (x - self.hi).abs() <= snap {
            self.hi_closed
        } else {
            x < self.hi
        };
        lo_ok && hi_ok
    }
}

/// A finite union of intervals, kept sorted and pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BorelSet {
    pieces: Vec<Interval>,
}

impl BorelSet {
    pub fn new(pieces: impl IntoIterator<Item = Interval>) -> BorelSet {
        let mut set = BorelSet {
            pieces: pieces.into_iter().collect(),
        };
        set.normalize();
        set
    }

    pub fn empty() -> BorelSet {
        BorelSet { pieces: Vec::new() }
    }

    pub fn real_line() -> BorelSet {
        BorelSet::new([Interval::open(f64::NEG_INFINITY, f64::INFINITY)])
    }

    pub fn open(lo: f64, hi: f64) -> BorelSet {
        BorelSet::new([Interval::open(lo, hi)])
    }

    pub fn closed(lo: f64, hi: f64) -> BorelSet {
        BorelSet::new([Interval::closed(lo, hi)])
    }

    /// `(-∞, r)`
    pub fn below(r: f64) -> BorelSet {
        BorelSet::open(f64::NEG_INFINITY, r)
    }

    /// `(s, +∞)`
    pub fn above(s: f64) -> BorelSet {
        BorelSet::open(s, f64::INFINITY)
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains_snapped(&self, x: f64, snap: f64) -> bool {
        self.pieces.iter().any(|p| p.contains_snapped(x, snap))
    }

    pub fn union(&self, other: &BorelSet) -> BorelSet {
        BorelSet::new(self.pieces.iter().chain(other.pieces.iter()).copied())
    }

    /// Set-theoretic complement `ℝ - Δ`.
    pub fn complement(&self) -> BorelSet {
        let mut out = Vec::new();
        let mut cursor = f64::NEG_INFINITY;
        let mut cursor_closed = false;
        for p in &self.pieces {
            out.push(Interval::new(cursor, p.lo, cursor_closed, !p.lo_closed));
            cursor = p.hi;
            cursor_closed = !p.hi_closed;
        }
        out.push(Interval::new(cursor, f64::INFINITY, cursor_closed, false));
        BorelSet::new(out)
    }

    fn normalize(&mut self) {
        let mut pieces: Vec<Interval> = self
            .pieces
            .iter()
            .map(|p| Interval::new(p.lo, p.hi, p.lo_closed, p.hi_closed))
            .filter(|p| !p.is_empty())
            .collect();
        pieces.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap_or(Ordering::Equal)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(last) = merged.last_mut() {
                let touches = p.lo < last.hi
                    || (p.lo == last.hi && (p.lo_closed || last.hi_closed));
                if touches {
                    if p.hi > last.hi || (p.hi == last.hi && p.hi_closed) {
                        last.hi = p.hi;
                        last.hi_closed = p.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(p);
        }
        self.pieces = merged;
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for BorelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "()");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, "u")?;
            }
            write!(
                f,
                "{}{},{}{}",
                if p.lo_closed { '[' } else { '(' },
                fmt_endpoint(p.lo),
                fmt_endpoint(p.hi),
                if p.hi_closed { ']' } else { ')' }
            )?;
        }
        Ok(())
    }
}

fn parse_endpoint(s: &str) -> Result<f64, LinalgError> {
    let t = s.trim();
    match t {
        "inf" | "+inf" | "∞" | "+∞" => Ok(f64::INFINITY),
        "-inf" | "-∞" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| LinalgError::BadInterval(format!("bad endpoint {t:?}"))),
    }
}

/// Literal syntax: `(a,b)`, `[a,b]`, `(a,inf)`, pieces joined by `u`.
impl FromStr for BorelSet {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<BorelSet, LinalgError> {
        let s = s.trim();
        if s == "()" || s.is_empty() {
            return Ok(BorelSet::empty());
        }
        let mut pieces = Vec::new();
        for raw in s.split('u') {
            let raw = raw.trim();
            let bad = || LinalgError::BadInterval(format!("cannot parse interval {raw:?}"));
            let mut chars = raw.chars();
            let open = chars.next().ok_or_else(bad)?;
            let close = chars.next_back().ok_or_else(bad)?;
            let lo_closed = match open {
                '[' => true,
                '(' => false,
                _ => return Err(bad()),
            };
            let hi_closed = match close {
                ']' => true,
                ')' => false,
                _ => return Err(bad()),
            };
            let body = chars.as_str();
            let (lo, hi) = body.split_once(',').ok_or_else(bad)?;
            let lo = parse_endpoint(lo)?;
            let hi = parse_endpoint(hi)?;
            if lo.is_nan() || hi.is_nan() {
                return Err(bad());
            }
            pieces.push(Interval::new(lo, hi, lo_closed, hi_closed));
        }
        Ok(BorelSet::new(pieces))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EndpointJson {
    Num(f64),
    Tag(String),
}

impl EndpointJson {
    fn from_f64(x: f64) -> EndpointJson {
        if x == f64::INFINITY {
            EndpointJson::Tag("+inf".into())
        } else if x == f64::NEG_INFINITY {
            EndpointJson::Tag("-inf".into())
        } else {
            EndpointJson::Num(x)
        }
    }

    fn to_f64(&self) -> Result<f64, String> {
        match self {
            EndpointJson::Num(x) => Ok(*x),
            EndpointJson::Tag(t) => match t.as_str() {
                "+inf" | "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(format!("unknown endpoint tag {other:?}")),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    lo: EndpointJson,
    hi: EndpointJson,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Serialize, Deserialize)]
struct BorelJson {
    pieces: Vec<PieceJson>,
}

impl Serialize for BorelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BorelJson {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceJson {
                    lo: EndpointJson::from_f64(p.lo),
                    hi: EndpointJson::from_f64(p.hi),
                    lo_closed: p.lo_closed,
                    hi_closed: p.hi_closed,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BorelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<BorelSet, D::Error> {
        let raw = BorelJson::deserialize(deserializer)?;
        let mut pieces = Vec::with_capacity(raw.pieces.len());
        for p in raw.pieces {
            let lo = p.lo.to_f64().map_err(serde::de::Error::custom)?;
            let hi = p.hi.to_f64().map_err(serde::de::Error::custom)?;
            pieces.push(Interval::new(lo, hi, p.lo_closed, p.hi_closed));
        }
        Ok(BorelSet::new(pieces))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        for lit in ["(0.5,1.5)", "[-1,2]", "(-inf,0)u[1,inf)", "(0,1]u(2,3)"] {
            let set: BorelSet = lit.parse().unwrap();
            let again: BorelSet = set.to_string().parse().unwrap();
            assert_eq!(set, again, "{lit}");
        }
    }

    #[test]
    fn overlapping_pieces_merge() {
        let set: BorelSet = "(0,2)u(1,3)u[3,4]".parse().unwrap();
        assert_eq!(set.pieces().len(), 1);
        assert_eq!(set.to_string(), "(0,4]");
        let touching: BorelSet = "(0,1)u(1,2)".parse().unwrap();
        assert_eq!(touching.pieces().len(), 2);
    }

    #[test]
    fn endpoint_snap_uses_closed_flag() {
        let open = BorelSet::open(0.0, 1.0);
        assert!(!open.contains_snapped(1.0 - 1e-12, 1e-9));
        let closed = BorelSet::closed(0.0, 1.0);
        assert!(closed.contains_snapped(1.0 + 1e-12, 1e-9));
        assert!(open.contains_snapped(0.5, 1e-9));
    }

    #[test]
    fn complement_partitions_line() {
        let set: BorelSet = "(0,1]u[2,3)".parse().unwrap();
        let co = set.complement();
        assert_eq!(co.to_string(), "(-inf,0]u(1,2)u[3,inf)");
        for x in [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0] {
            assert_ne!(set.contains_snapped(x, 0.0), co.contains_snapped(x, 0.0), "{x}");
        }
        assert_eq!(BorelSet::real_line().complement(), BorelSet::empty());
    }

    #[test]
    fn json_format() {
        let set: BorelSet = "(-inf,0)u[1,2]".parse().unwrap();
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(
            json,
            r#"{"pieces":[{"lo":"-inf","hi":0.0,"lo_closed":false,"hi_closed":false},{"lo":1.0,"hi":2.0,"lo_closed":true,"hi_closed":true}]}"#
        );
        let back: BorelSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn rejects_malformed() {
        assert!("0,1".parse::<BorelSet>().is_err());
        assert!("(a,1)".parse::<BorelSet>().is_err());
        assert!("(0;1)".parse::<BorelSet>().is_err());
    }
}
