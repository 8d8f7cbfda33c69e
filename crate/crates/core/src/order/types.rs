use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense index of an element of the ordered set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(u32::try_from(v).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered pair `(src, dst)`. Ordering is lexicographic on `(src, dst)`,
/// which is also the tie-break order used by query selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub src: NodeId,
    pub dst: NodeId,
}

impl Pair {
    pub fn new(src: impl Into<NodeId>, dst: impl Into<NodeId>) -> Self {
        Pair {
            src: src.into(),
            dst: dst.into(),
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.src == self.dst
    }

    pub fn reversed(&self) -> Pair {
        Pair {
            src: self.dst,
            dst: self.src,
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.src, self.dst)
    }
}

/// Oracle answer for a pair: `Positive` means the pair belongs to the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Positive, Label::Negative];

    pub fn from_membership(member: bool) -> Self {
        if member {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("+1"),
            Label::Negative => f.write_str("-1"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Label::from_sign(v).ok_or_else(|| serde::de::Error::custom(format!("label must be 1 or -1, got {v}")))
    }
}

/// Deduction rule that produced a label when inserting a pair `(a,b)`.
///
/// `N` are the new positives `(anc(a)+a) x (desc(b)+b)`, `R` their reverses,
/// `S`/`T` negatives obtained by combining `N` with existing negatives, `O`
/// the negatives propagated from `S`/`T` through the extended order, and
/// `NPrime` the negatives implied by a negative insert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    N,
    R,
    S,
    T,
    O,
    #[serde(rename = "Nprime")]
    NPrime,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::N => "N",
            Rule::R => "R",
            Rule::S => "S",
            Rule::T => "T",
            Rule::O => "O",
            Rule::NPrime => "Nprime",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "N" => Rule::N,
            "R" => Rule::R,
            "S" => Rule::S,
            "T" => Rule::T,
            "O" => Rule::O,
            "Nprime" | "N'" => Rule::NPrime,
            _ => return None,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a stored label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelSource {
    Seed,
    Queried,
    Deduced(Rule),
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::Seed => "Seed",
            LabelSource::Queried => "Queried",
            LabelSource::Deduced(rule) => rule.as_str(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Seed" => Some(LabelSource::Seed),
            "Queried" => Some(LabelSource::Queried),
            other => Rule::parse(other).map(LabelSource::Deduced),
        }
    }

    pub fn is_deduced(self) -> bool {
        matches!(self, LabelSource::Deduced(_))
    }
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for LabelSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LabelSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LabelSource::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown label source {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_serializes_as_sign() {
        assert_eq!(serde_json::to_string(&Label::Positive).unwrap(), "1");
        assert_eq!(serde_json::to_string(&Label::Negative).unwrap(), "-1");
        assert_eq!(serde_json::from_str::<Label>("-1").unwrap(), Label::Negative);
        assert!(serde_json::from_str::<Label>("0").is_err());
    }

    #[test]
    fn source_names_round_trip() {
        for src in [
            LabelSource::Seed,
            LabelSource::Queried,
            LabelSource::Deduced(Rule::N),
            LabelSource::Deduced(Rule::O),
            LabelSource::Deduced(Rule::NPrime),
        ] {
            assert_eq!(LabelSource::parse(src.as_str()), Some(src));
        }
        assert_eq!(serde_json::to_string(&LabelSource::Deduced(Rule::NPrime)).unwrap(), "\"Nprime\"");
    }

    #[test]
    fn pairs_order_lexicographically() {
        let mut v = vec![Pair::new(2u32, 0u32), Pair::new(0u32, 5u32), Pair::new(0u32, 1u32)];
        v.sort();
        assert_eq!(v, vec![Pair::new(0u32, 1u32), Pair::new(0u32, 5u32), Pair::new(2u32, 0u32)]);
    }
}
