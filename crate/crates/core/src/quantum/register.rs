use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three network nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeId {
    I,
    II,
    III,
}

impl NodeId {
    pub const ALL: [NodeId; 3] = [NodeId::I, NodeId::II, NodeId::III];

    pub fn index(self) -> usize {
        match self {
            NodeId::I => 0,
            NodeId::II => 1,
            NodeId::III => 2,
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(Error::OutOfRange { index, bound: 3 })
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeId::I => "I",
            NodeId::II => "II",
            NodeId::III => "III",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(NodeId::I),
            "II" | "2" => Ok(NodeId::II),
            "III" | "3" => Ok(NodeId::III),
            other => Err(Error::InvalidArgument(format!("unknown node `{other}`"))),
        }
    }
}

/// Physical carrier of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QubitKind {
    /// Photon polarization, basis |H> = 0, |V> = 1.
    Photon,
    /// Collective atomic spin, basis |down> = 0, |up> = 1.
    Atom,
}

/// Identity of a qubit inside a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitLabel {
    pub kind: QubitKind,
    pub node: NodeId,
    pub mode: u32,
}

impl QubitLabel {
    pub const fn photon(node: NodeId, mode: u32) -> Self {
        Self {
            kind: QubitKind::Photon,
            node,
            mode,
        }
    }

    pub const fn atom(node: NodeId) -> Self {
        Self {
            kind: QubitKind::Atom,
            node,
            mode: 0,
        }
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            QubitKind::Photon => write!(f, "photon[{}:{}]", self.node, self.mode),
            QubitKind::Atom => write!(f, "atom[{}:{}]", self.node, self.mode),
        }
    }
}

/// Ordered list of distinct qubit labels.
///
/// Position 0 is the most significant bit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register(Vec<QubitLabel>);

impl Register {
    pub fn new(labels: Vec<QubitLabel>) -> Result<Self> {
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::OverlappingLabels(*a));
            }
        }
        Ok(Self(labels))
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.0.len()
    }

    pub fn position(&self, label: &QubitLabel) -> Result<usize> {
        self.0
            .iter()
            .position(|l| l == label)
            .ok_or(Error::UnknownLabel(*label))
    }

    pub fn positions(&self, labels: &[QubitLabel]) -> Result<Vec<usize>> {
        let positions = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in positions.iter().enumerate() {
            if positions[..i].contains(p) {
                return Err(Error::OverlappingLabels(labels[i]));
            }
        }
        Ok(positions)
    }

    /// `self` followed by `other`; fails if any label is shared.
    pub fn concat(&self, other: &Register) -> Result<Register> {
        if let Some(shared) = other.0.iter().find(|l| self.0.contains(l)) {
            return Err(Error::OverlappingLabels(*shared));
        }
        let mut labels = self.0.clone();
        labels.extend_from_slice(&other.0);
        Ok(Register(labels))
    }

    pub fn relabel(&self, from: &QubitLabel, to: QubitLabel) -> Result<Register> {
        let pos = self.position(from)?;
        if from != &to && self.0.contains(&to) {
            return Err(Error::OverlappingLabels(to));
        }
        let mut labels = self.0.clone();
        labels[pos] = to;
        Ok(Register(labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_rejected() {
        let a = QubitLabel::atom(NodeId::I);
        assert!(matches!(
            Register::new(vec![a, a]),
            Err(Error::OverlappingLabels(_))
        ));
    }

    #[test]
    fn concat_keeps_order() {
        let a = Register::new(vec![QubitLabel::photon(NodeId::I, 0)]).unwrap();
        let b = Register::new(vec![QubitLabel::atom(NodeId::I)]).unwrap();
        let ab = a.concat(&b).unwrap();
        assert_eq!(ab.labels()[0], QubitLabel::photon(NodeId::I, 0));
        assert_eq!(ab.labels()[1], QubitLabel::atom(NodeId::I));
        assert!(ab.concat(&b).is_err());
    }

    #[test]
    fn node_round_trip() {
        for n in NodeId::ALL {
            assert_eq!(n.to_string().parse::<NodeId>().unwrap(), n);
            assert_eq!(NodeId::from_index(n.index()).unwrap(), n);
        }
    }
}
