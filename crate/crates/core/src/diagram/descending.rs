use serde::{Deserialize, Serialize};

use super::{Diagram, DiagramError, EdgeLabel};
use crate::Sign;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub crossing: usize,
    /// Sign before the switch.
    pub sign: Sign,
    /// Linking number of the two-component link obtained by smoothing this
    /// crossing in the diagram as it stands just before the switch.
    pub lk: i64,
}

/// The crossing changes that turn a knot diagram into the descending
/// diagram for a chosen basepoint, in traversal order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchSequence {
    pub basepoint: EdgeLabel,
    pub switches: Vec<SwitchRecord>,
}

impl SwitchSequence {
    pub fn lk_sum(&self) -> i64 {
        self.switches.iter().map(|s| s.lk).sum()
    }
}

impl Diagram {
    /// Walks the knot from the start of edge `basepoint` and switches every
    /// crossing first reached along its under-strand. For the unknot with no
    /// crossings pass basepoint 1; the sequence is empty.
    pub fn descending_switches(
        &self,
        basepoint: EdgeLabel,
    ) -> Result<SwitchSequence, DiagramError> {
        let comps = self.component_count();
        if comps != 1 {
            return Err(DiagramError::ComponentCount {
                expected: 1,
                found: comps,
            });
        }
        if self.crossings.is_empty() {
            return Ok(SwitchSequence {
                basepoint,
                switches: Vec::new(),
            });
        }
        self.check_edge_label(basepoint)?;
        let mut cur = self.clone();
        let mut switches = Vec::new();
        for c in self.first_under(&[basepoint]) {
            let lk = cur.smooth_crossing(c)?.linking_number()?;
            switches.push(SwitchRecord {
                crossing: c,
                sign: cur.crossings[c].sign,
                lk,
            });
            cur = cur.switch_crossing(c)?;
        }
        debug_assert!(cur.first_under(&[basepoint]).is_empty());
        Ok(SwitchSequence {
            basepoint,
            switches,
        })
    }

    /// Applies every switch in `seq` in order.
    pub fn apply_switches(&self, seq: &SwitchSequence) -> Result<Diagram, DiagramError> {
        seq.switches
            .iter()
            .try_fold(self.clone(), |d, s| d.switch_crossing(s.crossing))
    }

    pub(crate) fn check_edge_label(&self, label: EdgeLabel) -> Result<(), DiagramError> {
        if label == 0 || label as usize > self.edge_count() {
            return Err(DiagramError::BadEdge { label });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    #[test]
    fn trefoil_switches() {
        let d = parse_pd("X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]").unwrap();
        for b in 1..=6 {
            let seq = d.descending_switches(b).unwrap();
            // one switch from an over-passage, two from an under-passage
            assert_eq!(
                seq.switches.len(),
                if b % 2 == 0 { 1 } else { 2 },
                "basepoint {b}"
            );
            assert!(seq.switches.iter().all(|s| s.sign == Sign::Pos));
            assert_eq!(
                seq.switches
                    .iter()
                    .map(|s| s.sign.value() * s.lk)
                    .sum::<i64>(),
                1
            );
            let done = d.apply_switches(&seq).unwrap();
            assert!(done.first_under(&[b]).is_empty());
        }
    }

    #[test]
    fn figure_eight_weighted_sum_is_minus_one() {
        let d = parse_pd("X[4,2,5,1];X[8,6,1,5];X[6,3,7,4];X[2,7,3,8]").unwrap();
        for b in 1..=8 {
            let seq = d.descending_switches(b).unwrap();
            assert_eq!(
                seq.switches
                    .iter()
                    .map(|s| s.sign.value() * s.lk)
                    .sum::<i64>(),
                -1
            );
            assert_eq!(seq.lk_sum().rem_euclid(2), 1);
        }
    }

    #[test]
    fn rejects_links_and_bad_basepoints() {
        assert!(Diagram::unlink(2).descending_switches(1).is_err());
        let d = parse_pd("X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]").unwrap();
        assert!(d.descending_switches(7).is_err());
        assert!(Diagram::unknot()
            .descending_switches(1)
            .unwrap()
            .switches
            .is_empty());
    }
}
