//! Conway polynomial by skein recursion, and the Arf invariant computed two
//! ways: from the `z^2` coefficient, and from the linking numbers met while
//! unknotting a diagram by crossing changes.

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, DiagramError, EdgeLabel};
use crate::poly::ConwayPoly;
use crate::Sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("expected a knot, got {0} components")]
    NotAKnot(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArfSource {
    Conway,
    Unknotting,
    Tower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArfValue {
    pub value: u8,
    pub provenance: ArfSource,
}

impl ArfValue {
    pub fn new(parity: i64, provenance: ArfSource) -> ArfValue {
        ArfValue {
            value: parity.rem_euclid(2) as u8,
            provenance,
        }
    }
}

/// Canonical form of a diagram up to relabeling: the lexicographically
/// least sorted crossing list over all choices of starting edge.
type Key = Vec<([EdgeLabel; 4], Sign)>;

/// Skein evaluator with an optional shared memo table.
pub struct ConwayEngine {
    memo: Option<RwLock<HashMap<Key, ConwayPoly>>>,
    parallel_above: usize,
}

impl Default for ConwayEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl ConwayEngine {
    pub fn new() -> Self {
        ConwayEngine {
            memo: Some(RwLock::new(HashMap::new())),
            parallel_above: 9,
        }
    }

    /// Plain recursion: every subtree is expanded, nothing is cached.
    pub fn without_memo() -> Self {
        ConwayEngine {
            memo: None,
            parallel_above: usize::MAX,
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo
            .as_ref()
            .map_or(0, |m| m.read().expect("memo lock").len())
    }

    pub fn conway(&self, d: &Diagram) -> ConwayPoly {
        if d.crossing_count() == 0 {
            return if d.free_loops() == 1 {
                ConwayPoly::one()
            } else {
                ConwayPoly::zero()
            };
        }
        if d.is_visibly_split() {
            return ConwayPoly::zero();
        }
        let key = self.memo.as_ref().map(|_| canonical_key(d));
        if let (Some(memo), Some(k)) = (&self.memo, &key) {
            if let Some(p) = memo.read().expect("memo lock").get(k) {
                return p.clone();
            }
        }
        let p = self.expand(d);
        if let (Some(memo), Some(k)) = (&self.memo, key) {
            memo.write().expect("memo lock").insert(k, p.clone());
        }
        p
    }

    /// Switches the crossings first met from below, in traversal order.
    /// Each switch at a crossing of sign e contributes e*z times the
    /// polynomial of the smoothing; what remains is a descending diagram.
    fn expand(&self, d: &Diagram) -> ConwayPoly {
        let bad = d.first_under(&d.default_basepoints());
        let mut cur = d.clone();
        let mut terms = Vec::with_capacity(bad.len());
        for &c in &bad {
            let sign = cur.crossings()[c].sign();
            terms.push((sign, cur.smooth_crossing(c).expect("valid crossing")));
            cur = cur.switch_crossing(c).expect("valid crossing");
        }
        let eval = |(sign, s): &(Sign, Diagram)| self.conway(s).times_z().scale(sign.value());
        let parts: Vec<ConwayPoly> = if d.crossing_count() > self.parallel_above {
            terms.par_iter().map(eval).collect()
        } else {
            terms.iter().map(eval).collect()
        };
        let base = if cur.component_count() == 1 {
            ConwayPoly::one()
        } else {
            ConwayPoly::zero()
        };
        parts.iter().fold(base, |acc, p| &acc + p)
    }
}

fn canonical_key(d: &Diagram) -> Key {
    let index = d.edge_index();
    let xs = d.crossings();
    let m = d.edge_count();
    let mut best: Option<Key> = None;
    for start in 1..=m as EdgeLabel {
        let mut relabel = vec![0 as EdgeLabel; m + 1];
        let mut visited: Vec<usize> = Vec::with_capacity(xs.len());
        let mut seen_x = vec![false; xs.len()];
        let mut next = 1;
        let mut queue_pos = 0;
        let mut from = Some(start);
        while let Some(s) = from {
            let mut e = s;
            while relabel[e as usize] == 0 {
                relabel[e as usize] = next;
                next += 1;
                let h = index.head[e as usize - 1];
                if !seen_x[h.crossing] {
                    seen_x[h.crossing] = true;
                    visited.push(h.crossing);
                }
                e = d.successor(&index, e);
            }
            from = None;
            while from.is_none() && queue_pos < visited.len() {
                let x = visited[queue_pos];
                from = xs[x]
                    .slots()
                    .into_iter()
                    .find(|&l| relabel[l as usize] == 0);
                if from.is_none() {
                    queue_pos += 1;
                }
            }
        }
        let mut key: Key = xs
            .iter()
            .map(|c| (c.slots().map(|l| relabel[l as usize]), c.sign()))
            .collect();
        key.sort_unstable();
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.expect("diagram has crossings")
}

pub fn conway(d: &Diagram) -> ConwayPoly {
    ConwayEngine::new().conway(d)
}

fn require_knot(d: &Diagram) -> Result<(), InvariantError> {
    match d.component_count() {
        1 => Ok(()),
        n => Err(InvariantError::NotAKnot(n)),
    }
}

pub fn arf_from_conway(d: &Diagram) -> Result<ArfValue, InvariantError> {
    require_knot(d)?;
    Ok(ArfValue::new(conway(d).coeff(2), ArfSource::Conway))
}

/// Parity of the summed smoothing linking numbers along the unknotting
/// track from the default basepoint.
pub fn arf_from_unknotting(d: &Diagram) -> Result<ArfValue, InvariantError> {
    require_knot(d)?;
    arf_from_unknotting_at(d, 1)
}

pub fn arf_from_unknotting_at(
    d: &Diagram,
    basepoint: EdgeLabel,
) -> Result<ArfValue, InvariantError> {
    require_knot(d)?;
    let seq = d.descending_switches(basepoint)?;
    Ok(ArfValue::new(seq.lk_sum(), ArfSource::Unknotting))
}

/// Checks the skein relation at crossing `c` with the given engine.
pub fn skein_check_with(
    engine: &ConwayEngine,
    d: &Diagram,
    c: usize,
) -> Result<bool, InvariantError> {
    let sign = d.crossing(c)?.sign();
    let here = engine.conway(d);
    let there = engine.conway(&d.switch_crossing(c)?);
    let smooth = engine.conway(&d.smooth_crossing(c)?);
    Ok(&here - &there == smooth.times_z().scale(sign.value()))
}

pub fn skein_check(d: &Diagram, c: usize) -> Result<bool, InvariantError> {
    skein_check_with(&ConwayEngine::new(), d, c)
}
