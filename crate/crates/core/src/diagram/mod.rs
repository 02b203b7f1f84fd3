//! Oriented knot and link diagrams in planar-diagram (PD) form.
//!
//! A crossing is stored as four edge labels `[a, b, c, d]` listed
//! counterclockwise, starting from the incoming under-strand `a`; the
//! under-strand runs `a -> c`. The over-strand runs `d -> b` on a positive
//! crossing and `b -> d` on a negative one, so the sign alone fixes the
//! orientation of every slot. With this convention the standard right-handed
//! trefoil `X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]` has writhe +3.
//!
//! Crossingless unknotted components are kept as a count of free loops.
//! Every diagram handed out by this module has been validated: each label
//! occurs exactly twice (once entering, once leaving a crossing) and the
//! face count matches a planar 4-valent graph.

mod descending;
mod moves;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::Sign;

pub use descending::{SwitchRecord, SwitchSequence};
pub use moves::Reidemeister;
pub use parse::{parse, parse_gauss, parse_pd};

pub type EdgeLabel = u32;

/// A (crossing index, slot) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart {
    pub crossing: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("edge label {label} appears {count} times (expected 2)")]
    LabelCount { label: EdgeLabel, count: usize },
    #[error("edge label {label} outside 1..={edge_count}")]
    LabelRange { label: EdgeLabel, edge_count: usize },
    #[error("strands do not close up consistently at edge {label}")]
    Orientation { label: EdgeLabel },
    #[error("diagram is not planar ({faces} faces, expected {expected})")]
    NonPlanar { faces: usize, expected: usize },
    #[error("crossing index {index} out of range ({count} crossings)")]
    BadCrossing { index: usize, count: usize },
    #[error("expected {expected} component(s), found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("edge {label} is not an edge of this diagram")]
    BadEdge { label: EdgeLabel },
    #[error("move not applicable: {0}")]
    NotApplicable(String),
    #[error("gauss code: {0}")]
    Gauss(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    slots: [EdgeLabel; 4],
    sign: Sign,
}

impl Crossing {
    pub fn slots(&self) -> [EdgeLabel; 4] {
        self.slots
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn over_in_slot(&self) -> usize {
        match self.sign {
            Sign::Pos => 3,
            Sign::Neg => 1,
        }
    }

    pub fn over_out_slot(&self) -> usize {
        (self.over_in_slot() + 2) % 4
    }

    pub fn under_in(&self) -> EdgeLabel {
        self.slots[0]
    }

    pub fn under_out(&self) -> EdgeLabel {
        self.slots[2]
    }

    pub fn over_in(&self) -> EdgeLabel {
        self.slots[self.over_in_slot()]
    }

    pub fn over_out(&self) -> EdgeLabel {
        self.slots[self.over_out_slot()]
    }

    /// True when `slot` is where a strand enters the crossing.
    pub fn is_incoming(&self, slot: usize) -> bool {
        slot == 0 || slot == self.over_in_slot()
    }
}

/// One side of a face: the dart the boundary walk leaves from, the edge it
/// runs along and whether the walk agrees with the edge orientation. The face
/// lies to the right of the walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceSide {
    pub dart: Dart,
    pub edge: EdgeLabel,
    pub forward: bool,
}

impl FaceSide {
    /// Whether the face lies to the left of the edge's own orientation.
    pub fn face_on_left(&self) -> bool {
        !self.forward
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub sides: Vec<FaceSide>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    crossings: Vec<Crossing>,
    free_loops: u32,
}

/// Tail and head darts of every edge, indexed by `label - 1`.
#[derive(Clone, Debug)]
pub(crate) struct EdgeIndex {
    pub tail: Vec<Dart>,
    pub head: Vec<Dart>,
}

impl EdgeIndex {
    pub fn other(&self, label: EdgeLabel, dart: Dart) -> Dart {
        let i = label as usize - 1;
        if self.tail[i] == dart {
            self.head[i]
        } else {
            self.tail[i]
        }
    }
}

impl Diagram {
    pub fn unknot() -> Diagram {
        Diagram::unlink(1)
    }

    /// Crossingless diagram with `components` round circles.
    pub fn unlink(components: u32) -> Diagram {
        Diagram {
            crossings: Vec::new(),
            free_loops: components,
        }
    }

    /// Builds a diagram from raw PD slot tuples, inferring over-strand
    /// directions and validating the result.
    pub fn from_pd(raw: &[[EdgeLabel; 4]], free_loops: u32) -> Result<Diagram, DiagramError> {
        let crossings = orient(raw)?;
        let d = Diagram {
            crossings,
            free_loops,
        };
        d.check_planar()?;
        Ok(d)
    }

    /// Closure of a braid on `strands` strands; generator `i` (1-based) with
    /// a positive exponent is a positive crossing between positions `i` and
    /// `i + 1`.
    pub fn from_braid(strands: u32, word: &[i32]) -> Result<Diagram, DiagramError> {
        if strands == 0 {
            return Err(DiagramError::NotApplicable("braid with no strands".into()));
        }
        let mut cur: Vec<u64> = (0..strands as u64).collect();
        let mut next = strands as u64;
        let mut raw = Vec::with_capacity(word.len());
        for &g in word {
            let i = g.unsigned_abs() as usize;
            if g == 0 || i >= strands as usize {
                return Err(DiagramError::NotApplicable(format!(
                    "bad braid generator {g}"
                )));
            }
            let (left_in, right_in) = (cur[i - 1], cur[i]);
            let (left_out, right_out) = (next, next + 1);
            next += 2;
            // left strand runs SW -> NE, right strand SE -> NW
            if g > 0 {
                raw.push(([right_in, left_out, right_out, left_in], Sign::Pos));
            } else {
                raw.push(([left_in, right_in, left_out, right_out], Sign::Neg));
            }
            cur[i - 1] = right_out;
            cur[i] = left_out;
        }
        let merges: Vec<(u64, u64)> = (0..strands as u64).map(|p| (cur[p as usize], p)).collect();
        Ok(rebuild(raw, &merges, 0))
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn edge_count(&self) -> usize {
        2 * self.crossings.len()
    }

    pub fn free_loops(&self) -> u32 {
        self.free_loops
    }

    pub fn crossing(&self, index: usize) -> Result<&Crossing, DiagramError> {
        self.crossings.get(index).ok_or(DiagramError::BadCrossing {
            index,
            count: self.crossings.len(),
        })
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign.value()).sum()
    }

    pub(crate) fn edge_index(&self) -> EdgeIndex {
        let m = self.edge_count();
        let unset = Dart {
            crossing: usize::MAX,
            slot: 0,
        };
        let mut tail = vec![unset; m];
        let mut head = vec![unset; m];
        for (x, c) in self.crossings.iter().enumerate() {
            for s in 0..4 {
                let i = c.slots[s] as usize - 1;
                let dart = Dart {
                    crossing: x,
                    slot: s,
                };
                if c.is_incoming(s) {
                    head[i] = dart;
                } else {
                    tail[i] = dart;
                }
            }
        }
        EdgeIndex { tail, head }
    }

    /// The edge leaving the crossing that `label` runs into, continuing
    /// along the same strand.
    pub(crate) fn successor(&self, index: &EdgeIndex, label: EdgeLabel) -> EdgeLabel {
        let h = index.head[label as usize - 1];
        self.crossings[h.crossing].slots[(h.slot + 2) % 4]
    }

    /// Edge sequences of the components that pass through crossings, each
    /// starting at its smallest label, ordered by that label.
    pub fn strand_components(&self) -> Vec<Vec<EdgeLabel>> {
        let index = self.edge_index();
        let m = self.edge_count();
        let mut seen = vec![false; m];
        let mut comps = Vec::new();
        for start in 1..=m as EdgeLabel {
            if seen[start as usize - 1] {
                continue;
            }
            let mut comp = Vec::new();
            let mut e = start;
            while !seen[e as usize - 1] {
                seen[e as usize - 1] = true;
                comp.push(e);
                e = self.successor(&index, e);
            }
            comps.push(comp);
        }
        comps
    }

    /// Number of link components, free loops included.
    pub fn component_count(&self) -> usize {
        self.strand_components().len() + self.free_loops as usize
    }

    /// Component index (in `strand_components` order) of every edge.
    pub(crate) fn edge_components(&self) -> Vec<usize> {
        let mut out = vec![0; self.edge_count()];
        for (i, comp) in self.strand_components().iter().enumerate() {
            for &e in comp {
                out[e as usize - 1] = i;
            }
        }
        out
    }

    /// Half the signed count of crossings between the two components.
    pub fn linking_number(&self) -> Result<i64, DiagramError> {
        let comps = self.component_count();
        if comps != 2 {
            return Err(DiagramError::ComponentCount {
                expected: 2,
                found: comps,
            });
        }
        let of = self.edge_components();
        let twice: i64 = self
            .crossings
            .iter()
            .filter(|c| of[c.under_in() as usize - 1] != of[c.over_in() as usize - 1])
            .map(|c| c.sign.value())
            .sum();
        Ok(twice / 2)
    }

    /// Faces of the projection. The walk leaving dart `(x, s)` arrives at
    /// `(y, t)` and continues from `(y, t + 1)`.
    pub fn faces(&self) -> Vec<Face> {
        let n = self.crossings.len();
        if n == 0 {
            return Vec::new();
        }
        let index = self.edge_index();
        let mut seen = vec![[false; 4]; n];
        let mut faces = Vec::new();
        for x in 0..n {
            for s in 0..4 {
                if seen[x][s] {
                    continue;
                }
                let mut sides = Vec::new();
                let mut dart = Dart {
                    crossing: x,
                    slot: s,
                };
                while !seen[dart.crossing][dart.slot] {
                    seen[dart.crossing][dart.slot] = true;
                    let c = &self.crossings[dart.crossing];
                    let edge = c.slots[dart.slot];
                    sides.push(FaceSide {
                        dart,
                        edge,
                        forward: !c.is_incoming(dart.slot),
                    });
                    let arrive = index.other(edge, dart);
                    dart = Dart {
                        crossing: arrive.crossing,
                        slot: (arrive.slot + 1) % 4,
                    };
                }
                faces.push(Face { sides });
            }
        }
        faces
    }

    /// Connected pieces of the 4-valent projection graph.
    pub fn projection_pieces(&self) -> usize {
        let n = self.crossings.len();
        if n == 0 {
            return 0;
        }
        let index = self.edge_index();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..index.tail.len() {
            let (a, b) = (
                find(&mut parent, index.tail[i].crossing),
                find(&mut parent, index.head[i].crossing),
            );
            parent[a] = b;
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }

    /// True when the diagram is visibly split: free loops next to anything
    /// else, or a disconnected projection.
    pub fn is_visibly_split(&self) -> bool {
        let pieces = self.projection_pieces() + self.free_loops as usize;
        pieces > 1
    }

    fn check_planar(&self) -> Result<(), DiagramError> {
        let n = self.crossings.len();
        if n == 0 {
            return Ok(());
        }
        let faces = self.faces().len();
        let expected = n + 1 + self.projection_pieces();
        if faces != expected {
            return Err(DiagramError::NonPlanar { faces, expected });
        }
        Ok(())
    }

    /// Exchanges over and under at crossing `c`. Labels and crossing order
    /// are untouched; the sign at `c` flips.
    pub fn switch_crossing(&self, c: usize) -> Result<Diagram, DiagramError> {
        let x = self.crossing(c)?;
        let [a, b, cc, d] = x.slots;
        let switched = match x.sign {
            Sign::Pos => Crossing {
                slots: [d, a, b, cc],
                sign: Sign::Neg,
            },
            Sign::Neg => Crossing {
                slots: [b, cc, d, a],
                sign: Sign::Pos,
            },
        };
        let mut out = self.clone();
        out.crossings[c] = switched;
        Ok(out)
    }

    /// Oriented resolution at crossing `c`: the incoming under-strand is
    /// joined to the outgoing over-strand and vice versa.
    pub fn smooth_crossing(&self, c: usize) -> Result<Diagram, DiagramError> {
        let x = self.crossing(c)?;
        let merges = [
            (x.under_in() as u64, x.over_out() as u64),
            (x.over_in() as u64, x.under_out() as u64),
        ];
        let rest: Vec<([u64; 4], Sign)> = self
            .crossings
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != c)
            .map(|(_, k)| (k.slots.map(u64::from), k.sign))
            .collect();
        Ok(rebuild(rest, &merges, self.free_loops))
    }

    /// Every crossing switched: the mirror image.
    pub fn mirror(&self) -> Diagram {
        let mut d = self.clone();
        for c in 0..d.crossings.len() {
            d = d.switch_crossing(c).expect("index in range");
        }
        d
    }

    /// Connected sum of two knot diagrams, joined along edge 1 of each.
    pub fn connected_sum(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        for d in [self, other] {
            if d.component_count() != 1 {
                return Err(DiagramError::ComponentCount {
                    expected: 1,
                    found: d.component_count(),
                });
            }
        }
        if self.crossings.is_empty() {
            return Ok(other.clone());
        }
        if other.crossings.is_empty() {
            return Ok(self.clone());
        }
        let shift = self.edge_count() as u64;
        let ia = self.edge_index();
        let ib = other.edge_index();
        let mut raw: Vec<([u64; 4], Sign)> = self
            .crossings
            .iter()
            .map(|k| (k.slots.map(u64::from), k.sign))
            .collect();
        let n = raw.len();
        raw.extend(
            other
                .crossings
                .iter()
                .map(|k| (k.slots.map(|l| l as u64 + shift), k.sign)),
        );
        // edge 1 of self now ends where edge 1 of other ended, and vice versa
        let ha = ia.head[0];
        let hb = ib.head[0];
        raw[ha.crossing].0[ha.slot] = 1 + shift;
        raw[n + hb.crossing].0[hb.slot] = 1;
        let d = rebuild(raw, &[], 0);
        d.check_planar()?;
        Ok(d)
    }

    /// Components traversed in order from their basepoints, yielding every
    /// crossing passage as (crossing, entered-on-under).
    pub(crate) fn passages(&self, basepoints: &[EdgeLabel]) -> Vec<(usize, bool)> {
        let index = self.edge_index();
        let mut out = Vec::with_capacity(2 * self.crossings.len());
        for &start in basepoints {
            let mut e = start;
            loop {
                let h = index.head[e as usize - 1];
                out.push((h.crossing, h.slot == 0));
                e = self.crossings[h.crossing].slots[(h.slot + 2) % 4];
                if e == start {
                    break;
                }
            }
        }
        out
    }

    /// Crossings first met on their under-strand, in traversal order.
    pub(crate) fn first_under(&self, basepoints: &[EdgeLabel]) -> Vec<usize> {
        let mut met = vec![false; self.crossings.len()];
        let mut out = Vec::new();
        for (x, under) in self.passages(basepoints) {
            if !met[x] {
                met[x] = true;
                if under {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Smallest label of every strand component, in component order.
    pub(crate) fn default_basepoints(&self) -> Vec<EdgeLabel> {
        self.strand_components().iter().map(|c| c[0]).collect()
    }

    /// Descending with respect to the default basepoints: every crossing is
    /// met first on its over-strand.
    pub fn is_descending(&self) -> bool {
        self.first_under(&self.default_basepoints()).is_empty()
    }

    /// PD serialization; free loops appear as `Loop[k]` terms.
    pub fn to_pd_string(&self) -> String {
        if self.crossings.is_empty() && self.free_loops == 1 {
            return String::new();
        }
        let mut terms: Vec<String> = self
            .crossings
            .iter()
            .map(|c| {
                let [a, b, cc, d] = c.slots;
                format!("X[{a},{b},{cc},{d}]")
            })
            .collect();
        let base = self.edge_count() as u32;
        terms.extend((1..=self.free_loops).map(|k| format!("Loop[{}]", base + k)));
        terms.join(";")
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pd_string())
    }
}

/// Infers the over-strand direction of every crossing.
///
/// Under-strand slots have known roles; each label must enter once and leave
/// once, which propagates to over-strand slots. Crossings left undetermined
/// (components that never pass under) are seeded with the successor rule:
/// the over-strand runs towards the label that follows its partner.
fn orient(raw: &[[EdgeLabel; 4]]) -> Result<Vec<Crossing>, DiagramError> {
    let n = raw.len();
    let m = 2 * n;
    let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (x, slots) in raw.iter().enumerate() {
        for (s, &l) in slots.iter().enumerate() {
            if l == 0 || l as usize > m {
                return Err(DiagramError::LabelRange {
                    label: l,
                    edge_count: m,
                });
            }
            occ[l as usize - 1].push((x, s));
        }
    }
    for (i, o) in occ.iter().enumerate() {
        if o.len() != 2 {
            return Err(DiagramError::LabelCount {
                label: i as EdgeLabel + 1,
                count: o.len(),
            });
        }
    }

    let mut dir: Vec<Option<Sign>> = vec![None; n];
    let role = |dir: &[Option<Sign>], (x, s): (usize, usize)| -> Option<bool> {
        match s {
            0 => Some(true),
            2 => Some(false),
            1 => dir[x].map(|d| d == Sign::Neg),
            _ => dir[x].map(|d| d == Sign::Pos),
        }
    };
    let forcing = |(_, s): (usize, usize), incoming: bool| -> Sign {
        match (s, incoming) {
            (1, true) | (3, false) => Sign::Neg,
            _ => Sign::Pos,
        }
    };

    loop {
        let mut changed = true;
        while changed {
            changed = false;
            for (i, o) in occ.iter().enumerate() {
                let (p, q) = (o[0], o[1]);
                match (role(&dir, p), role(&dir, q)) {
                    (Some(a), Some(b)) => {
                        if a == b {
                            return Err(DiagramError::Orientation {
                                label: i as EdgeLabel + 1,
                            });
                        }
                    }
                    (Some(a), None) => {
                        dir[q.0] = Some(forcing(q, !a));
                        changed = true;
                    }
                    (None, Some(b)) => {
                        dir[p.0] = Some(forcing(p, !b));
                        changed = true;
                    }
                    (None, None) => {}
                }
            }
        }
        match dir.iter().position(Option::is_none) {
            None => break,
            Some(x) => {
                let (b, d) = (raw[x][1] as i64, raw[x][3] as i64);
                dir[x] = Some(if b - d == 1 || d - b > 1 {
                    Sign::Pos
                } else {
                    Sign::Neg
                });
            }
        }
    }

    Ok(raw
        .iter()
        .zip(dir)
        .map(|(&slots, d)| Crossing {
            slots,
            sign: d.expect("all crossings oriented"),
        })
        .collect())
}

/// Rebuilds a diagram from crossings with arbitrary distinct labels, after
/// identifying the label pairs in `merges`. Merged label classes that no
/// longer touch any crossing become free loops. Labels are renumbered so
/// that each component runs consecutively from its smallest old label, and
/// components are ordered by that label; crossing order is kept.
pub(crate) fn rebuild(
    mut raw: Vec<([u64; 4], Sign)>,
    merges: &[(u64, u64)],
    free_loops: u32,
) -> Diagram {
    let mut parent: BTreeMap<u64, u64> = BTreeMap::new();
    fn find(p: &mut BTreeMap<u64, u64>, x: u64) -> u64 {
        let mut r = x;
        while let Some(&q) = p.get(&r) {
            if q == r {
                break;
            }
            r = q;
        }
        let mut y = x;
        while let Some(&q) = p.get(&y) {
            if q == r {
                break;
            }
            p.insert(y, r);
            y = q;
        }
        r
    }
    for &(a, b) in merges {
        parent.entry(a).or_insert(a);
        parent.entry(b).or_insert(b);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent.insert(hi, lo);
        }
    }
    for (slots, _) in raw.iter_mut() {
        for l in slots.iter_mut() {
            if parent.contains_key(l) {
                *l = find(&mut parent, *l);
            }
        }
    }
    let mut free = free_loops;
    let keys: Vec<u64> = parent.keys().copied().collect();
    let mut reps: Vec<u64> = keys.iter().map(|&k| find(&mut parent, k)).collect();
    reps.sort_unstable();
    reps.dedup();
    for r in reps {
        if !raw.iter().any(|(s, _)| s.contains(&r)) {
            free += 1;
        }
    }

    // tail/head darts by label
    let mut tail: HashMap<u64, Dart> = HashMap::new();
    let mut head: HashMap<u64, Dart> = HashMap::new();
    for (x, (slots, sign)) in raw.iter().enumerate() {
        let over_in = if *sign == Sign::Pos { 3 } else { 1 };
        for (s, &l) in slots.iter().enumerate() {
            let dart = Dart {
                crossing: x,
                slot: s,
            };
            if s == 0 || s == over_in {
                head.insert(l, dart);
            } else {
                tail.insert(l, dart);
            }
        }
    }
    let mut labels: Vec<u64> = head.keys().copied().collect();
    labels.sort_unstable();
    let mut new_label: HashMap<u64, EdgeLabel> = HashMap::with_capacity(labels.len());
    let mut next: EdgeLabel = 1;
    for &start in &labels {
        if new_label.contains_key(&start) {
            continue;
        }
        let mut e = start;
        loop {
            new_label.insert(e, next);
            next += 1;
            let h = head[&e];
            e = raw[h.crossing].0[(h.slot + 2) % 4];
            if e == start {
                break;
            }
        }
    }
    let crossings = raw
        .into_iter()
        .map(|(slots, sign)| Crossing {
            slots: slots.map(|l| new_label[&l]),
            sign,
        })
        .collect();
    Diagram {
        crossings,
        free_loops: free,
    }
}
