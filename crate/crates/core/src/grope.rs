//! Half-gropes and their exchange with simple Whitney towers.
//!
//! A stage of genus `g` has a symplectic basis `a_1, b_1, ..., a_g, b_g`.
//! Higher stages are attached along the `a_i`; the `b_i` (and the `a_i` of
//! top stages) are tips, which may carry caps. A cap only records what the
//! tower side needs: its framing, its signed intersections with the bottom
//! stage, and intersections with higher stages still waiting to be pushed
//! down.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tower::{verify_tower, Move, SurfaceId, TowerError, TowerState};
use crate::Sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GropeError {
    #[error("malformed grope at {path}: {msg}")]
    Malformed { path: String, msg: String },
    #[error("tip at {0} has no cap")]
    MissingCap(String),
    #[error("cap at {0} is not prepared")]
    Unprepared(String),
    #[error("grope class {0} is below 2")]
    ClassTooLow(GropeClass),
    #[error("tower cannot be tubed into a grope: {0}")]
    Tower(String),
    #[error(transparent)]
    Move(#[from] TowerError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GropeClass {
    Finite(u32),
    /// A branch ending in a disk bounds gropes of every class.
    Unbounded(Unbounded),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unbounded {
    Unbounded,
}

impl GropeClass {
    pub const UNBOUNDED: GropeClass = GropeClass::Unbounded(Unbounded::Unbounded);

    pub fn finite(self) -> Option<u32> {
        match self {
            GropeClass::Finite(n) => Some(n),
            GropeClass::Unbounded(_) => None,
        }
    }

    fn succ(self) -> GropeClass {
        match self {
            GropeClass::Finite(n) => GropeClass::Finite(n + 1),
            u => u,
        }
    }
}

impl Ord for GropeClass {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.finite(), other.finite()) {
            (Some(a), Some(b)) => a.cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
    }
}

impl PartialOrd for GropeClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GropeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("unbounded"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageHit {
    /// Depth of the stage hit; the bottom stage has depth 0.
    pub depth: u32,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cap {
    pub framing: i64,
    pub bottom_marks: Vec<Sign>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stage_hits: Vec<StageHit>,
    /// Top-stage caps meet their dual cap in one boundary point.
    pub dual_point: bool,
}

impl Cap {
    pub fn new(bottom_marks: Vec<Sign>) -> Cap {
        Cap {
            framing: 0,
            bottom_marks,
            stage_hits: Vec::new(),
            dual_point: true,
        }
    }

    pub fn is_prepared(&self) -> bool {
        self.framing == 0 && self.stage_hits.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub genus: u32,
    pub boundary_count: u32,
    pub framing_ok: bool,
    /// Empty for a top stage; otherwise one child per `a_i`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Stage>,
    /// Caps on the `b_i`, one slot per handle.
    pub b_caps: Vec<Option<Cap>>,
    /// Caps on the `a_i` of a top stage.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a_caps: Vec<Option<Cap>>,
}

impl Stage {
    /// A top stage of the given genus without caps.
    pub fn bare(genus: u32) -> Stage {
        Stage {
            genus,
            boundary_count: 1,
            framing_ok: true,
            children: Vec::new(),
            b_caps: vec![None; genus as usize],
            a_caps: vec![None; genus as usize],
        }
    }

    /// A stage with one child per handle.
    pub fn with_children(children: Vec<Stage>) -> Stage {
        let g = children.len();
        Stage {
            genus: g as u32,
            boundary_count: 1,
            framing_ok: true,
            children,
            b_caps: vec![None; g],
            a_caps: Vec::new(),
        }
    }

    pub fn is_top(&self) -> bool {
        self.children.is_empty()
    }

    fn check(&self, path: &str) -> Result<(), GropeError> {
        let bad = |msg: String| GropeError::Malformed {
            path: path.to_string(),
            msg,
        };
        let g = self.genus as usize;
        if !self.is_top() && self.children.len() != g {
            return Err(bad(format!(
                "genus {g} stage has {} children",
                self.children.len()
            )));
        }
        if self.b_caps.len() != g {
            return Err(bad(format!(
                "{} b-cap slots for genus {g}",
                self.b_caps.len()
            )));
        }
        let a_expected = if self.is_top() { g } else { 0 };
        if self.a_caps.len() != a_expected {
            return Err(bad(format!(
                "{} a-cap slots, expected {a_expected}",
                self.a_caps.len()
            )));
        }
        for (i, c) in self.children.iter().enumerate() {
            c.check(&format!("{path}/{i}"))?;
        }
        Ok(())
    }

    fn class(&self) -> GropeClass {
        if self.genus == 0 {
            GropeClass::UNBOUNDED
        } else if self.is_top() {
            GropeClass::Finite(2)
        } else {
            self.children
                .iter()
                .map(Stage::class)
                .min()
                .expect("non-top stage has children")
                .succ()
        }
    }

    fn depth(&self) -> u32 {
        1 + self.children.iter().map(Stage::depth).max().unwrap_or(0)
    }

    fn count_stages(&self) -> usize {
        1 + self.children.iter().map(Stage::count_stages).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfGrope {
    pub root: Stage,
}

impl HalfGrope {
    pub fn new(root: Stage) -> HalfGrope {
        HalfGrope { root }
    }

    /// Number of stages on the longest branch.
    pub fn height(&self) -> u32 {
        self.root.depth()
    }

    pub fn stage_count(&self) -> usize {
        self.root.count_stages()
    }

    /// Every cap slot with its path, `b`/`a` side and depth.
    fn caps(&self) -> Vec<(String, u32, Option<&Cap>)> {
        fn walk<'a>(
            s: &'a Stage,
            path: String,
            depth: u32,
            out: &mut Vec<(String, u32, Option<&'a Cap>)>,
        ) {
            for (i, c) in s.b_caps.iter().enumerate() {
                out.push((format!("{path}/b{i}"), depth, c.as_ref()));
            }
            for (i, c) in s.a_caps.iter().enumerate() {
                out.push((format!("{path}/a{i}"), depth, c.as_ref()));
            }
            for (i, ch) in s.children.iter().enumerate() {
                walk(ch, format!("{path}/{i}"), depth + 1, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, String::new(), 0, &mut out);
        out
    }
}

pub fn grope_class(h: &HalfGrope) -> Result<GropeClass, GropeError> {
    h.root.check("")?;
    Ok(h.root.class())
}

/// Repairs cap framings by boundary twists, each creating an intersection
/// with the stage the tip lies on, then pushes every intersection with a
/// stage at depth `d` down to the bottom, which doubles it at each of the
/// `d` levels crossed.
pub fn prepare_caps(h: &HalfGrope) -> Result<HalfGrope, GropeError> {
    fn fix(cap: &mut Cap, depth: u32) {
        let twist_sign = if cap.framing > 0 {
            Sign::Neg
        } else {
            Sign::Pos
        };
        for _ in 0..cap.framing.unsigned_abs() {
            cap.stage_hits.push(StageHit {
                depth,
                sign: twist_sign,
            });
        }
        cap.framing = 0;
        for hit in std::mem::take(&mut cap.stage_hits) {
            let copies = 1u64 << hit.depth;
            let mut s = hit.sign;
            for _ in 0..copies {
                cap.bottom_marks.push(s);
                if hit.depth > 0 {
                    s = -s;
                }
            }
        }
    }
    fn walk(s: &mut Stage, path: &str, depth: u32) -> Result<(), GropeError> {
        for (side, caps) in [("b", &mut s.b_caps), ("a", &mut s.a_caps)] {
            for (i, c) in caps.iter_mut().enumerate() {
                match c {
                    Some(cap) => fix(cap, depth),
                    None => return Err(GropeError::MissingCap(format!("{path}/{side}{i}"))),
                }
            }
        }
        for (i, ch) in s.children.iter_mut().enumerate() {
            walk(ch, &format!("{path}/{i}"), depth + 1)?;
        }
        Ok(())
    }
    h.root.check("")?;
    let mut out = h.clone();
    walk(&mut out.root, "", 0)?;
    Ok(out)
}

/// Surgers the caps of a prepared grope of class `n` into a simple tower
/// of order `n - 1`.
///
/// At each stage, every bottom mark of the cap on `b_i` becomes a
/// cancelling pair between this stage's surface and the bottom sheet. The
/// pair is paired by the surgered stage above `a_i`, one parallel copy per
/// mark, or at a top stage by the cap on `a_i`, whose own marks become
/// intersections with the sheet.
pub fn grope_to_tower(h: &HalfGrope) -> Result<TowerState, GropeError> {
    let class = grope_class(h)?;
    if class < GropeClass::Finite(2) {
        return Err(GropeError::ClassTooLow(class));
    }
    for (path, _, cap) in h.caps() {
        match cap {
            None => return Err(GropeError::MissingCap(path)),
            Some(c) if !c.is_prepared() => return Err(GropeError::Unprepared(path)),
            _ => {}
        }
    }
    fn emit(t: &mut TowerState, s: &Stage, surf: SurfaceId) -> Result<(), GropeError> {
        for i in 0..s.genus as usize {
            let b = s.b_caps[i].as_ref().expect("caps checked");
            for &mark in &b.bottom_marks {
                let p = t.add_point(surf, 0, mark)?;
                let q = t.add_point(surf, 0, -mark)?;
                let d = t.apply_mut(&Move::PairPoints { p, q, fig6: None })?[0];
                if s.is_top() {
                    let a = s.a_caps[i].as_ref().expect("caps checked");
                    for &m in &a.bottom_marks {
                        t.add_point(d, 0, m)?;
                    }
                } else {
                    emit(t, &s.children[i], d)?;
                }
            }
        }
        Ok(())
    }
    let mut t = TowerState::with_sheet(h.root.boundary_count);
    emit(&mut t, &h.root, 0)?;
    t.clear_script();
    let n = class
        .finite()
        .map_or(t.disks().map(|d| d.order).max().unwrap_or(0), |c| c - 1);
    t.apply_mut(&Move::Checkpoint {
        order: n,
        simple: true,
    })?;
    t.clear_script();
    Ok(t)
}

/// Tubes the Whitney disks of a simple tower of order `n >= 1` along the
/// sheet: the sheet, surgered once per order-1 disk, is the bottom stage;
/// an order-m disk becomes a stage of depth `m` attached along the disks of
/// order `m + 1` pairing its intersections with the sheet. Stages built
/// from order-(n-1) disks are top stages capped by the order-n disks.
pub fn tower_to_grope(t: &TowerState) -> Result<HalfGrope, GropeError> {
    let n = t.declared_order();
    if n == 0 {
        return Err(GropeError::Tower(
            "an order-0 tower has no Whitney disks to tube".into(),
        ));
    }
    let r = verify_tower(t, n);
    if !r.passed() {
        return Err(GropeError::Tower(r.violations[0].to_string()));
    }
    if !r.simple {
        return Err(GropeError::Tower("tower is not simple".into()));
    }
    let sheet = t
        .sheets()
        .next()
        .ok_or_else(|| GropeError::Tower("no order-0 sheet".into()))?
        .id;

    // disks resting on each surface, in id order
    let mut above: BTreeMap<SurfaceId, Vec<SurfaceId>> = Default::default();
    for d in t.disks() {
        let [a, b] = d.boundary_arcs.expect("disks carry arcs");
        let base = if a == sheet { b } else { a };
        above.entry(base).or_default().push(d.id);
    }
    let mut loose: BTreeMap<SurfaceId, Vec<Sign>> = Default::default();
    for p in t.points().filter(|p| p.paired_by.is_none()) {
        for s in p.surfaces {
            if s != sheet {
                loose.entry(s).or_default().push(p.sign);
            }
        }
    }
    let mark = |d: SurfaceId| -> Result<Sign, GropeError> {
        let pq = t.surface(d)?.pairs.expect("disks pair points");
        Ok(t.point(pq[0])?.sign)
    };
    fn build(
        above: &BTreeMap<SurfaceId, Vec<SurfaceId>>,
        mark: &dyn Fn(SurfaceId) -> Result<Sign, GropeError>,
        loose: &BTreeMap<SurfaceId, Vec<Sign>>,
        surf: SurfaceId,
        depth: u32,
        n: u32,
        boundary_count: u32,
    ) -> Result<Stage, GropeError> {
        let handles: Vec<SurfaceId> = above.get(&surf).cloned().unwrap_or_default();
        let g = handles.len();
        let mut b_caps = Vec::with_capacity(g);
        for &d in &handles {
            b_caps.push(Some(Cap::new(vec![mark(d)?])));
        }
        let top = depth + 1 == n;
        let (children, a_caps) = if top {
            let mut caps = Vec::with_capacity(g);
            for &d in &handles {
                caps.push(Some(Cap::new(loose.get(&d).cloned().unwrap_or_default())));
            }
            (Vec::new(), caps)
        } else {
            let mut ch = Vec::with_capacity(g);
            for &d in &handles {
                ch.push(build(above, mark, loose, d, depth + 1, n, 1)?);
            }
            (ch, Vec::new())
        };
        Ok(Stage {
            genus: g as u32,
            boundary_count,
            framing_ok: true,
            children,
            b_caps,
            a_caps,
        })
    }
    let root = build(&above, &mark, &loose, sheet, 0, n, t.boundary_count())?;
    Ok(HalfGrope { root })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capped(mut s: Stage, marks: Vec<Sign>) -> Stage {
        for c in s.b_caps.iter_mut().chain(s.a_caps.iter_mut()) {
            *c = Some(Cap::new(marks.clone()));
        }
        s.children = s
            .children
            .into_iter()
            .map(|c| capped(c, marks.clone()))
            .collect();
        s
    }

    #[test]
    fn classes() {
        assert_eq!(
            grope_class(&HalfGrope::new(Stage::bare(3))).unwrap(),
            GropeClass::Finite(2)
        );
        let h = HalfGrope::new(Stage::with_children(vec![Stage::bare(1)]));
        assert_eq!(grope_class(&h).unwrap(), GropeClass::Finite(3));
        let chain = Stage::with_children(vec![Stage::with_children(vec![Stage::bare(1)])]);
        assert_eq!(
            grope_class(&HalfGrope::new(chain)).unwrap(),
            GropeClass::Finite(4)
        );
        assert_eq!(
            grope_class(&HalfGrope::new(Stage::bare(0))).unwrap(),
            GropeClass::UNBOUNDED
        );
        let mut bad = Stage::with_children(vec![Stage::bare(1)]);
        bad.genus = 2;
        assert!(grope_class(&HalfGrope::new(bad)).is_err());
    }

    #[test]
    fn prepare_repairs_framing() {
        let mut s = capped(Stage::bare(1), vec![]);
        s.b_caps[0].as_mut().unwrap().framing = -1;
        let h = prepare_caps(&HalfGrope::new(s)).unwrap();
        let cap = h.root.b_caps[0].as_ref().unwrap();
        assert_eq!(cap.framing, 0);
        assert_eq!(cap.bottom_marks, vec![Sign::Pos]);
        assert!(prepare_caps(&HalfGrope::new(Stage::bare(1))).is_err());
    }

    #[test]
    fn prepare_pushes_higher_hits_down() {
        let s = Stage::with_children(vec![Stage::with_children(vec![Stage::bare(1)])]);
        let mut s = capped(s, vec![]);
        s.children[0].children[0].a_caps[0]
            .as_mut()
            .unwrap()
            .stage_hits = vec![StageHit {
            depth: 2,
            sign: Sign::Pos,
        }];
        let h = prepare_caps(&HalfGrope::new(s)).unwrap();
        let marks = &h.root.children[0].children[0].a_caps[0]
            .as_ref()
            .unwrap()
            .bottom_marks;
        assert_eq!(marks.len(), 4);
        assert_eq!(marks.iter().map(|s| s.value()).sum::<i64>(), 0);
    }

    #[test]
    fn class_two_without_marks_is_empty_order1() {
        let h = HalfGrope::new(capped(Stage::bare(2), vec![]));
        let t = grope_to_tower(&h).unwrap();
        assert_eq!(t.points().count(), 0);
        assert_eq!(t.declared_order(), 1);
    }

    #[test]
    fn class_three_one_mark() {
        let s = capped(Stage::with_children(vec![Stage::bare(1)]), vec![]);
        let mut s = s;
        s.b_caps[0] = Some(Cap::new(vec![Sign::Pos]));
        let t = grope_to_tower(&HalfGrope::new(s)).unwrap();
        let sum = t.summary();
        assert_eq!(sum.disks_by_order.get(&1), Some(&1));
        assert!(sum.simple);
        assert_eq!(t.declared_order(), 2);
    }

    #[test]
    fn unprepared_rejected() {
        let mut s = capped(Stage::bare(1), vec![]);
        s.a_caps[0].as_mut().unwrap().framing = 2;
        assert!(matches!(
            grope_to_tower(&HalfGrope::new(s)),
            Err(GropeError::Unprepared(_))
        ));
    }

    #[test]
    fn order_zero_tower_rejected() {
        let t = TowerState::with_sheet(2);
        assert!(tower_to_grope(&t).is_err());
    }
}
