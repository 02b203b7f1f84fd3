//! Combinatorial Whitney towers.
//!
//! A tower is a set of surfaces (order-0 sheets and Whitney disks) and the
//! intersection points between them. An intersection point between surfaces
//! of orders `a` and `b` has order `a + b + 1`; a Whitney disk pairing two
//! points of order `m` has order `m`. No embedding data is kept: boundary
//! collisions between disks live in an explicit conflict ledger.
//!
//! Every state change goes through [`Move`], so a tower built from known
//! initial data can be rebuilt exactly from its move script.

mod ops;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::Sign;

pub use ops::{arf_count, build_order1, cascade_push, make_simple, raise_order};
pub use verify::{verify_tower, TowerReport, Violation};

pub type SurfaceId = u32;
pub type PointId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Sheet,
    WhitneyDisk,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Surface {
    pub id: SurfaceId,
    pub kind: SurfaceKind,
    pub order: u32,
    pub framing: i64,
    /// Surfaces carrying the two boundary arcs (disks only), sorted.
    pub boundary_arcs: Option<[SurfaceId; 2]>,
    /// The two points this disk pairs (disks only).
    pub pairs: Option<[PointId; 2]>,
    pub genus_surgeries: u32,
}

impl Surface {
    pub fn is_disk(&self) -> bool {
        self.kind == SurfaceKind::WhitneyDisk
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub id: PointId,
    /// Sorted; equal entries mean a self-intersection.
    pub surfaces: [SurfaceId; 2],
    pub sign: Sign,
    pub paired_by: Option<SurfaceId>,
}

/// Two disk boundaries that meet on a common surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryConflict {
    pub disk: SurfaceId,
    pub other: SurfaceId,
    pub on: SurfaceId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum Move {
    BoundaryTwist {
        disk: SurfaceId,
        arc: SurfaceId,
        sign: Sign,
    },
    InteriorTwist {
        disk: SurfaceId,
        sign: Sign,
    },
    /// Replaces a point on the interior of `host` by a cancelling pair
    /// between the point's other surface and `into`, one of the surfaces
    /// carrying the boundary of `host`.
    PushDown {
        point: PointId,
        host: SurfaceId,
        into: SurfaceId,
    },
    /// Pairs two points by a new framed disk. With `fig6` set, the new disk
    /// meets that surface once (sign +).
    PairPoints {
        p: PointId,
        q: PointId,
        fig6: Option<SurfaceId>,
    },
    DeclareConflict(BoundaryConflict),
    BoundaryPushoff(BoundaryConflict),
    /// Moves an intersection point from one disk to another, keeping its id
    /// and sign.
    BalanceMove {
        from: SurfaceId,
        to: SurfaceId,
        point: PointId,
    },
    /// Asserts that the state is a valid tower of the given order.
    Checkpoint {
        order: u32,
        simple: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    #[serde(flatten)]
    pub mv: Move,
    pub created_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("unknown surface {0}")]
    UnknownSurface(SurfaceId),
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("surface {0} is not a Whitney disk")]
    NotADisk(SurfaceId),
    #[error("surface {arc} does not carry a boundary arc of disk {disk}")]
    ArcNotOnBoundary { disk: SurfaceId, arc: SurfaceId },
    #[error("point {point} does not lie on surface {surface}")]
    NotOnSurface { point: PointId, surface: SurfaceId },
    #[error("point {0} is already paired")]
    AlreadyPaired(PointId),
    #[error("points {p} and {q} cannot be paired: {reason}")]
    PairMismatch {
        p: PointId,
        q: PointId,
        reason: String,
    },
    #[error("no ledger entry {0:?}")]
    NoSuchConflict(BoundaryConflict),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("checkpoint at order {order} failed: {detail}")]
    Checkpoint { order: u32, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerState {
    surfaces: BTreeMap<SurfaceId, Surface>,
    points: BTreeMap<PointId, IntersectionPoint>,
    ledger: Vec<BoundaryConflict>,
    order0_connected: bool,
    boundary_count: u32,
    declared_order: u32,
    next_id: u32,
    #[serde(skip)]
    script: Vec<MoveRecord>,
}

/// Order of an intersection point between surfaces of the given orders.
pub fn point_order(a: u32, b: u32) -> u32 {
    a + b + 1
}

fn sorted(a: SurfaceId, b: SurfaceId) -> [SurfaceId; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

impl TowerState {
    /// A single connected order-0 sheet with no intersections.
    pub fn with_sheet(boundary_count: u32) -> TowerState {
        let mut t = TowerState {
            surfaces: BTreeMap::new(),
            points: BTreeMap::new(),
            ledger: Vec::new(),
            order0_connected: true,
            boundary_count,
            declared_order: 0,
            next_id: 0,
            script: Vec::new(),
        };
        let id = t.fresh();
        t.surfaces.insert(
            id,
            Surface {
                id,
                kind: SurfaceKind::Sheet,
                order: 0,
                framing: 0,
                boundary_arcs: None,
                pairs: None,
                genus_surgeries: 0,
            },
        );
        t
    }

    fn fresh(&mut self) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &Surface> {
        self.surfaces.values()
    }

    pub fn points(&self) -> impl Iterator<Item = &IntersectionPoint> {
        self.points.values()
    }

    pub fn surface(&self, id: SurfaceId) -> Result<&Surface, TowerError> {
        self.surfaces.get(&id).ok_or(TowerError::UnknownSurface(id))
    }

    pub fn point(&self, id: PointId) -> Result<&IntersectionPoint, TowerError> {
        self.points.get(&id).ok_or(TowerError::UnknownPoint(id))
    }

    pub fn disk(&self, id: SurfaceId) -> Result<&Surface, TowerError> {
        let s = self.surface(id)?;
        if !s.is_disk() {
            return Err(TowerError::NotADisk(id));
        }
        Ok(s)
    }

    pub fn ledger(&self) -> &[BoundaryConflict] {
        &self.ledger
    }

    pub fn script(&self) -> &[MoveRecord] {
        &self.script
    }

    pub fn clear_script(&mut self) {
        self.script.clear();
    }

    pub fn order0_connected(&self) -> bool {
        self.order0_connected
    }

    pub fn boundary_count(&self) -> u32 {
        self.boundary_count
    }

    pub fn declared_order(&self) -> u32 {
        self.declared_order
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn sheets(&self) -> impl Iterator<Item = &Surface> {
        self.surfaces.values().filter(|s| !s.is_disk())
    }

    pub fn disks(&self) -> impl Iterator<Item = &Surface> {
        self.surfaces.values().filter(|s| s.is_disk())
    }

    /// Order of a point, recomputed from its surfaces.
    pub fn order_of(&self, p: &IntersectionPoint) -> Result<u32, TowerError> {
        Ok(point_order(
            self.surface(p.surfaces[0])?.order,
            self.surface(p.surfaces[1])?.order,
        ))
    }

    /// Whether a point meets an order-0 surface.
    pub fn is_simple_point(&self, p: &IntersectionPoint) -> bool {
        p.surfaces
            .iter()
            .any(|s| self.surfaces.get(s).is_some_and(|s| s.order == 0))
    }

    /// Unpaired points lying on `surface`.
    pub fn unpaired_on(&self, surface: SurfaceId) -> Vec<PointId> {
        self.points
            .values()
            .filter(|p| p.paired_by.is_none() && p.surfaces.contains(&surface))
            .map(|p| p.id)
            .collect()
    }

    /// Adds an intersection point as initial data. Not recorded in the
    /// script.
    pub fn add_point(
        &mut self,
        a: SurfaceId,
        b: SurfaceId,
        sign: Sign,
    ) -> Result<PointId, TowerError> {
        self.surface(a)?;
        self.surface(b)?;
        Ok(self.insert_point(a, b, sign))
    }

    fn insert_point(&mut self, a: SurfaceId, b: SurfaceId, sign: Sign) -> PointId {
        let id = self.fresh();
        self.points.insert(
            id,
            IntersectionPoint {
                id,
                surfaces: sorted(a, b),
                sign,
                paired_by: None,
            },
        );
        id
    }

    /// Applies a move to a copy of the state.
    pub fn apply(&self, mv: &Move) -> Result<(TowerState, Vec<u32>), TowerError> {
        let mut t = self.clone();
        let ids = t.apply_mut(mv)?;
        Ok((t, ids))
    }

    /// Applies a move in place and records it. On error the state is left
    /// unchanged.
    pub fn apply_mut(&mut self, mv: &Move) -> Result<Vec<u32>, TowerError> {
        let created = match *mv {
            Move::BoundaryTwist { disk, arc, sign } => {
                let d = self.disk(disk)?;
                let arcs = d.boundary_arcs.expect("disks carry arcs");
                if !arcs.contains(&arc) {
                    return Err(TowerError::ArcNotOnBoundary { disk, arc });
                }
                self.surfaces.get_mut(&disk).expect("checked").framing += sign.value();
                vec![self.insert_point(disk, arc, sign)]
            }
            Move::InteriorTwist { disk, sign } => {
                self.disk(disk)?;
                self.surfaces.get_mut(&disk).expect("checked").framing += 2 * sign.value();
                vec![self.insert_point(disk, disk, sign)]
            }
            Move::PushDown { point, host, into } => {
                let p = self.point(point)?;
                let h = self.disk(host)?;
                if !p.surfaces.contains(&host) {
                    return Err(TowerError::NotOnSurface {
                        point,
                        surface: host,
                    });
                }
                if p.paired_by.is_some() {
                    return Err(TowerError::AlreadyPaired(point));
                }
                let arcs = h.boundary_arcs.expect("disks carry arcs");
                if !arcs.contains(&into) {
                    return Err(TowerError::ArcNotOnBoundary {
                        disk: host,
                        arc: into,
                    });
                }
                let other = if p.surfaces[0] == host {
                    p.surfaces[1]
                } else {
                    p.surfaces[0]
                };
                self.points.remove(&point);
                vec![
                    self.insert_point(other, into, Sign::Pos),
                    self.insert_point(other, into, Sign::Neg),
                ]
            }
            Move::PairPoints { p, q, fig6 } => self.pair(p, q, fig6)?,
            Move::DeclareConflict(c) => {
                for s in [c.disk, c.other] {
                    let d = self.disk(s)?;
                    if !d.boundary_arcs.expect("disks carry arcs").contains(&c.on) {
                        return Err(TowerError::ArcNotOnBoundary { disk: s, arc: c.on });
                    }
                }
                self.ledger.push(c);
                Vec::new()
            }
            Move::BoundaryPushoff(c) => {
                let i = self
                    .ledger
                    .iter()
                    .position(|e| *e == c)
                    .ok_or(TowerError::NoSuchConflict(c))?;
                let arcs = self.disk(c.other)?.boundary_arcs.expect("disks carry arcs");
                let target = if arcs[0] == c.on { arcs[1] } else { arcs[0] };
                self.ledger.remove(i);
                vec![self.insert_point(c.disk, target, Sign::Pos)]
            }
            Move::BalanceMove { from, to, point } => {
                let f = self.disk(from)?.order;
                let t = self.disk(to)?.order;
                let p = self.point(point)?;
                if !p.surfaces.contains(&from) {
                    return Err(TowerError::NotOnSurface {
                        point,
                        surface: from,
                    });
                }
                if p.paired_by.is_some() {
                    return Err(TowerError::AlreadyPaired(point));
                }
                if f != t || p.surfaces[0] == p.surfaces[1] {
                    return Err(TowerError::Precondition(
                        "balance needs two disks of equal order and a point off the diagonal"
                            .into(),
                    ));
                }
                let rest = if p.surfaces[0] == from {
                    p.surfaces[1]
                } else {
                    p.surfaces[0]
                };
                self.points.get_mut(&point).expect("checked").surfaces = sorted(to, rest);
                Vec::new()
            }
            Move::Checkpoint { order, simple } => {
                let report = verify_tower(self, order);
                if !report.passed() || (simple && !report.simple) {
                    let detail = if report.passed() {
                        "tower is not simple".to_string()
                    } else {
                        report.violations[0].to_string()
                    };
                    return Err(TowerError::Checkpoint { order, detail });
                }
                self.declared_order = order;
                Vec::new()
            }
        };
        self.script.push(MoveRecord {
            mv: mv.clone(),
            created_ids: created.clone(),
        });
        Ok(created)
    }

    fn pair(
        &mut self,
        p: PointId,
        q: PointId,
        fig6: Option<SurfaceId>,
    ) -> Result<Vec<u32>, TowerError> {
        let mismatch = |reason: &str| TowerError::PairMismatch {
            p,
            q,
            reason: reason.into(),
        };
        let (a, b) = (self.point(p)?, self.point(q)?);
        if p == q {
            return Err(mismatch("same point"));
        }
        for x in [a, b] {
            if x.paired_by.is_some() {
                return Err(TowerError::AlreadyPaired(x.id));
            }
        }
        if a.sign == b.sign {
            return Err(mismatch("equal signs"));
        }
        if a.surfaces != b.surfaces {
            return Err(mismatch("different surfaces"));
        }
        if let Some(s) = fig6 {
            self.surface(s)?;
        }
        let arcs = a.surfaces;
        let order = self.order_of(a)?;
        let id = self.fresh();
        self.surfaces.insert(
            id,
            Surface {
                id,
                kind: SurfaceKind::WhitneyDisk,
                order,
                framing: 0,
                boundary_arcs: Some(arcs),
                pairs: Some([p, q]),
                genus_surgeries: 0,
            },
        );
        for x in [p, q] {
            self.points.get_mut(&x).expect("checked").paired_by = Some(id);
        }
        let mut created = vec![id];
        if let Some(s) = fig6 {
            created.push(self.insert_point(id, s, Sign::Pos));
        }
        Ok(created)
    }

    /// Replays a script, checking that every move creates the recorded ids.
    pub fn replay(&self, script: &[MoveRecord]) -> Result<TowerState, (usize, TowerError)> {
        let mut t = self.clone();
        for (i, rec) in script.iter().enumerate() {
            let ids = t.apply_mut(&rec.mv).map_err(|e| (i, e))?;
            if ids != rec.created_ids {
                return Err((
                    i,
                    TowerError::Precondition(format!(
                        "move created ids {ids:?}, script records {:?}",
                        rec.created_ids
                    )),
                ));
            }
        }
        Ok(t)
    }

    /// Renumbers ids of `other` by `offset`, mapping its sheets onto
    /// `sheet` of this tower, and adds all of its surfaces and points.
    pub(crate) fn absorb(&mut self, other: &TowerState, sheet: SurfaceId) {
        let offset = self.next_id;
        let map = |id: u32| -> u32 {
            if other.surfaces.get(&id).is_some_and(|s| !s.is_disk()) {
                sheet
            } else {
                id + offset
            }
        };
        for s in other.disks() {
            let mut s = s.clone();
            s.id = map(s.id);
            s.boundary_arcs = s.boundary_arcs.map(|[a, b]| sorted(map(a), map(b)));
            s.pairs = s.pairs.map(|[a, b]| [a + offset, b + offset]);
            self.surfaces.insert(s.id, s);
        }
        for p in other.points.values() {
            let mut p = p.clone();
            p.id += offset;
            p.surfaces = sorted(map(p.surfaces[0]), map(p.surfaces[1]));
            p.paired_by = p.paired_by.map(map);
            self.points.insert(p.id, p);
        }
        for c in &other.ledger {
            self.ledger.push(BoundaryConflict {
                disk: map(c.disk),
                other: map(c.other),
                on: map(c.on),
            });
        }
        self.next_id += other.next_id;
    }

    pub(crate) fn set_shape(&mut self, connected: bool, boundary_count: u32) {
        self.order0_connected = connected;
        self.boundary_count = boundary_count;
    }

    pub(crate) fn set_declared_order(&mut self, n: u32) {
        self.declared_order = n;
    }

    pub fn summary(&self) -> TowerSummary {
        let mut disks_by_order = BTreeMap::new();
        for d in self.disks() {
            *disks_by_order.entry(d.order).or_insert(0u64) += 1;
        }
        let mut points_by_order = BTreeMap::new();
        let mut unpaired_by_order = BTreeMap::new();
        for p in self.points.values() {
            let k = self.order_of(p).unwrap_or(u32::MAX);
            *points_by_order.entry(k).or_insert(0u64) += 1;
            if p.paired_by.is_none() {
                *unpaired_by_order.entry(k).or_insert(0u64) += 1;
            }
        }
        let framings: Vec<i64> = self.disks().map(|d| d.framing).collect();
        TowerSummary {
            declared_order: self.declared_order,
            sheets: self.sheets().count() as u64,
            disks_by_order,
            points_by_order,
            unpaired_by_order,
            nonzero_framings: framings.iter().filter(|&&f| f != 0).count() as u64,
            framing_total: framings.iter().map(|f| f.abs()).sum(),
            ledger: self.ledger.len() as u64,
            simple: self.points.values().all(|p| self.is_simple_point(p)),
            fingerprint: self.fingerprint(),
        }
    }

    /// SHA-256 of the canonical JSON form of surfaces, points and ledger.
    pub fn fingerprint(&self) -> String {
        let body = serde_json::to_vec(&(&self.surfaces, &self.points, &self.ledger))
            .expect("tower serializes");
        hex::encode(Sha256::digest(body))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSummary {
    pub declared_order: u32,
    pub sheets: u64,
    pub disks_by_order: BTreeMap<u32, u64>,
    pub points_by_order: BTreeMap<u32, u64>,
    pub unpaired_by_order: BTreeMap<u32, u64>,
    pub nonzero_framings: u64,
    pub framing_total: i64,
    pub ledger: u64,
    pub simple: bool,
    pub fingerprint: String,
}
