use std::fmt;

use serde::{Deserialize, Serialize};

use super::{point_order, PointId, SurfaceId, TowerState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnpairedPoint {
        point: PointId,
        order: u32,
    },
    FramingNonzero {
        disk: SurfaceId,
        framing: i64,
    },
    BoundaryConflict {
        disk: SurfaceId,
        other: SurfaceId,
        on: SurfaceId,
    },
    PairMismatch {
        disk: SurfaceId,
        reason: String,
    },
    OrderMismatch {
        surface: SurfaceId,
        recorded: u32,
        computed: u32,
    },
    DanglingReference {
        id: u32,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::UnpairedPoint { .. } => "unpaired_point",
            Violation::FramingNonzero { .. } => "framing_nonzero",
            Violation::BoundaryConflict { .. } => "boundary_conflict",
            Violation::PairMismatch { .. } => "pair_mismatch",
            Violation::OrderMismatch { .. } => "order_mismatch",
            Violation::DanglingReference { .. } => "dangling_reference",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnpairedPoint { point, order } => {
                write!(f, "unpaired point {point} of order {order}")
            }
            Violation::FramingNonzero { disk, framing } => {
                write!(f, "disk {disk} has framing {framing}")
            }
            Violation::BoundaryConflict { disk, other, on } => {
                write!(f, "boundaries of disks {disk} and {other} meet on {on}")
            }
            Violation::PairMismatch { disk, reason } => write!(f, "disk {disk}: {reason}"),
            Violation::OrderMismatch {
                surface,
                recorded,
                computed,
            } => write!(
                f,
                "surface {surface} records order {recorded}, pairs order {computed}"
            ),
            Violation::DanglingReference { id } => write!(f, "reference to missing id {id}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub order: u32,
    /// Every point meets an order-0 surface.
    pub simple: bool,
    pub violations: Vec<Violation>,
}

impl TowerReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `t` is a Whitney tower of order `n`: every point of order at
/// most `n` is paired by a well-formed framed disk, recorded orders agree
/// with orders recomputed from the sheets up, and no boundary conflicts
/// remain.
pub fn verify_tower(t: &TowerState, n: u32) -> TowerReport {
    let mut v = Vec::new();

    // orders recomputed bottom-up; disks whose pairs are broken get none
    let mut computed = std::collections::BTreeMap::new();
    for s in t.sheets() {
        computed.insert(s.id, 0u32);
        if s.order != 0 {
            v.push(Violation::OrderMismatch {
                surface: s.id,
                recorded: s.order,
                computed: 0,
            });
        }
    }
    let mut pending: Vec<_> = t.disks().collect();
    loop {
        let before = pending.len();
        pending.retain(|d| {
            let arcs = d.boundary_arcs.unwrap_or([u32::MAX; 2]);
            match (computed.get(&arcs[0]), computed.get(&arcs[1])) {
                (Some(&a), Some(&b)) => {
                    computed.insert(d.id, point_order(a, b));
                    false
                }
                _ => true,
            }
        });
        if pending.is_empty() || pending.len() == before {
            break;
        }
    }
    for d in &pending {
        v.push(Violation::DanglingReference {
            id: d.boundary_arcs.map_or(d.id, |a| a[0]),
        });
    }

    for d in t.disks() {
        if d.framing != 0 {
            v.push(Violation::FramingNonzero {
                disk: d.id,
                framing: d.framing,
            });
        }
        if let Some(&c) = computed.get(&d.id) {
            if c != d.order {
                v.push(Violation::OrderMismatch {
                    surface: d.id,
                    recorded: d.order,
                    computed: c,
                });
            }
        }
        let Some([p, q]) = d.pairs else {
            v.push(Violation::PairMismatch {
                disk: d.id,
                reason: "pairs nothing".into(),
            });
            continue;
        };
        let (Ok(a), Ok(b)) = (t.point(p), t.point(q)) else {
            v.push(Violation::DanglingReference {
                id: if t.point(p).is_err() { p } else { q },
            });
            continue;
        };
        let mismatch = |reason: &str| Violation::PairMismatch {
            disk: d.id,
            reason: reason.into(),
        };
        if p == q {
            v.push(mismatch("pairs a point with itself"));
        }
        if a.sign == b.sign {
            v.push(mismatch("paired points have equal signs"));
        }
        if a.surfaces != b.surfaces {
            v.push(mismatch("paired points lie on different surfaces"));
        }
        if d.boundary_arcs != Some(a.surfaces) {
            v.push(mismatch("boundary arcs do not match the paired points"));
        }
        if a.paired_by != Some(d.id) || b.paired_by != Some(d.id) {
            v.push(mismatch("paired points do not point back"));
        }
    }

    for p in t.points() {
        let order = match (computed.get(&p.surfaces[0]), computed.get(&p.surfaces[1])) {
            (Some(&a), Some(&b)) => point_order(a, b),
            _ => {
                v.push(Violation::DanglingReference {
                    id: if t.surface(p.surfaces[0]).is_err() {
                        p.surfaces[0]
                    } else {
                        p.surfaces[1]
                    },
                });
                continue;
            }
        };
        match p.paired_by {
            None if order <= n => v.push(Violation::UnpairedPoint { point: p.id, order }),
            None => {}
            Some(d) => match t.surface(d) {
                Ok(s) if s.is_disk() && s.pairs.is_some_and(|pq| pq.contains(&p.id)) => {}
                Ok(_) => v.push(Violation::PairMismatch {
                    disk: d,
                    reason: format!("does not pair point {}", p.id),
                }),
                Err(_) => v.push(Violation::DanglingReference { id: d }),
            },
        }
    }

    for c in t.ledger() {
        v.push(Violation::BoundaryConflict {
            disk: c.disk,
            other: c.other,
            on: c.on,
        });
    }

    TowerReport {
        order: n,
        simple: t.points().all(|p| t.is_simple_point(p)),
        violations: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::Move;
    use crate::Sign;

    #[test]
    fn unpaired_point_reported_at_its_order() {
        let mut t = TowerState::with_sheet(1);
        t.add_point(0, 0, Sign::Pos).unwrap();
        let r = verify_tower(&t, 1);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind(), "unpaired_point");
        assert!(verify_tower(&t, 0).passed());
    }

    #[test]
    fn framing_reported() {
        let mut t = TowerState::with_sheet(1);
        let p = t.add_point(0, 0, Sign::Pos).unwrap();
        let q = t.add_point(0, 0, Sign::Neg).unwrap();
        let w = t.apply_mut(&Move::PairPoints { p, q, fig6: None }).unwrap()[0];
        t.apply_mut(&Move::InteriorTwist {
            disk: w,
            sign: Sign::Neg,
        })
        .unwrap();
        let r = verify_tower(&t, 1);
        assert!(r.violations.iter().any(|x| x.kind() == "framing_nonzero"));
        assert!(!r.simple);
    }
}
