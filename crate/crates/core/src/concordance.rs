//! Deciding Arf equality for a pair of knots and certifying it.
//!
//! Each knot's unknotting sequence gives an order-1 tower on a disk. The
//! two disks are tubed into an annulus whose order-2 points have the parity
//! of the summed Arf invariants. When that parity is even the tower is
//! balanced, repaired to order 2, made simple and raised to the requested
//! order, and the whole move script goes into a certificate that can be
//! replayed from the knots alone.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{parse, Diagram, DiagramError, SwitchSequence};
use crate::grope::{grope_class, tower_to_grope, GropeClass, GropeError, HalfGrope};
use crate::invariants::{arf_from_conway, arf_from_unknotting_at, ArfValue, InvariantError};
use crate::tower::{
    build_order1, make_simple, raise_order, verify_tower, Move, MoveRecord, PointId, SurfaceId,
    TowerError, TowerState, TowerSummary, Violation,
};
use crate::Sign;

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcordanceError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Grope(#[from] GropeError),
    #[error("certificate order must be at least 2, got {0}")]
    OrderTooLow(u32),
    #[error("knot {index} has {components} components")]
    NotAKnot { index: usize, components: usize },
    #[error("invalid input tower: {0}")]
    InvalidTower(String),
    #[error("order-2 parity {parity} disagrees with Arf values {arf0} and {arf1}")]
    ParityDisagreement { parity: u8, arf0: u8, arf1: u8 },
}

#[derive(Clone, Debug)]
pub struct NamedDiagram {
    pub name: String,
    pub diagram: Diagram,
}

impl NamedDiagram {
    pub fn new(name: impl Into<String>, diagram: Diagram) -> Self {
        NamedDiagram {
            name: name.into(),
            diagram,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotRecord {
    pub name: String,
    pub pd: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GropeRecord {
    pub class: GropeClass,
    pub tree: HalfGrope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub knots: [KnotRecord; 2],
    pub arf: [ArfValue; 2],
    pub order: u32,
    pub switches: [SwitchSequence; 2],
    pub moves: Vec<MoveRecord>,
    pub tower_summary: TowerSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grope: Option<GropeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obstruction {
    pub knots: [String; 2],
    pub arf: [ArfValue; 2],
    /// Number of order-2 points on the tubed annulus tower.
    pub order2_points: u64,
    pub parity: u8,
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "obstruction: order-2 parity {}", self.parity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Certificate(Box<Certificate>),
    Obstruction(Obstruction),
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub order: u32,
    pub grope: bool,
}

impl CertifyOptions {
    pub fn new(order: u32) -> Self {
        CertifyOptions {
            order,
            grope: false,
        }
    }

    pub fn with_grope(mut self, grope: bool) -> Self {
        self.grope = grope;
        self
    }
}

fn is_order2_on(t: &TowerState, id: PointId, disk: SurfaceId) -> bool {
    t.point(id).is_ok_and(|p| {
        p.paired_by.is_none() && p.surfaces.contains(&disk) && (t.order_of(p) == Ok(2))
    })
}

/// Unpaired order-2 points on `disk`, in id order.
fn order2_points_on(t: &TowerState, disk: SurfaceId) -> Vec<PointId> {
    t.points()
        .filter(|p| is_order2_on(t, p.id, disk))
        .map(|p| p.id)
        .collect()
}

pub fn order2_count(t: &TowerState) -> u64 {
    t.points().filter(|p| t.order_of(p) == Ok(2)).count() as u64
}

/// Joins two order-1 towers on disks into one on the annulus between their
/// boundary knots. Ids of `t1` are shifted past those of `t0`.
pub fn tube_towers(t0: &TowerState, t1: &TowerState) -> Result<TowerState, ConcordanceError> {
    for (i, t) in [t0, t1].into_iter().enumerate() {
        let r = verify_tower(t, 1);
        if let Some(v) = r.violations.first() {
            return Err(ConcordanceError::InvalidTower(format!("tower {i}: {v}")));
        }
        if t.sheets().count() != 1 || t.boundary_count() != 1 {
            return Err(ConcordanceError::InvalidTower(format!(
                "tower {i} does not sit on a single disk"
            )));
        }
    }
    let mut t = t0.clone();
    let sheet = t.sheets().next().expect("checked").id;
    t.absorb(t1, sheet);
    t.set_shape(true, 2);
    t.set_declared_order(1);
    t.clear_script();
    Ok(t)
}

/// The tubed order-1 tower both certify and verify start from.
pub fn initial_tower(switches: &[SwitchSequence; 2]) -> Result<TowerState, ConcordanceError> {
    tube_towers(&build_order1(&switches[0]), &build_order1(&switches[1]))
}

fn balance_mut(t: &mut TowerState, from: SurfaceId, to: SurfaceId) -> Result<(), ConcordanceError> {
    for d in [from, to] {
        if t.disk(d)?.order != 1 {
            return Err(TowerError::Precondition(format!("disk {d} is not of order 1")).into());
        }
    }
    let point = *order2_points_on(t, from).first().ok_or_else(|| {
        TowerError::Precondition(format!("disk {from} has no order-2 point to transfer"))
    })?;
    t.apply_mut(&Move::BalanceMove { from, to, point })?;
    Ok(())
}

/// Moves one order-2 point from order-1 disk `from` to order-1 disk `to`.
pub fn balance_move(
    t: &TowerState,
    from: SurfaceId,
    to: SurfaceId,
) -> Result<TowerState, ConcordanceError> {
    let mut u = t.clone();
    balance_mut(&mut u, from, to)?;
    Ok(u)
}

/// Makes every order-1 disk carry an even number of order-2 points by
/// matching up odd disks in id order. Returns the number of moves.
pub fn balance(t: &mut TowerState) -> Result<usize, ConcordanceError> {
    let odd: Vec<SurfaceId> = t
        .disks()
        .filter(|d| d.order == 1)
        .map(|d| d.id)
        .filter(|&d| order2_points_on(t, d).len() % 2 == 1)
        .collect();
    for pair in odd.chunks(2) {
        match *pair {
            [a, b] => balance_mut(t, a, b)?,
            _ => {
                return Err(TowerError::Precondition(
                    "odd total of order-2 points cannot be balanced".into(),
                )
                .into())
            }
        }
    }
    Ok(odd.len() / 2)
}

fn even_twist_mut(t: &mut TowerState, w: SurfaceId) -> Result<u32, ConcordanceError> {
    let d = t.disk(w)?;
    if d.order != 1 {
        return Err(TowerError::Precondition(format!("disk {w} is not of order 1")).into());
    }
    let sheet = d.boundary_arcs.expect("disks carry arcs")[0];
    let pts = order2_points_on(t, w);
    if pts.len() % 2 == 1 {
        return Err(TowerError::Precondition(format!(
            "disk {w} carries {} order-2 points",
            pts.len()
        ))
        .into());
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for &p in &pts {
        match t.point(p)?.sign {
            Sign::Pos => plus.push(p),
            Sign::Neg => minus.push(p),
        }
    }
    let excess = plus.len().abs_diff(minus.len());
    let twist = if plus.len() > minus.len() {
        Sign::Neg
    } else {
        Sign::Pos
    };
    for _ in 0..excess {
        let q = t.apply_mut(&Move::BoundaryTwist {
            disk: w,
            arc: sheet,
            sign: twist,
        })?[0];
        match twist {
            Sign::Pos => plus.push(q),
            Sign::Neg => minus.push(q),
        }
    }
    for (&p, &q) in plus.iter().zip(&minus) {
        t.apply_mut(&Move::PairPoints { p, q, fig6: None })?;
    }
    let m = (excess / 2) as u32;
    for _ in 0..m {
        t.apply_mut(&Move::InteriorTwist {
            disk: w,
            sign: -twist,
        })?;
    }
    Ok(m)
}

/// Pairs the order-2 points of an order-1 disk carrying an even number of
/// them. The sign excess `2m` is cancelled by `2m` like-signed boundary
/// twists, and `m` interior twists of the opposite sign bring the framing
/// back to 0 at the cost of `m` order-3 self-points.
pub fn even_twist_repair(t: &TowerState, w: SurfaceId) -> Result<TowerState, ConcordanceError> {
    let mut u = t.clone();
    even_twist_mut(&mut u, w)?;
    Ok(u)
}

fn check_knot(index: usize, d: &Diagram) -> Result<(), ConcordanceError> {
    match d.component_count() {
        1 => Ok(()),
        components => Err(ConcordanceError::NotAKnot { index, components }),
    }
}

/// Runs the full pipeline for `k0` and `k1`.
pub fn certify(
    k0: &NamedDiagram,
    k1: &NamedDiagram,
    opts: &CertifyOptions,
) -> Result<Outcome, ConcordanceError> {
    if opts.order < 2 {
        return Err(ConcordanceError::OrderTooLow(opts.order));
    }
    let knots = [k0, k1];
    for (i, k) in knots.iter().enumerate() {
        check_knot(i, &k.diagram)?;
    }
    let arf = [arf_from_conway(&k0.diagram)?, arf_from_conway(&k1.diagram)?];
    let switches = [
        k0.diagram.descending_switches(1)?,
        k1.diagram.descending_switches(1)?,
    ];
    let mut t = initial_tower(&switches)?;

    let count = order2_count(&t);
    let parity = (count % 2) as u8;
    if parity != (arf[0].value + arf[1].value) % 2 {
        return Err(ConcordanceError::ParityDisagreement {
            parity,
            arf0: arf[0].value,
            arf1: arf[1].value,
        });
    }
    if parity == 1 {
        return Ok(Outcome::Obstruction(Obstruction {
            knots: [k0.name.clone(), k1.name.clone()],
            arf,
            order2_points: count,
            parity,
        }));
    }

    balance(&mut t)?;
    let order1: Vec<SurfaceId> = t.disks().filter(|d| d.order == 1).map(|d| d.id).collect();
    for w in order1 {
        even_twist_mut(&mut t, w)?;
    }
    t.apply_mut(&Move::Checkpoint {
        order: 2,
        simple: false,
    })?;
    let mut t = make_simple(&t)?;
    while t.declared_order() < opts.order {
        t = raise_order(&t)?;
    }

    let grope = if opts.grope {
        let tree = tower_to_grope(&t)?;
        let class = grope_class(&tree)?;
        Some(GropeRecord { class, tree })
    } else {
        None
    };

    Ok(Outcome::Certificate(Box::new(Certificate {
        version: CERTIFICATE_VERSION,
        knots: [
            KnotRecord {
                name: k0.name.clone(),
                pd: k0.diagram.to_pd_string(),
            },
            KnotRecord {
                name: k1.name.clone(),
                pd: k1.diagram.to_pd_string(),
            },
        ],
        arf,
        order: opts.order,
        switches,
        moves: t.script().to_vec(),
        tower_summary: t.summary(),
        grope,
    })))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    Version {
        found: u32,
    },
    KnotParse {
        index: usize,
        error: String,
    },
    NotAKnot {
        index: usize,
        components: usize,
    },
    ArfMismatch {
        index: usize,
        stored: u8,
        conway: u8,
        unknotting: u8,
    },
    ArfUnequal,
    SwitchMismatch {
        index: usize,
    },
    Replay {
        step: usize,
        error: String,
    },
    Checkpoint {
        step: usize,
        error: String,
    },
    Tower {
        violation: Violation,
    },
    NotSimple,
    DeclaredOrder {
        stored: u32,
        replayed: u32,
    },
    SummaryMismatch {
        field: String,
    },
    Grope {
        detail: String,
    },
}

impl Issue {
    pub fn kind(&self) -> &'static str {
        match self {
            Issue::Version { .. } => "version",
            Issue::KnotParse { .. } => "knot_parse",
            Issue::NotAKnot { .. } => "not_a_knot",
            Issue::ArfMismatch { .. } => "arf_mismatch",
            Issue::ArfUnequal => "arf_unequal",
            Issue::SwitchMismatch { .. } => "switch_mismatch",
            Issue::Replay { .. } => "replay",
            Issue::Checkpoint { .. } => "checkpoint",
            Issue::Tower { .. } => "tower",
            Issue::NotSimple => "not_simple",
            Issue::DeclaredOrder { .. } => "declared_order",
            Issue::SummaryMismatch { .. } => "summary_mismatch",
            Issue::Grope { .. } => "grope",
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::Version { found } => write!(f, "unsupported certificate version {found}"),
            Issue::KnotParse { index, error } => write!(f, "knot {index}: {error}"),
            Issue::NotAKnot { index, components } => {
                write!(f, "knot {index} has {components} components")
            }
            Issue::ArfMismatch {
                index,
                stored,
                conway,
                unknotting,
            } => write!(
                f,
                "knot {index}: stored Arf {stored}, skein gives {conway}, unknotting gives {unknotting}"
            ),
            Issue::ArfUnequal => f.write_str("Arf values differ"),
            Issue::SwitchMismatch { index } => {
                write!(f, "knot {index}: stored switch sequence differs from recomputed")
            }
            Issue::Replay { step, error } => write!(f, "move {step}: {error}"),
            Issue::Checkpoint { step, error } => write!(f, "move {step}: {error}"),
            Issue::Tower { violation } => write!(f, "tower: {violation}"),
            Issue::NotSimple => f.write_str("final tower is not simple"),
            Issue::DeclaredOrder { stored, replayed } => write!(
                f,
                "certificate declares order {stored}, replay reaches order {replayed}"
            ),
            Issue::SummaryMismatch { field } => write!(f, "tower summary differs in {field}"),
            Issue::Grope { detail } => write!(f, "grope: {detail}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub order: u32,
    pub moves: usize,
    pub issues: Vec<Issue>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Rechecks a certificate from its knots alone. Checkpoint failures are
/// reported and replay continues, so that the final tower check can name
/// what went wrong.
pub fn verify_certificate(c: &Certificate) -> CertificateReport {
    let mut issues = Vec::new();
    let report = |issues| CertificateReport {
        order: c.order,
        moves: c.moves.len(),
        issues,
    };
    if c.version != CERTIFICATE_VERSION {
        issues.push(Issue::Version { found: c.version });
    }

    let mut diagrams = Vec::new();
    for (index, k) in c.knots.iter().enumerate() {
        match parse(&k.pd) {
            Ok(d) if d.component_count() == 1 => diagrams.push(d),
            Ok(d) => issues.push(Issue::NotAKnot {
                index,
                components: d.component_count(),
            }),
            Err(e) => issues.push(Issue::KnotParse {
                index,
                error: e.to_string(),
            }),
        }
    }
    if diagrams.len() != 2 {
        return report(issues);
    }

    for (index, d) in diagrams.iter().enumerate() {
        let conway = arf_from_conway(d).map(|a| a.value);
        let unknotting = arf_from_unknotting_at(d, c.switches[index].basepoint).map(|a| a.value);
        match (conway, unknotting) {
            (Ok(a), Ok(b)) if a == c.arf[index].value && b == a => {}
            (Ok(a), Ok(b)) => issues.push(Issue::ArfMismatch {
                index,
                stored: c.arf[index].value,
                conway: a,
                unknotting: b,
            }),
            (Err(e), _) | (_, Err(e)) => issues.push(Issue::KnotParse {
                index,
                error: e.to_string(),
            }),
        }
        match d.descending_switches(c.switches[index].basepoint) {
            Ok(s) if s == c.switches[index] => {}
            _ => issues.push(Issue::SwitchMismatch { index }),
        }
    }
    if c.arf[0].value != c.arf[1].value {
        issues.push(Issue::ArfUnequal);
    }

    let mut t = match initial_tower(&c.switches) {
        Ok(t) => t,
        Err(e) => {
            issues.push(Issue::Replay {
                step: 0,
                error: e.to_string(),
            });
            return report(issues);
        }
    };
    for (step, rec) in c.moves.iter().enumerate() {
        match t.apply_mut(&rec.mv) {
            Ok(ids) if ids == rec.created_ids => {}
            Ok(ids) => {
                issues.push(Issue::Replay {
                    step,
                    error: format!("created ids {ids:?}, recorded {:?}", rec.created_ids),
                });
                return report(issues);
            }
            Err(e @ TowerError::Checkpoint { .. }) => issues.push(Issue::Checkpoint {
                step,
                error: e.to_string(),
            }),
            Err(e) => {
                issues.push(Issue::Replay {
                    step,
                    error: e.to_string(),
                });
                return report(issues);
            }
        }
    }

    let r = verify_tower(&t, c.order);
    issues.extend(
        r.violations
            .into_iter()
            .map(|violation| Issue::Tower { violation }),
    );
    if !r.simple {
        issues.push(Issue::NotSimple);
    }
    if t.declared_order() != c.order {
        issues.push(Issue::DeclaredOrder {
            stored: c.order,
            replayed: t.declared_order(),
        });
    }
    let s = t.summary();
    if s != c.tower_summary {
        let field = if s.fingerprint != c.tower_summary.fingerprint {
            "fingerprint"
        } else {
            "counts"
        };
        issues.push(Issue::SummaryMismatch {
            field: field.into(),
        });
    }

    if let Some(g) = &c.grope {
        match grope_class(&g.tree) {
            Ok(class) if class != g.class => issues.push(Issue::Grope {
                detail: format!("recorded class {}, tree has class {class}", g.class),
            }),
            Ok(_) => {}
            Err(e) => issues.push(Issue::Grope {
                detail: e.to_string(),
            }),
        }
        if g.class != GropeClass::Finite(c.order + 1) && g.class != GropeClass::UNBOUNDED {
            issues.push(Issue::Grope {
                detail: format!("class {} for a tower of order {}", g.class, c.order),
            });
        }
        match tower_to_grope(&t) {
            Ok(tree) if tree == g.tree => {}
            Ok(_) => issues.push(Issue::Grope {
                detail: "tree differs from the one tubed from the replayed tower".into(),
            }),
            Err(e) => issues.push(Issue::Grope {
                detail: e.to_string(),
            }),
        }
    }
    report(issues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    fn trefoil() -> NamedDiagram {
        NamedDiagram::new("3_1", parse_pd("X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]").unwrap())
    }

    fn figure_eight() -> NamedDiagram {
        NamedDiagram::new("4_1", Diagram::from_braid(3, &[1, -2, 1, -2]).unwrap())
    }

    fn unknot() -> NamedDiagram {
        NamedDiagram::new("0_1", Diagram::unknot())
    }

    fn tower_with_counts(counts: &[usize]) -> (TowerState, Vec<SurfaceId>) {
        let mut t = TowerState::with_sheet(1);
        let mut disks = Vec::new();
        for &k in counts {
            let p = t.add_point(0, 0, Sign::Pos).unwrap();
            let q = t.add_point(0, 0, Sign::Neg).unwrap();
            let w = t.apply_mut(&Move::PairPoints { p, q, fig6: None }).unwrap()[0];
            for _ in 0..k {
                t.add_point(w, 0, Sign::Pos).unwrap();
            }
            disks.push(w);
        }
        (t, disks)
    }

    #[test]
    fn tube_empty() {
        let e = TowerState::with_sheet(1);
        let t = tube_towers(&e, &e).unwrap();
        assert_eq!(t.points().count(), 0);
        assert_eq!(t.boundary_count(), 2);
        assert!(t.order0_connected());
    }

    #[test]
    fn balance_conserves() {
        let (t, d) = tower_with_counts(&[2, 0]);
        let t = balance_move(&t, d[0], d[1]).unwrap();
        assert_eq!(order2_points_on(&t, d[0]).len(), 1);
        assert_eq!(order2_points_on(&t, d[1]).len(), 1);
        let t = balance_move(&t, d[0], d[1]).unwrap();
        assert_eq!(order2_points_on(&t, d[1]).len(), 2);
        assert!(balance_move(&t, d[0], d[1]).is_err());
        assert_eq!(order2_count(&t), 2);
    }

    #[test]
    fn repair_two_like_points() {
        let (t, d) = tower_with_counts(&[2]);
        let u = even_twist_repair(&t, d[0]).unwrap();
        let moves: Vec<_> = u.script().iter().map(|r| &r.mv).collect();
        let boundary = moves
            .iter()
            .filter(|m| matches!(m, Move::BoundaryTwist { .. }))
            .count();
        let interior = moves
            .iter()
            .filter(|m| matches!(m, Move::InteriorTwist { .. }))
            .count();
        assert_eq!((boundary, interior), (2, 1));
        assert_eq!(u.disk(d[0]).unwrap().framing, 0);
        assert_eq!(u.disks().filter(|s| s.order == 2).count(), 2);
        assert_eq!(u.points().filter(|p| p.surfaces == [d[0], d[0]]).count(), 1);
        assert!(verify_tower(&u, 2).passed());

        let (t, d) = tower_with_counts(&[0]);
        assert_eq!(even_twist_repair(&t, d[0]).unwrap(), t);
        let (t, d) = tower_with_counts(&[3]);
        assert!(even_twist_repair(&t, d[0]).is_err());
    }

    #[test]
    fn obstruction_for_unknot_and_trefoil() {
        match certify(&unknot(), &trefoil(), &CertifyOptions::new(3)).unwrap() {
            Outcome::Obstruction(o) => {
                assert_eq!(o.parity, 1);
                assert_eq!(o.to_string(), "obstruction: order-2 parity 1");
            }
            Outcome::Certificate(_) => panic!("expected an obstruction"),
        }
    }

    #[test]
    fn certificate_round_trip() {
        let out = certify(
            &trefoil(),
            &figure_eight(),
            &CertifyOptions::new(4).with_grope(true),
        )
        .unwrap();
        let Outcome::Certificate(c) = out else {
            panic!("expected a certificate")
        };
        let r = verify_certificate(&c);
        assert!(r.passed(), "{:?}", r.issues);
        assert_eq!(c.grope.as_ref().unwrap().class, GropeClass::Finite(5));

        let json = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(*c, back);

        let mut bad = (*c).clone();
        bad.order += 1;
        let r = verify_certificate(&bad);
        assert!(r.issues.iter().any(
            |i| matches!(i, Issue::Tower { violation } if violation.kind() == "unpaired_point")
        ));
    }

    #[test]
    fn unknots_give_empty_certificate() {
        let Outcome::Certificate(c) =
            certify(&unknot(), &unknot(), &CertifyOptions::new(5)).unwrap()
        else {
            panic!("expected a certificate")
        };
        assert_eq!(c.tower_summary.points_by_order.len(), 0);
        assert!(verify_certificate(&c).passed());
        assert!(matches!(
            certify(&unknot(), &unknot(), &CertifyOptions::new(1)),
            Err(ConcordanceError::OrderTooLow(1))
        ));
    }
}
