//! The cake, piecewise-constant valuations and the two Robertson-Webb queries.
//!
//! Everything here is exact. A density is a list of constant pieces over
//! `[0, L]` (normally `L = 1`), and the value of an interval is the integral
//! of the density over it. Cumulative values at every breakpoint are cached
//! so evaluation is a binary search plus one multiplication.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CakeError, Result};
use crate::rational::{fmt_rat, parse_rat, Rat};

/// A closed interval of the cake, or the empty interval.
///
/// Degenerate intervals `[x, x]` are normalized to [`Interval::Empty`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    Empty,
    Closed { left: Rat, right: Rat },
}

impl Interval {
    pub fn new(left: Rat, right: Rat) -> Interval {
        debug_assert!(left <= right, "reversed interval [{left}, {right}]");
        if left >= right {
            Interval::Empty
        } else {
            Interval::Closed { left, right }
        }
    }

    pub fn unit() -> Interval {
        Interval::new(Rat::zero(), num_traits::One::one())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Interval::Empty)
    }

    pub fn left(&self) -> Option<&Rat> {
        match self {
            Interval::Empty => None,
            Interval::Closed { left, .. } => Some(left),
        }
    }

    pub fn right(&self) -> Option<&Rat> {
        match self {
            Interval::Empty => None,
            Interval::Closed { right, .. } => Some(right),
        }
    }

    pub fn bounds(&self) -> Option<(&Rat, &Rat)> {
        match self {
            Interval::Empty => None,
            Interval::Closed { left, right } => Some((left, right)),
        }
    }

    pub fn length(&self) -> Rat {
        match self {
            Interval::Empty => Rat::zero(),
            Interval::Closed { left, right } => right - left,
        }
    }

    /// Interiors are disjoint; touching endpoints are allowed.
    pub fn interior_disjoint(&self, other: &Interval) -> bool {
        match (self.bounds(), other.bounds()) {
            (Some((a, b)), Some((c, d))) => b <= c || d <= a,
            _ => true,
        }
    }

    pub fn contains(&self, other: &Interval) -> bool {
        match (self.bounds(), other.bounds()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some((a, b)), Some((c, d))) => a <= c && d <= b,
        }
    }

    /// Smallest interval containing both (they are expected to be adjacent).
    pub fn hull(&self, other: &Interval) -> Interval {
        match (self.bounds(), other.bounds()) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some((a, b)), Some((c, d))) => {
                let l = if a <= c { a } else { c };
                let r = if b >= d { b } else { d };
                Interval::new(l.clone(), r.clone())
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Empty => write!(f, "∅"),
            Interval::Closed { left, right } => write!(f, "[{left}, {right}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub start: Rat,
    pub end: Rat,
    pub density: Rat,
}

impl Piece {
    pub fn new(start: Rat, end: Rat, density: Rat) -> Piece {
        Piece {
            start,
            end,
            density,
        }
    }
}

/// Piecewise-constant density. Pieces are sorted; zero-length pieces are
/// dropped and abutting pieces of equal density merged on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseDensity {
    pieces: Vec<Piece>,
    /// `cumulative[i]` is the integral from the first piece start to `pieces[i].start`;
    /// the final entry is the total mass.
    cumulative: Vec<Rat>,
}

impl PiecewiseDensity {
    pub fn new(pieces: Vec<Piece>) -> PiecewiseDensity {
        let mut kept: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces.into_iter().filter(|p| p.start != p.end) {
            if let Some(last) = kept.last_mut() {
                if last.end == p.start && last.density == p.density {
                    last.end = p.end;
                    continue;
                }
            }
            kept.push(p);
        }
        let mut cumulative = Vec::with_capacity(kept.len() + 1);
        let mut acc = Rat::zero();
        cumulative.push(acc.clone());
        for p in &kept {
            acc += (&p.end - &p.start) * &p.density;
            cumulative.push(acc.clone());
        }
        PiecewiseDensity {
            pieces: kept,
            cumulative,
        }
    }

    /// Constant density `d` on `[0, length]`.
    pub fn constant(length: Rat, d: Rat) -> PiecewiseDensity {
        PiecewiseDensity::new(vec![Piece::new(Rat::zero(), length, d)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn total(&self) -> &Rat {
        self.cumulative.last().expect("cumulative is never empty")
    }

    /// Points where the density may change, including both ends.
    pub fn breakpoints(&self) -> Vec<Rat> {
        let mut out: Vec<Rat> = Vec::with_capacity(self.pieces.len() + 1);
        for p in &self.pieces {
            if out.last() != Some(&p.start) {
                out.push(p.start.clone());
            }
            out.push(p.end.clone());
        }
        out
    }

    /// Integral of the density over `[first start, x]`.
    pub fn cumulative_at(&self, x: &Rat) -> Rat {
        // index of the last piece whose start is <= x
        let idx = self.pieces.partition_point(|p| &p.start <= x);
        if idx == 0 {
            return Rat::zero();
        }
        let i = idx - 1;
        let p = &self.pieces[i];
        if x >= &p.end {
            self.cumulative[i + 1].clone()
        } else {
            &self.cumulative[i] + (x - &p.start) * &p.density
        }
    }

    pub fn value(&self, left: &Rat, right: &Rat) -> Rat {
        if left >= right {
            return Rat::zero();
        }
        self.cumulative_at(right) - self.cumulative_at(left)
    }

    /// Leftmost `y >= start` with `value(start, y) == target`, or `None` if the
    /// density to the right of `start` carries less than `target`.
    pub fn leftmost_cut(&self, start: &Rat, target: &Rat) -> Option<Rat> {
        if target.is_zero() {
            return Some(start.clone());
        }
        let goal = self.cumulative_at(start) + target;
        if &goal > self.total() {
            return None;
        }
        // first piece whose end-cumulative reaches the goal
        let k = self.cumulative[1..].partition_point(|c| c < &goal);
        let p = &self.pieces[k];
        let from = if start > &p.start { start } else { &p.start };
        let base = self.cumulative_at(from);
        Some(from + (&goal - base) / &p.density)
    }

    /// Rightmost `y <= end` with `value(y, end) == target`.
    pub fn rightmost_cut(&self, end: &Rat, target: &Rat) -> Option<Rat> {
        if target.is_zero() {
            return Some(end.clone());
        }
        let goal = self.cumulative_at(end) - target;
        if goal.is_negative() {
            return None;
        }
        // last piece starting before `end` whose start-cumulative is <= goal
        let upto = self.pieces.partition_point(|p| &p.start < end);
        let k = self.cumulative[..upto].partition_point(|c| c <= &goal);
        debug_assert!(k >= 1);
        let i = k - 1;
        let p = &self.pieces[i];
        Some(&p.start + (&goal - &self.cumulative[i]) / &p.density)
    }

    fn scaled(&self, factor: &Rat) -> PiecewiseDensity {
        PiecewiseDensity::new(
            self.pieces
                .iter()
                .map(|p| Piece::new(&p.start * factor, &p.end * factor, &p.density / factor))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub density: PiecewiseDensity,
}

/// A cake `[0, length]` and one density per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CakeInstance {
    pub agents: Vec<Agent>,
    pub normalized: bool,
    pub length: Rat,
}

/// A broken instance invariant, reported by [`CakeInstance::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    NoPieces { agent: usize },
    BadStart { agent: usize, start: Rat },
    BadEnd { agent: usize, end: Rat },
    Gap { agent: usize, from: Rat, to: Rat },
    Overlap { agent: usize, at: Rat },
    ReversedPiece { agent: usize, start: Rat, end: Rat },
    NegativeDensity { agent: usize, start: Rat },
    Normalization { agent: usize, total: Rat },
    NonPositiveLength { length: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "instance has no agents"),
            Violation::NoPieces { agent } => write!(f, "agent {agent} has no pieces"),
            Violation::BadStart { agent, start } => {
                write!(f, "agent {agent}: first piece starts at {start}, not 0")
            }
            Violation::BadEnd { agent, end } => {
                write!(f, "agent {agent}: last piece ends at {end}, not the cake end")
            }
            Violation::Gap { agent, from, to } => {
                write!(f, "agent {agent}: gap between {from} and {to}")
            }
            Violation::Overlap { agent, at } => write!(f, "agent {agent}: pieces overlap at {at}"),
            Violation::ReversedPiece { agent, start, end } => {
                write!(f, "agent {agent}: piece [{start}, {end}] is reversed")
            }
            Violation::NegativeDensity { agent, start } => {
                write!(f, "agent {agent}: negative density on piece starting at {start}")
            }
            Violation::Normalization { agent, total } => {
                write!(f, "agent {agent}: total value {total}, expected 1")
            }
            Violation::NonPositiveLength { length } => write!(f, "cake length {length} <= 0"),
        }
    }
}

impl CakeInstance {
    pub fn new(agents: Vec<Agent>, normalized: bool) -> CakeInstance {
        CakeInstance {
            agents,
            normalized,
            length: num_traits::One::one(),
        }
    }

    /// Instance on `[0, length]`, e.g. a hardness gadget before rescaling.
    pub fn on_segment(agents: Vec<Agent>, normalized: bool, length: Rat) -> CakeInstance {
        CakeInstance {
            agents,
            normalized,
            length,
        }
    }

    /// Builds and validates.
    pub fn checked(agents: Vec<Agent>, normalized: bool) -> Result<CakeInstance> {
        let inst = CakeInstance::new(agents, normalized);
        let v = inst.validate();
        if v.is_empty() {
            Ok(inst)
        } else {
            Err(CakeError::InvalidInstance(v))
        }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn density(&self, agent: usize) -> Result<&PiecewiseDensity> {
        self.agents
            .get(agent)
            .map(|a| &a.density)
            .ok_or(CakeError::AgentOutOfRange {
                index: agent,
                n: self.n(),
            })
    }

    fn check_point(&self, x: &Rat) -> Result<()> {
        if x.is_negative() || x > &self.length {
            return Err(CakeError::IntervalOutOfRange {
                left: fmt_rat(x),
                right: fmt_rat(x),
            });
        }
        Ok(())
    }

    /// Evaluation query: the agent's value for `interval`.
    pub fn eval_query(&self, agent: usize, interval: &Interval) -> Result<Rat> {
        let d = self.density(agent)?;
        match interval.bounds() {
            None => Ok(Rat::zero()),
            Some((l, r)) => {
                if l.is_negative() || r > &self.length {
                    return Err(CakeError::IntervalOutOfRange {
                        left: fmt_rat(l),
                        right: fmt_rat(r),
                    });
                }
                Ok(d.value(l, r))
            }
        }
    }

    /// Value of `[left, right]` without range checks; callers guarantee validity.
    pub fn value(&self, agent: usize, left: &Rat, right: &Rat) -> Rat {
        self.agents[agent].density.value(left, right)
    }

    pub fn value_of(&self, agent: usize, interval: &Interval) -> Rat {
        match interval.bounds() {
            None => Rat::zero(),
            Some((l, r)) => self.value(agent, l, r),
        }
    }

    /// Cut query: leftmost `y >= start` with `v_agent([start, y]) = target`.
    pub fn cut_query(&self, agent: usize, start: &Rat, target: &Rat) -> Result<Rat> {
        let d = self.density(agent)?;
        self.check_point(start)?;
        if target.is_negative() {
            return Err(CakeError::InvalidParameter(format!(
                "negative cut target {target}"
            )));
        }
        d.leftmost_cut(start, target)
            .ok_or_else(|| CakeError::InsufficientValue {
                agent,
                from: fmt_rat(start),
                available: fmt_rat(&d.value(start, &self.length)),
                target: fmt_rat(target),
            })
    }

    /// Mirror of [`cut_query`](Self::cut_query): rightmost `y <= end` with
    /// `v_agent([y, end]) = target`.
    pub fn rightmost_cut_query(&self, agent: usize, end: &Rat, target: &Rat) -> Result<Rat> {
        let d = self.density(agent)?;
        self.check_point(end)?;
        if target.is_negative() {
            return Err(CakeError::InvalidParameter(format!(
                "negative cut target {target}"
            )));
        }
        d.rightmost_cut(end, target)
            .ok_or_else(|| CakeError::InsufficientValue {
                agent,
                from: fmt_rat(end),
                available: fmt_rat(&d.value(&Rat::zero(), end)),
                target: fmt_rat(target),
            })
    }

    /// Every broken invariant; empty iff the instance is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.length.is_positive() {
            out.push(Violation::NonPositiveLength {
                length: self.length.clone(),
            });
        }
        if self.agents.is_empty() {
            out.push(Violation::NoAgents);
        }
        for (a, agent) in self.agents.iter().enumerate() {
            validate_pieces(a, agent.density.pieces(), &self.length, &mut out);
            if self.normalized && !num_traits::One::is_one(agent.density.total()) {
                out.push(Violation::Normalization {
                    agent: a,
                    total: agent.density.total().clone(),
                });
            }
        }
        out
    }

    /// Affine reparameterization of `[0, L]` onto `[0, 1]`.
    pub fn rescale_to_unit(&self) -> Result<CakeInstance> {
        if !self.length.is_positive() {
            return Err(CakeError::InvalidParameter(format!(
                "cake length {} must be positive",
                self.length
            )));
        }
        let factor = Rat::from_integer(1.into()) / &self.length;
        let agents = self
            .agents
            .iter()
            .map(|a| Agent {
                name: a.name.clone(),
                density: a.density.scaled(&factor),
            })
            .collect();
        Ok(CakeInstance::new(agents, self.normalized))
    }

    /// All breakpoints of all agents, sorted and deduplicated.
    pub fn all_breakpoints(&self) -> Vec<Rat> {
        let mut pts: Vec<Rat> = self
            .agents
            .iter()
            .flat_map(|a| a.density.breakpoints())
            .collect();
        pts.push(Rat::zero());
        pts.push(self.length.clone());
        pts.sort();
        pts.dedup();
        pts
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }
}

fn validate_pieces(agent: usize, pieces: &[Piece], length: &Rat, out: &mut Vec<Violation>) {
    let Some(first) = pieces.first() else {
        out.push(Violation::NoPieces { agent });
        return;
    };
    if !first.start.is_zero() {
        out.push(Violation::BadStart {
            agent,
            start: first.start.clone(),
        });
    }
    for p in pieces {
        if p.start > p.end {
            out.push(Violation::ReversedPiece {
                agent,
                start: p.start.clone(),
                end: p.end.clone(),
            });
        }
        if p.density.is_negative() {
            out.push(Violation::NegativeDensity {
                agent,
                start: p.start.clone(),
            });
        }
    }
    for w in pieces.windows(2) {
        if w[0].end < w[1].start {
            out.push(Violation::Gap {
                agent,
                from: w[0].end.clone(),
                to: w[1].start.clone(),
            });
        } else if w[0].end > w[1].start {
            out.push(Violation::Overlap {
                agent,
                at: w[1].start.clone(),
            });
        }
    }
    let last = pieces.last().expect("non-empty");
    if &last.end != length {
        out.push(Violation::BadEnd {
            agent,
            end: last.end.clone(),
        });
    }
}

// ---------------------------------------------------------------------------
// JSON instance files

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    normalized: bool,
    agents: Vec<AgentFile>,
}

#[derive(Serialize, Deserialize)]
struct AgentFile {
    name: String,
    pieces: Vec<PieceFile>,
}

#[derive(Serialize, Deserialize)]
struct PieceFile {
    start: String,
    end: String,
    density: String,
}

impl CakeInstance {
    /// Parses and validates an instance file.
    pub fn from_json_str(s: &str) -> Result<CakeInstance> {
        let file: InstanceFile = serde_json::from_str(s)?;
        let mut agents = Vec::with_capacity(file.agents.len());
        for a in file.agents {
            let mut pieces = Vec::with_capacity(a.pieces.len());
            for p in a.pieces {
                pieces.push(Piece::new(
                    parse_rat(&p.start)?,
                    parse_rat(&p.end)?,
                    parse_rat(&p.density)?,
                ));
            }
            agents.push(Agent {
                name: a.name,
                density: PiecewiseDensity::new(pieces),
            });
        }
        CakeInstance::checked(agents, file.normalized)
    }

    pub fn to_json_string(&self) -> String {
        let file = InstanceFile {
            normalized: self.normalized,
            agents: self
                .agents
                .iter()
                .map(|a| AgentFile {
                    name: a.name.clone(),
                    pieces: a
                        .density
                        .pieces()
                        .iter()
                        .map(|p| PieceFile {
                            start: fmt_rat(&p.start),
                            end: fmt_rat(&p.end),
                            density: fmt_rat(&p.density),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

/// Agent with density `d` on `[from, to]` and zero elsewhere on the unit cake.
pub fn step_density(from: Rat, to: Rat, d: Rat) -> PiecewiseDensity {
    let zero = Rat::zero();
    let one: Rat = num_traits::One::one();
    PiecewiseDensity::new(vec![
        Piece::new(zero.clone(), from.clone(), zero.clone()),
        Piece::new(from, to.clone(), d),
        Piece::new(to, one, zero),
    ])
}

pub fn uniform_agent(name: &str) -> Agent {
    Agent {
        name: name.to_string(),
        density: PiecewiseDensity::constant(num_traits::One::one(), num_traits::One::one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn half_left() -> Agent {
        Agent {
            name: "L".into(),
            density: step_density(int(0), rat(1, 2), int(2)),
        }
    }

    fn half_right() -> Agent {
        Agent {
            name: "R".into(),
            density: step_density(rat(1, 2), int(1), int(2)),
        }
    }

    fn inst(agents: Vec<Agent>) -> CakeInstance {
        CakeInstance::checked(agents, true).unwrap()
    }

    #[test]
    fn eval_examples() {
        let c = inst(vec![half_left(), uniform_agent("u")]);
        let q = Interval::new(int(0), rat(1, 4));
        assert_eq!(c.eval_query(0, &q).unwrap(), rat(1, 2));
        assert_eq!(c.eval_query(1, &Interval::unit()).unwrap(), int(1));
        assert_eq!(c.eval_query(0, &Interval::Empty).unwrap(), int(0));
    }

    #[test]
    fn eval_errors() {
        let c = inst(vec![uniform_agent("u")]);
        assert!(matches!(
            c.eval_query(3, &Interval::unit()),
            Err(CakeError::AgentOutOfRange { index: 3, n: 1 })
        ));
        let outside = Interval::new(rat(1, 2), rat(3, 2));
        assert!(matches!(
            c.eval_query(0, &outside),
            Err(CakeError::IntervalOutOfRange { .. })
        ));
    }

    #[test]
    fn cut_examples() {
        let c = inst(vec![uniform_agent("u"), half_right(), half_left()]);
        assert_eq!(c.cut_query(0, &int(0), &rat(1, 2)).unwrap(), rat(1, 2));
        assert_eq!(c.cut_query(1, &rat(1, 3), &int(0)).unwrap(), rat(1, 3));
        assert_eq!(
            c.cut_query(1, &rat(11, 24), &rat(1, 12)).unwrap(),
            rat(13, 24)
        );
        assert!(matches!(
            c.cut_query(2, &rat(1, 4), &int(1)),
            Err(CakeError::InsufficientValue { .. })
        ));
    }

    #[test]
    fn rightmost_cut_examples() {
        let c = inst(vec![uniform_agent("u"), half_left()]);
        assert_eq!(
            c.rightmost_cut_query(0, &int(1), &rat(1, 2)).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            c.rightmost_cut_query(0, &rat(2, 3), &int(0)).unwrap(),
            rat(2, 3)
        );
        assert_eq!(
            c.rightmost_cut_query(1, &rat(1, 2), &rat(1, 4)).unwrap(),
            rat(3, 8)
        );
        // mass to the left of 1 for the left-half agent sits entirely in [0, 1/2]
        assert_eq!(
            c.rightmost_cut_query(1, &int(1), &rat(1, 4)).unwrap(),
            rat(3, 8)
        );
        assert!(c.rightmost_cut_query(1, &rat(1, 4), &int(1)).is_err());
    }

    #[test]
    fn cut_skips_zero_density_stretch() {
        let c = inst(vec![half_right()]);
        // leftmost: the cut lands exactly where mass starts accruing
        assert_eq!(c.cut_query(0, &int(0), &rat(1, 12)).unwrap(), rat(13, 24));
        assert_eq!(c.cut_query(0, &int(0), &int(1)).unwrap(), int(1));
        let c = inst(vec![half_left()]);
        assert_eq!(c.cut_query(0, &int(0), &int(1)).unwrap(), rat(1, 2));
        // rightmost: stays at the end of the mass-carrying piece
        assert_eq!(
            c.rightmost_cut_query(0, &int(1), &int(1)).unwrap(),
            int(0)
        );
    }

    #[test]
    fn validate_examples() {
        let ok = CakeInstance::new(vec![uniform_agent("a"), uniform_agent("b")], true);
        assert!(ok.validate().is_empty());

        let gap = CakeInstance::new(
            vec![Agent {
                name: "g".into(),
                density: PiecewiseDensity::new(vec![Piece::new(int(0), rat(3, 4), rat(4, 3))]),
            }],
            true,
        );
        assert_eq!(
            gap.validate(),
            vec![Violation::BadEnd {
                agent: 0,
                end: rat(3, 4)
            }]
        );

        let heavy = CakeInstance::new(
            vec![Agent {
                name: "h".into(),
                density: PiecewiseDensity::constant(int(1), int(2)),
            }],
            true,
        );
        assert_eq!(
            heavy.validate(),
            vec![Violation::Normalization {
                agent: 0,
                total: int(2)
            }]
        );

        let inner_gap = PiecewiseDensity::new(vec![
            Piece::new(int(0), rat(1, 4), int(1)),
            Piece::new(rat(1, 2), int(1), int(1)),
        ]);
        let c = CakeInstance::new(
            vec![Agent {
                name: "x".into(),
                density: inner_gap,
            }],
            false,
        );
        assert_eq!(
            c.validate(),
            vec![Violation::Gap {
                agent: 0,
                from: rat(1, 4),
                to: rat(1, 2)
            }]
        );
    }

    #[test]
    fn canonical_pieces() {
        let d = PiecewiseDensity::new(vec![
            Piece::new(int(0), rat(1, 4), int(1)),
            Piece::new(rat(1, 4), rat(1, 4), int(7)),
            Piece::new(rat(1, 4), int(1), int(1)),
        ]);
        assert_eq!(d.pieces().len(), 1);
        assert_eq!(d.total(), &int(1));
    }

    #[test]
    fn rescale_examples() {
        let two = CakeInstance::on_segment(
            vec![Agent {
                name: "a".into(),
                density: PiecewiseDensity::constant(int(2), rat(1, 2)),
            }],
            true,
            int(2),
        );
        let unit = two.rescale_to_unit().unwrap();
        assert_eq!(unit.agents[0].density.pieces()[0].density, int(1));
        assert!(unit.validate().is_empty());

        let same = CakeInstance::new(vec![half_left()], true);
        assert_eq!(same.rescale_to_unit().unwrap(), same);

        let bad = CakeInstance::on_segment(vec![half_left()], true, int(0));
        assert!(bad.rescale_to_unit().is_err());
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let c = inst(vec![half_left(), half_right()]);
        let s = c.to_json_string();
        assert_eq!(CakeInstance::from_json_str(&s).unwrap(), c);

        let decimal = r#"{"normalized": true, "agents": [{"name": "a", "pieces": [{"start": "0", "end": "1", "density": "1.0"}]}]}"#;
        assert!(matches!(
            CakeInstance::from_json_str(decimal),
            Err(CakeError::Parse(_))
        ));
        let gap = r#"{"normalized": false, "agents": [{"name": "a", "pieces": [{"start": "0", "end": "1/2", "density": "1"}]}]}"#;
        assert!(matches!(
            CakeInstance::from_json_str(gap),
            Err(CakeError::InvalidInstance(_))
        ));
    }
}
