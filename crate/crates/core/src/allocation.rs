//! Partial and complete allocations, unassigned gaps, and welfare measures.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::compare::{pow_rat, root, Enclosure, DEFAULT_BITS};
use crate::error::{CakeError, Result};
use crate::model::{CakeInstance, Interval};
use crate::rational::{fmt_rat, from_usize, parse_rat, Rat};

/// Agent-indexed, pairwise interior-disjoint intervals inside the cake.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialAllocation {
    pub assigned: Vec<Interval>,
}

/// A partial allocation whose union is the whole cake.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub assigned: Vec<Interval>,
}

/// Maximal uncovered intervals of a partial allocation, left to right.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UnassignedSet {
    pub gaps: Vec<Interval>,
}

impl UnassignedSet {
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }
}

fn check_disjoint(assigned: &[Interval], length: &Rat) -> Result<()> {
    for (a, iv) in assigned.iter().enumerate() {
        if let Some((l, r)) = iv.bounds() {
            if l.is_negative() || r > length {
                return Err(CakeError::InvalidAllocation(format!(
                    "agent {a}'s interval {iv} leaves the cake"
                )));
            }
        }
    }
    let sorted = sorted_pieces(assigned);
    for w in sorted.windows(2) {
        let (a, ia) = w[0];
        let (b, ib) = w[1];
        if !ia.interior_disjoint(ib) {
            return Err(CakeError::InvalidAllocation(format!(
                "intervals of agents {a} ({ia}) and {b} ({ib}) overlap"
            )));
        }
    }
    Ok(())
}

/// Non-empty intervals with their agent index, sorted by left endpoint.
pub fn sorted_pieces(assigned: &[Interval]) -> Vec<(usize, &Interval)> {
    let mut v: Vec<(usize, &Interval)> = assigned
        .iter()
        .enumerate()
        .filter(|(_, iv)| !iv.is_empty())
        .collect();
    v.sort_by(|x, y| x.1.left().cmp(&y.1.left()));
    v
}

impl PartialAllocation {
    pub fn empty(n: usize) -> PartialAllocation {
        PartialAllocation {
            assigned: vec![Interval::Empty; n],
        }
    }

    /// Validates disjointness and containment in `[0, length]`.
    pub fn new(assigned: Vec<Interval>, length: &Rat) -> Result<PartialAllocation> {
        check_disjoint(&assigned, length)?;
        Ok(PartialAllocation { assigned })
    }

    pub fn n(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_valid(&self, length: &Rat) -> bool {
        check_disjoint(&self.assigned, length).is_ok()
    }
}

impl Allocation {
    /// Validates disjointness and exact coverage of `[0, length]`.
    pub fn new(assigned: Vec<Interval>, length: &Rat) -> Result<Allocation> {
        check_disjoint(&assigned, length)?;
        let sorted = sorted_pieces(&assigned);
        let mut cursor = Rat::zero();
        for (a, iv) in sorted {
            let (l, r) = iv.bounds().expect("non-empty");
            if l != &cursor {
                return Err(CakeError::InvalidAllocation(format!(
                    "cake not covered between {cursor} and {l} (before agent {a})"
                )));
            }
            cursor = r.clone();
        }
        if &cursor != length {
            return Err(CakeError::InvalidAllocation(format!(
                "cake not covered between {cursor} and {length}"
            )));
        }
        Ok(Allocation { assigned })
    }

    pub fn n(&self) -> usize {
        self.assigned.len()
    }

    pub fn as_partial(&self) -> PartialAllocation {
        PartialAllocation {
            assigned: self.assigned.clone(),
        }
    }
}

/// Maximal gaps of `[0, length]` not covered by `assigned`.
pub fn gaps_of(assigned: &[Interval], length: &Rat) -> UnassignedSet {
    let mut gaps = Vec::new();
    let mut cursor = Rat::zero();
    for (_, iv) in sorted_pieces(assigned) {
        let (l, r) = iv.bounds().expect("non-empty");
        if l > &cursor {
            gaps.push(Interval::new(cursor.clone(), l.clone()));
        }
        if r > &cursor {
            cursor = r.clone();
        }
    }
    if &cursor < length {
        gaps.push(Interval::new(cursor, length.clone()));
    }
    UnassignedSet { gaps }
}

pub fn unassigned_gaps(partial: &PartialAllocation) -> UnassignedSet {
    gaps_of(&partial.assigned, &Rat::one())
}

/// Extends a partial allocation to a full one: each gap joins the assigned
/// interval on its left, or on its right when nothing is assigned to its left.
pub fn complete_allocation(instance: &CakeInstance, partial: &PartialAllocation) -> Result<Allocation> {
    let n = partial.n();
    if n == 0 {
        return Err(CakeError::InvalidParameter(
            "cannot complete an allocation with no agents".into(),
        ));
    }
    let length = &instance.length;
    let mut assigned = partial.assigned.clone();
    let sorted: Vec<(usize, Interval)> = sorted_pieces(&partial.assigned)
        .into_iter()
        .map(|(a, iv)| (a, iv.clone()))
        .collect();
    if sorted.is_empty() {
        assigned[0] = Interval::new(Rat::zero(), length.clone());
        return Allocation::new(assigned, length);
    }
    for gap in gaps_of(&partial.assigned, length).gaps {
        let (gl, gr) = gap.bounds().expect("gaps are non-empty");
        let owner = sorted
            .iter()
            .find(|(_, iv)| iv.right() == Some(gl))
            .or_else(|| sorted.iter().find(|(_, iv)| iv.left() == Some(gr)))
            .map(|(a, _)| *a)
            .ok_or_else(|| CakeError::Internal(format!("gap {gap} has no assigned neighbor")))?;
        assigned[owner] = assigned[owner].hull(&gap);
    }
    Allocation::new(assigned, length)
}

// ---------------------------------------------------------------------------
// welfare

/// The smallest `α >= 1` with `v_a(I_a) >= v_a(I_b) / α` for all `a, b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvyRatio {
    Finite(Rat),
    Infinite,
}

impl EnvyRatio {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            EnvyRatio::Finite(r) => Some(r),
            EnvyRatio::Infinite => None,
        }
    }

    /// `self <= bound`, with an infinite ratio never satisfying a bound.
    pub fn at_most(&self, bound: &Rat) -> bool {
        matches!(self, EnvyRatio::Finite(r) if r <= bound)
    }
}

impl fmt::Display for EnvyRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvyRatio::Finite(r) => write!(f, "{r}"),
            EnvyRatio::Infinite => write!(f, "inf"),
        }
    }
}

pub fn agent_values(instance: &CakeInstance, assigned: &[Interval]) -> Vec<Rat> {
    assigned
        .iter()
        .enumerate()
        .map(|(a, iv)| instance.value_of(a, iv))
        .collect()
}

/// Envy ratio of any agent-indexed interval family (partial or complete).
pub fn envy_ratio_of(instance: &CakeInstance, assigned: &[Interval]) -> EnvyRatio {
    let mut worst = Rat::one();
    for a in 0..assigned.len() {
        let own = instance.value_of(a, &assigned[a]);
        for (b, other) in assigned.iter().enumerate() {
            if a == b {
                continue;
            }
            let theirs = instance.value_of(a, other);
            if own.is_zero() {
                if theirs.is_positive() {
                    return EnvyRatio::Infinite;
                }
                continue;
            }
            let ratio = theirs / &own;
            if ratio > worst {
                worst = ratio;
            }
        }
    }
    EnvyRatio::Finite(worst)
}

pub fn envy_ratio(instance: &CakeInstance, alloc: &Allocation) -> EnvyRatio {
    envy_ratio_of(instance, &alloc.assigned)
}

/// Geometric mean of the agents' values; the exact product is the primary form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NswFigure {
    /// `∏ v_a`, i.e. `NSW^n`.
    pub product: Rat,
    pub n: usize,
    /// Certified enclosure of `product^(1/n)`.
    pub value: Enclosure,
}

impl NswFigure {
    pub fn from_values(values: &[Rat]) -> NswFigure {
        let product = values.iter().fold(Rat::one(), |acc, v| acc * v);
        let n = values.len();
        let value = root(&product, n as u32, DEFAULT_BITS);
        NswFigure { product, n, value }
    }

    pub fn exact_form(&self) -> String {
        if self.n == 1 {
            return fmt_rat(&self.product);
        }
        format!("({})^(1/{})", fmt_rat(&self.product), self.n)
    }
}

pub fn nsw(instance: &CakeInstance, alloc: &Allocation) -> NswFigure {
    NswFigure::from_values(&agent_values(instance, &alloc.assigned))
}

/// Arithmetic mean of the agents' values.
pub fn sw_of_values(values: &[Rat]) -> Rat {
    let sum: Rat = values.iter().fold(Rat::zero(), |acc, v| acc + v);
    sum / from_usize(values.len())
}

pub fn sw(instance: &CakeInstance, alloc: &Allocation) -> Rat {
    sw_of_values(&agent_values(instance, &alloc.assigned))
}

/// Generalized mean `M_ρ = ((1/n) Σ v^ρ)^(1/ρ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoMeanFigure {
    pub rho: Rat,
    /// Enclosure of `(1/n) Σ v_a^ρ`, i.e. `M_ρ^ρ`.
    pub mean_of_powers: Enclosure,
    /// Enclosure of `M_ρ` itself.
    pub value: Enclosure,
    pub values: Vec<Rat>,
}

impl RhoMeanFigure {
    pub fn from_values(values: &[Rat], rho: &Rat) -> Result<RhoMeanFigure> {
        check_rho(rho)?;
        let bits = DEFAULT_BITS;
        let mut sum = Enclosure::exact(Rat::zero());
        for v in values {
            sum = sum.add(&pow_rat(v, rho, bits));
        }
        let mean_of_powers = sum.scale(&(Rat::one() / from_usize(values.len())));
        let value = mean_of_powers.powr(&rho.recip(), bits);
        Ok(RhoMeanFigure {
            rho: rho.clone(),
            mean_of_powers,
            value,
            values: values.to_vec(),
        })
    }

    /// `Σ v_a^ρ` as an enclosure.
    pub fn power_sum(&self) -> Enclosure {
        self.mean_of_powers.scale(&from_usize(self.values.len()))
    }

    pub fn exact_form(&self) -> String {
        if let Some(v) = self.value.exact_value() {
            return fmt_rat(v);
        }
        let terms: Vec<String> = self
            .values
            .iter()
            .map(|v| format!("({})^({})", fmt_rat(v), fmt_rat(&self.rho)))
            .collect();
        format!(
            "(({})/{})^({})",
            terms.join(" + "),
            self.values.len(),
            fmt_rat(&self.rho.recip())
        )
    }
}

pub fn check_rho(rho: &Rat) -> Result<()> {
    if !rho.is_positive() || rho > &Rat::one() {
        return Err(CakeError::InvalidParameter(format!(
            "rho = {rho} outside (0, 1]"
        )));
    }
    Ok(())
}

pub fn rho_mean(instance: &CakeInstance, alloc: &Allocation, rho: &Rat) -> Result<RhoMeanFigure> {
    RhoMeanFigure::from_values(&agent_values(instance, &alloc.assigned), rho)
}

/// Every welfare and fairness figure of one allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WelfareReport {
    pub values: Vec<Rat>,
    pub envy_ratio: EnvyRatio,
    pub nsw: NswFigure,
    pub sw: Rat,
    pub rho_means: Vec<RhoMeanFigure>,
}

impl WelfareReport {
    pub fn compute(instance: &CakeInstance, assigned: &[Interval], rhos: &[Rat]) -> Result<WelfareReport> {
        let values = agent_values(instance, assigned);
        let rho_means = rhos
            .iter()
            .map(|r| RhoMeanFigure::from_values(&values, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(WelfareReport {
            envy_ratio: envy_ratio_of(instance, assigned),
            nsw: NswFigure::from_values(&values),
            sw: sw_of_values(&values),
            rho_means,
            values,
        })
    }

    pub fn to_json(&self, instance: &CakeInstance) -> ReportFile {
        ReportFile {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(a, v)| NamedValue {
                    agent: instance.agents[a].name.clone(),
                    exact: fmt_rat(v),
                    decimal: crate::compare::render_decimal(v, 12),
                })
                .collect(),
            envy_ratio: Figure {
                exact: self.envy_ratio.to_string(),
                decimal: match &self.envy_ratio {
                    EnvyRatio::Finite(r) => crate::compare::render_decimal(r, 12),
                    EnvyRatio::Infinite => "inf".into(),
                },
            },
            nsw: Figure {
                exact: self.nsw.exact_form(),
                decimal: self.nsw.value.decimal(12),
            },
            sw: Figure {
                exact: fmt_rat(&self.sw),
                decimal: crate::compare::render_decimal(&self.sw, 12),
            },
            rho_means: self
                .rho_means
                .iter()
                .map(|m| RhoFigure {
                    rho: fmt_rat(&m.rho),
                    exact: m.exact_form(),
                    decimal: m.value.decimal(12),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Figure {
    pub exact: String,
    pub decimal: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NamedValue {
    pub agent: String,
    pub exact: String,
    pub decimal: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RhoFigure {
    pub rho: String,
    pub exact: String,
    pub decimal: String,
}

/// Serialized [`WelfareReport`]: exact strings next to 12-digit decimals.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReportFile {
    pub values: Vec<NamedValue>,
    pub envy_ratio: Figure,
    pub nsw: Figure,
    pub sw: Figure,
    pub rho_means: Vec<RhoFigure>,
}

// ---------------------------------------------------------------------------
// allocation files

#[derive(Serialize, Deserialize)]
struct AllocationFile {
    pieces: Vec<PieceEntry>,
}

#[derive(Serialize, Deserialize)]
struct PieceEntry {
    agent: String,
    left: String,
    right: String,
}

/// Agent-indexed intervals read from an allocation file; agents absent from
/// the file hold the empty interval. Not validated.
pub fn intervals_from_json(instance: &CakeInstance, s: &str) -> Result<Vec<Interval>> {
    let file: AllocationFile = serde_json::from_str(s)?;
    let mut out = vec![Interval::Empty; instance.n()];
    for p in file.pieces {
        let a = instance
            .agent_index(&p.agent)
            .ok_or_else(|| CakeError::Parse(format!("unknown agent {:?}", p.agent)))?;
        if !out[a].is_empty() {
            return Err(CakeError::Parse(format!("agent {:?} listed twice", p.agent)));
        }
        let l = parse_rat(&p.left)?;
        let r = parse_rat(&p.right)?;
        if l > r {
            return Err(CakeError::InvalidAllocation(format!(
                "reversed interval [{l}, {r}] for agent {:?}",
                p.agent
            )));
        }
        out[a] = Interval::new(l, r);
    }
    Ok(out)
}

pub fn allocation_from_json(instance: &CakeInstance, s: &str) -> Result<Allocation> {
    Allocation::new(intervals_from_json(instance, s)?, &instance.length)
}

/// Serializes agent-indexed intervals, left to right; empty intervals are omitted.
pub fn intervals_to_json(instance: &CakeInstance, assigned: &[Interval]) -> String {
    let pieces = sorted_pieces(assigned)
        .into_iter()
        .map(|(a, iv)| {
            let (l, r) = iv.bounds().expect("non-empty");
            PieceEntry {
                agent: instance.agents[a].name.clone(),
                left: fmt_rat(l),
                right: fmt_rat(r),
            }
        })
        .collect();
    serde_json::to_string_pretty(&AllocationFile { pieces }).expect("allocation serializes")
}
