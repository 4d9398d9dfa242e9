//! Cake instances built from 3-SAT-5 formulas.
//!
//! Variable `x_i` owns the block `H_i = [14(i−1), 14i]`, split into unit cells
//! `e^i_1 … e^i_14`. Separators pin `e^i_7` and `e^i_14`, the base agent `z_i`
//! values the ends of both halves, and each clause agent values one cell per
//! literal (left half for positive occurrences, right half for negative ones).
//! An auxiliary block `G` at the end tops clause agents up to a total of 1.
//! A satisfying assignment yields an allocation of Nash welfare at least
//! `(2^(−r)·3^(−m))^(1/(3r+m+1))`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::{complete_allocation, Allocation, PartialAllocation};
use crate::compare::{pow_rat, Enclosure, DEFAULT_BITS};
use crate::error::{CakeError, Result};
use crate::model::{Agent, CakeInstance, Interval, Piece, PiecewiseDensity};
use crate::rational::{fmt_rat, from_usize, int, pow, rat, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    /// Zero-based variable index.
    pub var: usize,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

/// Per-literal cell: `(variable, k)` with `k` in `1..=14`.
type Cell = (usize, usize);

impl CnfFormula {
    /// Every broken 3-SAT-5 restriction, as readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.num_vars == 0 {
            out.push("formula has no variables".into());
        }
        if self.clauses.is_empty() {
            out.push("formula has no clauses".into());
        }
        let mut pos = vec![0usize; self.num_vars];
        let mut neg = vec![0usize; self.num_vars];
        for (j, c) in self.clauses.iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                out.push(format!("clause {} has {} literals (allowed 1 to 3)", j + 1, c.len()));
            }
            for (x, lit) in c.iter().enumerate() {
                if lit.var >= self.num_vars {
                    out.push(format!("clause {} uses unknown variable {}", j + 1, lit.var + 1));
                    continue;
                }
                if c[..x].iter().any(|l| l.var == lit.var) {
                    out.push(format!("clause {} mentions variable {} twice", j + 1, lit.var + 1));
                }
                if lit.positive {
                    pos[lit.var] += 1;
                } else {
                    neg[lit.var] += 1;
                }
            }
        }
        for i in 0..self.num_vars {
            if pos[i] + neg[i] > 5 {
                out.push(format!("variable {} occurs {} times (at most 5)", i + 1, pos[i] + neg[i]));
            }
            if pos[i] == 0 {
                out.push(format!("variable {} never occurs positively", i + 1));
            }
            if neg[i] == 0 {
                out.push(format!("variable {} never occurs negatively", i + 1));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CakeError::InvalidFormula(v))
        }
    }

    pub fn satisfied_by(&self, f: &[bool]) -> bool {
        f.len() == self.num_vars
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|l| f[l.var] == l.positive))
    }

    /// Preprocessor, not part of the reduction: gives every variable that
    /// lacks a polarity one occurrence of it, in a clause `(±x ∨ y)` with a
    /// fresh `y`, plus `(¬y ∨ w)` and `(¬w ∨ y)` so `y` and `w` also occur both
    /// ways. Setting every fresh variable to true keeps satisfiability.
    pub fn pad_polarities(&self) -> CnfFormula {
        let mut out = self.clone();
        let mut pos = vec![false; self.num_vars];
        let mut neg = vec![false; self.num_vars];
        for lit in self.clauses.iter().flatten() {
            if lit.var < self.num_vars {
                if lit.positive {
                    pos[lit.var] = true;
                } else {
                    neg[lit.var] = true;
                }
            }
        }
        for i in 0..self.num_vars {
            for (has, polarity) in [(pos[i], true), (neg[i], false)] {
                if has {
                    continue;
                }
                let y = out.num_vars;
                let w = y + 1;
                out.num_vars += 2;
                let lit = |var, positive| Literal { var, positive };
                out.clauses.push(vec![lit(i, polarity), lit(y, true)]);
                out.clauses.push(vec![lit(y, false), lit(w, true)]);
                out.clauses.push(vec![lit(w, false), lit(y, true)]);
            }
        }
        out
    }

    /// Reads DIMACS CNF: `c` comment lines, a `p cnf V C` header, and clauses
    /// of signed 1-based literals each terminated by `0`.
    pub fn from_dimacs(s: &str) -> Result<CnfFormula> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut cur: Vec<Literal> = Vec::new();
        for (ln, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(CakeError::Parse(format!("line {}: bad header {line:?}", ln + 1)));
                }
                let v = parts[1].parse().map_err(|_| CakeError::Parse(format!("line {}: bad variable count", ln + 1)))?;
                let c = parts[2].parse().map_err(|_| CakeError::Parse(format!("line {}: bad clause count", ln + 1)))?;
                header = Some((v, c));
                continue;
            }
            let (nv, _) = header.ok_or_else(|| CakeError::Parse("clause before the p cnf header".into()))?;
            for tok in line.split_whitespace() {
                let x: i64 = tok
                    .parse()
                    .map_err(|_| CakeError::Parse(format!("line {}: bad literal {tok:?}", ln + 1)))?;
                if x == 0 {
                    clauses.push(std::mem::take(&mut cur));
                    continue;
                }
                let var = x.unsigned_abs() as usize;
                if var > nv {
                    return Err(CakeError::Parse(format!("line {}: variable {var} exceeds {nv}", ln + 1)));
                }
                cur.push(Literal {
                    var: var - 1,
                    positive: x > 0,
                });
            }
        }
        if !cur.is_empty() {
            clauses.push(cur);
        }
        let (num_vars, count) = header.ok_or_else(|| CakeError::Parse("missing p cnf header".into()))?;
        if count != clauses.len() {
            return Err(CakeError::Parse(format!(
                "header announces {count} clauses, found {}",
                clauses.len()
            )));
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                s.push_str(&format!("{} ", if l.positive { v } else { -v }));
            }
            s.push_str("0\n");
        }
        s
    }

    /// Cell of every literal, in clause order: the `q`-th positive occurrence
    /// of `x_i` sits on `e^i_{1+q}`, the `q`-th negative one on `e^i_{8+q}`.
    fn literal_cells(&self) -> Vec<Vec<Cell>> {
        let mut pos = vec![0usize; self.num_vars];
        let mut neg = vec![0usize; self.num_vars];
        self.clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|l| {
                        if l.positive {
                            pos[l.var] += 1;
                            (l.var, 1 + pos[l.var])
                        } else {
                            neg[l.var] += 1;
                            (l.var, 8 + neg[l.var])
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum Role {
    Separator { var: usize },
    SeparatorEnd { var: usize },
    Base { var: usize },
    Clause { clause: usize },
    Auxiliary,
}

/// Where the cells sit and who is who.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetLayout {
    pub r: usize,
    pub m: usize,
    /// `14r + 1` with the auxiliary block, `14r` without.
    pub raw_length: Rat,
    pub has_aux: bool,
    pub roles: Vec<Role>,
    literal_cells: Vec<Vec<Cell>>,
}

impl GadgetLayout {
    pub fn n(&self) -> usize {
        self.roles.len()
    }

    pub fn separator(&self, i: usize) -> usize {
        3 * i
    }

    pub fn separator_end(&self, i: usize) -> usize {
        3 * i + 1
    }

    pub fn base(&self, i: usize) -> usize {
        3 * i + 2
    }

    pub fn clause(&self, j: usize) -> usize {
        3 * self.r + j
    }

    pub fn auxiliary(&self) -> Option<usize> {
        self.has_aux.then_some(3 * self.r + self.m)
    }

    /// `e^i_k` on the raw segment (`i` zero-based, `k` in `1..=14`).
    pub fn cell_raw(&self, i: usize, k: usize) -> (Rat, Rat) {
        let l = from_usize(14 * i + k - 1);
        (l.clone(), l + Rat::one())
    }

    /// `e^i_k` on the unit cake.
    pub fn cell(&self, i: usize, k: usize) -> Interval {
        let (l, r) = self.cell_raw(i, k);
        Interval::new(l / &self.raw_length, r / &self.raw_length)
    }

    /// Cells `e^i_from … e^i_to` as one unit-cake interval.
    pub fn cells(&self, i: usize, from: usize, to: usize) -> Interval {
        self.cell(i, from).hull(&self.cell(i, to))
    }

    pub fn aux_block(&self) -> Option<Interval> {
        self.has_aux.then(|| {
            let r = from_usize(14 * self.r);
            Interval::new(r / &self.raw_length, Rat::one())
        })
    }

    pub fn literal_cell(&self, clause: usize, lit: usize) -> (usize, usize) {
        self.literal_cells[clause][lit]
    }

    pub fn agent_name(&self, a: usize) -> String {
        match self.roles[a] {
            Role::Separator { var } => format!("s{}", var + 1),
            Role::SeparatorEnd { var } => format!("t{}", var + 1),
            Role::Base { var } => format!("z{}", var + 1),
            Role::Clause { clause } => format!("a{}", clause + 1),
            Role::Auxiliary => "d".into(),
        }
    }

    /// Sidecar map: cells and roles with unit-cake coordinates.
    pub fn to_json_string(&self) -> String {
        let cells = (0..self.r)
            .flat_map(|i| (1..=14).map(move |k| (i, k)))
            .map(|(i, k)| {
                let (l, r) = self.cell(i, k).bounds().map(|(l, r)| (fmt_rat(l), fmt_rat(r))).expect("cells are non-empty");
                CellEntry {
                    var: i + 1,
                    k,
                    left: l,
                    right: r,
                }
            })
            .collect();
        let sidecar = Sidecar {
            raw_length: fmt_rat(&self.raw_length),
            cells,
            aux: self.aux_block().map(|g| {
                let (l, r) = g.bounds().expect("non-empty");
                [fmt_rat(l), fmt_rat(r)]
            }),
            agents: (0..self.n())
                .map(|a| AgentEntry {
                    name: self.agent_name(a),
                    role: self.roles[a],
                })
                .collect(),
        };
        serde_json::to_string_pretty(&sidecar).expect("layout serializes")
    }
}

#[derive(Serialize)]
struct Sidecar {
    raw_length: String,
    cells: Vec<CellEntry>,
    aux: Option<[String; 2]>,
    agents: Vec<AgentEntry>,
}

#[derive(Serialize)]
struct CellEntry {
    var: usize,
    k: usize,
    left: String,
    right: String,
}

#[derive(Serialize)]
struct AgentEntry {
    name: String,
    #[serde(flatten)]
    role: Role,
}

fn layout(phi: &CnfFormula, has_aux: bool) -> GadgetLayout {
    let r = phi.num_vars;
    let m = phi.clauses.len();
    let mut roles = Vec::with_capacity(3 * r + m + 1);
    for var in 0..r {
        roles.push(Role::Separator { var });
        roles.push(Role::SeparatorEnd { var });
        roles.push(Role::Base { var });
    }
    roles.extend((0..m).map(|clause| Role::Clause { clause }));
    if has_aux {
        roles.push(Role::Auxiliary);
    }
    GadgetLayout {
        r,
        m,
        raw_length: from_usize(14 * r + usize::from(has_aux)),
        has_aux,
        roles,
        literal_cells: phi.literal_cells(),
    }
}

/// Raw-segment cell values of every agent: `(start, value)` per unit cell.
fn raw_values(lay: &GadgetLayout, phi: &CnfFormula) -> Vec<Vec<(Rat, Rat)>> {
    let mut vals: Vec<Vec<(Rat, Rat)>> = vec![Vec::new(); lay.n()];
    for i in 0..lay.r {
        vals[lay.separator(i)].push((lay.cell_raw(i, 7).0, int(1)));
        vals[lay.separator_end(i)].push((lay.cell_raw(i, 14).0, int(1)));
        for k in [1, 6, 8, 13] {
            vals[lay.base(i)].push((lay.cell_raw(i, k).0, rat(1, 4)));
        }
    }
    for (j, c) in phi.clauses.iter().enumerate() {
        for x in 0..c.len() {
            let (i, k) = lay.literal_cell(j, x);
            vals[lay.clause(j)].push((lay.cell_raw(i, k).0, rat(1, 3)));
        }
        if lay.has_aux {
            let t = c.len() as i64;
            let rest = Rat::one() - rat(t, 3);
            if !rest.is_zero() {
                vals[lay.clause(j)].push((from_usize(14 * lay.r), rest));
            }
        }
    }
    if let Some(d) = lay.auxiliary() {
        vals[d].push((from_usize(14 * lay.r), int(1)));
    }
    for v in &mut vals {
        v.sort();
    }
    vals
}

/// Unit cells with the given values, zero elsewhere on `[0, length]`.
fn density_from_cells(cells: &[(Rat, Rat)], length: &Rat) -> PiecewiseDensity {
    let mut pieces = Vec::with_capacity(2 * cells.len() + 1);
    let mut x = Rat::zero();
    for (start, v) in cells {
        pieces.push(Piece::new(x.clone(), start.clone(), Rat::zero()));
        let end = start + Rat::one();
        pieces.push(Piece::new(start.clone(), end.clone(), v.clone()));
        x = end;
    }
    pieces.push(Piece::new(x, length.clone(), Rat::zero()));
    PiecewiseDensity::new(pieces)
}

fn assemble(lay: &GadgetLayout, vals: Vec<Vec<(Rat, Rat)>>, normalized: bool) -> Result<CakeInstance> {
    let agents = vals
        .iter()
        .enumerate()
        .map(|(a, cells)| Agent {
            name: lay.agent_name(a),
            density: density_from_cells(cells, &lay.raw_length),
        })
        .collect();
    let raw = CakeInstance::on_segment(agents, normalized, lay.raw_length.clone());
    let unit = raw.rescale_to_unit()?;
    let v = unit.validate();
    if !v.is_empty() {
        return Err(CakeError::InvalidInstance(v));
    }
    Ok(unit)
}

/// Nash welfare gadget on `[0, 14r+1]`, rescaled to the unit cake.
pub fn build_nsw_instance(phi: &CnfFormula) -> Result<(CakeInstance, GadgetLayout)> {
    phi.validate()?;
    let lay = layout(phi, true);
    let vals = raw_values(&lay, phi);
    let inst = assemble(&lay, vals, true)?;
    Ok((inst, lay))
}

/// ρ-mean variant: no auxiliary block or agent, every cell value raised to
/// `1/ρ`. Needs `1/ρ` to be a positive integer so values stay rational.
pub fn build_rho_instance(phi: &CnfFormula, rho: &Rat) -> Result<(CakeInstance, GadgetLayout)> {
    phi.validate()?;
    crate::allocation::check_rho(rho)?;
    let inv = rho.recip();
    if !inv.is_integer() {
        return Err(CakeError::InvalidParameter(format!(
            "1/rho = {inv} must be an integer for the rho-mean gadget"
        )));
    }
    let k: u32 = inv
        .to_integer()
        .try_into()
        .map_err(|_| CakeError::InvalidParameter(format!("1/rho = {inv} too large")))?;
    let lay = layout(phi, false);
    let vals = raw_values(&lay, phi)
        .into_iter()
        .map(|cells| cells.into_iter().map(|(s, v)| (s, pow(&v, k))).collect())
        .collect();
    let inst = assemble(&lay, vals, false)?;
    Ok((inst, lay))
}

/// Each cell `e^i_k` is valued by at most one agent (`G` is shared).
pub fn cells_exclusive(inst: &CakeInstance, lay: &GadgetLayout) -> bool {
    let blocks: Vec<Interval> = (0..lay.r)
        .flat_map(|i| (1..=14).map(move |k| (i, k)))
        .map(|(i, k)| lay.cell(i, k))
        .collect();
    blocks.iter().all(|b| {
        (0..inst.n())
            .filter(|&a| !inst.value_of(a, b).is_zero())
            .count()
            <= 1
    })
}

/// Allocation induced by a satisfying assignment `f` (`f[i]` is `x_i`).
pub fn yes_case_allocation(inst: &CakeInstance, lay: &GadgetLayout, phi: &CnfFormula, f: &[bool]) -> Result<Allocation> {
    if !phi.satisfied_by(f) {
        return Err(CakeError::InvalidParameter(
            "assignment does not satisfy the formula".into(),
        ));
    }
    let mut assigned = vec![Interval::Empty; lay.n()];
    for i in 0..lay.r {
        assigned[lay.separator(i)] = lay.cell(i, 7);
        assigned[lay.separator_end(i)] = lay.cell(i, 14);
        assigned[lay.base(i)] = if f[i] { lay.cells(i, 8, 13) } else { lay.cells(i, 1, 6) };
    }
    for (j, c) in phi.clauses.iter().enumerate() {
        let x = c
            .iter()
            .position(|l| f[l.var] == l.positive)
            .expect("satisfied clause has a true literal");
        let (i, k) = lay.literal_cell(j, x);
        assigned[lay.clause(j)] = lay.cell(i, k);
    }
    if let Some(d) = lay.auxiliary() {
        assigned[d] = lay.aux_block().expect("aux block present");
    }
    let partial = PartialAllocation::new(assigned, &inst.length)
        .map_err(|e| CakeError::Internal(format!("yes-case cells collide: {e}")))?;
    complete_allocation(inst, &partial)
}

/// `τ^(3r+m+1) = 2^(−r)·3^(−m)`.
pub fn nsw_yes_bound(r: usize, m: usize) -> Rat {
    (pow(&int(2), r as u32) * pow(&int(3), m as u32)).recip()
}

/// `c(α) = 2^(−α/44)`, the no-case factor; report figure only.
pub fn no_case_factor(alpha: &Rat) -> Enclosure {
    pow_rat(&rat(1, 2), &(alpha / int(44)), DEFAULT_BITS)
}

/// Yes-case values of the ρ-mean gadget: separators 1, base agents `2/4^k`,
/// clause agents `3^(−k)` with `k = 1/ρ`.
pub fn rho_yes_values_hold(inst: &CakeInstance, lay: &GadgetLayout, alloc: &Allocation, k: u32) -> bool {
    let z = int(2) / pow(&int(4), k);
    let c = pow(&int(3), k).recip();
    (0..lay.n()).all(|a| {
        let v = inst.value_of(a, &alloc.assigned[a]);
        match lay.roles[a] {
            Role::Separator { .. } | Role::SeparatorEnd { .. } => v.is_one(),
            Role::Base { .. } => v == z,
            Role::Clause { .. } => v == c,
            Role::Auxiliary => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::nsw;

    fn lit(v: usize, positive: bool) -> Literal {
        Literal { var: v, positive }
    }

    /// (x1 ∨ x2) ∧ (¬x1 ∨ ¬x2)
    fn small() -> CnfFormula {
        CnfFormula {
            num_vars: 2,
            clauses: vec![vec![lit(0, true), lit(1, true)], vec![lit(0, false), lit(1, false)]],
        }
    }

    #[test]
    fn nsw_gadget_shape() {
        let (inst, lay) = build_nsw_instance(&small()).unwrap();
        assert_eq!(inst.n(), 9);
        assert_eq!(lay.raw_length, int(29));
        assert!(inst.normalized);
        for a in &inst.agents {
            assert_eq!(a.density.total(), &int(1));
        }
        assert!(cells_exclusive(&inst, &lay));
        let a1 = lay.clause(0);
        assert_eq!(inst.value_of(a1, &lay.cell(0, 2)), rat(1, 3));
        assert_eq!(inst.value_of(a1, &lay.cell(1, 2)), rat(1, 3));
        assert_eq!(inst.value_of(a1, &lay.aux_block().unwrap()), rat(1, 3));
    }

    #[test]
    fn yes_case_on_small_formula() {
        let phi = small();
        let (inst, lay) = build_nsw_instance(&phi).unwrap();
        let f = [true, false];
        let alloc = yes_case_allocation(&inst, &lay, &phi, &f).unwrap();
        assert!(alloc.assigned[lay.base(0)].contains(&lay.cells(0, 8, 13)));
        assert!(alloc.assigned[lay.base(1)].contains(&lay.cells(1, 1, 6)));
        assert!(alloc.assigned[lay.clause(0)].contains(&lay.cell(0, 2)));
        assert!(alloc.assigned[lay.clause(1)].contains(&lay.cell(1, 9)));
        let w = nsw(&inst, &alloc);
        assert_eq!(w.product, rat(1, 36));
        assert_eq!(w.exact_form(), "(1/36)^(1/9)");
        for i in 0..2 {
            assert!(inst.value_of(lay.separator(i), &alloc.assigned[lay.separator(i)]).is_one());
        }
        assert!(yes_case_allocation(&inst, &lay, &phi, &[true, true]).is_err());
    }

    #[test]
    fn yes_bounds() {
        assert_eq!(nsw_yes_bound(2, 2), rat(1, 36));
        assert_eq!(nsw_yes_bound(1, 1), rat(1, 6));
        assert!(nsw_yes_bound(3, 2) < nsw_yes_bound(2, 2));
        assert!(nsw_yes_bound(2, 3) < nsw_yes_bound(2, 2));
        let c = no_case_factor(&int(1));
        assert!(c.hi < int(1) && c.lo > rat(98, 100));
    }

    #[test]
    fn rho_gadget() {
        let phi = small();
        let (one, lay1) = build_rho_instance(&phi, &int(1)).unwrap();
        let (nsw_inst, lay) = build_nsw_instance(&phi).unwrap();
        assert_eq!(one.n(), 8);
        assert!(!one.normalized);
        for i in 0..2 {
            for k in 1..=14 {
                for a in 0..8 {
                    assert_eq!(one.value_of(a, &lay1.cell(i, k)), nsw_inst.value_of(a, &lay.cell(i, k)));
                }
            }
        }
        let (half, lay) = build_rho_instance(&phi, &rat(1, 2)).unwrap();
        assert_eq!(half.value_of(lay.base(0), &lay.cell(0, 1)), rat(1, 16));
        assert_eq!(half.value_of(lay.base(0), &lay.cells(0, 1, 6)), rat(2, 16));
        let alloc = yes_case_allocation(&half, &lay, &phi, &[true, false]).unwrap();
        assert!(rho_yes_values_hold(&half, &lay, &alloc, 2));
        assert!(build_rho_instance(&phi, &rat(2, 3)).is_err());
    }

    #[test]
    fn formula_checks() {
        let only_pos = CnfFormula {
            num_vars: 1,
            clauses: vec![vec![lit(0, true)]],
        };
        let v = only_pos.violations();
        assert_eq!(v, vec!["variable 1 never occurs negatively".to_string()]);
        let padded = only_pos.pad_polarities();
        assert!(padded.violations().is_empty());
        assert!(padded.satisfied_by(&[true, true, true]));

        let dup = CnfFormula {
            num_vars: 1,
            clauses: vec![vec![lit(0, true), lit(0, false)]],
        };
        assert!(dup.validate().is_err());
        let long = CnfFormula {
            num_vars: 4,
            clauses: vec![vec![lit(0, true), lit(1, true), lit(2, true), lit(3, true)]],
        };
        assert!(long.violations().iter().any(|s| s.contains("4 literals")));
    }

    #[test]
    fn dimacs_round_trip() {
        let s = "c tiny\np cnf 2 2\n1 2 0\n-1 -2 0\n";
        let phi = CnfFormula::from_dimacs(s).unwrap();
        assert_eq!(phi, small());
        assert_eq!(CnfFormula::from_dimacs(&phi.to_dimacs()).unwrap(), phi);
        assert!(CnfFormula::from_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(CnfFormula::from_dimacs("1 0\n").is_err());
        assert!(CnfFormula::from_dimacs("p cnf 2 3\n1 2 0\n").is_err());
    }

    #[test]
    fn sidecar_lists_every_cell() {
        let (_, lay) = build_nsw_instance(&small()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&lay.to_json_string()).unwrap();
        assert_eq!(v["cells"].as_array().unwrap().len(), 28);
        assert_eq!(v["agents"][8]["role"], "auxiliary");
        assert_eq!(v["aux"][0], "28/29");
    }
}
