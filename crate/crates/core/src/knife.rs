//! Moving-knife algorithm for approximately envy-free connected allocations.
//!
//! The state is a partial allocation. While some agent values an unassigned
//! gap more than its own piece plus `ε/n²`, a knife sweeps that gap and the
//! first agent whose value would rise by exactly `ε/n²` takes the swept
//! prefix (or suffix), giving its old piece back. When no violation is left,
//! gaps are merged into neighboring pieces.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::{gaps_of, sorted_pieces, Allocation, PartialAllocation, UnassignedSet};
use crate::error::{CakeError, Result};
use crate::model::{CakeInstance, Interval};
use crate::rational::{fmt_rat, from_usize, parse_rat, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

/// One knife application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationRecord {
    pub iteration: u64,
    pub chosen_gap: Interval,
    pub contenders: Vec<usize>,
    pub direction: Direction,
    pub selected: usize,
    pub new_interval: Interval,
    pub relinquished: Interval,
    /// Number of gaps after the step.
    pub gap_count: usize,
}

#[derive(Clone, Debug)]
pub struct KnifeState {
    pub partial: PartialAllocation,
    pub gaps: UnassignedSet,
    pub epsilon: Rat,
    /// `ε/n²`.
    pub threshold: Rat,
    pub iteration: u64,
    pub trace: Vec<IterationRecord>,
}

impl KnifeState {
    pub fn new(instance: &CakeInstance, epsilon: &Rat) -> Result<KnifeState> {
        check_epsilon(epsilon)?;
        let n = instance.n();
        if n == 0 {
            return Err(CakeError::InvalidParameter("instance has no agents".into()));
        }
        let partial = PartialAllocation::empty(n);
        let gaps = gaps_of(&partial.assigned, &instance.length);
        Ok(KnifeState {
            partial,
            gaps,
            threshold: epsilon / from_usize(n * n),
            epsilon: epsilon.clone(),
            iteration: 0,
            trace: Vec::new(),
        })
    }

    pub fn own_value(&self, instance: &CakeInstance, a: usize) -> Rat {
        instance.value_of(a, &self.partial.assigned[a])
    }
}

pub fn check_epsilon(epsilon: &Rat) -> Result<()> {
    if !epsilon.is_positive() || epsilon > &Rat::new(1.into(), 3.into()) {
        return Err(CakeError::InvalidParameter(format!(
            "epsilon = {epsilon} outside (0, 1/3]"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct KnifeConfig {
    /// Solve `n = 2` by cut-and-choose instead of running the knife loop.
    pub cut_and_choose: bool,
    /// Skip the per-iteration invariant assertions.
    pub skip_invariant_checks: bool,
}

#[derive(Clone, Debug)]
pub struct KnifeOutcome {
    pub allocation: Allocation,
    /// Partial allocation at loop exit, before merging.
    pub terminal: PartialAllocation,
    pub trace: Vec<IterationRecord>,
    pub iterations: u64,
    pub gaps_at_merge: usize,
    /// Largest gap count observed after the first time it dropped to `n` or below.
    pub max_gaps_after_attained: usize,
}

/// First `(agent, gap)` with `v_a(P_a) < v_a(gap) − ε/n²`: gaps left to right,
/// agents by index.
pub fn find_violation(instance: &CakeInstance, state: &KnifeState) -> Option<(usize, Interval)> {
    let own: Vec<Rat> = (0..instance.n()).map(|a| state.own_value(instance, a)).collect();
    for gap in &state.gaps.gaps {
        for (a, v) in own.iter().enumerate() {
            if v < &(instance.value_of(a, gap) - &state.threshold) {
                return Some((a, gap.clone()));
            }
        }
    }
    None
}

fn contenders(instance: &CakeInstance, state: &KnifeState, gap: &Interval) -> Vec<(usize, Rat)> {
    (0..instance.n())
        .filter_map(|b| {
            let own = state.own_value(instance, b);
            (own < instance.value_of(b, gap) - &state.threshold).then(|| (b, own + &state.threshold))
        })
        .collect()
}

fn apply(
    instance: &CakeInstance,
    state: &mut KnifeState,
    gap: &Interval,
    contenders: Vec<usize>,
    direction: Direction,
    selected: usize,
    new_interval: Interval,
) {
    let relinquished = std::mem::replace(&mut state.partial.assigned[selected], new_interval.clone());
    state.gaps = gaps_of(&state.partial.assigned, &instance.length);
    state.iteration += 1;
    state.trace.push(IterationRecord {
        iteration: state.iteration,
        chosen_gap: gap.clone(),
        contenders,
        direction,
        selected,
        new_interval,
        relinquished,
        gap_count: state.gaps.len(),
    });
}

/// Sweeps `gap` from its left end; the agent with the leftmost cut takes the prefix.
pub fn left_knife_step(instance: &CakeInstance, state: &mut KnifeState, gap: &Interval) -> Result<()> {
    let (gl, _) = gap
        .bounds()
        .ok_or_else(|| CakeError::Internal("knife on an empty gap".into()))?;
    let c = contenders(instance, state, gap);
    let mut best: Option<(usize, Rat)> = None;
    for (b, target) in &c {
        let r = instance.cut_query(*b, gl, target)?;
        if best.as_ref().is_none_or(|(_, br)| &r < br) {
            best = Some((*b, r));
        }
    }
    let (sel, r) = best.ok_or_else(|| CakeError::Internal(format!("no contender for gap {gap}")))?;
    let ids = c.into_iter().map(|(b, _)| b).collect();
    apply(instance, state, gap, ids, Direction::Left, sel, Interval::new(gl.clone(), r));
    Ok(())
}

/// Mirror of [`left_knife_step`]: the agent with the rightmost cut takes the suffix.
pub fn right_knife_step(instance: &CakeInstance, state: &mut KnifeState, gap: &Interval) -> Result<()> {
    let (_, gr) = gap
        .bounds()
        .ok_or_else(|| CakeError::Internal("knife on an empty gap".into()))?;
    let c = contenders(instance, state, gap);
    let mut best: Option<(usize, Rat)> = None;
    for (b, target) in &c {
        let l = instance.rightmost_cut_query(*b, gr, target)?;
        if best.as_ref().is_none_or(|(_, bl)| &l > bl) {
            best = Some((*b, l));
        }
    }
    let (sel, l) = best.ok_or_else(|| CakeError::Internal(format!("no contender for gap {gap}")))?;
    let ids = c.into_iter().map(|(b, _)| b).collect();
    apply(instance, state, gap, ids, Direction::Right, sel, Interval::new(l, gr.clone()));
    Ok(())
}

/// Attaches every gap to a neighboring piece.
///
/// Gaps are visited left to right. A gap joins the piece on its left unless
/// that piece already absorbed a gap, in which case it joins the piece on its
/// right; a gap at the right end of the cake falls back to its left piece.
/// With at most as many gaps as nonempty pieces, no piece absorbs two gaps.
pub fn merge_step(instance: &CakeInstance, partial: &PartialAllocation) -> Result<Allocation> {
    let n = partial.n();
    if n == 0 {
        return Err(CakeError::InvalidParameter("no agents".into()));
    }
    let length = &instance.length;
    let pieces: Vec<(usize, Interval)> = sorted_pieces(&partial.assigned)
        .into_iter()
        .map(|(a, iv)| (a, iv.clone()))
        .collect();
    let mut assigned = partial.assigned.clone();
    if pieces.is_empty() {
        assigned[0] = Interval::new(Rat::zero(), length.clone());
        return Allocation::new(assigned, length);
    }
    let mut used = vec![false; n];
    for gap in gaps_of(&partial.assigned, length).gaps {
        let (gl, gr) = gap.bounds().expect("gaps are non-empty");
        let left = pieces.iter().find(|(_, iv)| iv.right() == Some(gl)).map(|p| p.0);
        let right = pieces.iter().find(|(_, iv)| iv.left() == Some(gr)).map(|p| p.0);
        let owner = match (left, right) {
            (Some(a), _) if !used[a] => a,
            (_, Some(b)) => b,
            (Some(a), None) => a,
            (None, None) => {
                return Err(CakeError::Internal(format!("gap {gap} has no neighbor")));
            }
        };
        used[owner] = true;
        assigned[owner] = assigned[owner].hull(&gap);
    }
    Allocation::new(assigned, length)
}

/// `max_a v_a([0, L])`.
fn max_total(instance: &CakeInstance) -> Rat {
    instance
        .agents
        .iter()
        .map(|a| a.density.total().clone())
        .max()
        .unwrap_or_else(Rat::zero)
}

/// `⌈n³·V/ε⌉` where `V` is the largest agent total: every step raises one
/// agent's value by `ε/n²`, and no agent exceeds `V`.
pub fn iteration_budget(instance: &CakeInstance, epsilon: &Rat) -> u64 {
    let n = from_usize(instance.n());
    let b = (&n * &n * &n * max_total(instance) / epsilon).ceil();
    b.to_integer().to_u64().unwrap_or(u64::MAX)
}

/// `∀a,b: v_a(P_a) >= v_a(P_b) − ε/n²`.
pub fn eq1_holds(instance: &CakeInstance, assigned: &[Interval], threshold: &Rat) -> bool {
    (0..assigned.len()).all(|a| {
        let own = instance.value_of(a, &assigned[a]);
        assigned
            .iter()
            .all(|p| own >= instance.value_of(a, p) - threshold)
    })
}

/// `∀a, ∀Q` among pieces and gaps: `v_a(P_a) >= v_a(Q) − ε/n²`.
pub fn lemma5_holds(instance: &CakeInstance, assigned: &[Interval], threshold: &Rat) -> bool {
    let gaps = gaps_of(assigned, &instance.length);
    (0..assigned.len()).all(|a| {
        let own = instance.value_of(a, &assigned[a]);
        assigned
            .iter()
            .chain(gaps.gaps.iter())
            .all(|q| own >= instance.value_of(a, q) - threshold)
    })
}

/// `(2n+1)·v_a(P_a) >= 1 − 2ε/n` for every agent of a normalized instance.
pub fn disposal_bound_holds(instance: &CakeInstance, assigned: &[Interval], epsilon: &Rat) -> bool {
    let n = from_usize(assigned.len());
    let rhs = Rat::one() - epsilon * Rat::from_integer(2.into()) / &n;
    let k = &n * Rat::from_integer(2.into()) + Rat::one();
    (0..assigned.len()).all(|a| &k * instance.value_of(a, &assigned[a]) >= rhs)
}

fn cut_and_choose(instance: &CakeInstance) -> Result<Allocation> {
    let half = instance.agents[0].density.total() / Rat::from_integer(2.into());
    let x = instance.cut_query(0, &Rat::zero(), &half)?;
    let l = Interval::new(Rat::zero(), x.clone());
    let r = Interval::new(x, instance.length.clone());
    let assigned = if instance.value_of(1, &r) > instance.value_of(1, &l) {
        vec![l, r]
    } else {
        vec![r, l]
    };
    Allocation::new(assigned, &instance.length)
}

fn run(instance: &CakeInstance, epsilon: &Rat, config: &KnifeConfig, two_ef: bool) -> Result<KnifeOutcome> {
    let n = instance.n();
    if two_ef && n < 2 {
        return Err(CakeError::InvalidParameter("the 2-EF variant needs n >= 2".into()));
    }
    let mut state = KnifeState::new(instance, epsilon)?;
    if config.cut_and_choose && n == 2 {
        check_epsilon(epsilon)?;
        let allocation = cut_and_choose(instance)?;
        return Ok(KnifeOutcome {
            terminal: allocation.as_partial(),
            allocation,
            trace: Vec::new(),
            iterations: 0,
            gaps_at_merge: 0,
            max_gaps_after_attained: 0,
        });
    }
    let budget = iteration_budget(instance, epsilon);
    let mut attained = state.gaps.len() <= n;
    let mut max_after = if attained { state.gaps.len() } else { 0 };
    while let Some((_, gap)) = find_violation(instance, &state) {
        if state.iteration >= budget {
            return Err(CakeError::Internal(format!(
                "iteration bound {budget} reached without termination"
            )));
        }
        if two_ef {
            let mut trial = state.clone();
            left_knife_step(instance, &mut trial, &gap)?;
            if attained && trial.gaps.len() > n {
                let mut alt = state.clone();
                right_knife_step(instance, &mut alt, &gap)?;
                if alt.gaps.len() > n {
                    return Err(CakeError::Internal(format!(
                        "both knife directions on {gap} leave more than {n} gaps"
                    )));
                }
                trial = alt;
            }
            state = trial;
        } else {
            left_knife_step(instance, &mut state, &gap)?;
        }
        if state.gaps.len() <= n {
            attained = true;
        }
        if attained {
            max_after = max_after.max(state.gaps.len());
        }
        if !config.skip_invariant_checks && !eq1_holds(instance, &state.partial.assigned, &state.threshold) {
            return Err(CakeError::Internal(format!(
                "additive envy bound broken after iteration {}",
                state.iteration
            )));
        }
    }
    let allocation = merge_step(instance, &state.partial)?;
    Ok(KnifeOutcome {
        allocation,
        gaps_at_merge: state.gaps.len(),
        terminal: state.partial,
        iterations: state.iteration,
        trace: state.trace,
        max_gaps_after_attained: max_after,
    })
}

/// Left knives only; envy ratio at most `3 + 9ε/n`.
pub fn alg_three_ef(instance: &CakeInstance, epsilon: &Rat) -> Result<KnifeOutcome> {
    run(instance, epsilon, &KnifeConfig::default(), false)
}

/// Left knives with a right-knife fallback that keeps at most `n` gaps;
/// envy ratio at most `2 + 9ε/n`.
pub fn alg_two_ef(instance: &CakeInstance, epsilon: &Rat) -> Result<KnifeOutcome> {
    run(instance, epsilon, &KnifeConfig::default(), true)
}

pub fn alg_three_ef_with(instance: &CakeInstance, epsilon: &Rat, config: &KnifeConfig) -> Result<KnifeOutcome> {
    run(instance, epsilon, config, false)
}

pub fn alg_two_ef_with(instance: &CakeInstance, epsilon: &Rat, config: &KnifeConfig) -> Result<KnifeOutcome> {
    run(instance, epsilon, config, true)
}

/// `3 + 9ε/n` and `2 + 9ε/n`.
pub fn ef_bound(base: i64, epsilon: &Rat, n: usize) -> Rat {
    Rat::from_integer(base.into()) + epsilon * Rat::from_integer(9.into()) / from_usize(n)
}

// ---------------------------------------------------------------------------
// traces

#[derive(Serialize, Deserialize, PartialEq, Eq, Debug)]
struct TraceLine {
    iteration: u64,
    gap: Option<[String; 2]>,
    contenders: Vec<usize>,
    direction: Direction,
    selected: usize,
    new: Option<[String; 2]>,
    relinquished: Option<[String; 2]>,
    gaps: usize,
}

fn pair(iv: &Interval) -> Option<[String; 2]> {
    iv.bounds().map(|(l, r)| [fmt_rat(l), fmt_rat(r)])
}

fn unpair(p: &Option<[String; 2]>) -> Result<Interval> {
    match p {
        None => Ok(Interval::Empty),
        Some([l, r]) => Ok(Interval::new(parse_rat(l)?, parse_rat(r)?)),
    }
}

/// One JSON object per line, agents by zero-based index.
pub fn trace_to_jsonl(trace: &[IterationRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        let line = TraceLine {
            iteration: rec.iteration,
            gap: pair(&rec.chosen_gap),
            contenders: rec.contenders.clone(),
            direction: rec.direction,
            selected: rec.selected,
            new: pair(&rec.new_interval),
            relinquished: pair(&rec.relinquished),
            gaps: rec.gap_count,
        };
        out.push_str(&serde_json::to_string(&line).expect("trace line serializes"));
        out.push('\n');
    }
    out
}

pub fn trace_from_jsonl(s: &str) -> Result<Vec<IterationRecord>> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let t: TraceLine = serde_json::from_str(l)?;
            Ok(IterationRecord {
                iteration: t.iteration,
                chosen_gap: unpair(&t.gap)?,
                contenders: t.contenders,
                direction: t.direction,
                selected: t.selected,
                new_interval: unpair(&t.new)?,
                relinquished: unpair(&t.relinquished)?,
                gap_count: t.gaps,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::envy_ratio;
    use crate::model::{step_density, uniform_agent, Agent};
    use crate::rational::{int, rat};

    fn iv(l: Rat, r: Rat) -> Interval {
        Interval::new(l, r)
    }

    fn disjoint_pair() -> CakeInstance {
        CakeInstance::checked(
            vec![
                Agent {
                    name: "left".into(),
                    density: step_density(int(0), rat(1, 2), int(2)),
                },
                Agent {
                    name: "right".into(),
                    density: step_density(rat(1, 2), int(1), int(2)),
                },
            ],
            true,
        )
        .unwrap()
    }

    fn solo() -> CakeInstance {
        CakeInstance::checked(vec![uniform_agent("solo")], true).unwrap()
    }

    #[test]
    fn initial_state_violates_for_first_agent() {
        let c = disjoint_pair();
        let s = KnifeState::new(&c, &rat(1, 3)).unwrap();
        assert_eq!(find_violation(&c, &s), Some((0, Interval::unit())));
    }

    #[test]
    fn single_agent_with_everything_is_settled() {
        let c = solo();
        let mut s = KnifeState::new(&c, &rat(1, 3)).unwrap();
        s.partial.assigned[0] = Interval::unit();
        s.gaps = gaps_of(&s.partial.assigned, &c.length);
        assert_eq!(find_violation(&c, &s), None);
    }

    #[test]
    fn first_left_step_on_disjoint_pair() {
        let c = disjoint_pair();
        let mut s = KnifeState::new(&c, &rat(1, 3)).unwrap();
        left_knife_step(&c, &mut s, &Interval::unit()).unwrap();
        let rec = &s.trace[0];
        assert_eq!(rec.contenders, vec![0, 1]);
        assert_eq!(rec.selected, 0);
        assert_eq!(rec.new_interval, iv(int(0), rat(1, 24)));
        assert_eq!(s.own_value(&c, 0), rat(1, 12));
        // agent 2's cut would have been 13/24
        assert_eq!(c.cut_query(1, &int(0), &rat(1, 12)).unwrap(), rat(13, 24));
    }

    #[test]
    fn first_right_step_on_disjoint_pair() {
        let c = disjoint_pair();
        let mut s = KnifeState::new(&c, &rat(1, 3)).unwrap();
        right_knife_step(&c, &mut s, &Interval::unit()).unwrap();
        let rec = &s.trace[0];
        assert_eq!(rec.selected, 1);
        assert_eq!(rec.new_interval, iv(rat(23, 24), int(1)));
        assert_eq!(c.rightmost_cut_query(0, &int(1), &rat(1, 12)).unwrap(), rat(11, 24));
    }

    #[test]
    fn single_uniform_agent_steps() {
        let c = solo();
        let mut s = KnifeState::new(&c, &rat(1, 3)).unwrap();
        left_knife_step(&c, &mut s, &Interval::unit()).unwrap();
        assert_eq!(s.partial.assigned[0], iv(int(0), rat(1, 3)));
        let mut s = KnifeState::new(&c, &rat(1, 3)).unwrap();
        right_knife_step(&c, &mut s, &Interval::unit()).unwrap();
        assert_eq!(s.partial.assigned[0], iv(rat(2, 3), int(1)));
    }

    #[test]
    fn merge_examples() {
        let c = disjoint_pair();
        let p = PartialAllocation::new(
            vec![iv(rat(5, 24), rat(11, 24)), iv(rat(17, 24), rat(23, 24))],
            &int(1),
        )
        .unwrap();
        let a = merge_step(&c, &p).unwrap();
        assert_eq!(a.assigned, vec![iv(int(0), rat(11, 24)), iv(rat(11, 24), int(1))]);

        let full = Allocation::new(vec![iv(int(0), rat(1, 2)), iv(rat(1, 2), int(1))], &int(1)).unwrap();
        assert_eq!(merge_step(&c, &full.as_partial()).unwrap(), full);

        let s = solo();
        let p = PartialAllocation::new(vec![iv(rat(1, 3), rat(2, 3))], &int(1)).unwrap();
        assert_eq!(merge_step(&s, &p).unwrap().assigned, vec![Interval::unit()]);
    }

    #[test]
    fn merge_never_doubles_up_when_gaps_fit() {
        // pieces and gaps: gap P gap P P gap P gap, three pieces... plus an
        // extra adjacent piece; 4 gaps, 4 pieces
        let c = CakeInstance::checked(
            (0..4).map(|i| uniform_agent(&format!("a{i}"))).collect(),
            true,
        )
        .unwrap();
        let p = PartialAllocation::new(
            vec![
                iv(rat(1, 10), rat(2, 10)),
                iv(rat(3, 10), rat(4, 10)),
                iv(rat(4, 10), rat(5, 10)),
                iv(rat(6, 10), rat(7, 10)),
            ],
            &int(1),
        )
        .unwrap();
        let a = merge_step(&c, &p).unwrap();
        for (i, orig) in p.assigned.iter().enumerate() {
            let grown = a.assigned[i].length() - orig.length();
            assert!(grown <= rat(3, 10), "agent {i} absorbed two gaps");
        }
    }

    #[test]
    fn solo_run_takes_whole_cake() {
        let out = alg_three_ef(&solo(), &rat(1, 3)).unwrap();
        assert_eq!(out.allocation.assigned, vec![Interval::unit()]);
    }

    #[test]
    fn disjoint_pair_run() {
        let c = disjoint_pair();
        let out = alg_three_ef(&c, &rat(1, 3)).unwrap();
        assert_eq!(
            out.allocation.assigned,
            vec![iv(int(0), rat(11, 24)), iv(rat(11, 24), int(1))]
        );
        assert_eq!(envy_ratio(&c, &out.allocation), crate::allocation::EnvyRatio::Finite(int(1)));
        assert!(lemma5_holds(&c, &out.terminal.assigned, &rat(1, 12)));
        assert!(out.iterations <= iteration_budget(&c, &rat(1, 3)));
    }

    #[test]
    fn two_ef_trips_the_gap_guard_on_disjoint_pair() {
        let c = disjoint_pair();
        let out = alg_two_ef(&c, &rat(1, 3)).unwrap();
        assert!(out.trace.iter().any(|r| r.direction == Direction::Right));
        assert!(out.gaps_at_merge <= 2);
        assert!(envy_ratio(&c, &out.allocation).at_most(&ef_bound(2, &rat(1, 3), 2)));
    }

    #[test]
    fn cut_and_choose_is_envy_free() {
        let c = CakeInstance::checked(vec![uniform_agent("a"), uniform_agent("b")], true).unwrap();
        let cfg = KnifeConfig {
            cut_and_choose: true,
            ..KnifeConfig::default()
        };
        let out = alg_three_ef_with(&c, &rat(1, 3), &cfg).unwrap();
        assert_eq!(envy_ratio(&c, &out.allocation), crate::allocation::EnvyRatio::Finite(int(1)));
    }

    #[test]
    fn epsilon_range_enforced() {
        assert!(alg_three_ef(&solo(), &rat(1, 2)).is_err());
        assert!(alg_three_ef(&solo(), &int(0)).is_err());
        assert!(alg_two_ef(&solo(), &rat(1, 3)).is_err());
    }

    #[test]
    fn trace_round_trips() {
        let out = alg_two_ef(&disjoint_pair(), &rat(1, 3)).unwrap();
        let s = trace_to_jsonl(&out.trace);
        assert_eq!(s.lines().count(), out.trace.len());
        assert_eq!(trace_from_jsonl(&s).unwrap(), out.trace);
    }
}
