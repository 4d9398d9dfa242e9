//! Seeded generators for instances, scheduling problems and planted 3-SAT-5 formulas.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hardness::{CnfFormula, Literal};
use crate::jisp::{Candidate, JispInstance};
use crate::model::{Agent, CakeInstance, Piece, PiecewiseDensity};
use crate::rational::{from_usize, rat, Rat};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Breakpoints are multiples of `1/grid`; raw weights are integers in
/// `0..=max_weight`, rescaled so each agent's total is exactly 1.
#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub agents: usize,
    pub max_pieces: usize,
    pub grid: usize,
    pub max_weight: u32,
}

impl InstanceSpec {
    pub fn new(agents: usize, max_pieces: usize) -> InstanceSpec {
        InstanceSpec {
            agents,
            max_pieces,
            grid: 16,
            max_weight: 8,
        }
    }
}

fn random_density<R: Rng>(rng: &mut R, spec: &InstanceSpec) -> PiecewiseDensity {
    let k = rng.gen_range(1..=spec.max_pieces.min(spec.grid).max(1));
    let mut cuts: Vec<usize> = (1..spec.grid).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(spec.grid);
    let mut weights: Vec<u32> = (0..k).map(|_| rng.gen_range(0..=spec.max_weight)).collect();
    if weights.iter().all(|&w| w == 0) {
        let i = rng.gen_range(0..k);
        weights[i] = rng.gen_range(1..=spec.max_weight.max(1));
    }
    let g = spec.grid as i64;
    let mass: i64 = (0..k)
        .map(|i| weights[i] as i64 * (bounds[i + 1] - bounds[i]) as i64)
        .sum();
    // total = mass / g, so density w * g / mass normalizes
    let pieces = (0..k)
        .map(|i| {
            Piece::new(
                rat(bounds[i] as i64, g),
                rat(bounds[i + 1] as i64, g),
                rat(weights[i] as i64 * g, mass),
            )
        })
        .collect();
    PiecewiseDensity::new(pieces)
}

pub fn random_instance_with<R: Rng>(rng: &mut R, spec: &InstanceSpec) -> CakeInstance {
    let agents = (0..spec.agents)
        .map(|a| Agent {
            name: format!("a{}", a + 1),
            density: random_density(rng, spec),
        })
        .collect();
    CakeInstance::new(agents, true)
}

/// Normalized instance with `agents` agents and at most `max_pieces` pieces each.
pub fn random_instance(seed: u64, agents: usize, max_pieces: usize) -> CakeInstance {
    random_instance_with(&mut rng(seed), &InstanceSpec::new(agents, max_pieces))
}

/// Random scheduling instance over `points` indices; weights are `p/4`
/// with `p` in `0..=4·max_weight`.
pub fn random_jisp<R: Rng>(rng: &mut R, jobs: usize, points: usize, max_candidates: usize, max_weight: i64) -> JispInstance<Rat> {
    let jobs = (0..jobs)
        .map(|_| {
            let count = rng.gen_range(1..=max_candidates);
            (0..count)
                .map(|_| {
                    let l = rng.gen_range(0..points - 1);
                    let r = rng.gen_range(l + 1..points);
                    Candidate {
                        l,
                        r,
                        w: rat(rng.gen_range(0..=4 * max_weight), 4),
                    }
                })
                .collect()
        })
        .collect();
    JispInstance { jobs }
}

/// Satisfiable 3-SAT-5 formula over `r >= 2` variables together with the
/// planted assignment that satisfies it.
pub fn random_sat5<R: Rng>(rng: &mut R, r: usize) -> (CnfFormula, Vec<bool>) {
    assert!(r >= 2, "both polarities of one variable cannot be satisfied alone");
    loop {
        let f: Vec<bool> = (0..r).map(|_| rng.gen()).collect();
        let m = rng.gen_range(r..=(5 * r / 3).max(r));
        let mut occ = vec![0usize; r];
        let mut clauses = Vec::with_capacity(m);
        let mut tries = 0;
        while clauses.len() < m && tries < 10_000 {
            tries += 1;
            let t = match rng.gen_range(0..10) {
                0 => 1,
                1..=3 => 2,
                _ => 3,
            }
            .min(r);
            let mut vars: Vec<usize> = (0..r).filter(|&v| occ[v] < 5).collect();
            if vars.len() < t {
                continue;
            }
            vars.shuffle(rng);
            let clause: Vec<Literal> = vars[..t]
                .iter()
                .map(|&var| Literal {
                    var,
                    positive: rng.gen(),
                })
                .collect();
            if clause.iter().any(|l| f[l.var] == l.positive) {
                for l in &clause {
                    occ[l.var] += 1;
                }
                clauses.push(clause);
            }
        }
        let phi = CnfFormula { num_vars: r, clauses };
        if phi.clauses.len() == m && phi.violations().is_empty() {
            debug_assert!(phi.satisfied_by(&f));
            return (phi, f);
        }
    }
}

/// Every agent values the whole cake at exactly 1.
pub fn total_is_one(inst: &CakeInstance) -> bool {
    inst.agents
        .iter()
        .all(|a| (a.density.total() - from_usize(1)).is_zero())
}
