//! Bounds on antichains of `ℕ^m × n` and on strictly increasing chains of them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::deriv_index::{enumerate_upto, DerivIndex};

/// Exhaustive searches refuse beyond this many states.
pub const STATE_GUARD: usize = 1_000_000;
/// Largest bit length tolerated in the recursion.
pub const MAX_BITS: u64 = 1 << 16;
/// Cap on evaluations inside the recursion.
pub const STEP_GUARD: u64 = 10_000_000;
/// Cap on the number of unknowns (or slices) handled by the recursion.
pub const COLOR_GUARD: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundError {
    #[error("bound too large to compute ({0})")]
    TooLarge(String),
    #[error("search exceeds {0} states")]
    Guard(usize),
    #[error("chain reached the round cap {0}; raise it")]
    RoundCap(usize),
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// The height sequence `a_0, a_1, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeightRule {
    Constant(u64),
    /// Listed values, the last one repeated.
    Prefix(Vec<u64>),
    /// `start + step·i`.
    Linear { start: u64, step: u64 },
    /// `2^i · r`.
    Doubling { r: u64 },
}

impl HeightRule {
    pub fn at(&self, i: usize) -> u64 {
        match self {
            HeightRule::Constant(c) => *c,
            HeightRule::Prefix(v) => v[i.min(v.len() - 1)],
            HeightRule::Linear { start, step } => start.saturating_add(step.saturating_mul(i as u64)),
            HeightRule::Doubling { r } => {
                if i >= 64 {
                    u64::MAX
                } else {
                    r.saturating_mul(1u64 << i)
                }
            }
        }
    }

    fn eval(&self, i: &BigUint) -> Result<BigUint, BoundError> {
        match self {
            HeightRule::Constant(c) => Ok(BigUint::from(*c)),
            HeightRule::Prefix(v) => {
                let j = i.to_usize().unwrap_or(usize::MAX).min(v.len() - 1);
                Ok(BigUint::from(v[j]))
            }
            HeightRule::Linear { start, step } => Ok(BigUint::from(*start) + BigUint::from(*step) * i),
            HeightRule::Doubling { r } => {
                let e = i.to_u64().filter(|e| *e <= MAX_BITS).ok_or_else(|| BoundError::TooLarge(format!("2^{i}")))?;
                Ok(BigUint::from(*r) << e)
            }
        }
    }

    /// The pointwise running maximum, which dominates the rule.
    pub fn running_max(&self) -> HeightRule {
        match self {
            HeightRule::Prefix(v) => {
                let mut best = 0;
                HeightRule::Prefix(
                    v.iter()
                        .map(|x| {
                            best = best.max(*x);
                            best
                        })
                        .collect(),
                )
            }
            other => other.clone(),
        }
    }
}

impl fmt::Display for HeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeightRule::Constant(c) => write!(f, "a_i = {c}"),
            HeightRule::Prefix(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "a = ({}, …)", items.join(", "))
            }
            HeightRule::Linear { start, step } => write!(f, "a_i = {start} + {step}·i"),
            HeightRule::Doubling { r } => write!(f, "a_i = 2^i·{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSpec {
    pub m: usize,
    pub n: usize,
    pub rule: HeightRule,
}

impl ChainSpec {
    pub fn new(m: usize, n: usize, rule: HeightRule) -> Result<Self, BoundError> {
        if m == 0 || n == 0 {
            return Err(BoundError::Invalid("m and n must be positive".into()));
        }
        let positive = match &rule {
            HeightRule::Constant(c) => *c > 0,
            HeightRule::Prefix(v) => !v.is_empty() && v.iter().all(|x| *x > 0),
            HeightRule::Linear { start, .. } => *start > 0,
            HeightRule::Doubling { r } => *r > 0,
        };
        if !positive {
            return Err(BoundError::Invalid("heights must be positive".into()));
        }
        Ok(ChainSpec { m, n, rule })
    }
}

type Seq = Rc<dyn Fn(&BigUint) -> Result<BigUint, BoundError>>;

struct Budget {
    steps: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<(), BoundError> {
        self.steps += 1;
        if self.steps > STEP_GUARD {
            return Err(BoundError::TooLarge("step budget exhausted".into()));
        }
        Ok(())
    }
}

fn checked(v: BigUint) -> Result<BigUint, BoundError> {
    if v.bits() > MAX_BITS {
        return Err(BoundError::TooLarge(format!("{} bits", v.bits())));
    }
    Ok(v)
}

fn small(v: &BigUint, what: &str) -> Result<usize, BoundError> {
    v.to_usize()
        .filter(|x| (*x as u64) <= STEP_GUARD)
        .ok_or_else(|| BoundError::TooLarge(format!("{what} = {v}")))
}

fn shift(a: &Seq, by: BigUint) -> Seq {
    let a = a.clone();
    Rc::new(move |i: &BigUint| a(&(i + &by)))
}

/// Chains of antichains of `ℕ^m` (one unknown).
fn single(m: usize, a: &Seq, budget: &Rc<RefCell<Budget>>) -> Result<BigUint, BoundError> {
    budget.borrow_mut().tick()?;
    if m == 1 {
        return Ok(BigUint::from(2u32));
    }
    // S_0 holds some σ, and S_k splits into the slices ξ(i) = j ≤ σ(i).
    let slices = |k: u32| -> Result<usize, BoundError> {
        let h = a(&BigUint::from(k))?;
        small(&(h + BigUint::from(m)), "slice count")
    };
    let first = colored(m - 1, slices(0)?, a, budget)?;
    let shifted = shift(a, BigUint::one());
    let later = colored(m - 1, slices(1)?, &shifted, budget)? + BigUint::one();
    Ok(first.max(later))
}

/// Chains of antichains of `ℕ^m × colors`.
fn colored(m: usize, colors: usize, a: &Seq, budget: &Rc<RefCell<Budget>>) -> Result<BigUint, BoundError> {
    if colors == 1 {
        return single(m, a, budget);
    }
    if colors > COLOR_GUARD {
        return Err(BoundError::TooLarge(format!("{colors} slices")));
    }
    // f(k) = k + (bound for the last color from index k); f is increasing, so g = f.
    let g: Seq = {
        let a = a.clone();
        let budget = budget.clone();
        Rc::new(move |k: &BigUint| checked(k + single(m, &shift(&a, k.clone()), &budget)?))
    };
    let iterates = Rc::new(RefCell::new(vec![BigUint::zero()]));
    let iterate = {
        let g = g.clone();
        let iterates = iterates.clone();
        move |i: usize| -> Result<BigUint, BoundError> {
            loop {
                let len = iterates.borrow().len();
                if len > i {
                    return Ok(iterates.borrow()[i].clone());
                }
                let last = iterates.borrow()[len - 1].clone();
                let next = g(&last)?;
                iterates.borrow_mut().push(next);
            }
        }
    };
    let iterate = Rc::new(iterate);
    let sub: Seq = {
        let a = a.clone();
        let iterate = iterate.clone();
        Rc::new(move |i: &BigUint| a(&iterate(small(i, "chain index")?)?))
    };
    let s = colored(m, colors - 1, &sub, budget)?;
    iterate(small(&s, "iteration count")?)
}

/// An upper bound on the number of entries in `S_0 ⊊ S_1 ⊊ …`, following the
/// divide-and-conquer recursion with `g(k) = max_{i≤k} f(i)`. Not tight.
pub fn chain_bound(spec: &ChainSpec) -> Result<BigUint, BoundError> {
    let rule = spec.rule.running_max();
    let a: Seq = Rc::new(move |i: &BigUint| rule.eval(i));
    let budget = Rc::new(RefCell::new(Budget { steps: 0 }));
    colored(spec.m, spec.n, &a, &budget)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThmSBound {
    pub t: BigUint,
    pub s: BigUint,
}

/// `s = 2^t·r`, with `t` the chain bound for `a_u = 2^u·r`.
pub fn thm_s_bound(m: usize, n: usize, r: u64) -> Result<ThmSBound, BoundError> {
    let spec = ChainSpec::new(m, n, HeightRule::Doubling { r })?;
    let t = chain_bound(&spec)?;
    let e = t.to_u64().filter(|e| *e <= MAX_BITS).ok_or_else(|| BoundError::TooLarge(format!("2^{t}")))?;
    let s = BigUint::from(r) << e;
    Ok(ThmSBound { t, s })
}

fn grid(m: usize, n: usize, cap: u32) -> Result<Vec<DerivIndex>, BoundError> {
    enumerate_upto(m, n, cap).map_err(|e| BoundError::Invalid(e.to_string()))
}

fn comparable_table(cells: &[DerivIndex]) -> Vec<Vec<bool>> {
    cells
        .iter()
        .map(|x| cells.iter().map(|y| x.below(y).unwrap_or(false) || y.below(x).unwrap_or(false)).collect())
        .collect()
}

/// The largest antichain of `ℕ^m × n` inside height `cap`.
pub fn max_antichain_size(m: usize, n: usize, cap: u32) -> Result<usize, BoundError> {
    let cells = grid(m, n, cap)?;
    let cmp = comparable_table(&cells);
    let mut best = 0;
    let mut visited = 0usize;
    fn go(
        at: usize,
        chosen: &mut Vec<usize>,
        cmp: &[Vec<bool>],
        best: &mut usize,
        visited: &mut usize,
    ) -> Result<(), BoundError> {
        *visited += 1;
        if *visited > STATE_GUARD {
            return Err(BoundError::Guard(STATE_GUARD));
        }
        *best = (*best).max(chosen.len());
        if chosen.len() + (cmp.len() - at) <= *best {
            return Ok(());
        }
        for next in at..cmp.len() {
            if chosen.iter().all(|c| !cmp[*c][next]) {
                chosen.push(next);
                go(next + 1, chosen, cmp, best, visited)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    go(0, &mut Vec::new(), &cmp, &mut best, &mut visited)?;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainWitness {
    pub length: usize,
    pub chain: Vec<Vec<DerivIndex>>,
}

/// The longest chain `S_0 ⊊ S_1 ⊊ …` of antichains with `S_k` inside height
/// `a_k`, over chains of at most `rounds_cap` entries.
pub fn brute_force_max_chain(spec: &ChainSpec, rounds_cap: usize) -> Result<ChainWitness, BoundError> {
    if rounds_cap == 0 {
        return Err(BoundError::Invalid("rounds_cap must be positive".into()));
    }
    let top = (0..rounds_cap).map(|k| spec.rule.at(k)).max().unwrap_or(0);
    let top = u32::try_from(top).map_err(|_| BoundError::Guard(STATE_GUARD))?;
    let cells = grid(spec.m, spec.n, top)?;
    if cells.len() > 128 {
        return Err(BoundError::Guard(STATE_GUARD));
    }
    let cmp = comparable_table(&cells);
    let mut search = Search { spec, cells: &cells, cmp: &cmp, rounds_cap, memo: HashMap::new() };
    let length = search.longest(0, 0)?;
    if length >= rounds_cap {
        return Err(BoundError::RoundCap(rounds_cap));
    }
    let mut chain = Vec::new();
    let (mut k, mut set) = (0usize, 0u128);
    loop {
        chain.push(cells.iter().enumerate().filter(|(i, _)| set >> i & 1 == 1).map(|(_, c)| c.clone()).collect());
        match search.best_step(k, set)? {
            Some(next) => {
                set = next;
                k += 1;
            }
            None => break,
        }
    }
    Ok(ChainWitness { length, chain })
}

struct Search<'a> {
    spec: &'a ChainSpec,
    cells: &'a [DerivIndex],
    cmp: &'a [Vec<bool>],
    rounds_cap: usize,
    memo: HashMap<(usize, u128), usize>,
}

impl Search<'_> {
    fn fits(&self, k: usize, i: usize) -> bool {
        u64::from(self.cells[i].height()) <= self.spec.rule.at(k)
    }

    /// Antichains strictly containing `set` inside height `a_k`.
    fn supersets(&self, k: usize, set: u128) -> Vec<u128> {
        let mut out = Vec::new();
        let candidates: Vec<usize> = (0..self.cells.len())
            .filter(|i| set >> i & 1 == 0 && self.fits(k, *i))
            .filter(|i| (0..self.cells.len()).all(|j| set >> j & 1 == 0 || !self.cmp[*i][j]))
            .collect();
        fn go(at: usize, cur: u128, added: bool, cands: &[usize], cmp: &[Vec<bool>], out: &mut Vec<u128>) {
            if added {
                out.push(cur);
            }
            for (pos, &c) in cands.iter().enumerate().skip(at) {
                let ok = (0..cmp.len()).all(|j| cur >> j & 1 == 0 || !cmp[c][j]);
                if ok {
                    go(pos + 1, cur | 1 << c, true, cands, cmp, out);
                }
            }
        }
        go(0, set, false, &candidates, self.cmp, &mut out);
        out
    }

    /// Entries in the longest chain whose entry `k` is `set`.
    fn longest(&mut self, k: usize, set: u128) -> Result<usize, BoundError> {
        if let Some(v) = self.memo.get(&(k, set)) {
            return Ok(*v);
        }
        if self.memo.len() > STATE_GUARD {
            return Err(BoundError::Guard(STATE_GUARD));
        }
        let fits = (0..self.cells.len()).all(|i| set >> i & 1 == 0 || self.fits(k, i));
        let mut best = if fits { 1 } else { 0 };
        if fits && k + 1 < self.rounds_cap {
            for next in self.supersets(k + 1, set) {
                best = best.max(1 + self.longest(k + 1, next)?);
            }
        }
        self.memo.insert((k, set), best);
        Ok(best)
    }

    fn best_step(&mut self, k: usize, set: u128) -> Result<Option<u128>, BoundError> {
        let here = self.longest(k, set)?;
        if here <= 1 || k + 1 >= self.rounds_cap {
            return Ok(None);
        }
        for next in self.supersets(k + 1, set) {
            if 1 + self.longest(k + 1, next)? == here {
                return Ok(Some(next));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antichains() {
        assert_eq!(max_antichain_size(2, 1, 3).unwrap(), 4);
        assert_eq!(max_antichain_size(1, 1, 5).unwrap(), 1);
        assert_eq!(max_antichain_size(2, 2, 1).unwrap(), 4);
        assert_eq!(max_antichain_size(3, 1, 2).unwrap(), 6);
    }

    #[test]
    fn small_chains() {
        let one = ChainSpec::new(1, 1, HeightRule::Constant(3)).unwrap();
        assert_eq!(brute_force_max_chain(&one, 8).unwrap().length, 2);
        let flat = ChainSpec::new(2, 1, HeightRule::Constant(1)).unwrap();
        let w = brute_force_max_chain(&flat, 8).unwrap();
        assert_eq!(w.length, 3);
        assert_eq!(w.chain.len(), 3);
        assert!(w.chain[0].is_empty());
        assert_eq!(chain_bound(&one).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn bound_dominates_and_grows() {
        let flat = ChainSpec::new(2, 1, HeightRule::Constant(1)).unwrap();
        let taller = ChainSpec::new(2, 1, HeightRule::Constant(2)).unwrap();
        let b1 = chain_bound(&flat).unwrap();
        assert!(b1 >= BigUint::from(3u32));
        assert!(chain_bound(&taller).unwrap() >= b1);
        let s = thm_s_bound(1, 1, 3).unwrap();
        assert_eq!(s.s, BigUint::from(12u32));
    }
}
