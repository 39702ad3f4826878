//! Brute-force ground truth for small instances. Nothing in here touches the
//! solver stack: every answer comes from plain enumeration over truth tables,
//! so oracle results are trustworthy yardsticks for the pipeline.
//!
//! Each operation carries an explicit budget and refuses larger inputs with
//! [`Error::OracleBudget`] instead of silently taking forever.

use itertools::Itertools;

use crate::cnf::{Clause, CnfFormula, Lit};
use crate::enumerate::{PrimeClause, PrimeTerm};
use crate::formula::{Formula, VarId};
use crate::Error;

/// Hard cap on truth-table width.
pub const MAX_TABLE_VARS: usize = 24;
/// Cap for prime-set enumeration (3^n subcubes get scanned).
pub const MAX_PRIME_VARS: usize = 12;
/// Cap for equivalence checking.
pub const MAX_EQUIV_VARS: usize = 20;
/// Cap on assumption count for minimum-core search.
pub const MAX_CORE_ASSUMPTIONS: usize = 16;
/// Cap on CNF width for minimum-core search.
pub const MAX_CORE_VARS: usize = 20;

/// Truth table of a formula over variables `0..num_vars`; row `r` assigns
/// variable `i` the bit `r >> i & 1`.
pub struct TruthTable {
    num_vars: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn of_formula(f: &Formula, num_vars: usize) -> Result<TruthTable, Error> {
        if num_vars > MAX_TABLE_VARS {
            return Err(Error::OracleBudget(format!(
                "truth table over {num_vars} variables (limit {MAX_TABLE_VARS})"
            )));
        }
        let rows = 1usize << num_vars;
        let mut bits = vec![0u64; rows.div_ceil(64)];
        let mut buf = vec![false; num_vars];
        for r in 0..rows {
            fill_assignment(r, &mut buf);
            if f.evaluate(&buf) {
                bits[r / 64] |= 1 << (r % 64);
            }
        }
        Ok(TruthTable { num_vars, bits })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_true(&self, row: usize) -> bool {
        self.bits[row / 64] >> (row % 64) & 1 == 1
    }

    pub fn count_models(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }
}

fn fill_assignment(row: usize, buf: &mut [bool]) {
    for (i, slot) in buf.iter_mut().enumerate() {
        *slot = row >> i & 1 == 1;
    }
}

/// Iterates the rows of the subcube fixing `base` on `mask` and calls `pred`;
/// returns true iff `pred` holds on every row.
fn subcube_all(num_vars: usize, mask: usize, base: usize, mut pred: impl FnMut(usize) -> bool) -> bool {
    let free = !mask & ((1usize << num_vars) - 1);
    let mut s = free;
    loop {
        if !pred(base | s) {
            return false;
        }
        if s == 0 {
            return true;
        }
        s = (s - 1) & free;
    }
}

/// All prime implicants of `f`, canonically sorted. Enumerates every
/// consistent term (3^n of them), keeps the implicants, then filters the
/// subset-minimal ones.
pub fn brute_prime_implicants(f: &Formula, num_vars: usize) -> Result<Vec<PrimeTerm>, Error> {
    if num_vars > MAX_PRIME_VARS {
        return Err(Error::OracleBudget(format!(
            "prime enumeration over {num_vars} variables (limit {MAX_PRIME_VARS})"
        )));
    }
    let tt = TruthTable::of_formula(f, num_vars)?;
    let full = (1usize << num_vars) - 1;
    let mut implicants = std::collections::HashSet::new();
    for mask in 0..=full {
        let mut vals = mask;
        loop {
            if subcube_all(num_vars, mask, vals, |r| tt.is_true(r)) {
                implicants.insert((mask, vals));
            }
            if vals == 0 {
                break;
            }
            vals = (vals - 1) & mask;
        }
    }
    let mut primes = Vec::new();
    for &(mask, vals) in &implicants {
        let mut prime = true;
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if implicants.contains(&(mask ^ bit, vals & !bit)) {
                prime = false;
                break;
            }
            rest ^= bit;
        }
        if prime {
            primes.push(term_of(mask, vals));
        }
    }
    primes.sort();
    Ok(primes)
}

/// All prime implicates of `f`, canonically sorted. Dual construction to
/// [`brute_prime_implicants`], written out directly rather than via duality
/// so the two can cross-check each other.
pub fn brute_prime_implicates(f: &Formula, num_vars: usize) -> Result<Vec<PrimeClause>, Error> {
    if num_vars > MAX_PRIME_VARS {
        return Err(Error::OracleBudget(format!(
            "prime enumeration over {num_vars} variables (limit {MAX_PRIME_VARS})"
        )));
    }
    let tt = TruthTable::of_formula(f, num_vars)?;
    let full = (1usize << num_vars) - 1;
    let mut implicates = std::collections::HashSet::new();
    for mask in 0..=full {
        let mut signs = mask;
        loop {
            // the clause is violated exactly on the subcube where every
            // clause variable takes the opposite of its sign
            let base = mask & !signs;
            if subcube_all(num_vars, mask, base, |r| !tt.is_true(r)) {
                implicates.insert((mask, signs));
            }
            if signs == 0 {
                break;
            }
            signs = (signs - 1) & mask;
        }
    }
    let mut primes = Vec::new();
    for &(mask, signs) in &implicates {
        let mut prime = true;
        let mut rest = mask;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if implicates.contains(&(mask ^ bit, signs & !bit)) {
                prime = false;
                break;
            }
            rest ^= bit;
        }
        if prime {
            primes.push(clause_of(mask, signs));
        }
    }
    primes.sort();
    Ok(primes)
}

fn term_of(mask: usize, vals: usize) -> PrimeTerm {
    PrimeTerm::new(bits_of(mask).map(|i| Lit::new(VarId(i as u32), vals >> i & 1 == 1)))
}

fn clause_of(mask: usize, signs: usize) -> PrimeClause {
    PrimeClause::new(bits_of(mask).map(|i| Lit::new(VarId(i as u32), signs >> i & 1 == 1)))
}

fn bits_of(mask: usize) -> impl Iterator<Item = usize> {
    (0..usize::BITS as usize).filter(move |i| mask >> i & 1 == 1)
}

/// Truth-table equivalence of a formula and a clause set over the same
/// variable prefix.
pub fn equivalent(f: &Formula, clauses: &[Clause], num_vars: usize) -> Result<bool, Error> {
    if num_vars > MAX_EQUIV_VARS {
        return Err(Error::OracleBudget(format!(
            "equivalence check over {num_vars} variables (limit {MAX_EQUIV_VARS})"
        )));
    }
    let mut buf = vec![false; num_vars];
    for r in 0..(1usize << num_vars) {
        fill_assignment(r, &mut buf);
        if f.evaluate(&buf) != clauses.iter().all(|c| c.evaluate(&buf)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A minimum-cardinality subset of `assumptions` that is unsatisfiable
/// together with `sigma`, found by checking subsets in increasing size and,
/// within a size, lexicographic index order. The result keeps assumption
/// order.
pub fn brute_min_core(sigma: &CnfFormula, assumptions: &[Lit]) -> Result<Vec<Lit>, Error> {
    if assumptions.len() > MAX_CORE_ASSUMPTIONS {
        return Err(Error::OracleBudget(format!(
            "minimum core over {} assumptions (limit {MAX_CORE_ASSUMPTIONS})",
            assumptions.len()
        )));
    }
    if sigma.num_vars() > MAX_CORE_VARS {
        return Err(Error::OracleBudget(format!(
            "minimum core over a {}-variable CNF (limit {MAX_CORE_VARS})",
            sigma.num_vars()
        )));
    }
    let satisfiable = |subset: &[Lit]| -> bool {
        let mut mask = 0usize;
        let mut base = 0usize;
        for l in subset {
            mask |= 1 << l.var().index();
            if l.is_positive() {
                base |= 1 << l.var().index();
            }
        }
        !subcube_all(sigma.num_vars(), mask, base, |r| {
            let mut buf = vec![false; sigma.num_vars()];
            fill_assignment(r, &mut buf);
            !sigma.evaluate(&buf)
        })
    };
    if satisfiable(assumptions) {
        return Err(Error::Contract(
            "assumptions are satisfiable with the CNF; no core exists".to_string(),
        ));
    }
    for k in 0..=assumptions.len() {
        for subset in (0..assumptions.len()).combinations(k) {
            let lits: Vec<Lit> = subset.iter().map(|&i| assumptions[i]).collect();
            if !satisfiable(&lits) {
                return Ok(lits);
            }
        }
    }
    unreachable!("the full assumption set is unsatisfiable");
}

/// Total literal count of a minimum-literal prime cover of `f`: the cheapest
/// subset of the prime implicates whose conjunction is equivalent to `f`.
/// This is the denominator of the cover cost metric; using the exact minimum
/// is what makes `cost >= 1` a theorem rather than a hope.
///
/// Returns 0 for a tautology (empty cover) and for a contradiction (the
/// empty clause covers everything at zero literals); the cost is undefined
/// in both cases and the caller must treat 0 as "no denominator".
pub fn brute_prime_cover_literals(f: &Formula, num_vars: usize) -> Result<usize, Error> {
    let implicates = brute_prime_implicates(f, num_vars)?;
    let tt = TruthTable::of_formula(f, num_vars)?;
    let rows = 1usize << num_vars;
    let non_models: Vec<usize> = (0..rows).filter(|&r| !tt.is_true(r)).collect();
    if non_models.is_empty() {
        return Ok(0);
    }

    // set cover: every non-model row must be falsified by a chosen implicate
    let covers: Vec<Vec<usize>> = non_models
        .iter()
        .map(|&row| {
            implicates
                .iter()
                .enumerate()
                .filter(|(_, c)| {
                    c.lits().iter().all(|l| {
                        let bit = row >> l.var().index() & 1 == 1;
                        bit != l.is_positive()
                    })
                })
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let weights: Vec<usize> = implicates.iter().map(PrimeClause::len).collect();
    let falsified: Vec<Vec<bool>> = (0..implicates.len())
        .map(|i| {
            (0..non_models.len())
                .map(|r| covers[r].contains(&i))
                .collect()
        })
        .collect();

    // greedy upper bound: best uncovered-gain per literal first
    let mut best = {
        let mut covered = vec![false; non_models.len()];
        let mut total = 0usize;
        while covered.iter().any(|c| !c) {
            let mut pick: Option<usize> = None;
            let mut pick_gain = 0usize;
            for i in 0..implicates.len() {
                let gain = (0..non_models.len())
                    .filter(|&r| !covered[r] && falsified[i][r])
                    .count();
                if gain == 0 {
                    continue;
                }
                let better = match pick {
                    None => true,
                    // gain/weight ratio compared by cross-multiplication
                    Some(p) => gain * weights[p].max(1) > pick_gain * weights[i].max(1),
                };
                if better {
                    pick = Some(i);
                    pick_gain = gain;
                }
            }
            let i = pick.expect("some non-model row is falsified by no implicate");
            for r in 0..non_models.len() {
                if falsified[i][r] {
                    covered[r] = true;
                }
            }
            total += weights[i];
        }
        total
    };

    // exact branch and bound on the first uncovered row
    let min_weight = *weights.iter().min().unwrap();
    fn dfs(
        covered: &mut Vec<bool>,
        current: usize,
        best: &mut usize,
        covers: &[Vec<usize>],
        falsified: &[Vec<bool>],
        weights: &[usize],
        min_weight: usize,
    ) {
        let next = match covered.iter().position(|c| !c) {
            None => {
                *best = (*best).min(current);
                return;
            }
            Some(r) => r,
        };
        if current + min_weight >= *best {
            return;
        }
        for &i in &covers[next] {
            let flipped: Vec<usize> = (0..covered.len())
                .filter(|&r| !covered[r] && falsified[i][r])
                .collect();
            for &r in &flipped {
                covered[r] = true;
            }
            dfs(covered, current + weights[i], best, covers, falsified, weights, min_weight);
            for &r in &flipped {
                covered[r] = false;
            }
        }
    }
    let mut covered = vec![false; non_models.len()];
    dfs(&mut covered, 0, &mut best, &covers, &falsified, &weights, min_weight);
    Ok(best)
}
