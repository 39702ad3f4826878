//! Phase two: enumerate all prime implicants of a compiled cover by walking
//! the subset-minimal models of its dual-rail image, plus the duality wrapper
//! that turns the same machinery into prime implicate compilation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::cnf::{dual_rail, tseitin, Clause, DualRailMap, Lit, VarSpace};
use crate::cover::{compile_cover, Cover};
use crate::formula::{Formula, VarId, VarTable};
use crate::sat::{SolveResult, Solver};
use crate::shrink::ShrinkConfig;
use crate::stats::{RunStats, Trace};
use crate::Error;

/// Which prime set a run produces.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Implicants,
    Implicates,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Implicants => "implicants",
            Mode::Implicates => "implicates",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "implicants" => Ok(Mode::Implicants),
            "implicates" => Ok(Mode::Implicates),
            other => Err(format!("unknown mode `{other}` (implicants|implicates)")),
        }
    }
}

/// A consistent conjunction of input literals that implies the formula and
/// loses that property if any literal is dropped. Literals are kept sorted by
/// variable id; the empty term is the constant TRUE.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PrimeTerm {
    lits: Vec<Lit>,
}

impl PrimeTerm {
    /// Panics if two literals share a variable: a term must be consistent.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> PrimeTerm {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort();
        for w in lits.windows(2) {
            assert!(w[0].var() != w[1].var(), "inconsistent term");
        }
        PrimeTerm { lits }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// True iff the assignment agrees with every literal of the term.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.lits
            .iter()
            .all(|l| assignment[l.var().index()] == l.is_positive())
    }

    /// The clause equivalent to the term's negation.
    pub fn negated_clause(&self) -> PrimeClause {
        PrimeClause::new(self.lits.iter().map(|&l| !l))
    }

    pub fn render(&self, table: &VarTable) -> String {
        if self.lits.is_empty() {
            return "TRUE".to_string();
        }
        self.lits
            .iter()
            .map(|l| l.render(table))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

/// A clause of input literals implied by the formula and minimal under
/// literal removal. The empty clause is the constant FALSE.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PrimeClause {
    lits: Vec<Lit>,
}

impl PrimeClause {
    /// Panics if two literals share a variable: such a clause is a tautology
    /// and cannot be an implicate of interest.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> PrimeClause {
        let c = Clause::new(lits).expect("tautological clause");
        PrimeClause {
            lits: c.lits().to_vec(),
        }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn as_clause(&self) -> Clause {
        Clause::new(self.lits.iter().copied()).unwrap()
    }

    /// The term equivalent to the clause's negation.
    pub fn negated_term(&self) -> PrimeTerm {
        PrimeTerm::new(self.lits.iter().map(|&l| !l))
    }

    pub fn render(&self, table: &VarTable) -> String {
        if self.lits.is_empty() {
            return "FALSE".to_string();
        }
        self.lits
            .iter()
            .map(|l| l.render(table))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

/// The complete prime set of a formula, canonically ordered: literals within
/// an item sorted by variable id, items sorted lexicographically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PrimeSet {
    Implicants(Vec<PrimeTerm>),
    Implicates(Vec<PrimeClause>),
}

impl PrimeSet {
    pub fn mode(&self) -> Mode {
        match self {
            PrimeSet::Implicants(_) => Mode::Implicants,
            PrimeSet::Implicates(_) => Mode::Implicates,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PrimeSet::Implicants(v) => v.len(),
            PrimeSet::Implicates(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One prime per line, in canonical order.
    pub fn render(&self, table: &VarTable) -> String {
        let mut out = String::new();
        match self {
            PrimeSet::Implicants(v) => {
                for t in v {
                    out.push_str(&t.render(table));
                    out.push('\n');
                }
            }
            PrimeSet::Implicates(v) => {
                for c in v {
                    out.push_str(&c.render(table));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Greedily shrinks a hitting set `s` of the all-positive `images` to a
/// subset-minimal one, removing candidates in reverse of the given order.
/// Every surviving element is critical: some image is hit by it alone.
///
/// Panics if some image is not hit by `s` at all.
pub fn minimize_model(s: &[VarId], images: &[Clause]) -> Vec<VarId> {
    let mut occ: HashMap<VarId, Vec<usize>> = HashMap::new();
    for (i, img) in images.iter().enumerate() {
        for l in img.lits() {
            occ.entry(l.var()).or_default().push(i);
        }
    }
    let in_s: std::collections::HashSet<VarId> = s.iter().copied().collect();
    let mut hits: Vec<usize> = images
        .iter()
        .map(|img| img.lits().iter().filter(|l| in_s.contains(&l.var())).count())
        .collect();
    for (i, h) in hits.iter().enumerate() {
        assert!(*h > 0, "image clause {i} is not hit by the model");
    }
    let mut kept = vec![true; s.len()];
    for i in (0..s.len()).rev() {
        let d = s[i];
        let images_of_d = occ.get(&d).map(Vec::as_slice).unwrap_or(&[]);
        if images_of_d.iter().all(|&j| hits[j] >= 2) {
            kept[i] = false;
            for &j in images_of_d {
                hits[j] -= 1;
            }
        }
    }
    s.iter()
        .zip(kept)
        .filter_map(|(d, k)| k.then_some(*d))
        .collect()
}

/// All prime implicants of a cover (hence of the formula it is equivalent
/// to): dual-rail encode the cover, then repeatedly solve, minimize the
/// model, decode it as a term, and block it.
pub fn compile_all_implicants(
    cover: &Cover,
    space: &mut VarSpace,
    deadline: Option<Instant>,
    trace: &mut Trace,
) -> Result<Vec<PrimeTerm>, Error> {
    let map = DualRailMap::allocate(space);
    let images: Vec<Clause> = cover.clauses().iter().map(|c| map.image(c)).collect();
    let h_cnf = dual_rail(cover.clauses(), &map, space.len());
    let mut h = Solver::from_cnf(&h_cnf);

    // rails that can appear in a minimal model, in decode order
    let mut rails: Vec<VarId> = images
        .iter()
        .flat_map(|img| img.lits().iter().map(|l| l.var()))
        .collect();
    rails.sort();
    rails.dedup();

    let mut terms = Vec::new();
    loop {
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return Err(Error::Timeout);
            }
        }
        match h.solve(&[]) {
            SolveResult::Unsat(_) => break,
            SolveResult::Sat(model) => {
                let s: Vec<VarId> = rails
                    .iter()
                    .copied()
                    .filter(|&r| model.value(r))
                    .collect();
                let minimal = minimize_model(&s, &images);
                let term = PrimeTerm::new(minimal.iter().map(|&r| {
                    map.decode(r).expect("rail variable with no decoding")
                }));
                // block this minimal model and with it all of its supersets
                let block: Vec<Lit> = minimal.iter().map(|&r| Lit::negative(r)).collect();
                h.add_clause(&block);
                terms.push(term);
                trace.enum_models += 1;
            }
        }
    }
    trace.phase2_solver_calls += h.stats().solves;
    terms.sort();
    Ok(terms)
}

/// Everything a pipeline run produces.
#[derive(Debug)]
pub struct Compilation {
    pub primes: PrimeSet,
    pub cover: Cover,
    pub stats: RunStats,
    pub trace: Trace,
}

/// Runs the full pipeline on `f`: encode, compile a cover, enumerate primes.
/// In implicate mode the pipeline runs on the negated formula and the
/// resulting terms are negated into clauses.
pub fn compile(
    f: &Formula,
    table: &VarTable,
    mode: Mode,
    cfg: &ShrinkConfig,
    deadline: Option<Instant>,
) -> Result<Compilation, Error> {
    compile_with(f, table, mode, cfg, deadline, false)
}

/// [`compile`] with an extra switch that makes the solvers emit per-solve
/// trace lines on stderr.
pub fn compile_with(
    f: &Formula,
    table: &VarTable,
    mode: Mode,
    cfg: &ShrinkConfig,
    deadline: Option<Instant>,
    solver_trace: bool,
) -> Result<Compilation, Error> {
    let work = match mode {
        Mode::Implicants => f.clone(),
        Mode::Implicates => f.negated(),
    };
    let mut trace = Trace::default();

    let t0 = Instant::now();
    let mut space = VarSpace::for_inputs(table.len());
    let sigma = tseitin(&work, &mut space);
    let sigma_neg = tseitin(&work.negated(), &mut space);
    let cover = compile_cover(&sigma, &sigma_neg, cfg, deadline, solver_trace, &mut trace)?;
    let phase1 = t0.elapsed();

    let t1 = Instant::now();
    let terms = compile_all_implicants(&cover, &mut space, deadline, &mut trace)?;
    let phase2 = t1.elapsed();

    let primes = match mode {
        Mode::Implicants => PrimeSet::Implicants(terms),
        Mode::Implicates => {
            let mut clauses: Vec<PrimeClause> =
                terms.iter().map(PrimeTerm::negated_clause).collect();
            clauses.sort();
            PrimeSet::Implicates(clauses)
        }
    };

    let stats = RunStats {
        mode,
        input: String::new(),
        vars: table.len(),
        cover_clauses: cover.len(),
        cover_literals: cover.literal_count(),
        primes: primes.len(),
        solver_calls: trace.phase1_solver_calls + trace.phase2_solver_calls,
        shrink_passes: trace.total_shrink_passes(),
        phase1_ms: phase1.as_millis() as u64,
        phase2_ms: phase2.as_millis() as u64,
        cost: None,
        seed: cfg.seed,
        strategy: cfg.strategy,
        iterations: cfg.bound,
    };
    Ok(Compilation {
        primes,
        cover,
        stats,
        trace,
    })
}

/// All prime implicates of `f`, by duality: the prime implicants of `!f`,
/// each negated into a clause.
pub fn compile_all_implicates(
    f: &Formula,
    table: &VarTable,
    cfg: &ShrinkConfig,
) -> Result<PrimeSet, Error> {
    Ok(compile(f, table, Mode::Implicates, cfg, None)?.primes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn lit(v: u32, pos: bool) -> Lit {
        Lit::new(VarId(v), pos)
    }

    #[test]
    fn term_and_clause_render() {
        let (_, table) = parse("a & !b & c").unwrap();
        let t = PrimeTerm::new([lit(2, true), lit(0, true), lit(1, false)]);
        assert_eq!(t.render(&table), "a & !b & c");
        assert_eq!(PrimeTerm::new([]).render(&table), "TRUE");
        let c = t.negated_clause();
        assert_eq!(c.render(&table), "!a | b | !c");
        assert_eq!(PrimeClause::new([]).render(&table), "FALSE");
        assert_eq!(c.negated_term(), t);
    }

    #[test]
    #[should_panic(expected = "inconsistent term")]
    fn inconsistent_term_panics() {
        PrimeTerm::new([lit(0, true), lit(0, false)]);
    }

    #[test]
    fn minimize_drops_redundant_highest_first() {
        // images {(3 | 7), (4 | 5)} over rails, S = {3, 5, 7}
        let images = vec![
            Clause::new([lit(3, true), lit(7, true)]).unwrap(),
            Clause::new([lit(4, true), lit(5, true)]).unwrap(),
        ];
        let s = [VarId(3), VarId(5), VarId(7)];
        assert_eq!(minimize_model(&s, &images), vec![VarId(3), VarId(5)]);
    }

    #[test]
    fn minimize_keeps_already_minimal_model() {
        let images = vec![
            Clause::new([lit(1, true)]).unwrap(),
            Clause::new([lit(2, true)]).unwrap(),
        ];
        let s = [VarId(1), VarId(2)];
        assert_eq!(minimize_model(&s, &images), vec![VarId(1), VarId(2)]);
    }

    #[test]
    fn minimize_of_empty_images_empties_everything() {
        assert_eq!(minimize_model(&[VarId(5)], &[]), Vec::<VarId>::new());
    }

    #[test]
    #[should_panic(expected = "not hit")]
    fn minimize_rejects_non_model() {
        let images = vec![Clause::new([lit(1, true)]).unwrap()];
        minimize_model(&[VarId(2)], &images);
    }
}
