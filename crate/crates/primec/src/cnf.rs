//! Clause-level machinery: literals, clauses, the biconditional CNF encoding
//! of a formula, the dual-rail image used by prime enumeration, and DIMACS
//! export.

use std::fmt;
use std::ops::Not;

use crate::formula::{Formula, VarId, VarTable};

/// A literal, packed as `var << 1 | sign` with sign bit 1 for negation.
/// Ordering therefore sorts by variable id with the positive literal first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(v: VarId, positive: bool) -> Lit {
        Lit(v.0 << 1 | u32::from(!positive))
    }

    pub fn positive(v: VarId) -> Lit {
        Lit::new(v, true)
    }

    pub fn negative(v: VarId) -> Lit {
        Lit::new(v, false)
    }

    pub fn var(self) -> VarId {
        VarId(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for watch lists and the like.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Renders against a name table, e.g. `!a`.
    pub fn render(self, table: &VarTable) -> String {
        let name = table.name(self.var());
        if self.is_positive() {
            name.to_string()
        } else {
            format!("!{name}")
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "v{}", self.var().0)
        } else {
            write!(f, "!v{}", self.var().0)
        }
    }
}

/// A disjunction of literals, stored sorted and duplicate-free. The empty
/// clause is valid (and unsatisfiable).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Normalizes: sorts, drops duplicate literals. Returns `None` when the
    /// literals contain a complementary pair (a tautology has no clause
    /// representation here).
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort();
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].var() == w[1].var() {
                return None;
            }
        }
        Some(Clause { lits })
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

    pub fn contains(&self, l: Lit) -> bool {
        self.lits.binary_search(&l).is_ok()
    }

    /// True iff the clause holds under the given total assignment.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.lits
            .iter()
            .any(|l| assignment[l.var().index()] == l.is_positive())
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

/// Allocator for the shared variable space: input variables occupy the
/// contiguous prefix `0..num_inputs`, every encoder takes fresh ids above
/// that, so separately encoded CNFs never collide on auxiliaries.
#[derive(Clone, Debug)]
pub struct VarSpace {
    num_inputs: usize,
    next: u32,
}

impl VarSpace {
    pub fn for_inputs(num_inputs: usize) -> VarSpace {
        VarSpace {
            num_inputs,
            next: num_inputs as u32,
        }
    }

    pub fn fresh(&mut self) -> VarId {
        let v = VarId(self.next);
        self.next += 1;
        v
    }

    /// Total number of ids handed out, inputs included.
    pub fn len(&self) -> usize {
        self.next as usize
    }

    pub fn is_empty(&self) -> bool {
        self.next == 0
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }
}

/// A CNF over the shared variable space. `num_vars` is the size of the id
/// space the clauses live in; `num_inputs` marks the designated input prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    clauses: Vec<Clause>,
    num_vars: usize,
    num_inputs: usize,
}

impl CnfFormula {
    pub fn new(num_inputs: usize, num_vars: usize) -> CnfFormula {
        CnfFormula {
            clauses: Vec::new(),
            num_vars,
            num_inputs,
        }
    }

    /// Adds a clause; tautological literal sets are dropped.
    pub fn push(&mut self, lits: impl IntoIterator<Item = Lit>) {
        if let Some(c) = Clause::new(lits) {
            for l in c.lits() {
                assert!(l.var().index() < self.num_vars, "literal out of range");
            }
            self.clauses.push(c);
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Total number of literal occurrences.
    pub fn literal_count(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    /// True iff every clause holds under the total assignment.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.evaluate(assignment))
    }

    /// DIMACS text. Variables keep their ids shifted up by one, so the input
    /// variables are exactly `1..=num_inputs`.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "c inputs: variables 1..={}\np cnf {} {}\n",
            self.num_inputs,
            self.num_vars,
            self.clauses.len()
        ));
        for c in &self.clauses {
            for l in c.lits() {
                let v = l.var().0 as i64 + 1;
                let s = if l.is_positive() { v } else { -v };
                out.push_str(&format!("{s} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Biconditional CNF encoding. Each conjunction or disjunction node gets a
/// fresh auxiliary variable constrained in both directions; negation folds
/// into literal polarity and costs nothing. The root literal is asserted as
/// a unit clause.
///
/// Because the definitions are biconditional, projecting the encoding's
/// models onto the input variables is a bijection onto the formula's models.
pub fn tseitin(f: &Formula, space: &mut VarSpace) -> CnfFormula {
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let root = encode(f, space, &mut clauses);
    clauses.push(vec![root]);
    let mut cnf = CnfFormula::new(space.num_inputs(), space.len());
    for c in clauses {
        cnf.push(c);
    }
    cnf
}

fn encode(f: &Formula, space: &mut VarSpace, clauses: &mut Vec<Vec<Lit>>) -> Lit {
    match f {
        Formula::Var(v) => Lit::positive(*v),
        Formula::Not(g) => !encode(g, space, clauses),
        Formula::And(cs) => {
            let ls: Vec<Lit> = cs.iter().map(|c| encode(c, space, clauses)).collect();
            let t = Lit::positive(space.fresh());
            // t <-> l1 & ... & lk
            let mut long = vec![t];
            for &l in &ls {
                clauses.push(vec![!t, l]);
                long.push(!l);
            }
            clauses.push(long);
            t
        }
        Formula::Or(cs) => {
            let ls: Vec<Lit> = cs.iter().map(|c| encode(c, space, clauses)).collect();
            let t = Lit::positive(space.fresh());
            // t <-> l1 | ... | lk
            let mut long = vec![!t];
            for &l in &ls {
                clauses.push(vec![t, !l]);
                long.push(l);
            }
            clauses.push(long);
            t
        }
    }
}

/// Rail variables for the dual-rail image: each input variable `x` owns a
/// pair `(p_x, n_x)` of fresh ids standing for "x occurs positively /
/// negatively in the term".
#[derive(Clone, Debug)]
pub struct DualRailMap {
    pos: Vec<VarId>,
    neg: Vec<VarId>,
}

impl DualRailMap {
    /// Allocates a rail pair per input variable of the space.
    pub fn allocate(space: &mut VarSpace) -> DualRailMap {
        let n = space.num_inputs();
        let mut pos = Vec::with_capacity(n);
        let mut neg = Vec::with_capacity(n);
        for _ in 0..n {
            pos.push(space.fresh());
            neg.push(space.fresh());
        }
        DualRailMap { pos, neg }
    }

    pub fn pos(&self, v: VarId) -> VarId {
        self.pos[v.index()]
    }

    pub fn neg(&self, v: VarId) -> VarId {
        self.neg[v.index()]
    }

    /// Rail carrying the given input literal.
    pub fn rail(&self, l: Lit) -> VarId {
        if l.is_positive() {
            self.pos(l.var())
        } else {
            self.neg(l.var())
        }
    }

    /// Input literal a rail variable stands for, if it is one of ours.
    pub fn decode(&self, rail: VarId) -> Option<Lit> {
        // rails are allocated in pairs, in input order
        for (i, (&p, &n)) in self.pos.iter().zip(&self.neg).enumerate() {
            if rail == p {
                return Some(Lit::positive(VarId(i as u32)));
            }
            if rail == n {
                return Some(Lit::negative(VarId(i as u32)));
            }
        }
        None
    }

    /// All-positive image of a clause over input literals.
    pub fn image(&self, c: &Clause) -> Clause {
        Clause::new(c.lits().iter().map(|&l| Lit::positive(self.rail(l))))
            .expect("rail image cannot be tautological")
    }
}

/// Dual-rail encoding of a clause set over input variables: every clause maps
/// to its all-positive rail image, and each input variable occurring in the
/// set contributes an exclusivity clause `!p_x | !n_x`.
pub fn dual_rail(clauses: &[Clause], map: &DualRailMap, num_vars: usize) -> CnfFormula {
    let mut cnf = CnfFormula::new(0, num_vars);
    let mut occurs: Vec<bool> = Vec::new();
    for c in clauses {
        for l in c.lits() {
            let i = l.var().index();
            if occurs.len() <= i {
                occurs.resize(i + 1, false);
            }
            occurs[i] = true;
        }
        cnf.push(map.image(c).lits().iter().copied());
    }
    for (i, used) in occurs.iter().enumerate() {
        if *used {
            let v = VarId(i as u32);
            cnf.push([Lit::negative(map.pos(v)), Lit::negative(map.neg(v))]);
        }
    }
    cnf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use std::collections::BTreeSet;

    fn lit(v: u32, pos: bool) -> Lit {
        Lit::new(VarId(v), pos)
    }

    #[test]
    fn literal_packing_and_order() {
        let a = lit(3, true);
        assert_eq!(a.var(), VarId(3));
        assert!(a.is_positive());
        assert!(!(!a).is_positive());
        assert_eq!(!!a, a);
        assert!(lit(1, false) < lit(2, true));
        assert!(lit(2, true) < lit(2, false));
    }

    #[test]
    fn clause_normalizes_and_rejects_tautologies() {
        let c = Clause::new([lit(2, false), lit(0, true), lit(2, false)]).unwrap();
        assert_eq!(c.lits(), &[lit(0, true), lit(2, false)]);
        assert!(Clause::new([lit(1, true), lit(1, false)]).is_none());
        assert!(Clause::new([]).unwrap().is_empty());
    }

    fn clause_set(cnf: &CnfFormula) -> BTreeSet<Vec<Lit>> {
        cnf.clauses().iter().map(|c| c.lits().to_vec()).collect()
    }

    #[test]
    fn tseitin_single_variable_is_one_unit() {
        let (f, table) = parse("a").unwrap();
        let mut space = VarSpace::for_inputs(table.len());
        let cnf = tseitin(&f, &mut space);
        assert_eq!(cnf.num_vars(), 1);
        assert_eq!(clause_set(&cnf), BTreeSet::from([vec![lit(0, true)]]));
    }

    #[test]
    fn tseitin_conjunction_is_biconditional() {
        let (f, table) = parse("a & b").unwrap();
        let mut space = VarSpace::for_inputs(table.len());
        let cnf = tseitin(&f, &mut space);
        assert_eq!(cnf.num_vars(), 3);
        let t = lit(2, true);
        assert_eq!(
            clause_set(&cnf),
            BTreeSet::from([
                vec![lit(0, true), !t],
                vec![lit(1, true), !t],
                vec![lit(0, false), lit(1, false), t],
                vec![t],
            ])
        );
    }

    /// Models of the encoding, projected onto inputs, must be exactly the
    /// models of the formula, one encoding model per formula model.
    fn assert_projection_bijection(text: &str) {
        let (f, table) = parse(text).unwrap();
        let n = table.len();
        let mut space = VarSpace::for_inputs(n);
        let cnf = tseitin(&f, &mut space);
        let total = cnf.num_vars();
        assert!(total <= 20, "test formula too large");
        let mut projections = Vec::new();
        for bits in 0..(1u32 << total) {
            let assignment: Vec<bool> = (0..total).map(|i| bits >> i & 1 == 1).collect();
            if cnf.evaluate(&assignment) {
                projections.push(assignment[..n].to_vec());
            }
        }
        let mut models = Vec::new();
        for bits in 0..(1u32 << n) {
            let m: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            if f.evaluate(&m) {
                models.push(m);
            }
        }
        // bijection: counts match and the projected set is the model set
        assert_eq!(projections.len(), models.len(), "{text}");
        let proj_set: BTreeSet<_> = projections.into_iter().collect();
        let model_set: BTreeSet<_> = models.into_iter().collect();
        assert_eq!(proj_set, model_set, "{text}");
    }

    #[test]
    fn tseitin_projection_running_example() {
        let (f, table) = parse("(a & b) | (!a & c)").unwrap();
        let mut space = VarSpace::for_inputs(table.len());
        let cnf = tseitin(&f, &mut space);
        assert_eq!(cnf.num_vars(), 6, "two ands and one or get auxiliaries");
        assert_projection_bijection("(a & b) | (!a & c)");
    }

    #[test]
    fn tseitin_projection_small_corpus() {
        for text in [
            "a",
            "!a",
            "a & b",
            "a | b",
            "!(a & b)",
            "!!(a | !b)",
            "(a | b) & (!a | !b)",
            "a & !a",
            "a | !a",
            "((a & b) | c) & !d",
            "!(!(a & b) | !(c | d))",
            "(a | b | c | d) & (!a | !b) & (!c | !d)",
        ] {
            assert_projection_bijection(text);
        }
    }

    #[test]
    fn shared_space_keeps_auxiliaries_disjoint() {
        let (f, table) = parse("(a & b) | (!a & c)").unwrap();
        let mut space = VarSpace::for_inputs(table.len());
        let pos = tseitin(&f, &mut space);
        let neg = tseitin(&f.negated(), &mut space);
        let aux = |cnf: &CnfFormula| -> BTreeSet<u32> {
            cnf.clauses()
                .iter()
                .flat_map(|c| c.lits().iter().map(|l| l.var().0))
                .filter(|v| *v >= 3)
                .collect()
        };
        assert!(aux(&pos).is_disjoint(&aux(&neg)));
        assert_eq!(space.len(), 9);
    }

    #[test]
    fn dimacs_export_lists_inputs_first() {
        let (f, table) = parse("a & !b").unwrap();
        let mut space = VarSpace::for_inputs(table.len());
        let cnf = tseitin(&f, &mut space);
        let text = cnf.to_dimacs();
        assert!(text.starts_with("c inputs: variables 1..=2\np cnf 3 4\n"));
        assert!(text.lines().all(|l| l.starts_with('c')
            || l.starts_with('p')
            || l.ends_with(" 0")));
    }

    #[test]
    fn dual_rail_images_and_exclusivity() {
        // cover {(a | c), (!a | b)} over inputs a,b,c with rails 3..=8
        let mut space = VarSpace::for_inputs(3);
        let map = DualRailMap::allocate(&mut space);
        assert_eq!(map.pos(VarId(0)), VarId(3));
        assert_eq!(map.neg(VarId(0)), VarId(4));
        let c1 = Clause::new([lit(0, true), lit(2, true)]).unwrap();
        let c2 = Clause::new([lit(0, false), lit(1, true)]).unwrap();
        let h = dual_rail(&[c1, c2], &map, space.len());
        let set = clause_set(&h);
        assert!(set.contains(&vec![lit(3, true), lit(7, true)]));
        assert!(set.contains(&vec![lit(4, true), lit(5, true)]));
        // exclusivity for each of a, b, c
        assert!(set.contains(&vec![lit(3, false), lit(4, false)]));
        assert!(set.contains(&vec![lit(5, false), lit(6, false)]));
        assert!(set.contains(&vec![lit(7, false), lit(8, false)]));
        assert_eq!(h.len(), 5);
    }

    #[test]
    fn dual_rail_empty_clause_stays_empty() {
        let mut space = VarSpace::for_inputs(1);
        let map = DualRailMap::allocate(&mut space);
        let h = dual_rail(&[Clause::new([]).unwrap()], &map, space.len());
        assert_eq!(h.len(), 1);
        assert!(h.clauses()[0].is_empty());
    }

    #[test]
    fn dual_rail_skips_exclusivity_for_absent_variables() {
        let mut space = VarSpace::for_inputs(3);
        let map = DualRailMap::allocate(&mut space);
        let only_b = Clause::new([lit(1, false)]).unwrap();
        let h = dual_rail(&[only_b], &map, space.len());
        // one image plus one exclusivity clause, nothing for a or c
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn rail_decode_inverts_rail() {
        let mut space = VarSpace::for_inputs(2);
        let map = DualRailMap::allocate(&mut space);
        for l in [lit(0, true), lit(0, false), lit(1, true), lit(1, false)] {
            assert_eq!(map.decode(map.rail(l)), Some(l));
        }
        assert_eq!(map.decode(VarId(0)), None);
    }
}
