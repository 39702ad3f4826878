//! A CDCL SAT solver.
//!
//! Standard architecture: unit propagation over two watched literals with
//! blockers, first-UIP conflict analysis with clause learning and basic
//! minimization, activity-ordered decisions, and Luby restarts. Two traits
//! matter to the rest of the crate and are guaranteed here:
//!
//! * Assumptions are decided first, in the order given. A satisfiable call
//!   therefore explores assumption prefixes exactly as listed, which the
//!   shrinking orders rely on, and [`Solver::last`] exposes the decision
//!   sequence so tests can check it.
//! * An unsatisfiable call returns the subset of the assumptions the
//!   refutation actually used, in assumption order.
//!
//! Learnt clauses are kept forever; the workloads here stay far below the
//! sizes where clause deletion starts to pay.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{CnfFormula, Lit};
use crate::formula::VarId;

/// A total assignment, one boolean per variable.
#[derive(Debug, Clone)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, v: VarId) -> bool {
        self.values[v.index()]
    }

    /// The assignment as a slice indexed by variable id.
    pub fn assignment(&self) -> &[bool] {
        &self.values
    }
}

/// Outcome of one [`Solver::solve`] call.
#[derive(Debug, Clone)]
pub enum SolveResult {
    Sat(Model),
    /// Unsatisfiable under the assumptions. Carries the failed assumptions:
    /// the subset the refutation used, in assumption order. Empty when the
    /// clauses are contradictory without any assumptions.
    Unsat(Vec<Lit>),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

/// Counters accumulated over the lifetime of a solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub solves: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
}

/// What the most recent solve call did, for introspection in tests.
#[derive(Debug, Clone, Default)]
pub struct LastSolve {
    /// Every decision literal in order, assumptions included.
    pub decisions: Vec<Lit>,
    /// Decisions taken from the activity order rather than the assumption
    /// list. Zero means propagation settled everything the assumptions left
    /// open.
    pub heuristic_decisions: u64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: usize,
    /// Some other literal of the clause; if it is already true the clause
    /// needs no work.
    blocker: Lit,
}

#[derive(Debug)]
struct ClauseData {
    lits: Vec<Lit>,
}

/// Binary heap of variables ordered by activity, ties broken towards the
/// smaller id so fresh solvers decide `v0, v1, ...` deterministically.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<u32>,
    /// Position of each variable in `heap`, or `usize::MAX` when absent.
    pos: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl VarOrder {
    fn new_var(&mut self, activity: &[f64]) {
        let v = self.pos.len() as u32;
        self.pos.push(ABSENT);
        self.insert(v, activity);
    }

    fn better(a: u32, b: u32, activity: &[f64]) -> bool {
        let (aa, ab) = (activity[a as usize], activity[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn insert(&mut self, v: u32, activity: &[f64]) {
        if self.pos[v as usize] != ABSENT {
            return;
        }
        self.pos[v as usize] = self.heap.len();
        self.heap.push(v);
        self.up(self.heap.len() - 1, activity);
    }

    fn bumped(&mut self, v: u32, activity: &[f64]) {
        let i = self.pos[v as usize];
        if i != ABSENT {
            self.up(i, activity);
        }
    }

    fn pop(&mut self, activity: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, activity);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(v, self.heap[parent], activity) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn down(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && Self::better(self.heap[right], self.heap[left], activity)
            {
                right
            } else {
                left
            };
            if !Self::better(self.heap[child], v, activity) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}

const ACTIVITY_DECAY: f64 = 0.95;
const ACTIVITY_RESCALE: f64 = 1e100;
const RESTART_BASE: f64 = 100.0;
const RESTART_FACTOR: f64 = 2.0;

enum Search {
    Sat(Model),
    Unsat(Vec<Lit>),
    Restart,
}

/// The solver. Clauses are added at decision level zero and persist across
/// solve calls, as do learnt clauses.
pub struct Solver {
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    activity_inc: f64,
    order: VarOrder,
    saved_phase: Vec<bool>,
    phase_saving: bool,
    seen: Vec<bool>,
    assumptions: Vec<Lit>,
    /// False once the clauses are known contradictory without assumptions.
    ok: bool,
    random_polarity: Option<ChaCha8Rng>,
    trace: bool,
    stats: SolverStats,
    last: LastSolve,
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            activity_inc: 1.0,
            order: VarOrder::default(),
            saved_phase: Vec::new(),
            phase_saving: false,
            seen: Vec::new(),
            assumptions: Vec::new(),
            ok: true,
            random_polarity: None,
            trace: false,
            stats: SolverStats::default(),
            last: LastSolve::default(),
        }
    }

    /// A solver primed with every variable and clause of `cnf`.
    pub fn from_cnf(cnf: &CnfFormula) -> Solver {
        let mut s = Solver::new();
        s.add_cnf(cnf);
        s
    }

    pub fn add_cnf(&mut self, cnf: &CnfFormula) {
        self.ensure_vars(cnf.num_vars());
        for c in cnf.clauses() {
            self.add_clause(c.lits());
        }
    }

    pub fn new_var(&mut self) -> VarId {
        let v = VarId(self.assigns.len() as u32);
        self.assigns.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.saved_phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.new_var(&self.activity);
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.new_var();
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn last(&self) -> &LastSolve {
        &self.last
    }

    /// Enables phase saving: decisions reuse the value a variable last held.
    pub fn set_phase_saving(&mut self, on: bool) {
        self.phase_saving = on;
    }

    /// With a seed, decisions pick their polarity at random (reproducibly);
    /// with `None` they take the saved phase, initially false.
    pub fn set_random_polarity(&mut self, seed: Option<u64>) {
        self.random_polarity = seed.map(ChaCha8Rng::seed_from_u64);
    }

    /// Emit a stderr summary line per solve call.
    pub fn set_trace(&mut self, on: bool) {
        self.trace = on;
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.assigns[l.var().index()].map(|b| b == l.is_positive())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause, simplifying against the level-zero assignment. Returns
    /// false once the clause set is contradictory.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        assert_eq!(self.decision_level(), 0, "clauses are added at the root");
        if !self.ok {
            return false;
        }
        if let Some(m) = lits.iter().map(|l| l.var().index() + 1).max() {
            self.ensure_vars(m);
        }
        let mut ls: Vec<Lit> = lits.to_vec();
        ls.sort();
        ls.dedup();
        let mut kept: Vec<Lit> = Vec::with_capacity(ls.len());
        for (i, &l) in ls.iter().enumerate() {
            if i + 1 < ls.len() && ls[i + 1] == !l {
                return true; // tautological
            }
            match self.lit_value(l) {
                Some(true) => return true, // already satisfied at the root
                Some(false) => {}
                None => kept.push(l),
            }
        }
        match kept.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.unchecked_enqueue(kept[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(ClauseData { lits: kept });
                true
            }
        }
    }

    fn attach(&mut self, c: ClauseData) -> usize {
        let cref = self.clauses.len();
        let w0 = Watcher {
            cref,
            blocker: c.lits[1],
        };
        let w1 = Watcher {
            cref,
            blocker: c.lits[0],
        };
        self.watches[(!c.lits[0]).code()].push(w0);
        self.watches[(!c.lits[1]).code()].push(w1);
        self.clauses.push(c);
        cref
    }

    fn unchecked_enqueue(&mut self, p: Lit, reason: Option<usize>) {
        let v = p.var().index();
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(p.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(p);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        for i in (keep..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            if self.phase_saving {
                self.saved_phase[v] = l.is_positive();
            }
            self.assigns[v] = None;
            self.reason[v] = None;
            self.order.insert(l.var().0, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level as usize);
        self.qhead = keep;
    }

    /// Propagates until fixpoint; returns the conflicting clause if any.
    fn propagate(&mut self) -> Option<usize> {
        let mut confl = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            'watchers: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                // normalize so the falsified watch sits at position 1
                {
                    let lits = &mut self.clauses[w.cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                    debug_assert_eq!(lits[1], false_lit);
                }
                let first = self.clauses[w.cref].lits[0];
                let w = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if self.lit_value(first) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                // look for a non-false literal to watch instead
                let len = self.clauses[w.cref].lits.len();
                for k in 2..len {
                    let lk = self.clauses[w.cref].lits[k];
                    if self.lit_value(lk) != Some(false) {
                        self.clauses[w.cref].lits.swap(1, k);
                        self.watches[(!lk).code()].push(w);
                        continue 'watchers;
                    }
                }
                // none found: the clause is unit or conflicting
                ws[j] = w;
                j += 1;
                if self.lit_value(first) == Some(false) {
                    confl = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.unchecked_enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            let stray = std::mem::replace(&mut self.watches[p.code()], ws);
            self.watches[p.code()].extend(stray);
            if confl.is_some() {
                break;
            }
        }
        confl
    }

    fn bump(&mut self, v: VarId) {
        let i = v.index();
        self.activity[i] += self.activity_inc;
        if self.activity[i] > ACTIVITY_RESCALE {
            for a in &mut self.activity {
                *a *= 1.0 / ACTIVITY_RESCALE;
            }
            self.activity_inc *= 1.0 / ACTIVITY_RESCALE;
        }
        self.order.bumped(v.0, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the level to backtrack to.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::positive(VarId(0))]; // slot 0 placeholder
        let mut path = 0u32;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();

        loop {
            let start = usize::from(p.is_some());
            let lits: Vec<Lit> = self.clauses[confl].lits[start..].to_vec();
            for q in lits {
                let v = q.var();
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.bump(v);
                    self.seen[v.index()] = true;
                    if self.level[v.index()] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            index -= 1;
            while !self.seen[self.trail[index].var().index()] {
                index -= 1;
            }
            let pl = self.trail[index];
            self.seen[pl.var().index()] = false;
            p = Some(pl);
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var().index()].expect("non-decision on conflict path");
        }
        learnt[0] = !p.unwrap();

        let involved: Vec<VarId> = learnt.iter().map(|l| l.var()).collect();
        // drop literals whose reason is subsumed by the rest of the clause
        let mut j = 1;
        for i in 1..learnt.len() {
            let v = learnt[i].var();
            let keep = match self.reason[v.index()] {
                None => true,
                Some(cref) => self.clauses[cref].lits[1..].iter().any(|q| {
                    !self.seen[q.var().index()] && self.level[q.var().index()] > 0
                }),
            };
            if keep {
                learnt[j] = learnt[i];
                j += 1;
            }
        }
        learnt.truncate(j);

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()]
        };
        for v in involved {
            self.seen[v.index()] = false;
        }
        (learnt, bt)
    }

    /// From a root-implied contradiction with assumption `p` (passed negated),
    /// walks the trail to find which assumptions were responsible. Returns
    /// them in assumption order.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut out = vec![p];
        if self.decision_level() > 0 {
            self.seen[p.var().index()] = true;
            for i in (self.trail_lim[0]..self.trail.len()).rev() {
                let x = self.trail[i].var();
                if !self.seen[x.index()] {
                    continue;
                }
                match self.reason[x.index()] {
                    None => {
                        debug_assert!(self.level[x.index()] > 0);
                        out.push(!self.trail[i]);
                    }
                    Some(cref) => {
                        let lits: Vec<Lit> = self.clauses[cref].lits[1..].to_vec();
                        for q in lits {
                            if self.level[q.var().index()] > 0 {
                                self.seen[q.var().index()] = true;
                            }
                        }
                    }
                }
                self.seen[x.index()] = false;
            }
            self.seen[p.var().index()] = false;
        }
        let failed: HashSet<VarId> = out.iter().map(|l| l.var()).collect();
        self.assumptions
            .iter()
            .copied()
            .filter(|a| failed.contains(&a.var()))
            .collect()
    }

    fn pick_branch_lit(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize].is_none() {
                let value = match &mut self.random_polarity {
                    Some(rng) => rng.gen::<bool>(),
                    None => self.saved_phase[v as usize],
                };
                return Some(Lit::new(VarId(v), value));
            }
        }
        None
    }

    fn extract_model(&self) -> Model {
        let values = self
            .assigns
            .iter()
            .map(|a| a.expect("total assignment at sat"))
            .collect();
        let model = Model { values };
        #[cfg(debug_assertions)]
        for c in &self.clauses {
            debug_assert!(
                c.lits
                    .iter()
                    .any(|l| model.value(l.var()) == l.is_positive()),
                "model violates a clause"
            );
        }
        model
    }

    fn search(&mut self, conflict_budget: u64) -> Search {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Search::Unsat(Vec::new());
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.unchecked_enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(ClauseData { lits: learnt });
                    self.unchecked_enqueue(first, Some(cref));
                }
                self.activity_inc *= 1.0 / ACTIVITY_DECAY;
                continue;
            }
            if conflicts >= conflict_budget {
                let keep = (self.assumptions.len() as u32).min(self.decision_level());
                self.cancel_until(keep);
                return Search::Restart;
            }
            let mut next = None;
            while (self.decision_level() as usize) < self.assumptions.len() {
                let p = self.assumptions[self.decision_level() as usize];
                match self.lit_value(p) {
                    Some(true) => self.new_decision_level(), // already implied
                    Some(false) => return Search::Unsat(self.analyze_final(!p)),
                    None => {
                        next = Some(p);
                        break;
                    }
                }
            }
            let p = match next {
                Some(p) => p,
                None => match self.pick_branch_lit() {
                    Some(p) => {
                        self.last.heuristic_decisions += 1;
                        p
                    }
                    None => return Search::Sat(self.extract_model()),
                },
            };
            self.stats.decisions += 1;
            self.last.decisions.push(p);
            self.new_decision_level();
            self.unchecked_enqueue(p, None);
        }
    }

    /// Solves under the given assumptions. Assumption variables must be
    /// distinct and already known to the solver.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.stats.solves += 1;
        self.last = LastSolve::default();
        let mut vars: Vec<u32> = assumptions.iter().map(|l| l.var().0).collect();
        vars.sort_unstable();
        assert!(
            vars.windows(2).all(|w| w[0] != w[1]),
            "duplicate assumption variable"
        );
        for l in assumptions {
            assert!(l.var().index() < self.num_vars(), "assumption var out of range");
        }
        let result = if !self.ok {
            SolveResult::Unsat(Vec::new())
        } else {
            self.assumptions = assumptions.to_vec();
            let mut restarts = 0u64;
            loop {
                let budget = (RESTART_BASE * luby(RESTART_FACTOR, restarts)) as u64;
                match self.search(budget) {
                    Search::Sat(m) => break SolveResult::Sat(m),
                    Search::Unsat(failed) => break SolveResult::Unsat(failed),
                    Search::Restart => restarts += 1,
                }
            }
        };
        self.cancel_until(0);
        self.assumptions.clear();
        if self.trace {
            let outcome = match &result {
                SolveResult::Sat(_) => "sat".to_string(),
                SolveResult::Unsat(f) => format!("unsat failed={}", f.len()),
            };
            eprintln!(
                "c solve#{} assumptions={} {} decisions={} conflicts={} propagations={}",
                self.stats.solves,
                assumptions.len(),
                outcome,
                self.stats.decisions,
                self.stats.conflicts,
                self.stats.propagations,
            );
        }
        result
    }
}

impl Default for Solver {
    fn default() -> Solver {
        Solver::new()
    }
}

/// The Luby restart sequence: 1, 1, 2, 1, 1, 2, 4, ... scaled by `y^k`.
fn luby(y: f64, x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}
