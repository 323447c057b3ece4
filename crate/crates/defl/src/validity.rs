//! Bounded validity checking by exhaustive enumeration of small models.
//!
//! A signature fixes the number of worlds, the (named) agents, the
//! propositional variables, and whether models carry a want relation. Every
//! model over the signature is generated exactly once in a fixed order:
//! knowledge comes from set partitions of the worlds (one per agent, so the
//! equivalence conditions hold by construction), friendship from all
//! symmetric irreflexive relations per world, the want relation from all
//! relations per world, and the valuation from all point sets per variable.
//!
//! A formula is valid up to a signature when it holds at every point of
//! every enumerated model. That is evidence for a validity schema, not a
//! proof; countermodels, on the other hand, are definitive and are
//! re-checkable with [`crate::engine::satisfies`].
//!
//! Checks are evaluated with non-strict dynamics: an embedded update is
//! applied structurally even where it breaks a frame condition, since a
//! schema quantifies over models on which, say, a group described by an
//! epistemically uncertain property yields a non-S5 update at points the
//! schema never inspects.

use std::borrow::Cow;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::engine::{full_mask, Dense, EvalError, Rel};
use crate::model::{AgentId, EflModel, Point};
use crate::social::{ck, classic_ck_mask};
use crate::syntax::parser::is_reserved;
use crate::syntax::{expand, AssignRhs, AssignTarget, DynOp, Formula, Program};

/// The finite search space for a bounded check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    max_worlds: usize,
    agents: Vec<AgentId>,
    props: Vec<String>,
    include_d: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidityError {
    #[error("bad signature: {0}")]
    Signature(String),
    #[error("formula uses nominal `{0}`, which is not an agent of the signature")]
    FreeNominal(String),
    #[error("formula reads proposition `{0}`, which is not in the signature")]
    UnknownProp(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Signature {
    pub fn new(
        max_worlds: usize,
        agents: &[&str],
        props: &[&str],
        include_d: bool,
    ) -> Result<Signature, ValidityError> {
        if max_worlds == 0 {
            return Err(ValidityError::Signature("need at least one world".into()));
        }
        if agents.is_empty() {
            return Err(ValidityError::Signature("need at least one agent".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in agents {
            if is_reserved(a) {
                return Err(ValidityError::Signature(format!(
                    "`{a}` is a reserved word"
                )));
            }
            if !seen.insert(*a) {
                return Err(ValidityError::Signature(format!("duplicate agent `{a}`")));
            }
        }
        for p in props {
            if is_reserved(p) {
                return Err(ValidityError::Signature(format!(
                    "`{p}` is a reserved word"
                )));
            }
            if agents.contains(p) {
                return Err(ValidityError::Signature(format!(
                    "`{p}` is both an agent and a proposition"
                )));
            }
        }
        Ok(Signature {
            max_worlds,
            agents: agents.iter().map(|a| AgentId::new(*a)).collect(),
            props: props.iter().map(|p| p.to_string()).collect(),
            include_d,
        })
    }

    pub fn max_worlds(&self) -> usize {
        self.max_worlds
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn include_d(&self) -> bool {
        self.include_d
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} worlds, agents {{{}}}, props {{{}}}{}",
            self.max_worlds,
            self.agents
                .iter()
                .map(|a| a.as_str())
                .collect::<Vec<_>>()
                .join(","),
            self.props.join(","),
            if self.include_d {
                ", with want relation"
            } else {
                ""
            }
        )
    }
}

/// Outcome of a bounded check.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// True at every point of every model over the signature.
    ValidUpTo(Signature),
    /// The first failing model in enumeration order, with a point at which
    /// the checked formula is false.
    Countermodel(EflModel, Point),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::ValidUpTo(_))
    }

    pub fn countermodel(&self) -> Option<(&EflModel, &Point)> {
        match self {
            Verdict::ValidUpTo(_) => None,
            Verdict::Countermodel(m, p) => Some((m, p)),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ValidUpTo(sig) => write!(f, "ValidUpTo({sig})"),
            Verdict::Countermodel(_, p) => write!(f, "Countermodel(falsified at {p})"),
        }
    }
}

/// Checks `phi` at every point of every model over the signature.
pub fn check_valid(phi: &Formula, sig: &Signature) -> Result<Verdict, ValidityError> {
    check_tokens(phi, sig)?;
    let phi = expand(phi);
    let space = SigSpace::reduced(sig, &Relevance::of(&[&phi]));
    let full = full_mask(space.n_points);
    let outcome = space.scan(|dense| {
        let mask = dense.eval(&phi, false)?;
        if mask == full {
            Ok(None)
        } else {
            Ok(Some((!mask & full).trailing_zeros() as usize))
        }
    })?;
    Ok(match outcome {
        None => Verdict::ValidUpTo(sig.clone()),
        Some((idx, point)) => space.countermodel(idx, point),
    })
}

/// Checks that two formulas have the same denotation on every model over the
/// signature (the biconditional is checked pointwise).
pub fn check_equiv(
    lhs: &Formula,
    rhs: &Formula,
    sig: &Signature,
) -> Result<Verdict, ValidityError> {
    check_valid(&lhs.clone().iff(rhs.clone()), sig)
}

/// Compares the program reading of common knowledge, `[c_θ]φ`, with the
/// classic closure operator `C_G φ` over the explicit member list, point for
/// point on every model. The two sides are computed through independent
/// routes.
pub fn check_common_knowledge_equiv(
    theta: &Formula,
    members: &[&str],
    phi: &Formula,
    sig: &Signature,
) -> Result<Verdict, ValidityError> {
    check_tokens(theta, sig)?;
    check_tokens(phi, sig)?;
    let member_idxs: Vec<usize> = members
        .iter()
        .map(|m| {
            sig.agents
                .iter()
                .position(|a| a.as_str() == *m)
                .ok_or_else(|| ValidityError::FreeNominal(m.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let program_side = Formula::prog_box(ck(theta), phi.clone());
    let phi = expand(phi);
    let program_side = expand(&program_side);
    let space = SigSpace::reduced(sig, &Relevance::of(&[&program_side, &phi]));
    let full = full_mask(space.n_points);
    let outcome = space.scan(|dense| {
        let lhs = dense.eval(&program_side, false)?;
        let rhs = classic_ck_mask(dense, &member_idxs, dense.eval(&phi, false)?);
        if lhs == rhs {
            Ok(None)
        } else {
            Ok(Some(((lhs ^ rhs) & full).trailing_zeros() as usize))
        }
    })?;
    Ok(match outcome {
        None => Verdict::ValidUpTo(sig.clone()),
        Some((idx, point)) => space.countermodel(idx, point),
    })
}

/// Every model over the signature, in enumeration order.
pub fn enumerate(sig: &Signature) -> impl Iterator<Item = EflModel> {
    let space = SigSpace::full(sig);
    let total = space.total;
    (0..total).map(move |idx| space.model_at(idx))
}

/// The number of models over the signature.
pub fn model_count(sig: &Signature) -> u64 {
    SigSpace::full(sig).total
}

/// Which model components a formula can observe.
///
/// The checks project a model's unobservable components to their canonical
/// minimum (no friendship, no wants, empty valuation) instead of enumerating
/// them: a formula that never reads the friendship relation takes the same
/// truth value on all models differing only there, and the lexicographically
/// first countermodel of such a formula carries the minimal skipped digits,
/// so verdicts — including which countermodel is found — are identical to
/// the unreduced sweep.
struct Relevance {
    uses_f: bool,
    uses_d: bool,
    props: std::collections::BTreeSet<String>,
}

impl Relevance {
    /// Joint relevance of already-expanded formulas.
    fn of(formulas: &[&Formula]) -> Relevance {
        let mut rel = Relevance {
            uses_f: false,
            uses_d: false,
            props: Default::default(),
        };
        for f in formulas {
            rel.walk(f);
        }
        rel
    }

    fn walk(&mut self, phi: &Formula) {
        match phi {
            Formula::Bool(_) | Formula::Nom(_) => {}
            Formula::Prop(t) => {
                self.props.insert(t.clone());
            }
            Formula::Not(f)
            | Formula::BoxK(f)
            | Formula::BoxA(f)
            | Formula::At(_, f)
            | Formula::Down(_, f) => self.walk(f),
            Formula::BoxF(f) => {
                self.uses_f = true;
                self.walk(f);
            }
            Formula::BoxD(f) => {
                self.uses_d = true;
                self.walk(f);
            }
            Formula::And(a, b) => {
                self.walk(a);
                self.walk(b);
            }
            Formula::ProgBox(p, f) => {
                self.walk_program(p);
                self.walk(f);
            }
            Formula::Dyn(op, f) => {
                let trans_list = match op {
                    DynOp::Trans(t) => vec![t],
                    DynOp::Gddl(g) => {
                        let mut v: Vec<_> = g.actions().iter().map(|(_, t)| t).collect();
                        v.push(g.integrate());
                        v
                    }
                };
                for t in trans_list {
                    for (_, rhs) in t.assignments() {
                        match rhs {
                            AssignRhs::Program(p) => self.walk_program(p),
                            AssignRhs::Formula(f) => self.walk(f),
                        }
                    }
                }
                self.walk(f);
            }
            Formula::Sugar(_) => self.walk(&expand(phi)),
        }
    }

    fn walk_program(&mut self, p: &Program) {
        match p {
            Program::K | Program::A | Program::Internal(_) => {}
            Program::F => self.uses_f = true,
            Program::D => self.uses_d = true,
            Program::Test(f) => self.walk(f),
            Program::Seq(a, b) | Program::Union(a, b) => {
                self.walk_program(a);
                self.walk_program(b);
            }
            Program::Star(inner) => self.walk_program(inner),
        }
    }
}

// ---------------------------------------------------------------------------

/// Tokens read by the formula must be interpretable over the signature:
/// nominals must name signature agents, and any proposition read must either
/// be in the signature or assigned somewhere in the formula itself.
fn check_tokens(phi: &Formula, sig: &Signature) -> Result<(), ValidityError> {
    for n in crate::syntax::free_nominals(phi) {
        if !sig.agents.iter().any(|a| a.as_str() == n) {
            return Err(ValidityError::FreeNominal(n));
        }
    }
    let mut reads = std::collections::BTreeSet::new();
    let mut assigns = std::collections::BTreeSet::new();
    collect_props(phi, &mut reads, &mut assigns);
    for p in reads {
        if !sig.props.contains(&p) && !assigns.contains(&p) {
            return Err(ValidityError::UnknownProp(p));
        }
    }
    Ok(())
}

fn collect_props(
    phi: &Formula,
    reads: &mut std::collections::BTreeSet<String>,
    assigns: &mut std::collections::BTreeSet<String>,
) {
    match phi {
        Formula::Bool(_) | Formula::Nom(_) => {}
        Formula::Prop(t) => {
            reads.insert(t.clone());
        }
        Formula::Not(f)
        | Formula::BoxK(f)
        | Formula::BoxF(f)
        | Formula::BoxA(f)
        | Formula::BoxD(f)
        | Formula::At(_, f)
        | Formula::Down(_, f) => collect_props(f, reads, assigns),
        Formula::And(a, b) => {
            collect_props(a, reads, assigns);
            collect_props(b, reads, assigns);
        }
        Formula::ProgBox(p, f) => {
            collect_props_program(p, reads, assigns);
            collect_props(f, reads, assigns);
        }
        Formula::Dyn(op, f) => {
            let trans_list = match op {
                DynOp::Trans(t) => vec![t],
                DynOp::Gddl(g) => {
                    let mut v: Vec<_> = g.actions().iter().map(|(_, t)| t).collect();
                    v.push(g.integrate());
                    v
                }
            };
            for t in trans_list {
                for (target, rhs) in t.assignments() {
                    if let AssignTarget::Prop(tok) = target {
                        assigns.insert(tok.clone());
                    }
                    match rhs {
                        AssignRhs::Program(p) => collect_props_program(p, reads, assigns),
                        AssignRhs::Formula(f) => collect_props(f, reads, assigns),
                    }
                }
            }
            collect_props(f, reads, assigns);
        }
        Formula::Sugar(_) => collect_props(&expand(phi), reads, assigns),
    }
}

fn collect_props_program(
    p: &Program,
    reads: &mut std::collections::BTreeSet<String>,
    assigns: &mut std::collections::BTreeSet<String>,
) {
    match p {
        Program::K | Program::F | Program::A | Program::D | Program::Internal(_) => {}
        Program::Test(f) => collect_props(f, reads, assigns),
        Program::Seq(a, b) | Program::Union(a, b) => {
            collect_props_program(a, reads, assigns);
            collect_props_program(b, reads, assigns);
        }
        Program::Star(inner) => collect_props_program(inner, reads, assigns),
    }
}

/// Precomputed enumeration space: digit radices and partition tables.
struct SigSpace {
    sig: Signature,
    n_worlds: usize,
    n_agents: usize,
    n_points: usize,
    world_names: Vec<String>,
    /// All set partitions of the worlds, as per-world cell masks, in
    /// restricted-growth-string order.
    partitions: Vec<Vec<u64>>,
    /// Unordered agent pairs `(i, j)` with `i < j`, lexicographic.
    f_pairs: Vec<(usize, usize)>,
    /// Digit radices, slowest-varying first: one partition choice per agent,
    /// one friendship choice per world, one want choice per world (when
    /// enabled), one valuation choice per proposition.
    radices: Vec<u64>,
    total: u64,
}

impl SigSpace {
    fn full(sig: &Signature) -> SigSpace {
        SigSpace::build(sig, None)
    }

    fn reduced(sig: &Signature, rel: &Relevance) -> SigSpace {
        SigSpace::build(sig, Some(rel))
    }

    fn build(sig: &Signature, rel: Option<&Relevance>) -> SigSpace {
        let n_worlds = sig.max_worlds;
        let n_agents = sig.agents.len();
        let n_points = n_worlds * n_agents;
        assert!(
            n_points <= crate::engine::MAX_POINTS,
            "signature exceeds the {} point cap",
            crate::engine::MAX_POINTS
        );
        let partitions = partitions_as_masks(n_worlds);
        let mut f_pairs = Vec::new();
        for i in 0..n_agents {
            for j in i + 1..n_agents {
                f_pairs.push((i, j));
            }
        }
        let enumerate_f = rel.is_none_or(|r| r.uses_f);
        let enumerate_d = rel.is_none_or(|r| r.uses_d);
        let f_radix = if enumerate_f {
            1u64 << f_pairs.len()
        } else {
            1
        };
        let d_radix = if enumerate_d {
            1u64 << (n_agents * n_agents)
        } else {
            1
        };
        let mut radices = Vec::new();
        radices.extend(std::iter::repeat_n(partitions.len() as u64, n_agents));
        radices.extend(std::iter::repeat_n(f_radix, n_worlds));
        if sig.include_d {
            radices.extend(std::iter::repeat_n(d_radix, n_worlds));
        }
        for prop in &sig.props {
            let read = rel.is_none_or(|r| r.props.contains(prop));
            radices.push(if read { 1u64 << n_points } else { 1 });
        }
        let total = radices
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r))
            .expect("model space exceeds u64");
        SigSpace {
            sig: sig.clone(),
            n_worlds,
            n_agents,
            n_points,
            world_names: (0..n_worlds).map(|i| format!("w{i}")).collect(),
            partitions,
            f_pairs,
            radices,
            total,
        }
    }

    fn digits(&self, mut idx: u64) -> Vec<u64> {
        let mut digits = vec![0u64; self.radices.len()];
        for (slot, &radix) in self.radices.iter().enumerate().rev() {
            digits[slot] = idx % radix;
            idx /= radix;
        }
        digits
    }

    fn dense_at(&self, idx: u64) -> Dense<'_> {
        let digits = self.digits(idx);
        let (nw, na, n) = (self.n_worlds, self.n_agents, self.n_points);
        let mut k = Rel::empty(n);
        for (a, digit) in digits[..na].iter().enumerate() {
            let cells = &self.partitions[*digit as usize];
            for (u, cell) in cells.iter().enumerate() {
                let mut mates = *cell;
                let mut row = 0u64;
                while mates != 0 {
                    let v = mates.trailing_zeros() as usize;
                    mates &= mates - 1;
                    row |= 1u64 << (v * na + a);
                }
                k.rows[u * na + a] = row;
            }
        }
        let mut f = Rel::empty(n);
        for w in 0..nw {
            let bits = digits[na + w];
            for (b, &(i, j)) in self.f_pairs.iter().enumerate() {
                if bits >> b & 1 == 1 {
                    f.set(w * na + i, w * na + j);
                    f.set(w * na + j, w * na + i);
                }
            }
        }
        let mut cursor = na + nw;
        let d = if self.sig.include_d {
            let mut d = Rel::empty(n);
            for w in 0..nw {
                let bits = digits[cursor + w];
                for i in 0..na {
                    for j in 0..na {
                        if bits >> (i * na + j) & 1 == 1 {
                            d.set(w * na + i, w * na + j);
                        }
                    }
                }
            }
            cursor += nw;
            Some(d)
        } else {
            None
        };
        let val = self
            .sig
            .props
            .iter()
            .enumerate()
            .map(|(pi, prop)| (Cow::Borrowed(prop.as_str()), digits[cursor + pi]))
            .collect();
        let g = self
            .sig
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| (Cow::Borrowed(a.as_str()), i))
            .collect();
        Dense {
            n_worlds: nw,
            n_agents: na,
            world_names: self
                .world_names
                .iter()
                .map(|w| Cow::Borrowed(w.as_str()))
                .collect(),
            agent_names: self.sig.agents.iter().map(|a| a.as_str()).collect(),
            k,
            f,
            d,
            g,
            val,
        }
    }

    fn model_at(&self, idx: u64) -> EflModel {
        self.dense_at(idx).to_model()
    }

    fn countermodel(&self, idx: u64, point: usize) -> Verdict {
        let dense = self.dense_at(idx);
        let model = dense.to_model();
        let point = dense.point_of(point);
        Verdict::Countermodel(model, point)
    }

    /// Runs `pred` over every model in enumeration order, in parallel, and
    /// returns the first (lowest-index) failure. Workers race only on
    /// whether some failure exists; which one wins is index order, so the
    /// result equals the sequential scan.
    fn scan<F>(&self, pred: F) -> Result<Option<(u64, usize)>, ValidityError>
    where
        F: Fn(&Dense<'_>) -> Result<Option<usize>, EvalError> + Sync,
    {
        enum Hit {
            Fail(u64, usize),
            Error(u64, EvalError),
        }
        impl Hit {
            fn index(&self) -> u64 {
                match self {
                    Hit::Fail(i, _) | Hit::Error(i, _) => *i,
                }
            }
        }

        let workers = std::thread::available_parallelism()
            .map(|n| n.get() as u64)
            .unwrap_or(1)
            .min(self.total.max(1));
        let chunk = self.total.div_ceil(workers.max(1));
        let best = AtomicU64::new(u64::MAX);
        let results: Vec<Option<Hit>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let pred = &pred;
                    let best = &best;
                    let start = w * chunk;
                    let end = ((w + 1) * chunk).min(self.total);
                    scope.spawn(move || {
                        for idx in start..end {
                            if idx % 1024 == 0 && best.load(Ordering::Relaxed) < idx {
                                return None;
                            }
                            let dense = self.dense_at(idx);
                            match pred(&dense) {
                                Ok(None) => {}
                                Ok(Some(point)) => {
                                    best.fetch_min(idx, Ordering::Relaxed);
                                    return Some(Hit::Fail(idx, point));
                                }
                                Err(e) => {
                                    best.fetch_min(idx, Ordering::Relaxed);
                                    return Some(Hit::Error(idx, e));
                                }
                            }
                        }
                        None
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let first = results.into_iter().flatten().min_by_key(|h| h.index());
        match first {
            None => Ok(None),
            Some(Hit::Fail(idx, point)) => Ok(Some((idx, point))),
            Some(Hit::Error(_, e)) => Err(e.into()),
        }
    }
}

/// All set partitions of `{0..n}` in restricted-growth-string order, each as
/// a per-element mask of its cell.
fn partitions_as_masks(n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let mut cells = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                if rgs[i] == rgs[j] {
                    cells[i] |= 1u64 << j;
                }
            }
        }
        out.push(cells);
        // Next restricted growth string: rightmost position that can grow.
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for d in rgs.iter_mut().skip(i + 1) {
                    *d = 0;
                }
                break;
            }
        }
    }
}
