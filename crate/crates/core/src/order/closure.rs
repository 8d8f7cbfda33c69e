//! Incremental deductive closure of a labeled pair set under strict-order
//! semantics.
//!
//! The closure stores positives as a transitively closed relation, indexed both
//! ways (`desc[a]` = descendants of `a`, `anc[b]` = ancestors of `b`), and
//! negatives as a second relation with its transpose. Inserting one labeled
//! pair computes the complete set of newly implied labels in a single pass:
//!
//! * a negative `(a,b)` implies `(d,c)` negative for every `d` in
//!   `desc(a)+a` and `c` in `anc(b)+b` (rule `N'`);
//! * a positive `(a,b)` implies `N = (anc(a)+a) x (desc(b)+b)` positive, the
//!   reverse of every pair in `N` negative (`R`), negatives obtained from `N`
//!   and existing negatives on either side (`S`, `T`), and finally the
//!   negatives propagated from every `S`/`T` pair through the order extended
//!   by `N` (`O`).
//!
//! Every computation runs against an immutable snapshot and the result is
//! committed only after all conflict checks pass.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bits::{self, BitMatrix, BitRow};
use super::types::{Label, LabelSource, NodeId, Pair, Rule};

/// How the `O` set of a positive insert is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pruning {
    /// Evaluate one propagation set per distinct root `(b,e)` / `(e,a)` and skip
    /// roots already covered by a previously evaluated set.
    #[default]
    Pruned,
    /// Evaluate one propagation set for every pair of `S` and `T`.
    Unpruned,
}

/// A label that contradicts what the closure already knows.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error(
    "labeling {inserted} as {inserted_label} forces {pair} to {deduced} (rule {rule}), \
     but it is already {existing}"
)]
pub struct ConflictingLabel {
    pub inserted: Pair,
    pub inserted_label: Label,
    pub pair: Pair,
    pub deduced: Label,
    pub rule: Rule,
    pub existing: Label,
    /// Provenance of the existing label; `None` when the contradiction is with
    /// irreflexivity rather than a stored label.
    pub existing_source: Option<LabelSource>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("pair {0} is reflexive")]
    Reflexive(Pair),
    #[error("node {node} out of range for a set of {n} nodes")]
    OutOfRange { node: NodeId, n: usize },
    #[error(transparent)]
    Conflict(#[from] ConflictingLabel),
}

impl ClosureError {
    pub fn as_conflict(&self) -> Option<&ConflictingLabel> {
        match self {
            ClosureError::Conflict(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Deduction {
    pub pair: Pair,
    pub label: Label,
    pub rule: Rule,
}

/// Pairs added to a closure by one insertion, each tagged with the first rule
/// (in the order N, R, S, T, O) that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureDelta {
    pub inserted: Pair,
    pub label: Label,
    pub entries: Vec<Deduction>,
    /// Number of propagation sets evaluated while computing `O`.
    pub o_evaluations: usize,
}

impl ClosureDelta {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positives(&self) -> BTreeSet<Pair> {
        self.with_label(Label::Positive)
    }

    pub fn negatives(&self) -> BTreeSet<Pair> {
        self.with_label(Label::Negative)
    }

    fn with_label(&self, label: Label) -> BTreeSet<Pair> {
        self.entries.iter().filter(|d| d.label == label).map(|d| d.pair).collect()
    }

    /// Entries other than the inserted pair itself.
    pub fn deduced(&self) -> impl Iterator<Item = &Deduction> {
        let inserted = self.inserted;
        self.entries.iter().filter(move |d| d.pair != inserted)
    }
}

/// Untagged delta as bit matrices; used where only membership matters.
#[derive(Debug, Clone)]
pub struct DeltaSets {
    pub positives: BitMatrix,
    pub negatives: BitMatrix,
    pub o_evaluations: usize,
}

impl DeltaSets {
    pub fn len(&self) -> usize {
        self.positives.count() + self.negatives.count()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty() && self.negatives.is_empty()
    }
}

/// The raw deduction sets of a positive insert, before removing pairs that
/// are already labeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeductionSets {
    pub n: BTreeSet<Pair>,
    pub r: BTreeSet<Pair>,
    pub s: BTreeSet<Pair>,
    pub t: BTreeSet<Pair>,
    pub o: BTreeSet<Pair>,
    pub o_evaluations: usize,
}

/// A violated completeness rule found by [`OrderClosure::audit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `(a,b)` and `(b,c)` positive but `(a,c)` not positive.
    Transitivity(NodeId, NodeId, NodeId),
    /// `(a,b)` positive, `(a,c)` negative, `(b,c)` not negative.
    LeftNegative(NodeId, NodeId, NodeId),
    /// `(b,c)` positive, `(a,c)` negative, `(a,b)` not negative.
    RightNegative(NodeId, NodeId, NodeId),
    /// `(a,b)` positive but `(b,a)` not negative.
    Asymmetry(NodeId, NodeId),
    /// A pair carries both labels, or a diagonal pair is stored.
    Inconsistent(Pair),
    /// Index rows disagree with each other.
    Index(Pair),
    /// Provenance map size differs from the number of stored labels.
    SourceCount { stored: usize, labeled: usize },
}

/// Complete labeled set over `n` nodes.
#[derive(Debug, Clone)]
pub struct OrderClosure {
    n: usize,
    desc: BitMatrix,
    anc: BitMatrix,
    neg_out: BitMatrix,
    neg_in: BitMatrix,
    sources: HashMap<Pair, LabelSource>,
    n_pos: usize,
    n_neg: usize,
    pruning: Pruning,
}

impl PartialEq for OrderClosure {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.desc == other.desc && self.neg_out == other.neg_out
    }
}

impl Eq for OrderClosure {}

impl OrderClosure {
    pub fn new(n: usize) -> Self {
        OrderClosure {
            n,
            desc: BitMatrix::new(n),
            anc: BitMatrix::new(n),
            neg_out: BitMatrix::new(n),
            neg_in: BitMatrix::new(n),
            sources: HashMap::new(),
            n_pos: 0,
            n_neg: 0,
            pruning: Pruning::Pruned,
        }
    }

    pub fn with_pruning(mut self, pruning: Pruning) -> Self {
        self.pruning = pruning;
        self
    }

    pub fn pruning(&self) -> Pruning {
        self.pruning
    }

    /// Closure of a label list, built by inserting each label in turn. The
    /// result does not depend on the order of `labels`.
    pub fn seed<I>(n: usize, labels: I) -> Result<Self, ClosureError>
    where
        I: IntoIterator<Item = (Pair, Label)>,
    {
        let mut closure = OrderClosure::new(n);
        for (pair, label) in labels {
            closure.insert(pair, label, LabelSource::Seed)?;
        }
        Ok(closure)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Number of labeled pairs.
    pub fn len(&self) -> usize {
        self.n_pos + self.n_neg
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positive_count(&self) -> usize {
        self.n_pos
    }

    pub fn negative_count(&self) -> usize {
        self.n_neg
    }

    pub fn label(&self, pair: Pair) -> Option<Label> {
        let (a, b) = (pair.src.index(), pair.dst.index());
        if a >= self.n || b >= self.n {
            return None;
        }
        if self.desc.contains(a, b) {
            Some(Label::Positive)
        } else if self.neg_out.contains(a, b) {
            Some(Label::Negative)
        } else {
            None
        }
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.label(pair).is_some()
    }

    pub fn source(&self, pair: Pair) -> Option<LabelSource> {
        self.sources.get(&pair).copied()
    }

    /// Number of stored labels per source.
    pub fn source_counts(&self) -> HashMap<LabelSource, usize> {
        let mut out = HashMap::new();
        for src in self.sources.values() {
            *out.entry(*src).or_insert(0) += 1;
        }
        out
    }

    pub fn ancestors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        bits::ones(self.anc.row(node.index())).map(NodeId::from)
    }

    pub fn descendants(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        bits::ones(self.desc.row(node.index())).map(NodeId::from)
    }

    pub fn positives(&self) -> impl Iterator<Item = Pair> + '_ {
        self.desc.iter().map(|(a, b)| Pair::new(a, b))
    }

    pub fn negatives(&self) -> impl Iterator<Item = Pair> + '_ {
        self.neg_out.iter().map(|(a, b)| Pair::new(a, b))
    }

    pub fn positive_set(&self) -> BTreeSet<Pair> {
        self.positives().collect()
    }

    pub fn negative_set(&self) -> BTreeSet<Pair> {
        self.negatives().collect()
    }

    /// Positive relation as a bit matrix, row `a` = descendants of `a`.
    pub fn positive_matrix(&self) -> &BitMatrix {
        &self.desc
    }

    pub fn negative_matrix(&self) -> &BitMatrix {
        &self.neg_out
    }

    /// All labeled pairs with provenance, sorted by pair.
    pub fn entries(&self) -> Vec<(Pair, Label, LabelSource)> {
        let mut out: Vec<_> = self
            .positives()
            .map(|p| (p, Label::Positive))
            .chain(self.negatives().map(|p| (p, Label::Negative)))
            .map(|(p, l)| (p, l, self.sources.get(&p).copied().unwrap_or(LabelSource::Seed)))
            .collect();
        out.sort_by_key(|e| e.0);
        out
    }

    /// Adds a labeled pair and everything it implies. On error the closure is
    /// unchanged.
    pub fn insert(&mut self, pair: Pair, label: Label, source: LabelSource) -> Result<ClosureDelta, ClosureError> {
        let delta = self.hypothetical_delta(pair, label)?;
        self.commit(&delta, source);
        Ok(delta)
    }

    /// The delta `insert` would produce, without mutating the closure.
    pub fn hypothetical_delta(&self, pair: Pair, label: Label) -> Result<ClosureDelta, ClosureError> {
        let mut entries = Vec::new();
        let o_evaluations = self.derive(pair, label, self.pruning, Some(&mut entries))?.o_evaluations;
        Ok(ClosureDelta {
            inserted: pair,
            label,
            entries,
            o_evaluations,
        })
    }

    /// Same pairs as [`hypothetical_delta`](Self::hypothetical_delta), as bit
    /// matrices and without rule tags.
    pub fn hypothetical_sets(&self, pair: Pair, label: Label) -> Result<DeltaSets, ClosureError> {
        self.derive(pair, label, self.pruning, None)
    }

    /// Same as [`hypothetical_sets`](Self::hypothetical_sets) with an explicit
    /// `O` computation mode.
    pub fn hypothetical_sets_with(&self, pair: Pair, label: Label, pruning: Pruning) -> Result<DeltaSets, ClosureError> {
        self.derive(pair, label, pruning, None)
    }

    fn check_pair(&self, pair: Pair) -> Result<(usize, usize), ClosureError> {
        for node in [pair.src, pair.dst] {
            if node.index() >= self.n {
                return Err(ClosureError::OutOfRange { node, n: self.n });
            }
        }
        if pair.is_reflexive() {
            return Err(ClosureError::Reflexive(pair));
        }
        Ok((pair.src.index(), pair.dst.index()))
    }

    fn commit(&mut self, delta: &ClosureDelta, source: LabelSource) {
        for d in &delta.entries {
            let (a, b) = (d.pair.src.index(), d.pair.dst.index());
            match d.label {
                Label::Positive => {
                    self.desc.insert(a, b);
                    self.anc.insert(b, a);
                    self.n_pos += 1;
                }
                Label::Negative => {
                    self.neg_out.insert(a, b);
                    self.neg_in.insert(b, a);
                    self.n_neg += 1;
                }
            }
            let src = if d.pair == delta.inserted {
                source
            } else {
                LabelSource::Deduced(d.rule)
            };
            self.sources.insert(d.pair, src);
        }
    }

    fn derive(
        &self,
        pair: Pair,
        label: Label,
        pruning: Pruning,
        tags: Option<&mut Vec<Deduction>>,
    ) -> Result<DeltaSets, ClosureError> {
        let (a, b) = self.check_pair(pair)?;
        let mut acc = Accumulator::new(self, pair, label, tags);
        let existing = self.label(pair);
        if existing == Some(label) {
            return Ok(acc.finish(0));
        }
        if let Some(existing) = existing {
            return Err(ConflictingLabel {
                inserted: pair,
                inserted_label: label,
                pair,
                deduced: label,
                rule: if label.is_positive() { Rule::N } else { Rule::NPrime },
                existing,
                existing_source: self.source(pair),
            }
            .into());
        }
        match label {
            Label::Negative => {
                let rows = self.reflexive_row(&self.desc, a);
                let cols = self.reflexive_row(&self.anc, b);
                for d in rows.iter() {
                    acc.add_negatives(d, cols.words(), Rule::NPrime)?;
                }
                Ok(acc.finish(0))
            }
            Label::Positive => {
                let ctx = PositiveContext::new(self, a, b);
                for c in ctx.up.iter() {
                    acc.add_positives(c, ctx.down.words())?;
                }
                for d in ctx.down.iter() {
                    acc.add_negatives(d, ctx.up.words(), Rule::R)?;
                }
                for d in ctx.down.iter() {
                    acc.add_negatives(d, ctx.e_s.words(), Rule::S)?;
                }
                for e in ctx.e_t.iter() {
                    acc.add_negatives(e, ctx.up.words(), Rule::T)?;
                }
                let (o, evals) = ctx.propagate(pruning);
                for f in 0..self.n {
                    acc.add_negatives(f, o.row(f), Rule::O)?;
                }
                Ok(acc.finish(evals))
            }
        }
    }

    /// Raw `N`, `R`, `S`, `T`, `O` sets for a positive insert of `pair`.
    pub fn deduction_sets(&self, pair: Pair, pruning: Pruning) -> Result<DeductionSets, ClosureError> {
        let (a, b) = self.check_pair(pair)?;
        let ctx = PositiveContext::new(self, a, b);
        let mut n = BTreeSet::new();
        let mut r = BTreeSet::new();
        for c in ctx.up.iter() {
            for d in ctx.down.iter() {
                n.insert(Pair::new(c, d));
                r.insert(Pair::new(d, c));
            }
        }
        let mut s = BTreeSet::new();
        for d in ctx.down.iter() {
            for e in ctx.e_s.iter() {
                s.insert(Pair::new(d, e));
            }
        }
        let mut t = BTreeSet::new();
        for e in ctx.e_t.iter() {
            for c in ctx.up.iter() {
                t.insert(Pair::new(e, c));
            }
        }
        let (o, o_evaluations) = ctx.propagate(pruning);
        let o = o.iter().map(|(f, e)| Pair::new(f, e)).collect();
        Ok(DeductionSets {
            n,
            r,
            s,
            t,
            o,
            o_evaluations,
        })
    }

    fn reflexive_row(&self, m: &BitMatrix, i: usize) -> BitRow {
        let mut row = BitRow::from_slice(m.row(i));
        row.insert(i);
        row
    }

    /// Exhaustive triple scan for violations of the completeness rules and of
    /// index consistency.
    pub fn audit(&self) -> Vec<Violation> {
        let n = self.n;
        let id = NodeId::from;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let pab = self.desc.contains(a, b);
                let nab = self.neg_out.contains(a, b);
                if pab != self.anc.contains(b, a) || nab != self.neg_in.contains(b, a) {
                    out.push(Violation::Index(Pair::new(a, b)));
                }
                if (pab && nab) || (a == b && (pab || nab)) {
                    out.push(Violation::Inconsistent(Pair::new(a, b)));
                }
                if pab && !self.neg_out.contains(b, a) {
                    out.push(Violation::Asymmetry(id(a), id(b)));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.desc.contains(a, b) && self.desc.contains(b, c) && !self.desc.contains(a, c) {
                        out.push(Violation::Transitivity(id(a), id(b), id(c)));
                    }
                    if self.desc.contains(a, b) && self.neg_out.contains(a, c) && b != c && !self.neg_out.contains(b, c) {
                        out.push(Violation::LeftNegative(id(a), id(b), id(c)));
                    }
                    if self.desc.contains(b, c) && self.neg_out.contains(a, c) && a != b && !self.neg_out.contains(a, b) {
                        out.push(Violation::RightNegative(id(a), id(b), id(c)));
                    }
                }
            }
        }
        if self.sources.len() != self.len() {
            out.push(Violation::SourceCount {
                stored: self.sources.len(),
                labeled: self.len(),
            });
        }
        out
    }
}

/// Indices of the order extended by `N` for a positive insert of `(a,b)`.
struct PositiveContext<'a> {
    closure: &'a OrderClosure,
    a: usize,
    b: usize,
    /// `anc(a) + a`
    up: BitRow,
    /// `desc(b) + b`
    down: BitRow,
    /// Nodes `e` with `(c,e)` negative for some `c` in `up`.
    e_s: BitRow,
    /// Nodes `e` with `(e,d)` negative for some `d` in `down`.
    e_t: BitRow,
}

impl<'a> PositiveContext<'a> {
    fn new(closure: &'a OrderClosure, a: usize, b: usize) -> Self {
        let n = closure.n;
        let up = closure.reflexive_row(&closure.anc, a);
        let down = closure.reflexive_row(&closure.desc, b);
        let mut e_s = BitRow::new(n);
        for c in up.iter() {
            e_s.or_with(closure.neg_out.row(c));
        }
        let mut e_t = BitRow::new(n);
        for d in down.iter() {
            e_t.or_with(closure.neg_in.row(d));
        }
        PositiveContext {
            closure,
            a,
            b,
            up,
            down,
            e_s,
            e_t,
        }
    }

    /// `desc(x) + x` in the order extended by `N`.
    fn ext_desc(&self, x: usize) -> BitRow {
        let mut row = self.closure.reflexive_row(&self.closure.desc, x);
        if self.up.contains(x) {
            row.or_with(self.down.words());
        }
        row
    }

    /// `anc(x) + x` in the order extended by `N`.
    fn ext_anc(&self, x: usize) -> BitRow {
        let mut row = self.closure.reflexive_row(&self.closure.anc, x);
        if self.down.contains(x) {
            row.or_with(self.up.words());
        }
        row
    }

    /// Adds the propagation set of root `(c,d)`: every `(f,e)` with `f` in
    /// `desc(c)+c` and `e` in `anc(d)+d`.
    fn evaluate_root(&self, o: &mut BitMatrix, c: usize, d: usize) {
        let cols = self.ext_anc(d);
        for f in self.ext_desc(c).iter() {
            o.or_row(f, cols.words());
        }
    }

    /// The `O` set and the number of propagation sets evaluated.
    fn propagate(&self, pruning: Pruning) -> (BitMatrix, usize) {
        let n = self.closure.n;
        let mut o = BitMatrix::new(n);
        let mut evals = 0;
        match pruning {
            Pruning::Unpruned => {
                let mut roots = BitMatrix::new(n);
                for d in self.down.iter() {
                    roots.or_row(d, self.e_s.words());
                }
                for e in self.e_t.iter() {
                    roots.or_row(e, self.up.words());
                }
                for (c, d) in roots.iter() {
                    if c != d {
                        self.evaluate_root(&mut o, c, d);
                        evals += 1;
                    }
                }
            }
            Pruning::Pruned => {
                // Every S pair (d,e) has d in desc(b)+b, so its propagation set
                // is contained in that of (b,e); likewise every T pair (e,c)
                // is covered by (e,a). Roots are visited widest-first so that
                // covered roots can be skipped.
                let mut s_roots: Vec<(usize, usize)> = self
                    .e_s
                    .iter()
                    .filter(|&e| e != self.b)
                    .map(|e| (self.ext_anc(e).count(), e))
                    .collect();
                s_roots.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
                for (_, e) in s_roots {
                    if !o.contains(self.b, e) {
                        self.evaluate_root(&mut o, self.b, e);
                        evals += 1;
                    }
                }
                let mut t_roots: Vec<(usize, usize)> = self
                    .e_t
                    .iter()
                    .filter(|&e| e != self.a)
                    .map(|e| (self.ext_desc(e).count(), e))
                    .collect();
                t_roots.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
                for (_, e) in t_roots {
                    if !o.contains(e, self.a) {
                        self.evaluate_root(&mut o, e, self.a);
                        evals += 1;
                    }
                }
            }
        }
        (o, evals)
    }
}

/// Collects new labels for one insertion, checking each against the snapshot
/// and against what has been deduced so far.
struct Accumulator<'a> {
    closure: &'a OrderClosure,
    inserted: Pair,
    label: Label,
    pos: BitMatrix,
    neg: BitMatrix,
    tags: Option<&'a mut Vec<Deduction>>,
}

impl<'a> Accumulator<'a> {
    fn new(closure: &'a OrderClosure, inserted: Pair, label: Label, tags: Option<&'a mut Vec<Deduction>>) -> Self {
        Accumulator {
            closure,
            inserted,
            label,
            pos: BitMatrix::new(closure.n),
            neg: BitMatrix::new(closure.n),
            tags,
        }
    }

    fn conflict(&self, row: usize, col: usize, deduced: Label, rule: Rule, existing: Label) -> ClosureError {
        let pair = Pair::new(row, col);
        ConflictingLabel {
            inserted: self.inserted,
            inserted_label: self.label,
            pair,
            deduced,
            rule,
            existing,
            existing_source: if row == col { None } else { self.closure.source(pair) },
        }
        .into()
    }

    fn add_positives(&mut self, row: usize, bits: &[u64]) -> Result<(), ClosureError> {
        let h = self.closure;
        let words = h.desc.words_per_row();
        for w in 0..words {
            let cand = bits[w];
            let clash = cand & (h.neg_out.row(row)[w] | self.neg.row(row)[w]);
            if clash != 0 {
                let col = w * 64 + clash.trailing_zeros() as usize;
                return Err(self.conflict(row, col, Label::Positive, Rule::N, Label::Negative));
            }
        }
        if bits::ones(bits).any(|c| c == row) {
            return Err(self.conflict(row, row, Label::Positive, Rule::N, Label::Negative));
        }
        for w in 0..words {
            let fresh = bits[w] & !h.desc.row(row)[w] & !self.pos.row(row)[w];
            if fresh == 0 {
                continue;
            }
            self.pos.row_mut(row)[w] |= fresh;
            if let Some(tags) = self.tags.as_deref_mut() {
                for col in bits::ones(&[fresh]) {
                    tags.push(Deduction {
                        pair: Pair::new(row, w * 64 + col),
                        label: Label::Positive,
                        rule: Rule::N,
                    });
                }
            }
        }
        Ok(())
    }

    fn add_negatives(&mut self, row: usize, bits: &[u64], rule: Rule) -> Result<(), ClosureError> {
        let h = self.closure;
        let words = h.neg_out.words_per_row();
        for w in 0..words {
            let mut cand = bits[w];
            if row / 64 == w {
                // (x,x) is negative in every strict order; never stored.
                cand &= !(1u64 << (row % 64));
            }
            let clash = cand & (h.desc.row(row)[w] | self.pos.row(row)[w]);
            if clash != 0 {
                let col = w * 64 + clash.trailing_zeros() as usize;
                return Err(self.conflict(row, col, Label::Negative, rule, Label::Positive));
            }
            let fresh = cand & !h.neg_out.row(row)[w] & !self.neg.row(row)[w];
            if fresh == 0 {
                continue;
            }
            self.neg.row_mut(row)[w] |= fresh;
            if let Some(tags) = self.tags.as_deref_mut() {
                for col in bits::ones(&[fresh]) {
                    tags.push(Deduction {
                        pair: Pair::new(row, w * 64 + col),
                        label: Label::Negative,
                        rule,
                    });
                }
            }
        }
        Ok(())
    }

    fn finish(self, o_evaluations: usize) -> DeltaSets {
        DeltaSets {
            positives: self.pos,
            negatives: self.neg,
            o_evaluations,
        }
    }
}
