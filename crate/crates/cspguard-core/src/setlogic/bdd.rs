//! Symbolic family engine over reduced ordered binary decision diagrams.
//!
//! Each event `a` owns a block of six Boolean variables. Slots 0 and 1
//! (`x_a`, `y_a`) carry the first and second component of pair families —
//! set families live on the `y` slots alone — and slots 2–5 are primed
//! scratch copies used inside relational operations and quantified away
//! before an operation returns, so stored families never depend on them.
//! The interleaved block order keeps each event's copies adjacent, which is
//! what makes the rename steps order-preserving and the relational
//! conjunctions narrow.
//!
//! The diagram store is grow-only within one engine: nodes are hash-consed
//! (reduced and shared), so semantic equality of families from the same
//! store is pointer equality. Stores are single-owner; families carry
//! their store's id and mixing stores is reported as a backend mismatch.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::setlogic::events::{EventId, EventSet, RenamingRelation};
use crate::setlogic::family::{
    BackendKind, FamilyBackend, FamilyError, PairFamily, Repr, SetFamily,
};

type NodeId = u32;
const FALSE: NodeId = 0;
const TRUE: NodeId = 1;
/// Variable number of the terminal pseudo-nodes; sorts after every real var.
const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: NodeId,
    hi: NodeId,
}

/// Plain ROBDD store: if-then-else as the single binary combinator,
/// quantification, and order-preserving variable renaming.
struct Bdd {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    ite_cache: HashMap<(NodeId, NodeId, NodeId), NodeId>,
    exists_cache: HashMap<(NodeId, u32), NodeId>,
    rename_cache: HashMap<(NodeId, u32), NodeId>,
    varsets: Vec<Vec<u32>>,
    varset_ids: HashMap<Vec<u32>, u32>,
    maps: Vec<Vec<(u32, u32)>>,
    map_ids: HashMap<Vec<(u32, u32)>, u32>,
}

impl Bdd {
    fn new() -> Self {
        let terminal = |_v| Node {
            var: TERMINAL_VAR,
            lo: 0,
            hi: 0,
        };
        Bdd {
            // Index 0 is FALSE, index 1 is TRUE; they are never looked up
            // in the unique table.
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::new(),
            ite_cache: HashMap::new(),
            exists_cache: HashMap::new(),
            rename_cache: HashMap::new(),
            varsets: Vec::new(),
            varset_ids: HashMap::new(),
            maps: Vec::new(),
            map_ids: HashMap::new(),
        }
    }

    fn var_of(&self, f: NodeId) -> u32 {
        self.nodes[f as usize].var
    }

    fn mk(&mut self, var: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        debug_assert!(var < self.var_of(lo) && var < self.var_of(hi), "variable order violated");
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = NodeId::try_from(self.nodes.len()).expect("node store overflow");
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    fn literal(&mut self, var: u32, positive: bool) -> NodeId {
        if positive {
            self.mk(var, FALSE, TRUE)
        } else {
            self.mk(var, TRUE, FALSE)
        }
    }

    fn ite(&mut self, f: NodeId, g: NodeId, h: NodeId) -> NodeId {
        // Terminal shortcuts.
        if f == TRUE {
            return g;
        }
        if f == FALSE {
            return h;
        }
        if g == h {
            return g;
        }
        if g == TRUE && h == FALSE {
            return f;
        }
        let key = (f, g, h);
        if let Some(&r) = self.ite_cache.get(&key) {
            return r;
        }
        let top = self
            .var_of(f)
            .min(self.var_of(g))
            .min(self.var_of(h));
        let branch = |bdd: &Bdd, n: NodeId, hi: bool| -> NodeId {
            let node = bdd.nodes[n as usize];
            if node.var == top {
                if hi {
                    node.hi
                } else {
                    node.lo
                }
            } else {
                n
            }
        };
        let (f0, f1) = (branch(self, f, false), branch(self, f, true));
        let (g0, g1) = (branch(self, g, false), branch(self, g, true));
        let (h0, h1) = (branch(self, h, false), branch(self, h, true));
        let lo = self.ite(f0, g0, h0);
        let hi = self.ite(f1, g1, h1);
        let r = self.mk(top, lo, hi);
        self.ite_cache.insert(key, r);
        r
    }

    fn and(&mut self, f: NodeId, g: NodeId) -> NodeId {
        self.ite(f, g, FALSE)
    }

    fn or(&mut self, f: NodeId, g: NodeId) -> NodeId {
        self.ite(f, TRUE, g)
    }

    fn not(&mut self, f: NodeId) -> NodeId {
        self.ite(f, FALSE, TRUE)
    }

    fn implies(&mut self, f: NodeId, g: NodeId) -> NodeId {
        self.ite(f, g, TRUE)
    }

    fn iff(&mut self, f: NodeId, g: NodeId) -> NodeId {
        let ng = self.not(g);
        self.ite(f, g, ng)
    }

    fn intern_varset(&mut self, mut vars: Vec<u32>) -> u32 {
        vars.sort_unstable();
        vars.dedup();
        if let Some(&id) = self.varset_ids.get(&vars) {
            return id;
        }
        let id = self.varsets.len() as u32;
        self.varsets.push(vars.clone());
        self.varset_ids.insert(vars, id);
        id
    }

    fn exists(&mut self, f: NodeId, varset: u32) -> NodeId {
        if f == TRUE || f == FALSE {
            return f;
        }
        let key = (f, varset);
        if let Some(&r) = self.exists_cache.get(&key) {
            return r;
        }
        let node = self.nodes[f as usize];
        // Everything in the set is below this node's var? Then nothing to do
        // — but checking that costs as much as recursing; recurse plainly.
        let lo = self.exists(node.lo, varset);
        let hi = self.exists(node.hi, varset);
        let r = if self.varsets[varset as usize].binary_search(&node.var).is_ok() {
            self.or(lo, hi)
        } else {
            self.mk(node.var, lo, hi)
        };
        self.exists_cache.insert(key, r);
        r
    }

    fn intern_map(&mut self, mut pairs: Vec<(u32, u32)>) -> u32 {
        pairs.sort_unstable();
        debug_assert!(
            pairs.windows(2).all(|w| w[0].1 < w[1].1),
            "rename map must preserve variable order"
        );
        if let Some(&id) = self.map_ids.get(&pairs) {
            return id;
        }
        let id = self.maps.len() as u32;
        self.maps.push(pairs.clone());
        self.map_ids.insert(pairs, id);
        id
    }

    /// Rename variables by an order-preserving map (sources not in the map
    /// keep their variable). Sound only because maps stay monotone and
    /// never collide with variables in the operand's support — `mk`'s
    /// debug assertion guards that.
    fn rename(&mut self, f: NodeId, map: u32) -> NodeId {
        if f == TRUE || f == FALSE {
            return f;
        }
        let key = (f, map);
        if let Some(&r) = self.rename_cache.get(&key) {
            return r;
        }
        let node = self.nodes[f as usize];
        let lo = self.rename(node.lo, map);
        let hi = self.rename(node.hi, map);
        let var = match self.maps[map as usize].binary_search_by_key(&node.var, |p| p.0) {
            Ok(i) => self.maps[map as usize][i].1,
            Err(_) => node.var,
        };
        let r = self.mk(var, lo, hi);
        self.rename_cache.insert(key, r);
        r
    }

    fn eval(&self, f: NodeId, assignment: impl Fn(u32) -> bool) -> bool {
        let mut cur = f;
        loop {
            match cur {
                FALSE => return false,
                TRUE => return true,
                _ => {
                    let node = self.nodes[cur as usize];
                    cur = if assignment(node.var) { node.hi } else { node.lo };
                }
            }
        }
    }

    /// Deterministic satisfying assignment over the node's support,
    /// preferring the low (false) branch; `None` for FALSE.
    fn first_model(&self, f: NodeId) -> Option<Vec<(u32, bool)>> {
        if f == FALSE {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = f;
        while cur != TRUE {
            let node = self.nodes[cur as usize];
            if node.lo != FALSE {
                out.push((node.var, false));
                cur = node.lo;
            } else {
                out.push((node.var, true));
                cur = node.hi;
            }
        }
        Some(out)
    }

    /// Visit every model of `f` projected onto `proj` (ascending variable
    /// list), expanding don't-cares over exactly those variables. `f` must
    /// not depend on variables outside `proj`.
    fn for_each_model(
        &self,
        f: NodeId,
        proj: &[u32],
        mut visit: impl FnMut(&[bool]) -> Result<(), FamilyError>,
    ) -> Result<(), FamilyError> {
        fn go(
            bdd: &Bdd,
            f: NodeId,
            proj: &[u32],
            depth: usize,
            acc: &mut Vec<bool>,
            visit: &mut impl FnMut(&[bool]) -> Result<(), FamilyError>,
        ) -> Result<(), FamilyError> {
            if f == FALSE {
                return Ok(());
            }
            if depth == proj.len() {
                debug_assert_eq!(f, TRUE, "family depends on non-projected variable");
                return visit(acc);
            }
            let node_var = bdd.var_of(f);
            debug_assert!(
                node_var >= proj[depth],
                "family depends on non-projected variable {node_var}"
            );
            let (lo, hi) = if node_var == proj[depth] {
                let n = bdd.nodes[f as usize];
                (n.lo, n.hi)
            } else {
                (f, f) // projected var is a don't-care here
            };
            acc.push(false);
            go(bdd, lo, proj, depth + 1, acc, visit)?;
            acc.pop();
            acc.push(true);
            go(bdd, hi, proj, depth + 1, acc, visit)?;
            acc.pop();
            Ok(())
        }
        let mut acc = Vec::with_capacity(proj.len());
        go(self, f, proj, 0, &mut acc, &mut visit)
    }

    /// Number of distinct nodes reachable from `f`, terminals included.
    fn node_count(&self, f: NodeId) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![f];
        while let Some(n) = stack.pop() {
            if seen.insert(n) && n > TRUE {
                let node = self.nodes[n as usize];
                stack.push(node.lo);
                stack.push(node.hi);
            }
        }
        seen.len()
    }
}

static NEXT_STORE_ID: AtomicU64 = AtomicU64::new(1);

/// Variable slots within an event's six-variable block.
const X: u32 = 0;
const Y: u32 = 1;
const XP: u32 = 2;
const YP: u32 = 3;
const XPP: u32 = 4;
const YPP: u32 = 5;

pub struct BddBackend {
    n: u8,
    store_id: u64,
    bdd: Bdd,
}

impl BddBackend {
    pub fn new(alphabet_size: usize) -> Self {
        assert!(alphabet_size <= crate::setlogic::MAX_ALPHABET);
        BddBackend {
            n: alphabet_size as u8,
            store_id: NEXT_STORE_ID.fetch_add(1, Ordering::Relaxed),
            bdd: Bdd::new(),
        }
    }

    fn slot(a: EventId, s: u32) -> u32 {
        6 * a as u32 + s
    }

    fn events(&self) -> impl Iterator<Item = EventId> {
        0..self.n
    }

    fn mk_set(&self, node: NodeId) -> SetFamily {
        SetFamily(Repr::Symbolic {
            n: self.n,
            store: self.store_id,
            node,
        })
    }

    fn mk_pair(&self, node: NodeId) -> PairFamily {
        PairFamily(Repr::Symbolic {
            n: self.n,
            store: self.store_id,
            node,
        })
    }

    fn unwrap_set(&self, f: &SetFamily) -> Result<NodeId, FamilyError> {
        match f.0 {
            Repr::Symbolic { n, store, node } if store == self.store_id => {
                if n == self.n {
                    Ok(node)
                } else {
                    Err(FamilyError::AlphabetMismatch)
                }
            }
            Repr::Symbolic { .. } | Repr::Explicit { .. } => Err(FamilyError::BackendMismatch),
        }
    }

    fn unwrap_pair(&self, f: &PairFamily) -> Result<NodeId, FamilyError> {
        match f.0 {
            Repr::Symbolic { n, store, node } if store == self.store_id => {
                if n == self.n {
                    Ok(node)
                } else {
                    Err(FamilyError::AlphabetMismatch)
                }
            }
            Repr::Symbolic { .. } | Repr::Explicit { .. } => Err(FamilyError::BackendMismatch),
        }
    }

    /// Cube asserting exactly the given value on one slot-vector.
    fn cube(&mut self, slotkind: u32, value: EventSet) -> NodeId {
        // Build bottom-up (descending variable) so each mk is root-level.
        let mut acc = TRUE;
        for a in (0..self.n).rev() {
            let var = Self::slot(a, slotkind);
            acc = if value.contains(a) {
                self.bdd.mk(var, FALSE, acc)
            } else {
                self.bdd.mk(var, acc, FALSE)
            };
        }
        acc
    }

    fn slot_vars(&mut self, slots: &[u32]) -> u32 {
        let mut vars = Vec::new();
        for a in 0..self.n {
            for &s in slots {
                vars.push(Self::slot(a, s));
            }
        }
        self.bdd.intern_varset(vars)
    }

    fn slot_map(&mut self, pairs: &[(u32, u32)]) -> u32 {
        let mut map = Vec::new();
        for a in 0..self.n {
            for &(from, to) in pairs {
                map.push((Self::slot(a, from), Self::slot(a, to)));
            }
        }
        self.bdd.intern_map(map)
    }

    /// ⋀_a rel(slot_l(a), slot_r(a)) for a relational constraint between
    /// two slot vectors, built descending so intermediate nodes stay small.
    fn pairwise(
        &mut self,
        left: u32,
        right: u32,
        mut rel: impl FnMut(&mut Bdd, NodeId, NodeId) -> NodeId,
    ) -> NodeId {
        let mut acc = TRUE;
        for a in (0..self.n).rev() {
            let l = self.bdd.literal(Self::slot(a, left), true);
            let r = self.bdd.literal(Self::slot(a, right), true);
            let c = rel(&mut self.bdd, l, r);
            acc = self.bdd.and(c, acc);
        }
        acc
    }

    /// Members of a set family, ascending by bitmask.
    fn set_members(&mut self, node: NodeId, cap: usize) -> Result<Vec<EventSet>, FamilyError> {
        let proj: Vec<u32> = self.events().map(|a| Self::slot(a, Y)).collect();
        let mut out = Vec::new();
        self.bdd.for_each_model(node, &proj, |bits| {
            if out.len() >= cap {
                return Err(FamilyError::CapExceeded {
                    needed: out.len() + 1,
                    cap,
                });
            }
            let mut v = EventSet::EMPTY;
            for (a, &b) in bits.iter().enumerate() {
                if b {
                    v.insert(a as EventId);
                }
            }
            out.push(v);
            Ok(())
        })?;
        out.sort_unstable_by_key(|v| v.bits());
        Ok(out)
    }

    fn pair_members(
        &mut self,
        node: NodeId,
        cap: usize,
    ) -> Result<Vec<(EventSet, EventSet)>, FamilyError> {
        let mut proj: Vec<u32> = Vec::new();
        for a in self.events() {
            proj.push(Self::slot(a, X));
            proj.push(Self::slot(a, Y));
        }
        let mut out = Vec::new();
        self.bdd.for_each_model(node, &proj, |bits| {
            if out.len() >= cap {
                return Err(FamilyError::CapExceeded {
                    needed: out.len() + 1,
                    cap,
                });
            }
            let mut u = EventSet::EMPTY;
            let mut v = EventSet::EMPTY;
            for (i, &b) in bits.iter().enumerate() {
                if b {
                    let a = (i / 2) as EventId;
                    if i % 2 == 0 {
                        u.insert(a);
                    } else {
                        v.insert(a);
                    }
                }
            }
            out.push((u, v));
            Ok(())
        })?;
        out.sort_unstable_by_key(|&(u, v)| (u.bits(), v.bits()));
        Ok(out)
    }

    /// Reachable node count of a family's diagram — exposed for the
    /// canonicity checks and debug dumps.
    pub fn family_node_count(&self, f: &SetFamily) -> Result<usize, FamilyError> {
        Ok(self.bdd.node_count(self.unwrap_set(f)?))
    }

    pub fn pair_node_count(&self, f: &PairFamily) -> Result<usize, FamilyError> {
        Ok(self.bdd.node_count(self.unwrap_pair(f)?))
    }

    /// GraphViz rendering of a pair family's diagram, for `--debug-families`.
    pub fn dump_dot(&self, f: &PairFamily, alphabet: &crate::setlogic::Alphabet) -> Result<String, FamilyError> {
        use std::fmt::Write as _;
        let root = self.unwrap_pair(f)?;
        let mut out = String::from("digraph family {\n  rankdir=TB;\n");
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            match id {
                FALSE => out.push_str("  n0 [shape=box,label=\"0\"];\n"),
                TRUE => out.push_str("  n1 [shape=box,label=\"1\"];\n"),
                _ => {
                    let node = self.bdd.nodes[id as usize];
                    let a = (node.var / 6) as EventId;
                    let kind = match node.var % 6 {
                        X => "x",
                        Y => "y",
                        XP => "x'",
                        YP => "y'",
                        XPP => "x''",
                        _ => "y''",
                    };
                    let _ = writeln!(
                        out,
                        "  n{id} [label=\"{kind}:{}\"];\n  n{id} -> n{} [style=dashed];\n  n{id} -> n{};",
                        alphabet.name(a),
                        node.lo,
                        node.hi
                    );
                    stack.push(node.lo);
                    stack.push(node.hi);
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}

impl FamilyBackend for BddBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Symbolic
    }

    fn alpha_n(&self) -> u8 {
        self.n
    }

    fn sf_empty(&mut self) -> SetFamily {
        self.mk_set(FALSE)
    }

    fn sf_full(&mut self) -> SetFamily {
        self.mk_set(TRUE)
    }

    fn sf_singleton(&mut self, v: EventSet) -> SetFamily {
        let node = self.cube(Y, v);
        self.mk_set(node)
    }

    fn sf_with_event(&mut self, a: EventId) -> SetFamily {
        let node = self.bdd.literal(Self::slot(a, Y), true);
        self.mk_set(node)
    }

    fn sf_without_events(&mut self, avoid: EventSet) -> SetFamily {
        let mut acc = TRUE;
        for a in avoid.iter().collect::<Vec<_>>().into_iter().rev() {
            let lit = self.bdd.literal(Self::slot(a, Y), false);
            acc = self.bdd.and(lit, acc);
        }
        self.mk_set(acc)
    }

    fn sf_union(&mut self, f: &SetFamily, g: &SetFamily) -> Result<SetFamily, FamilyError> {
        let (fn_, gn) = (self.unwrap_set(f)?, self.unwrap_set(g)?);
        let node = self.bdd.or(fn_, gn);
        Ok(self.mk_set(node))
    }

    fn sf_intersect(&mut self, f: &SetFamily, g: &SetFamily) -> Result<SetFamily, FamilyError> {
        let (fn_, gn) = (self.unwrap_set(f)?, self.unwrap_set(g)?);
        let node = self.bdd.and(fn_, gn);
        Ok(self.mk_set(node))
    }

    fn sf_complement(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError> {
        let fn_ = self.unwrap_set(f)?;
        let node = self.bdd.not(fn_);
        Ok(self.mk_set(node))
    }

    fn sf_is_empty(&mut self, f: &SetFamily) -> Result<bool, FamilyError> {
        Ok(self.unwrap_set(f)? == FALSE)
    }

    fn sf_contains(&mut self, f: &SetFamily, v: EventSet) -> Result<bool, FamilyError> {
        let node = self.unwrap_set(f)?;
        Ok(self.bdd.eval(node, |var| {
            var % 6 == Y && v.contains((var / 6) as EventId)
        }))
    }

    fn sf_ucl(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError> {
        let node = self.unwrap_set(f)?;
        let map = self.slot_map(&[(Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        let rel = self.pairwise(YP, Y, |bdd, l, r| bdd.implies(l, r));
        let conj = self.bdd.and(shifted, rel);
        let quant = self.slot_vars(&[YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_set(node))
    }

    fn sf_dcl(&mut self, f: &SetFamily) -> Result<SetFamily, FamilyError> {
        let node = self.unwrap_set(f)?;
        let map = self.slot_map(&[(Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        let rel = self.pairwise(Y, YP, |bdd, l, r| bdd.implies(l, r));
        let conj = self.bdd.and(shifted, rel);
        let quant = self.slot_vars(&[YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_set(node))
    }

    fn sf_hide_close(&mut self, f: &SetFamily, hidden: EventSet) -> Result<SetFamily, FamilyError> {
        let mut restricted = self.unwrap_set(f)?;
        for a in hidden.iter() {
            let lit = self.bdd.literal(Self::slot(a, Y), false);
            restricted = self.bdd.and(restricted, lit);
        }
        let restricted = self.mk_set(restricted);
        self.sf_ucl(&restricted)
    }

    fn sf_rename_close(
        &mut self,
        f: &SetFamily,
        r: &RenamingRelation,
    ) -> Result<SetFamily, FamilyError> {
        let node = self.unwrap_set(f)?;
        let map = self.slot_map(&[(Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        // ⋀_a (y′_a → ⋀_{b ∈ R(a)} y_b): members force their image upward.
        let mut rel = TRUE;
        for a in (0..self.n).rev() {
            let mut img = TRUE;
            for b in r.image_of(a).iter().collect::<Vec<_>>().into_iter().rev() {
                let lit = self.bdd.literal(Self::slot(b, Y), true);
                img = self.bdd.and(lit, img);
            }
            let src = self.bdd.literal(Self::slot(a, YP), true);
            let imp = self.bdd.implies(src, img);
            rel = self.bdd.and(imp, rel);
        }
        let conj = self.bdd.and(shifted, rel);
        let quant = self.slot_vars(&[YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_set(node))
    }

    fn sf_witness(&mut self, f: &SetFamily) -> Result<Option<EventSet>, FamilyError> {
        let node = self.unwrap_set(f)?;
        Ok(self.bdd.first_model(node).map(|assignment| {
            let mut v = EventSet::EMPTY;
            for (var, val) in assignment {
                if val {
                    debug_assert_eq!(var % 6, Y);
                    v.insert((var / 6) as EventId);
                }
            }
            v
        }))
    }

    fn sf_enumerate(&mut self, f: &SetFamily, cap: usize) -> Result<Vec<EventSet>, FamilyError> {
        let node = self.unwrap_set(f)?;
        self.set_members(node, cap)
    }

    fn pf_empty(&mut self) -> Result<PairFamily, FamilyError> {
        Ok(self.mk_pair(FALSE))
    }

    fn pf_full(&mut self) -> Result<PairFamily, FamilyError> {
        Ok(self.mk_pair(TRUE))
    }

    fn pf_subset_pairs(&mut self) -> Result<PairFamily, FamilyError> {
        let node = self.pairwise(X, Y, |bdd, l, r| bdd.implies(l, r));
        Ok(self.mk_pair(node))
    }

    fn pf_singleton(&mut self, u: EventSet, v: EventSet) -> Result<PairFamily, FamilyError> {
        let cu = self.cube(X, u);
        let cv = self.cube(Y, v);
        let node = self.bdd.and(cu, cv);
        Ok(self.mk_pair(node))
    }

    fn pf_from_members(
        &mut self,
        members: &[(EventSet, EventSet)],
    ) -> Result<PairFamily, FamilyError> {
        let mut acc = FALSE;
        for &(u, v) in members {
            let cu = self.cube(X, u);
            let cv = self.cube(Y, v);
            let m = self.bdd.and(cu, cv);
            acc = self.bdd.or(acc, m);
        }
        Ok(self.mk_pair(acc))
    }

    fn pf_union(&mut self, f: &PairFamily, g: &PairFamily) -> Result<PairFamily, FamilyError> {
        let (fn_, gn) = (self.unwrap_pair(f)?, self.unwrap_pair(g)?);
        let node = self.bdd.or(fn_, gn);
        Ok(self.mk_pair(node))
    }

    fn pf_intersect(&mut self, f: &PairFamily, g: &PairFamily) -> Result<PairFamily, FamilyError> {
        let (fn_, gn) = (self.unwrap_pair(f)?, self.unwrap_pair(g)?);
        let node = self.bdd.and(fn_, gn);
        Ok(self.mk_pair(node))
    }

    fn pf_is_empty(&mut self, f: &PairFamily) -> Result<bool, FamilyError> {
        Ok(self.unwrap_pair(f)? == FALSE)
    }

    fn pf_contains(
        &mut self,
        f: &PairFamily,
        u: EventSet,
        v: EventSet,
    ) -> Result<bool, FamilyError> {
        let node = self.unwrap_pair(f)?;
        Ok(self.bdd.eval(node, |var| {
            let a = (var / 6) as EventId;
            match var % 6 {
                X => u.contains(a),
                Y => v.contains(a),
                _ => false,
            }
        }))
    }

    fn pf_ucl_second(&mut self, f: &PairFamily) -> Result<PairFamily, FamilyError> {
        let node = self.unwrap_pair(f)?;
        let map = self.slot_map(&[(Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        let rel = self.pairwise(YP, Y, |bdd, l, r| bdd.implies(l, r));
        let conj = self.bdd.and(shifted, rel);
        let quant = self.slot_vars(&[YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_pair(node))
    }

    fn pf_udcl(&mut self, f: &PairFamily) -> Result<PairFamily, FamilyError> {
        let node = self.unwrap_pair(f)?;
        let map = self.slot_map(&[(X, XP), (Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        let up = self.pairwise(YP, Y, |bdd, l, r| bdd.implies(l, r));
        let down = self.pairwise(X, XP, |bdd, l, r| bdd.implies(l, r));
        let conj = self.bdd.and(shifted, up);
        let conj = self.bdd.and(conj, down);
        let quant = self.slot_vars(&[XP, YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_pair(node))
    }

    fn pf_hide_close(
        &mut self,
        f: &PairFamily,
        hidden: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let mut restricted = self.unwrap_pair(f)?;
        for a in hidden.iter() {
            let lit = self.bdd.literal(Self::slot(a, Y), false);
            restricted = self.bdd.and(restricted, lit);
        }
        let restricted = self.mk_pair(restricted);
        self.pf_ucl_second(&restricted)
    }

    fn pf_rename_close(
        &mut self,
        f: &PairFamily,
        r: &RenamingRelation,
    ) -> Result<PairFamily, FamilyError> {
        let node = self.unwrap_pair(f)?;
        let map = self.slot_map(&[(Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        let mut rel = TRUE;
        for a in (0..self.n).rev() {
            let mut img = TRUE;
            for b in r.image_of(a).iter().collect::<Vec<_>>().into_iter().rev() {
                let lit = self.bdd.literal(Self::slot(b, Y), true);
                img = self.bdd.and(lit, img);
            }
            let src = self.bdd.literal(Self::slot(a, YP), true);
            let imp = self.bdd.implies(src, img);
            rel = self.bdd.and(imp, rel);
        }
        let conj = self.bdd.and(shifted, rel);
        let quant = self.slot_vars(&[YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_pair(node))
    }

    fn pf_diag_sets(&mut self, f: &PairFamily) -> Result<SetFamily, FamilyError> {
        let node = self.unwrap_pair(f)?;
        let diag = self.pairwise(X, Y, |bdd, l, r| bdd.iff(l, r));
        let conj = self.bdd.and(node, diag);
        let quant = self.slot_vars(&[X]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_set(node))
    }

    fn pf_lift_second(&mut self, g: &SetFamily) -> Result<PairFamily, FamilyError> {
        // A set family is already a function of the y slots alone; as a
        // pair family that reads "any U, V ∈ g".
        Ok(self.mk_pair(self.unwrap_set(g)?))
    }

    fn pf_couple_complement(&mut self, g: &SetFamily) -> Result<PairFamily, FamilyError> {
        let node = self.unwrap_set(g)?;
        let map = self.slot_map(&[(Y, X)]);
        let on_x = self.bdd.rename(node, map);
        let compl = self.pairwise(X, Y, |bdd, l, r| {
            let nr = bdd.not(r);
            bdd.iff(l, nr)
        });
        let out = self.bdd.and(on_x, compl);
        Ok(self.mk_pair(out))
    }

    fn pf_par_mix(
        &mut self,
        f: &PairFamily,
        g: &PairFamily,
        fixed: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let fnode = self.unwrap_pair(f)?;
        let gnode = self.unwrap_pair(g)?;
        // Rows of g whose second component is exactly `fixed`.
        let fixed_cube = self.cube(Y, fixed);
        let g_rows = self.bdd.and(gnode, fixed_cube);
        let y_all = self.slot_vars(&[Y]);
        let g_rows = self.bdd.exists(g_rows, y_all);
        let to_xpp = self.slot_map(&[(X, XPP)]);
        let g_rows = self.bdd.rename(g_rows, to_xpp);
        // f with its first component moved aside.
        let to_xp = self.slot_map(&[(X, XP)]);
        let f_shifted = self.bdd.rename(fnode, to_xp);
        // x = x′ ∩ x″, per event.
        let mut glue = TRUE;
        for a in (0..self.n).rev() {
            let xp = self.bdd.literal(Self::slot(a, XP), true);
            let xpp = self.bdd.literal(Self::slot(a, XPP), true);
            let both = self.bdd.and(xp, xpp);
            let x = self.bdd.literal(Self::slot(a, X), true);
            let c = self.bdd.iff(x, both);
            glue = self.bdd.and(c, glue);
        }
        let conj = self.bdd.and(f_shifted, g_rows);
        let conj = self.bdd.and(conj, glue);
        let quant = self.slot_vars(&[XP, XPP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_pair(node))
    }

    fn pf_phi_hide(
        &mut self,
        f: &PairFamily,
        hidden: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let node = self.unwrap_pair(f)?;
        let mut vars = Vec::new();
        for a in hidden.iter() {
            vars.push(Self::slot(a, X));
            vars.push(Self::slot(a, Y));
        }
        let quant = self.bdd.intern_varset(vars);
        let projected = self.bdd.exists(node, quant);
        let mut forced = projected;
        for a in hidden.iter() {
            let nx = self.bdd.literal(Self::slot(a, X), false);
            let y = self.bdd.literal(Self::slot(a, Y), true);
            forced = self.bdd.and(forced, nx);
            forced = self.bdd.and(forced, y);
        }
        Ok(self.mk_pair(forced))
    }

    fn pf_phi_rename(
        &mut self,
        f: &PairFamily,
        r: &RenamingRelation,
    ) -> Result<PairFamily, FamilyError> {
        let node = self.unwrap_pair(f)?;
        let map = self.slot_map(&[(X, XP), (Y, YP)]);
        let shifted = self.bdd.rename(node, map);
        let mut rel = TRUE;
        for a in (0..self.n).rev() {
            // Old F covers itself through the relation: x′_a → ⋁_{b∈R(a)} x_b.
            let mut any_img = FALSE;
            for b in r.image_of(a).iter() {
                let lit = self.bdd.literal(Self::slot(b, X), true);
                any_img = self.bdd.or(any_img, lit);
            }
            let xp = self.bdd.literal(Self::slot(a, XP), true);
            let c1 = self.bdd.implies(xp, any_img);
            rel = self.bdd.and(c1, rel);
        }
        for b in (0..self.n).rev() {
            // New F stays inside the image: x_b → ⋁_{a ∈ R⁻¹(b)} x′_a.
            let mut any_pre = FALSE;
            for a in r.preimage_of(b).iter() {
                let lit = self.bdd.literal(Self::slot(a, XP), true);
                any_pre = self.bdd.or(any_pre, lit);
            }
            let xb = self.bdd.literal(Self::slot(b, X), true);
            let c2 = self.bdd.implies(xb, any_pre);
            rel = self.bdd.and(c2, rel);
            // New C is exact: y_b ↔ ⋀_{a ∈ R⁻¹(b)} y′_a.
            let mut all_pre = TRUE;
            for a in r.preimage_of(b).iter().collect::<Vec<_>>().into_iter().rev() {
                let lit = self.bdd.literal(Self::slot(a, YP), true);
                all_pre = self.bdd.and(lit, all_pre);
            }
            let yb = self.bdd.literal(Self::slot(b, Y), true);
            let c3 = self.bdd.iff(yb, all_pre);
            rel = self.bdd.and(c3, rel);
        }
        let conj = self.bdd.and(shifted, rel);
        let quant = self.slot_vars(&[XP, YP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_pair(node))
    }

    fn pf_phi_par_merge(
        &mut self,
        f: &PairFamily,
        g: &PairFamily,
        sync: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let fnode = self.unwrap_pair(f)?;
        let gnode = self.unwrap_pair(g)?;
        let fmap = self.slot_map(&[(X, XP), (Y, YP)]);
        let gmap = self.slot_map(&[(X, XPP), (Y, YPP)]);
        let fsh = self.bdd.rename(fnode, fmap);
        let gsh = self.bdd.rename(gnode, gmap);
        let mut glue = TRUE;
        for a in (0..self.n).rev() {
            let x = self.bdd.literal(Self::slot(a, X), true);
            let xp = self.bdd.literal(Self::slot(a, XP), true);
            let xpp = self.bdd.literal(Self::slot(a, XPP), true);
            let y = self.bdd.literal(Self::slot(a, Y), true);
            let yp = self.bdd.literal(Self::slot(a, YP), true);
            let ypp = self.bdd.literal(Self::slot(a, YPP), true);
            let xor2 = self.bdd.or(xp, xpp);
            let cx = self.bdd.iff(x, xor2);
            let cy = if sync.contains(a) {
                let yor = self.bdd.or(yp, ypp);
                self.bdd.iff(y, yor)
            } else {
                let yand = self.bdd.and(yp, ypp);
                self.bdd.iff(y, yand)
            };
            let ny = self.bdd.not(y);
            let disjoint = self.bdd.implies(x, ny);
            let c = self.bdd.and(cx, cy);
            let c = self.bdd.and(c, disjoint);
            glue = self.bdd.and(c, glue);
        }
        let conj = self.bdd.and(fsh, gsh);
        let conj = self.bdd.and(conj, glue);
        let quant = self.slot_vars(&[XP, YP, XPP, YPP]);
        let node = self.bdd.exists(conj, quant);
        Ok(self.mk_pair(node))
    }

    fn pf_first_disjoint(
        &mut self,
        f: &PairFamily,
        a: EventSet,
    ) -> Result<PairFamily, FamilyError> {
        let mut node = self.unwrap_pair(f)?;
        for e in a.iter() {
            let lit = self.bdd.literal(Self::slot(e, X), false);
            node = self.bdd.and(node, lit);
        }
        Ok(self.mk_pair(node))
    }

    fn pf_first_subset(&mut self, f: &PairFamily, a: EventSet) -> Result<PairFamily, FamilyError> {
        self.pf_first_disjoint(f, a.complement(self.n as usize))
    }

    fn pf_witness(&mut self, f: &PairFamily) -> Result<Option<(EventSet, EventSet)>, FamilyError> {
        let node = self.unwrap_pair(f)?;
        Ok(self.bdd.first_model(node).map(|assignment| {
            let mut u = EventSet::EMPTY;
            let mut v = EventSet::EMPTY;
            for (var, val) in assignment {
                if val {
                    let a = (var / 6) as EventId;
                    match var % 6 {
                        X => u.insert(a),
                        Y => v.insert(a),
                        _ => debug_assert!(false, "family depends on scratch slot"),
                    }
                }
            }
            (u, v)
        }))
    }

    fn pf_enumerate(
        &mut self,
        f: &PairFamily,
        cap: usize,
    ) -> Result<Vec<(EventSet, EventSet)>, FamilyError> {
        let node = self.unwrap_pair(f)?;
        self.pair_members(node, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(bits: u64) -> EventSet {
        EventSet::from_bits(bits)
    }

    #[test]
    fn boolean_algebra_on_cubes() {
        let mut be = BddBackend::new(3);
        let a = be.sf_with_event(0);
        let b = be.sf_with_event(1);
        let ab = be.sf_intersect(&a, &b).unwrap();
        assert!(be.sf_contains(&ab, ev(0b011)).unwrap());
        assert!(!be.sf_contains(&ab, ev(0b001)).unwrap());
        let n = be.sf_complement(&ab).unwrap();
        assert!(be.sf_contains(&n, ev(0b001)).unwrap());
        let all = be.sf_union(&ab, &n).unwrap();
        assert_eq!(all, be.sf_full());
    }

    #[test]
    fn enumeration_is_sorted_and_capped() {
        let mut be = BddBackend::new(3);
        let f = be.sf_with_event(2);
        let members = be.sf_enumerate(&f, 16).unwrap();
        assert_eq!(
            members.iter().map(|v| v.bits()).collect::<Vec<_>>(),
            vec![0b100, 0b101, 0b110, 0b111]
        );
        assert!(matches!(
            be.sf_enumerate(&f, 3),
            Err(FamilyError::CapExceeded { .. })
        ));
    }

    #[test]
    fn ucl_and_dcl_match_definitions() {
        let mut be = BddBackend::new(2);
        let f = be.sf_singleton(ev(0b01));
        let up = be.sf_ucl(&f).unwrap();
        assert_eq!(
            be.sf_enumerate(&up, 8).unwrap(),
            vec![ev(0b01), ev(0b11)]
        );
        let f = be.sf_singleton(ev(0b11));
        let down = be.sf_dcl(&f).unwrap();
        assert_eq!(be.sf_enumerate(&down, 8).unwrap().len(), 4);
    }

    #[test]
    fn canonical_nodes_survive_rebuilding() {
        let mut be = BddBackend::new(4);
        // An arbitrary family built structurally…
        let a = be.sf_with_event(0);
        let b = be.sf_with_event(2);
        let u = be.sf_union(&a, &b).unwrap();
        let f = be.sf_dcl(&u).unwrap();
        // …rebuilt from its member list must be the very same node.
        let members = be.sf_enumerate(&f, 1 << 16).unwrap();
        let mut rebuilt = be.sf_empty();
        for v in members {
            let s = be.sf_singleton(v);
            rebuilt = be.sf_union(&rebuilt, &s).unwrap();
        }
        assert_eq!(f, rebuilt);
        assert_eq!(
            be.family_node_count(&f).unwrap(),
            be.family_node_count(&rebuilt).unwrap()
        );
    }

    #[test]
    fn subset_pairs_and_diag() {
        let mut be = BddBackend::new(2);
        let f = be.pf_subset_pairs().unwrap();
        assert!(be.pf_contains(&f, ev(0b01), ev(0b11)).unwrap());
        assert!(!be.pf_contains(&f, ev(0b10), ev(0b01)).unwrap());
        let d = be.pf_diag_sets(&f).unwrap();
        assert_eq!(be.sf_enumerate(&d, 8).unwrap().len(), 4); // every (W,W) qualifies
    }

    #[test]
    fn backend_and_store_mismatches_are_reported() {
        let mut be1 = BddBackend::new(2);
        let mut be2 = BddBackend::new(2);
        let f = be1.sf_full();
        let g = be2.sf_full();
        assert_eq!(be1.sf_union(&f, &g).unwrap_err(), FamilyError::BackendMismatch);
        let mut ex = crate::setlogic::ExplicitBackend::new(2).unwrap();
        let h = ex.sf_full();
        assert_eq!(be1.sf_union(&f, &h).unwrap_err(), FamilyError::BackendMismatch);
    }

    #[test]
    fn witness_prefers_low_assignments() {
        let mut be = BddBackend::new(3);
        let f = be.sf_with_event(1);
        // Smallest in branch order: only y_1 forced, rest default false.
        assert_eq!(be.sf_witness(&f).unwrap(), Some(ev(0b010)));
        let e = be.sf_empty();
        assert_eq!(be.sf_witness(&e).unwrap(), None);
    }
}
