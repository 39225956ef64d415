//! Incremental square-root-information solver.
//!
//! The estimation problem is kept factorized as a clique tree (Bayes
//! tree). An update removes only the cliques affected by new factors or
//! relinearized variables, relinearizes the factors needed to recreate
//! that top — honoring the graduation parameter μ of robust factors —
//! and re-eliminates the affected subgraph under a fill-reducing
//! ordering before reattaching the untouched subtrees.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::LieGroup;
use crate::graph::{FactorGraph, Key, LinearFactor, TangentMap, Values};

mod ordering;

pub use ordering::min_degree_order;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("indeterminate linear system while eliminating {0}")]
    IndeterminateSystem(Key),
    #[error("new factor key {0} is not connected to the existing graph")]
    DisconnectedFactor(Key),
    #[error("no initial value supplied for new key {0}")]
    MissingInitial(Key),
    #[error("new key {0} does not extend the key range contiguously")]
    NonContiguousKey(Key),
}

type CliqueId = usize;

/// One node of the clique tree: a conditional density on its frontal
/// variables given its separator.
#[derive(Debug, Clone)]
struct Clique {
    /// Frontal keys in elimination order.
    frontals: Vec<Key>,
    /// Separator keys, ordered consistently with the conditional columns.
    separator: Vec<Key>,
    /// Upper-triangular block over the frontal columns.
    r_block: DMatrix<f64>,
    /// Block over the separator columns.
    s_block: DMatrix<f64>,
    rhs: DVector<f64>,
    /// Marginal factor this clique sends to its parent, cached so the
    /// subtree can be reused as an orphan when the top is rebuilt.
    cached: LinearFactor,
    /// Indices of the nonlinear factors absorbed at this clique.
    factors: Vec<usize>,
    parent: Option<CliqueId>,
    children: Vec<CliqueId>,
}

// Record produced when one variable is eliminated.
struct Conditional {
    key: Key,
    separator: Vec<Key>,
    r: DMatrix<f64>,
    s: DMatrix<f64>,
    d: DVector<f64>,
    factors: Vec<usize>,
    marginal: LinearFactor,
}

/// Incremental solver state: the clique tree plus per-variable
/// linearization points and accumulated deltas.
#[derive(Debug, Clone)]
pub struct BayesTree<G: LieGroup> {
    cliques: Vec<Option<Clique>>,
    free: Vec<CliqueId>,
    roots: Vec<CliqueId>,
    clique_of: Vec<Option<CliqueId>>,
    lin_points: Values<G>,
    delta: TangentMap,
    /// Graduation parameter each factor was last linearized with
    /// (`None` until a factor enters the tree or for non-graduated factors).
    factor_mu: Vec<Option<f64>>,
    mu_final: f64,
}

impl<G: LieGroup> BayesTree<G> {
    pub fn new(mu_final: f64) -> Self {
        BayesTree {
            cliques: Vec::new(),
            free: Vec::new(),
            roots: Vec::new(),
            clique_of: Vec::new(),
            lin_points: Values::new(),
            delta: TangentMap::zeros(G::DIM, 0),
            factor_mu: Vec::new(),
            mu_final,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.lin_points.len()
    }

    pub fn contains(&self, key: Key) -> bool {
        self.lin_points.contains(key)
    }

    pub fn linearization_points(&self) -> &Values<G> {
        &self.lin_points
    }

    pub fn delta(&self) -> &TangentMap {
        &self.delta
    }

    /// Replace the stored delta (the accepted step of the optimizer).
    pub fn set_delta(&mut self, delta: TangentMap) {
        assert_eq!(delta.num_keys(), self.delta.num_keys());
        self.delta = delta;
    }

    /// Current estimate: linearization points retracted by the delta.
    pub fn estimate(&self) -> Values<G> {
        self.lin_points.retract_all(&self.delta)
    }

    /// μ used at the last linearization of a factor, if it is in the tree.
    pub fn linearization_mu(&self, factor_index: usize) -> Option<f64> {
        self.factor_mu.get(factor_index).copied().flatten()
    }

    /// Indices of all factors currently eliminated into the tree.
    pub fn factor_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .cliques
            .iter()
            .flatten()
            .flat_map(|c| c.factors.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Graduated incremental update.
    ///
    /// Adds `new_factors` (indices into `graph`), relinearizes the
    /// variables in `relin` at their current estimates, rebuilds the
    /// affected top of the tree with per-factor effective μ, and returns
    /// the set of variables belonging to factors that were linearized
    /// with μ ≠ μ_final (the convex-marked set).
    pub fn update(
        &mut self,
        graph: &FactorGraph<G>,
        new_factors: &[usize],
        relin: &BTreeSet<Key>,
        initials: &Values<G>,
        mu: f64,
    ) -> Result<BTreeSet<Key>, TreeError> {
        if new_factors.is_empty() && relin.iter().all(|k| !self.contains(*k)) {
            return Ok(BTreeSet::new());
        }
        self.factor_mu.resize(graph.len(), None);

        // --- new keys: validate contiguity/connectivity, store initials
        let mut new_keys: BTreeSet<Key> = BTreeSet::new();
        for &fi in new_factors {
            for &k in graph.factor(fi).keys() {
                if !self.contains(k) {
                    new_keys.insert(k);
                }
            }
        }
        let next = self.delta.num_keys();
        for (i, &k) in new_keys.iter().enumerate() {
            if k.0 != next + i {
                return Err(TreeError::NonContiguousKey(k));
            }
        }
        self.check_connectivity(graph, new_factors, &new_keys)?;
        for &k in &new_keys {
            let init = initials
                .get(k)
                .map_err(|_| TreeError::MissingInitial(k))?
                .clone();
            self.lin_points.insert(k, init);
        }
        self.delta.resize(next + new_keys.len());
        if self.clique_of.len() < self.delta.num_keys() {
            self.clique_of.resize(self.delta.num_keys(), None);
        }

        // --- mark and remove the affected top
        let mut marked: BTreeSet<CliqueId> = BTreeSet::new();
        for &k in relin {
            if self.contains(k) && !new_keys.contains(&k) {
                // every clique whose conditional involves k becomes stale
                // once k's linearization point moves
                self.mark_involving(k, &mut marked);
            }
        }
        for &fi in new_factors {
            for &k in graph.factor(fi).keys() {
                if let Some(c) = self.clique_of.get(k.0).copied().flatten() {
                    marked.insert(c);
                }
            }
        }
        // upward closure
        let mut stack: Vec<CliqueId> = marked.iter().copied().collect();
        while let Some(c) = stack.pop() {
            if let Some(p) = self.clique(c).parent {
                if marked.insert(p) {
                    stack.push(p);
                }
            }
        }

        let mut orphans: Vec<CliqueId> = Vec::new();
        let mut removed_frontals: BTreeSet<Key> = BTreeSet::new();
        let mut relin_factors: BTreeSet<usize> = new_factors.iter().copied().collect();
        for &c in &marked {
            let clique = self.clique(c);
            removed_frontals.extend(clique.frontals.iter().copied());
            relin_factors.extend(clique.factors.iter().copied());
            for &ch in &clique.children {
                if !marked.contains(&ch) {
                    orphans.push(ch);
                }
            }
        }
        orphans.sort_unstable();
        for &c in &marked {
            let clique = self.cliques[c].take().expect("marked clique exists");
            for &k in &clique.frontals {
                self.clique_of[k.0] = None;
            }
            self.free.push(c);
        }
        self.roots.retain(|r| !marked.contains(r));

        // --- update linearization points of explicitly relinearized keys
        for &k in relin {
            if removed_frontals.contains(&k) {
                let moved = self
                    .lin_points
                    .get(k)
                    .expect("frontal key has a linearization point")
                    .retract(&self.delta.get_vector(k));
                self.lin_points.insert(k, moved);
                self.delta.set_zero(k);
            }
        }

        let affected: BTreeSet<Key> = removed_frontals
            .iter()
            .copied()
            .chain(new_keys.iter().copied())
            .collect();

        // --- relinearize with per-factor effective μ, collect convex set
        let mut convex: BTreeSet<Key> = BTreeSet::new();
        let mut pool: Vec<LinearFactor> = Vec::new();
        let mut pool_origin: Vec<Option<usize>> = Vec::new();
        for &fi in &relin_factors {
            let factor = graph.factor(fi);
            let lin = factor
                .linearize(&self.lin_points, mu)
                .expect("tree linearization points cover factor keys");
            if factor.kernel.is_graduated() {
                let eff = mu.max(factor.mu_init_local);
                self.factor_mu[fi] = Some(eff);
                if eff != self.mu_final {
                    convex.extend(factor.keys().iter().copied());
                }
            }
            pool.push(lin);
            pool_origin.push(Some(fi));
        }
        for &o in &orphans {
            pool.push(self.clique(o).cached.clone());
            pool_origin.push(None);
        }

        // --- fill-reducing ordering, new keys forced last
        let adjacency: Vec<Vec<Key>> = pool.iter().map(|f| f.keys.clone()).collect();
        let order = min_degree_order(&affected, &adjacency, &new_keys);

        // --- eliminate and rebuild the top
        let conditionals = eliminate(&affected, &order, pool, pool_origin)?;
        let new_roots = self.build_cliques(&order, conditionals);
        self.roots.extend(new_roots);

        // --- reattach orphans below the rebuilt top
        for &o in &orphans {
            let sep = self.clique(o).separator.clone();
            let anchor = sep
                .iter()
                .min_by_key(|k| order.iter().position(|x| x == *k).expect("orphan separator re-eliminated"))
                .copied()
                .expect("orphan separator is nonempty");
            let parent = self.clique_of[anchor.0].expect("anchor has a clique");
            self.clique_mut(o).parent = Some(parent);
            self.clique_mut(parent).children.push(o);
        }

        Ok(convex)
    }

    // Mark the connected set of cliques whose conditional involves `k`:
    // the clique where k is frontal plus every descendant that carries k
    // in its separator.
    fn mark_involving(&self, k: Key, marked: &mut BTreeSet<CliqueId>) {
        let Some(top) = self.clique_of.get(k.0).copied().flatten() else {
            return;
        };
        let mut stack = vec![top];
        while let Some(c) = stack.pop() {
            if !marked.insert(c) {
                continue;
            }
            for &ch in &self.clique(c).children {
                if self.clique(ch).separator.contains(&k) {
                    stack.push(ch);
                }
            }
        }
    }

    fn check_connectivity(
        &self,
        graph: &FactorGraph<G>,
        new_factors: &[usize],
        new_keys: &BTreeSet<Key>,
    ) -> Result<(), TreeError> {
        if new_keys.is_empty() {
            return Ok(());
        }
        let mut grounded: BTreeSet<Key> = BTreeSet::new();
        let mut changed = true;
        while changed {
            changed = false;
            for &fi in new_factors {
                let f = graph.factor(fi);
                let anchored = f.is_prior()
                    || f.keys()
                        .iter()
                        .any(|k| self.contains(*k) || grounded.contains(k));
                if anchored {
                    for &k in f.keys() {
                        if new_keys.contains(&k) && grounded.insert(k) {
                            changed = true;
                        }
                    }
                }
            }
        }
        match new_keys.iter().find(|k| !grounded.contains(k)) {
            Some(&k) => Err(TreeError::DisconnectedFactor(k)),
            None => Ok(()),
        }
    }

    // Build cliques from per-variable conditionals in reverse elimination
    // order; returns the ids of newly created root cliques.
    fn build_cliques(&mut self, order: &[Key], mut conditionals: Vec<Conditional>) -> Vec<CliqueId> {
        let mut new_roots = Vec::new();
        let position = |k: Key, order: &[Key]| order.iter().position(|x| *x == k).unwrap();
        while let Some(cond) = conditionals.pop() {
            if cond.separator.is_empty() {
                let id = self.insert_clique(Clique {
                    frontals: vec![cond.key],
                    separator: Vec::new(),
                    r_block: cond.r,
                    s_block: cond.s,
                    rhs: cond.d,
                    cached: cond.marginal,
                    factors: cond.factors,
                    parent: None,
                    children: Vec::new(),
                });
                self.clique_of[cond.key.0] = Some(id);
                new_roots.push(id);
                continue;
            }
            // parent clique: the one holding the first-eliminated separator key
            let anchor = cond
                .separator
                .iter()
                .min_by_key(|k| position(**k, order))
                .copied()
                .unwrap();
            let parent = self.clique_of[anchor.0].expect("separator variable already has a clique");
            let parent_scope: BTreeSet<Key> = {
                let p = self.clique(parent);
                p.frontals.iter().chain(p.separator.iter()).copied().collect()
            };
            let sep_set: BTreeSet<Key> = cond.separator.iter().copied().collect();
            if parent_scope == sep_set {
                // conditional merges into the parent clique
                self.prepend_frontal(parent, cond);
            } else {
                let id = self.insert_clique(Clique {
                    frontals: vec![cond.key],
                    separator: cond.separator,
                    r_block: cond.r,
                    s_block: cond.s,
                    rhs: cond.d,
                    cached: cond.marginal,
                    factors: cond.factors,
                    parent: Some(parent),
                    children: Vec::new(),
                });
                self.clique_of[cond.key.0] = Some(id);
                self.clique_mut(parent).children.push(id);
            }
        }
        new_roots
    }

    // Grow a clique downward by one frontal variable: the conditional's
    // separator equals the clique scope, so its columns align with
    // [clique frontals | clique separator].
    fn prepend_frontal(&mut self, id: CliqueId, cond: Conditional) {
        let d = G::DIM;
        let clique = self.cliques[id].as_mut().expect("clique exists");
        let nf_old = clique.frontals.len();
        let ns = clique.separator.len();
        let rows_old = clique.r_block.nrows();

        // map conditional separator columns onto the clique scope order
        let scope: Vec<Key> = clique
            .frontals
            .iter()
            .chain(clique.separator.iter())
            .copied()
            .collect();
        let col_of = |k: Key| scope.iter().position(|x| *x == k).unwrap();

        let mut r = DMatrix::zeros(rows_old + d, (nf_old + 1) * d);
        let mut s = DMatrix::zeros(rows_old + d, ns * d);
        let mut rhs = DVector::zeros(rows_old + d);

        // new frontal's own columns
        r.view_mut((0, 0), (d, d)).copy_from(&cond.r);
        for (bi, &k) in cond.separator.iter().enumerate() {
            let block = cond.s.view((0, bi * d), (d, d));
            let c = col_of(k);
            if c < nf_old {
                r.view_mut((0, (c + 1) * d), (d, d)).copy_from(&block);
            } else {
                s.view_mut((0, (c - nf_old) * d), (d, d)).copy_from(&block);
            }
        }
        rhs.rows_mut(0, d).copy_from(&cond.d);
        // shift the existing conditional down and right
        r.view_mut((d, d), (rows_old, nf_old * d))
            .copy_from(&clique.r_block);
        s.view_mut((d, 0), (rows_old, ns * d)).copy_from(&clique.s_block);
        rhs.rows_mut(d, rows_old).copy_from(&clique.rhs);

        clique.frontals.insert(0, cond.key);
        clique.r_block = r;
        clique.s_block = s;
        clique.rhs = rhs;
        let mut factors = cond.factors;
        factors.extend(clique.factors.iter().copied());
        clique.factors = factors;
        self.clique_of[cond.key.0] = Some(id);
    }

    fn insert_clique(&mut self, clique: Clique) -> CliqueId {
        if let Some(id) = self.free.pop() {
            self.cliques[id] = Some(clique);
            id
        } else {
            self.cliques.push(Some(clique));
            self.cliques.len() - 1
        }
    }

    fn clique(&self, id: CliqueId) -> &Clique {
        self.cliques[id].as_ref().expect("live clique id")
    }

    fn clique_mut(&mut self, id: CliqueId) -> &mut Clique {
        self.cliques[id].as_mut().expect("live clique id")
    }

    fn live_cliques(&self) -> impl Iterator<Item = &Clique> {
        self.cliques.iter().flatten()
    }

    /// Gauss-Newton step: full back-substitution of the assembled
    /// triangular system, producing a delta from the linearization points.
    pub fn solve_gn(&self) -> Result<TangentMap, TreeError> {
        let d = G::DIM;
        let mut delta = TangentMap::zeros(d, self.delta.num_keys());
        // parents before children so separators are resolved
        let mut stack: Vec<CliqueId> = self.roots.clone();
        while let Some(id) = stack.pop() {
            let clique = self.clique(id);
            let mut rhs = clique.rhs.clone();
            if !clique.separator.is_empty() {
                let mut sep = DVector::zeros(clique.separator.len() * d);
                for (i, &k) in clique.separator.iter().enumerate() {
                    sep.rows_mut(i * d, d)
                        .copy_from_slice(delta.get(k));
                }
                rhs -= &clique.s_block * sep;
            }
            let sol = clique
                .r_block
                .clone()
                .solve_upper_triangular(&rhs)
                .ok_or_else(|| TreeError::IndeterminateSystem(clique.frontals[0]))?;
            for (i, &k) in clique.frontals.iter().enumerate() {
                delta.set(k, &DVector::from_column_slice(&sol.as_slice()[i * d..(i + 1) * d]));
            }
            stack.extend(clique.children.iter().copied());
        }
        Ok(delta)
    }

    /// Gradient of the linearized quadratic at zero delta: `g = Rᵀd`.
    pub fn gradient(&self) -> TangentMap {
        let d = G::DIM;
        let mut g = TangentMap::zeros(d, self.delta.num_keys());
        for clique in self.live_cliques() {
            let gf = clique.r_block.transpose() * &clique.rhs;
            for (i, &k) in clique.frontals.iter().enumerate() {
                let mut cur = g.get_vector(k);
                cur += gf.rows(i * d, d);
                g.set(k, &cur);
            }
            if !clique.separator.is_empty() {
                let gs = clique.s_block.transpose() * &clique.rhs;
                for (i, &k) in clique.separator.iter().enumerate() {
                    let mut cur = g.get_vector(k);
                    cur += gs.rows(i * d, d);
                    g.set(k, &cur);
                }
            }
        }
        g
    }

    /// Squared norm `|R·x|²` of the assembled triangular factor applied
    /// to a tangent vector; the quadratic term of the model.
    pub fn r_norm_squared(&self, x: &TangentMap) -> f64 {
        let d = G::DIM;
        let mut total = 0.0;
        for clique in self.live_cliques() {
            let nf = clique.frontals.len();
            let mut xf = DVector::zeros(nf * d);
            for (i, &k) in clique.frontals.iter().enumerate() {
                xf.rows_mut(i * d, d).copy_from_slice(x.get(k));
            }
            let mut rx = &clique.r_block * xf;
            if !clique.separator.is_empty() {
                let mut xs = DVector::zeros(clique.separator.len() * d);
                for (i, &k) in clique.separator.iter().enumerate() {
                    xs.rows_mut(i * d, d).copy_from_slice(x.get(k));
                }
                rx += &clique.s_block * xs;
            }
            total += rx.norm_squared();
        }
        total
    }

    /// Steepest-descent step scaled to the Cauchy point:
    /// `Δ_G = (|g|²/|Rg|²)·g` with `g = Rᵀd`.
    pub fn solve_gradient(&self) -> TangentMap {
        let g = self.gradient();
        let gg = g.dot(&g);
        if gg == 0.0 {
            return g;
        }
        let rg = self.r_norm_squared(&g);
        g.scale(gg / rg)
    }

    /// Textual outline of the clique tree, one clique per line:
    /// `frontals | separator`, children indented under their parent.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<(CliqueId, usize)> =
            self.roots.iter().rev().map(|&r| (r, 0)).collect();
        while let Some((id, depth)) = stack.pop() {
            let clique = self.clique(id);
            let f: Vec<String> = clique.frontals.iter().map(|k| k.to_string()).collect();
            let s: Vec<String> = clique.separator.iter().map(|k| k.to_string()).collect();
            out.push_str(&"  ".repeat(depth));
            out.push_str(&f.join(" "));
            out.push_str(" | ");
            out.push_str(&s.join(" "));
            out.push('\n');
            for &ch in clique.children.iter().rev() {
                stack.push((ch, depth + 1));
            }
        }
        out
    }

    /// Structural validity: frontal sets partition the variables and
    /// every separator is contained in the parent's scope.
    #[cfg(test)]
    fn check_validity(&self) {
        let mut seen: BTreeSet<Key> = BTreeSet::new();
        for (id, clique) in self.cliques.iter().enumerate() {
            let Some(clique) = clique else { continue };
            for &k in &clique.frontals {
                assert!(seen.insert(k), "frontal {k} appears in two cliques");
                assert_eq!(self.clique_of[k.0], Some(id));
            }
            if let Some(p) = clique.parent {
                let parent = self.clique(p);
                let scope: BTreeSet<Key> = parent
                    .frontals
                    .iter()
                    .chain(parent.separator.iter())
                    .copied()
                    .collect();
                for k in &clique.separator {
                    assert!(scope.contains(k), "separator {k} missing from parent scope");
                }
                assert!(parent.children.contains(&id));
            } else {
                assert!(clique.separator.is_empty());
                assert!(self.roots.contains(&id));
            }
        }
        assert_eq!(seen.len(), self.num_variables());
    }
}

/// Variables whose accumulated delta exceeds the relinearization
/// threshold. A threshold of zero marks every key that moved at all.
pub fn mark_fluid(delta: &TangentMap, threshold: f64) -> BTreeSet<Key> {
    delta
        .keys()
        .filter(|&k| delta.key_norm(k) > threshold)
        .collect()
}

// Sequential elimination of the affected subgraph. `pool` holds the
// relinearized factors plus orphan marginals; raw factor indices in
// `origin` are assigned to the clique of their first-eliminated variable.
fn eliminate(
    affected: &BTreeSet<Key>,
    order: &[Key],
    pool: Vec<LinearFactor>,
    origin: Vec<Option<usize>>,
) -> Result<Vec<Conditional>, TreeError> {
    struct Entry {
        factor: LinearFactor,
        origin: Option<usize>,
    }
    let position: std::collections::BTreeMap<Key, usize> =
        order.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut entries: Vec<Option<Entry>> = pool
        .into_iter()
        .zip(origin)
        .map(|(factor, origin)| Some(Entry { factor, origin }))
        .collect();
    // var -> factor entries touching it
    let mut touching: std::collections::BTreeMap<Key, Vec<usize>> =
        affected.iter().map(|&k| (k, Vec::new())).collect();
    for (i, e) in entries.iter().enumerate() {
        for k in &e.as_ref().unwrap().factor.keys {
            touching
                .get_mut(k)
                .expect("factor key inside affected set")
                .push(i);
        }
    }

    let mut conditionals = Vec::with_capacity(order.len());
    for &v in order {
        let ids = touching.remove(&v).unwrap_or_default();
        let mut pulled: Vec<Entry> = Vec::new();
        for id in ids {
            if let Some(e) = entries[id].take() {
                pulled.push(e);
            }
        }
        // an unconstrained variable has no remaining factor: singular
        if pulled.is_empty() {
            return Err(TreeError::IndeterminateSystem(v));
        }
        // involved columns: v first, then remaining vars by elimination position
        let mut others: Vec<Key> = pulled
            .iter()
            .flat_map(|e| e.factor.keys.iter().copied())
            .filter(|k| *k != v)
            .collect();
        others.sort_by_key(|k| position[k]);
        others.dedup();
        let involved: Vec<Key> = std::iter::once(v).chain(others.iter().copied()).collect();
        let col_of: std::collections::BTreeMap<Key, usize> = involved
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i))
            .collect();

        let dims: Vec<usize> = pulled
            .iter()
            .map(|e| e.factor.rhs.len())
            .collect();
        let rows: usize = dims.iter().sum();
        let d = pulled[0]
            .factor
            .jacobians
            .first()
            .map(|j| j.ncols())
            .expect("factor has at least one block");
        let cols = involved.len() * d + 1;
        let mut stacked = DMatrix::zeros(rows, cols);
        let mut row = 0;
        for e in &pulled {
            let h = e.factor.rhs.len();
            for (k, jac) in e.factor.keys.iter().zip(e.factor.jacobians.iter()) {
                let c = col_of[k] * d;
                stacked.view_mut((row, c), (h, d)).copy_from(jac);
            }
            stacked
                .view_mut((row, cols - 1), (h, 1))
                .copy_from(&e.factor.rhs);
            row += h;
        }

        let qr = stacked.qr();
        let r_aug = qr.r();
        let avail = r_aug.nrows();
        if avail < d {
            return Err(TreeError::IndeterminateSystem(v));
        }
        for i in 0..d {
            if r_aug[(i, i)].abs() < 1e-10 {
                return Err(TreeError::IndeterminateSystem(v));
            }
        }

        let r = r_aug.view((0, 0), (d, d)).into_owned();
        let s = r_aug.view((0, d), (d, cols - 1 - d)).into_owned();
        let dv = DVector::from(r_aug.view((0, cols - 1), (d, 1)).column(0).into_owned());

        // remaining rows form the marginal on the other variables
        let mrows = avail.min(cols - 1).saturating_sub(d);
        let marginal = if mrows > 0 && !others.is_empty() {
            let jac_all = r_aug.view((d, d), (mrows, cols - 1 - d)).into_owned();
            let jacobians: Vec<DMatrix<f64>> = (0..others.len())
                .map(|i| jac_all.view((0, i * d), (mrows, d)).into_owned())
                .collect();
            LinearFactor {
                keys: others.clone(),
                jacobians,
                rhs: DVector::from(r_aug.view((d, cols - 1), (mrows, 1)).column(0).into_owned()),
            }
        } else {
            LinearFactor {
                keys: Vec::new(),
                jacobians: Vec::new(),
                rhs: DVector::zeros(0),
            }
        };

        let factors: Vec<usize> = {
            let mut f: Vec<usize> = pulled.iter().filter_map(|e| e.origin).collect();
            f.sort_unstable();
            f
        };

        if !marginal.keys.is_empty() {
            let id = entries.len();
            for k in &marginal.keys {
                touching
                    .get_mut(k)
                    .expect("marginal key still pending")
                    .push(id);
            }
            entries.push(Some(Entry {
                factor: marginal.clone(),
                origin: None,
            }));
        }

        conditionals.push(Conditional {
            key: v,
            separator: others,
            r,
            s,
            d: dv,
            factors,
            marginal,
        });
    }
    Ok(conditionals)
}
