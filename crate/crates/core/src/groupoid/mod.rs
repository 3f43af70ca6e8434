//! Finite groupoids as explicit arrow tables, their nerves, phase cochains
//! and multiplicative simplicial coboundaries.

mod cochain;
mod construct;
mod json;

use std::fmt;

use thiserror::Error;

pub use cochain::{coboundary, is_cocycle, CocycleCheck, PhaseCochain, PHASE_MODULUS_TOL};
pub use construct::{action_groupoid, group_groupoid, pair_groupoid, pair_times_group, GroupTable};
pub use json::GroupoidJson;

pub type ObjectId = usize;
pub type ArrowId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupoidError {
    #[error("dangling {kind} id {id} in {table} table")]
    DanglingId {
        kind: &'static str,
        id: usize,
        table: &'static str,
    },
    #[error("arrow ids must be dense and ordered: expected {expected}, found {found}")]
    NonDenseArrowId { expected: usize, found: usize },
    #[error("{table} table has no entry for id {id}")]
    MissingEntry { table: &'static str, id: usize },
    #[error("conflicting products for ({0}, {1})")]
    ConflictingProduct(ArrowId, ArrowId),
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("coboundary of a degree-{0} cochain is not supported")]
    UnsupportedDegree(usize),
    #[error("chain {chain:?} does not have length {degree}")]
    WrongChainLength { chain: Vec<ArrowId>, degree: usize },
    #[error("cochain has no value on chain {0:?}")]
    MissingValue(Vec<ArrowId>),
    #[error("cochain value on {chain:?} has modulus {modulus}, expected 1")]
    NotUnitModulus { chain: Vec<ArrowId>, modulus: f64 },
    #[error("malformed groupoid json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrow {
    pub src: ObjectId,
    pub tgt: ObjectId,
}

/// A violated groupoid axiom, naming the offending tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    /// `s(first) = t(second)` but no product is stored.
    MissingProduct { first: ArrowId, second: ArrowId },
    /// A product is stored for a non-composable pair.
    SpuriousProduct { first: ArrowId, second: ArrowId },
    /// `t(γη) ≠ t(γ)` or `s(γη) ≠ s(η)`.
    ProductEndpoints { first: ArrowId, second: ArrowId, product: ArrowId },
    Associativity { triple: [ArrowId; 3], left: ArrowId, right: ArrowId },
    UnitEndpoints { object: ObjectId, arrow: ArrowId },
    LeftUnit { arrow: ArrowId },
    RightUnit { arrow: ArrowId },
    InverseEndpoints { arrow: ArrowId, inverse: ArrowId },
    LeftInverse { arrow: ArrowId },
    RightInverse { arrow: ArrowId },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AxiomViolation::*;
        match self {
            MissingProduct { first, second } => write!(f, "missing product for composable pair ({first}, {second})"),
            SpuriousProduct { first, second } => write!(f, "product stored for non-composable pair ({first}, {second})"),
            ProductEndpoints { first, second, product } => {
                write!(f, "product {first}·{second} = {product} has wrong endpoints")
            }
            Associativity { triple, left, right } => write!(
                f,
                "associativity fails on ({}, {}, {}): ({}·{})·{} = {left} but {}·({}·{}) = {right}",
                triple[0], triple[1], triple[2], triple[0], triple[1], triple[2], triple[0], triple[1], triple[2]
            ),
            UnitEndpoints { object, arrow } => write!(f, "unit {arrow} of object {object} is not a loop at it"),
            LeftUnit { arrow } => write!(f, "unit(t({arrow}))·{arrow} ≠ {arrow}"),
            RightUnit { arrow } => write!(f, "{arrow}·unit(s({arrow})) ≠ {arrow}"),
            InverseEndpoints { arrow, inverse } => write!(f, "inverse {inverse} of {arrow} has wrong endpoints"),
            LeftInverse { arrow } => write!(f, "{arrow}·{arrow}⁻¹ ≠ unit(t({arrow}))"),
            RightInverse { arrow } => write!(f, "{arrow}⁻¹·{arrow} ≠ unit(s({arrow}))"),
        }
    }
}

/// A finite groupoid with dense integer object and arrow ids.
///
/// Products compose right to left: `mult(γ, η)` is defined iff `s(γ) = t(η)`.
/// Multiplication is a flat `n_arrows × n_arrows` table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupoid {
    n_objects: usize,
    arrows: Vec<Arrow>,
    mult: Vec<Option<ArrowId>>,
    inv: Vec<ArrowId>,
    unit: Vec<ArrowId>,
    by_target: Vec<Vec<ArrowId>>,
}

impl FiniteGroupoid {
    /// Assemble a groupoid from raw tables. Only structural consistency (ids
    /// resolve, tables total) is checked here; axioms are checked by
    /// [`FiniteGroupoid::validate`].
    pub fn from_tables(
        n_objects: usize,
        arrows: Vec<Arrow>,
        mult: &[(ArrowId, ArrowId, ArrowId)],
        inv: &[(ArrowId, ArrowId)],
        unit: &[(ObjectId, ArrowId)],
    ) -> Result<Self, GroupoidError> {
        let n = arrows.len();
        let dangling = |kind, id, table| GroupoidError::DanglingId { kind, id, table };
        for a in &arrows {
            if a.src >= n_objects {
                return Err(dangling("object", a.src, "arrows"));
            }
            if a.tgt >= n_objects {
                return Err(dangling("object", a.tgt, "arrows"));
            }
        }
        let mut table = vec![None; n * n];
        for &(a, b, c) in mult {
            for id in [a, b, c] {
                if id >= n {
                    return Err(dangling("arrow", id, "mult"));
                }
            }
            match table[a * n + b] {
                Some(prev) if prev != c => return Err(GroupoidError::ConflictingProduct(a, b)),
                _ => table[a * n + b] = Some(c),
            }
        }
        let mut inv_table = vec![None; n];
        for &(a, b) in inv {
            if a >= n {
                return Err(dangling("arrow", a, "inv"));
            }
            if b >= n {
                return Err(dangling("arrow", b, "inv"));
            }
            inv_table[a] = Some(b);
        }
        let inv_table = inv_table
            .into_iter()
            .enumerate()
            .map(|(id, v)| v.ok_or(GroupoidError::MissingEntry { table: "inv", id }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut unit_table = vec![None; n_objects];
        for &(o, a) in unit {
            if o >= n_objects {
                return Err(dangling("object", o, "unit"));
            }
            if a >= n {
                return Err(dangling("arrow", a, "unit"));
            }
            unit_table[o] = Some(a);
        }
        let unit_table = unit_table
            .into_iter()
            .enumerate()
            .map(|(id, v)| v.ok_or(GroupoidError::MissingEntry { table: "unit", id }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut by_target = vec![Vec::new(); n_objects];
        for (id, a) in arrows.iter().enumerate() {
            by_target[a.tgt].push(id);
        }
        Ok(FiniteGroupoid {
            n_objects,
            arrows,
            mult: table,
            inv: inv_table,
            unit: unit_table,
            by_target,
        })
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn src(&self, a: ArrowId) -> ObjectId {
        self.arrows[a].src
    }

    pub fn tgt(&self, a: ArrowId) -> ObjectId {
        self.arrows[a].tgt
    }

    pub fn composable(&self, a: ArrowId, b: ArrowId) -> bool {
        self.src(a) == self.tgt(b)
    }

    pub fn mult(&self, a: ArrowId, b: ArrowId) -> Option<ArrowId> {
        self.mult[a * self.n_arrows() + b]
    }

    pub fn inv(&self, a: ArrowId) -> ArrowId {
        self.inv[a]
    }

    pub fn unit(&self, o: ObjectId) -> ArrowId {
        self.unit[o]
    }

    pub fn is_unit(&self, a: ArrowId) -> bool {
        self.unit[self.tgt(a)] == a
    }

    /// Arrows with the given target object (the `t`-fiber).
    pub fn with_target(&self, o: ObjectId) -> &[ArrowId] {
        &self.by_target[o]
    }

    /// All stored products as `(a, b, ab)` in lexicographic order.
    pub fn products(&self) -> Vec<(ArrowId, ArrowId, ArrowId)> {
        let n = self.n_arrows();
        (0..n * n)
            .filter_map(|k| self.mult[k].map(|c| (k / n, k % n, c)))
            .collect()
    }

    /// Overwrite one product entry (used to build deliberately broken tables).
    pub fn with_product(mut self, a: ArrowId, b: ArrowId, c: Option<ArrowId>) -> Self {
        let n = self.n_arrows();
        self.mult[a * n + b] = c;
        self
    }

    /// Check every groupoid axiom; an empty report means the tables define a groupoid.
    pub fn validate(&self) -> Vec<AxiomViolation> {
        use AxiomViolation::*;
        let n = self.n_arrows();
        let mut report = Vec::new();
        for a in 0..n {
            for b in 0..n {
                match (self.composable(a, b), self.mult(a, b)) {
                    (true, None) => report.push(MissingProduct { first: a, second: b }),
                    (false, Some(_)) => report.push(SpuriousProduct { first: a, second: b }),
                    (true, Some(c)) => {
                        if self.tgt(c) != self.tgt(a) || self.src(c) != self.src(b) {
                            report.push(ProductEndpoints { first: a, second: b, product: c });
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for a in 0..n {
            for b in self.with_target(self.src(a)).to_vec() {
                let Some(ab) = self.mult(a, b) else { continue };
                for &c in self.with_target(self.src(b)) {
                    let (Some(bc), true) = (self.mult(b, c), self.composable(ab, c)) else { continue };
                    let left = self.mult(ab, c);
                    let right = self.mult(a, bc);
                    if let (Some(l), Some(r)) = (left, right) {
                        if l != r {
                            report.push(Associativity { triple: [a, b, c], left: l, right: r });
                        }
                    }
                }
            }
        }
        for o in 0..self.n_objects {
            let u = self.unit(o);
            if self.src(u) != o || self.tgt(u) != o {
                report.push(UnitEndpoints { object: o, arrow: u });
            }
        }
        for a in 0..n {
            if self.mult(self.unit(self.tgt(a)), a) != Some(a) {
                report.push(LeftUnit { arrow: a });
            }
            if self.mult(a, self.unit(self.src(a))) != Some(a) {
                report.push(RightUnit { arrow: a });
            }
            let i = self.inv(a);
            if self.src(i) != self.tgt(a) || self.tgt(i) != self.src(a) {
                report.push(InverseEndpoints { arrow: a, inverse: i });
                continue;
            }
            if self.mult(a, i) != Some(self.unit(self.tgt(a))) {
                report.push(LeftInverse { arrow: a });
            }
            if self.mult(i, a) != Some(self.unit(self.src(a))) {
                report.push(RightInverse { arrow: a });
            }
        }
        report
    }

    /// Composable `k`-chains `(γ₁,…,γ_k)` with `s(γ_i) = t(γ_{i+1})`, in
    /// lexicographic order of arrow ids.
    pub fn nerve(&self, k: usize) -> Vec<Vec<ArrowId>> {
        let mut chains: Vec<Vec<ArrowId>> = if k == 0 {
            return (0..self.n_objects).map(|o| vec![self.unit(o)]).collect();
        } else {
            (0..self.n_arrows()).map(|a| vec![a]).collect()
        };
        for _ in 1..k {
            let mut next = Vec::new();
            for c in &chains {
                let last = *c.last().expect("nonempty chain");
                let mut tails: Vec<ArrowId> = self.with_target(self.src(last)).to_vec();
                tails.sort_unstable();
                for b in tails {
                    let mut c2 = c.clone();
                    c2.push(b);
                    next.push(c2);
                }
            }
            chains = next;
        }
        chains
    }

    /// Disjoint union; arrow and object ids of later pieces are shifted.
    pub fn disjoint_union(parts: &[FiniteGroupoid]) -> FiniteGroupoid {
        let mut arrows = Vec::new();
        let mut mult = Vec::new();
        let mut inv = Vec::new();
        let mut unit = Vec::new();
        let (mut obj_off, mut arr_off) = (0, 0);
        for g in parts {
            arrows.extend(g.arrows.iter().map(|a| Arrow {
                src: a.src + obj_off,
                tgt: a.tgt + obj_off,
            }));
            mult.extend(g.products().into_iter().map(|(a, b, c)| (a + arr_off, b + arr_off, c + arr_off)));
            inv.extend((0..g.n_arrows()).map(|a| (a + arr_off, g.inv(a) + arr_off)));
            unit.extend((0..g.n_objects).map(|o| (o + obj_off, g.unit(o) + arr_off)));
            obj_off += g.n_objects;
            arr_off += g.n_arrows();
        }
        FiniteGroupoid::from_tables(obj_off, arrows, &mult, &inv, &unit).expect("union of valid tables")
    }

    /// Rename arrows: old arrow `a` becomes `perm[a]`.
    pub fn relabel(&self, perm: &[ArrowId]) -> FiniteGroupoid {
        let n = self.n_arrows();
        assert_eq!(perm.len(), n);
        let mut arrows = vec![Arrow { src: 0, tgt: 0 }; n];
        for a in 0..n {
            arrows[perm[a]] = self.arrows[a];
        }
        let mult: Vec<_> = self
            .products()
            .into_iter()
            .map(|(a, b, c)| (perm[a], perm[b], perm[c]))
            .collect();
        let inv: Vec<_> = (0..n).map(|a| (perm[a], perm[self.inv(a)])).collect();
        let unit: Vec<_> = (0..self.n_objects).map(|o| (o, perm[self.unit(o)])).collect();
        FiniteGroupoid::from_tables(self.n_objects, arrows, &mult, &inv, &unit).expect("relabeling preserves structure")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: scan every triple of arrows directly from the
    /// `mult` table without using the `t`-fiber index.
    fn brute_force_associativity_failures(g: &FiniteGroupoid) -> Vec<[ArrowId; 3]> {
        let n = g.n_arrows();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let left = g.mult(a, b).and_then(|ab| g.mult(ab, c));
                    let right = g.mult(b, c).and_then(|bc| g.mult(a, bc));
                    if let (Some(l), Some(r)) = (left, right) {
                        if l != r {
                            out.push([a, b, c]);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn pair_groupoid_is_valid() {
        assert!(pair_groupoid(3).validate().is_empty());
        assert!(group_groupoid(&GroupTable::cyclic(4)).validate().is_empty());
    }

    #[test]
    fn redirected_product_is_reported_with_its_triple() {
        let g = pair_groupoid(3);
        // Pair(n) has no parallel arrows, so a redirected product breaks both
        // endpoints and associativity.
        let a01 = 1;
        let a12 = 5;
        let a02 = 2;
        assert_eq!(g.mult(a01, a12), Some(a02));
        let broken = g.clone().with_product(a01, a12, Some(0));
        let report = broken.validate();
        let expected = brute_force_associativity_failures(&broken);
        assert!(!expected.is_empty());
        for t in &expected {
            assert!(
                report
                    .iter()
                    .any(|v| matches!(v, AxiomViolation::Associativity { triple, .. } if triple == t)),
                "triple {t:?} not reported"
            );
        }
        assert!(report.contains(&AxiomViolation::ProductEndpoints {
            first: a01,
            second: a12,
            product: 0
        }));
    }

    #[test]
    fn associativity_only_violation_in_a_group() {
        // ℤ/2 embedded in a table where 1·1 is redirected to 1: units and
        // inverses break too, but associativity must name (1,1,1).
        let g = group_groupoid(&GroupTable::cyclic(2)).with_product(1, 1, Some(1));
        let report = g.validate();
        let scan = brute_force_associativity_failures(&g);
        let reported: Vec<[ArrowId; 3]> = report
            .iter()
            .filter_map(|v| match v {
                AxiomViolation::Associativity { triple, .. } => Some(*triple),
                _ => None,
            })
            .collect();
        assert_eq!(reported, scan);
    }

    #[test]
    fn nerve_counts() {
        assert_eq!(pair_groupoid(2).nerve(2).len(), 8);
        assert_eq!(group_groupoid(&GroupTable::cyclic(2)).nerve(2).len(), 4);
        assert_eq!(pair_groupoid(3).nerve(3).len(), 81);
        let brute = |g: &FiniteGroupoid| {
            let n = g.n_arrows();
            let mut c = 0;
            for a in 0..n {
                for b in 0..n {
                    for d in 0..n {
                        if g.composable(a, b) && g.composable(b, d) {
                            c += 1;
                        }
                    }
                }
            }
            c
        };
        for n in 1..=4 {
            let g = pair_groupoid(n);
            assert_eq!(g.nerve(3).len(), brute(&g));
            assert_eq!(g.nerve(3).len(), n.pow(4));
        }
    }

    #[test]
    fn nerve_is_lexicographic() {
        let g = pair_groupoid(3);
        let pairs = g.nerve(2);
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
    }

    #[test]
    fn dangling_ids_are_structural_errors() {
        let err = FiniteGroupoid::from_tables(1, vec![Arrow { src: 0, tgt: 3 }], &[], &[(0, 0)], &[(0, 0)]);
        assert!(matches!(err, Err(GroupoidError::DanglingId { .. })));
        let err = FiniteGroupoid::from_tables(1, vec![Arrow { src: 0, tgt: 0 }], &[(0, 0, 7)], &[(0, 0)], &[(0, 0)]);
        assert!(matches!(err, Err(GroupoidError::DanglingId { table: "mult", .. })));
        let err = FiniteGroupoid::from_tables(1, vec![Arrow { src: 0, tgt: 0 }], &[], &[], &[(0, 0)]);
        assert!(matches!(err, Err(GroupoidError::MissingEntry { table: "inv", .. })));
    }

    #[test]
    fn union_and_relabel_stay_valid() {
        let g = FiniteGroupoid::disjoint_union(&[pair_groupoid(2), group_groupoid(&GroupTable::cyclic(3))]);
        assert_eq!(g.n_objects(), 3);
        assert_eq!(g.n_arrows(), 7);
        assert!(g.validate().is_empty());
        let perm: Vec<usize> = (0..7).rev().collect();
        assert!(g.relabel(&perm).validate().is_empty());
    }
}
