use super::{Arrow, FiniteGroupoid, GroupoidError};

/// A finite group given by its multiplication table `mul[a * order + b] = ab`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    mul: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl GroupTable {
    pub fn new(order: usize, mul: Vec<usize>) -> Result<Self, GroupoidError> {
        let bad = |m: String| Err(GroupoidError::InvalidGroup(m));
        if order == 0 {
            return bad("empty group".into());
        }
        if mul.len() != order * order {
            return bad(format!("table has {} entries, expected {}", mul.len(), order * order));
        }
        if let Some(&x) = mul.iter().find(|&&x| x >= order) {
            return bad(format!("entry {x} out of range"));
        }
        let m = |a: usize, b: usize| mul[a * order + b];
        let Some(identity) = (0..order).find(|&e| (0..order).all(|a| m(e, a) == a && m(a, e) == a)) else {
            return bad("no identity element".into());
        };
        let mut inverse = Vec::with_capacity(order);
        for a in 0..order {
            match (0..order).find(|&b| m(a, b) == identity && m(b, a) == identity) {
                Some(b) => inverse.push(b),
                None => return bad(format!("element {a} has no inverse")),
            }
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return bad(format!("associativity fails on ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(GroupTable {
            order,
            mul,
            identity,
            inverse,
        })
    }

    pub fn cyclic(n: usize) -> Self {
        Self::new(n, (0..n * n).map(|k| (k / n + k % n) % n).collect()).expect("cyclic group")
    }

    /// Direct product; element `(a, b)` has index `a * other.order + b`.
    pub fn product(&self, other: &GroupTable) -> Self {
        let (n, m) = (self.order, other.order);
        let mul = (0..n * m * n * m)
            .map(|k| {
                let (x, y) = (k / (n * m), k % (n * m));
                self.mul(x / m, y / m) * m + other.mul(x % m, y % m)
            })
            .collect();
        Self::new(n * m, mul).expect("product of groups")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

/// The pair groupoid on `n` objects. Arrow `(i, j)` has id `i * n + j`,
/// target `i` and source `j`, so `(i, j)·(j, k) = (i, k)`.
pub fn pair_groupoid(n: usize) -> FiniteGroupoid {
    pair_times_group(n, &GroupTable::cyclic(1))
}

/// A group as a one-object groupoid.
pub fn group_groupoid(g: &GroupTable) -> FiniteGroupoid {
    pair_times_group(1, g)
}

/// The transitive groupoid `Pair(n) × G`. Arrow `(i, j, g)` has id
/// `(i * n + j) * |G| + g`.
pub fn pair_times_group(n: usize, g: &GroupTable) -> FiniteGroupoid {
    let k = g.order();
    let id = |i: usize, j: usize, x: usize| (i * n + j) * k + x;
    let mut arrows = Vec::with_capacity(n * n * k);
    let mut mult = Vec::new();
    let mut inv = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for x in 0..k {
                arrows.push(Arrow { src: j, tgt: i });
                inv.push((id(i, j, x), id(j, i, g.inverse(x))));
                for l in 0..n {
                    for y in 0..k {
                        mult.push((id(i, j, x), id(j, l, y), id(i, l, g.mul(x, y))));
                    }
                }
            }
        }
    }
    let unit: Vec<_> = (0..n).map(|i| (i, id(i, i, g.identity()))).collect();
    FiniteGroupoid::from_tables(n, arrows, &mult, &inv, &unit).expect("pair groupoid tables")
}

/// The action groupoid `G ⋉ X` of `action[g][x] = g·x` on `X = {0..n}`.
/// Arrow `(g, x)` has id `g * |X| + x`, source `x` and target `g·x`.
pub fn action_groupoid(g: &GroupTable, action: &[Vec<usize>]) -> Result<FiniteGroupoid, GroupoidError> {
    let bad = |m: String| Err(GroupoidError::InvalidAction(m));
    if action.len() != g.order() {
        return bad(format!("{} group elements act, expected {}", action.len(), g.order()));
    }
    let n = action.first().map_or(0, Vec::len);
    for (a, row) in action.iter().enumerate() {
        if row.len() != n {
            return bad(format!("element {a} acts on {} points, expected {n}", row.len()));
        }
        if let Some(&y) = row.iter().find(|&&y| y >= n) {
            return bad(format!("element {a} sends a point to {y}, outside the set"));
        }
    }
    if (0..n).any(|x| action[g.identity()][x] != x) {
        return bad("identity does not act trivially".into());
    }
    for a in 0..g.order() {
        for b in 0..g.order() {
            for x in 0..n {
                if action[g.mul(a, b)][x] != action[a][action[b][x]] {
                    return bad(format!("(g h)·x ≠ g·(h·x) for g={a}, h={b}, x={x}"));
                }
            }
        }
    }
    let id = |a: usize, x: usize| a * n + x;
    let mut arrows = Vec::new();
    let mut mult = Vec::new();
    let mut inv = Vec::new();
    for a in 0..g.order() {
        for x in 0..n {
            let y = action[a][x];
            arrows.push(Arrow { src: x, tgt: y });
            inv.push((id(a, x), id(g.inverse(a), y)));
            // (b, y)·(a, x) = (ba, x) for every b
            for b in 0..g.order() {
                mult.push((id(b, y), id(a, x), id(g.mul(b, a), x)));
            }
        }
    }
    let unit: Vec<_> = (0..n).map(|x| (x, id(g.identity(), x))).collect();
    FiniteGroupoid::from_tables(n, arrows, &mult, &inv, &unit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_groupoid_ids_and_products() {
        let g = pair_groupoid(3);
        let a = |i: usize, j: usize| i * 3 + j;
        assert_eq!(g.tgt(a(0, 1)), 0);
        assert_eq!(g.src(a(0, 1)), 1);
        assert_eq!(g.mult(a(0, 1), a(1, 0)), Some(a(0, 0)));
        assert_eq!(g.mult(a(0, 1), a(0, 1)), None);
        assert_eq!(g.inv(a(2, 0)), a(0, 2));
    }

    #[test]
    fn bad_group_tables_are_rejected() {
        assert!(GroupTable::new(2, vec![0, 1, 1, 1]).is_err());
        assert!(GroupTable::new(2, vec![0, 1, 1]).is_err());
        // a non-associative loop of order 5 (no element repetition in rows/cols)
        let loop5 = vec![
            0, 1, 2, 3, 4, //
            1, 0, 3, 4, 2, //
            2, 4, 0, 1, 3, //
            3, 2, 4, 0, 1, //
            4, 3, 1, 2, 0,
        ];
        assert!(matches!(GroupTable::new(5, loop5), Err(GroupoidError::InvalidGroup(_))));
    }

    #[test]
    fn cyclic_rotation_action() {
        let z4 = GroupTable::cyclic(4);
        let action: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|x| (x + a) % 4).collect()).collect();
        let g = action_groupoid(&z4, &action).unwrap();
        assert!(g.validate().is_empty());
        assert_eq!(g.n_arrows(), 16);
        // free transitive action gives Pair(4)
        assert_eq!(g.nerve(2).len(), 64);
    }

    #[test]
    fn incompatible_action_is_rejected() {
        let z2 = GroupTable::cyclic(2);
        let action = vec![vec![0, 1, 2], vec![1, 2, 0]];
        assert!(matches!(action_groupoid(&z2, &action), Err(GroupoidError::InvalidAction(_))));
    }

    #[test]
    fn products_of_groups() {
        let k = GroupTable::cyclic(2).product(&GroupTable::cyclic(2));
        assert_eq!(k.order(), 4);
        assert!((0..4).all(|a| k.mul(a, a) == k.identity()));
        assert!(pair_times_group(2, &k).validate().is_empty());
    }
}
