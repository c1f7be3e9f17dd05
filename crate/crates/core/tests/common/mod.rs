//! Reference counting that shares nothing with the library's search: plain
//! permutation enumeration with its own relation semantics.

#![allow(dead_code)]

use rand::Rng;
use zebra_arena::puzzle::{ClueKind, Constraint, Entity, Schema};

fn permutations(n: usize) -> Vec<Vec<u8>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, (n - 1) as u8);
            out.push(q);
        }
    }
    out
}

fn relation(kind: ClueKind, l: i32, r: i32) -> bool {
    match kind {
        ClueKind::FoundAt | ClueKind::SameHouse => l == r,
        ClueKind::NotAt => l != r,
        ClueKind::DirectLeft => r - l == 1,
        ClueKind::DirectRight => l - r == 1,
        ClueKind::SideBySide => (l - r).abs() == 1,
        ClueKind::LeftOf => l < r,
        ClueKind::RightOf => l > r,
        ClueKind::OneBetween => (l - r).abs() == 2,
        ClueKind::TwoBetween => (l - r).abs() == 3,
    }
}

#[derive(Debug, Clone, Copy)]
enum Rhs {
    Entity(usize, usize),
    /// 0-based house.
    House(i32),
}

#[derive(Debug, Clone, Copy)]
struct Clause {
    kind: ClueKind,
    lhs: (usize, usize),
    rhs: Rhs,
    negated: bool,
}

impl Clause {
    fn attrs(&self) -> (usize, Option<usize>) {
        match self.rhs {
            Rhs::Entity(a, _) => (self.lhs.0, Some(a)),
            Rhs::House(_) => (self.lhs.0, None),
        }
    }

    /// `houses[a][v]` is the 0-based house of value `v` of attribute `a`.
    fn eval(&self, houses: &[&[u8]]) -> bool {
        let l = houses[self.lhs.0][self.lhs.1] as i32;
        let r = match self.rhs {
            Rhs::Entity(a, v) => houses[a][v] as i32,
            Rhs::House(h) => h,
        };
        relation(self.kind, l, r) != self.negated
    }
}

pub struct BruteCounter {
    n_attrs: usize,
    perms: Vec<Vec<u8>>,
    clauses: Vec<Clause>,
}

fn locate(schema: &Schema, e: &Entity) -> (usize, usize) {
    let a = schema
        .attributes
        .iter()
        .position(|x| x.eq_ignore_ascii_case(&e.attr))
        .unwrap_or_else(|| panic!("unknown attribute {}", e.attr));
    let v = schema.domains[a]
        .iter()
        .position(|x| x.eq_ignore_ascii_case(&e.value))
        .unwrap_or_else(|| panic!("unknown value {}", e.value));
    (a, v)
}

impl BruteCounter {
    pub fn new(schema: &Schema, constraints: &[Constraint]) -> Self {
        let clauses = constraints
            .iter()
            .map(|c| Clause {
                kind: c.kind,
                lhs: locate(schema, &c.lhs),
                rhs: match (&c.rhs, c.house) {
                    (Some(e), _) => {
                        let (a, v) = locate(schema, e);
                        Rhs::Entity(a, v)
                    }
                    (None, Some(h)) => Rhs::House(h as i32 - 1),
                    _ => panic!("malformed {c}"),
                },
                negated: c.is_negated(),
            })
            .collect();
        BruteCounter {
            n_attrs: schema.n_attributes(),
            perms: permutations(schema.n_houses),
            clauses,
        }
    }

    /// Walks every grid; no pruning at all.
    pub fn count_exhaustive(&self) -> u64 {
        let total = self.perms.len().pow(self.n_attrs as u32);
        let mut count = 0;
        for mut code in 0..total {
            let mut houses: Vec<&[u8]> = Vec::with_capacity(self.n_attrs);
            for _ in 0..self.n_attrs {
                houses.push(&self.perms[code % self.perms.len()]);
                code /= self.perms.len();
            }
            if self.clauses.iter().all(|c| c.eval(&houses)) {
                count += 1;
            }
        }
        count
    }

    /// Attribute-by-attribute enumeration, checking each clause once all its
    /// attributes are placed. Stops once the count exceeds `limit`.
    pub fn count_up_to(&self, limit: u64) -> u64 {
        // Place attributes that close the most clauses first.
        let mut order: Vec<usize> = Vec::new();
        while order.len() < self.n_attrs {
            let best = (0..self.n_attrs)
                .filter(|a| !order.contains(a))
                .max_by_key(|&a| {
                    let placed = |x: usize| x == a || order.contains(&x);
                    let closed = self
                        .clauses
                        .iter()
                        .filter(|c| match c.attrs() {
                            (l, Some(r)) => placed(l) && placed(r),
                            (l, None) => placed(l),
                        })
                        .count();
                    (closed, std::cmp::Reverse(a))
                })
                .unwrap();
            order.push(best);
        }
        let depth_of = |a: usize| order.iter().position(|&x| x == a).unwrap();
        let mut by_depth: Vec<Vec<Clause>> = vec![Vec::new(); self.n_attrs];
        for c in &self.clauses {
            let d = match c.attrs() {
                (l, Some(r)) => depth_of(l).max(depth_of(r)),
                (l, None) => depth_of(l),
            };
            by_depth[d].push(*c);
        }
        let mut assigned: Vec<usize> = vec![0; self.n_attrs];
        let mut count = 0;
        self.walk(0, &order, &by_depth, &mut assigned, &mut count, limit);
        count
    }

    fn walk(
        &self,
        depth: usize,
        order: &[usize],
        by_depth: &[Vec<Clause>],
        assigned: &mut Vec<usize>,
        count: &mut u64,
        limit: u64,
    ) {
        if *count > limit {
            return;
        }
        if depth == self.n_attrs {
            *count += 1;
            return;
        }
        let attr = order[depth];
        for p in 0..self.perms.len() {
            assigned[attr] = p;
            let houses: Vec<&[u8]> = assigned.iter().map(|&i| self.perms[i].as_slice()).collect();
            if by_depth[depth].iter().all(|c| c.eval(&houses)) {
                self.walk(depth + 1, order, by_depth, assigned, count, limit);
                if *count > limit {
                    return;
                }
            }
        }
    }
}

pub fn brute_count(schema: &Schema, cs: &[Constraint]) -> u64 {
    BruteCounter::new(schema, cs).count_up_to(u64::MAX - 1)
}

/// A schema with attributes `A0..` and values `v{a}{i}`.
pub fn plain_schema(n: usize, m: usize) -> Schema {
    let attrs = (0..m).map(|a| format!("A{a}")).collect();
    let domains = (0..m)
        .map(|a| (0..n).map(|v| format!("v{a}{v}")).collect())
        .collect();
    Schema::new(n, attrs, domains)
}

/// Any clue kind, random operands, random polarity.
pub fn random_constraint(schema: &Schema, rng: &mut impl Rng, id: &str) -> Constraint {
    let n = schema.n_houses;
    let m = schema.n_attributes();
    let kind = ClueKind::ALL[rng.gen_range(0..ClueKind::ALL.len())];
    let lhs = schema.entity(rng.gen_range(0..m), rng.gen_range(0..n));
    let c = if kind == ClueKind::FoundAt {
        Constraint::found_at(id, rng.gen_range(1..=n), lhs)
    } else {
        let mut rhs = lhs.clone();
        while rhs == lhs {
            rhs = schema.entity(rng.gen_range(0..m), rng.gen_range(0..n));
        }
        Constraint::relation(id, kind, lhs, rhs)
    };
    if rng.gen_bool(0.3) {
        c.negated()
    } else {
        c
    }
}
