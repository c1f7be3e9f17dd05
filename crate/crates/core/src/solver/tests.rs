use proptest::prelude::*;

use super::*;
use crate::fixtures::figure_puzzle;
use crate::puzzle::{ClueKind, Entity};

fn schema(n: usize, m: usize) -> Schema {
    let attrs = (0..m).map(|a| format!("A{a}")).collect();
    let domains = (0..m)
        .map(|a| (0..n).map(|v| format!("v{a}{v}")).collect())
        .collect();
    Schema::new(n, attrs, domains)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every grid of the schema, by nested permutation product.
fn all_grids(s: &Schema) -> Vec<SolutionGrid> {
    let perms = permutations(s.n_houses);
    let mut columns: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for _ in 0..s.n_attributes() {
        columns = columns
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut next = prefix.clone();
                    next.push(p.clone());
                    next
                })
            })
            .collect();
    }
    columns
        .iter()
        .map(|c| SolutionGrid::from_positions(s, c))
        .collect()
}

fn brute_count(cs: &[Constraint], s: &Schema) -> u64 {
    all_grids(s)
        .iter()
        .filter(|g| cs.iter().all(|c| holds(c, g).unwrap()))
        .count() as u64
}

fn exact(cs: &[Constraint], s: &Schema) -> u64 {
    count_solutions(cs, s, DEFAULT_CAP)
        .unwrap()
        .count
        .exact()
        .unwrap()
}

#[test]
fn unconstrained_counts() {
    for n in 2..=3 {
        for m in 1..=3 {
            let s = schema(n, m);
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(exact(&[], &s), fact.pow(m as u32));
            assert_eq!(brute_count(&[], &s), fact.pow(m as u32));
        }
    }
}

#[test]
fn figure_counts() {
    let p = figure_puzzle();
    assert_eq!(exact(&p.visible_constraints(), &p.schema), 4);
    assert!(is_unique(&p.full_constraints(), &p.schema).unwrap().0);
    let (_, witness) = is_unique(&p.full_constraints(), &p.schema).unwrap();
    assert_eq!(witness.unwrap(), p.solution);
    // Drop each clue in turn from the full set.
    let full = p.full_constraints();
    let dropped: Vec<u64> = (0..full.len())
        .map(|i| {
            let rest: Vec<_> = full
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| c.clone())
                .collect();
            exact(&rest, &p.schema)
        })
        .collect();
    let brute: Vec<u64> = (0..full.len())
        .map(|i| {
            let rest: Vec<_> = full
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, c)| c.clone())
                .collect();
            brute_count(&rest, &p.schema)
        })
        .collect();
    assert_eq!(dropped, brute);
    assert_eq!(dropped, [4, 4, 4, 3, 4]);
    assert!(check_necessity(&p).unwrap()["c3"]);
}

#[test]
fn overflow_past_cap() {
    let s = schema(3, 3);
    let r = count_solutions(&[], &s, 100).unwrap();
    assert_eq!(r.count, Count::Overflow);
    assert_eq!(r.witnesses.len(), 2);
    assert_eq!(
        count_solutions(&[], &s, 216).unwrap().count,
        Count::Exact(216)
    );
    assert!(matches!(
        count_solutions(&[], &s, 1),
        Err(SolverError::InvalidCap(1))
    ));
    assert!(enumerate_solutions(&[], &s, 100).unwrap().is_none());
}

#[test]
fn unknown_entity_is_an_error() {
    let s = schema(3, 2);
    let c = Constraint::found_at("x", 1, Entity::new("A0", "nope"));
    assert!(matches!(
        count_solutions(&[c], &s, 10),
        Err(SolverError::UnknownEntity { .. })
    ));
}

#[test]
fn contradiction_counts_zero() {
    let s = schema(3, 2);
    let e = Entity::new("A0", "v00");
    let a = Constraint::found_at("a", 1, e.clone());
    let cs = [a.clone(), a.negated()];
    assert_eq!(exact(&cs, &s), 0);
    assert_eq!(is_unique(&cs, &s).unwrap(), (false, None));
}

#[test]
fn constraint_set_dedups_by_content() {
    let e = Entity::new("A0", "v00");
    let mut set = ConstraintSet::new();
    assert!(set.insert(Constraint::found_at("a", 1, e.clone())));
    assert!(!set.insert(Constraint::found_at("b", 1, e.clone())));
    assert!(set.insert(Constraint::found_at("c", 1, e).negated()));
    assert_eq!(set.len(), 2);
}

#[test]
fn space_restrict_matches_recount() {
    let p = figure_puzzle();
    let visible = p.visible_constraints();
    let mut space = enumerate_solutions(&visible, &p.schema, 100)
        .unwrap()
        .unwrap();
    assert_eq!(space.len(), 4);
    let c3 = p.clue("c3").unwrap().constraint.clone();
    assert_eq!(space.count_satisfying(&c3).unwrap(), 1);
    space.restrict(&c3).unwrap();
    assert_eq!(space.grid(0).unwrap(), p.solution);
    assert_eq!(space.house(0, 0, 1), 2);
}

fn arb_constraint(n: usize, m: usize) -> impl Strategy<Value = Constraint> {
    let kind = prop::sample::select(ClueKind::ALL.to_vec());
    (kind, 0..m, 0..n, 0..m, 0..n, 1..=n, any::<bool>()).prop_map(
        move |(kind, a1, v1, a2, v2, house, neg)| {
            let lhs = Entity::new(format!("A{a1}"), format!("v{a1}{v1}"));
            let c = if kind == ClueKind::FoundAt {
                Constraint::found_at("r", house, lhs)
            } else {
                Constraint::relation(
                    "r",
                    kind,
                    lhs,
                    Entity::new(format!("A{a2}"), format!("v{a2}{v2}")),
                )
            };
            if neg {
                c.negated()
            } else {
                c
            }
        },
    )
}

fn arb_case() -> impl Strategy<Value = (usize, usize, Vec<Constraint>, Constraint)> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            Just(n),
            Just(m),
            prop::collection::vec(arb_constraint(n, m), 0..6),
            arb_constraint(n, m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_brute_force((n, m, cs, _c) in arb_case()) {
        let s = schema(n, m);
        prop_assert_eq!(exact(&cs, &s), brute_count(&cs, &s));
    }

    #[test]
    fn negation_coherence((n, m, cs, c) in arb_case()) {
        let s = schema(n, m);
        let mut with = cs.clone();
        with.push(c.clone());
        let mut without = cs.clone();
        without.push(c.negated());
        prop_assert_eq!(exact(&with, &s) + exact(&without, &s), exact(&cs, &s));
    }

    #[test]
    fn adding_never_increases((n, m, cs, c) in arb_case()) {
        let s = schema(n, m);
        let mut more = cs.clone();
        more.push(c);
        prop_assert!(exact(&more, &s) <= exact(&cs, &s));
    }

    #[test]
    fn space_agrees_with_counter((n, m, cs, c) in arb_case()) {
        let s = schema(n, m);
        let space = enumerate_solutions(&cs, &s, DEFAULT_CAP).unwrap().unwrap();
        let mut with = cs.clone();
        with.push(c.clone());
        prop_assert_eq!(space.count_satisfying(&c).unwrap(), exact(&with, &s));
    }
}
