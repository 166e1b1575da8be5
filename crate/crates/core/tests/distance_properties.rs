use irv_margin::distance::{build_distance_lp, distance_to, solve_distance, Mode};
use irv_margin::election::{CandidateIndex, CandidateSet, Election, Ranking};
use irv_margin::equivalence::{EliminationOrder, DEFAULT_CLASS_CAP};
use irv_margin::lp::SimplexSolver;
use irv_margin::oracle::{possible_winners, random_election};
use itertools::Itertools;
use proptest::prelude::*;

fn small_election() -> impl Strategy<Value = Election> {
    (any::<u64>(), 3usize..=4, 5u64..=30, 2usize..=6).prop_map(|(seed, nc, nb, ng)| random_election(seed, nc, nb, ng))
}

fn full_order(e: &Election, seed: u64) -> EliminationOrder {
    let perms: Vec<Vec<CandidateIndex>> = e.candidates().permutations(e.num_candidates()).collect();
    EliminationOrder::new(perms[(seed as usize) % perms.len()].clone()).unwrap()
}

fn exact(pi: &EliminationOrder, e: &Election, mode: Mode) -> u64 {
    distance_to(pi, e, mode, true, &SimplexSolver).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Dropping the front of an order relaxes the program.
    #[test]
    fn suffixes_are_cheaper(e in small_election(), pick in any::<u64>()) {
        let pi = full_order(&e, pick);
        let c = pi.candidates();
        for mode in Mode::ALL {
            let mut last = exact(&pi, &e, mode);
            for k in (2..c.len()).rev() {
                let suffix = EliminationOrder::new(c[c.len() - k..].to_vec()).unwrap();
                let d = exact(&suffix, &e, mode);
                prop_assert!(d <= last, "{mode}: {k}-suffix costs {d} > {last}");
                last = d;
            }
        }
    }

    #[test]
    fn modify_is_cheapest(e in small_election(), pick in any::<u64>()) {
        let pi = full_order(&e, pick);
        let m = exact(&pi, &e, Mode::Modify);
        prop_assert!(m <= exact(&pi, &e, Mode::Add));
        prop_assert!(m <= exact(&pi, &e, Mode::Delete));
    }

    #[test]
    fn relaxation_bounds_the_exact_value(e in small_election(), pick in any::<u64>()) {
        let pi = full_order(&e, pick);
        for mode in Mode::ALL {
            let relaxed = distance_to(&pi, &e, mode, false, &SimplexSolver).unwrap();
            let d = exact(&pi, &e, mode);
            prop_assert!(relaxed.value <= d);
            if relaxed.integral {
                prop_assert_eq!(relaxed.value, d);
            }
        }
    }

    /// Building the optimal profile as an election elects `π`'s last candidate
    /// under some resolution of ties, and every round can go `π`'s way.
    #[test]
    fn optimal_profile_realises_the_order(e in small_election(), pick in any::<u64>()) {
        let pi = full_order(&e, pick);
        for mode in Mode::ALL {
            let model = build_distance_lp(&pi, &e, mode, DEFAULT_CLASS_CAP).unwrap();
            let (result, sol) = solve_distance(&model, true, &SimplexSolver).unwrap();
            let y = model.profile(&sol);
            let groups: Vec<(Ranking, u64)> = model
                .table
                .classes()
                .zip(&y)
                .filter(|(_, n)| !n.is_zero())
                .map(|(class, n)| (class.rep(&pi), n.to_i64().expect("integral count") as u64))
                .collect();
            let changed = Election::new(e.names().to_vec(), groups).unwrap();

            let total = changed.total_ballots();
            match mode {
                Mode::Modify => prop_assert_eq!(total, e.total_ballots()),
                Mode::Add => prop_assert_eq!(total, e.total_ballots() + result.value),
                Mode::Delete => prop_assert_eq!(total + result.value, e.total_ballots()),
            }

            let mut standing = CandidateSet::all(e.num_candidates());
            for &c in &pi.candidates()[..pi.len() - 1] {
                let (t, _) = changed.tallies(standing);
                let low = standing.iter().map(|s| t[s.0]).min().unwrap();
                prop_assert_eq!(t[c.0], low, "{} not lowest in {:?}", mode, t);
                standing.remove(c);
            }
            prop_assert!(possible_winners(&changed).contains(pi.winner().unwrap()));
        }
    }
}

#[test]
fn current_order_costs_nothing() {
    for seed in 0..40 {
        let e = random_election(seed, 4, 25, 5);
        let t = irv_margin::tabulator::run_irv(&e, Default::default()).unwrap();
        let pi = EliminationOrder::new(t.full_order()).unwrap();
        for mode in Mode::ALL {
            assert_eq!(exact(&pi, &e, mode), 0, "seed {seed} {mode}");
        }
    }
}
