//! Solver results against exhaustive enumeration and structural properties.

use std::collections::BTreeMap;

use pixel_pass::algebra::{Count, SolutionSet, Tuple};
use pixel_pass::contract::{sweep_contract, ChainPlan, LabeledTensor, SweepOptions};
use pixel_pass::pipeline::{self, brute_force_solve, solve, Mode, PixelResult, Problem};
use pixel_pass::tensorize::{build_cell_tensor, is_feasible, FeasibilityTable};
use pixel_pass::{Binning, FeasibilityParams, Stencil, StencilParams};
use proptest::prelude::*;

fn stencil(kind: usize) -> Stencil {
    let p = |mu: Option<f64>, h: Option<f64>| StencilParams {
        mu,
        h,
        ..Default::default()
    };
    match kind {
        0 => Stencil::builtin("heat", &StencilParams::default()),
        1 => Stencil::builtin("fisher", &p(Some(1.0), Some(1.0))),
        2 => Stencil::builtin("bbm", &p(None, Some(0.5))),
        3 => Stencil::builtin("sine_gordon", &p(None, Some(1.0))),
        _ => Stencil::builtin(
            "reaction_diffusion",
            &StencilParams {
                d: Some(0.5),
                h: Some(1.0),
                f: Some(0.1),
                reaction: Some("-u0^3 + u0".into()),
                ..Default::default()
            },
        ),
    }
    .unwrap()
}

fn binning(kind: usize, bins: usize) -> Binning {
    let hi = if kind == 3 { 6.0 } else { 1.5 };
    Binning::new(0.0, hi, hi / (bins - 1) as f64).unwrap()
}

fn method(binround: bool) -> FeasibilityParams {
    if binround {
        FeasibilityParams::binround()
    } else {
        FeasibilityParams::epsilon()
    }
}

fn mode(i: usize) -> Mode {
    [Mode::Pa, Mode::Pass, Mode::Hybrid][i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solve_matches_brute_force(
        kind in 0usize..5,
        n in 2usize..=4,
        bins in prop::sample::select(vec![5usize, 7]),
        binround in any::<bool>(),
        hidden in any::<bool>(),
        m in 0usize..3,
    ) {
        let p = Problem::new(stencil(kind), binning(kind, bins), n)
            .unwrap()
            .with_feasibility(method(binround))
            .with_hidden_equations(hidden)
            .with_mode(mode(m));
        let fast = solve(&p).unwrap();
        let slow = brute_force_solve(&p).unwrap();
        prop_assert!(fast.same_pixels(&slow));
        prop_assert!(fast.stats().peak_frontier_labels <= p.stencil().arity() + 1);
    }

    #[test]
    fn counting_sweep_counts_assignments(
        kind in 0usize..5,
        n in 2usize..=4,
        binround in any::<bool>(),
        hidden in any::<bool>(),
    ) {
        let st = stencil(kind);
        let b = binning(kind, 5);
        let params = method(binround);
        let plan = ChainPlan::new(n, st.arity(), hidden).unwrap();
        let table = FeasibilityTable::build(&st, &b, &params);
        let cells: Vec<LabeledTensor<Count>> = plan
            .cells()
            .iter()
            .map(|c| build_cell_tensor(&table, &b, c).unwrap())
            .collect();
        let out = sweep_contract(&cells, &plan, SweepOptions::default()).unwrap();
        let counts = enumerate_counts(&st, &b, &params, &plan);
        for l in 0..5 {
            for r in 0..5 {
                let want = counts.get(&(l, r)).copied().unwrap_or(0);
                prop_assert_eq!(out.tensor.value(&[l, r]), Count(want));
            }
        }

        let bools: Vec<LabeledTensor<bool>> = plan
            .cells()
            .iter()
            .map(|c| build_cell_tensor(&table, &b, c).unwrap())
            .collect();
        let out = sweep_contract(&bools, &plan, SweepOptions::default()).unwrap();
        for l in 0..5 {
            for r in 0..5 {
                prop_assert_eq!(out.tensor.value(&[l, r]), counts.contains_key(&(l, r)));
            }
        }
    }

    #[test]
    fn reverse_absorption_gives_same_sets(
        kind in 0usize..5,
        n in 2usize..=5,
        hidden in any::<bool>(),
    ) {
        let st = stencil(kind);
        let b = binning(kind, 5);
        let plan = ChainPlan::new(n, st.arity(), hidden).unwrap();
        let table = FeasibilityTable::build(&st, &b, &FeasibilityParams::epsilon());
        let cells: Vec<LabeledTensor<SolutionSet>> = plan
            .cells()
            .iter()
            .map(|c| build_cell_tensor(&table, &b, c).unwrap())
            .collect();
        let fwd = sweep_contract(&cells, &plan, SweepOptions::default()).unwrap();
        let rev = sweep_contract(&cells, &plan, SweepOptions { reverse: true, entry_cap: None }).unwrap();
        prop_assert_eq!(fwd.tensor, rev.tensor);
        prop_assert!(rev.peak_labels <= st.arity() + 1);
    }
}

/// Number of full chain assignments with every cell feasible, per `(u_1, u_n)`.
fn enumerate_counts(
    st: &Stencil,
    b: &Binning,
    params: &FeasibilityParams,
    plan: &ChainPlan,
) -> BTreeMap<(usize, usize), u64> {
    let bins = b.count();
    let vars = plan.n_vars();
    let [u1, un] = plan.exposed();
    let mut counts = BTreeMap::new();
    let mut assign = vec![0usize; vars];
    for flat in 0..bins.pow(vars as u32) {
        let mut f = flat;
        for slot in assign.iter_mut() {
            *slot = f % bins;
            f /= bins;
        }
        let ok = plan.cells().iter().all(|c| {
            let idx: Vec<usize> = c.vars.iter().map(|&v| assign[v]).collect();
            is_feasible(st, b, &idx, params)
        });
        if ok {
            *counts.entry((assign[u1], assign[un])).or_insert(0) += 1;
        }
    }
    counts
}

/// Whether some hidden values complete `tuple` to a fully feasible chain.
fn reverifies(p: &Problem, tuple: &Tuple) -> bool {
    let plan = p.plan().unwrap();
    let bins = p.binning().count();
    let centers = p.binning().centers();
    let hidden: Vec<usize> = (0..plan.n_vars())
        .filter(|&v| !plan.is_visible(v))
        .collect();
    let mut assign = vec![0usize; plan.n_vars()];
    for (&v, &x) in plan.visible_vars().iter().zip(tuple.values()) {
        assign[v] = p.binning().exact_index_of(x).unwrap();
        assert_eq!(centers[assign[v]], x);
    }
    (0..bins.pow(hidden.len() as u32)).any(|flat| {
        let mut f = flat;
        for &h in &hidden {
            assign[h] = f % bins;
            f /= bins;
        }
        plan.cells().iter().all(|c| {
            let idx: Vec<usize> = c.vars.iter().map(|&v| assign[v]).collect();
            is_feasible(p.stencil(), p.binning(), &idx, p.feasibility())
        })
    })
}

fn heat(n: usize, b: f64) -> Problem {
    Problem::new(stencil(0), Binning::new(0.0, 1.0, b).unwrap(), n).unwrap()
}

#[test]
fn every_tuple_reverifies() {
    let problems = [
        heat(6, 0.1).with_mode(Mode::Pass),
        Problem::new(stencil(1), Binning::new(0.0, 2.0, 0.1).unwrap(), 6)
            .unwrap()
            .with_feasibility(FeasibilityParams::binround()),
        Problem::new(stencil(2), Binning::new(0.0, 1.0, 0.1).unwrap(), 5)
            .unwrap()
            .with_hidden_equations(true),
    ];
    for p in problems {
        let r = solve(&p).unwrap();
        let centers = p.binning().centers();
        for (&(l, rt), s) in r.solutions().unwrap() {
            for t in s.set.iter() {
                assert_eq!(t.len(), p.n_visible());
                assert_eq!(t.values()[0], centers[l]);
                assert_eq!(t.values()[p.n_visible() - 1], centers[rt]);
                assert!(reverifies(&p, t), "{t:?}");
            }
        }
    }
}

#[test]
fn heat_is_symmetric_under_reflection() {
    let r = solve(&heat(5, 0.1).with_mode(Mode::Pass)).unwrap();
    let sols = r.solutions().unwrap();
    for (&(a, b), s) in sols {
        let mirrored = &sols[&(b, a)];
        let reversed: SolutionSet = s.set.iter().map(Tuple::reversed).collect();
        assert_eq!(reversed, mirrored.set);
    }
}

#[test]
fn heat_tuples_respect_l2_bound() {
    for n in [4, 6, 8] {
        let p = heat(n, 0.1);
        let bound = pipeline::l2_bound(pipeline::uniform_epsilon(&p).unwrap(), n);
        let r = solve(&p).unwrap();
        let centers = p.binning().centers();
        for (&(a, b), s) in r.solutions().unwrap() {
            for t in s.set.iter() {
                assert!(pipeline::modified_l2(t.values(), centers[a], centers[b]) <= bound);
            }
        }
    }
}

#[test]
fn fisher_keeps_both_homogeneous_states() {
    for n in [4, 8] {
        for mu in [0.2, 1.0, 5.0] {
            let st = Stencil::builtin(
                "fisher",
                &StencilParams {
                    mu: Some(mu),
                    h: Some(1.0),
                    ..Default::default()
                },
            )
            .unwrap();
            let p = Problem::new(st, Binning::new(0.0, 2.0, 0.05).unwrap(), n)
                .unwrap()
                .with_feasibility(FeasibilityParams::binround())
                .with_boundaries(&[(0.0, 0.0), (1.0, 1.0)])
                .unwrap();
            let r = solve(&p).unwrap();
            let sols = r.solutions().unwrap();
            assert!(sols[&(0, 0)].set.contains(&Tuple::new(vec![0.0; n])));
            assert!(sols[&(20, 20)].set.contains(&Tuple::new(vec![1.0; n])));
        }
    }
}

#[test]
fn bbm_states_are_constant() {
    let st = Stencil::builtin(
        "bbm",
        &StencilParams {
            h: Some(0.05),
            ..Default::default()
        },
    )
    .unwrap();
    let p = Problem::new(st, Binning::new(0.0, 1.0, 0.05).unwrap(), 6)
        .unwrap()
        .with_feasibility(FeasibilityParams::binround());
    let r = solve(&p).unwrap();
    let centers = p.binning().centers();
    for (&(a, b), s) in r.solutions().unwrap() {
        assert_eq!(a, b);
        assert_eq!(
            s.set,
            SolutionSet::singleton(Tuple::new(vec![centers[a]; 6]))
        );
    }
    assert_eq!(r.nonempty_pixels(), centers.len());
}

#[test]
fn modes_agree() {
    let p = Problem::new(stencil(1), Binning::new(0.0, 2.0, 0.1).unwrap(), 5)
        .unwrap()
        .with_feasibility(FeasibilityParams::binround());
    let pass = solve(&p.clone().with_mode(Mode::Pass)).unwrap();
    let hybrid = solve(&p.clone().with_mode(Mode::Hybrid)).unwrap();
    let pa = solve(&p.with_mode(Mode::Pa)).unwrap();
    assert!(pass.same_pixels(&hybrid));
    assert!(pipeline::project_boolean(&pass).unwrap().same_pixels(&pa));
}

fn solve_with_threads(p: &Problem, threads: usize) -> PixelResult {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| solve(p).unwrap())
}

#[test]
fn results_do_not_depend_on_thread_count() {
    for m in [Mode::Pa, Mode::Pass, Mode::Hybrid] {
        let p = heat(6, 0.1).with_mode(m);
        let a = solve_with_threads(&p, 1);
        let b = solve_with_threads(&p, 3);
        assert_eq!(a, b);
    }
}

#[test]
fn infeasible_everywhere_is_empty() {
    let st = Stencil::parse("1 + 0*u0", 3).unwrap();
    let p = Problem::new(st, Binning::new(0.0, 1.0, 0.25).unwrap(), 3)
        .unwrap()
        .with_feasibility(FeasibilityParams::binround());
    assert_eq!(solve(&p).unwrap().nonempty_pixels(), 0);
    assert_eq!(brute_force_solve(&p).unwrap().nonempty_pixels(), 0);
}
