mod common;

use ppde_lab::pathspace::{dupire_distance, hitting_time, OpenBox};
use ppde_lab::solver::{
    build_subsolution_family, default_tolerance, perron_construct, ppde_solve, time_shift, FamilySpec,
    TerminalCondition,
};
use ppde_lab::viscosity::{
    change_variable, check_subsolution, check_supersolution, special_solution, subjet_frontier, subjet_test,
    superjet_test, Builtin, Generator, JetCandidate, JetSampling,
};
use ppde_lab::{Expectation, NodeId, Process, StoppingRegion, Tree};
use proptest::prelude::*;

fn small_process(vals: &[i32], tree: Tree) -> Process {
    Process::new(tree, vals.iter().map(|&v| v as f64 / 8.0).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subjets_are_up_closed_and_dual(vals in prop::collection::vec(-16i32..16, 15), beta in -8i32..8, lsel in 0usize..3) {
        let t = Tree::new(3, 0.25).unwrap();
        let e = Expectation::new(&t, [0.0, 1.0, 2.0][lsel]).unwrap();
        let u = small_process(&vals, t);
        let beta = beta as f64 / 4.0;
        let horizons = [StoppingRegion::leaves(3), StoppingRegion::level(3, 1).unwrap()];
        for h in &horizons {
            let alphas: Vec<f64> = (-40..=40).map(|k| k as f64 / 4.0).collect();
            let verdicts: Vec<bool> = alphas
                .iter()
                .map(|&alpha| subjet_test(&e, &u, NodeId::ROOT, &JetCandidate { alpha, beta, horizon: h.clone() }).unwrap())
                .collect();
            for w in verdicts.windows(2) {
                prop_assert!(!w[0] || w[1]);
            }
            for &alpha in &alphas {
                let c = JetCandidate { alpha, beta, horizon: h.clone() };
                let flipped = JetCandidate { alpha: -alpha, beta: -beta, horizon: h.clone() };
                prop_assert_eq!(superjet_test(&e, &u, NodeId::ROOT, &c).unwrap(), subjet_test(&e, &u.neg(), NodeId::ROOT, &flipped).unwrap());
            }
        }
    }

    #[test]
    fn hitting_horizons_never_undercut_one_step(vals in prop::collection::vec(-16i32..16, 31), beta in -8i32..8) {
        let t = Tree::new(4, 0.04).unwrap();
        let e = Expectation::new(&t, 1.0).unwrap();
        let u = small_process(&vals, t);
        let beta = beta as f64 / 4.0;
        let one = subjet_frontier(&e, &u, NodeId::ROOT, beta, &StoppingRegion::level(4, 1).unwrap()).unwrap();
        for boxed in [OpenBox::unbounded(), OpenBox::symmetric(0.3)] {
            let h = hitting_time(&t, 0.12, boxed).unwrap();
            let a = subjet_frontier(&e, &u, NodeId::ROOT, beta, &h).unwrap();
            prop_assert!(a >= one - 1e-9);
        }
    }

    #[test]
    fn oracle_passes_both_checks(seed in 0u64..1000, gsel in 0usize..6) {
        let t = Tree::new(6, 0.02).unwrap();
        let g = [
            Builtin::Zero,
            Builtin::Constant { c: -0.3 },
            Builtin::Linear { a: -0.5, b: 1.0 },
            Builtin::Pucci { l: 2.0 },
            Builtin::PucciPlus { l: 0.5 },
            Builtin::RunningMax { c0: 1.0, zcap: 1.0 },
        ][gsel];
        let mut r = common::rng(seed);
        let xi = TerminalCondition::new(&t, (0..t.leaf_count()).map(|_| common::uniform(&mut r, -1.0, 1.0)).collect()).unwrap();
        let tol = default_tolerance(t.dt(), g.lipschitz(), xi.sup_norm());
        let u = ppde_solve(&g, &xi, &t).unwrap();
        let s = JetSampling::default();
        prop_assert!(check_subsolution(&u, &g, &s, tol).unwrap().passed);
        prop_assert!(check_supersolution(&u, &g, &s, tol).unwrap().passed);
    }
}

/// Recombining-lattice recursion for a Markovian generator and a terminal
/// depending on `ω_T` only; the path-tree oracle must agree bit for bit.
#[test]
fn oracle_matches_lattice_scheme() {
    let (a, b) = (0.7, -0.4);
    let t = Tree::new(9, 0.01).unwrap();
    let h = t.h();
    let payoff = |x: f64| (3.0 * x).sin() + x * x;
    let xi = TerminalCondition::from_fn(&t, |v| payoff(v.value())).unwrap();
    let u = ppde_solve(&Builtin::Linear { a, b }, &xi, &t).unwrap();
    let n = t.depth();
    // lattice[k][j]: k steps, j of them up
    let mut lattice: Vec<f64> = (0..=n).map(|j| payoff(h * (2.0 * j as f64 - n as f64))).collect();
    let mut levels = vec![lattice.clone()];
    for k in (0..n).rev() {
        lattice = (0..=k)
            .map(|j| {
                let (up, down) = (lattice[j + 1], lattice[j]);
                let m = (up + down) / 2.0;
                let z = (up - down) / (h + h);
                m + t.dt() * (a * m + b * z)
            })
            .collect();
        levels.push(lattice.clone());
    }
    levels.reverse();
    for node in t.nodes() {
        let ups = node.bits().count_ones() as usize;
        assert_eq!(u[node], levels[node.level()][ups], "{node}");
    }
}

#[test]
fn pucci_oracle_is_the_sup_expectation() {
    let t = Tree::new(8, 0.01).unwrap();
    let e = Expectation::new(&t, 1.5).unwrap();
    let xi = TerminalCondition::from_fn(&t, |v| v.running_max() - v.value().abs()).unwrap();
    let u = ppde_solve(&Builtin::Pucci { l: 1.5 }, &xi, &t).unwrap();
    let x = Process::from_leaves(&t, xi.values()).unwrap();
    let direct = e.conditional_sup(&x, &StoppingRegion::leaves(8)).unwrap();
    assert!(u.max_abs_diff(&direct) < 1e-12);
}

#[test]
fn transformed_oracle_passes_transformed_checks() {
    let t = Tree::new(7, 0.01).unwrap();
    let xi = TerminalCondition::from_fn(&t, |v| (2.0 * v.value()).cos() + 0.5 * v.running_max()).unwrap();
    for g in [Builtin::Pucci { l: 1.0 }, Builtin::Linear { a: 0.5, b: 1.0 }, Builtin::PucciPlus { l: 1.0 }] {
        let u = ppde_solve(&g, &xi, &t).unwrap();
        for rate in [-0.5, -1.0, -2.0] {
            let (ut, gt) = change_variable(&u, g.into_dyn(), rate).unwrap();
            let tol = default_tolerance(t.dt(), gt.lipschitz(), xi.sup_norm());
            let s = JetSampling::default();
            let sub = check_subsolution(&ut, gt.as_ref(), &s, tol).unwrap();
            let sup = check_supersolution(&ut, gt.as_ref(), &s, tol).unwrap();
            assert!(sub.passed && sup.passed, "{} rate {rate}: {:?} {:?}", g.name(), sub.worst, sup.worst);
        }
    }
}

#[test]
fn perron_gap_shrinks_under_enrichment() {
    let t = Tree::new(6, 0.02).unwrap();
    let g = Builtin::Pucci { l: 1.0 };
    let xi = TerminalCondition::from_fn(&t, |v| v.value().sin()).unwrap();
    let tol = default_tolerance(t.dt(), 1.0, xi.sup_norm());
    let oracle = ppde_solve(&g, &xi, &t).unwrap();
    let mut shifts = Vec::new();
    let mut last = f64::INFINITY;
    for d in [0.4, 0.3, 0.2, 0.1, 0.0] {
        shifts.push(d);
        let spec = FamilySpec { shifts: shifts.clone(), ..FamilySpec::default() };
        let fam = build_subsolution_family(&g, &xi, &t, &spec, &JetSampling::one_step(), tol).unwrap();
        let gap = oracle.root() - perron_construct(&fam).unwrap().value.root();
        assert!(gap <= last);
        last = gap;
    }
    assert_eq!(last, 0.0);
    assert_eq!(time_shift(&oracle, 0.0), oracle);
}

/// Lipschitz ratio of `η` across sibling nodes, monitored as the grid is
/// refined with `T = 1` fixed. For a 1-Lipschitz `u` the ratio stays below
/// `1 + |β|`, the bound used here.
#[test]
fn special_solution_sibling_lipschitz_is_bounded() {
    let (alpha, beta, l) = (0.2, 0.5, 1.0);
    for depth in [4, 6, 8, 10] {
        let t = Tree::new(depth, 1.0 / depth as f64).unwrap();
        let e = Expectation::new(&t, l).unwrap();
        let u = Process::from_fn(&t, |v| v.value().sin());
        let eta = special_solution(&e, &u, &StoppingRegion::leaves(depth), alpha, beta).unwrap();
        let mut ratio = 0.0f64;
        for n in t.interior_nodes() {
            let d = dupire_distance(&t.point(n.up()), &t.point(n.down())).unwrap();
            ratio = ratio.max((eta[n.up()] - eta[n.down()]).abs() / d);
        }
        assert!(ratio <= 1.0 + beta, "depth {depth}: ratio {ratio}");
    }
}
