use cio_core::optimizer::{solve_idea, solve_profile, Plan, SolverConfig};
use cio_core::oracle::stationarity_check;
use cio_core::topic::{effort_required, Action, Idea, Scenario};
use cio_core::{InputPrices, ProductionParams};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        prop::collection::vec((0.0..1.0f64, 0.5..2.0f64, 0.5..2.0f64), 2..=4),
        0.0..1.0f64,
        prop_oneof![Just(0.0), 0.0..0.1f64],
        0.5..2.0f64,
        0.5..2.0f64,
    )
        .prop_map(|(ideas, alpha, kappa, px, pq)| {
            let list = ideas
                .into_iter()
                .enumerate()
                .map(|(k, (u, a, b))| Idea::new(format!("i{k}"), u, a, b))
                .collect();
            Scenario::new(
                list,
                alpha,
                InputPrices { px, pq, kappa },
                ProductionParams::default(),
            )
        })
}

fn solve(sc: &Scenario) -> Plan {
    solve_profile(sc, &SolverConfig::default()).unwrap()
}

fn weakening_effort(plan: &Plan) -> f64 {
    plan.ideas
        .iter()
        .filter(|i| i.action == Action::Weaken)
        .map(|i| i.effort)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stationary(sc in scenario()) {
        let plan = solve(&sc);
        prop_assert!(stationarity_check(&sc, &plan).unwrap() < 1e-5);
    }

    #[test]
    fn deterministic(sc in scenario()) {
        let a = solve(&sc);
        let b = solve(&sc);
        prop_assert_eq!(a.strengths(), b.strengths());
        prop_assert_eq!(a.payoff.to_bits(), b.payoff.to_bits());
    }

    // Eliminating an idea outright takes b / (a (1 - alpha)) effort, which
    // grows with alpha, so the property only holds away from the zero corner.
    #[test]
    fn weakening_fades_with_alpha(sc in scenario()) {
        let plans: Vec<Plan> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&alpha| {
                let mut s = sc.clone();
                s.alpha = alpha;
                solve(&s)
            })
            .collect();
        prop_assume!(plans.iter().all(|p| p.ideas.iter().all(|i| i.strength > 0.0)));
        let w: Vec<f64> = plans.iter().map(weakening_effort).collect();
        prop_assert!(w.windows(2).all(|p| p[1] <= p[0] + 1e-7), "{w:?}");
        prop_assert_eq!(w[4], 0.0);
    }

    // With every other idea free to respond, strength itself need not rise,
    // but prominence must: the old plan is still available after the change.
    #[test]
    fn caring_more_raises_prominence(sc in scenario(), idx in 0usize..4, bump in 0.01..0.5f64) {
        let i = idx % sc.len();
        let before = solve(&sc).ideas[i].prominence;
        let mut s = sc.clone();
        s.ideas[i].u += bump;
        let after = solve(&s).ideas[i].prominence;
        prop_assert!(after >= before - 1e-7, "{before} -> {after}");
    }
}

fn idea_and_topic() -> impl Strategy<Value = (Idea, f64, f64, Scenario)> {
    (
        scenario(),
        0.0..1.0f64,
        0.5..2.0f64,
        0.5..2.0f64,
        0.5..10.0f64,
        0.0..1.0f64,
    )
        .prop_map(|(sc, u, a, b, total, average)| {
            (Idea::new("x", u, a, b), total, average * total, sc)
        })
}

// Single-idea responses with the topic aggregates held fixed.
proptest! {
    #[test]
    fn strength_rises_with_payoff((idea, total, weighted, sc) in idea_and_topic(), bump in 0.0..0.5f64) {
        let before = solve_idea(&idea, total, weighted, &sc).unwrap();
        let mut richer = idea.clone();
        richer.u += bump;
        let after = solve_idea(&richer, total, weighted, &sc).unwrap();
        prop_assert!(after >= before - 1e-12, "{before} -> {after}");
    }

    #[test]
    fn impact_rises_with_influence_factor((idea, total, weighted, sc) in idea_and_topic(), factor in 1.0..3.0f64) {
        let before = solve_idea(&idea, total, weighted, &sc).unwrap();
        prop_assume!(before > idea.b);
        let mut easier = idea.clone();
        easier.a *= factor;
        let after = solve_idea(&easier, total, weighted, &sc).unwrap();
        prop_assert!(after - idea.b >= (before - idea.b) * (1.0 - 1e-12));
    }

    #[test]
    fn effort_falls_with_prices((idea, total, weighted, sc) in idea_and_topic(), factor in 1.0..3.0f64) {
        let effort = |sc: &Scenario| {
            let s = solve_idea(&idea, total, weighted, sc).unwrap();
            effort_required(&idea, s, sc.alpha).map(|(_, e)| e).unwrap_or(0.0)
        };
        let before = effort(&sc);
        let mut dear = sc.clone();
        dear.prices = dear.prices.scaled(factor);
        prop_assert!(effort(&dear) <= before * (1.0 + 1e-12));
    }
}
