//! Hand-simulated step-through checks for every selection policy.
//!
//! Each scenario below was worked out by hand on paper first (reference-list
//! contents, per-arrival decisions, final selection set) and then frozen here.
//! The implementation must reproduce those traces exactly; none of these
//! expectations were produced by running the code under test.

use seclab_core::policy::{
    policy_init, policy_run, policy_run_offline_opt, policy_step, DecisionReason, PolicyConfig,
    PolicyError, PolicyKind,
};
use seclab_core::stream::{SeededRng, Stream, StreamItem};

fn stream(values: &[f64]) -> Stream {
    Stream::from_observed(values).expect("valid test stream")
}

fn stream_with_true(observed: &[f64], true_values: &[f64]) -> Stream {
    let items = observed
        .iter()
        .zip(true_values)
        .enumerate()
        .map(|(i, (&obs, &tr))| StreamItem {
            id: (i + 1).to_string(),
            arrival: i + 1,
            observed_value: obs,
            true_value: Some(tr),
            fooled: None,
        })
        .collect();
    Stream::new(items).expect("valid test stream")
}

fn run(kind: PolicyKind, values: &[f64], config: PolicyConfig) -> Vec<usize> {
    let mut rng = SeededRng::new(0);
    policy_run(kind, &stream(values), &config, &mut rng)
        .expect("policy_run should succeed")
        .selected
}

fn reasons(kind: PolicyKind, values: &[f64], config: PolicyConfig) -> Vec<DecisionReason> {
    let mut rng = SeededRng::new(0);
    policy_run(kind, &stream(values), &config, &mut rng)
        .expect("policy_run should succeed")
        .per_step
        .expect("online policies record per-step decisions")
        .iter()
        .map(|d| d.reason)
        .collect()
}

// ---------------------------------------------------------------------------
// Virtual+ step rule
// ---------------------------------------------------------------------------

#[test]
fn virtual_plus_selects_first_item_beating_kth_reference() {
    // k=2, t=2, values [5,1,4,2,3]: after sampling R=[5,1]; arrival 3
    // (value 4 >= 1) is selected and replaces the 1; arrivals 4 and 5 are
    // both below the new R[2]=4.
    let cfg = PolicyConfig::new(2).with_threshold(2);
    assert_eq!(run(PolicyKind::VirtualPlus, &[5.0, 1.0, 4.0, 2.0, 3.0], cfg.clone()), vec![3]);
    assert_eq!(
        reasons(PolicyKind::VirtualPlus, &[5.0, 1.0, 4.0, 2.0, 3.0], cfg),
        vec![
            DecisionReason::Sampling,
            DecisionReason::Sampling,
            DecisionReason::RuleSelect,
            DecisionReason::RuleSkip,
            DecisionReason::RuleSkip,
        ]
    );
}

#[test]
fn virtual_plus_keeps_selecting_until_budget_full() {
    // k=2, t=2, values [5,1,2,3,4]: arrivals 3 and 4 beat the current R[2]
    // and fill the budget; arrival 5 beats R[2] too but the budget is full.
    let cfg = PolicyConfig::new(2).with_threshold(2);
    assert_eq!(run(PolicyKind::VirtualPlus, &[5.0, 1.0, 2.0, 3.0, 4.0], cfg.clone()), vec![3, 4]);
    assert_eq!(
        reasons(PolicyKind::VirtualPlus, &[5.0, 1.0, 2.0, 3.0, 4.0], cfg),
        vec![
            DecisionReason::Sampling,
            DecisionReason::Sampling,
            DecisionReason::RuleSelect,
            DecisionReason::RuleSelect,
            DecisionReason::BudgetFull,
        ]
    );
}

// ---------------------------------------------------------------------------
// Virtual step rule (virtual-update branch)
// ---------------------------------------------------------------------------

#[test]
fn virtual_update_branch_suppresses_selection() {
    // Same stream [5,1,2,3,4], k=2, t=2. Arrival 3 evicts the sampling-phase
    // reference 1 and is selected. Arrivals 4 and 5 beat R[2] but R[2] now
    // arrived after the threshold, so they only update the reference list.
    let cfg = PolicyConfig::new(2).with_threshold(2);
    assert_eq!(run(PolicyKind::Virtual, &[5.0, 1.0, 2.0, 3.0, 4.0], cfg.clone()), vec![3]);
    assert_eq!(
        reasons(PolicyKind::Virtual, &[5.0, 1.0, 2.0, 3.0, 4.0], cfg),
        vec![
            DecisionReason::Sampling,
            DecisionReason::Sampling,
            DecisionReason::RuleSelect,
            DecisionReason::RuleSkip,
            DecisionReason::RuleSkip,
        ]
    );
}

#[test]
fn virtual_and_virtual_plus_agree_when_no_virtual_updates_occur() {
    let cfg = PolicyConfig::new(2).with_threshold(2);
    let values = [5.0, 1.0, 4.0, 2.0, 3.0];
    assert_eq!(
        run(PolicyKind::Virtual, &values, cfg.clone()),
        run(PolicyKind::VirtualPlus, &values, cfg)
    );
}

// ---------------------------------------------------------------------------
// Optimistic step rule
// ---------------------------------------------------------------------------

#[test]
fn optimistic_consumes_references_from_the_bottom() {
    // k=2, t=2, values [5,1,4,2,3]: R=[5,1]; arrival 3 (4 >= 1) is selected
    // and the reference 1 is removed; arrivals 4 and 5 are below the
    // remaining reference 5.
    let cfg = PolicyConfig::new(2).with_threshold(2);
    assert_eq!(run(PolicyKind::Optimistic, &[5.0, 1.0, 4.0, 2.0, 3.0], cfg), vec![3]);
}

#[test]
fn optimistic_never_reinserts_selected_values() {
    // k=2, t=2, values [3,1,2,4,5]: R=[3,1]. Arrival 3 (2 >= 1) is selected,
    // leaving only the reference 3. Arrival 4 (4 >= 3) is selected, leaving
    // no references; arrival 5 finds the budget exhausted.
    let cfg = PolicyConfig::new(2).with_threshold(2);
    assert_eq!(run(PolicyKind::Optimistic, &[3.0, 1.0, 2.0, 4.0, 5.0], cfg.clone()), vec![3, 4]);
    assert_eq!(
        reasons(PolicyKind::Optimistic, &[3.0, 1.0, 2.0, 4.0, 5.0], cfg),
        vec![
            DecisionReason::Sampling,
            DecisionReason::Sampling,
            DecisionReason::RuleSelect,
            DecisionReason::RuleSelect,
            DecisionReason::BudgetFull,
        ]
    );
}

// ---------------------------------------------------------------------------
// Single-Ref step rule
// ---------------------------------------------------------------------------

#[test]
fn single_ref_compares_against_rth_best_of_sampling_phase() {
    // k=2, t=2, r=2, values [5,1,4,2,3]: the 2nd best sampled value is 1,
    // so arrivals 3 (4 >= 1) and 4 (2 >= 1) are both selected.
    let cfg = PolicyConfig::new(2).with_threshold(2).with_reference_rank(2);
    assert_eq!(run(PolicyKind::SingleRef, &[5.0, 1.0, 4.0, 2.0, 3.0], cfg), vec![3, 4]);
}

#[test]
fn single_ref_threshold_is_static_after_sampling() {
    // r=1 makes the reference the sampling max 5; nothing afterwards beats it.
    let cfg = PolicyConfig::new(2).with_threshold(2).with_reference_rank(1);
    assert_eq!(run(PolicyKind::SingleRef, &[5.0, 1.0, 4.0, 2.0, 3.0], cfg), Vec::<usize>::new());
}

// ---------------------------------------------------------------------------
// Classical single-selection behavior (k = 1)
// ---------------------------------------------------------------------------

#[test]
fn all_threshold_policies_reduce_to_classical_rule_at_k1() {
    // k=1, t=1, values [2,4,1,3]: the first post-sample arrival beating the
    // sampled maximum 2 is arrival 2.
    for kind in [PolicyKind::Virtual, PolicyKind::VirtualPlus, PolicyKind::Optimistic] {
        let cfg = PolicyConfig::new(1).with_threshold(1);
        assert_eq!(run(kind, &[2.0, 4.0, 1.0, 3.0], cfg), vec![2], "{kind:?}");
    }
    let cfg = PolicyConfig::new(1).with_threshold(1).with_reference_rank(1);
    assert_eq!(run(PolicyKind::SingleRef, &[2.0, 4.0, 1.0, 3.0], cfg), vec![2]);
}

// ---------------------------------------------------------------------------
// Budget exhaustion
// ---------------------------------------------------------------------------

#[test]
fn top_values_hidden_in_sampling_phase_yield_empty_selection() {
    // k=2, t=2, values [5,4,1,2,3]: both top values are sampled; no later
    // arrival reaches R[2]=4, so nothing is selected with exhaustion off.
    for kind in [PolicyKind::Virtual, PolicyKind::VirtualPlus, PolicyKind::Optimistic] {
        let cfg = PolicyConfig::new(2).with_threshold(2);
        assert_eq!(run(kind, &[5.0, 4.0, 1.0, 2.0, 3.0], cfg), Vec::<usize>::new(), "{kind:?}");
    }
}

#[test]
fn forced_exhaustion_fills_the_budget_from_the_tail() {
    // Same stream with exhaust_budget=true: once only two arrivals remain and
    // two selections are still owed, both are force-selected.
    for kind in [PolicyKind::Virtual, PolicyKind::VirtualPlus, PolicyKind::Optimistic] {
        let cfg = PolicyConfig::new(2).with_threshold(2).with_exhaust(true);
        assert_eq!(run(kind, &[5.0, 4.0, 1.0, 2.0, 3.0], cfg.clone()), vec![4, 5], "{kind:?}");
        assert_eq!(
            reasons(kind, &[5.0, 4.0, 1.0, 2.0, 3.0], cfg),
            vec![
                DecisionReason::Sampling,
                DecisionReason::Sampling,
                DecisionReason::RuleSkip,
                DecisionReason::ForcedExhaust,
                DecisionReason::ForcedExhaust,
            ],
            "{kind:?}"
        );
    }
}

// ---------------------------------------------------------------------------
// Naive baseline
// ---------------------------------------------------------------------------

#[test]
fn naive_selects_exactly_its_predrawn_positions() {
    let cfg = PolicyConfig::new(3).with_threshold(3);
    let values: Vec<f64> = (1..=10).map(f64::from).collect();
    let mut rng = SeededRng::new(7);
    let trace = policy_run(PolicyKind::Naive, &stream(&values), &cfg, &mut rng).unwrap();
    assert_eq!(trace.selected.len(), 3);
    let mut sorted = trace.selected.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 3, "positions are distinct");
    assert!(sorted.iter().all(|&a| (1..=10).contains(&a)));
    let select_reasons: Vec<DecisionReason> = trace
        .per_step
        .unwrap()
        .iter()
        .filter(|d| d.select)
        .map(|d| d.reason)
        .collect();
    assert!(select_reasons.iter().all(|&r| r == DecisionReason::NaiveDraw));

    // Identical seed reproduces the identical draw.
    let mut rng2 = SeededRng::new(7);
    let trace2 = policy_run(PolicyKind::Naive, &stream(&values), &cfg, &mut rng2).unwrap();
    assert_eq!(trace.selected, trace2.selected);
}

#[test]
fn naive_may_select_inside_the_sampling_prefix() {
    // With k = n every position is drawn, including arrivals <= t.
    let cfg = PolicyConfig::new(4).with_threshold(2);
    let mut rng = SeededRng::new(0);
    let trace =
        policy_run(PolicyKind::Naive, &stream(&[4.0, 3.0, 2.0, 1.0]), &cfg, &mut rng).unwrap();
    assert_eq!(trace.selected, vec![1, 2, 3, 4]);
}

// ---------------------------------------------------------------------------
// Offline Opt
// ---------------------------------------------------------------------------

#[test]
fn offline_opt_selects_top_k_true_values() {
    let s = stream_with_true(&[0.0; 5], &[1.0, 5.0, 3.0, 2.0, 4.0]);
    let trace = policy_run_offline_opt(&s, 2).unwrap();
    let mut selected = trace.selected.clone();
    selected.sort_unstable();
    assert_eq!(selected, vec![2, 5]);
    assert!(trace.per_step.is_none(), "offline selection has no step decisions");
}

#[test]
fn offline_opt_with_full_budget_selects_everything() {
    let s = stream_with_true(&[0.0; 4], &[2.0, 1.0, 4.0, 3.0]);
    let mut selected = policy_run_offline_opt(&s, 4).unwrap().selected;
    selected.sort_unstable();
    assert_eq!(selected, vec![1, 2, 3, 4]);
}

#[test]
fn offline_opt_breaks_value_ties_by_earlier_arrival() {
    let s = stream_with_true(&[0.0; 4], &[3.0, 1.0, 2.0, 3.0]);
    assert_eq!(policy_run_offline_opt(&s, 1).unwrap().selected, vec![1]);
}

#[test]
fn offline_opt_requires_true_values() {
    let s = stream(&[1.0, 2.0, 3.0]);
    assert!(matches!(
        policy_run_offline_opt(&s, 1),
        Err(PolicyError::MissingTrueValue { .. })
    ));
}

// ---------------------------------------------------------------------------
// Initialization, defaults, and config validation
// ---------------------------------------------------------------------------

#[test]
fn virtual_plus_default_threshold_tracks_the_optimal_alpha() {
    // n=100, k=2: the optimal sampling fraction for the pair bound is
    // 0.3824..., so the default threshold is round(38.24) = 38.
    let mut rng = SeededRng::new(0);
    let state =
        policy_init(PolicyKind::VirtualPlus, 100, &PolicyConfig::new(2), &mut rng).unwrap();
    assert_eq!(state.threshold(), 38);
}

#[test]
fn virtual_default_threshold_is_n_over_e() {
    let mut rng = SeededRng::new(0);
    let state = policy_init(PolicyKind::Virtual, 100, &PolicyConfig::new(5), &mut rng).unwrap();
    assert_eq!(state.threshold(), 36);
    let state = policy_init(PolicyKind::Optimistic, 100, &PolicyConfig::new(5), &mut rng).unwrap();
    assert_eq!(state.threshold(), 36);
}

#[test]
fn single_ref_without_reference_rank_is_rejected() {
    let mut rng = SeededRng::new(0);
    let cfg = PolicyConfig::new(2).with_threshold(4);
    assert!(matches!(
        policy_init(PolicyKind::SingleRef, 10, &cfg, &mut rng),
        Err(PolicyError::InvalidConfig { .. })
    ));
}

#[test]
fn single_ref_presets_cover_the_single_selection_case() {
    // k=1 preset: (floor(n/e), 1).
    let mut rng = SeededRng::new(0);
    let state = policy_init(PolicyKind::SingleRef, 100, &PolicyConfig::new(1), &mut rng).unwrap();
    assert_eq!(state.threshold(), 36);
}

#[test]
fn reference_rank_outside_budget_is_rejected() {
    let mut rng = SeededRng::new(0);
    let cfg = PolicyConfig::new(2).with_threshold(4).with_reference_rank(3);
    assert!(matches!(
        policy_init(PolicyKind::SingleRef, 10, &cfg, &mut rng),
        Err(PolicyError::InvalidConfig { .. })
    ));
}

#[test]
fn reference_rank_on_non_single_ref_policy_is_rejected() {
    let mut rng = SeededRng::new(0);
    let cfg = PolicyConfig::new(2).with_threshold(4).with_reference_rank(1);
    assert!(matches!(
        policy_init(PolicyKind::Virtual, 10, &cfg, &mut rng),
        Err(PolicyError::InvalidConfig { .. })
    ));
}

#[test]
fn budget_larger_than_stream_is_rejected() {
    let mut rng = SeededRng::new(0);
    assert!(matches!(
        policy_init(PolicyKind::Virtual, 3, &PolicyConfig::new(4), &mut rng),
        Err(PolicyError::InvalidConfig { .. })
    ));
}

#[test]
fn offline_policy_cannot_be_initialized_as_an_online_state() {
    let mut rng = SeededRng::new(0);
    assert!(matches!(
        policy_init(PolicyKind::Opt, 10, &PolicyConfig::new(2), &mut rng),
        Err(PolicyError::OfflinePolicy)
    ));
}

#[test]
fn explicit_threshold_is_clamped_into_the_valid_range() {
    let mut rng = SeededRng::new(0);
    // t=1 below the lower bound k=2 is clamped up to 2.
    let cfg = PolicyConfig::new(2).with_threshold(1);
    let state = policy_init(PolicyKind::Virtual, 10, &cfg, &mut rng).unwrap();
    assert_eq!(state.threshold(), 2);
    // t=9 above n-k=8 is clamped down to 8.
    let cfg = PolicyConfig::new(2).with_threshold(9);
    let state = policy_init(PolicyKind::Virtual, 10, &cfg, &mut rng).unwrap();
    assert_eq!(state.threshold(), 8);
}

// ---------------------------------------------------------------------------
// Step-feeding protocol
// ---------------------------------------------------------------------------

#[test]
fn out_of_order_arrivals_are_rejected() {
    let mut rng = SeededRng::new(0);
    let cfg = PolicyConfig::new(1).with_threshold(1);
    let mut state = policy_init(PolicyKind::VirtualPlus, 3, &cfg, &mut rng).unwrap();
    let item = StreamItem {
        id: "2".into(),
        arrival: 2,
        observed_value: 1.0,
        true_value: None,
        fooled: None,
    };
    assert!(matches!(
        policy_step(&mut state, &item),
        Err(PolicyError::OutOfOrderArrival { expected: 1, got: 2 })
    ));
}

#[test]
fn stepping_past_the_stream_end_is_rejected() {
    let mut rng = SeededRng::new(0);
    let cfg = PolicyConfig::new(1).with_threshold(1);
    let mut state = policy_init(PolicyKind::VirtualPlus, 2, &cfg, &mut rng).unwrap();
    for arrival in 1..=2 {
        let item = StreamItem {
            id: arrival.to_string(),
            arrival,
            observed_value: arrival as f64,
            true_value: None,
            fooled: None,
        };
        policy_step(&mut state, &item).unwrap();
    }
    let extra = StreamItem {
        id: "3".into(),
        arrival: 3,
        observed_value: 3.0,
        true_value: None,
        fooled: None,
    };
    assert!(matches!(policy_step(&mut state, &extra), Err(PolicyError::StreamEnded)));
}

// ---------------------------------------------------------------------------
// Trace invariants on the worked examples
// ---------------------------------------------------------------------------

#[test]
fn traces_store_the_resolved_configuration() {
    let cfg = PolicyConfig::new(2);
    let mut rng = SeededRng::new(0);
    let trace = policy_run(
        PolicyKind::VirtualPlus,
        &stream(&[5.0, 1.0, 4.0, 2.0, 3.0, 6.0]),
        &cfg,
        &mut rng,
    )
    .unwrap();
    assert_eq!(trace.policy, PolicyKind::VirtualPlus);
    assert_eq!(trace.config.k, 2);
    assert!(trace.config.t.is_some(), "threshold is resolved in the trace");
    let selected = &trace.selected;
    assert!(selected.windows(2).all(|w| w[0] < w[1]), "arrivals strictly increasing");
}
