use donation_ca_core::evolution::{
    mutate, run_generations, select_parents, EvolutionParams, InitialStrategies, MutationMatrix,
};
use donation_ca_core::imagescore::{ImageGame, ImageGameParams, Pairing};
use donation_ca_core::metrics::{agent_reputation_counts, Experiment};
use donation_ca_core::seed::rng_from_seed;
use donation_ca_core::{
    decide_donation, derive_rule_table, run, Directionality, Family, InitPattern, Neighborhood,
    Params, Reputation, Strategy as AgentStrategy, StrategyAssignment, StrategyDescriptor, World,
    CURATED,
};
use proptest::prelude::*;

fn reputation() -> impl Strategy<Value = Reputation> {
    any::<bool>().prop_map(Reputation::from_bit)
}

fn descriptor() -> impl Strategy<Value = StrategyDescriptor> {
    (
        prop_oneof![
            Just(Family::InGroupBias),
            Just(Family::FeudalSystem),
            Just(Family::RankBasedAssistance),
            Just(Family::Altruist),
        ],
        prop_oneof![
            Just(Directionality::Both),
            Just(Directionality::LeftOnly),
            Just(Directionality::RightOnly),
        ],
        any::<bool>(),
    )
        .prop_map(|(f, d, h)| StrategyDescriptor::new(f, d, h))
}

fn curated_strategy() -> impl Strategy<Value = AgentStrategy> {
    (0..CURATED.len()).prop_map(|i| AgentStrategy::Descriptor(CURATED[i]))
}

fn params() -> impl Strategy<Value = (Params, usize)> {
    (
        prop_oneof![Just(0.0), 0.0..=1.0f64],
        prop_oneof![Just(0.0), 0.0..=1.0f64],
        0usize..8,
        any::<bool>(),
        0u32..4,
        2usize..16,
    )
        .prop_map(|(er, ea, swaps, directed, fatigue, half)| {
            let mut p = Params::default();
            p.noise.perception = er;
            p.noise.action = ea;
            p.mobility.swap_pairs = swaps;
            p.mobility.directed = directed;
            p.fatigue_limit = fatigue;
            (p, 2 * half.max(4))
        })
}

proptest! {
    #[test]
    fn decision_total_is_zero_or_one(
        d in descriptor(), l in reputation(), c in reputation(), r in reputation()
    ) {
        let dec = decide_donation(d, l, c, r);
        let total = dec.total();
        prop_assert!(total == 0.0 || total == 1.0);
        if dec.share_left == 0.5 {
            prop_assert!(!d.hesitation || d.family == Family::Altruist);
        }
    }

    #[test]
    fn mirror_reflects_the_table(d in descriptor()) {
        let table = derive_rule_table(d);
        let mirrored = derive_rule_table(d.mirrored());
        for nb in Neighborhood::all() {
            prop_assert_eq!(table.output(nb), mirrored.output(nb.reflected()));
        }
    }

    #[test]
    fn hesitation_only_removes_donations(d in descriptor()) {
        let eager = derive_rule_table(StrategyDescriptor { hesitation: false, ..d });
        let hesitant = derive_rule_table(StrategyDescriptor { hesitation: true, ..d });
        for k in 0..8 {
            prop_assert!(hesitant.output_at(k) <= eager.output_at(k));
        }
    }

    #[test]
    fn steps_conserve_donations_and_identities(
        (p, n) in params(),
        strategies in proptest::collection::vec(curated_strategy(), 32),
        seed in any::<u64>(),
    ) {
        let assignment = StrategyAssignment::PerAgent(strategies[..n.min(32)].to_vec());
        let n = n.min(32);
        let mut world = World::new(n, &InitPattern::Random, &assignment, p, seed).unwrap();
        let mut received_before = 0.0;
        let mut made_before = 0.0;
        for _ in 0..20 {
            let rec = world.step();
            let donors = rec.per_agent_donated.iter().filter(|&&d| d).count() as f64;
            prop_assert_eq!(rec.per_agent_received.iter().sum::<f64>(), donors);
            let received: f64 = world.cells().iter().map(|a| a.donations_received()).sum();
            let made: f64 = world.cells().iter().map(|a| a.donations_made()).sum();
            prop_assert_eq!(received - received_before, donors);
            prop_assert_eq!(made - made_before, donors);
            received_before = received;
            made_before = made;

            let mut ids: Vec<usize> = world.cells().iter().map(|a| a.id()).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
            // Site and agent views hold the same states, only relabeled.
            let highs = |v: &[Reputation]| v.iter().filter(|s| s.is_high()).count();
            prop_assert_eq!(highs(&rec.site_states), highs(&rec.agent_states));
            for agent in world.cells() {
                prop_assert_eq!(rec.agent_states[agent.id()], agent.state());
            }
            if p.fatigue_limit > 0 {
                prop_assert!(world.max_fatigue_streak() <= p.fatigue_limit);
            }
        }
    }

    #[test]
    fn identical_seeds_give_identical_histories((p, n) in params(), seed in any::<u64>()) {
        let assignment: StrategyAssignment = CURATED[(seed % 12) as usize].into();
        let mut a = World::new(n, &InitPattern::Random, &assignment, p, seed).unwrap();
        let mut b = World::new(n, &InitPattern::Random, &assignment, p, seed).unwrap();
        prop_assert_eq!(run(&mut a, 15).unwrap(), run(&mut b, 15).unwrap());
    }

    #[test]
    fn fatigue_bounds_every_streak(limit in 1u32..5, seed in any::<u64>(), rule in 0usize..12) {
        let p = Params {
            fatigue_limit: limit,
            ..Params::default()
        };
        let exp = Experiment {
            population: 24,
            steps: 60,
            init: InitPattern::Random,
            strategies: CURATED[rule].into(),
            params: p,
        };
        prop_assert!(exp.history(seed).unwrap().longest_donation_streak() <= limit);
        let alt = Experiment { strategies: StrategyDescriptor::ALTRUIST.into(), ..exp };
        prop_assert_eq!(alt.history(seed).unwrap().longest_donation_streak(), limit);
    }

    #[test]
    fn noise_free_donations_match_high_counts(rule in 0usize..12, seed in any::<u64>(), swaps in 0usize..5) {
        let mut p = Params::default();
        p.mobility.swap_pairs = swaps;
        let exp = Experiment {
            population: 20,
            steps: 40,
            init: InitPattern::Random,
            strategies: CURATED[rule].into(),
            params: p,
        };
        let h = exp.history(seed).unwrap();
        prop_assert_eq!(h.donation_counts(), agent_reputation_counts(&h));
    }

    #[test]
    fn roulette_ignores_zero_fitness(
        fitness in proptest::collection::vec(prop_oneof![Just(0.0), 0.5..10.0f64], 1..20),
        seed in any::<u64>(),
    ) {
        let mut rng = rng_from_seed(seed);
        let parents = select_parents(&fitness, &mut rng);
        prop_assert_eq!(parents.len(), fitness.len());
        if fitness.iter().any(|&f| f > 0.0) {
            for p in parents {
                prop_assert!(fitness[p] > 0.0);
            }
        }
    }

    #[test]
    fn image_game_invariants(
        local in any::<bool>(),
        swaps in 0usize..4,
        noise in 0.0..0.5f64,
        seed in any::<u64>(),
    ) {
        let params = ImageGameParams {
            population: 16,
            rounds: 0,
            pairing: if local { Pairing::AdjacentNeighbor } else { Pairing::RandomPair },
            swap_pairs: swaps,
            perception_noise: noise,
            action_noise: noise,
            ..ImageGameParams::default()
        };
        let mut game = ImageGame::new(params, seed).unwrap();
        for _ in 0..400 {
            game.play_round();
            for a in game.agents() {
                prop_assert!((params.image_min..=params.image_max).contains(&a.image));
            }
        }
        let given: u64 = game.agents().iter().map(|a| a.donations_given()).sum();
        let received: u64 = game.agents().iter().map(|a| a.donations_received()).sum();
        prop_assert_eq!(given, game.donations());
        prop_assert_eq!(received, game.donations());
        let total: f64 = game.agents().iter().map(|a| a.payoff()).sum();
        let expected = game.donations() as f64 * (params.benefit - params.cost);
        prop_assert!((total - expected).abs() <= 1e-9 * expected.max(1.0));
    }
}

#[test]
fn noise_free_path_ignores_mobility_free_generator_state() {
    // Different seeds cannot matter without noise, mobility or random init.
    let assignment: StrategyAssignment = CURATED[3].into();
    let mut a = World::new(
        30,
        &InitPattern::Checkerboard,
        &assignment,
        Params::default(),
        1,
    )
    .unwrap();
    let mut b = World::new(
        30,
        &InitPattern::Checkerboard,
        &assignment,
        Params::default(),
        2,
    )
    .unwrap();
    assert_eq!(run(&mut a, 40).unwrap(), run(&mut b, 40).unwrap());
}

#[test]
fn selection_frequencies_follow_fitness() {
    let mut rng = rng_from_seed(11);
    let mut counts = [0usize; 3];
    for _ in 0..20_000 {
        for p in select_parents(&[2.0, 1.0, 1.0], &mut rng) {
            counts[p] += 1;
        }
    }
    let total = counts.iter().sum::<usize>() as f64;
    for (c, expected) in counts.iter().zip([0.5, 0.25, 0.25]) {
        assert!((*c as f64 / total - expected).abs() < 0.005);
    }
}

#[test]
fn mutation_rate_and_row_weights() {
    let m = MutationMatrix::curated();
    let mut rng = rng_from_seed(3);
    let draws = 400_000;
    let p_m = 0.05;
    let parent = m.index_of(219).unwrap();
    let mut landed = [0usize; 12];
    let mut mutated = 0;
    for _ in 0..draws {
        let child = mutate(parent, p_m, &m, &mut rng);
        if child != parent {
            mutated += 1;
            landed[child] += 1;
        }
    }
    let rate = mutated as f64 / draws as f64;
    // Binomial standard error is about 3.4e-4.
    assert!((rate - p_m).abs() < 2e-3, "{rate}");
    for (j, &hits) in landed.iter().enumerate() {
        let expected = m.prob(parent, j);
        assert!((hits as f64 / mutated as f64 - expected).abs() < 0.01);
    }
}

#[test]
fn homogeneous_generation_equals_engine_run() {
    // Heterogeneous bookkeeping with one shared rule is the homogeneous run.
    let desc = CURATED[7];
    let per_agent = StrategyAssignment::PerAgent(vec![AgentStrategy::Descriptor(desc); 50]);
    let uniform: StrategyAssignment = desc.into();
    let mut a = World::new(50, &InitPattern::Random, &per_agent, Params::default(), 8).unwrap();
    let mut b = World::new(50, &InitPattern::Random, &uniform, Params::default(), 8).unwrap();
    assert_eq!(run(&mut a, 100).unwrap(), run(&mut b, 100).unwrap());
}

#[test]
fn evolution_population_invariants() {
    let params = EvolutionParams {
        population: 60,
        generations: 40,
        iterations_per_generation: 50,
        mutation_probability: 0.0,
        fatigue_limit: 2,
        initial: InitialStrategies::Explicit((0..60).map(|i| [0, 6, 10][i % 3]).collect()),
        ..EvolutionParams::default()
    };
    let out = run_generations(&params, 21).unwrap();
    let a = &out.abundance;
    assert_eq!(a.counts.len(), 41);
    for (row, next) in a.counts.iter().zip(a.counts.iter().skip(1)) {
        assert_eq!(row.iter().sum::<u32>(), 60);
        for k in 0..12 {
            if row[k] == 0 {
                assert_eq!(next[k], 0, "rule index {k} reappeared without mutation");
            }
        }
    }
    assert!(out.longest_donation_streak <= 2);
}

#[test]
fn evolution_is_deterministic_and_records_sites() {
    let params = EvolutionParams {
        population: 20,
        generations: 6,
        iterations_per_generation: 10,
        mutation_probability: 0.1,
        record_sites: true,
        ..EvolutionParams::default()
    };
    let a = run_generations(&params, 4).unwrap();
    let b = run_generations(&params, 4).unwrap();
    assert_eq!(a, b);
    let sites = a.sites.unwrap();
    assert_eq!(sites.height(), 6 * 11);
    assert_eq!(sites.width(), 20);
}
