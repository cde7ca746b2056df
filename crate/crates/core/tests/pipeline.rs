use regseed::experiment::{run_experiment, ExperimentConfig};
use regseed::generate::{generate, GeneratorSpec};
use regseed::graph::random_partitionwise_map;
use regseed::io::{graph_from_json, graph_to_json};
use regseed::regularize::regularize;
use regseed::schedule::PracticalSchedule;
use regseed::stats::{delta_table, regularity_report, SampleBudget, SamplingPlan};
use regseed::{rng, PartitionwiseMap};

fn exhaustive() -> SamplingPlan {
    SamplingPlan::exhaustive(1 << 20)
}

fn config(graph: &str, schedule: &[usize], plan: SamplingPlan, eta_plan: SamplingPlan) -> ExperimentConfig {
    ExperimentConfig {
        graph: graph.into(),
        schedule: PracticalSchedule::new(schedule.to_vec()).unwrap(),
        h: 1,
        eps: 0.25,
        probes: 2,
        trials: 4,
        plan,
        eta_plan,
        big_m: 1,
        seed: 11,
        faithful: false,
    }
}

#[test]
fn generated_graph_survives_file_round_trip_and_regularization() {
    let g = generate(&GeneratorSpec::uniform_random(2, 3, &[5, 4, 6], 3)).unwrap();
    let back = graph_from_json(&graph_to_json(&g)).unwrap();
    assert_eq!(back, g);
    let phi = random_partitionwise_map(g.part_sizes(), &[2, 2, 2], &mut rng::master(5)).unwrap();
    let gstar = regularize(&back, &phi).unwrap();
    assert_eq!(gstar.pairs(), g.pairs());
    let again = graph_from_json(&graph_to_json(&gstar)).unwrap();
    assert_eq!(again, gstar);
}

#[test]
fn noiseless_planted_blocks_have_zero_eta_once_separated() {
    for seed in 0..5 {
        let g = generate(&GeneratorSpec::planted_blocks(2, 0.0, &[4, 4, 4], seed)).unwrap();
        // sampling every vertex reads off whole adjacency rows
        let phi = PartitionwiseMap::new(vec![vec![0, 1, 2, 3]; 3]);
        let gstar = regularize(&g, &phi).unwrap();
        assert!(gstar.vertex_palettes().iter().all(|&p| p <= 2));
        let table = delta_table(&gstar, 1, 0.5, SampleBudget::Fixed(1), &exhaustive()).unwrap();
        for (tc, e) in table.entries() {
            assert_eq!(e.eta, 0.0, "seed {seed}: {tc:?}");
        }
    }
}

#[test]
fn schedule_of_zero_measures_the_input_graph() {
    let g = generate(&GeneratorSpec::half_graph(6)).unwrap();
    let mut cfg = config("half:6", &[0], exhaustive(), exhaustive());
    cfg.probes = 0;
    let res = run_experiment(&g, &cfg).unwrap();
    let direct = regularity_report(&g, 1, 0.25, SampleBudget::Fixed(1), &[], &exhaustive(), &exhaustive()).unwrap();
    for t in &res.trials {
        assert_eq!(t.score, direct.score);
        assert_eq!(t.vertex_palettes, g.vertex_palettes());
    }
}

#[test]
fn experiment_output_does_not_depend_on_thread_count() {
    let g = generate(&GeneratorSpec::planted_blocks(2, 0.1, &[6, 6], 2)).unwrap();
    let mc = SamplingPlan::monte_carlo(500, 3);
    let cfg = config("planted", &[0, 1, 2], mc, mc.with_samples(20).stream(9));
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&run_experiment(&g, &cfg).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));

    let mut faithful = cfg.clone();
    faithful.faithful = true;
    faithful.trials = 12;
    let a = run_experiment(&g, &faithful).unwrap();
    let b = run_experiment(&g, &faithful).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.trials.len(), 12);
}

#[test]
fn monochromatic_experiment_scores_zero() {
    let g = generate(&GeneratorSpec::monochromatic(&[7, 5, 3])).unwrap();
    let res = run_experiment(&g, &config("mono", &[0, 1, 3], exhaustive(), exhaustive())).unwrap();
    assert!(res.trials.iter().all(|t| t.score == 0.0 && t.margins.iter().all(|&m| m == 0.0)));
    assert!(res.markov.holds);
}
