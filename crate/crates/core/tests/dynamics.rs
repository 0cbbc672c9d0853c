use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use structsync::dynamics::{
    simulate, verdict_crosscheck, ArrayState, CrosscheckOptions, OscillatorSystem,
    SimulationParams, SyncClass,
};
use structsync::fixtures;
use structsync::laplacians::{sample_weights, WeightMap};
use structsync::spectral::MarginClass;
use structsync::structural::{is_sss, witness_to_laplacians};

#[test]
fn dissipative_pair_synchronizes() {
    let ic = fixtures::dissipative_pair();
    let sys = OscillatorSystem::harmonic();
    let one = WeightMap::uniform(1, 1.0).unwrap();
    let none = WeightMap::uniform(0, 1.0).unwrap();
    let trace = simulate(
        &sys,
        &ic,
        &one,
        &none,
        &ArrayState::random(2, 1, 3),
        SimulationParams::default(),
    )
    .unwrap();
    assert!(trace.tail < 1e-4, "{}", trace.tail);
}

#[test]
fn example1_witness_pair_does_not_synchronize() {
    let ic = fixtures::example1();
    let w = is_sss(&ic, Default::default()).unwrap().witness.unwrap();
    let (d, r) =
        witness_to_laplacians(&ic, &w.to_rationals(), &WeightMap::uniform(1, 1.0).unwrap())
            .unwrap();
    let trace = structsync::dynamics::simulate_laplacians(
        &OscillatorSystem::harmonic(),
        &d,
        &r,
        &ArrayState::random(4, 1, 11),
        SimulationParams::default(),
    )
    .unwrap();
    assert!(trace.tail > 1e-2, "{}", trace.tail);
}

// The dissipative end segment of this path damps the rest only through one
// vertex, so decay is slow; a longer horizon still separates the verdicts.
#[test]
fn slow_path_fixture_synchronizes_over_a_longer_horizon() {
    let g = fixtures::gallery()
        .into_iter()
        .find(|g| g.name == "g")
        .unwrap();
    let opts = CrosscheckOptions {
        params: SimulationParams {
            horizon: 1000.0,
            step: 1e-3,
        },
        ..Default::default()
    };
    let report = verdict_crosscheck(
        &OscillatorSystem::harmonic(),
        &g.interconnection,
        10,
        7,
        &opts,
    )
    .unwrap();
    for e in &report.entries {
        assert_eq!(e.margin_class, MarginClass::Positive);
        assert_eq!(
            e.sync_class,
            SyncClass::Synchronized,
            "margin {} tail {}",
            e.margin,
            e.tail
        );
    }
}

#[test]
fn witness_pairs_stay_apart_for_every_non_sss_fixture() {
    let sys = OscillatorSystem::harmonic();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for g in fixtures::gallery().into_iter().filter(|g| !g.expected_sss) {
        let ic = g.interconnection;
        let w = is_sss(&ic, Default::default()).unwrap().witness.unwrap();
        let mut opts = CrosscheckOptions::default();
        opts.params.horizon = 100.0;
        let dw = sample_weights(&mut rng, ic.dissipative().len(), opts.d_range);
        opts.seeded
            .push(witness_to_laplacians(&ic, &w.to_rationals(), &dw).unwrap());
        let report = verdict_crosscheck(&sys, &ic, 0, 5, &opts).unwrap();
        assert!(report.all_agree(), "{}: {:?}", g.name, report.entries);
    }
}
