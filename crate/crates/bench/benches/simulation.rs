use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use urp_core::simulator::BLOCK_TRIALS;
use urp_core::sir_model::setups;
use urp_core::{run_sim, Scheme, Semantics, SimSpec, TopologyFile};

fn spec(scheme: Scheme, semantics: Semantics) -> SimSpec {
    SimSpec {
        topology: TopologyFile::from(&setups::fig2()),
        antennas: 4,
        scheme,
        threshold_bits: 150,
        blocklength: 200,
        semantics,
        trials: BLOCK_TRIALS,
        seed: 1,
        workers: 1,
        eps_target: None,
        allow_underpowered: false,
        variance_reduced: false,
    }
}

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sim");
    group.throughput(Throughput::Elements(BLOCK_TRIALS));
    group.sample_size(20);
    for (name, scheme, semantics) in [
        ("sc_asymptotic", Scheme::Sc, Semantics::Asymptotic),
        ("mrc_asymptotic", Scheme::Mrc, Semantics::Asymptotic),
        ("mrc_finite_blocklength", Scheme::Mrc, Semantics::FiniteBlocklength),
    ] {
        let s = spec(scheme, semantics);
        group.bench_function(name, |b| b.iter(|| run_sim(&s).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, simulate);
criterion_main!(benches);
