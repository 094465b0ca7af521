use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use grand_relay::montecarlo::{run_cell, StoppingRule, SweepConfig};
use grand_relay::{ChannelKind, DecoderKind, FadingMode, Scenario, SweepGrid};

fn config(channel: ChannelKind, scenario: Scenario, decoder: DecoderKind, eb_n0_db: f64) -> SweepConfig {
    let mut cfg = SweepConfig::new(SweepGrid {
        eb_n0_points: vec![eb_n0_db],
        relay_counts: vec![4],
        scenarios: vec![scenario],
        decoders: if decoder == DecoderKind::None { vec![] } else { vec![decoder] },
        channels: vec![channel],
        fading: FadingMode::PerSymbol,
        master_seed: 1,
    });
    cfg.stopping = StoppingRule::FixedTrials { trials: 512 };
    cfg.workers = Some(1);
    cfg
}

fn five_hop_cells(c: &mut Criterion) {
    let mut group = c.benchmark_group("five_hop_512_blocks");
    group.sample_size(10);
    group.throughput(Throughput::Elements(512));
    let cases = [
        ("awgn_uncoded_8dB", ChannelKind::Awgn, Scenario::NoGrand, DecoderKind::None, 8.0),
        ("awgn_grand_all_nodes_8dB", ChannelKind::Awgn, Scenario::AllNodes, DecoderKind::GrandHard, 8.0),
        ("awgn_orbgrand_all_nodes_6dB", ChannelKind::Awgn, Scenario::AllNodes, DecoderKind::Orbgrand, 6.0),
        ("rayleigh_grand_all_nodes_20dB", ChannelKind::Rayleigh, Scenario::AllNodes, DecoderKind::GrandHard, 20.0),
    ];
    for (name, channel, scenario, decoder, db) in cases {
        let cfg = config(channel, scenario, decoder, db);
        let cell = cfg.grid.cells()[0];
        group.bench_function(name, |b| b.iter(|| run_cell(&cfg, &cell).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, five_hop_cells);
criterion_main!(benches);
