mod oracle;

use oracle::{all_vectors, Interp};
use proptest::prelude::*;
use psoframe::simcore::{fault_simulate_serial_undropped, Polarity};
use psoframe::synth::{random_circuit, RandomCircuitSpec};
use psoframe::*;

fn tv(s: &str) -> TestVector {
    s.parse().unwrap()
}

const NINE_RANDOM: [&str; 9] = [
    "1110010", "1001101", "0100111", "0010000", "0010010", "0101010", "0001000", "1011010",
    "1101000",
];
const COMPACT_SET: [&str; 6] = [
    "1101010", "0110110", "1001000", "0000100", "0010011", "0010000",
];

fn scan() -> SimOptions {
    SimOptions {
        mode: SimMode::Scan,
        observe: Observe::Scan,
    }
}

/// Stem faults only: the oracle can inject those by pinning a label.
fn stem_faults(c: &Circuit) -> Vec<Fault> {
    enumerate_faults(c, false)
        .into_iter()
        .filter(|f| f.site.sink.is_none())
        .collect()
}

/// First detecting vector per fault, computed with the interpreter. The
/// faulty machine carries its own state in functional mode.
fn oracle_first_detection(
    it: &Interp,
    c: &Circuit,
    vectors: &[Vec<bool>],
    faults: &[Fault],
    opts: SimOptions,
) -> Vec<Option<usize>> {
    let ni = it.inputs.len();
    let nq = it.dffs.len();
    faults
        .iter()
        .map(|f| {
            let label = c.label(f.site.net).to_string();
            let stuck = f.polarity == Polarity::StuckAt1;
            let mut good_state = vectors[0][ni..].to_vec();
            let mut bad_state = good_state.clone();
            for (i, v) in vectors.iter().enumerate() {
                if opts.mode == SimMode::Scan {
                    good_state = v[ni..].to_vec();
                    bad_state = good_state.clone();
                }
                let g_bits: Vec<bool> = v[..ni].iter().chain(&good_state).copied().collect();
                let b_bits: Vec<bool> = v[..ni].iter().chain(&bad_state).copied().collect();
                let g = it.observe(&it.eval(&g_bits, None));
                let b = it.observe(&it.eval(&b_bits, Some((&label, stuck))));
                let no = it.outputs.len();
                let differs = match opts.observe {
                    Observe::Scan => g != b,
                    Observe::PoOnly => g[..no] != b[..no],
                };
                if differs {
                    return Some(i);
                }
                good_state = g[no..no + nq].to_vec();
                bad_state = b[no..no + nq].to_vec();
            }
            None
        })
        .collect()
}

#[test]
fn s27_stem_faults_match_interpreter_exhaustively() {
    let c = parse_bench(S27_BENCH).unwrap();
    let it = Interp::parse(S27_BENCH);
    let faults = stem_faults(&c);
    for v in all_vectors(7) {
        let want = oracle_first_detection(&it, &c, std::slice::from_ref(&v), &faults, scan());
        let got = fault_simulate_serial(&c, &[TestVector::new(v)], &faults, scan()).unwrap();
        assert_eq!(got.first_detection, want);
    }
}

#[test]
fn nine_random_vectors_reach_full_coverage() {
    let c = parse_bench(S27_BENCH).unwrap();
    let faults = enumerate_faults(&c, true);
    let v: Vec<TestVector> = NINE_RANDOM.iter().map(|s| tv(s)).collect();
    let r = fault_simulate_serial(&c, &v, &faults, scan()).unwrap();
    assert_eq!(r.coverage().unwrap(), 1.0);
    let curve = r.cumulative_coverage();
    assert!(curve.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn compact_set_under_our_universe() {
    // This six-vector set leaves one of the 32 collapsed faults undetected.
    let c = parse_bench(S27_BENCH).unwrap();
    let faults = enumerate_faults(&c, true);
    let v: Vec<TestVector> = COMPACT_SET.iter().map(|s| tv(s)).collect();
    let r = fault_simulate_serial(&c, &v, &faults, scan()).unwrap();
    assert_eq!(r.detected.len(), 31);
    assert_eq!(r.coverage().unwrap(), 31.0 / 32.0);
}

#[test]
fn po_only_observation_is_weaker() {
    let c = parse_bench(S27_BENCH).unwrap();
    let faults = enumerate_faults(&c, true);
    let v: Vec<TestVector> = NINE_RANDOM.iter().map(|s| tv(s)).collect();
    let po = SimOptions {
        observe: Observe::PoOnly,
        ..scan()
    };
    let a = fault_simulate_serial(&c, &v, &faults, po).unwrap();
    let b = fault_simulate_serial(&c, &v, &faults, scan()).unwrap();
    assert!(a.detected.iter().all(|f| b.detected.contains(f)));
    assert!(a.detected.len() < b.detected.len());
}

#[test]
fn input_errors() {
    let c = parse_bench(S27_BENCH).unwrap();
    let faults = enumerate_faults(&c, true);
    assert!(matches!(
        fault_simulate_parallel(&c, &[], &faults, scan()),
        Err(Error::EmptyVectorList)
    ));
    assert!(matches!(
        fault_simulate_serial(&c, &[tv("0000000")], &[], scan()),
        Err(Error::EmptyFaultList)
    ));
    assert!(matches!(
        fault_simulate_parallel(&c, &[tv("000")], &faults, scan()),
        Err(Error::WidthMismatch {
            expected: 7,
            found: 3
        })
    ));
}

fn options() -> impl Strategy<Value = SimOptions> {
    (prop::bool::ANY, prop::bool::ANY).prop_map(|(f, p)| SimOptions {
        mode: if f {
            SimMode::Functional
        } else {
            SimMode::Scan
        },
        observe: if p { Observe::PoOnly } else { Observe::Scan },
    })
}

fn case() -> impl Strategy<Value = (Circuit, Vec<TestVector>)> {
    (
        1usize..5,
        0usize..4,
        1usize..30,
        1usize..3,
        any::<u64>(),
        1usize..80,
    )
        .prop_flat_map(|(inputs, dffs, gates, outputs, seed, n)| {
            let c = random_circuit(
                RandomCircuitSpec {
                    inputs,
                    dffs,
                    gates,
                    outputs,
                    max_fanin: 3,
                },
                seed,
            );
            let w = c.width();
            let vecs = prop::collection::vec(prop::collection::vec(any::<bool>(), w), n)
                .prop_map(|vs| vs.into_iter().map(TestVector::new).collect::<Vec<_>>());
            (Just(c), vecs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 150, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parallel_equals_serial((c, v) in case(), opts in options(), collapse in any::<bool>()) {
        let faults = enumerate_faults(&c, collapse);
        let s = fault_simulate_serial(&c, &v, &faults, opts).unwrap();
        let p = fault_simulate_parallel(&c, &v, &faults, opts).unwrap();
        prop_assert_eq!(s, p);
    }

    #[test]
    fn serial_stem_faults_match_interpreter((c, v) in case(), opts in options()) {
        let it = Interp::parse(&c.to_bench());
        let faults = stem_faults(&c);
        let raw: Vec<Vec<bool>> = v.iter().map(|t| t.bits().to_vec()).collect();
        let want = oracle_first_detection(&it, &c, &raw, &faults, opts);
        let got = fault_simulate_serial(&c, &v, &faults, opts).unwrap();
        prop_assert_eq!(got.first_detection, want);
    }

    #[test]
    fn coverage_never_drops_on_append((c, v) in case(), opts in options()) {
        let faults = enumerate_faults(&c, true);
        let mut prev = 0.0;
        for k in 1..=v.len() {
            let cov = fault_simulate_parallel(&c, &v[..k], &faults, opts).unwrap().coverage().unwrap();
            prop_assert!(cov >= prev);
            prev = cov;
        }
    }

    #[test]
    fn dropping_does_not_change_detection((c, v) in case(), opts in options()) {
        let faults = enumerate_faults(&c, false);
        let dropped = fault_simulate_serial(&c, &v, &faults, opts).unwrap();
        let full = fault_simulate_serial_undropped(&c, &v, &faults, opts).unwrap();
        prop_assert_eq!(dropped, full);
    }
}
