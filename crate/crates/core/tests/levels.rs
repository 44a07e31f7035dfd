//! Cross-level invariants: generalized shift vs machine, NDA vs encoding,
//! network vs NDA.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tm2net::encode::encode;
use tm2net::gshift::{GeneralizedShift, Window};
use tm2net::machine::{DottedSequence, Radix, State, Symbol, TuringMachine};
use tm2net::network::{unit_count, NetState};
use tm2net::random::{random_input, random_machine};
use tm2net::rational::{int, Rational};
use tm2net::{compare_levels, Nda, Network, Pipeline};

fn random_config<R: Rng>(rng: &mut R, m: &TuringMachine, w: Window) -> DottedSequence {
    let n_s = m.n_symbols();
    let mut left = vec![w.left];
    left.extend((0..rng.gen_range(0..5)).map(|_| Symbol(rng.gen_range(0..n_s))));
    let mut right = vec![w.head];
    right.extend((0..rng.gen_range(0..5)).map(|_| Symbol(rng.gen_range(0..n_s))));
    DottedSequence::new(w.state, left, right)
}

fn machines() -> Vec<TuringMachine> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = vec![tm2net::parse_tm(include_str!("../../../fixtures/flip.tm")).unwrap()];
    for n_q in 1..=4 {
        for n_s in 1..=4 {
            out.push(random_machine(&mut rng, n_q, n_s));
        }
    }
    out
}

#[test]
fn gshift_emulates_machine_on_every_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in machines() {
        let g = GeneralizedShift::build(&m);
        for w in g.windows() {
            for _ in 0..8 {
                let c = random_config(&mut rng, &m, w);
                let gs = g.step(&c);
                if m.is_halting(c.state()) {
                    assert_eq!(gs, c);
                } else {
                    assert_eq!(gs, m.step(&c).unwrap(), "window {w:?}");
                }
            }
        }
    }
}

#[test]
fn nda_commutes_with_machine_and_keeps_cells_coherent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in machines() {
        let r = m.radix();
        let nda = Nda::build(&m);
        let g = GeneralizedShift::build(&m);
        for w in g.windows() {
            for _ in 0..8 {
                let c = random_config(&mut rng, &m, w);
                let p = encode(r, &c);
                assert_eq!(nda.partition().theta(&p).unwrap(), nda.partition().cell_of(Window::of(&c)));
                let next = nda.step(&p).unwrap();
                // image stays in the open unit square
                assert!(nda.partition().theta(&next).is_ok());
                if !m.is_halting(c.state()) {
                    assert_eq!(next, encode(r, &m.step(&c).unwrap()));
                }
            }
        }
        // With a single tape symbol a self-loop is the identity map too.
        if r.n_s >= 2 {
            for (_, b) in nda.branches() {
                assert_eq!(b.is_identity(), m.is_halting(b.window.state));
            }
        }
    }
}

#[test]
fn network_layers_behave_on_random_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for m in machines() {
        let p = Pipeline::new(m).unwrap();
        let net = &p.network;
        let half = net.h() / int(2);
        for _ in 0..4 {
            let w = random_input(&mut rng, &p.machine, 6);
            let c0 = p.machine.initial_config(&w).unwrap();
            let tm = p.machine.run(c0.clone(), 30).unwrap();
            let mut s = NetState::<Rational>::from_point(net, &encode(p.machine.radix(), &c0));
            for c in tm.states.iter().skip(1) {
                let prev = s.point();
                s = net.step(&s);
                assert_eq!(s.point(), encode(p.machine.radix(), c));
                // BSL staircase
                for (k, id) in net.bsl_x_range().enumerate() {
                    let on = prev.x >= net.partition().xi()[k];
                    assert_eq!(s.activations()[id] == int(1), on);
                }
                for (k, id) in net.bsl_y_range().enumerate() {
                    let on = prev.y >= net.partition().eta()[k];
                    assert_eq!(s.activations()[id] == int(1), on);
                }
                // one selected cell, drive trichotomy
                let selected = net.partition().theta(&prev).unwrap();
                assert_eq!(net.selected_cell(&s), Some(selected));
                for cell in net.partition().cells() {
                    let d = net.drive(&s, cell);
                    let want = match (cell.i == selected.i, cell.j == selected.j) {
                        (true, true) => net.h().clone(),
                        (false, false) => int(0),
                        _ => half.clone(),
                    };
                    assert_eq!(d, want);
                }
                let active = net.active_cells(&s);
                assert!(active.len() <= 1);
                if active.is_empty() {
                    assert_eq!(s.point(), tm2net::SymbologramPoint::new(int(0), int(0)));
                } else {
                    assert_eq!(active, vec![selected]);
                }
            }
        }
    }
}

#[test]
fn compare_agrees_on_random_machines() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in machines() {
        let p = Pipeline::new(m).unwrap();
        for _ in 0..5 {
            let w = random_input(&mut rng, &p.machine, 6);
            let c0 = p.machine.initial_config(&w).unwrap();
            compare_levels(&p, &c0, 50).unwrap();
        }
    }
}

#[test]
fn network_document_round_trips_for_random_machines() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let m = random_machine(&mut rng, 3, 3);
        let net = Network::build(&Nda::build(&m)).unwrap();
        assert_eq!(Network::import_json(&net.export_json()).unwrap(), net);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unit_count_matches_built_network(n_q in 1usize..5, n_s in 1usize..5, seed in any::<u64>()) {
        let m = random_machine(&mut ChaCha8Rng::seed_from_u64(seed), n_q, n_s);
        let net = Network::build(&Nda::build(&m)).unwrap();
        prop_assert_eq!(net.len(), unit_count(Radix { n_q, n_s }));
        prop_assert_eq!(net.len(), 2 + n_s + n_s * n_q + 2 * n_s * n_s * n_q + 1);
    }

    #[test]
    fn run_trace_is_linked_by_steps(seed in any::<u64>(), max_steps in 0usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_machine(&mut rng, 3, 3);
        let w = random_input(&mut rng, &m, 6);
        let trace = m.run(m.initial_config(&w).unwrap(), max_steps).unwrap();
        prop_assert!(trace.states.len() <= max_steps + 1);
        for pair in trace.states.windows(2) {
            prop_assert_eq!(&m.step(&pair[0]).unwrap(), &pair[1]);
        }
        prop_assert!(trace.states.iter().all(|c| c.state() != State(99)));
    }
}
