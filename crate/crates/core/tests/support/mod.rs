//! Randomised invariant checks, shared by the property tests and the
//! acceptance runner. Each check returns the first counterexample, if any.

use ampdu_sim_core::channel::{ber_from_per, per_from_ber};
use ampdu_sim_core::engine::{markov_oracle, ratio_eq_thr, run_sim, RatioInputs, SimConfig};
use ampdu_sim_core::frame::{
    airtime_for_copies, analytic_throughput, psdu_airtime_us, AggregationMode, FrameGeometry,
    MacTimingProfile, PhyProfile, PsduPlan, GRID_MSDU_BYTES, GRID_RATES_MBPS,
};
use ampdu_sim_core::strategy::{all_presets, build_plan};
use ampdu_sim_core::window::WindowState;
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, TestRunner};

type Check = fn() -> Result<(), String>;

/// Every invariant, with a readable name.
#[allow(dead_code)]
pub const ALL: [(&str, Check); 12] = [
    ("element padding and growth", element_padding),
    ("airtime symbol quantisation", airtime_quantised),
    ("error-free throughput grows with X", closed_form_grows),
    ("BER/PER round trip", ber_per_round_trip),
    ("PER monotone in BER and length", per_monotone),
    ("X_min shape", xmin_shape),
    ("window conservation", window_conservation),
    ("plan copy counts", plan_copies),
    ("ratio decreasing in alpha", ratio_alpha),
    ("seed determinism", seed_determinism),
    ("exact throughput falls with PER", exact_per_monotone),
    ("simulated throughput falls with PER", sim_per_monotone),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn rate() -> impl Strategy<Value = f64> {
    select(GRID_RATES_MBPS.to_vec())
}

fn msdu() -> impl Strategy<Value = u32> {
    select(GRID_MSDU_BYTES.to_vec())
}

fn preset() -> impl Strategy<Value = ampdu_sim_core::Strategy> {
    select(all_presets())
}

/// A window with an arbitrary base-clear scoreboard.
fn window() -> impl Strategy<Value = WindowState> {
    (1u32..=64, any::<u64>(), 0u64..1_000_000).prop_map(|(w, bits, base)| {
        let delivered: Vec<u64> = (1..w)
            .filter(|i| bits >> i & 1 == 1)
            .map(|i| base + u64::from(i))
            .collect();
        WindowState::with_delivered(base, w, &delivered).unwrap()
    })
}

fn k_in(width: u32, frac: f64) -> u32 {
    1 + ((f64::from(width) * frac) as u32).min(width - 1)
}

pub fn element_padding() -> Result<(), String> {
    run(
        512,
        (1u32..=2304, 1u32..=7, any::<bool>()),
        |(l, m, two_level)| {
            let (mode, m) = if two_level {
                (AggregationMode::TwoLevel, m)
            } else {
                (AggregationMode::Ampdu, 1)
            };
            if let Ok(g) = FrameGeometry::with_mode(mode, l, m) {
                prop_assert_eq!(g.element_bytes() % 4, 0);
                prop_assert!(g.element_bytes() >= g.mpdu_bytes() + 4);
                if let Ok(bigger) = FrameGeometry::with_mode(mode, l + 1, m) {
                    prop_assert!(bigger.element_bytes() >= g.element_bytes());
                }
                if two_level {
                    if let Ok(more) = FrameGeometry::two_level(l, m + 1) {
                        prop_assert!(more.element_bytes() > g.element_bytes());
                    }
                }
            }
            Ok(())
        },
    )
}

pub fn airtime_quantised() -> Result<(), String> {
    run(512, (1u64..=400, msdu(), rate()), |(n, l, r)| {
        let t = MacTimingProfile::default();
        let phy = PhyProfile::new(r, &t).unwrap();
        let g = FrameGeometry::ampdu(l).unwrap();
        let a = airtime_for_copies(n, &g, &t, &phy);
        prop_assert_eq!(a % t.t_sym_us, 0.0);
        prop_assert!(airtime_for_copies(n + 1, &g, &t, &phy) >= a);
        let x = n.min(64);
        let plan = PsduPlan::single_copies(x as u32);
        prop_assert_eq!(
            psdu_airtime_us(&plan, &g, &t, &phy).unwrap(),
            airtime_for_copies(x, &g, &t, &phy)
        );
        Ok(())
    })
}

/// Whole-symbol rounding can make one extra MPDU cost a whole symbol, so
/// growth in X is strict only while the symbol count holds; with fractional
/// symbols it is always strict, and X = 64 stays the error-free optimum.
pub fn closed_form_grows() -> Result<(), String> {
    run(512, (1u32..64, msdu(), rate()), |(x, l, r)| {
        let t = MacTimingProfile::default();
        let phy = PhyProfile::new(r, &t).unwrap();
        let g = FrameGeometry::ampdu(l).unwrap();
        let thr = |x: u32| analytic_throughput(x, 1.0, &g, &t, &phy).unwrap();
        if airtime_for_copies(u64::from(x), &g, &t, &phy)
            == airtime_for_copies(u64::from(x) + 1, &g, &t, &phy)
        {
            prop_assert!(
                thr(x + 1) > thr(x),
                "X={} gives {} but X+1 gives {}",
                x,
                thr(x),
                thr(x + 1)
            );
        }
        prop_assert!(thr(64) > thr(x));
        let fractional = |x: u32| {
            let bits =
                8.0 * f64::from(x) * g.element_bytes() as f64 + f64::from(t.service_tail_bits);
            f64::from(x) * g.payload_bits() as f64
                / (t.c1() + t.t_sym_us * bits / phy.data_bits_per_symbol)
        };
        prop_assert!(fractional(x + 1) > fractional(x));
        Ok(())
    })
}

pub fn ber_per_round_trip() -> Result<(), String> {
    run(512, (0.0f64..0.999, 1u64..200_000), |(per, bits)| {
        let ber = ber_from_per(per, bits).unwrap();
        let back = per_from_ber(ber, bits).unwrap();
        prop_assert!(
            (back - per).abs() <= 1e-12 * per,
            "{} -> {} -> {}",
            per,
            ber,
            back
        );
        Ok(())
    })
}

pub fn per_monotone() -> Result<(), String> {
    run(
        512,
        (0.0f64..0.01, 1e-9f64..1e-3, 1u64..100_000),
        |(ber, d, bits)| {
            let p = per_from_ber(ber, bits).unwrap();
            prop_assert!(per_from_ber(ber + d, bits).unwrap() >= p);
            prop_assert!(per_from_ber(ber, bits + 1).unwrap() >= p);
            Ok(())
        },
    )
}

pub fn xmin_shape() -> Result<(), String> {
    run(512, (window(), 0.0f64..1.0), |(w, frac)| {
        let k = k_in(w.width(), frac);
        let x = w.select_xmin(k).unwrap();
        prop_assert_eq!(x.len() as u32, k.min(w.width() - w.delivered_count()));
        prop_assert!(x.windows(2).all(|p| p[0] < p[1]));
        prop_assert_eq!(x.first().copied(), Some(w.base_seq()));
        prop_assert!(x.iter().all(|&s| s <= w.end_seq() && !w.is_delivered(s)));
        Ok(())
    })
}

pub fn window_conservation() -> Result<(), String> {
    run(512, (window(), any::<u64>()), |(mut w, pick)| {
        let pending = w.select_xmin(w.width()).unwrap();
        let acked: Vec<u64> = pending
            .iter()
            .enumerate()
            .filter(|(i, _)| pick >> i & 1 == 1)
            .map(|(_, &s)| s)
            .collect();
        let (base_before, held_before) = (w.base_seq(), w.delivered_count());
        let newly = w.apply_back(&acked).unwrap();
        prop_assert_eq!(newly as usize, acked.len());
        prop_assert!(w.base_seq() >= base_before);
        prop_assert!(!w.is_delivered(w.base_seq()));
        // every delivered MPDU is either behind the new base or still held
        let slid = w.base_seq() - base_before;
        prop_assert_eq!(
            u64::from(held_before) + u64::from(newly),
            slid + u64::from(w.delivered_count())
        );
        Ok(())
    })
}

pub fn plan_copies() -> Result<(), String> {
    run(256, (1usize..=64, preset()), |(n, s)| {
        let xmin: Vec<u64> = (0..n as u64).map(|i| 3 * i + 5).collect();
        let plan = build_plan(&xmin, s).unwrap();
        prop_assert_eq!(plan.distinct_count(), n);
        let dup = s.duplicated_among(n) as u64;
        prop_assert_eq!(
            plan.total_copies(),
            n as u64 + dup * u64::from(s.copies() - 1)
        );
        prop_assert!(plan.entries().iter().zip(&xmin).all(|(e, &q)| e.seq == q));
        Ok(())
    })
}

pub fn ratio_alpha() -> Result<(), String> {
    let inputs = (
        0.5f64..50.0,
        0.01f64..10.0,
        1.0f64..1000.0,
        1.0f64..500.0,
        0.0f64..0.5,
    );
    run(512, inputs, |(a, bump, t, t_s, extra)| {
        let i = RatioInputs {
            c1_us: 201.5,
            t_us: t,
            t_s_us: t_s,
            b_bits: 1e5,
            b_s_bits: 1e5 * (1.0 + extra),
            alpha: a,
        };
        let bigger = RatioInputs {
            alpha: a + bump,
            ..i
        };
        prop_assert!(ratio_eq_thr(&bigger) < ratio_eq_thr(&i));
        Ok(())
    })
}

pub fn seed_determinism() -> Result<(), String> {
    run(
        24,
        (any::<u64>(), 0.0f64..=1.0, preset(), 1u32..=16),
        |(seed, per, s, k)| {
            let c = SimConfig::new(FrameGeometry::ampdu(512).unwrap(), 866.7, per, s)
                .unwrap()
                .with_window(16, k)
                .with_run_length(2_000, 100)
                .with_seed(seed);
            prop_assert_eq!(run_sim(&c).unwrap(), run_sim(&c).unwrap());
            Ok(())
        },
    )
}

pub fn exact_per_monotone() -> Result<(), String> {
    run(
        64,
        (0.0f64..0.9, 0.01f64..0.1, preset(), 1u32..=4, 0.0f64..1.0),
        |(lo, gap, s, w, frac)| {
            let k = k_in(w, frac);
            let c = |per| {
                SimConfig::new(FrameGeometry::ampdu(1500).unwrap(), 1299.9, per, s)
                    .unwrap()
                    .with_window(w, k)
            };
            let (a, b) = (
                markov_oracle(&c(lo)).unwrap(),
                markov_oracle(&c(lo + gap)).unwrap(),
            );
            prop_assert!(b < a, "{} at per {} but {} at per {}", a, lo, b, lo + gap);
            Ok(())
        },
    )
}

/// Full-window simulations: a higher PER may not beat a lower one by more
/// than the combined noise.
pub fn sim_per_monotone() -> Result<(), String> {
    run(
        12,
        (0.0f64..0.8, 0.05f64..0.2, preset(), 1u32..=64, any::<u64>()),
        |(lo, gap, s, k, seed)| {
            let c = |per| {
                SimConfig::new(FrameGeometry::ampdu(1024).unwrap(), 1299.9, per, s)
                    .unwrap()
                    .with_window(64, k)
                    .with_run_length(20_000, 500)
                    .with_seed(seed)
            };
            let (a, b) = (run_sim(&c(lo)).unwrap(), run_sim(&c(lo + gap)).unwrap());
            if let (Some(ta), Some(tb)) = (a.throughput_mbps, b.throughput_mbps) {
                let noise = 3.0 * a.ci95_mbps.hypot(b.ci95_mbps);
                prop_assert!(
                    tb <= ta + noise,
                    "{} at per {} but {} at per {}",
                    ta,
                    lo,
                    tb,
                    lo + gap
                );
            }
            Ok(())
        },
    )
}
