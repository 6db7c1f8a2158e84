//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sldic_core::analysis::{
    check_decodability, check_secrecy_enum, check_secrecy_rank, verify, verify_with, Bits, Method,
    DEFAULT_MAX_STATES,
};
use sldic_core::rates::formula_rate;
use sldic_core::schemes::{
    build, classify_regime, Construction, Regime, SchemeDescription, Segment, Slot, SlotLedger,
    SourceLayout,
};
use sldic_core::{BitMatrix, ChannelParams, RateResult};

const CAPTION_BUDGET: Duration = Duration::from_secs(1);
const ENUMERATION_BUDGET: Duration = Duration::from_secs(30);
const ENUMERATION_STATES: u64 = 1 << 24;
const RANDOM_SCHEMES: usize = 500;
const RANDOM_SEED: u64 = 2024;
const MAX_M: usize = 6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn captions() -> Vec<(ChannelParams, RateResult)> {
    vec![
        (ChannelParams::new(4, 2, 0), RateResult::integer(2)),
        (ChannelParams::new(4, 2, 2), RateResult::integer(4)),
        (ChannelParams::new(5, 4, 0), RateResult::integer(2)),
        (ChannelParams::new(5, 4, 1), RateResult::integer(3)),
        (ChannelParams::new(5, 4, 4), RateResult::integer(5)),
        (ChannelParams::new(2, 4, 2), RateResult::new(5, 2)),
    ]
}

fn caption_rates() -> Outcome {
    let start = Instant::now();
    for (p, want) in captions() {
        let formula = formula_rate(&p).map_err(|e| format!("{p:?}: {e}"))?;
        let built = build(&p).map_err(|e| format!("{p:?}: {e}"))?;
        let exact = |r: RateResult| Ratio::new(r.numerator, r.denominator);
        let want_value = exact(want);
        if exact(formula) != want_value || exact(built.rate) != want_value {
            return Err(format!("{p:?}: formula {formula}, scheme {}, expected {want}", built.rate));
        }
        let delivered = Ratio::new(built.layout.w1_len, built.slots.len());
        if delivered != want_value {
            return Err(format!("{p:?}: scheme delivers {delivered} bits per channel use"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= CAPTION_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("6 caption rates exact in {elapsed:?}"))
}

fn enumeration_secrecy() -> Outcome {
    let start = Instant::now();
    let mut largest = 0;
    for (p, _) in captions() {
        let s = build(&p).map_err(|e| e.to_string())?;
        let r = check_secrecy_enum(&s, ENUMERATION_STATES).map_err(|e| format!("{p:?}: {e}"))?;
        let zeros = [r.mi_bits_1, r.mi_bits_2, r.equivocation_1, r.equivocation_2];
        if zeros.iter().any(|b| *b != Bits::ZERO) {
            return Err(format!(
                "{p:?}: I(W1;y2)={} I(W2;y1)={} H(W1|y1)={} H(W2|y2)={}",
                r.mi_bits_1, r.mi_bits_2, r.equivocation_1, r.equivocation_2
            ));
        }
        largest = largest.max(r.state_count);
    }
    let elapsed = start.elapsed();
    if elapsed >= ENUMERATION_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("zero leakage and zero equivocation, up to {largest} states, in {elapsed:?}"))
}

fn random_scheme(rng: &mut ChaCha8Rng) -> SchemeDescription {
    let m = rng.random_range(0..=5);
    let n = rng.random_range(if m == 0 { 1 } else { 0 }..=5);
    let p = ChannelParams::new(m, n, 0);
    let q = p.q();
    let layout = loop {
        let l = SourceLayout {
            w1_len: rng.random_range(0..=4),
            w2_len: rng.random_range(0..=4),
            d_len: rng.random_range(0..=4),
            e_len: rng.random_range(0..=4),
        };
        if l.total() <= 16 {
            break l;
        }
    };
    let density = rng.random_range(0.05..0.6);
    let slots = (0..rng.random_range(1..=2))
        .map(|_| {
            let mut gen = || {
                let mut g = BitMatrix::zeros(q, layout.total());
                for r in 0..q {
                    for c in 0..layout.total() {
                        g.set(r, c, rng.random_bool(density));
                    }
                }
                g
            };
            Slot { g1: gen(), g2: gen(), coop_ledger: SlotLedger::default() }
        })
        .collect();
    SchemeDescription {
        params: p,
        regime: classify_regime(&p).unwrap(),
        construction: Construction::InterferenceCancelation,
        layout,
        slots,
        rate: RateResult::integer(layout.w1_len),
    }
}

fn verdicts_agree(s: &SchemeDescription) -> Result<(), String> {
    let e = check_secrecy_enum(s, DEFAULT_MAX_STATES).map_err(|e| e.to_string())?;
    let secrecy = check_secrecy_rank(s).map_err(|e| e.to_string())?;
    let decodability = check_decodability(s).map_err(|e| e.to_string())?;
    if secrecy != (e.secret_1, e.secret_2) || decodability != (e.decodable_1, e.decodable_2) {
        return Err(format!("{:?}: rank {secrecy:?}/{decodability:?} vs enumeration {e:?}", s.params));
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for (p, _) in captions() {
        verdicts_agree(&build(&p).map_err(|e| e.to_string())?)?;
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    for _ in 0..RANDOM_SCHEMES {
        let s = random_scheme(&mut rng);
        verdicts_agree(&s)?;
        checked += 1;
    }
    Ok(format!("{checked} schemes, zero disagreements"))
}

fn formula_agreement() -> Outcome {
    let mut checked = 0;
    for m in 1..=MAX_M {
        for n in 0..=2 * m {
            for c in 0..=n {
                let p = ChannelParams::new(m, n, c);
                let s = match build(&p) {
                    Ok(s) => s,
                    Err(sldic_core::Error::Unsupported { .. }) => continue,
                    Err(e) => return Err(format!("{p:?}: {e}")),
                };
                let formula = formula_rate(&p).map_err(|e| format!("{p:?}: {e}"))?;
                let delivered = Ratio::new(s.layout.w1_len, s.slots.len());
                if formula.value() != delivered {
                    return Err(format!("{p:?}: formula {formula}, construction delivers {delivered}"));
                }
                let r = verify(&s).map_err(|e| format!("{p:?}: {e}"))?;
                if !r.passed() {
                    return Err(format!("{p:?}: {r:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} supported points agree and verify"))
}

fn optimality_endpoints() -> Outcome {
    let mut checked = 0;
    for m in 0..=8usize {
        for n in 0..=16usize {
            let p = ChannelParams::new(m, n, n);
            let Ok(regime) = classify_regime(&p) else { continue };
            let Ok(rate) = formula_rate(&p) else { continue };
            if regime == Regime::Unity {
                for c in 0..=n + 2 {
                    let r = formula_rate(&ChannelParams::new(m, n, c)).map_err(|e| e.to_string())?;
                    if r != RateResult::integer(0) {
                        return Err(format!("unity m=n={m} C={c}: {r}"));
                    }
                }
            } else if p.m > 0 && rate != RateResult::integer(m.max(n)) {
                return Err(format!("{p:?}: {rate} != {}", m.max(n)));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} supported channels at C=n"))
}

fn negative_controls() -> Outcome {
    let s = build(&ChannelParams::new(4, 2, 2)).map_err(|e| e.to_string())?;
    let mut mutants = 0;
    for tx in [1, 2] {
        let peer = s.layout.columns(if tx == 1 { Segment::W2 } else { Segment::W1 });
        let g = s.slots[0].generator(tx);
        for r in 0..g.rows() {
            for c in peer.clone().filter(|&c| g.get(r, c)) {
                let mut mutant = s.clone();
                let slot = &mut mutant.slots[0];
                if tx == 1 { slot.g1.flip(r, c) } else { slot.g2.flip(r, c) }
                if verify(&mutant).map_err(|e| e.to_string())?.passed() {
                    return Err(format!("flip of G{tx}[{r}][{c}] went undetected"));
                }
                mutants += 1;
            }
        }
    }
    if mutants == 0 {
        return Err("no cancelation bits found to flip".into());
    }

    // User 1's bit uncoded on the top level of transmitter 1, which crosses
    // to receiver 2 when m=2, n=1.
    let p = ChannelParams::new(2, 1, 0);
    let layout = SourceLayout { w1_len: 1, w2_len: 0, d_len: 0, e_len: 0 };
    let uncoded = SchemeDescription {
        params: p,
        regime: classify_regime(&p).unwrap(),
        construction: Construction::NoCooperation,
        layout,
        slots: vec![Slot {
            g1: BitMatrix::from_row_strings(&["1", "0"], 1).unwrap(),
            g2: BitMatrix::zeros(2, 1),
            coop_ledger: SlotLedger::default(),
        }],
        rate: RateResult::integer(1),
    };
    let r = verify_with(&uncoded, DEFAULT_MAX_STATES).map_err(|e| e.to_string())?;
    if r.method != Method::Both || r.mi_bits_1 < Bits::integer(1) {
        return Err(format!("uncoded crossing bit: {r:?}"));
    }
    Ok(format!("{mutants} mutants detected; uncoded crossing bit leaks {} bit", r.mi_bits_1))
}

fn sweep_rates(m: usize, n: usize, cmax: usize) -> Result<Vec<(String, String)>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sldic"))
        .args(["sweep", "--m", &m.to_string(), "--n", &n.to_string(), "--cmax", &cmax.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("sweep m={m} n={n} exited with {}", out.status));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    if lines.next() != Some("C,rate_num,rate_den,rate,regime,verified") {
        return Err("unexpected CSV header".into());
    }
    Ok(lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (format!("{}/{}", f[1], f[2]), f[5].to_string())
        })
        .collect())
}

fn sweep_reproduction() -> Outcome {
    let rows = sweep_rates(6, 5, 5)?;
    let rates: Vec<&str> = rows.iter().map(|(r, _)| r.as_str()).collect();
    let reaches_at = rates.iter().position(|r| *r == "6/1");
    if reaches_at != Some(5) || rows.iter().any(|(_, v)| v != "yes") {
        return Err(format!("m=6 n=5: {rows:?}"));
    }
    let rows = sweep_rates(4, 2, 2)?;
    let rates: Vec<&str> = rows.iter().map(|(r, _)| r.as_str()).collect();
    if rates != ["2/1", "3/1", "4/1"] || rows.iter().any(|(_, v)| v != "yes") {
        return Err(format!("m=4 n=2: {rows:?}"));
    }
    Ok("(6,5) first reaches 6 at C=5; (4,2) gives 2,3,4".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("caption rates", caption_rates),
        ("perfect secrecy by enumeration", enumeration_secrecy),
        ("rank and enumeration agree", oracle_equivalence),
        ("formula matches construction", formula_agreement),
        ("optimality endpoints", optimality_endpoints),
        ("negative controls", negative_controls),
        ("sweep reproduction", sweep_reproduction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
