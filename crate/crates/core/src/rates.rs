//! Closed-form achievable secrecy rates and sweeps over the cooperation
//! capacity.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{verify_with, DEFAULT_MAX_STATES};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::schemes::{build, classify_regime, RateResult, Regime};

/// Symmetric secrecy rate per user, from the per-regime formulas.
///
/// * weak: `m - n + min(n, C)`
/// * moderate: `m - n + B(m - n) + q + min(n, C)` with
///   `g = (n - (m - n + C))^+`, `B = floor(g / 3(m - n))`,
///   `t = g mod 3(m - n)` and `q = min((t - (m - n))^+, m - n)`
/// * unity, or `m = 0`: `0`
/// * `n = 2m`, `m` even, with `c = min(n, C)`: `0` for `c = 0`, `c` for
///   `c <= m/2`, `m + (c - m/2)/2` for `m/2 < c < 3m/2`, `c` above.
pub fn formula_rate(p: &ChannelParams) -> Result<RateResult> {
    let (m, n) = (p.m, p.n);
    let c = p.c.min(n);
    let regime = classify_regime(p)?;
    match regime {
        Regime::Weak => Ok(RateResult::integer(m - n + c)),
        Regime::Moderate => {
            let r = m - n;
            let g = n.saturating_sub(r + p.c);
            let blocks = g / (3 * r);
            let t = g % (3 * r);
            let q = t.saturating_sub(r).min(r);
            Ok(RateResult::integer(r + blocks * r + q + c))
        }
        Regime::Unity => Ok(RateResult::integer(0)),
        Regime::VeryHigh if m == 0 => Ok(RateResult::integer(0)),
        Regime::VeryHigh if n == 2 * m && m % 2 == 0 => {
            let h = m / 2;
            Ok(if c == 0 {
                RateResult::integer(0)
            } else if c <= h {
                RateResult::integer(c)
            } else if c < 3 * h {
                // two slots: m + (m + c - h) bits per user
                RateResult::new(2 * m + c - h, 2)
            } else {
                RateResult::integer(c)
            })
        }
        Regime::High | Regime::VeryHigh => Err(Error::Unsupported {
            regime,
            reason: format!("no rate expression for m={m}, n={n}"),
        }),
    }
}

/// True for the `alpha = 2` sub-ranges whose rate is not stated in closed
/// form by the source construction: `0 < c <= m/2` and `3m/2 <= c < n`.
/// Such values are only reported as verified once the scheme is certified.
pub fn is_conjectured(p: &ChannelParams) -> bool {
    let (m, n) = (p.m, p.n);
    let c = p.c.min(n);
    m > 0 && m % 2 == 0 && n == 2 * m && ((c > 0 && c <= m / 2) || (c >= 3 * m / 2 && c < n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    #[serde(rename = "C")]
    pub c: usize,
    pub rate: RateResult,
    /// `None` for the degenerate channel `m = n = 0`.
    pub regime: Option<Regime>,
    pub supported: bool,
    pub conjecture: bool,
    /// `Some(true)` when the constructed scheme has the formula's rate and
    /// verifies; `None` for unsupported points.
    pub verified: Option<bool>,
}

/// One [`RatePoint`] per `C` in `[0, cmax]`, ascending.
pub fn sweep(m: usize, n: usize, cmax: usize) -> Vec<RatePoint> {
    sweep_with(m, n, cmax, DEFAULT_MAX_STATES)
}

pub fn sweep_with(m: usize, n: usize, cmax: usize, max_states: u64) -> Vec<RatePoint> {
    (0..=cmax)
        .into_par_iter()
        .map(|c| rate_point(&ChannelParams::new(m, n, c), max_states))
        .collect()
}

fn rate_point(p: &ChannelParams, max_states: u64) -> RatePoint {
    let regime = classify_regime(p).ok();
    match formula_rate(p) {
        Ok(rate) => {
            let certified = build(p)
                .and_then(|s| Ok(verify_with(&s, max_states)?.passed() && s.rate == rate))
                .unwrap_or(false);
            RatePoint {
                c: p.c,
                rate,
                regime,
                supported: true,
                conjecture: is_conjectured(p),
                verified: Some(certified),
            }
        }
        Err(_) => RatePoint {
            c: p.c,
            rate: RateResult::integer(0),
            regime,
            supported: false,
            conjecture: false,
            verified: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(m: usize, n: usize, c: usize) -> RateResult {
        formula_rate(&ChannelParams::new(m, n, c)).unwrap()
    }

    #[test]
    fn formula_examples() {
        let r: Vec<_> = (0..=2).map(|c| rate(4, 2, c)).collect();
        assert_eq!(r, [2, 3, 4].map(RateResult::integer));
        assert_eq!(rate(5, 4, 0), RateResult::integer(2));
        assert_eq!(rate(5, 4, 1), RateResult::integer(3));
        assert_eq!(rate(5, 4, 4), RateResult::integer(5));
        assert_eq!(rate(2, 4, 2), RateResult::new(5, 2));
        assert_eq!(rate(3, 3, 2), RateResult::integer(0));
        assert_eq!(rate(0, 4, 2), RateResult::integer(0));
        assert!(matches!(
            formula_rate(&ChannelParams::new(3, 5, 1)),
            Err(Error::Unsupported { regime: Regime::High, .. })
        ));
        assert!(matches!(formula_rate(&ChannelParams::new(3, 6, 1)), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn moderate_reduces_to_cooperation_free_formula() {
        for m in 2..=30 {
            for n in 0..m {
                let p = ChannelParams::new(m, n, 0);
                if classify_regime(&p).unwrap() != Regime::Moderate {
                    continue;
                }
                let r = m - n;
                let b = n.saturating_sub(r) / (3 * r);
                let t = n.saturating_sub(r) % (3 * r);
                let q = t.saturating_sub(r).min(r);
                assert_eq!(rate(m, n, 0), RateResult::integer(r + b * r + q));
            }
        }
    }

    #[test]
    fn moderate_link_type_counts() {
        for m in 2..=30usize {
            for n in 0..m {
                if classify_regime(&ChannelParams::new(m, n, 0)).unwrap() != Regime::Moderate {
                    continue;
                }
                let l = 2 * n - m; // type III
                assert_eq!((m - l) % 2, 0);
                assert_eq!((m - l) / 2, m - n);
            }
        }
    }

    #[test]
    fn weak_is_monotone_and_meets_max_levels() {
        for m in 1..=12 {
            for n in 0..m {
                let p = ChannelParams::new(m, n, 0);
                if classify_regime(&p).unwrap() != Regime::Weak {
                    continue;
                }
                let rates: Vec<_> = (0..=n + 2).map(|c| rate(m, n, c)).collect();
                assert!(rates.windows(2).all(|w| w[0] <= w[1]));
                assert_eq!(rate(m, n, n), RateResult::integer(m.max(n)));
            }
        }
    }

    #[test]
    fn full_cooperation_reaches_max_levels_off_unity() {
        for m in 1..=8 {
            for n in 0..=2 * m {
                let p = ChannelParams::new(m, n, n);
                match formula_rate(&p) {
                    Ok(r) if n != m => assert_eq!(r, RateResult::integer(m.max(n)), "m={m} n={n}"),
                    Ok(r) => assert_eq!(r, RateResult::integer(0)),
                    Err(_) => {}
                }
            }
        }
    }

    #[test]
    fn sweep_examples() {
        let pts = sweep(4, 2, 2);
        assert_eq!(pts.iter().map(|p| p.rate).collect::<Vec<_>>(), [2, 3, 4].map(RateResult::integer));
        assert!(pts.iter().all(|p| p.verified == Some(true)));

        let pts = sweep(6, 5, 5);
        assert_eq!(pts.last().unwrap().rate, RateResult::integer(6));
        assert!(pts[..5].iter().all(|p| p.rate < RateResult::integer(6)));

        let pts = sweep(2, 4, 4);
        let expected = [
            RateResult::integer(0),
            RateResult::integer(1),
            RateResult::new(5, 2),
            RateResult::integer(3),
            RateResult::integer(4),
        ];
        assert_eq!(pts.iter().map(|p| p.rate).collect::<Vec<_>>(), expected);
        assert!(pts.iter().all(|p| p.verified == Some(true)));
        assert_eq!(pts.iter().map(|p| p.conjecture).collect::<Vec<_>>(), [false, true, false, true, false]);
    }

    #[test]
    fn sweep_marks_unsupported_points() {
        let pts = sweep(3, 5, 2);
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| !p.supported && p.verified.is_none() && p.regime == Some(Regime::High)));
        let pts = sweep(0, 0, 1);
        assert!(pts.iter().all(|p| !p.supported && p.regime.is_none()));
    }
}
