//! Exact secrecy and decodability verification.
//!
//! Two independent routes decide the same questions:
//!
//! * **rank**: with uniform independent sources, receiver `j` observes
//!   `y = A w + B r`, and `I(W; y) = rank([A | B]) - rank(B)`. Secrecy is
//!   `colspace(A) ⊆ colspace(B)`; zero-error decoding needs `A` of full
//!   column rank with `colspace(A) ∩ colspace(B) = {0}`.
//! * **enumeration**: every source realization is pushed through the encoder
//!   and the channel, the joint histogram of `(W, y)` is built, and the
//!   entropies are evaluated exactly as rationals.
//!
//! [`verify`] runs both whenever the state space fits and fails loudly if they
//! disagree.

use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::schemes::{SchemeDescription, Segment, SourceLayout};

/// Default enumeration bound: `2^24` source realizations.
pub const DEFAULT_MAX_STATES: u64 = 1 << 24;

/// Hard ceiling on enumerated source bits, independent of `max_states`.
const MAX_ENUM_BITS: usize = 40;

/// An exact quantity of information, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits(pub Ratio<i64>);

impl Bits {
    pub const ZERO: Bits = Bits(Ratio::new_raw(0, 1));

    pub fn integer(v: i64) -> Self {
        Bits(Ratio::from_integer(v))
    }

    pub fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (n, den) = s.split_once('/').unwrap_or((&s, "1"));
        let n: i64 = n.trim().parse().map_err(serde::de::Error::custom)?;
        let den: i64 = den.trim().parse().map_err(serde::de::Error::custom)?;
        if den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Bits(Ratio::new(n, den)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumeration,
    Rank,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// `H(W1 | y1) = 0`
    pub decodable_1: bool,
    /// `H(W2 | y2) = 0`
    pub decodable_2: bool,
    /// `I(W1; y2) = 0`
    pub secret_1: bool,
    /// `I(W2; y1) = 0`
    pub secret_2: bool,
    /// `I(W1; y2)`
    pub mi_bits_1: Bits,
    /// `I(W2; y1)`
    pub mi_bits_2: Bits,
    /// `H(W1 | y1)`
    pub equivocation_1: Bits,
    /// `H(W2 | y2)`
    pub equivocation_2: Bits,
    /// `H(W1)`
    pub message_bits_1: Bits,
    /// `H(W2)`
    pub message_bits_2: Bits,
    pub method: Method,
    /// Source realizations enumerated; 0 for the rank method alone.
    pub state_count: u64,
}

impl VerificationReport {
    /// Both messages decodable and both perfectly secret.
    pub fn passed(&self) -> bool {
        self.decodable_1 && self.decodable_2 && self.secret_1 && self.secret_2
    }

    fn from_quantities(q: [Bits; 6], method: Method, state_count: u64) -> Self {
        let [mi1, mi2, eq1, eq2, h1, h2] = q;
        Self {
            decodable_1: eq1.is_zero(),
            decodable_2: eq2.is_zero(),
            secret_1: mi1.is_zero(),
            secret_2: mi2.is_zero(),
            mi_bits_1: mi1,
            mi_bits_2: mi2,
            equivocation_1: eq1,
            equivocation_2: eq2,
            message_bits_1: h1,
            message_bits_2: h2,
            method,
            state_count,
        }
    }
}

/// Everything receiver `j` sees, as a linear map of the source vector,
/// stacked over slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverView {
    pub receiver: usize,
    pub observation: BitMatrix,
    pub layout: SourceLayout,
}

impl ReceiverView {
    /// `(A, B)`: the columns of `user`'s message and all remaining columns.
    pub fn split(&self, user: usize) -> (BitMatrix, BitMatrix) {
        let msg = self.layout.columns(self.layout.message(user));
        let (inside, outside): (Vec<usize>, Vec<usize>) =
            (0..self.layout.total()).partition(|c| msg.contains(c));
        (
            self.observation.select_columns(&inside),
            self.observation.select_columns(&outside),
        )
    }

    /// `I(W_user; y) = rank([A | B]) - rank(B)`.
    pub fn information_bits(&self, user: usize) -> usize {
        let (_, b) = self.split(user);
        self.observation.rank() - b.rank()
    }

    /// Zero-error recoverability of `user`'s message from this view.
    pub fn decodes(&self, user: usize) -> bool {
        let (a, b) = self.split(user);
        let (ra, rb) = (a.rank(), b.rank());
        ra == a.cols() && self.observation.rank() == ra + rb
    }

    /// `colspace(A) ⊆ colspace(B)`.
    pub fn hides(&self, user: usize) -> bool {
        let (a, b) = self.split(user);
        b.colspace_contains(&a).expect("A and B share rows")
    }
}

pub fn receiver_views(s: &SchemeDescription) -> Result<(ReceiverView, ReceiverView)> {
    s.check_shape()?;
    let (direct, cross) = s.params.transfer_matrices();
    let total = s.layout.total();
    let mut m1 = BitMatrix::zeros(0, total);
    let mut m2 = BitMatrix::zeros(0, total);
    for slot in &s.slots {
        let y1 = direct.mul(&slot.g1)?.xor(&cross.mul(&slot.g2)?)?;
        let y2 = direct.mul(&slot.g2)?.xor(&cross.mul(&slot.g1)?)?;
        m1 = m1.vstack(&y1)?;
        m2 = m2.vstack(&y2)?;
    }
    Ok((
        ReceiverView { receiver: 1, observation: m1, layout: s.layout },
        ReceiverView { receiver: 2, observation: m2, layout: s.layout },
    ))
}

pub fn check_decodability(s: &SchemeDescription) -> Result<(bool, bool)> {
    let (v1, v2) = receiver_views(s)?;
    Ok((v1.decodes(1), v2.decodes(2)))
}

/// `(W1 hidden from receiver 2, W2 hidden from receiver 1)`.
pub fn check_secrecy_rank(s: &SchemeDescription) -> Result<(bool, bool)> {
    let (v1, v2) = receiver_views(s)?;
    Ok((v2.hides(1), v1.hides(2)))
}

/// Full report from the rank method.
pub fn rank_report(s: &SchemeDescription) -> Result<VerificationReport> {
    let (v1, v2) = receiver_views(s)?;
    let bits = |x: usize| Bits::integer(x as i64);
    let w = |u| s.layout.len(s.layout.message(u));
    let mut report = VerificationReport::from_quantities(
        [
            bits(v2.information_bits(1)),
            bits(v1.information_bits(2)),
            bits(w(1) - v1.information_bits(1)),
            bits(w(2) - v2.information_bits(2)),
            bits(w(1)),
            bits(w(2)),
        ],
        Method::Rank,
        0,
    );
    // The structural tests must agree with the information counts.
    report.decodable_1 &= v1.decodes(1);
    report.decodable_2 &= v2.decodes(2);
    report.secret_1 &= v2.hides(1);
    report.secret_2 &= v1.hides(2);
    Ok(report)
}

/// Histograms accumulated while enumerating.
#[derive(Default)]
struct Counts {
    /// Message marginals.
    w: [FxHashMap<u64, u64>; 2],
    /// Per receiver.
    y: [FxHashMap<u128, u64>; 2],
    /// `[receiver][user]`: joint counts of `(W_user, y_receiver)`.
    joint: [[FxHashMap<(u64, u128), u64>; 2]; 2],
}

impl Counts {
    fn record(&mut self, w: [u64; 2], y: [u128; 2]) {
        for (counts, &wu) in self.w.iter_mut().zip(&w) {
            *counts.entry(wu).or_default() += 1;
        }
        for ((ycounts, joint), &yr) in self.y.iter_mut().zip(&mut self.joint).zip(&y) {
            *ycounts.entry(yr).or_default() += 1;
            for (counts, &wu) in joint.iter_mut().zip(&w) {
                *counts.entry((wu, yr)).or_default() += 1;
            }
        }
    }

    fn merge(mut self, other: Counts) -> Counts {
        fn add<K: std::hash::Hash + Eq>(dst: &mut FxHashMap<K, u64>, src: FxHashMap<K, u64>) {
            for (k, v) in src {
                *dst.entry(k).or_default() += v;
            }
        }
        for (dst, src) in self.w.iter_mut().zip(other.w) {
            add(dst, src);
        }
        for (dst, src) in self.y.iter_mut().zip(other.y) {
            add(dst, src);
        }
        for (dr, sr) in self.joint.iter_mut().zip(other.joint) {
            for (dst, src) in dr.iter_mut().zip(sr) {
                add(dst, src);
            }
        }
        self
    }
}

/// `H = T - (1 / 2^T) * sum N log2 N` for a histogram over `2^T` equally
/// likely states. Every count produced by a linear scheme is a power of two.
fn entropy<'a>(counts: impl Iterator<Item = &'a u64>, total_bits: usize) -> Result<Bits> {
    let mut weighted: i64 = 0;
    for &n in counts {
        if !n.is_power_of_two() {
            return Err(Error::MalformedScheme(format!(
                "histogram count {n} is not a power of two; the scheme is not linear"
            )));
        }
        weighted += n as i64 * n.trailing_zeros() as i64;
    }
    let states = 1i64 << total_bits;
    Ok(Bits(Ratio::new(total_bits as i64 * states - weighted, states)))
}

/// Brute-force verification over all `2^total` source realizations.
///
/// Observations are computed by running unit source vectors through the
/// encoder and [`ChannelParams::transmit`](crate::channel::ChannelParams::transmit)
/// and combining the responses along a Gray code.
pub fn check_secrecy_enum(s: &SchemeDescription, max_states: u64) -> Result<VerificationReport> {
    s.check_shape()?;
    let layout = s.layout;
    let total = layout.total();
    if total > MAX_ENUM_BITS || (1u64 << total) > max_states {
        return Err(Error::CapacityExceeded { bits: total, max_states });
    }
    let obs_len = s.params.q() * s.slots.len();
    if obs_len > 128 {
        return Err(Error::Dimension(format!(
            "observation of {obs_len} bits is too long to enumerate"
        )));
    }

    let pack = |v: &BitVector| v.ones().fold(0u128, |acc, i| acc | (1u128 << i));
    let responses: Vec<[u128; 2]> = (0..total)
        .map(|c| {
            let mut e = BitVector::zeros(total);
            e.set(c, true);
            let (y1, y2) = s.simulate(&e)?;
            Ok([pack(&y1), pack(&y2)])
        })
        .collect::<Result<_>>()?;

    let w1_len = layout.w1_len;
    let w2_len = layout.w2_len;
    let mask = |len: usize| if len == 0 { 0 } else { u64::MAX >> (64 - len) };
    let (mask1, mask2) = (mask(w1_len), mask(w2_len));

    let prefix_bits = if total >= 12 { 4 } else { 0 };
    let low_bits = total - prefix_bits;

    let counts = (0u64..1 << prefix_bits)
        .into_par_iter()
        .map(|prefix| {
            let mut counts = Counts::default();
            let mut y = [0u128; 2];
            for b in 0..prefix_bits {
                if prefix >> b & 1 == 1 {
                    let r = responses[low_bits + b];
                    y[0] ^= r[0];
                    y[1] ^= r[1];
                }
            }
            for i in 0u64..1 << low_bits {
                if i > 0 {
                    let r = responses[i.trailing_zeros() as usize];
                    y[0] ^= r[0];
                    y[1] ^= r[1];
                }
                let state = (prefix << low_bits) | (i ^ (i >> 1));
                counts.record([state & mask1, (state >> w1_len) & mask2], y);
            }
            counts
        })
        .reduce(Counts::default, Counts::merge);

    let h = |c: &FxHashMap<u64, u64>| entropy(c.values(), total);
    let hy = |r: usize| entropy(counts.y[r].values(), total);
    let hj = |r: usize, u: usize| entropy(counts.joint[r][u].values(), total);
    let (h_w1, h_w2) = (h(&counts.w[0])?, h(&counts.w[1])?);
    let (h_y1, h_y2) = (hy(0)?, hy(1)?);

    let mi = |hw: Bits, hy: Bits, hwy: Bits| Bits(hw.0 + hy.0 - hwy.0);
    let cond = |hwy: Bits, hy: Bits| Bits(hwy.0 - hy.0);
    Ok(VerificationReport::from_quantities(
        [
            mi(h_w1, h_y2, hj(1, 0)?),
            mi(h_w2, h_y1, hj(0, 1)?),
            cond(hj(0, 0)?, h_y1),
            cond(hj(1, 1)?, h_y2),
            h_w1,
            h_w2,
        ],
        Method::Enumeration,
        1u64 << total,
    ))
}

/// Runs the rank method and, when `2^total <= max_states`, the enumeration
/// method as well. Any disagreement is an error.
pub fn verify_with(s: &SchemeDescription, max_states: u64) -> Result<VerificationReport> {
    let rank = rank_report(s)?;
    let enumerated = match check_secrecy_enum(s, max_states) {
        Ok(r) => r,
        Err(Error::CapacityExceeded { .. }) | Err(Error::Dimension(_)) => return Ok(rank),
        Err(e) => return Err(e),
    };
    let pairs = [
        ("decodable_1", rank.decodable_1, enumerated.decodable_1),
        ("decodable_2", rank.decodable_2, enumerated.decodable_2),
        ("secret_1", rank.secret_1, enumerated.secret_1),
        ("secret_2", rank.secret_2, enumerated.secret_2),
    ];
    for (name, a, b) in pairs {
        if a != b {
            return Err(Error::InconsistentMethods(format!("{name}: rank={a} enumeration={b}")));
        }
    }
    let values = [
        ("mi_bits_1", rank.mi_bits_1, enumerated.mi_bits_1),
        ("mi_bits_2", rank.mi_bits_2, enumerated.mi_bits_2),
        ("equivocation_1", rank.equivocation_1, enumerated.equivocation_1),
        ("equivocation_2", rank.equivocation_2, enumerated.equivocation_2),
        ("message_bits_1", rank.message_bits_1, enumerated.message_bits_1),
        ("message_bits_2", rank.message_bits_2, enumerated.message_bits_2),
    ];
    for (name, a, b) in values {
        if a != b {
            return Err(Error::InconsistentMethods(format!("{name}: rank={a} enumeration={b}")));
        }
    }
    Ok(VerificationReport {
        method: Method::Both,
        ..enumerated
    })
}

pub fn verify(s: &SchemeDescription) -> Result<VerificationReport> {
    verify_with(s, DEFAULT_MAX_STATES)
}

/// A linear map from a receiver's stacked observation to its message.
#[derive(Debug, Clone)]
pub struct LinearDecoder {
    pub receiver: usize,
    matrix: BitMatrix,
}

impl LinearDecoder {
    pub fn decode(&self, y: &BitVector) -> Result<BitVector> {
        self.matrix.matvec(y)
    }
}

/// Builds the decoder of receiver `receiver` (1 or 2) for its own message,
/// or `None` when some message bit is not a function of the observation.
pub fn decoder(s: &SchemeDescription, receiver: usize) -> Result<Option<LinearDecoder>> {
    let (v1, v2) = receiver_views(s)?;
    let view = if receiver == 1 { v1 } else { v2 };
    let seg = if receiver == 1 { Segment::W1 } else { Segment::W2 };
    let mt = view.observation.transpose();
    let mut rows = Vec::new();
    for col in s.layout.columns(seg) {
        let mut target = BitVector::zeros(s.layout.total());
        target.set(col, true);
        match mt.solve(&target)? {
            Some(p) => rows.push(p),
            None => return Ok(None),
        }
    }
    let matrix = if rows.is_empty() {
        BitMatrix::zeros(0, view.observation.rows())
    } else {
        BitMatrix::from_rows(&rows)?
    };
    Ok(Some(LinearDecoder { receiver, matrix }))
}
