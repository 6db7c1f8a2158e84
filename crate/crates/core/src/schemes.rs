//! Secure transmission schemes expressed as GF(2) generator matrices.
//!
//! Every scheme acts on one global source vector laid out as
//! `[W1 | W2 | D | E]`: the data bits of users 1 and 2 followed by the random
//! bits drawn by transmitters 1 and 2. Per time slot, transmitter `i` sends
//! `x_i = G_i s`. Because everything is linear, secrecy and decodability can
//! be decided exactly (see [`crate::analysis`]).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::gf2::{level_index, BitMatrix, BitVector};

/// Interference regime, by `alpha = n / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `alpha <= 2/3`, including `n = 0`.
    Weak,
    /// `2/3 < alpha < 1`
    Moderate,
    /// `alpha = 1`
    Unity,
    /// `1 < alpha < 2`
    High,
    /// `alpha >= 2`, including `m = 0`.
    VeryHigh,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Moderate => "moderate",
            Regime::Unity => "unity",
            Regime::High => "high",
            Regime::VeryHigh => "very_high",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_regime(p: &ChannelParams) -> Result<Regime> {
    let (m, n) = (p.m, p.n);
    if m == 0 && n == 0 {
        return Err(Error::DegenerateChannel);
    }
    // Integer cross-multiplication keeps the comparisons exact.
    Ok(if 3 * n <= 2 * m {
        Regime::Weak
    } else if n < m {
        Regime::Moderate
    } else if n == m {
        Regime::Unity
    } else if n < 2 * m {
        Regime::High
    } else {
        Regime::VeryHigh
    })
}

/// Which construction produced a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Own data on the low levels, peer data precoded to cancel interference.
    InterferenceCancelation,
    /// Cancelation on the low levels plus data/random/zero blocks above.
    RandomBlocks,
    /// Both receivers see the same signal; nothing is sent.
    Silent,
    /// `m = 0`: no direct link, nothing is sent.
    NoDirectLink,
    /// `alpha = 2` without cooperation; nothing is sent.
    NoCooperation,
    /// `alpha = 2`, small `C`: only random bits cross the cooperative link.
    RandomSharing,
    /// `alpha = 2`, intermediate `C`: random and data bits are shared and the
    /// roles of the transmitters alternate over two slots.
    TimeSharing,
    /// `alpha = 2`, large `C`: only data bits are shared and relayed.
    DataSharing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    W1,
    W2,
    D,
    E,
}

/// Sizes of the four source segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SourceLayout {
    pub w1_len: usize,
    pub w2_len: usize,
    pub d_len: usize,
    pub e_len: usize,
}

impl SourceLayout {
    pub fn total(&self) -> usize {
        self.w1_len + self.w2_len + self.d_len + self.e_len
    }

    pub fn len(&self, seg: Segment) -> usize {
        match seg {
            Segment::W1 => self.w1_len,
            Segment::W2 => self.w2_len,
            Segment::D => self.d_len,
            Segment::E => self.e_len,
        }
    }

    pub fn offset(&self, seg: Segment) -> usize {
        match seg {
            Segment::W1 => 0,
            Segment::W2 => self.w1_len,
            Segment::D => self.w1_len + self.w2_len,
            Segment::E => self.w1_len + self.w2_len + self.d_len,
        }
    }

    pub fn columns(&self, seg: Segment) -> std::ops::Range<usize> {
        let o = self.offset(seg);
        o..o + self.len(seg)
    }

    pub fn segment_of(&self, col: usize) -> Option<Segment> {
        [Segment::W1, Segment::W2, Segment::D, Segment::E]
            .into_iter()
            .find(|&s| self.columns(s).contains(&col))
    }

    /// Message segment of user `i` (1 or 2).
    pub fn message(&self, user: usize) -> Segment {
        match user {
            1 => Segment::W1,
            2 => Segment::W2,
            _ => panic!("user must be 1 or 2, got {user}"),
        }
    }

    /// Segments owned by transmitter `i`: its message and its random pool.
    pub fn owned_by(&self, tx: usize) -> [Segment; 2] {
        match tx {
            1 => [Segment::W1, Segment::D],
            2 => [Segment::W2, Segment::E],
            _ => panic!("transmitter must be 1 or 2, got {tx}"),
        }
    }
}

/// Symmetric secrecy rate per user: `numerator` message bits delivered over
/// `denominator` channel uses. Equality compares values, so `10/2 == 5/1`.
#[derive(Debug, Clone, Copy, Eq)]
pub struct RateResult {
    pub numerator: usize,
    pub denominator: usize,
}

impl RateResult {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        assert!(denominator > 0, "rate denominator must be positive");
        Self { numerator, denominator }
    }

    pub fn integer(bits: usize) -> Self {
        Self::new(bits, 1)
    }

    pub fn value(&self) -> Ratio<usize> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialEq for RateResult {
    fn eq(&self, other: &Self) -> bool {
        self.value() == other.value()
    }
}

impl PartialOrd for RateResult {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.value().cmp(&other.value()))
    }
}

/// Prints the reduced value: `4`, `5/2`.
impl fmt::Display for RateResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if *v.denom() == 1 {
            write!(f, "{}", v.numer())
        } else {
            write!(f, "{}/{}", v.numer(), v.denom())
        }
    }
}

impl FromStr for RateResult {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rate {s:?}"));
        let (num, den) = s.split_once('/').unwrap_or((s, "1"));
        let num = num.trim().parse().map_err(|_| bad())?;
        let den: usize = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Self::new(num, den))
    }
}

/// Serialized unreduced as `"num/den"` so the slot count stays visible.
impl Serialize for RateResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.numerator, self.denominator))
    }
}

impl<'de> Deserialize<'de> for RateResult {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Cooperative-link bookkeeping for one slot. All entries are source
/// columns, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotLedger {
    /// Bits transmitter 2 sends to transmitter 1 over the link in this slot.
    pub shared_to_tx1: Vec<usize>,
    /// Bits transmitter 1 sends to transmitter 2 over the link in this slot.
    pub shared_to_tx2: Vec<usize>,
    /// W2/E columns that `G1` depends on.
    pub used_by_tx1: Vec<usize>,
    /// W1/D columns that `G2` depends on.
    pub used_by_tx2: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    #[serde(with = "matrix_rows")]
    pub g1: BitMatrix,
    #[serde(with = "matrix_rows")]
    pub g2: BitMatrix,
    pub coop_ledger: SlotLedger,
}

impl Slot {
    pub fn generator(&self, tx: usize) -> &BitMatrix {
        match tx {
            1 => &self.g1,
            2 => &self.g2,
            _ => panic!("transmitter must be 1 or 2, got {tx}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDescription {
    pub params: ChannelParams,
    pub regime: Regime,
    pub construction: Construction,
    pub layout: SourceLayout,
    pub slots: Vec<Slot>,
    pub rate: RateResult,
}

impl SchemeDescription {
    /// Checks that every generator is `q x layout.total`.
    pub fn check_shape(&self) -> Result<()> {
        let (q, total) = (self.params.q(), self.layout.total());
        if self.slots.is_empty() {
            return Err(Error::MalformedScheme("scheme has no slots".into()));
        }
        for (k, slot) in self.slots.iter().enumerate() {
            for (tx, g) in [(1, &slot.g1), (2, &slot.g2)] {
                if g.rows() != q || g.cols() != total {
                    return Err(Error::MalformedScheme(format!(
                        "slot {k}: G{tx} is {}x{}, expected {q}x{total}",
                        g.rows(),
                        g.cols()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Transmit vectors `(x1, x2)` for every slot.
    pub fn encode(&self, source: &BitVector) -> Result<Vec<(BitVector, BitVector)>> {
        self.check_shape()?;
        self.slots
            .iter()
            .map(|s| Ok((s.g1.matvec(source)?, s.g2.matvec(source)?)))
            .collect()
    }

    /// Runs the scheme through the channel; returns each receiver's
    /// observation stacked over slots.
    pub fn simulate(&self, source: &BitVector) -> Result<(BitVector, BitVector)> {
        let mut y1 = BitVector::zeros(0);
        let mut y2 = BitVector::zeros(0);
        for (x1, x2) in self.encode(source)? {
            let (a, b) = self.params.transmit(&x1, &x2)?;
            y1 = y1.concat(&a);
            y2 = y2.concat(&b);
        }
        Ok((y1, y2))
    }
}

/// Serde adapter: a matrix as a list of row bit strings, top level first.
mod matrix_rows {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BitMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq((0..m.rows()).map(|r| m.row(r).to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BitMatrix, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        let cols = rows.first().map_or(0, String::len);
        BitMatrix::from_row_strings(&rows, cols).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Construction helpers

/// Symbolic source bit; resolved to a column once all segments are sized.
#[derive(Debug, Clone, Copy)]
enum Sym {
    A(usize),
    B(usize),
    D(usize),
    E(usize),
}

#[derive(Default)]
struct SlotPlan {
    /// `levels[t][level - 1]`: symbols XORed onto that level by transmitter
    /// `t + 1`.
    levels: [Vec<Vec<Sym>>; 2],
    /// `shared_to[t]`: symbols delivered to transmitter `t + 1` over the link.
    shared_to: [Vec<Sym>; 2],
}

impl SlotPlan {
    fn put(&mut self, tx: usize, level: usize, sym: Sym) {
        self.levels[tx][level - 1].push(sym);
    }
}

struct Plan {
    params: ChannelParams,
    counts: [usize; 4],
    slots: Vec<SlotPlan>,
}

impl Plan {
    fn new(params: ChannelParams) -> Self {
        Self {
            params,
            counts: [0; 4],
            slots: Vec::new(),
        }
    }

    /// Fresh data bit of user `t + 1`.
    fn data(&mut self, t: usize) -> Sym {
        let k = &mut self.counts[t];
        *k += 1;
        if t == 0 {
            Sym::A(*k - 1)
        } else {
            Sym::B(*k - 1)
        }
    }

    /// Fresh random bit drawn by transmitter `t + 1`.
    fn random(&mut self, t: usize) -> Sym {
        let k = &mut self.counts[2 + t];
        *k += 1;
        if t == 0 {
            Sym::D(*k - 1)
        } else {
            Sym::E(*k - 1)
        }
    }

    fn data_n(&mut self, t: usize, count: usize) -> Vec<Sym> {
        (0..count).map(|_| self.data(t)).collect()
    }

    fn random_n(&mut self, t: usize, count: usize) -> Vec<Sym> {
        (0..count).map(|_| self.random(t)).collect()
    }

    fn push_slot(&mut self, slot: SlotPlan) {
        self.slots.push(slot);
    }

    fn empty_slot(&self) -> SlotPlan {
        let q = self.params.q();
        SlotPlan {
            levels: [vec![Vec::new(); q], vec![Vec::new(); q]],
            shared_to: Default::default(),
        }
    }

    fn finish(self, regime: Regime, construction: Construction) -> SchemeDescription {
        let [a, b, d, e] = self.counts;
        let layout = SourceLayout {
            w1_len: a,
            w2_len: b,
            d_len: d,
            e_len: e,
        };
        let col = |s: Sym| match s {
            Sym::A(i) => layout.offset(Segment::W1) + i,
            Sym::B(i) => layout.offset(Segment::W2) + i,
            Sym::D(i) => layout.offset(Segment::D) + i,
            Sym::E(i) => layout.offset(Segment::E) + i,
        };
        let q = self.params.q();
        let total = layout.total();

        let slots = self
            .slots
            .into_iter()
            .map(|plan| {
                let mut gens = [BitMatrix::zeros(q, total), BitMatrix::zeros(q, total)];
                for (t, g) in gens.iter_mut().enumerate() {
                    for (lvl, syms) in plan.levels[t].iter().enumerate() {
                        for &s in syms {
                            g.flip(level_index(q, lvl + 1), col(s));
                        }
                    }
                }
                let shared = |t: usize| {
                    let set: BTreeSet<usize> = plan.shared_to[t].iter().map(|&s| col(s)).collect();
                    set.into_iter().collect::<Vec<_>>()
                };
                let [g1, g2] = gens;
                let coop_ledger = SlotLedger {
                    shared_to_tx1: shared(0),
                    shared_to_tx2: shared(1),
                    used_by_tx1: foreign_columns(&g1, &layout, 1),
                    used_by_tx2: foreign_columns(&g2, &layout, 2),
                };
                Slot { g1, g2, coop_ledger }
            })
            .collect::<Vec<_>>();

        debug_assert_eq!(a, b, "schemes are symmetric");
        let rate = RateResult::new(a, slots.len());
        SchemeDescription {
            params: self.params,
            regime,
            construction,
            layout,
            slots,
            rate,
        }
    }
}

/// Columns of `g` owned by the other transmitter that `g` actually uses.
fn foreign_columns(g: &BitMatrix, layout: &SourceLayout, tx: usize) -> Vec<usize> {
    let own = layout.owned_by(tx);
    g.nonzero_columns()
        .into_iter()
        .filter(|&c| layout.segment_of(c).is_some_and(|s| !own.contains(&s)))
        .collect()
}

fn expect_regime(p: &ChannelParams, expected: Regime) -> Result<Regime> {
    let actual = classify_regime(p)?;
    if actual != expected {
        return Err(Error::WrongRegime { expected, actual });
    }
    Ok(actual)
}

/// Own data on levels `[1 : r + c]`; the peer's bits destined for levels
/// `[r + 1 : r + c]` are XORed onto levels `[1 : c]` so that they cancel the
/// peer's interference at the intended receiver.
fn place_cancelation(plan: &mut Plan, slot: &mut SlotPlan, r: usize, c: usize) {
    let own = [plan.data_n(0, r + c), plan.data_n(1, r + c)];
    for t in 0..2 {
        let peer = 1 - t;
        for lvl in 1..=r + c {
            slot.put(t, lvl, own[t][lvl - 1]);
        }
        for j in 1..=c {
            let bit = own[peer][r + j - 1];
            slot.put(t, j, bit);
            slot.shared_to[t].push(bit);
        }
    }
}

/// Weak interference (`alpha <= 2/3`): single slot, `m - n + min(n, C)` bits.
pub fn build_weak(p: &ChannelParams) -> Result<SchemeDescription> {
    let regime = expect_regime(p, Regime::Weak)?;
    let mut plan = Plan::new(*p);
    let mut slot = plan.empty_slot();
    place_cancelation(&mut plan, &mut slot, p.m - p.n, p.effective_coop());
    plan.push_slot(slot);
    Ok(plan.finish(regime, Construction::InterferenceCancelation))
}

/// Derived quantities of the moderate-regime block layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModerateBlocks {
    /// Block unit, `m - n`.
    pub r2: usize,
    /// Cooperative bits used, `min(n, C)`.
    pub c: usize,
    /// Levels left for random-bit transmission, `(n - (r2 + C))^+`.
    pub g: usize,
    /// Full `3 r2` blocks.
    pub blocks: usize,
    /// `g mod 3 r2`
    pub remainder: usize,
    /// Data bits carried by the partial block, `min((t - r2)^+, r2)`.
    pub extra: usize,
    /// Levels taken by the full blocks, `3 B r2`.
    pub p: usize,
}

pub fn moderate_blocks(p: &ChannelParams) -> Result<ModerateBlocks> {
    expect_regime(p, Regime::Moderate)?;
    let r2 = p.m - p.n;
    let c = p.effective_coop();
    let g = p.n.saturating_sub(r2 + p.c);
    let unit = 3 * r2;
    let blocks = g / unit;
    let remainder = g % unit;
    let extra = remainder.saturating_sub(r2).min(r2);
    Ok(ModerateBlocks {
        r2,
        c,
        g,
        blocks,
        remainder,
        extra,
        p: blocks * unit,
    })
}

/// Moderate interference (`2/3 < alpha < 1`): cancelation on the low levels,
/// then from level `m` downwards `B` blocks of `r2` data, `r2` random and
/// `r2` zero levels, then a partial block with `extra` data bits and `extra`
/// random bits `r2` levels below them.
pub fn build_moderate(p: &ChannelParams) -> Result<SchemeDescription> {
    let regime = expect_regime(p, Regime::Moderate)?;
    let mb = moderate_blocks(p)?;
    let m = p.m;
    let mut plan = Plan::new(*p);
    let mut slot = plan.empty_slot();
    place_cancelation(&mut plan, &mut slot, mb.r2, mb.c);

    for t in 0..2 {
        for blk in 0..mb.blocks {
            let top = m - 3 * blk * mb.r2;
            for i in 0..mb.r2 {
                let bit = plan.data(t);
                slot.put(t, top - i, bit);
            }
            for i in 0..mb.r2 {
                let bit = plan.random(t);
                slot.put(t, top - mb.r2 - i, bit);
            }
        }
        let top = m - mb.p;
        for i in 0..mb.extra {
            let bit = plan.data(t);
            slot.put(t, top - i, bit);
        }
        for i in 0..mb.extra {
            let bit = plan.random(t);
            slot.put(t, top - mb.r2 - i, bit);
        }
    }
    plan.push_slot(slot);
    Ok(plan.finish(regime, Construction::RandomBlocks))
}

/// `alpha = 1`: both receivers see `x1 ^ x2`; nothing can be sent securely.
pub fn build_unity(p: &ChannelParams) -> Result<SchemeDescription> {
    let regime = expect_regime(p, Regime::Unity)?;
    Ok(silent(p, regime, Construction::Silent))
}

fn silent(p: &ChannelParams, regime: Regime, construction: Construction) -> SchemeDescription {
    let mut plan = Plan::new(*p);
    let slot = plan.empty_slot();
    plan.push_slot(slot);
    plan.finish(regime, construction)
}

/// `alpha = 2` with even `m`. Let `c = min(n, C)` and `h = m / 2`:
///
/// * `c = 0`: nothing is sent.
/// * `0 < c <= h`: each transmitter sends `c` data bits masked by its own
///   random bits on levels `[m + 1 : m + c]`; the peer repeats those random
///   bits on levels `[1 : c]`, which cancels them at the intended receiver.
/// * `h < c < 3h`: two slots with alternating roles, see [`time_sharing_slot`].
/// * `3h <= c`: data sharing, see [`data_sharing_slot`].
pub fn build_very_high_alpha2(p: &ChannelParams) -> Result<SchemeDescription> {
    let regime = classify_regime(p)?;
    let (m, n) = (p.m, p.n);
    if m == 0 || n != 2 * m {
        return Err(Error::Unsupported {
            regime,
            reason: format!("only alpha = 2 is constructed (got m={m}, n={n})"),
        });
    }
    if m % 2 == 1 {
        return Err(Error::Unsupported {
            regime,
            reason: format!("alpha = 2 requires even m (got m={m})"),
        });
    }
    let c = p.effective_coop();
    let h = m / 2;
    let mut plan = Plan::new(*p);

    let construction = if c == 0 {
        let slot = plan.empty_slot();
        plan.push_slot(slot);
        Construction::NoCooperation
    } else if c <= h {
        let mut slot = plan.empty_slot();
        let data = [plan.data_n(0, c), plan.data_n(1, c)];
        let rnd = [plan.random_n(0, c), plan.random_n(1, c)];
        for t in 0..2 {
            for j in 1..=c {
                slot.put(t, m + j, data[t][j - 1]);
                slot.put(t, m + j, rnd[t][j - 1]);
                slot.put(t, j, rnd[1 - t][j - 1]);
            }
            slot.shared_to[t] = rnd[1 - t].clone();
        }
        plan.push_slot(slot);
        Construction::RandomSharing
    } else if c < 3 * h {
        for lead in 0..2 {
            let slot = time_sharing_slot(&mut plan, lead, c - h);
            plan.push_slot(slot);
        }
        Construction::TimeSharing
    } else {
        let slot = data_sharing_slot(&mut plan, c - m);
        plan.push_slot(slot);
        Construction::DataSharing
    };
    Ok(plan.finish(regime, construction))
}

/// One slot of the time-sharing scheme at `alpha = 2`, with `c1 = c - m/2`.
///
/// The leading transmitter `L` puts `m` random bits on levels `[1 : m]`
/// (its own on odd levels, the peer's on even levels). The other transmitter
/// `O` sends `m` of its data bits XOR those random bits on `[m + 1 : 2m]`, so
/// they arrive clean at receiver `O` and masked at receiver `L`.
///
/// `L` also sends `m - c1` of its own data bits XOR the first `m - c1` random
/// bits on `[m + 1 : 2m - c1]` and relays `c1` data bits of `O` on
/// `[2m - c1 + 1 : 2m]`. `O` repeats those random bits on `[1 : m - c1]` and
/// sends the relayed bits XOR `c1` data bits of `L` on `[m - c1 + 1 : m]`,
/// which cancels the relayed bits at receiver `L` and delivers the `L` bits.
///
/// Per slot user `L` gets `m` bits and user `O` gets `m + c1`.
fn time_sharing_slot(plan: &mut Plan, lead: usize, c1: usize) -> SlotPlan {
    let m = plan.params.m;
    let n = plan.params.n;
    let other = 1 - lead;
    let mut slot = plan.empty_slot();

    let rnd: Vec<Sym> = (1..=m)
        .map(|lvl| if lvl % 2 == 1 { plan.random(lead) } else { plan.random(other) })
        .collect();
    let lead_own = plan.data_n(lead, m - c1);
    let lead_relayed = plan.data_n(lead, c1);
    let other_masked = plan.data_n(other, m);
    let other_relayed = plan.data_n(other, c1);

    for j in 1..=m {
        slot.put(lead, j, rnd[j - 1]);
        slot.put(other, m + j, other_masked[j - 1]);
        slot.put(other, m + j, rnd[j - 1]);
    }
    for j in 1..=m - c1 {
        slot.put(lead, m + j, lead_own[j - 1]);
        slot.put(lead, m + j, rnd[j - 1]);
        slot.put(other, j, rnd[j - 1]);
    }
    for k in 1..=c1 {
        slot.put(lead, n - c1 + k, other_relayed[k - 1]);
        slot.put(other, m - c1 + k, other_relayed[k - 1]);
        slot.put(other, m - c1 + k, lead_relayed[k - 1]);
    }

    let (lead_rnd, other_rnd): (Vec<Sym>, Vec<Sym>) = rnd
        .iter()
        .enumerate()
        .fold((vec![], vec![]), |(mut l, mut o), (i, &s)| {
            if i % 2 == 0 { l.push(s) } else { o.push(s) }
            (l, o)
        });
    slot.shared_to[lead] = other_rnd.into_iter().chain(other_relayed).collect();
    slot.shared_to[other] = lead_rnd.into_iter().chain(lead_relayed).collect();
    slot
}

/// Data-sharing slot at `alpha = 2` for `c = m + extra`. Transmitter `t`
/// relays the peer's `m` high bits on `[m + 1 : 2m]`; on `[1 : m]` it sends
/// its own high bits (cancelling their relayed copy at the peer's receiver)
/// XOR the peer's `extra` low bits, which then surface at the peer's
/// receiver on levels `[1 : extra]`.
fn data_sharing_slot(plan: &mut Plan, extra: usize) -> SlotPlan {
    let m = plan.params.m;
    let mut slot = plan.empty_slot();
    let hi = [plan.data_n(0, m), plan.data_n(1, m)];
    let lo = [plan.data_n(0, extra), plan.data_n(1, extra)];
    for t in 0..2 {
        let peer = 1 - t;
        for j in 1..=m {
            slot.put(t, m + j, hi[peer][j - 1]);
            slot.put(t, j, hi[t][j - 1]);
        }
        for j in 1..=extra {
            slot.put(t, j, lo[peer][j - 1]);
        }
        slot.shared_to[t] = hi[peer].iter().chain(&lo[peer]).copied().collect();
    }
    slot
}

/// Dispatches to the builder for the regime of `p`.
pub fn build(p: &ChannelParams) -> Result<SchemeDescription> {
    match classify_regime(p)? {
        Regime::Weak => build_weak(p),
        Regime::Moderate => build_moderate(p),
        Regime::Unity => build_unity(p),
        Regime::High => Err(Error::Unsupported {
            regime: Regime::High,
            reason: format!("no construction for 1 < alpha < 2 (m={}, n={})", p.m, p.n),
        }),
        Regime::VeryHigh if p.m == 0 => Ok(silent(p, Regime::VeryHigh, Construction::NoDirectLink)),
        Regime::VeryHigh => build_very_high_alpha2(p),
    }
}

/// True iff, in every slot and direction, at most `C` bits cross the
/// cooperative link, each transmitter only shares bits it owns, every
/// foreign bit a generator uses was shared in that slot or earlier, and the
/// ledger's usage sets match the generators.
pub fn validate_budget(s: &SchemeDescription) -> bool {
    if s.check_shape().is_err() {
        return false;
    }
    let cap = s.params.c;
    let layout = &s.layout;
    let mut known = [BTreeSet::new(), BTreeSet::new()];

    for slot in &s.slots {
        let ledger = &slot.coop_ledger;
        for (tx, shared, used) in [
            (1, &ledger.shared_to_tx1, &ledger.used_by_tx1),
            (2, &ledger.shared_to_tx2, &ledger.used_by_tx2),
        ] {
            let peer = 3 - tx;
            let peer_owned = layout.owned_by(peer);
            if shared.len() > cap {
                return false;
            }
            let distinct: BTreeSet<usize> = shared.iter().copied().collect();
            if distinct.len() != shared.len() {
                return false;
            }
            if !shared
                .iter()
                .all(|&c| layout.segment_of(c).is_some_and(|seg| peer_owned.contains(&seg)))
            {
                return false;
            }
            known[tx - 1].extend(distinct);

            let actual = foreign_columns(slot.generator(tx), layout, tx);
            if &actual != used {
                return false;
            }
            if !actual.iter().all(|c| known[tx - 1].contains(c)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: usize, n: usize, c: usize) -> ChannelParams {
        ChannelParams::new(m, n, c)
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(&params(4, 2, 0)).unwrap(), Regime::Weak);
        assert_eq!(classify_regime(&params(5, 4, 0)).unwrap(), Regime::Moderate);
        assert_eq!(classify_regime(&params(2, 4, 0)).unwrap(), Regime::VeryHigh);
        assert_eq!(classify_regime(&params(3, 3, 0)).unwrap(), Regime::Unity);
        assert_eq!(classify_regime(&params(3, 5, 0)).unwrap(), Regime::High);
        assert_eq!(classify_regime(&params(3, 2, 0)).unwrap(), Regime::Weak);
        assert_eq!(classify_regime(&params(6, 4, 0)).unwrap(), Regime::Weak);
        assert_eq!(classify_regime(&params(7, 5, 0)).unwrap(), Regime::Moderate);
        assert_eq!(classify_regime(&params(5, 0, 0)).unwrap(), Regime::Weak);
        assert_eq!(classify_regime(&params(0, 3, 0)).unwrap(), Regime::VeryHigh);
        assert!(matches!(classify_regime(&params(0, 0, 0)), Err(Error::DegenerateChannel)));
    }

    #[test]
    fn weak_rates() {
        assert_eq!(build_weak(&params(4, 2, 0)).unwrap().rate, RateResult::integer(2));
        assert_eq!(build_weak(&params(4, 2, 2)).unwrap().rate, RateResult::integer(4));
        assert_eq!(build_weak(&params(5, 0, 0)).unwrap().rate, RateResult::integer(5));
        // excess cooperation is discarded
        let s = build_weak(&params(4, 2, 7)).unwrap();
        assert_eq!(s.rate, RateResult::integer(4));
        assert_eq!(s.slots[0].coop_ledger.shared_to_tx1.len(), 2);
    }

    #[test]
    fn weak_matrix_layout() {
        // m=4, n=2, C=2: a1..a4 on levels 1..4, b3 on level 1, b4 on level 2.
        let s = build_weak(&params(4, 2, 2)).unwrap();
        assert_eq!(s.layout, SourceLayout { w1_len: 4, w2_len: 4, d_len: 0, e_len: 0 });
        let g1 = &s.slots[0].g1;
        let expected = BitMatrix::from_row_strings(&["00010000", "00100000", "01000001", "10000010"], 8).unwrap();
        assert_eq!(g1, &expected);
    }

    #[test]
    fn builders_reject_wrong_regime() {
        assert!(matches!(
            build_weak(&params(5, 4, 0)),
            Err(Error::WrongRegime { expected: Regime::Weak, actual: Regime::Moderate })
        ));
        assert!(matches!(build_moderate(&params(4, 2, 0)), Err(Error::WrongRegime { .. })));
        assert!(matches!(build_unity(&params(4, 2, 0)), Err(Error::WrongRegime { .. })));
    }

    #[test]
    fn moderate_rates() {
        assert_eq!(build_moderate(&params(5, 4, 0)).unwrap().rate, RateResult::integer(2));
        assert_eq!(build_moderate(&params(5, 4, 1)).unwrap().rate, RateResult::integer(3));
        assert_eq!(build_moderate(&params(5, 4, 4)).unwrap().rate, RateResult::integer(5));
    }

    #[test]
    fn moderate_block_quantities() {
        let mb = moderate_blocks(&params(5, 4, 0)).unwrap();
        assert_eq!((mb.r2, mb.g, mb.blocks, mb.remainder, mb.extra), (1, 3, 1, 0, 0));
        let mb = moderate_blocks(&params(6, 5, 2)).unwrap();
        assert_eq!((mb.g, mb.blocks, mb.remainder, mb.extra), (2, 0, 2, 1));
        // remainder above 2 r2 with a full extra block
        let mb = moderate_blocks(&params(13, 10, 0)).unwrap();
        assert_eq!((mb.r2, mb.g, mb.blocks, mb.remainder, mb.extra), (3, 7, 0, 7, 3));
    }

    #[test]
    fn unity_is_silent() {
        for (m, c) in [(3, 0), (3, 3), (1, 0)] {
            let s = build_unity(&params(m, m, c)).unwrap();
            assert_eq!(s.rate, RateResult::integer(0));
            assert_eq!(s.layout.total(), 0);
            assert!(validate_budget(&s));
        }
    }

    #[test]
    fn very_high_rates() {
        let rate = |c| build_very_high_alpha2(&params(2, 4, c)).unwrap().rate;
        assert_eq!(rate(0), RateResult::integer(0));
        assert_eq!(rate(1), RateResult::integer(1));
        assert_eq!(rate(2), RateResult::new(5, 2));
        assert_eq!(rate(3), RateResult::integer(3));
        assert_eq!(rate(4), RateResult::integer(4));
        assert_eq!(rate(9), RateResult::integer(4));
        let s = build_very_high_alpha2(&params(2, 4, 2)).unwrap();
        assert_eq!(s.slots.len(), 2);
        assert_eq!((s.rate.numerator, s.rate.denominator), (5, 2));
        assert_eq!(s.construction, Construction::TimeSharing);
    }

    #[test]
    fn very_high_two_slot_layout() {
        // m=2, n=4, C=2, slot 1: transmitter 1 leads. Levels listed top first.
        let s = build_very_high_alpha2(&params(2, 4, 2)).unwrap();
        let l = s.layout;
        assert_eq!(l, SourceLayout { w1_len: 5, w2_len: 5, d_len: 2, e_len: 2 });
        let slot = &s.slots[0];
        let row = |g: &BitMatrix, level: usize| {
            g.row(level_index(4, level)).ones().map(|c| l.segment_of(c).unwrap()).collect::<Vec<_>>()
        };
        use Segment::*;
        assert_eq!(row(&slot.g1, 4), vec![W2]); // relayed user-2 bit
        assert_eq!(row(&slot.g1, 3), vec![W1, D]); // own bit XOR random
        assert_eq!(row(&slot.g1, 2), vec![E]);
        assert_eq!(row(&slot.g1, 1), vec![D]);
        assert_eq!(row(&slot.g2, 4), vec![W2, E]);
        assert_eq!(row(&slot.g2, 3), vec![W2, D]);
        assert_eq!(row(&slot.g2, 2), vec![W1, W2]);
        assert_eq!(row(&slot.g2, 1), vec![D]);
        assert_eq!(slot.coop_ledger.shared_to_tx1.len(), 2);
        assert_eq!(slot.coop_ledger.shared_to_tx2.len(), 2);
    }

    #[test]
    fn very_high_rejects_deferred_cases() {
        for (m, n) in [(3, 6), (2, 5), (2, 6)] {
            assert!(
                matches!(build_very_high_alpha2(&params(m, n, 1)), Err(Error::Unsupported { regime: Regime::VeryHigh, .. })),
                "m={m} n={n}"
            );
        }
    }

    #[test]
    fn dispatcher() {
        assert_eq!(build(&params(4, 2, 2)).unwrap().rate, RateResult::integer(4));
        assert_eq!(build(&params(5, 4, 1)).unwrap().rate, RateResult::integer(3));
        assert!(matches!(build(&params(3, 5, 1)), Err(Error::Unsupported { regime: Regime::High, .. })));
        let s = build(&params(0, 3, 2)).unwrap();
        assert_eq!(s.construction, Construction::NoDirectLink);
        assert_eq!(s.rate, RateResult::integer(0));
        assert!(matches!(build(&params(0, 0, 0)), Err(Error::DegenerateChannel)));
    }

    #[test]
    fn budget_examples() {
        assert!(validate_budget(&build(&params(4, 2, 2)).unwrap()));
        assert!(validate_budget(&build(&params(3, 3, 3)).unwrap()));

        // G1 references C + 1 bits of W2 in one slot.
        let mut s = build(&params(4, 2, 1)).unwrap();
        let w2 = s.layout.columns(Segment::W2);
        let slot = &mut s.slots[0];
        for (i, col) in w2.clone().take(2).enumerate() {
            slot.g1.set(i, col, true);
        }
        slot.coop_ledger.used_by_tx1 = foreign_columns(&slot.g1, &s.layout, 1);
        slot.coop_ledger.shared_to_tx1 = slot.coop_ledger.used_by_tx1.clone();
        assert!(!validate_budget(&s));
        // under-declared sharing fails too
        slot_truncate(&mut s);
        assert!(!validate_budget(&s));
    }

    fn slot_truncate(s: &mut SchemeDescription) {
        s.slots[0].coop_ledger.shared_to_tx1.truncate(1);
    }

    #[test]
    fn budget_detects_acausal_sharing() {
        // Move slot 1's declarations into slot 2: usage precedes sharing.
        let mut s = build(&params(2, 4, 2)).unwrap();
        let first = std::mem::take(&mut s.slots[0].coop_ledger.shared_to_tx1);
        s.slots[1].coop_ledger.shared_to_tx1.extend(first);
        assert!(!validate_budget(&s));
    }

    #[test]
    fn budget_holds_for_all_builders() {
        for m in 0..=8 {
            for n in 0..=2 * m + 1 {
                for c in 0..=n + 1 {
                    if let Ok(s) = build(&params(m, n, c)) {
                        assert!(validate_budget(&s), "m={m} n={n} C={c}");
                        s.check_shape().unwrap();
                        assert_eq!(s.layout.w1_len, s.layout.w2_len);
                        assert_eq!(s.rate.denominator, s.slots.len());
                        assert_eq!(s.rate.numerator, s.layout.w1_len);
                    }
                }
            }
        }
    }

    #[test]
    fn weak_reaches_max_levels_at_full_cooperation() {
        for m in 1..=10 {
            for n in 0..=m {
                let p = params(m, n, n);
                if classify_regime(&p).unwrap() == Regime::Weak {
                    assert_eq!(build_weak(&p).unwrap().rate, RateResult::integer(m.max(n)));
                }
            }
        }
    }

    #[test]
    fn rate_display_and_parse() {
        assert_eq!(RateResult::new(5, 2).to_string(), "5/2");
        assert_eq!(RateResult::new(10, 2).to_string(), "5");
        assert_eq!("5/2".parse::<RateResult>().unwrap(), RateResult::new(5, 2));
        assert_eq!("3".parse::<RateResult>().unwrap(), RateResult::integer(3));
        assert!("3/0".parse::<RateResult>().is_err());
        assert!(RateResult::new(5, 2) > RateResult::integer(2));
    }
}
