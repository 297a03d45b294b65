//! Run metrics and the working-memory ledger.

use serde::{Deserialize, Serialize};

use crate::bfs::RunStats;
use crate::digits::{Backend, DigitArray};
use crate::pow3::{Pow3Mode, REGISTER_BITS as POW3_REGISTER_BITS};
use crate::store::{
    min_color_bits, ColorStorage, ColorStore, PlainColors, StoreParams, CHAIN_REGISTER_BITS,
    PARAM_REGISTER_BITS,
};

/// Working bits by owner. Graph and output are not charged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    /// Digit payload (containers).
    pub digits: usize,
    /// Digit-array tables, boundary records and registers.
    pub digit_overhead: usize,
    pub pow3: usize,
    /// Conversion constants.
    pub plan: usize,
    pub leftover: usize,
    pub scratch: usize,
    pub registers: usize,
    /// The 2-bit array of the plain store.
    pub plain: usize,
    pub total: usize,
}

impl Ledger {
    pub fn of_store(s: &ColorStore) -> Self {
        let array = s.array();
        let mut l = Ledger {
            digits: array.payload_bits(),
            digit_overhead: array.bits_used() - array.payload_bits(),
            pow3: s.pow3().bits_used(),
            plan: s.plan().bits_used(),
            leftover: s.leftover_bits(),
            scratch: s.scratch_bits(),
            registers: CHAIN_REGISTER_BITS + PARAM_REGISTER_BITS,
            plain: 0,
            total: 0,
        };
        l.total = l.sum();
        l
    }

    pub fn of_plain(s: &PlainColors) -> Self {
        Ledger {
            plain: s.bits_used(),
            total: s.bits_used(),
            ..Ledger::default()
        }
    }

    pub fn sum(&self) -> usize {
        self.digits
            + self.digit_overhead
            + self.pow3
            + self.plan
            + self.leftover
            + self.scratch
            + self.registers
            + self.plain
    }

    /// Recounts the parts that have a closed form and compares them, and
    /// the total, with what the store reports.
    pub fn cross_check(&self, s: &ColorStore) -> Result<(), String> {
        let p = s.params();
        if self.total != self.sum() || self.total != s.bits_used() {
            return Err(format!(
                "ledger total {} vs parts {} vs store {}",
                self.total,
                self.sum(),
                s.bits_used()
            ));
        }
        if let DigitArray::Packed(_) = s.array() {
            let want = p.containers * p.field_bits;
            if self.digits != want {
                return Err(format!("packed payload {} != N·F = {want}", self.digits));
            }
        }
        let want = pow3_bits(s.pow3().mode(), p.q, p.field_bits);
        if self.pow3 != want {
            return Err(format!("power table {} != closed form {want}", self.pow3));
        }
        if self.leftover != 2 * p.leftover || self.scratch != 2 * p.q + 128 {
            return Err("leftover or scratch bits off their closed form".into());
        }
        Ok(())
    }
}

/// Power-provider bits as a function of the mode: `⌈q/t⌉·F` table bits, or
/// two working values when nothing is stored, plus registers.
pub fn pow3_bits(mode: Pow3Mode, q: usize, f: usize) -> usize {
    let body = match mode {
        Pow3Mode::Full => q * f,
        Pow3Mode::Strided(t) => q.div_ceil(t) * f,
        Pow3Mode::Squaring => 2 * f,
    };
    body + POW3_REGISTER_BITS
}

/// Allowed extra bits over `⌈n·log2 3⌉` with stride `t` for power and
/// level tables.
pub fn extra_bound(backend: Backend, p: &StoreParams, t: usize) -> u64 {
    let (q, f, l) = (p.q as u64, p.field_bits as u64, p.log_n as u64);
    let tables = q.div_ceil(t as u64) * f + 512 * l;
    match backend {
        Backend::Packed => p.containers as u64 + 2 * q + tables,
        Backend::Spill => 64 * l * l + tables,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub conversions_to_regular: u64,
    pub compactions: u64,
    pub color_changes: u64,
    /// Gray vertices enumerated from containers and the leftover block.
    pub enumerations: u64,
    pub pointer_surgeries: u64,
    pub max_touched: u64,
    pub splices: u64,
    pub array_reads: u64,
    pub array_writes: u64,
    pub depth_weight: u64,
    pub g_steps: u64,
    pub pow3_calls: u64,
    pub pow3_multiplies: u64,
    /// Most multiplications in a single power reconstruction.
    pub pow3_max_multiplies: u64,
}

/// Instrumented inequalities, each as `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub lhs: u64,
    pub rhs: u64,
}

impl Bound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Conversions to regular against `N + (changes + enumerations)/cap`.
    pub amortization: Bound,
    /// Color reads against `Σ (deg + c)` over enumerations.
    pub color_reads: Bound,
    /// Array accesses against `c₁(n+m) + c₂`.
    pub array_accesses: Bound,
    /// Big-number operations against `c₁(n+m) + c₂`.
    pub big_ops: Bound,
    /// Generator steps against `depth_weight + t·accesses`.
    pub g_steps: Bound,
}

impl Bounds {
    pub fn all_hold(&self) -> bool {
        [
            self.amortization,
            self.color_reads,
            self.array_accesses,
            self.big_ops,
            self.g_steps,
        ]
        .iter()
        .all(Bound::holds)
    }
}

/// Fitted constants for the linear work bounds.
pub const WORK_PER_UNIT: u64 = 64;
pub const WORK_BASE: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub m: usize,
    pub directed: bool,
    /// `packed`, `spill`, or `plain` below the succinct size range.
    pub backend: String,
    /// `table`, `strided` or `squaring`.
    pub pow3: String,
    pub stride: usize,
    pub succinct: bool,
    pub wall_time_ms: f64,
    pub big_ops: u64,
    pub peak_bits: u64,
    pub min_color_bits: u64,
    pub extra_bits: i64,
    /// Closed-form allowance for `extra_bits` (succinct runs only).
    pub extra_bound: Option<u64>,
    pub gray_capacity: usize,
    pub ledger: Ledger,
    pub counters: Counters,
    pub bounds: Bounds,
    pub run: RunStats,
}

impl Metrics {
    /// Metrics with the timing removed, for determinism checks.
    pub fn without_time(&self) -> Metrics {
        Metrics {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }
}

pub fn mode_name(mode: Pow3Mode) -> (&'static str, usize) {
    match mode {
        Pow3Mode::Full => ("table", 1),
        Pow3Mode::Strided(t) => ("strided", t),
        Pow3Mode::Squaring => ("squaring", 0),
    }
}

pub(crate) fn extra(n: usize, total: usize) -> (u64, i64) {
    let min = min_color_bits(n);
    (min, total as i64 - min as i64)
}
