//! 32-bit two's-complement fixed-point arithmetic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::OpKind;

pub const TOTAL_BITS: u32 = 32;
pub const DEFAULT_FRAC_BITS: u32 = 16;

pub const SINE_ENTRIES: usize = 1024;
const SINE_INDEX_BITS: u32 = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// Arithmetic shift: truncation toward minus infinity.
    #[default]
    Floor,
    /// Round half up.
    Nearest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overflow {
    #[default]
    Wrap,
    Saturate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPointFormat {
    pub frac_bits: u32,
    #[serde(default)]
    pub rounding: Rounding,
    #[serde(default)]
    pub overflow: Overflow,
}

impl Default for FixedPointFormat {
    fn default() -> Self {
        FixedPointFormat {
            frac_bits: DEFAULT_FRAC_BITS,
            rounding: Rounding::Floor,
            overflow: Overflow::Wrap,
        }
    }
}

impl FixedPointFormat {
    pub fn new(frac_bits: u32) -> Result<Self> {
        if frac_bits >= TOTAL_BITS {
            return Err(Error::FracBits(frac_bits));
        }
        Ok(FixedPointFormat {
            frac_bits,
            ..Default::default()
        })
    }

    /// Raw word for 1.0, saturated when it is not representable.
    pub fn one(&self) -> i32 {
        (1i64 << self.frac_bits).min(i32::MAX as i64) as i32
    }

    /// Nearest raw word to `x`, or `None` when out of range.
    pub fn from_real(&self, x: f64) -> Option<i32> {
        let raw = (x * (1u64 << self.frac_bits) as f64).round();
        if raw.is_finite() && raw >= i32::MIN as f64 && raw <= i32::MAX as f64 {
            Some(raw as i32)
        } else {
            None
        }
    }

    pub fn to_real(&self, raw: i32) -> f64 {
        raw as f64 / (1u64 << self.frac_bits) as f64
    }

    fn narrow(&self, v: i64) -> i32 {
        match self.overflow {
            Overflow::Wrap => v as i32,
            Overflow::Saturate => v.clamp(i32::MIN as i64, i32::MAX as i64) as i32,
        }
    }

    pub fn add(&self, a: i32, b: i32) -> i32 {
        self.narrow(a as i64 + b as i64)
    }

    pub fn sub(&self, a: i32, b: i32) -> i32 {
        self.narrow(a as i64 - b as i64)
    }

    pub fn neg(&self, a: i32) -> i32 {
        self.narrow(-(a as i64))
    }

    pub fn mul(&self, a: i32, b: i32) -> i32 {
        let p = a as i64 * b as i64;
        let f = self.frac_bits;
        let shifted = match self.rounding {
            Rounding::Nearest if f > 0 => (p + (1i64 << (f - 1))) >> f,
            _ => p >> f,
        };
        self.narrow(shifted)
    }

    /// Table index for a phase given in turns: the fraction of a turn,
    /// rounded to the nearest of [`SINE_ENTRIES`] steps.
    pub fn sine_index(&self, phase: i32) -> usize {
        let f = self.frac_bits;
        let x = phase as i64;
        let idx = if f > SINE_INDEX_BITS {
            let shift = f - SINE_INDEX_BITS;
            (x + (1i64 << (shift - 1))) >> shift
        } else {
            x << (SINE_INDEX_BITS - f)
        };
        (idx & (SINE_ENTRIES as i64 - 1)) as usize
    }
}

/// Full-period sine table quantized to one format.
///
/// Built from the first quarter wave and mirrored, so it is exactly odd
/// and half-wave symmetric.
#[derive(Clone, Debug)]
pub struct SineTable {
    fmt: FixedPointFormat,
    values: Vec<i32>,
}

impl SineTable {
    pub fn new(fmt: FixedPointFormat) -> Self {
        let quarter = SINE_ENTRIES / 4;
        let scale = (1u64 << fmt.frac_bits) as f64;
        let q: Vec<i32> = (0..=quarter)
            .map(|i| {
                let s = (2.0 * PI * i as f64 / SINE_ENTRIES as f64).sin();
                (s * scale).round().min(i32::MAX as f64) as i32
            })
            .collect();
        let mut values = vec![0; SINE_ENTRIES];
        for i in 0..=quarter {
            values[i] = q[i];
            values[2 * quarter - i] = q[i];
            values[(2 * quarter + i) % SINE_ENTRIES] = -q[i];
            if i > 0 {
                values[SINE_ENTRIES - i] = -q[i];
            }
        }
        SineTable { fmt, values }
    }

    pub fn format(&self) -> FixedPointFormat {
        self.fmt
    }

    pub fn entries(&self) -> &[i32] {
        &self.values
    }

    pub fn lookup(&self, phase: i32) -> i32 {
        self.values[self.fmt.sine_index(phase)]
    }
}

/// Evaluate one arithmetic operator on raw words.
pub fn fx_apply(kind: OpKind, operands: &[i32], fmt: FixedPointFormat) -> Result<i32> {
    let arity = match kind {
        OpKind::Add | OpKind::Sub | OpKind::Mult => 2,
        OpKind::Negate | OpKind::SineLut => 1,
        other => return Err(Error::UnknownOperator(other.name())),
    };
    if operands.len() != arity {
        return Err(Error::Arity {
            kind: kind.name(),
            expected: arity,
            got: operands.len(),
        });
    }
    Ok(match kind {
        OpKind::Add => fmt.add(operands[0], operands[1]),
        OpKind::Sub => fmt.sub(operands[0], operands[1]),
        OpKind::Mult => fmt.mul(operands[0], operands[1]),
        OpKind::Negate => fmt.neg(operands[0]),
        OpKind::SineLut => SineTable::new(fmt).lookup(operands[0]),
        _ => unreachable!(),
    })
}
