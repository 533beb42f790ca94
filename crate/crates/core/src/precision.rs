//! Precision contexts and the multiple-precision scalar type.
//!
//! Every scalar operation is rounded to nearest, ties to even, at the
//! precision of an explicit destination [`PrecisionContext`]. Operand
//! precisions may differ from the destination; the destination always wins.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Special;
use rug::{Assign, Float, Integer};

use crate::error::{Error, Result};

/// Smallest supported mantissa length in bits.
pub const MIN_BITS: u32 = 2;
/// Largest supported mantissa length in bits.
pub const MAX_BITS: u32 = 1 << 20;

/// Mantissa length governing a family of scalar operations.
///
/// Rounding is always to nearest with ties to even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    bits: u32,
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Result<Self> {
        if !(MIN_BITS..=MAX_BITS).contains(&bits) {
            return Err(Error::InvalidPrecision(bits));
        }
        Ok(PrecisionContext { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// A context with `bits * factor` bits, clamped to the supported range.
    pub fn scaled(self, factor: u32) -> Self {
        let bits = self.bits.saturating_mul(factor).clamp(MIN_BITS, MAX_BITS);
        PrecisionContext { bits }
    }

    pub fn zero(self) -> MPScalar {
        MPScalar(Float::new(self.bits))
    }

    pub fn from_i64(self, v: i64) -> MPScalar {
        MPScalar(Float::with_val(self.bits, v))
    }

    pub fn from_u64(self, v: u64) -> MPScalar {
        MPScalar(Float::with_val(self.bits, v))
    }

    pub fn from_f64(self, v: f64) -> MPScalar {
        MPScalar(Float::with_val(self.bits, v))
    }

    pub fn from_integer(self, v: &Integer) -> MPScalar {
        MPScalar(Float::with_val(self.bits, v))
    }

    /// `num / den` correctly rounded.
    pub fn from_ratio(self, num: i64, den: i64) -> Result<MPScalar> {
        if den == 0 {
            return Err(Error::SingularScalar);
        }
        let q = rug::Rational::from((num, den));
        Ok(MPScalar(Float::with_val(self.bits, &q)))
    }

    /// Rounds `a` to this context.
    pub fn round(self, a: &MPScalar) -> MPScalar {
        MPScalar(Float::with_val(self.bits, &a.0))
    }

    pub fn add(self, a: &MPScalar, b: &MPScalar) -> MPScalar {
        MPScalar(Float::with_val(self.bits, &a.0 + &b.0))
    }

    pub fn sub(self, a: &MPScalar, b: &MPScalar) -> MPScalar {
        MPScalar(Float::with_val(self.bits, &a.0 - &b.0))
    }

    pub fn mul(self, a: &MPScalar, b: &MPScalar) -> MPScalar {
        MPScalar(Float::with_val(self.bits, &a.0 * &b.0))
    }

    pub fn div(self, a: &MPScalar, b: &MPScalar) -> Result<MPScalar> {
        if b.is_zero() {
            return Err(Error::SingularScalar);
        }
        Ok(MPScalar(Float::with_val(self.bits, &a.0 / &b.0)))
    }

    /// Dispatches one of the four basic operations.
    pub fn arith(self, op: ArithOp, a: &MPScalar, b: &MPScalar) -> Result<MPScalar> {
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    pub fn sqrt(self, a: &MPScalar) -> Result<MPScalar> {
        if a.0.is_sign_negative() && !a.0.is_zero() {
            return Err(Error::Domain(format!("square root of negative value {}", a.to_decimal(6))));
        }
        if a.0.is_nan() {
            return Err(Error::Domain("square root of NaN".into()));
        }
        Ok(MPScalar(Float::with_val(self.bits, a.0.sqrt_ref())))
    }

    /// Parses a hexadecimal floating-point literal, rounding once to this context.
    pub fn parse_hex(self, text: &str) -> Result<MPScalar> {
        parse_hex_literal(text, self.bits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Multiple-precision binary floating-point value.
#[derive(Clone)]
#[repr(transparent)]
pub struct MPScalar(pub(crate) Float);

impl MPScalar {
    pub fn from_float(f: Float) -> Self {
        MPScalar(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    /// Mantissa length in bits.
    pub fn precision(&self) -> u32 {
        self.0.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn abs(&self) -> MPScalar {
        MPScalar(self.0.clone().abs())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Base-2 exponent `e` with the value in `[2^(e-1), 2^e)`, or `None` for zero and specials.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    /// Approximate `log10(|x|)`, valid far outside the `f64` exponent range.
    pub fn log10_abs(&self) -> f64 {
        if self.0.is_zero() {
            return f64::NEG_INFINITY;
        }
        if !self.0.is_finite() {
            return f64::INFINITY;
        }
        let l = Float::with_val(64, self.0.abs_ref());
        l.log10().to_f64()
    }

    /// Scientific decimal text with `digits` significant digits, rounded to nearest.
    pub fn to_decimal(&self, digits: usize) -> String {
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    /// Hexadecimal significand with a binary exponent, e.g. `0x1.8p+1` for 3.
    ///
    /// The text holds every significant bit, so parsing it back at the same
    /// precision reproduces the value exactly.
    pub fn to_hex(&self) -> String {
        let f = &self.0;
        if f.is_nan() {
            return "nan".into();
        }
        let sign = if f.is_sign_negative() { "-" } else { "" };
        if f.is_infinite() {
            return format!("{sign}inf");
        }
        if f.is_zero() {
            return format!("{sign}0x0p+0");
        }
        let (mut mant, mut exp) = f.to_integer_exp().expect("finite value");
        mant.abs_mut();
        let tz = mant.find_one(0).unwrap_or(0);
        mant >>= tz;
        exp += tz as i32;
        // value = mant * 2^exp with mant odd; rewrite as 1.frac * 2^(exp + width - 1)
        let width = mant.significant_bits();
        let frac_bits = width - 1;
        let bin_exp = i64::from(exp) + i64::from(frac_bits);
        if frac_bits == 0 {
            return format!("{sign}0x1p{bin_exp:+}");
        }
        let pad = (4 - frac_bits % 4) % 4;
        let mut frac = mant.clone();
        frac.set_bit(frac_bits, false);
        frac <<= pad;
        let digits = ((frac_bits + pad) / 4) as usize;
        let hex = frac.to_string_radix(16);
        format!("{sign}0x1.{hex:0>digits$}p{bin_exp:+}")
    }

    pub fn from_hex(text: &str, ctx: PrecisionContext) -> Result<MPScalar> {
        ctx.parse_hex(text)
    }

    /// Equal value and equal precision; NaNs compare equal to each other.
    pub fn bit_eq(&self, other: &MPScalar) -> bool {
        if self.0.prec() != other.0.prec() {
            return false;
        }
        if self.0.is_nan() || other.0.is_nan() {
            return self.0.is_nan() && other.0.is_nan();
        }
        self.0 == other.0 && self.0.is_sign_negative() == other.0.is_sign_negative()
    }
}

impl PartialEq for MPScalar {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for MPScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Debug for MPScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPScalar({}, {} bits)", self.to_hex(), self.0.prec())
    }
}

impl fmt::Display for MPScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(17))
    }
}

/// `|approx - reference| / |reference|` evaluated at the reference's precision.
pub fn rel_error(approx: &MPScalar, reference: &MPScalar) -> Result<MPScalar> {
    if reference.is_zero() {
        return Err(Error::UndefinedMetric(
            "relative error against a zero reference".into(),
        ));
    }
    let prec = reference.0.prec();
    let mut diff = Float::with_val(prec, &approx.0 - &reference.0);
    diff.abs_mut();
    let denom = Float::with_val(prec, reference.0.abs_ref());
    diff /= &denom;
    Ok(MPScalar(diff))
}

fn parse_hex_literal(text: &str, bits: u32) -> Result<MPScalar> {
    let err = |position: usize, message: &str| Error::Parse {
        position,
        message: message.to_string(),
    };
    let bytes = text.as_bytes();
    let mut pos = 0;
    let negative = match bytes.first() {
        Some(b'-') => {
            pos = 1;
            true
        }
        Some(b'+') => {
            pos = 1;
            false
        }
        _ => false,
    };
    let rest = &text[pos..];
    if rest == "inf" {
        let s = if negative { Special::NegInfinity } else { Special::Infinity };
        return Ok(MPScalar(Float::with_val(bits, s)));
    }
    if rest == "nan" {
        return Ok(MPScalar(Float::with_val(bits, Special::Nan)));
    }
    if !(rest.starts_with("0x") || rest.starts_with("0X")) {
        return Err(err(pos, "expected \"0x\" prefix"));
    }
    pos += 2;

    let mut digits = String::new();
    let mut frac_digits: i64 = 0;
    let mut seen_point = false;
    let mut seen_digit = false;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_hexdigit() {
            digits.push(c as char);
            seen_digit = true;
            if seen_point {
                frac_digits += 1;
            }
        } else if c == b'.' && !seen_point {
            seen_point = true;
        } else {
            break;
        }
        pos += 1;
    }
    if !seen_digit {
        return Err(err(pos, "expected hexadecimal digit"));
    }
    if pos >= bytes.len() || !(bytes[pos] == b'p' || bytes[pos] == b'P') {
        return Err(err(pos, "expected binary exponent marker 'p'"));
    }
    pos += 1;
    let exp_start = pos;
    if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
        pos += 1;
    }
    let digits_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos == digits_start {
        return Err(err(pos, "expected decimal exponent digits"));
    }
    if pos != bytes.len() {
        return Err(err(pos, "unexpected trailing characters"));
    }
    let exponent: i64 = text[exp_start..pos]
        .parse()
        .map_err(|_| err(exp_start, "exponent out of range"))?;

    let mut mant = Integer::from_str_radix(&digits, 16).expect("validated hex digits");
    if negative {
        mant = -mant;
    }
    let shift = exponent
        .checked_sub(4 * frac_digits)
        .and_then(|s| i32::try_from(s).ok())
        .ok_or_else(|| err(exp_start, "exponent out of range"))?;
    let mut value = Float::with_val(bits, &mant);
    if negative && value.is_zero() {
        value.assign(Special::NegZero);
    }
    // exact scaling by a power of two
    if shift >= 0 {
        value <<= shift as u32;
    } else {
        value >>= shift.unsigned_abs();
    }
    Ok(MPScalar(value))
}
