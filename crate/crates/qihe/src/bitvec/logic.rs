//! Concrete four-valued bit vectors and Verilog evaluation semantics.

use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

/// A single four-valued bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicBit {
    /// Logic low.
    Zero,
    /// Logic high.
    One,
    /// Unknown.
    X,
    /// High impedance.
    Z,
}

impl LogicBit {
    /// True for `0` or `1`.
    pub fn is_defined(self) -> bool {
        matches!(self, LogicBit::Zero | LogicBit::One)
    }

    /// Resolution of two drivers of a `wire`/`tri` net: z yields to the
    /// other driver, agreement keeps the value, conflict is x.
    pub fn resolve_wire(a: LogicBit, b: LogicBit) -> LogicBit {
        match (a, b) {
            (LogicBit::Z, v) | (v, LogicBit::Z) => v,
            (a, b) if a == b => a,
            _ => LogicBit::X,
        }
    }

    /// Resolution on a `wand`/`triand` net: any 0 wins.
    pub fn resolve_wand(a: LogicBit, b: LogicBit) -> LogicBit {
        match (a, b) {
            (LogicBit::Z, v) | (v, LogicBit::Z) => v,
            (LogicBit::Zero, _) | (_, LogicBit::Zero) => LogicBit::Zero,
            (LogicBit::One, LogicBit::One) => LogicBit::One,
            _ => LogicBit::X,
        }
    }

    /// Resolution on a `wor`/`trior` net: any 1 wins.
    pub fn resolve_wor(a: LogicBit, b: LogicBit) -> LogicBit {
        match (a, b) {
            (LogicBit::Z, v) | (v, LogicBit::Z) => v,
            (LogicBit::One, _) | (_, LogicBit::One) => LogicBit::One,
            (LogicBit::Zero, LogicBit::Zero) => LogicBit::Zero,
            _ => LogicBit::X,
        }
    }

    fn to_char(self) -> char {
        match self {
            LogicBit::Zero => '0',
            LogicBit::One => '1',
            LogicBit::X => 'x',
            LogicBit::Z => 'z',
        }
    }

    fn from_char(c: char) -> Option<LogicBit> {
        match c {
            '0' => Some(LogicBit::Zero),
            '1' => Some(LogicBit::One),
            'x' | 'X' => Some(LogicBit::X),
            'z' | 'Z' | '?' => Some(LogicBit::Z),
            _ => None,
        }
    }
}

impl fmt::Display for LogicBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Errors from literal parsing and vector construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitvecError {
    /// The literal text does not follow `<width>'<s?><base><digits>`.
    #[error("malformed literal `{0}`: {1}")]
    MalformedLiteral(String, String),
    /// A zero width was requested.
    #[error("bit vector width must be at least 1")]
    ZeroWidth,
}

/// A fixed-width vector of four-valued bits.
///
/// Bits are stored most-significant first; [`LogicVec::bit`] indexes from
/// the least-significant end (bit 0), matching Verilog part selects.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LogicVec {
    bits: SmallVec<[LogicBit; 8]>,
    signed: bool,
}

impl LogicVec {
    /// Builds a vector from most-significant-first bits.
    pub fn new(bits: impl Into<SmallVec<[LogicBit; 8]>>, signed: bool) -> LogicVec {
        let bits = bits.into();
        assert!(!bits.is_empty(), "LogicVec must have width >= 1");
        LogicVec { bits, signed }
    }

    /// A vector of `width` copies of `b`.
    pub fn filled(width: usize, b: LogicBit) -> LogicVec {
        assert!(width >= 1);
        LogicVec {
            bits: std::iter::repeat(b).take(width).collect(),
            signed: false,
        }
    }

    /// An all-x vector, the usual "undefined" value.
    pub fn all_x(width: usize) -> LogicVec {
        LogicVec::filled(width, LogicBit::X)
    }

    /// Builds an unsigned vector holding `value` truncated to `width` bits.
    pub fn from_u64(width: usize, value: u64) -> LogicVec {
        assert!(width >= 1);
        let mut bits = SmallVec::with_capacity(width);
        for i in (0..width).rev() {
            let set = i < 64 && (value >> i) & 1 == 1;
            bits.push(if set { LogicBit::One } else { LogicBit::Zero });
        }
        LogicVec { bits, signed: false }
    }

    /// Width in bits.
    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Whether the vector is marked signed.
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// Returns a copy with the given signedness mark.
    pub fn with_signed(mut self, signed: bool) -> LogicVec {
        self.signed = signed;
        self
    }

    /// Bit `i`, where bit 0 is least significant.
    pub fn bit(&self, i: usize) -> LogicBit {
        self.bits[self.bits.len() - 1 - i]
    }

    fn set_bit(&mut self, i: usize, b: LogicBit) {
        let w = self.bits.len();
        self.bits[w - 1 - i] = b;
    }

    /// Bits most-significant first.
    pub fn bits(&self) -> &[LogicBit] {
        &self.bits
    }

    /// True when every bit is `0` or `1`.
    pub fn is_fully_defined(&self) -> bool {
        self.bits.iter().all(|b| b.is_defined())
    }

    /// True when any bit is `x` or `z`.
    pub fn has_xz(&self) -> bool {
        !self.is_fully_defined()
    }

    /// The unsigned numeric value, if fully defined and at most 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        if !self.is_fully_defined() || self.width() > 64 {
            return None;
        }
        let mut v = 0u64;
        for b in &self.bits {
            v = (v << 1) | u64::from(*b == LogicBit::One);
        }
        Some(v)
    }

    /// Parses a literal of the form `<width>'<s?><base><digits>`.
    ///
    /// Bases are `b`, `o`, `d`, `h`; `x`/`z` digits are accepted for all
    /// bases except decimal, and `_` separators are ignored. Short digit
    /// strings are left-padded with zero (or with `x`/`z` when the leading
    /// digit is `x`/`z`); long ones are truncated from the left, as in
    /// Verilog.
    pub fn parse_literal(text: &str) -> Result<LogicVec, BitvecError> {
        let err = |m: &str| BitvecError::MalformedLiteral(text.to_string(), m.to_string());
        let tick = text.find('\'').ok_or_else(|| err("missing `'`"))?;
        let width: usize = text[..tick]
            .parse()
            .map_err(|_| err("bad width prefix"))?;
        if width == 0 {
            return Err(BitvecError::ZeroWidth);
        }
        let mut rest = text[tick + 1..].chars().peekable();
        let mut signed = false;
        if rest.peek() == Some(&'s') || rest.peek() == Some(&'S') {
            signed = true;
            rest.next();
        }
        let base = rest.next().ok_or_else(|| err("missing base"))?;
        let digits: String = rest.filter(|&c| c != '_').collect();
        if digits.is_empty() {
            return Err(err("missing digits"));
        }
        let bits_per_digit = match base {
            'b' | 'B' => 1,
            'o' | 'O' => 3,
            'h' | 'H' => 4,
            'd' | 'D' => {
                let value: u128 = digits.parse().map_err(|_| err("bad decimal digits"))?;
                let mut bits = SmallVec::with_capacity(width);
                for i in (0..width).rev() {
                    let set = i < 128 && (value >> i) & 1 == 1;
                    bits.push(if set { LogicBit::One } else { LogicBit::Zero });
                }
                return Ok(LogicVec { bits, signed });
            }
            _ => return Err(err("unknown base")),
        };
        let mut raw: Vec<LogicBit> = Vec::with_capacity(digits.len() * bits_per_digit);
        for c in digits.chars() {
            if let Some(b) = LogicBit::from_char(c) {
                if b.is_defined() && bits_per_digit > 1 {
                    // '0'/'1' are also plain digits in o/h; fall through.
                    let v = c.to_digit(16).unwrap();
                    for i in (0..bits_per_digit).rev() {
                        raw.push(if (v >> i) & 1 == 1 {
                            LogicBit::One
                        } else {
                            LogicBit::Zero
                        });
                    }
                } else {
                    for _ in 0..bits_per_digit {
                        raw.push(b);
                    }
                }
            } else {
                let v = c.to_digit(16).ok_or_else(|| err("bad digit"))?;
                if v >= (1 << bits_per_digit) {
                    return Err(err("digit out of range for base"));
                }
                for i in (0..bits_per_digit).rev() {
                    raw.push(if (v >> i) & 1 == 1 {
                        LogicBit::One
                    } else {
                        LogicBit::Zero
                    });
                }
            }
        }
        // Pad or truncate on the left to the declared width.
        let mut bits = SmallVec::with_capacity(width);
        if raw.len() >= width {
            bits.extend(raw[raw.len() - width..].iter().copied());
        } else {
            let pad = match raw[0] {
                LogicBit::X => LogicBit::X,
                LogicBit::Z => LogicBit::Z,
                _ => LogicBit::Zero,
            };
            bits.extend(std::iter::repeat(pad).take(width - raw.len()));
            bits.extend(raw.iter().copied());
        }
        Ok(LogicVec { bits, signed })
    }
}

impl fmt::Display for LogicVec {
    /// The canonical literal form: always binary, e.g. `4'b10x0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}'{}b",
            self.width(),
            if self.signed { "s" } else { "" }
        )?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LogicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Unary operators of the IR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    /// Arithmetic negation (two's complement).
    Neg,
    /// Bitwise complement.
    Not,
    /// Reduction AND.
    Rand,
    /// Reduction OR.
    Ror,
    /// Reduction XOR.
    Rxor,
    /// Identity buffer.
    Buf,
}

impl UnaryOp {
    /// All unary operators, in IR keyword order.
    pub const ALL: [UnaryOp; 6] = [
        UnaryOp::Neg,
        UnaryOp::Not,
        UnaryOp::Rand,
        UnaryOp::Ror,
        UnaryOp::Rxor,
        UnaryOp::Buf,
    ];

    /// The IR keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Not => "not",
            UnaryOp::Rand => "rand",
            UnaryOp::Ror => "ror",
            UnaryOp::Rxor => "rxor",
            UnaryOp::Buf => "buf",
        }
    }

    /// Parses an IR keyword.
    pub fn from_keyword(s: &str) -> Option<UnaryOp> {
        UnaryOp::ALL.into_iter().find(|op| op.keyword() == s)
    }

    /// Result width for an operand of width `w`.
    pub fn result_width(self, w: usize) -> usize {
        match self {
            UnaryOp::Rand | UnaryOp::Ror | UnaryOp::Rxor => 1,
            _ => w,
        }
    }
}

/// Binary operators of the IR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Udiv,
    Sdiv,
    Urem,
    Srem,
    Pow,
    Upow,
    Ult,
    Ugt,
    Ule,
    Uge,
    Slt,
    Sgt,
    Sle,
    Sge,
    Eq,
    Equiv,
    Neq,
    Nequiv,
    And,
    Or,
    Xor,
    Shl,
    Ashr,
    Lshr,
    Concat,
}

impl BinaryOp {
    /// All binary operators, in IR keyword order.
    pub const ALL: [BinaryOp; 28] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Udiv,
        BinaryOp::Sdiv,
        BinaryOp::Urem,
        BinaryOp::Srem,
        BinaryOp::Pow,
        BinaryOp::Upow,
        BinaryOp::Ult,
        BinaryOp::Ugt,
        BinaryOp::Ule,
        BinaryOp::Uge,
        BinaryOp::Slt,
        BinaryOp::Sgt,
        BinaryOp::Sle,
        BinaryOp::Sge,
        BinaryOp::Eq,
        BinaryOp::Equiv,
        BinaryOp::Neq,
        BinaryOp::Nequiv,
        BinaryOp::And,
        BinaryOp::Or,
        BinaryOp::Xor,
        BinaryOp::Shl,
        BinaryOp::Ashr,
        BinaryOp::Lshr,
        BinaryOp::Concat,
    ];

    /// The IR keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Udiv => "udiv",
            BinaryOp::Sdiv => "sdiv",
            BinaryOp::Urem => "urem",
            BinaryOp::Srem => "srem",
            BinaryOp::Pow => "pow",
            BinaryOp::Upow => "upow",
            BinaryOp::Ult => "ult",
            BinaryOp::Ugt => "ugt",
            BinaryOp::Ule => "ule",
            BinaryOp::Uge => "uge",
            BinaryOp::Slt => "slt",
            BinaryOp::Sgt => "sgt",
            BinaryOp::Sle => "sle",
            BinaryOp::Sge => "sge",
            BinaryOp::Eq => "eq",
            BinaryOp::Equiv => "equiv",
            BinaryOp::Neq => "neq",
            BinaryOp::Nequiv => "nequiv",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Xor => "xor",
            BinaryOp::Shl => "shl",
            BinaryOp::Ashr => "ashr",
            BinaryOp::Lshr => "lshr",
            BinaryOp::Concat => "concat",
        }
    }

    /// Parses an IR keyword.
    pub fn from_keyword(s: &str) -> Option<BinaryOp> {
        BinaryOp::ALL.into_iter().find(|op| op.keyword() == s)
    }

    /// True for the comparison operators (1-bit result).
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Ult
                | BinaryOp::Ugt
                | BinaryOp::Ule
                | BinaryOp::Uge
                | BinaryOp::Slt
                | BinaryOp::Sgt
                | BinaryOp::Sle
                | BinaryOp::Sge
                | BinaryOp::Eq
                | BinaryOp::Equiv
                | BinaryOp::Neq
                | BinaryOp::Nequiv
        )
    }

    /// True for the shift operators (right operand is the amount).
    pub fn is_shift(self) -> bool {
        matches!(self, BinaryOp::Shl | BinaryOp::Ashr | BinaryOp::Lshr)
    }

    /// True when the operator requires both operands to share a width.
    pub fn requires_equal_widths(self) -> bool {
        !self.is_shift() && self != BinaryOp::Concat
    }

    /// Result width for operands of widths `wa` and `wb`.
    ///
    /// Equal-width operators assume `wa == wb` (the caller extends).
    pub fn result_width(self, wa: usize, wb: usize) -> usize {
        if self.is_comparison() {
            1
        } else if self == BinaryOp::Concat {
            wa + wb
        } else {
            // Shifts and pow take the left operand's width; the rest are
            // equal-width.
            let _ = wb;
            wa
        }
    }
}

// ---------------------------------------------------------------------------
// Defined-value arithmetic on 64-bit limbs (LSB-first).

#[derive(Clone, PartialEq, Eq)]
struct Words {
    width: usize,
    limbs: Vec<u64>,
}

impl Words {
    fn zero(width: usize) -> Words {
        Words {
            width,
            limbs: vec![0; width.div_ceil(64)],
        }
    }

    fn from_logic(v: &LogicVec) -> Option<Words> {
        if !v.is_fully_defined() {
            return None;
        }
        let mut w = Words::zero(v.width());
        for i in 0..v.width() {
            if v.bit(i) == LogicBit::One {
                w.limbs[i / 64] |= 1 << (i % 64);
            }
        }
        Some(w)
    }

    fn to_logic(&self) -> LogicVec {
        let mut v = LogicVec::filled(self.width, LogicBit::Zero);
        for i in 0..self.width {
            if self.bit(i) {
                v.set_bit(i, LogicBit::One);
            }
        }
        v
    }

    fn bit(&self, i: usize) -> bool {
        i < self.width && (self.limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    fn set_bit(&mut self, i: usize) {
        self.limbs[i / 64] |= 1 << (i % 64);
    }

    fn mask(&mut self) {
        let extra = self.limbs.len() * 64 - self.width;
        if extra > 0 {
            let last = self.limbs.len() - 1;
            self.limbs[last] &= u64::MAX >> extra;
        }
    }

    fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    fn sign_bit(&self) -> bool {
        self.bit(self.width - 1)
    }

    fn add(&self, rhs: &Words) -> Words {
        let mut out = Words::zero(self.width);
        let mut carry = 0u64;
        for i in 0..self.limbs.len() {
            let (s1, c1) = self.limbs[i].overflowing_add(rhs.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry);
            out.limbs[i] = s2;
            carry = u64::from(c1) + u64::from(c2);
        }
        out.mask();
        out
    }

    fn negate(&self) -> Words {
        let mut out = Words::zero(self.width);
        let mut carry = 1u64;
        for i in 0..self.limbs.len() {
            let (s, c) = (!self.limbs[i]).overflowing_add(carry);
            out.limbs[i] = s;
            carry = u64::from(c);
        }
        out.mask();
        out
    }

    fn sub(&self, rhs: &Words) -> Words {
        self.add(&rhs.negate())
    }

    fn mul(&self, rhs: &Words) -> Words {
        let mut out = Words::zero(self.width);
        for i in 0..self.limbs.len() {
            let mut carry = 0u128;
            for j in 0..self.limbs.len() - i {
                let idx = i + j;
                let cur = u128::from(out.limbs[idx])
                    + u128::from(self.limbs[i]) * u128::from(rhs.limbs[j])
                    + carry;
                out.limbs[idx] = cur as u64;
                carry = cur >> 64;
            }
        }
        out.mask();
        out
    }

    fn cmp_unsigned(&self, rhs: &Words) -> std::cmp::Ordering {
        for i in (0..self.limbs.len()).rev() {
            match self.limbs[i].cmp(&rhs.limbs[i]) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    }

    fn cmp_signed(&self, rhs: &Words) -> std::cmp::Ordering {
        match (self.sign_bit(), rhs.sign_bit()) {
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            _ => self.cmp_unsigned(rhs),
        }
    }

    /// Unsigned quotient and remainder by shift-subtract long division.
    /// The divisor must be nonzero.
    fn udivrem(&self, d: &Words) -> (Words, Words) {
        let mut q = Words::zero(self.width);
        let mut r = Words::zero(self.width);
        for i in (0..self.width).rev() {
            r = r.shl_bits(1);
            if self.bit(i) {
                r.set_bit(0);
            }
            if r.cmp_unsigned(d) != std::cmp::Ordering::Less {
                r = r.sub(d);
                q.set_bit(i);
            }
        }
        (q, r)
    }

    fn shl_bits(&self, n: usize) -> Words {
        let mut out = Words::zero(self.width);
        for i in (0..self.width).rev() {
            if i >= n && self.bit(i - n) {
                out.set_bit(i);
            }
        }
        out
    }
}

fn bool_bit(b: bool) -> LogicVec {
    LogicVec::filled(1, if b { LogicBit::One } else { LogicBit::Zero })
}

fn x_bit() -> LogicVec {
    LogicVec::all_x(1)
}

// ---------------------------------------------------------------------------
// Per-bit tables for the bitwise operators (z behaves as x inside gates).

fn bit_and(a: LogicBit, b: LogicBit) -> LogicBit {
    match (a, b) {
        (LogicBit::Zero, _) | (_, LogicBit::Zero) => LogicBit::Zero,
        (LogicBit::One, LogicBit::One) => LogicBit::One,
        _ => LogicBit::X,
    }
}

fn bit_or(a: LogicBit, b: LogicBit) -> LogicBit {
    match (a, b) {
        (LogicBit::One, _) | (_, LogicBit::One) => LogicBit::One,
        (LogicBit::Zero, LogicBit::Zero) => LogicBit::Zero,
        _ => LogicBit::X,
    }
}

fn bit_xor(a: LogicBit, b: LogicBit) -> LogicBit {
    match (a, b) {
        (LogicBit::Zero, LogicBit::Zero) | (LogicBit::One, LogicBit::One) => LogicBit::Zero,
        (LogicBit::Zero, LogicBit::One) | (LogicBit::One, LogicBit::Zero) => LogicBit::One,
        _ => LogicBit::X,
    }
}

fn bit_not(a: LogicBit) -> LogicBit {
    match a {
        LogicBit::Zero => LogicBit::One,
        LogicBit::One => LogicBit::Zero,
        _ => LogicBit::X,
    }
}

pub(crate) fn bitwise_tables(op: BinaryOp) -> Option<fn(LogicBit, LogicBit) -> LogicBit> {
    match op {
        BinaryOp::And => Some(bit_and),
        BinaryOp::Or => Some(bit_or),
        BinaryOp::Xor => Some(bit_xor),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Evaluation.

/// Evaluates a unary operator.
pub fn eval_unop(op: UnaryOp, a: &LogicVec) -> LogicVec {
    match op {
        UnaryOp::Buf => a.clone().with_signed(a.is_signed()),
        UnaryOp::Not => LogicVec::new(
            a.bits().iter().map(|&b| bit_not(b)).collect::<SmallVec<[_; 8]>>(),
            false,
        ),
        UnaryOp::Neg => match Words::from_logic(a) {
            Some(w) => w.negate().to_logic(),
            None => LogicVec::all_x(a.width()),
        },
        UnaryOp::Rand => {
            if a.bits().contains(&LogicBit::Zero) {
                bool_bit(false)
            } else if a.has_xz() {
                x_bit()
            } else {
                bool_bit(true)
            }
        }
        UnaryOp::Ror => {
            if a.bits().contains(&LogicBit::One) {
                bool_bit(true)
            } else if a.has_xz() {
                x_bit()
            } else {
                bool_bit(false)
            }
        }
        UnaryOp::Rxor => {
            if a.has_xz() {
                x_bit()
            } else {
                let ones = a.bits().iter().filter(|&&b| b == LogicBit::One).count();
                bool_bit(ones % 2 == 1)
            }
        }
    }
}

/// Evaluates a binary operator.
///
/// Equal-width operators require `a.width() == b.width()`; callers extend
/// operands first. Shift amounts and concat operands may differ in width.
pub fn eval_binop(op: BinaryOp, a: &LogicVec, b: &LogicVec) -> LogicVec {
    if op.requires_equal_widths() {
        assert_eq!(
            a.width(),
            b.width(),
            "operator {} requires equal operand widths",
            op.keyword()
        );
    }
    let w = a.width();
    if let Some(table) = bitwise_tables(op) {
        let bits: SmallVec<[LogicBit; 8]> = a
            .bits()
            .iter()
            .zip(b.bits())
            .map(|(&x, &y)| table(x, y))
            .collect();
        return LogicVec::new(bits, false);
    }
    match op {
        BinaryOp::Concat => {
            let mut bits: SmallVec<[LogicBit; 8]> = SmallVec::with_capacity(w + b.width());
            bits.extend(a.bits().iter().copied());
            bits.extend(b.bits().iter().copied());
            LogicVec::new(bits, false)
        }
        BinaryOp::Equiv => bool_bit(a.bits() == b.bits()),
        BinaryOp::Nequiv => bool_bit(a.bits() != b.bits()),
        BinaryOp::Eq | BinaryOp::Neq => {
            // Per the standard: x only when the relation is actually
            // ambiguous; a definite mismatch on defined bits decides it.
            let mut ambiguous = false;
            let mut differs = false;
            for (&x, &y) in a.bits().iter().zip(b.bits()) {
                if x.is_defined() && y.is_defined() {
                    differs |= x != y;
                } else {
                    ambiguous = true;
                }
            }
            if differs {
                bool_bit(op == BinaryOp::Neq)
            } else if ambiguous {
                x_bit()
            } else {
                bool_bit(op == BinaryOp::Eq)
            }
        }
        BinaryOp::Shl | BinaryOp::Lshr | BinaryOp::Ashr => {
            let amount = match Words::from_logic(b) {
                Some(words) => words,
                None => return LogicVec::all_x(w),
            };
            // Amounts >= width saturate; the numeric value fits in u64 then.
            let big = amount.limbs.iter().skip(1).any(|&l| l != 0) || amount.limbs[0] as usize >= w;
            let n = if big { w } else { amount.limbs[0] as usize };
            let mut bits: SmallVec<[LogicBit; 8]> = SmallVec::with_capacity(w);
            match op {
                BinaryOp::Shl => {
                    for i in (0..w).rev() {
                        bits.push(if i >= n { a.bit(i - n) } else { LogicBit::Zero });
                    }
                }
                _ => {
                    let fill = if op == BinaryOp::Ashr {
                        a.bit(w - 1)
                    } else {
                        LogicBit::Zero
                    };
                    for i in (0..w).rev() {
                        bits.push(if i + n < w { a.bit(i + n) } else { fill });
                    }
                }
            }
            LogicVec::new(bits, false)
        }
        _ => {
            let (wa, wb) = match (Words::from_logic(a), Words::from_logic(b)) {
                (Some(x), Some(y)) => (x, y),
                _ => return LogicVec::all_x(op.result_width(a.width(), b.width())),
            };
            match op {
                BinaryOp::Add => wa.add(&wb).to_logic(),
                BinaryOp::Sub => wa.sub(&wb).to_logic(),
                BinaryOp::Mul => wa.mul(&wb).to_logic(),
                BinaryOp::Udiv | BinaryOp::Urem => {
                    if wb.is_zero() {
                        LogicVec::all_x(w)
                    } else {
                        let (q, r) = wa.udivrem(&wb);
                        if op == BinaryOp::Udiv { q } else { r }.to_logic()
                    }
                }
                BinaryOp::Sdiv | BinaryOp::Srem => {
                    if wb.is_zero() {
                        return LogicVec::all_x(w);
                    }
                    let (na, nb) = (wa.sign_bit(), wb.sign_bit());
                    let ua = if na { wa.negate() } else { wa };
                    let ub = if nb { wb.negate() } else { wb };
                    let (q, r) = ua.udivrem(&ub);
                    if op == BinaryOp::Sdiv {
                        if na != nb { q.negate() } else { q }.to_logic()
                    } else {
                        // Remainder takes the sign of the dividend.
                        if na { r.negate() } else { r }.to_logic()
                    }
                }
                BinaryOp::Upow => eval_upow(&wa, &wb),
                BinaryOp::Pow => eval_spow(&wa, &wb),
                BinaryOp::Ult => bool_bit(wa.cmp_unsigned(&wb).is_lt()),
                BinaryOp::Ugt => bool_bit(wa.cmp_unsigned(&wb).is_gt()),
                BinaryOp::Ule => bool_bit(wa.cmp_unsigned(&wb).is_le()),
                BinaryOp::Uge => bool_bit(wa.cmp_unsigned(&wb).is_ge()),
                BinaryOp::Slt => bool_bit(wa.cmp_signed(&wb).is_lt()),
                BinaryOp::Sgt => bool_bit(wa.cmp_signed(&wb).is_gt()),
                BinaryOp::Sle => bool_bit(wa.cmp_signed(&wb).is_le()),
                BinaryOp::Sge => bool_bit(wa.cmp_signed(&wb).is_ge()),
                _ => unreachable!("handled above"),
            }
        }
    }
}

fn eval_upow(base: &Words, exp: &Words) -> LogicVec {
    // Square-and-multiply mod 2^width.
    let mut result = Words::zero(base.width);
    result.set_bit(0);
    let mut acc = base.clone();
    for i in 0..exp.width {
        if exp.bit(i) {
            result = result.mul(&acc);
        }
        acc = acc.mul(&acc);
    }
    result.to_logic()
}

fn eval_spow(base: &Words, exp: &Words) -> LogicVec {
    let w = base.width;
    let one = {
        let mut o = Words::zero(w);
        o.set_bit(0);
        o
    };
    let exp_neg = exp.sign_bit();
    let exp_zero = exp.is_zero();
    let base_zero = base.is_zero();
    let base_one = *base == one;
    let base_minus_one = w > 1 && base.negate() == one || w == 1 && base.bit(0);
    if base_one {
        return one.to_logic();
    }
    if base_minus_one {
        // -1 ** even = 1, -1 ** odd = -1 (sign of exponent irrelevant).
        return if exp.bit(0) { one.negate() } else { one }.to_logic();
    }
    if base_zero {
        return if exp_zero {
            one.to_logic()
        } else if exp_neg {
            LogicVec::all_x(w)
        } else {
            Words::zero(w).to_logic()
        };
    }
    if exp_zero {
        return one.to_logic();
    }
    if exp_neg {
        // |base| > 1 with a negative exponent truncates to zero.
        return Words::zero(w).to_logic();
    }
    eval_upow(base, exp)
}

/// Evaluates `sel ? t : e`; `sel` must be one bit wide.
pub fn eval_mux(sel: &LogicVec, t: &LogicVec, e: &LogicVec) -> LogicVec {
    assert_eq!(sel.width(), 1, "mux selector must be 1 bit");
    assert_eq!(t.width(), e.width(), "mux arms must share a width");
    match sel.bit(0) {
        LogicBit::One => t.clone().with_signed(false),
        LogicBit::Zero => e.clone().with_signed(false),
        _ => {
            // Ambiguous select: bits agree where both arms are equal and
            // defined, otherwise x.
            let bits: SmallVec<[LogicBit; 8]> = t
                .bits()
                .iter()
                .zip(e.bits())
                .map(|(&x, &y)| if x == y && x.is_defined() { x } else { LogicBit::X })
                .collect();
            LogicVec::new(bits, false)
        }
    }
}

/// Extracts bits `msb..=lsb`. Positions outside the vector read as `x`.
pub fn eval_select(a: &LogicVec, msb: usize, lsb: usize) -> LogicVec {
    assert!(msb >= lsb, "select range must have msb >= lsb");
    let mut bits: SmallVec<[LogicBit; 8]> = SmallVec::with_capacity(msb - lsb + 1);
    for i in (lsb..=msb).rev() {
        bits.push(if i < a.width() { a.bit(i) } else { LogicBit::X });
    }
    LogicVec::new(bits, false)
}

/// Alias for [`eval_select`], matching the operation name used elsewhere.
pub fn select(a: &LogicVec, msb: usize, lsb: usize) -> LogicVec {
    eval_select(a, msb, lsb)
}

/// Zero-extends (or truncates) to `width`.
pub fn eval_zext(a: &LogicVec, width: usize) -> LogicVec {
    resize(a, width, LogicBit::Zero, false)
}

/// Sign-extends (or truncates) to `width`.
pub fn eval_sext(a: &LogicVec, width: usize) -> LogicVec {
    resize(a, width, a.bit(a.width() - 1), a.is_signed())
}

/// Resizes to `width` using the source signedness, and re-marks the result.
pub fn eval_cast(a: &LogicVec, width: usize, signed: bool) -> LogicVec {
    let fill = if a.is_signed() {
        a.bit(a.width() - 1)
    } else {
        LogicBit::Zero
    };
    resize(a, width, fill, signed)
}

fn resize(a: &LogicVec, width: usize, fill: LogicBit, signed: bool) -> LogicVec {
    assert!(width >= 1);
    let mut bits: SmallVec<[LogicBit; 8]> = SmallVec::with_capacity(width);
    for i in (0..width).rev() {
        bits.push(if i < a.width() { a.bit(i) } else { fill });
    }
    LogicVec::new(bits, signed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> LogicVec {
        LogicVec::parse_literal(s).unwrap()
    }

    // Frozen from the Verilog 4-state tables: rows are the left operand in
    // 0,1,x,z order, columns the right operand.
    const AND_TABLE: [[char; 4]; 4] = [
        ['0', '0', '0', '0'],
        ['0', '1', 'x', 'x'],
        ['0', 'x', 'x', 'x'],
        ['0', 'x', 'x', 'x'],
    ];
    const OR_TABLE: [[char; 4]; 4] = [
        ['0', '1', 'x', 'x'],
        ['1', '1', '1', '1'],
        ['x', '1', 'x', 'x'],
        ['x', '1', 'x', 'x'],
    ];
    const XOR_TABLE: [[char; 4]; 4] = [
        ['0', '1', 'x', 'x'],
        ['1', '0', 'x', 'x'],
        ['x', 'x', 'x', 'x'],
        ['x', 'x', 'x', 'x'],
    ];
    const NOT_TABLE: [char; 4] = ['1', '0', 'x', 'x'];
    const BITS: [LogicBit; 4] = [LogicBit::Zero, LogicBit::One, LogicBit::X, LogicBit::Z];

    #[test]
    fn bitwise_tables_match_standard() {
        for (i, &a) in BITS.iter().enumerate() {
            for (j, &b) in BITS.iter().enumerate() {
                let one = |bit| LogicVec::filled(1, bit);
                assert_eq!(
                    eval_binop(BinaryOp::And, &one(a), &one(b)).bit(0).to_char(),
                    AND_TABLE[i][j],
                    "{a} & {b}"
                );
                assert_eq!(
                    eval_binop(BinaryOp::Or, &one(a), &one(b)).bit(0).to_char(),
                    OR_TABLE[i][j],
                    "{a} | {b}"
                );
                assert_eq!(
                    eval_binop(BinaryOp::Xor, &one(a), &one(b)).bit(0).to_char(),
                    XOR_TABLE[i][j],
                    "{a} ^ {b}"
                );
            }
            assert_eq!(
                eval_unop(UnaryOp::Not, &LogicVec::filled(1, a)).bit(0).to_char(),
                NOT_TABLE[i]
            );
        }
    }

    #[test]
    fn literal_parsing() {
        assert_eq!(v("4'b10x0").to_string(), "4'b10x0");
        assert_eq!(v("6'h2A").to_string(), "6'b101010");
        assert_eq!(v("6'd32").to_string(), "6'b100000");
        assert_eq!(v("4'sb1010").to_string(), "4'sb1010");
        assert!(v("4'sb1010").is_signed());
        // Padding: plain digits pad with 0; a leading x/z digit pads itself.
        assert_eq!(v("6'hA").to_string(), "6'b001010");
        assert_eq!(v("6'bx").to_string(), "6'bxxxxxx");
        assert_eq!(v("8'hzF").to_string(), "8'bzzzz1111");
        // Truncation keeps the low bits.
        assert_eq!(v("4'hFF").to_string(), "4'b1111");
        assert_eq!(v("12'o17_1").to_string(), "12'b000001111001");
        assert!(LogicVec::parse_literal("4b01").is_err());
        assert!(LogicVec::parse_literal("0'b0").is_err());
        assert!(LogicVec::parse_literal("4'd1x").is_err());
        assert!(LogicVec::parse_literal("4'b2").is_err());
    }

    #[test]
    fn literal_roundtrip_via_display() {
        for s in ["1'b0", "4'b10x0", "9'sb1z01x0110", "64'hDEADBEEF00C0FFEE"] {
            let val = v(s);
            assert_eq!(LogicVec::parse_literal(&val.to_string()).unwrap(), val);
        }
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(eval_binop(BinaryOp::Add, &v("4'b0010"), &v("4'b0011")), v("4'b0101"));
        assert_eq!(eval_binop(BinaryOp::Add, &v("4'b1111"), &v("4'b0001")), v("4'b0000"));
        assert_eq!(eval_binop(BinaryOp::Add, &v("4'b00x0"), &v("4'b0011")), v("4'bxxxx"));
        assert_eq!(eval_binop(BinaryOp::Sub, &v("4'b0010"), &v("4'b0011")), v("4'b1111"));
        assert_eq!(eval_binop(BinaryOp::Mul, &v("4'b0110"), &v("4'b0011")), v("4'b0010"));
        assert_eq!(eval_binop(BinaryOp::Udiv, &v("4'd7"), &v("4'd2")), v("4'd3"));
        assert_eq!(eval_binop(BinaryOp::Udiv, &v("4'd7"), &v("4'd0")), v("4'bxxxx"));
        assert_eq!(eval_binop(BinaryOp::Urem, &v("4'd7"), &v("4'd2")), v("4'd1"));
        // -7 sdiv 2 = -3, -7 srem 2 = -1 (remainder takes the dividend sign).
        assert_eq!(eval_binop(BinaryOp::Sdiv, &v("4'b1001"), &v("4'b0010")), v("4'b1101"));
        assert_eq!(eval_binop(BinaryOp::Srem, &v("4'b1001"), &v("4'b0010")), v("4'b1111"));
        assert_eq!(eval_unop(UnaryOp::Neg, &v("4'b0011")), v("4'b1101"));
    }

    #[test]
    fn wide_arithmetic_uses_all_limbs() {
        let a = v("96'hFFFFFFFFFFFFFFFFFFFFFFFF");
        let one = v("96'h1");
        assert_eq!(eval_binop(BinaryOp::Add, &a, &one), v("96'h0"));
        let b = v("96'h100000000");
        assert_eq!(
            eval_binop(BinaryOp::Mul, &b, &b),
            v("96'h10000000000000000")
        );
        assert_eq!(eval_binop(BinaryOp::Udiv, &a, &b).to_string(), v("96'hFFFFFFFFFFFFFFFF").to_string());
    }

    #[test]
    fn power_cases() {
        assert_eq!(eval_binop(BinaryOp::Upow, &v("8'd3"), &v("8'd4")), v("8'd81"));
        assert_eq!(eval_binop(BinaryOp::Upow, &v("8'd2"), &v("8'd9")), v("8'd0"));
        assert_eq!(eval_binop(BinaryOp::Upow, &v("8'd0"), &v("8'd0")), v("8'd1"));
        // Signed: -1 ** odd = -1, -1 ** even = 1; 0 ** negative = x.
        assert_eq!(eval_binop(BinaryOp::Pow, &v("4'b1111"), &v("4'd3")), v("4'b1111"));
        assert_eq!(eval_binop(BinaryOp::Pow, &v("4'b1111"), &v("4'd2")), v("4'd1"));
        assert_eq!(eval_binop(BinaryOp::Pow, &v("4'd0"), &v("4'b1111")), v("4'bxxxx"));
        assert_eq!(eval_binop(BinaryOp::Pow, &v("4'd2"), &v("4'b1110")), v("4'd0"));
        assert_eq!(eval_binop(BinaryOp::Pow, &v("4'd2"), &v("4'd3")), v("4'd8"));
    }

    #[test]
    fn comparisons() {
        assert_eq!(eval_binop(BinaryOp::Ult, &v("4'd3"), &v("4'd9")), v("1'b1"));
        assert_eq!(eval_binop(BinaryOp::Slt, &v("4'b1001"), &v("4'd2")), v("1'b1"));
        assert_eq!(eval_binop(BinaryOp::Sgt, &v("4'b1001"), &v("4'd2")), v("1'b0"));
        assert_eq!(eval_binop(BinaryOp::Uge, &v("4'd9"), &v("4'd9")), v("1'b1"));
        assert_eq!(eval_binop(BinaryOp::Ult, &v("4'b10x0"), &v("4'd9")), v("1'bx"));
    }

    #[test]
    fn equality_follows_ambiguity_rule() {
        assert_eq!(eval_binop(BinaryOp::Eq, &v("3'b110"), &v("3'b110")), v("1'b1"));
        assert_eq!(eval_binop(BinaryOp::Eq, &v("3'b110"), &v("3'b111")), v("1'b0"));
        // A definite mismatch decides even with x elsewhere.
        assert_eq!(eval_binop(BinaryOp::Eq, &v("3'b1x0"), &v("3'b101")), v("1'b0"));
        assert_eq!(eval_binop(BinaryOp::Eq, &v("3'b110"), &v("3'b11x")), v("1'bx"));
        assert_eq!(eval_binop(BinaryOp::Neq, &v("3'b1x0"), &v("3'b101")), v("1'b1"));
        // Case equality never yields x.
        assert_eq!(eval_binop(BinaryOp::Equiv, &v("3'b1x0"), &v("3'b1x0")), v("1'b1"));
        assert_eq!(eval_binop(BinaryOp::Equiv, &v("3'b1x0"), &v("3'b110")), v("1'b0"));
        assert_eq!(eval_binop(BinaryOp::Nequiv, &v("3'b1x0"), &v("3'b1z0")), v("1'b1"));
    }

    #[test]
    fn shifts() {
        assert_eq!(eval_binop(BinaryOp::Shl, &v("4'b0110"), &v("2'd1")), v("4'b1100"));
        assert_eq!(eval_binop(BinaryOp::Lshr, &v("4'b1001"), &v("2'd1")), v("4'b0100"));
        assert_eq!(eval_binop(BinaryOp::Ashr, &v("4'b1100"), &v("2'd1")), v("4'b1110"));
        assert_eq!(eval_binop(BinaryOp::Ashr, &v("4'b0100"), &v("2'd1")), v("4'b0010"));
        // Saturating amounts and x amounts.
        assert_eq!(eval_binop(BinaryOp::Shl, &v("4'b1111"), &v("4'd9")), v("4'b0000"));
        assert_eq!(eval_binop(BinaryOp::Ashr, &v("4'b1000"), &v("4'd9")), v("4'b1111"));
        assert_eq!(eval_binop(BinaryOp::Shl, &v("4'b1111"), &v("2'bx0")), v("4'bxxxx"));
        // x bits shift positionally.
        assert_eq!(eval_binop(BinaryOp::Shl, &v("4'b01x0"), &v("2'd1")), v("4'b1x00"));
    }

    #[test]
    fn concat_and_select() {
        assert_eq!(eval_binop(BinaryOp::Concat, &v("2'b10"), &v("3'b0x1")), v("5'b100x1"));
        assert_eq!(eval_select(&v("6'b10x010"), 4, 1), v("4'b0x01"));
        assert_eq!(eval_select(&v("4'b1010"), 5, 3), v("3'bxx1"));
    }

    #[test]
    fn reductions() {
        assert_eq!(eval_unop(UnaryOp::Rand, &v("3'b111")), v("1'b1"));
        assert_eq!(eval_unop(UnaryOp::Rand, &v("3'b1x1")), v("1'bx"));
        assert_eq!(eval_unop(UnaryOp::Rand, &v("3'b0x1")), v("1'b0"));
        assert_eq!(eval_unop(UnaryOp::Ror, &v("3'b0x1")), v("1'b1"));
        assert_eq!(eval_unop(UnaryOp::Ror, &v("3'b000")), v("1'b0"));
        assert_eq!(eval_unop(UnaryOp::Ror, &v("3'b0x0")), v("1'bx"));
        assert_eq!(eval_unop(UnaryOp::Rxor, &v("4'b1101")), v("1'b1"));
        assert_eq!(eval_unop(UnaryOp::Rxor, &v("4'b1z01")), v("1'bx"));
    }

    #[test]
    fn mux_semantics() {
        let t = v("4'b1010");
        let e = v("4'b1001");
        assert_eq!(eval_mux(&v("1'b1"), &t, &e), t);
        assert_eq!(eval_mux(&v("1'b0"), &t, &e), e);
        // Ambiguous select merges: equal defined bits survive.
        assert_eq!(eval_mux(&v("1'bx"), &t, &e), v("4'b10xx"));
        assert_eq!(eval_mux(&v("1'bz"), &v("2'bxx"), &v("2'bxx")), v("2'bxx"));
    }

    #[test]
    fn widening_and_cast() {
        assert_eq!(eval_zext(&v("3'b101"), 6), v("6'b000101"));
        assert_eq!(eval_sext(&v("3'b101"), 6), v("6'b111101"));
        assert_eq!(eval_sext(&v("3'bx01"), 6), v("6'bxxxx01"));
        assert_eq!(eval_zext(&v("6'b110101"), 3), v("3'b101"));
        let c = eval_cast(&v("3'sb101"), 6, false);
        assert_eq!(c.to_string(), "6'b111101");
        assert!(!c.is_signed());
        assert!(eval_cast(&v("3'b101"), 4, true).is_signed());
        assert_eq!(eval_cast(&v("3'b101"), 4, true).to_string(), "4'sb0101");
    }

    #[test]
    fn to_u64_and_from_u64() {
        assert_eq!(v("6'd32").to_u64(), Some(32));
        assert_eq!(v("4'b10x0").to_u64(), None);
        assert_eq!(LogicVec::from_u64(6, 32), v("6'd32"));
        assert_eq!(LogicVec::from_u64(3, 9).to_u64(), Some(1));
    }
}
