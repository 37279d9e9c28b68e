//! Abstract bits and vectors for bit-level constant propagation.

use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use super::logic::{
    bitwise_tables, eval_binop, eval_mux, eval_unop, BinaryOp, LogicBit, LogicVec, UnaryOp,
};

/// An abstract four-valued bit.
///
/// `U` is bottom (no driven value seen yet), `B` abstracts {0,1}, and `T` is
/// top, abstracting all four concrete values. `X` and `Z` sit beside `B`,
/// not below it: joining a defined bit with an unknown goes straight to `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbsBit {
    /// Bottom: concretizes to the empty set.
    U,
    /// Exactly 0.
    Zero,
    /// Exactly 1.
    One,
    /// Exactly x.
    X,
    /// Exactly z.
    Z,
    /// Either 0 or 1.
    B,
    /// Top: any of 0, 1, x, z.
    T,
}

impl AbsBit {
    /// All seven lattice elements.
    pub const ALL: [AbsBit; 7] = [
        AbsBit::U,
        AbsBit::Zero,
        AbsBit::One,
        AbsBit::X,
        AbsBit::Z,
        AbsBit::B,
        AbsBit::T,
    ];

    /// Concretization: the set of concrete bits this element stands for.
    pub fn gamma(self) -> &'static [LogicBit] {
        match self {
            AbsBit::U => &[],
            AbsBit::Zero => &[LogicBit::Zero],
            AbsBit::One => &[LogicBit::One],
            AbsBit::X => &[LogicBit::X],
            AbsBit::Z => &[LogicBit::Z],
            AbsBit::B => &[LogicBit::Zero, LogicBit::One],
            AbsBit::T => &[LogicBit::Zero, LogicBit::One, LogicBit::X, LogicBit::Z],
        }
    }

    /// Abstraction of a single concrete bit.
    pub fn alpha(b: LogicBit) -> AbsBit {
        match b {
            LogicBit::Zero => AbsBit::Zero,
            LogicBit::One => AbsBit::One,
            LogicBit::X => AbsBit::X,
            LogicBit::Z => AbsBit::Z,
        }
    }

    /// Least upper bound.
    pub fn join(self, other: AbsBit) -> AbsBit {
        use AbsBit::*;
        match (self, other) {
            (U, b) | (b, U) => b,
            (a, b) if a == b => a,
            (T, _) | (_, T) => T,
            (Zero, One) | (One, Zero) => B,
            (Zero, B) | (B, Zero) | (One, B) | (B, One) => B,
            // Any mix involving X or Z beyond identity goes to top.
            _ => T,
        }
    }

    /// Partial order: `self` is at or below `other`.
    pub fn leq(self, other: AbsBit) -> bool {
        self.join(other) == other
    }

    /// Whether the concretizations intersect.
    pub fn intersects(self, other: AbsBit) -> bool {
        self.gamma().iter().any(|b| other.gamma().contains(b))
    }

    /// True for singleton elements (exactly one concrete bit).
    pub fn is_fixed(self) -> bool {
        matches!(self, AbsBit::Zero | AbsBit::One | AbsBit::X | AbsBit::Z)
    }

    /// The concrete bit of a singleton element.
    pub fn fixed_bit(self) -> Option<LogicBit> {
        match self {
            AbsBit::Zero => Some(LogicBit::Zero),
            AbsBit::One => Some(LogicBit::One),
            AbsBit::X => Some(LogicBit::X),
            AbsBit::Z => Some(LogicBit::Z),
            _ => None,
        }
    }

    /// True when x or z is in the concretization.
    pub fn may_be_xz(self) -> bool {
        matches!(self, AbsBit::X | AbsBit::Z | AbsBit::T)
    }

    fn to_char(self) -> char {
        match self {
            AbsBit::U => 'U',
            AbsBit::Zero => '0',
            AbsBit::One => '1',
            AbsBit::X => 'X',
            AbsBit::Z => 'Z',
            AbsBit::B => 'B',
            AbsBit::T => 'T',
        }
    }

    fn from_char(c: char) -> Option<AbsBit> {
        match c {
            'U' => Some(AbsBit::U),
            '0' => Some(AbsBit::Zero),
            '1' => Some(AbsBit::One),
            'X' => Some(AbsBit::X),
            'Z' => Some(AbsBit::Z),
            'B' => Some(AbsBit::B),
            'T' => Some(AbsBit::T),
            _ => None,
        }
    }
}

impl fmt::Display for AbsBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// An abstract bit vector, most-significant bit first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AbsVec {
    bits: SmallVec<[AbsBit; 8]>,
    signed: bool,
}

impl AbsVec {
    /// Builds from most-significant-first bits.
    pub fn new(bits: impl Into<SmallVec<[AbsBit; 8]>>, signed: bool) -> AbsVec {
        let bits = bits.into();
        assert!(!bits.is_empty(), "AbsVec must have width >= 1");
        AbsVec { bits, signed }
    }

    /// A vector of `width` copies of `b`.
    pub fn filled(width: usize, b: AbsBit) -> AbsVec {
        assert!(width >= 1);
        AbsVec {
            bits: std::iter::repeat(b).take(width).collect(),
            signed: false,
        }
    }

    /// Bottom: the value of a never-driven signal.
    pub fn bottom(width: usize) -> AbsVec {
        AbsVec::filled(width, AbsBit::U)
    }

    /// Top: the worst-case value.
    pub fn top(width: usize) -> AbsVec {
        AbsVec::filled(width, AbsBit::T)
    }

    /// Abstraction of a concrete vector.
    pub fn alpha(v: &LogicVec) -> AbsVec {
        AbsVec {
            bits: v.bits().iter().map(|&b| AbsBit::alpha(b)).collect(),
            signed: v.is_signed(),
        }
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
    pub fn with_signed(mut self, signed: bool) -> AbsVec {
        self.signed = signed;
        self
    }

    /// Bit `i`, least-significant first.
    pub fn bit(&self, i: usize) -> AbsBit {
        self.bits[self.bits.len() - 1 - i]
    }

    /// Bits most-significant first.
    pub fn bits(&self) -> &[AbsBit] {
        &self.bits
    }

    /// True when any bit is bottom (empty concretization).
    pub fn has_bottom(&self) -> bool {
        self.bits.contains(&AbsBit::U)
    }

    /// True when every bit is a singleton.
    pub fn is_fixed(&self) -> bool {
        self.bits.iter().all(|b| b.is_fixed())
    }

    /// True when some bit may concretize to x or z.
    pub fn may_have_xz(&self) -> bool {
        self.bits.iter().any(|b| b.may_be_xz())
    }

    /// The unique concrete value of a fully fixed vector.
    pub fn fixed_value(&self) -> Option<LogicVec> {
        let mut bits: SmallVec<[LogicBit; 8]> = SmallVec::with_capacity(self.width());
        for b in &self.bits {
            bits.push(b.fixed_bit()?);
        }
        Some(LogicVec::new(bits, self.signed))
    }

    /// The unsigned numeric value, if fixed, defined, and at most 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        self.fixed_value()?.to_u64()
    }

    /// Number of concrete vectors in the concretization.
    pub fn gamma_len(&self) -> u64 {
        self.bits
            .iter()
            .map(|b| b.gamma().len() as u64)
            .product()
    }

    /// Iterates every concrete vector in the concretization.
    ///
    /// Yields nothing when any bit is bottom. Intended for tests and small
    /// widths; the count is the product of per-bit set sizes.
    pub fn concretizations(&self) -> impl Iterator<Item = LogicVec> + '_ {
        let width = self.width();
        let mut odometer = vec![0usize; width];
        let mut done = self.has_bottom();
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let bits: SmallVec<[LogicBit; 8]> = (0..width)
                .map(|i| self.bits[i].gamma()[odometer[i]])
                .collect();
            // Advance the odometer; stop after the last combination.
            let mut i = width;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                odometer[i] += 1;
                if odometer[i] < self.bits[i].gamma().len() {
                    break;
                }
                odometer[i] = 0;
            }
            Some(LogicVec::new(bits, self.signed))
        })
    }

    /// True when `v` is in the concretization.
    pub fn contains(&self, v: &LogicVec) -> bool {
        self.width() == v.width()
            && self
                .bits
                .iter()
                .zip(v.bits())
                .all(|(a, c)| a.gamma().contains(c))
    }
}

impl fmt::Display for AbsVec {
    /// Plain digit string, most-significant first, e.g. `0BBBBB`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{}", b.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for AbsVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AbsVec({self})")
    }
}

impl FromStr for AbsVec {
    type Err = String;

    fn from_str(s: &str) -> Result<AbsVec, String> {
        let bits: Option<SmallVec<[AbsBit; 8]>> = s.chars().map(AbsBit::from_char).collect();
        match bits {
            Some(bits) if !bits.is_empty() => Ok(AbsVec { bits, signed: false }),
            _ => Err(format!("bad abstract vector `{s}`")),
        }
    }
}

/// Per-bit least upper bound. Operands must share a width.
pub fn abs_join(a: &AbsVec, b: &AbsVec) -> AbsVec {
    assert_eq!(a.width(), b.width(), "abs_join requires equal widths");
    AbsVec {
        bits: a
            .bits
            .iter()
            .zip(&b.bits)
            .map(|(&x, &y)| x.join(y))
            .collect(),
        signed: a.signed,
    }
}

/// Whether two abstract vectors may hold bitwise-equal concrete values.
///
/// `false` ("impossible") exactly when some bit position has disjoint
/// concretizations; for `==` conditions that means the comparison can never
/// evaluate to true, and for case arms it matches case-equality semantics.
pub fn may_equal(a: &AbsVec, b: &AbsVec) -> bool {
    assert_eq!(a.width(), b.width(), "may_equal requires equal widths");
    a.bits
        .iter()
        .zip(&b.bits)
        .all(|(&x, &y)| x.intersects(y))
}

// ---------------------------------------------------------------------------
// Transfer functions.

/// Best per-bit transformer for a concrete per-bit function, computed by
/// enumerating the operand concretizations (at most 4 x 4 pairs).
fn abs_bit_binop(f: fn(LogicBit, LogicBit) -> LogicBit, a: AbsBit, b: AbsBit) -> AbsBit {
    let mut out = AbsBit::U;
    for &x in a.gamma() {
        for &y in b.gamma() {
            out = out.join(AbsBit::alpha(f(x, y)));
        }
    }
    out
}

/// Best per-bit negation, by enumerating the concretization.
fn abs_bit_not(a: AbsBit) -> AbsBit {
    let mut out = AbsBit::U;
    for &x in a.gamma() {
        let r = eval_unop(UnaryOp::Not, &LogicVec::filled(1, x));
        out = out.join(AbsBit::alpha(r.bit(0)));
    }
    out
}

/// The coarse envelope for non-positional operators: bottom if any operand
/// bit is bottom, top if any operand bit may be x/z, otherwise all-B.
fn coarse(width: usize, operands: &[&AbsVec]) -> AbsVec {
    if operands.iter().any(|v| v.has_bottom()) {
        AbsVec::bottom(width)
    } else if operands.iter().any(|v| v.may_have_xz()) {
        AbsVec::top(width)
    } else {
        AbsVec::filled(width, AbsBit::B)
    }
}

/// Abstract transfer for a unary operator.
pub fn abs_unop(op: UnaryOp, a: &AbsVec) -> AbsVec {
    if let Some(v) = a.fixed_value() {
        return AbsVec::alpha(&eval_unop(op, &v));
    }
    match op {
        UnaryOp::Buf => a.clone(),
        UnaryOp::Not => AbsVec {
            bits: a.bits.iter().map(|&b| abs_bit_not(b)).collect(),
            signed: false,
        },
        UnaryOp::Neg => coarse(a.width(), &[a]),
        UnaryOp::Rand => reduction(a, AbsBit::Zero, AbsBit::One),
        UnaryOp::Ror => reduction(a, AbsBit::One, AbsBit::Zero),
        UnaryOp::Rxor => {
            if a.has_bottom() {
                AbsVec::bottom(1)
            } else if a.may_have_xz() {
                AbsVec::filled(1, AbsBit::T)
            } else {
                AbsVec::filled(1, AbsBit::B)
            }
        }
    }
}

/// Shared shape of the and/or reductions: `decider` short-circuits to
/// `decided` (0 for rand, 1 for ror) when certainly present.
fn reduction(a: &AbsVec, decider: AbsBit, other: AbsBit) -> AbsVec {
    if a.has_bottom() {
        return AbsVec::bottom(1);
    }
    if a.bits.contains(&decider) {
        return AbsVec::filled(1, decider);
    }
    if a.may_have_xz() {
        // No certain decider, and an x/z may appear: anything is possible
        // except ruling classes out bit by bit; stay at top.
        AbsVec::filled(1, AbsBit::T)
    } else if a.bits.contains(&AbsBit::B) {
        AbsVec::filled(1, AbsBit::B)
    } else {
        // All bits fixed defined and none equal to the decider.
        AbsVec::filled(1, other)
    }
}

/// Abstract transfer for a binary operator. Equal-width operators require
/// equal operand widths, as in [`eval_binop`].
pub fn abs_binop(op: BinaryOp, a: &AbsVec, b: &AbsVec) -> AbsVec {
    if op.requires_equal_widths() {
        assert_eq!(a.width(), b.width(), "operator {} requires equal operand widths", op.keyword());
    }
    let rw = op.result_width(a.width(), b.width());
    if a.has_bottom() || b.has_bottom() {
        return AbsVec::bottom(rw);
    }
    if let Some(table) = bitwise_tables(op) {
        return AbsVec {
            bits: a
                .bits
                .iter()
                .zip(&b.bits)
                .map(|(&x, &y)| abs_bit_binop(table, x, y))
                .collect(),
            signed: false,
        };
    }
    if op == BinaryOp::Concat {
        let mut bits: SmallVec<[AbsBit; 8]> = SmallVec::with_capacity(rw);
        bits.extend(a.bits.iter().copied());
        bits.extend(b.bits.iter().copied());
        return AbsVec { bits, signed: false };
    }
    if let (Some(va), Some(vb)) = (a.fixed_value(), b.fixed_value()) {
        return AbsVec::alpha(&eval_binop(op, &va, &vb));
    }
    match op {
        BinaryOp::Equiv | BinaryOp::Nequiv => {
            // Case equality never yields x. A disjoint bit position decides
            // the answer; all-singleton-equal positions would have hit the
            // fixed path above.
            if !may_equal(a, b) {
                AbsVec::alpha(&LogicVec::filled(
                    1,
                    if op == BinaryOp::Equiv { LogicBit::Zero } else { LogicBit::One },
                ))
            } else {
                AbsVec::filled(1, AbsBit::B)
            }
        }
        BinaryOp::Shl | BinaryOp::Lshr | BinaryOp::Ashr => {
            match b.fixed_value() {
                Some(v) if v.has_xz() => AbsVec::filled(rw, AbsBit::X),
                Some(v) => {
                    // Fixed defined amount: shift abstract bits positionally,
                    // saturating at the operand width.
                    let mut n = 0usize;
                    for i in 0..v.width() {
                        if v.bit(i) == LogicBit::One {
                            if i >= 32 {
                                n = a.width();
                                break;
                            }
                            n = n.saturating_add(1usize << i);
                        }
                    }
                    let n = n.min(a.width());
                    let fill = if op == BinaryOp::Ashr { a.bit(a.width() - 1) } else { AbsBit::Zero };
                    let mut bits: SmallVec<[AbsBit; 8]> = SmallVec::with_capacity(rw);
                    for i in (0..a.width()).rev() {
                        let bit = match op {
                            BinaryOp::Shl => {
                                if i >= n { a.bit(i - n) } else { AbsBit::Zero }
                            }
                            _ => {
                                if i + n < a.width() { a.bit(i + n) } else { fill }
                            }
                        };
                        bits.push(bit);
                    }
                    AbsVec { bits, signed: false }
                }
                None => coarse(rw, &[a, b]),
            }
        }
        BinaryOp::Udiv | BinaryOp::Urem | BinaryOp::Sdiv | BinaryOp::Srem => {
            // Division by zero yields all-x even from defined operands.
            if b.bits.iter().all(|&x| x.intersects(AbsBit::Zero)) {
                AbsVec::top(rw)
            } else {
                coarse(rw, &[a, b])
            }
        }
        BinaryOp::Pow => {
            // A negative exponent with a zero base yields all-x.
            let exp_may_be_negative = b.bit(b.width() - 1).intersects(AbsBit::One);
            let base_may_be_zero = a.bits.iter().all(|&x| x.intersects(AbsBit::Zero));
            if exp_may_be_negative && base_may_be_zero {
                AbsVec::top(rw)
            } else {
                coarse(rw, &[a, b])
            }
        }
        _ => coarse(rw, &[a, b]),
    }
}

/// Abstract transfer for `sel ? t : e`; `sel` must be one bit wide.
pub fn abs_mux(sel: &AbsVec, t: &AbsVec, e: &AbsVec) -> AbsVec {
    assert_eq!(sel.width(), 1, "mux selector must be 1 bit");
    assert_eq!(t.width(), e.width(), "mux arms must share a width");
    if sel.has_bottom() || t.has_bottom() || e.has_bottom() {
        return AbsVec::bottom(t.width());
    }
    let s = sel.bit(0);
    let mut bits: SmallVec<[AbsBit; 8]> = SmallVec::with_capacity(t.width());
    for (i, (&tb, &eb)) in t.bits.iter().zip(&e.bits).enumerate() {
        let _ = i;
        let mut out = AbsBit::U;
        for &sc in s.gamma() {
            for &tc in tb.gamma() {
                for &ec in eb.gamma() {
                    let r = eval_mux(
                        &LogicVec::filled(1, sc),
                        &LogicVec::filled(1, tc),
                        &LogicVec::filled(1, ec),
                    );
                    out = out.join(AbsBit::alpha(r.bit(0)));
                }
            }
        }
        bits.push(out);
    }
    AbsVec { bits, signed: false }
}

/// Abstract select of bits `msb..=lsb`; out-of-range positions are x.
pub fn abs_select(a: &AbsVec, msb: usize, lsb: usize) -> AbsVec {
    assert!(msb >= lsb);
    let mut bits: SmallVec<[AbsBit; 8]> = SmallVec::with_capacity(msb - lsb + 1);
    for i in (lsb..=msb).rev() {
        bits.push(if i < a.width() { a.bit(i) } else { AbsBit::X });
    }
    AbsVec { bits, signed: false }
}

/// Abstract zero extension (or truncation) to `width`.
pub fn abs_zext(a: &AbsVec, width: usize) -> AbsVec {
    abs_resize(a, width, AbsBit::Zero, false)
}

/// Abstract sign extension (or truncation) to `width`.
pub fn abs_sext(a: &AbsVec, width: usize) -> AbsVec {
    abs_resize(a, width, a.bit(a.width() - 1), a.signed)
}

/// Abstract cast: resize using source signedness, re-mark the result.
pub fn abs_cast(a: &AbsVec, width: usize, signed: bool) -> AbsVec {
    let fill = if a.signed { a.bit(a.width() - 1) } else { AbsBit::Zero };
    abs_resize(a, width, fill, signed)
}

fn abs_resize(a: &AbsVec, width: usize, fill: AbsBit, signed: bool) -> AbsVec {
    assert!(width >= 1);
    let mut bits: SmallVec<[AbsBit; 8]> = SmallVec::with_capacity(width);
    for i in (0..width).rev() {
        bits.push(if i < a.width() { a.bit(i) } else { fill });
    }
    AbsVec { bits, signed }
}

/// An operation shape for the umbrella [`abs_transfer`] dispatcher.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferOp {
    /// Unary operator; one argument.
    Un(UnaryOp),
    /// Binary operator; two arguments.
    Bin(BinaryOp),
    /// Conditional select; arguments are (sel, then, else).
    Mux,
    /// Zero extension to the given width; one argument.
    Zext(usize),
    /// Sign extension to the given width; one argument.
    Sext(usize),
    /// Cast to the given width and signedness; one argument.
    Cast(usize, bool),
    /// Constant-range select `[msb:lsb]`; one argument.
    Select(usize, usize),
}

/// Applies the abstract transfer function for `op` to `args`.
///
/// Panics when the argument count or widths do not match the operation;
/// the IR validator rejects such programs before analyses run.
pub fn abs_transfer(op: TransferOp, args: &[&AbsVec]) -> AbsVec {
    match op {
        TransferOp::Un(u) => abs_unop(u, args[0]),
        TransferOp::Bin(b) => abs_binop(b, args[0], args[1]),
        TransferOp::Mux => abs_mux(args[0], args[1], args[2]),
        TransferOp::Zext(w) => abs_zext(args[0], w),
        TransferOp::Sext(w) => abs_sext(args[0], w),
        TransferOp::Cast(w, s) => abs_cast(args[0], w, s),
        TransferOp::Select(msb, lsb) => abs_select(args[0], msb, lsb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn av(s: &str) -> AbsVec {
        s.parse().unwrap()
    }

    fn lv(s: &str) -> LogicVec {
        LogicVec::parse_literal(s).unwrap()
    }

    // The join table, frozen by hand from the lattice definition. Row is the
    // left operand, in U,0,1,X,Z,B,T order.
    const JOIN_TABLE: [[char; 7]; 7] = [
        ['U', '0', '1', 'X', 'Z', 'B', 'T'],
        ['0', '0', 'B', 'T', 'T', 'B', 'T'],
        ['1', 'B', '1', 'T', 'T', 'B', 'T'],
        ['X', 'T', 'T', 'X', 'T', 'T', 'T'],
        ['Z', 'T', 'T', 'T', 'Z', 'T', 'T'],
        ['B', 'B', 'B', 'T', 'T', 'B', 'T'],
        ['T', 'T', 'T', 'T', 'T', 'T', 'T'],
    ];

    #[test]
    fn join_matches_frozen_table() {
        for (i, &a) in AbsBit::ALL.iter().enumerate() {
            for (j, &b) in AbsBit::ALL.iter().enumerate() {
                assert_eq!(
                    a.join(b),
                    AbsBit::from_char(JOIN_TABLE[i][j]).unwrap(),
                    "join({a:?}, {b:?})"
                );
            }
        }
    }

    #[test]
    fn join_is_least_superset_of_gammas() {
        // Independent derivation: join(a,b) must be the unique element with
        // the smallest concretization containing gamma(a) union gamma(b).
        for &a in &AbsBit::ALL {
            for &b in &AbsBit::ALL {
                let j = a.join(b);
                assert!(a.gamma().iter().all(|g| j.gamma().contains(g)));
                assert!(b.gamma().iter().all(|g| j.gamma().contains(g)));
                for &c in &AbsBit::ALL {
                    let covers = a.gamma().iter().all(|g| c.gamma().contains(g))
                        && b.gamma().iter().all(|g| c.gamma().contains(g));
                    if covers && c.gamma().len() < j.gamma().len() {
                        panic!("join({a:?},{b:?}) = {j:?} is not least; {c:?} is smaller");
                    }
                }
            }
        }
    }

    #[test]
    fn partial_order_basics() {
        use AbsBit::*;
        for &a in &AbsBit::ALL {
            assert!(U.leq(a));
            assert!(a.leq(T));
            assert!(a.leq(a));
        }
        assert!(Zero.leq(B) && One.leq(B));
        assert!(!X.leq(B) && !Z.leq(B));
        assert!(!B.leq(Zero));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(av("0BBBBB").to_string(), "0BBBBB");
        assert_eq!(AbsVec::alpha(&lv("6'b100000")).to_string(), "100000");
        assert!("0Q".parse::<AbsVec>().is_err());
    }

    #[test]
    fn may_equal_examples() {
        // The CRC shape: a 5-bit counter zero-extended to 6 bits can never
        // equal 6'd32, but can equal 6'd0.
        assert!(!may_equal(&av("0BBBBB"), &av("100000")));
        assert!(may_equal(&av("0BBBBB"), &av("000000")));
        assert!(may_equal(&av("TTT"), &av("101")));
        assert!(!may_equal(&av("10B"), &av("11B")));
        // Bottom is disjoint from everything.
        assert!(!may_equal(&av("U"), &av("T")));
    }

    #[test]
    fn may_equal_matches_brute_force_width3() {
        let mut all = vec![AbsVec::filled(3, AbsBit::U); 0];
        for &a in &AbsBit::ALL {
            for &b in &AbsBit::ALL {
                for &c in &AbsBit::ALL {
                    all.push(AbsVec::new(vec![a, b, c], false));
                }
            }
        }
        for x in &all {
            for y in &all {
                let brute = x
                    .concretizations()
                    .any(|cx| y.concretizations().any(|cy| cx.bits() == cy.bits()));
                assert_eq!(may_equal(x, y), brute, "may_equal({x}, {y})");
            }
        }
    }

    #[test]
    fn transfer_fixed_operands_are_exact() {
        let a = AbsVec::alpha(&lv("4'b0010"));
        let b = AbsVec::alpha(&lv("4'b0011"));
        assert_eq!(abs_binop(BinaryOp::Add, &a, &b).to_string(), "0101");
        let xa = AbsVec::alpha(&lv("4'b00x0"));
        assert_eq!(abs_binop(BinaryOp::Add, &xa, &b).to_string(), "XXXX");
    }

    #[test]
    fn transfer_envelope_cases() {
        // 0011 + 000B: this implementation takes the sound all-B fallback.
        assert_eq!(abs_binop(BinaryOp::Add, &av("0011"), &av("000B")).to_string(), "BBBB");
        // Mixing in a possible x forces top.
        assert_eq!(abs_binop(BinaryOp::Add, &av("00T1"), &av("000B")).to_string(), "TTTT");
        // Bottom operands stay bottom.
        assert_eq!(abs_binop(BinaryOp::Add, &av("00U1"), &av("000B")).to_string(), "UUUU");
        assert_eq!(abs_unop(UnaryOp::Neg, &av("0B")).to_string(), "BB");
    }

    #[test]
    fn transfer_positional_cases() {
        assert_eq!(abs_binop(BinaryOp::Concat, &av("0B"), &av("1X")).to_string(), "0B1X");
        assert_eq!(abs_binop(BinaryOp::And, &av("01BX"), &av("1111")).to_string(), "01BX"
        );
        assert_eq!(abs_binop(BinaryOp::And, &av("BBBB"), &av("0000")).to_string(), "0000");
        // B & X: 0&x=0, 1&x=x, so the envelope is T.
        assert_eq!(abs_binop(BinaryOp::And, &av("B"), &av("X")).to_string(), "T");
        assert_eq!(abs_binop(BinaryOp::Shl, &av("0B1X"), &AbsVec::alpha(&lv("2'd1"))).to_string(), "B1X0");
        assert_eq!(abs_binop(BinaryOp::Ashr, &av("B01X"), &AbsVec::alpha(&lv("2'd2"))).to_string(), "BBB0");
        assert_eq!(abs_select(&av("10XB"), 2, 1).to_string(), "0X");
        assert_eq!(abs_select(&av("10"), 2, 1).to_string(), "X1");
        assert_eq!(abs_zext(&av("1B"), 4).to_string(), "001B");
        assert_eq!(abs_sext(&av("BX"), 4).to_string(), "BBBX");
    }

    #[test]
    fn transfer_mux_cases() {
        assert_eq!(abs_mux(&av("1"), &av("0B"), &av("11")).to_string(), "0B");
        assert_eq!(abs_mux(&av("0"), &av("0B"), &av("11")).to_string(), "11");
        assert_eq!(abs_mux(&av("B"), &av("00"), &av("01")).to_string(), "0B");
        // x select merges: equal defined bits survive, the rest go x-ish.
        assert_eq!(abs_mux(&av("X"), &av("00"), &av("01")).to_string(), "0X");
        assert_eq!(abs_mux(&av("T"), &av("00"), &av("01")).to_string(), "0T");
    }

    #[test]
    fn transfer_case_equality() {
        assert_eq!(abs_binop(BinaryOp::Equiv, &av("10B"), &av("11B")).to_string(), "0");
        assert_eq!(abs_binop(BinaryOp::Equiv, &av("1XB"), &av("1XB")).to_string(), "B");
        assert_eq!(
            abs_binop(BinaryOp::Equiv, &AbsVec::alpha(&lv("3'b1x0")), &AbsVec::alpha(&lv("3'b1x0"))).to_string(),
            "1"
        );
        assert_eq!(abs_binop(BinaryOp::Nequiv, &av("10B"), &av("11B")).to_string(), "1");
    }

    /// Exhaustive soundness at width 2: for every abstract operand pair and
    /// every concrete pair in their concretizations, the concrete result is
    /// inside the transfer result's concretization. The full widths <= 4 run
    /// lives in the acceptance suite.
    #[test]
    fn transfer_soundness_width2_exhaustive() {
        let mut all = Vec::new();
        for &a in &AbsBit::ALL {
            for &b in &AbsBit::ALL {
                all.push(AbsVec::new(vec![a, b], false));
            }
        }
        for op in BinaryOp::ALL {
            for a in &all {
                for b in &all {
                    let out = abs_binop(op, a, b);
                    for ca in a.concretizations() {
                        for cb in b.concretizations() {
                            let r = eval_binop(op, &ca, &cb);
                            assert!(
                                out.contains(&r),
                                "{} {} {}: concrete {} {} {} = {} not in {}",
                                a, op.keyword(), b, ca, op.keyword(), cb, r, out
                            );
                        }
                    }
                }
            }
        }
        for op in UnaryOp::ALL {
            for a in &all {
                let out = abs_unop(op, a);
                for ca in a.concretizations() {
                    let r = eval_unop(op, &ca);
                    assert!(out.contains(&r), "{} {}: {} -> {} not in {}", op.keyword(), a, ca, r, out);
                }
            }
        }
    }
}
